import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np
from scipy.optimize import minimize
from tqdm import tqdm

from Project.Config import OptimizerConfig
from Project.Correlators.Correlators_module import canonical_settings, correlator_kernel
from Project.Errors import ParameterRangeError
from Project.Run import THETA_MAX, ZERO_ANCILLA, AncillaState, check_theta
from Project.Scenario import (CorrelatorResult, CrossingResult, ParameterKind, Scenario,
                              ScenarioKind, SweepResult)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# initial simplex edge of a run started from a grid node or random point; polish runs shrink it
START_STEP = 0.3
POLISH_SHRINK = 0.1


@dataclass
class _Run:
    value: float
    settings: np.ndarray
    evaluations: int
    success: bool
    max_abs: float


class _CountedObjective:
    """Negated correlator for scipy, counting calls and the largest |value| seen."""

    def __init__(self, scenario: Scenario):
        self.kernel = correlator_kernel(scenario)
        self.calls = 0
        self.max_abs = 0.0

    def value(self, x: np.ndarray) -> float:
        self.calls += 1
        v = self.kernel(x)
        self.max_abs = max(self.max_abs, abs(v))
        return v

    def __call__(self, x: np.ndarray) -> float:
        return -self.value(x)


class Optimizer:
    '''
    Grid-seeded multi-start Nelder-Mead maximization of scenario correlators.

    Random numbers come from a Philox generator keyed by `config.rng_seed`: one
    stream for the grid subset, one for the random starts. Results do not depend
    on `config.workers`.
    '''

    def __init__(self, config: OptimizerConfig = OptimizerConfig(), progress: bool = False):
        self.config = config
        self.progress = progress

    def _generator(self, stream: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.config.rng_seed).jumped(stream))

    def _map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Order-preserving map, threaded when more than one worker is configured."""
        items = list(items)
        if self.config.workers == 1 or len(items) < 2:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(fn, items))

    @staticmethod
    def _axis(kind: ParameterKind, points: int) -> np.ndarray:
        if kind is ParameterKind.POLAR:
            return np.linspace(0.0, np.pi, points)
        return 2 * np.pi * np.arange(points) / points

    def grid_nodes(self, scenario: Scenario) -> np.ndarray:
        '''
        Coarse seeding grid of the scenario's setting space.

        The full product grid is used when it has at most `max_grid_nodes` nodes;
        otherwise that many nodes are drawn from it at random.
        '''
        g = self.config.grid_points_per_dim
        axes = [self._axis(p.kind, g) for p in scenario.setting_layout]
        total = g ** len(axes)
        if total <= self.config.max_grid_nodes:
            return np.array(list(itertools.product(*axes)))
        indices = self._generator(1).integers(0, g, size=(self.config.max_grid_nodes, len(axes)))
        return np.stack([axis[indices[:, i]] for i, axis in enumerate(axes)], axis=1)

    def random_starts(self, scenario: Scenario) -> np.ndarray:
        bounds = np.array([p.kind.bounds for p in scenario.setting_layout])
        rng = self._generator(2)
        return rng.uniform(bounds[:, 0], bounds[:, 1], size=(self.config.restarts, len(bounds)))

    def _simplex(self, objective: _CountedObjective, x0: np.ndarray, step: float):
        simplex = np.vstack([x0, x0 + step * np.eye(x0.size)])
        return minimize(objective, x0, method="Nelder-Mead",
                        options={"initial_simplex": simplex,
                                 "xatol": 1e-8,
                                 "fatol": self.config.simplex_tolerance,
                                 "maxiter": self.config.max_iterations,
                                 "maxfev": self.config.max_iterations,
                                 "adaptive": True})

    def _descend(self, scenario: Scenario, x0: np.ndarray) -> _Run:
        """One simplex run from x0."""
        objective = _CountedObjective(scenario)
        res = self._simplex(objective, np.asarray(x0, dtype=float), START_STEP)
        return _Run(-float(res.fun), np.array(res.x), objective.calls, bool(res.success), objective.max_abs)

    def _polish(self, scenario: Scenario, run: _Run) -> _Run:
        """`polish_rounds` restarts from the incumbent of a run with a shrinking simplex."""
        objective = _CountedObjective(scenario)
        value, settings, success = run.value, run.settings, run.success
        step = START_STEP
        for _ in range(self.config.polish_rounds):
            step *= POLISH_SHRINK
            res = self._simplex(objective, settings, step)
            if -res.fun >= value:
                value, settings, success = -float(res.fun), np.array(res.x), bool(res.success)
        return _Run(value, settings, run.evaluations + objective.calls, success,
                    max(run.max_abs, objective.max_abs))

    def maximize(self, scenario: Scenario, extra_seeds: Sequence[np.ndarray] = ()) -> CorrelatorResult:
        '''
        Maximizes the scenario's correlator over its setting vector.

        :param scenario: correlator kind and θ
        :param extra_seeds: additional start points, e.g. the optimum of a neighbouring θ
        :return: best value, canonical settings and convergence diagnostics
        '''
        logger.info(f"maximizing {scenario.kind.value} at theta={scenario.theta:.6f}")
        nodes = self.grid_nodes(scenario)
        grid_objective = _CountedObjective(scenario)
        grid_values = np.array([grid_objective.value(x) for x in nodes])
        order = np.argsort(-grid_values, kind="stable")[:self.config.grid_seeds]
        logger.debug(f"grid: {len(nodes)} nodes, best {grid_values[order[0]]:.10f}")

        starts = [nodes[i] for i in order]
        starts += [np.asarray(s, dtype=float) for s in extra_seeds]
        starts += list(self.random_starts(scenario))
        runs = self._map(lambda x0: self._descend(scenario, x0), starts)
        leaders = sorted(range(len(runs)), key=lambda i: -runs[i].value)[:self.config.polished_runs]
        for i, run in zip(leaders, self._map(lambda i: self._polish(scenario, runs[i]), leaders)):
            runs[i] = run
        for i, run in enumerate(runs):
            logger.debug(f"run {i}: {run.value:.12f} after {run.evaluations} evaluations")

        ranked = sorted(runs, key=lambda r: -r.value)
        best = ranked[0]
        if len(ranked) > 1:
            converged = abs(ranked[0].value - ranked[1].value) <= 10 * self.config.simplex_tolerance
        else:
            converged = best.success
        if not converged:
            logger.warning(f"{scenario.kind.value} at theta={scenario.theta:.6f} did not converge")

        result = CorrelatorResult(
            scenario=scenario,
            value=best.value,
            settings=canonical_settings(scenario, best.settings),
            evaluations=grid_objective.calls + sum(r.evaluations for r in runs),
            converged=converged,
            grid_best=float(grid_values[order[0]]),
            run_values=tuple(r.value for r in ranked),
            max_abs_evaluation=max([grid_objective.max_abs] + [r.max_abs for r in runs]),
        )
        logger.info(f"{scenario.kind.value} at theta={scenario.theta:.6f}: {result.value:.10f} "
                    f"({result.evaluations} evaluations, converged={converged})")
        return result

    def sweep(self, kind: ScenarioKind, theta_min: float = 0.0, theta_max: float = THETA_MAX,
              steps: int = 65, warm_start: bool = True,
              ancilla: AncillaState = ZERO_ANCILLA) -> SweepResult:
        '''
        Maximizes the correlator on an evenly spaced θ grid, endpoints included.

        :param warm_start: seed every point with the optimum of the previous one
        :raises ParameterRangeError: empty range or fewer than two steps
        '''
        theta_min, theta_max = check_theta(theta_min), check_theta(theta_max)
        if not theta_min < theta_max:
            raise ParameterRangeError(f"theta range [{theta_min}, {theta_max}] is empty")
        if steps < 2:
            raise ParameterRangeError(f"steps={steps} must be at least 2")

        grid = np.linspace(theta_min, theta_max, steps)
        results = []
        previous: Optional[np.ndarray] = None
        points = tqdm(grid, desc=kind.value, unit="θ", disable=not self.progress)
        for theta in points:
            seeds = [previous] if warm_start and previous is not None else []
            result = self.maximize(Scenario(kind, float(theta), ancilla), extra_seeds=seeds)
            results.append(result)
            previous = result.settings
        return SweepResult(kind, grid, np.array([r.value for r in results]), results)

    def find_crossing(self, kind: ScenarioKind, level: float = 2.0, theta_min: float = 0.0,
                      theta_max: float = THETA_MAX) -> CrossingResult:
        '''
        Bisection on θ for max correlator = level.

        :return: found=False with the endpoint values when the level is not bracketed
        '''
        lo, hi = check_theta(theta_min), check_theta(theta_max)
        if not lo < hi:
            raise ParameterRangeError(f"theta range [{lo}, {hi}] is empty")
        low = self.maximize(Scenario(kind, lo))
        high = self.maximize(Scenario(kind, hi))
        endpoints = (low.value, high.value)
        if (low.value - level) * (high.value - level) > 0:
            logger.info(f"{kind.value}: level {level} not bracketed by {endpoints}")
            return CrossingResult(kind, level, False, None, (lo, hi), endpoints)

        rising = high.value >= low.value
        seed = high.settings
        while hi - lo >= self.config.crossing_tolerance:
            mid = 0.5 * (lo + hi)
            current = self.maximize(Scenario(kind, mid), extra_seeds=[seed])
            seed = current.settings
            if (current.value < level) == rising:
                lo = mid
            else:
                hi = mid
            logger.info(f"{kind.value}: bracket [{lo:.8f}, {hi:.8f}]")
        theta = 0.5 * (lo + hi)
        return CrossingResult(kind, level, True, theta, (lo, hi), endpoints)
