import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from Project.Config import OptimizerConfig, QuadratureConfig, RunConfig
from Project.Correlators.Correlators_module import evaluate_direct
from Project.Optimizer.Optimizer_module import Optimizer
from Project.Protocols.Protocols_module import (PHASE_FLIP, bob_marginal, paired_probabilities,
                                                run_rsp_bell, run_rsp_vn, run_teleport, stage_rsp_bell,
                                                stage_rsp_vn, teleport_fidelity_closed,
                                                teleport_fidelity_numeric)
from Project.QCore.QCore_module import PAULI_X, state_fidelity
from Project.Run import THETA_MAX, AncillaState, ProtocolRun, TargetSpec
from Project.Scenario import CHSH_PROTOCOL_KINDS, I3322_KINDS, Scenario, ScenarioKind, SweepResult

logger = logging.getLogger(__name__)

FIDELITY_AT_PI_8 = 0.9023689270621825
TSIRELSON_CEILING = 2 * np.sqrt(2) + 1e-9


@dataclass
class SuiteResult:
    """
        Outcome of one verification suite

        Attributes
        __________
        name: str

        passed: bool

        checks: int - assertions evaluated

        failure: Optional[str] - first failing assertion, None when passed
    """
    name: str
    passed: bool
    checks: int
    failure: Optional[str] = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name} ({self.checks} checks)"
        return text if self.passed else f"{text}: {self.failure}"


@dataclass
class VerifyReport:
    suites: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    @property
    def first_failure(self) -> Optional[SuiteResult]:
        return next((s for s in self.suites if not s.passed), None)


class _Suite:
    """Collects assertions and remembers the first one that failed."""

    def __init__(self, name: str):
        self.name = name
        self.checks = 0
        self.failure: Optional[str] = None

    def check(self, condition: bool, message: str):
        self.checks += 1
        if not condition and self.failure is None:
            self.failure = message
            logger.debug(f"{self.name}: {message}")

    def result(self) -> SuiteResult:
        return SuiteResult(self.name, self.failure is None, self.checks, self.failure)


class Verifier:
    '''
    Bundled self-checks of the simulator.

    :param config: verify run configuration; `quick` shrinks every grid and draw count
    :param inject_fault: Bob applies σx instead of the phase flip in both RSP schemes
    '''

    def __init__(self, config: RunConfig, inject_fault: bool = False):
        self.config = config
        self.inject_fault = inject_fault
        self.draws = 100 if config.quick else 1000
        self.sweep_steps = 5 if config.quick else 17
        self.fidelity_points = 5 if config.quick else 50
        self.i3322_points = 2 if config.quick else 5
        self.optimizer = Optimizer(self._optimizer_config(config))
        self.rng = np.random.Generator(np.random.Philox(key=config.optimizer.rng_seed).jumped(3))
        self._sweeps: Dict[ScenarioKind, SweepResult] = {}

    @staticmethod
    def _optimizer_config(config: RunConfig) -> OptimizerConfig:
        if not config.quick:
            return config.optimizer
        return config.optimizer.model_copy(update={
            "restarts": min(config.optimizer.restarts, 4),
            "max_grid_nodes": min(config.optimizer.max_grid_nodes, 256),
            "grid_seeds": min(config.optimizer.grid_seeds, 2),
        })

    @property
    def correction(self) -> np.ndarray:
        return PAULI_X if self.inject_fault else PHASE_FLIP

    def _random_theta_phi(self):
        return self.rng.uniform(0.0, THETA_MAX), self.rng.uniform(0.0, 2 * np.pi)

    def _random_ancilla(self) -> AncillaState:
        polar, azimuth = self.rng.uniform(0.0, np.pi), self.rng.uniform(0.0, 2 * np.pi)
        return AncillaState.from_bloch(polar, azimuth)

    @staticmethod
    def _check_run(suite: _Suite, run: ProtocolRun, target: TargetSpec, context: str):
        for b in run.branches:
            if b.bob_post_correction is None:
                continue
            f = state_fidelity(target.state(), b.bob_post_correction)
            suite.check(f >= 1 - 1e-10, f"{context}: branch {b.label} fidelity {f:.12f}")

    def determinism(self) -> SuiteResult:
        """Post-correction fidelity 1 in every branch of both RSP schemes."""
        suite = _Suite("determinism")
        for _ in range(self.draws):
            theta, phi = self._random_theta_phi()
            run = run_rsp_vn(theta, phi, correction=self.correction)
            self._check_run(suite, run, TargetSpec(theta, phi), f"rsp-vn theta={theta:.6f} phi={phi:.6f}")
        for _ in range(self.draws):
            theta, phi = self._random_theta_phi()
            ancilla = self._random_ancilla()
            run = run_rsp_bell(theta, phi, ancilla, correction=self.correction)
            self._check_run(suite, run, TargetSpec(theta, phi),
                            f"rsp-bell theta={theta:.6f} phi={phi:.6f} ancilla=({ancilla.a:.4f}, {ancilla.b:.4f})")
        for _ in range(max(1, self.draws // 10)):
            eta = self._random_ancilla()
            for b in run_teleport(THETA_MAX, eta).branches:
                f = state_fidelity(eta.state("bob"), b.bob_post_correction)
                suite.check(f >= 1 - 1e-10, f"teleport at pi/4: branch {b.label} fidelity {f:.12f}")
        return suite.result()

    def fidelity(self) -> SuiteResult:
        """Closed-form landmarks and the quadrature against the closed form."""
        suite = _Suite("fidelity")
        suite.check(abs(teleport_fidelity_closed(THETA_MAX) - 1.0) <= 1e-12, "F(pi/4) != 1")
        suite.check(abs(teleport_fidelity_closed(0.0) - 2.0 / 3.0) <= 1e-12, "F(0) != 2/3")
        f8 = teleport_fidelity_closed(np.pi / 8)
        suite.check(abs(f8 - FIDELITY_AT_PI_8) <= 1e-9, f"F(pi/8) = {f8!r}")
        quadrature = self.config.quadrature if not self.config.quick else QuadratureConfig(rings=20, sectors=8)
        for theta in np.linspace(0.0, THETA_MAX, self.fidelity_points):
            closed = teleport_fidelity_closed(theta)
            numeric = teleport_fidelity_numeric(theta, quadrature)
            suite.check(abs(closed - numeric) <= 1e-6,
                        f"theta={theta:.6f}: closed {closed:.12f} vs numeric {numeric:.12f}")
        return suite.result()

    def ancilla_independence(self) -> SuiteResult:
        """Paired outcomes of the Bell-measurement scheme are fair coins; Bob's marginal ignores φ."""
        suite = _Suite("ancilla-independence")
        for _ in range(self.draws):
            theta, phi = self._random_theta_phi()
            ancilla = self._random_ancilla()
            pairs = paired_probabilities(run_rsp_bell(theta, phi, ancilla))
            for message, p in pairs.items():
                suite.check(abs(p - 0.5) <= 1e-12,
                            f"theta={theta:.6f} phi={phi:.6f}: P({message}) = {p!r}")
            reference = bob_marginal(stage_rsp_vn(theta, 0.0)).matrix
            for staged in (stage_rsp_vn(theta, phi), stage_rsp_bell(theta, phi, ancilla)):
                drift = np.max(np.abs(bob_marginal(staged).matrix - reference))
                suite.check(drift <= 1e-12, f"theta={theta:.6f} phi={phi:.6f}: Bob's marginal moved by {drift:.3e}")
        return suite.result()

    def _sweep(self, kind: ScenarioKind) -> SweepResult:
        if kind not in self._sweeps:
            self._sweeps[kind] = self.optimizer.sweep(kind, 0.0, THETA_MAX, self.sweep_steps)
        return self._sweeps[kind]

    def curve_overlap(self) -> SuiteResult:
        """The three CHSH curves coincide and follow 2√2 sin2θ."""
        suite = _Suite("curve-overlap")
        sweeps = {kind: self._sweep(kind) for kind in CHSH_PROTOCOL_KINDS}
        for a, b in itertools.combinations(CHSH_PROTOCOL_KINDS, 2):
            gap = np.max(np.abs(sweeps[a].values - sweeps[b].values))
            suite.check(gap < 5e-3, f"{a.value} vs {b.value}: max gap {gap:.3e}")
        vn = sweeps[ScenarioKind.RSP_VN_CHSH]
        shape = 2 * np.sqrt(2) * np.sin(2 * vn.theta_grid)
        gap = np.max(np.abs(vn.values - shape))
        suite.check(gap < 1e-3, f"rsp-vn-chsh vs 2*sqrt(2)*sin(2 theta): max gap {gap:.3e}")
        return suite.result()

    def tsirelson(self) -> SuiteResult:
        """
        No CHSH evaluation of the overlap sweeps exceeds 2√2, and every optimum
        recomputed through the state-vector path gives the same value.
        """
        suite = _Suite("tsirelson-ceiling")
        for kind in CHSH_PROTOCOL_KINDS:
            for r in self._sweep(kind).results:
                suite.check(r.max_abs_evaluation <= TSIRELSON_CEILING,
                            f"{kind.value} at theta={r.scenario.theta:.6f}: {r.max_abs_evaluation!r}")
                direct = evaluate_direct(r.scenario, r.settings)
                suite.check(abs(direct - r.value) <= 1e-9,
                            f"{kind.value} at theta={r.scenario.theta:.6f}: state-vector value {direct!r} vs {r.value!r}")
        return suite.result()

    def i3322(self) -> SuiteResult:
        """RSP I3322 maxima agree; teleportation never exceeds them."""
        suite = _Suite("i3322-consistency")
        for theta in np.linspace(0.0, THETA_MAX, self.i3322_points):
            values = {}
            for kind in I3322_KINDS:
                values[kind] = self.optimizer.maximize(Scenario(kind, float(theta))).value
            vn, bell = values[ScenarioKind.RSP_VN_I3322], values[ScenarioKind.RSP_BELL_I3322]
            tele = values[ScenarioKind.TELE_I3322]
            suite.check(abs(vn - bell) < 5e-3, f"theta={theta:.6f}: rsp-vn {vn:.6f} vs rsp-bell {bell:.6f}")
            suite.check(tele <= max(vn, bell) + 1e-4, f"theta={theta:.6f}: tele {tele:.6f} above rsp {vn:.6f}")
        return suite.result()

    def suites(self) -> List[Callable[[], SuiteResult]]:
        return [self.determinism, self.fidelity, self.ancilla_independence,
                self.curve_overlap, self.tsirelson, self.i3322]

    def run(self) -> VerifyReport:
        report = VerifyReport()
        for suite in self.suites():
            result = suite()
            logger.info(result.line())
            report.suites.append(result)
        return report
