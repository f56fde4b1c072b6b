from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from Project.Run import ZERO_ANCILLA, AncillaState, check_theta


class ScenarioKind(Enum):
    TELE_CHSH = "tele-chsh"
    RSP_VN_CHSH = "rsp-vn-chsh"
    RSP_BELL_CHSH = "rsp-bell-chsh"
    TELE_I3322 = "tele-i3322"
    RSP_VN_I3322 = "rsp-vn-i3322"
    RSP_BELL_I3322 = "rsp-bell-i3322"
    STATE_CHSH = "state-chsh"

    @property
    def is_chsh(self) -> bool:
        return self.value.endswith("chsh")


CHSH_PROTOCOL_KINDS = (ScenarioKind.TELE_CHSH, ScenarioKind.RSP_VN_CHSH, ScenarioKind.RSP_BELL_CHSH)
I3322_KINDS = (ScenarioKind.TELE_I3322, ScenarioKind.RSP_VN_I3322, ScenarioKind.RSP_BELL_I3322)


class ParameterKind(Enum):
    PHASE = "phase"
    POLAR = "polar"
    AZIMUTH = "azimuth"

    @property
    def bounds(self) -> Tuple[float, float]:
        return (0.0, np.pi) if self is ParameterKind.POLAR else (0.0, 2 * np.pi)


@dataclass(frozen=True)
class SettingParameter:
    """
        One named coordinate of a setting vector

        Attributes
        __________
        name: str - e.g. "phi1", "n2_polar"

        kind: ParameterKind - polar coordinates live in [0, π], the rest are periodic
    """
    name: str
    kind: ParameterKind


def _sphere(prefix: str) -> List[SettingParameter]:
    return [SettingParameter(f"{prefix}_polar", ParameterKind.POLAR),
            SettingParameter(f"{prefix}_azimuth", ParameterKind.AZIMUTH)]


def _phases(count: int) -> List[SettingParameter]:
    return [SettingParameter(f"phi{i}", ParameterKind.PHASE) for i in range(1, count + 1)]


def _spheres(prefix: str, count: int) -> List[SettingParameter]:
    return [p for i in range(1, count + 1) for p in _sphere(f"{prefix}{i}")]


SETTING_LAYOUTS = {
    ScenarioKind.TELE_CHSH: tuple(_spheres("eta", 2) + _spheres("n", 2)),
    ScenarioKind.RSP_VN_CHSH: tuple(_phases(2) + _spheres("n", 2)),
    ScenarioKind.RSP_BELL_CHSH: tuple(_phases(2) + _spheres("n", 2)),
    ScenarioKind.TELE_I3322: tuple(_spheres("eta", 3) + _spheres("n", 3)),
    ScenarioKind.RSP_VN_I3322: tuple(_phases(3) + _spheres("n", 3)),
    ScenarioKind.RSP_BELL_I3322: tuple(_phases(3) + _spheres("n", 3)),
    ScenarioKind.STATE_CHSH: tuple(_spheres("a", 2) + _spheres("n", 2)),
}


@dataclass(frozen=True)
class Scenario:
    """
        A correlator at fixed entanglement

        Attributes
        __________
        kind: ScenarioKind

        theta: float - resource parameter in [0, π/4]

        ancilla: AncillaState - helper qubit of the Bell-measurement RSP scenarios
    """
    kind: ScenarioKind
    theta: float
    ancilla: AncillaState = ZERO_ANCILLA

    def __post_init__(self):
        object.__setattr__(self, "theta", check_theta(self.theta))

    @property
    def setting_layout(self) -> Tuple[SettingParameter, ...]:
        return SETTING_LAYOUTS[self.kind]

    @property
    def dimension(self) -> int:
        return len(self.setting_layout)


@dataclass
class CorrelatorResult:
    """
        Best value found for one scenario

        Attributes
        __________
        scenario: Scenario

        value: float - optimal correlator value

        settings: np.ndarray - optimal setting vector, periodic coordinates in
        [0, 2π), polar coordinates in [0, π]

        evaluations: int - objective calls, grid included

        converged: bool - the two best simplex runs agree within 10x tolerance

        grid_best: float - best value among the evaluated grid nodes

        run_values: Tuple[float, ...] - final value of every simplex run, best first

        max_abs_evaluation: float - largest |value| the objective ever returned
    """
    scenario: Scenario
    value: float
    settings: np.ndarray
    evaluations: int
    converged: bool
    grid_best: float = float("nan")
    run_values: Tuple[float, ...] = ()
    max_abs_evaluation: float = 0.0


@dataclass
class SweepResult:
    """
        Maximized correlator against θ

        Attributes
        __________
        kind: ScenarioKind

        theta_grid: np.ndarray - strictly increasing

        values: np.ndarray

        results: List[CorrelatorResult] - one per grid point
    """
    kind: ScenarioKind
    theta_grid: np.ndarray
    values: np.ndarray
    results: List[CorrelatorResult] = field(default_factory=list)

    @property
    def converged(self) -> np.ndarray:
        return np.array([r.converged for r in self.results], dtype=bool)

    @property
    def evaluations(self) -> np.ndarray:
        return np.array([r.evaluations for r in self.results], dtype=int)


@dataclass
class CrossingResult:
    """
        θ where the maximized correlator reaches `level`

        Attributes
        __________
        kind: ScenarioKind

        level: float

        found: bool - False when the level is not bracketed

        theta: Optional[float] - None when not found

        bracket: Tuple[float, float] - final bisection interval, or the searched range

        endpoint_values: Tuple[float, float] - maximized values at the searched range ends
    """
    kind: ScenarioKind
    level: float
    found: bool
    theta: Optional[float]
    bracket: Tuple[float, float]
    endpoint_values: Tuple[float, float]
