from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from Project.Scenario import ScenarioKind


class OptimizerConfig(BaseModel):
    """
        Settings of the grid-seeded multi-start simplex search

        Attributes
        __________
        grid_points_per_dim: int - coarse seeding grid resolution

        restarts: int - random simplex starts on top of the grid seeds

        simplex_tolerance: float - absolute function tolerance of one simplex run

        max_iterations: int - simplex iterations per run

        rng_seed: int - key of the counter-based generator

        grid_seeds: int - best grid nodes refined by the simplex

        max_grid_nodes: int - above this many nodes a seeded subset of the grid is evaluated

        polish_rounds: int - simplex restarts from the incumbent of a run

        polished_runs: int - best runs that get polished

        crossing_tolerance: float - bisection stops below this bracket width (radians)

        workers: int - width of the parallel map over restarts
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    grid_points_per_dim: int = Field(5, ge=3)
    restarts: int = Field(20, ge=1)
    simplex_tolerance: float = Field(1e-10, gt=0)
    max_iterations: int = Field(2000, ge=10)
    rng_seed: int = Field(0, ge=0, lt=2 ** 64)
    grid_seeds: int = Field(3, ge=1)
    max_grid_nodes: int = Field(4096, ge=1)
    polish_rounds: int = Field(2, ge=0)
    polished_runs: int = Field(3, ge=1)
    crossing_tolerance: float = Field(1e-5, gt=0)
    workers: int = Field(1, ge=1)


class QuadratureConfig(BaseModel):
    """
        Product grid on the Bloch sphere: Gauss-Legendre rings in cos(polar)
        times equally spaced azimuths
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    rings: int = Field(100, ge=2)
    sectors: int = Field(100, ge=1)

    @property
    def nodes(self) -> int:
        return self.rings * self.sectors


class Command(Enum):
    SWEEP = "sweep"
    OPTIMIZE = "optimize"
    FIDELITY = "fidelity"
    CROSSING = "crossing"
    VERIFY = "verify"


class OutputFormat(Enum):
    CSV = "csv"
    SVG = "svg"
    BOTH = "both"


class RunConfig(BaseModel):
    """
        Everything one CLI invocation needs, validated before any computation
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    scenarios: List[ScenarioKind] = Field(default_factory=lambda: [ScenarioKind.RSP_VN_CHSH])
    theta: Optional[float] = None
    theta_min: float = 0.0
    theta_max: float = 0.7853981633974483
    steps: int = Field(65, ge=2)
    level: float = 2.0
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    quick: bool = False
    degrees: bool = False
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)

    @field_validator("theta", "theta_min", "theta_max")
    @classmethod
    def _theta_in_range(cls, value):
        if value is not None and not 0.0 <= value <= 0.7853981633974483 + 1e-12:
            raise ValueError(f"theta {value} outside [0, pi/4]")
        return value

    @model_validator(mode="after")
    def _consistent(self):
        if self.theta_min >= self.theta_max:
            raise ValueError("theta-min must be smaller than theta-max")
        if self.command == Command.OPTIMIZE and self.theta is None:
            raise ValueError("optimize needs --theta")
        if self.command in (Command.OPTIMIZE, Command.CROSSING) and len(self.scenarios) != 1:
            raise ValueError(f"{self.command.value} takes exactly one scenario")
        if self.command == Command.SWEEP and self.format != OutputFormat.CSV and self.out is None:
            raise ValueError("svg output needs --out")
        if self.command != Command.SWEEP and self.format != OutputFormat.CSV:
            raise ValueError(f"--format {self.format.value} only applies to sweep, not {self.command.value}")
        if self.quick and self.command != Command.VERIFY:
            raise ValueError(f"--quick only applies to verify, not {self.command.value}")
        return self


def read_config_file(path: str) -> dict:
    '''
    Reads a flat key=value file. Blank lines and lines starting with # are skipped.

    :param path: file path
    :return: raw string values keyed by option name (dashes turned into underscores)
    '''
    values = {}
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{number}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values
