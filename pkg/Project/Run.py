from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

from Project.Errors import NormalizationError, ParameterRangeError
from Project.States import ALGEBRAIC_TOL, StateVector

THETA_MAX = np.pi / 4


def check_theta(theta: float) -> float:
    """θ must lie in [0, π/4]; both endpoints are allowed."""
    if not np.isfinite(theta) or theta < -ALGEBRAIC_TOL or theta > THETA_MAX + ALGEBRAIC_TOL:
        raise ParameterRangeError(f"theta={theta!r} outside [0, pi/4]")
    return float(min(max(theta, 0.0), THETA_MAX))


def check_phase(phi: float) -> float:
    if not np.isfinite(phi):
        raise ParameterRangeError(f"phi={phi!r} is not finite")
    return float(phi)


class Scheme(Enum):
    TELEPORT = "teleport"
    RSP_VN = "rsp-vn"
    RSP_BELL = "rsp-bell"


CLASSICAL_BITS = {Scheme.TELEPORT: 2, Scheme.RSP_VN: 1, Scheme.RSP_BELL: 1}


@dataclass(frozen=True)
class ResourceState:
    """
        Shared state cosθ|00> + sinθ|11> of Alice and Bob

        Attributes
        __________
        theta: float - entanglement parameter in [0, π/4]
    """
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", check_theta(self.theta))


@dataclass(frozen=True)
class TargetSpec:
    """
        State Alice wants at Bob's end: cosθ|0> + e^{iφ} sinθ|1>

        Attributes
        __________
        theta: float - inherited from the resource

        phi: float - azimuth, reduced into [0, 2π)
    """
    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "theta", check_theta(self.theta))
        object.__setattr__(self, "phi", float(np.mod(check_phase(self.phi), 2 * np.pi)))

    def state(self, label: str = "bob") -> StateVector:
        return StateVector([np.cos(self.theta), np.exp(1j * self.phi) * np.sin(self.theta)], (label,))


@dataclass(frozen=True)
class AncillaState:
    """
        Alice's extra qubit a|0> + b|1>: the helper of the Bell-measurement
        RSP scheme or the state η to be teleported

        Attributes
        __________
        a: complex

        b: complex
    """
    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > ALGEBRAIC_TOL:
            raise NormalizationError(f"|a|^2 + |b|^2 = {abs(a) ** 2 + abs(b) ** 2!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_bloch(cls, polar: float, azimuth: float) -> "AncillaState":
        return cls(np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2))

    def state(self, label: str = "ancilla") -> StateVector:
        return StateVector([self.a, self.b], (label,))


ZERO_ANCILLA = AncillaState(1.0, 0.0)


@dataclass(frozen=True)
class Branch:
    """
        One outcome of Alice's measurement as seen by Bob

        Attributes
        __________
        label: str - outcome name ("+1", "-1", "phi+", ...)

        probability: float

        bob_pre_correction: Optional[StateVector] - None for zero-probability outcomes

        bob_post_correction: Optional[StateVector]
    """
    label: str
    probability: float
    bob_pre_correction: Optional[StateVector]
    bob_post_correction: Optional[StateVector]


@dataclass(frozen=True)
class ProtocolRun:
    """
        Full outcome distribution of one protocol execution

        Attributes
        __________
        scheme: Scheme

        branches: List[Branch]

        classical_bits: int - 2 for teleportation, 1 for both RSP schemes
    """
    scheme: Scheme
    branches: List[Branch]
    classical_bits: int

    def branch(self, label: str) -> Branch:
        for b in self.branches:
            if b.label == label:
                return b
        raise KeyError(label)

    @property
    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)
