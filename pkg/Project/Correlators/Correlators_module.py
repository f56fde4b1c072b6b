"""
CHSH-type and I3322-type correlators of the teleportation and RSP protocols.

Alice's observables act on (ancilla, alice) for the Bell-measurement schemes and on
alice alone otherwise; Bob always measures σ·n̂ on bob.
"""
import functools
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from Project.Errors import DimensionError, ParameterRangeError
from Project.Protocols.Protocols_module import resource_state, stage_rsp_bell, stage_rsp_vn
from Project.QCore.QCore_module import (IDENTITY, PAULI_X, PAULI_Y, PAULI_Z, bell_projectors,
                                        bloch_direction, expectation,
                                        joint_minus_probability, minus_probability, partial_trace,
                                        pauli_direction, tensor)
from Project.Run import ZERO_ANCILLA, AncillaState
from Project.Scenario import ParameterKind, Scenario, ScenarioKind
from Project.States import Observable, StateVector

logger = logging.getLogger(__name__)

BELL_PAIR = ("ancilla", "alice")
ALICE = ("alice",)
BOB = ("bob",)

SIGMA_Z = Observable(PAULI_Z)

# rows: Alice's setting (state η1/φ1, η2/φ2, η3/φ3), columns: Bob's σ1, σ2, σ3
I3322_JOINT = np.array([[1, 1, 1],
                        [1, 1, -1],
                        [1, -1, 0]])


@functools.lru_cache(maxsize=None)
def observable_A1() -> Observable:
    """P(φ−) + P(ψ−) − P(φ+) − P(ψ+) on (ancilla, alice)."""
    p = bell_projectors()
    return Observable(p["phi-"] + p["psi-"] - p["phi+"] - p["psi+"])


@functools.lru_cache(maxsize=None)
def observable_A2() -> Observable:
    """−P(φ−) + P(ψ−) + P(φ+) − P(ψ+) on (ancilla, alice)."""
    p = bell_projectors()
    return Observable(-p["phi-"] + p["psi-"] + p["phi+"] - p["psi+"])


def _correlation(alice: Observable, targets: Tuple[str, ...], n: Sequence[float], s: StateVector) -> float:
    joint = np.kron(alice.matrix, pauli_direction(n).matrix)
    return expectation(joint, list(targets) + ["bob"], s)


def _chsh(first: StateVector, second: StateVector, alice1: Observable, alice2: Observable,
          targets: Tuple[str, ...], n1: Sequence[float], n2: Sequence[float]) -> float:
    value = (_correlation(alice1, targets, n1, first) + _correlation(alice1, targets, n2, first)
             + _correlation(alice2, targets, n1, second) - _correlation(alice2, targets, n2, second))
    return abs(value)


def teleport_input(theta: float, eta: AncillaState) -> StateVector:
    """η ⊗ D on (ancilla, alice, bob)."""
    return tensor(eta.state("ancilla"), resource_state(theta))


def chsh_teleport(theta: float, eta1: AncillaState, eta2: AncillaState,
                  n1: Sequence[float], n2: Sequence[float]) -> float:
    '''
    |(<A1⊗σ1> + <A1⊗σ2>)_(η1⊗D) + (<A2⊗σ1> − <A2⊗σ2>)_(η2⊗D)|

    :param eta1: input Alice teleports while measuring A1
    :param eta2: input Alice teleports while measuring A2
    :param n1: Bob's first direction, unit 3-vector
    :param n2: Bob's second direction
    '''
    return _chsh(teleport_input(theta, eta1), teleport_input(theta, eta2),
                 observable_A1(), observable_A2(), BELL_PAIR, n1, n2)


def chsh_rsp_vn(theta: float, phi1: float, phi2: float,
                n1: Sequence[float], n2: Sequence[float]) -> float:
    '''
    CHSH correlator of the von Neumann RSP scheme: Alice always measures σz,
    her setting is the phase φ she prepares.
    '''
    return _chsh(stage_rsp_vn(theta, phi1), stage_rsp_vn(theta, phi2),
                 SIGMA_Z, SIGMA_Z, ALICE, n1, n2)


def chsh_rsp_bell(theta: float, phi1: float, phi2: float, n1: Sequence[float], n2: Sequence[float],
                  ancilla: AncillaState = ZERO_ANCILLA) -> float:
    '''
    CHSH correlator of the Bell-measurement RSP scheme: A1 on the φ1 staging,
    A2 on the φ2 staging.

    :param ancilla: helper qubit; the maximum depends on it through |a|² − |b|²
    '''
    return _chsh(stage_rsp_bell(theta, phi1, ancilla), stage_rsp_bell(theta, phi2, ancilla),
                 observable_A1(), observable_A2(), BELL_PAIR, n1, n2)


def chsh_state(theta: float, a1: Sequence[float], a2: Sequence[float],
               n1: Sequence[float], n2: Sequence[float]) -> float:
    """Standard CHSH of the resource state itself, Alice measuring σ·â on her qubit."""
    d = resource_state(theta)
    return _chsh(d, d, pauli_direction(a1), pauli_direction(a2), ALICE, n1, n2)


def joint_prob_minus_minus(m_a: Observable, targets_a: Sequence[str],
                           m_b: Observable, targets_b: Sequence[str], s: StateVector) -> float:
    '''
    Probability that both parties obtain −1.

    :raises NotBivalentError: m_a or m_b does not square to identity
    '''
    return joint_minus_probability(m_a, targets_a, m_b, targets_b, s)


def _i3322(states: Sequence[StateVector], alice: Sequence[Observable], targets: Tuple[str, ...],
           directions: Sequence[Sequence[float]]) -> float:
    """
    Signed I3322 expression; joint terms on states[k], marginals on states[0].
    """
    sigmas = [pauli_direction(n) for n in directions]
    total = 0.0
    for k, (s, a) in enumerate(zip(states, alice)):
        for j, sigma in enumerate(sigmas):
            if I3322_JOINT[k, j]:
                total += I3322_JOINT[k, j] * joint_prob_minus_minus(a, targets, sigma, BOB, s)
    alice_side = partial_trace(states[0], list(targets))
    bob_side = partial_trace(states[0], list(BOB))
    total -= minus_probability(alice[0], alice_side)
    total -= 2 * minus_probability(sigmas[0], bob_side)
    total -= minus_probability(sigmas[1], bob_side)
    return total


def i3322_teleport(theta: float, eta1: AncillaState, eta2: AncillaState, eta3: AncillaState,
                   n1: Sequence[float], n2: Sequence[float], n3: Sequence[float]) -> float:
    '''
    I3322 expression of teleportation: A1 while teleporting η1 or η2, A2 for η3.

    :return: signed value; local realism bounds it by 0
    '''
    states = [teleport_input(theta, eta) for eta in (eta1, eta2, eta3)]
    alice = [observable_A1(), observable_A1(), observable_A2()]
    return _i3322(states, alice, BELL_PAIR, (n1, n2, n3))


def i3322_rsp_vn(theta: float, phi1: float, phi2: float, phi3: float,
                 n1: Sequence[float], n2: Sequence[float], n3: Sequence[float]) -> float:
    """I3322 expression of the von Neumann RSP scheme, σz for all three of Alice's settings."""
    states = [stage_rsp_vn(theta, phi) for phi in (phi1, phi2, phi3)]
    return _i3322(states, [SIGMA_Z] * 3, ALICE, (n1, n2, n3))


def i3322_rsp_bell(theta: float, phi1: float, phi2: float, phi3: float,
                   n1: Sequence[float], n2: Sequence[float], n3: Sequence[float],
                   ancilla: AncillaState = ZERO_ANCILLA) -> float:
    """I3322 expression of the Bell-measurement RSP scheme, pattern A1, A1, A2."""
    states = [stage_rsp_bell(theta, phi, ancilla) for phi in (phi1, phi2, phi3)]
    alice = [observable_A1(), observable_A1(), observable_A2()]
    return _i3322(states, alice, BELL_PAIR, (n1, n2, n3))


def decode_settings(scenario: Scenario, settings: Sequence[float]) -> Dict[str, float]:
    '''
    Names every coordinate of a setting vector.

    :raises DimensionError: length differs from the scenario layout
    '''
    values = np.asarray(settings, dtype=float)
    layout = scenario.setting_layout
    if values.shape != (len(layout),):
        raise DimensionError(f"{scenario.kind.value} takes {len(layout)} settings, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ParameterRangeError(f"non-finite setting in {values.tolist()}")
    return {p.name: float(v) for p, v in zip(layout, values)}


def _pairs(named: Dict[str, float], prefix: str, count: int) -> List[Tuple[float, float]]:
    return [(named[f"{prefix}{i}_polar"], named[f"{prefix}{i}_azimuth"]) for i in range(1, count + 1)]


def _bob(named: Dict[str, float], count: int) -> List[np.ndarray]:
    return [bloch_direction(*p) for p in _pairs(named, "n", count)]


def _etas(named: Dict[str, float], count: int) -> List[AncillaState]:
    return [AncillaState.from_bloch(*p) for p in _pairs(named, "eta", count)]


def _phis(named: Dict[str, float], count: int) -> List[float]:
    return [named[f"phi{i}"] for i in range(1, count + 1)]


def _tele_chsh(sc: Scenario, named: Dict[str, float]) -> float:
    return chsh_teleport(sc.theta, *_etas(named, 2), *_bob(named, 2))


def _rsp_vn_chsh(sc: Scenario, named: Dict[str, float]) -> float:
    return chsh_rsp_vn(sc.theta, *_phis(named, 2), *_bob(named, 2))


def _rsp_bell_chsh(sc: Scenario, named: Dict[str, float]) -> float:
    return chsh_rsp_bell(sc.theta, *_phis(named, 2), *_bob(named, 2), ancilla=sc.ancilla)


def _tele_i3322(sc: Scenario, named: Dict[str, float]) -> float:
    return i3322_teleport(sc.theta, *_etas(named, 3), *_bob(named, 3))


def _rsp_vn_i3322(sc: Scenario, named: Dict[str, float]) -> float:
    return i3322_rsp_vn(sc.theta, *_phis(named, 3), *_bob(named, 3))


def _rsp_bell_i3322(sc: Scenario, named: Dict[str, float]) -> float:
    return i3322_rsp_bell(sc.theta, *_phis(named, 3), *_bob(named, 3), ancilla=sc.ancilla)


def _state_chsh(sc: Scenario, named: Dict[str, float]) -> float:
    a1, a2 = (bloch_direction(*p) for p in _pairs(named, "a", 2))
    return chsh_state(sc.theta, a1, a2, *_bob(named, 2))


EVALUATORS: Dict[ScenarioKind, Callable[[Scenario, Dict[str, float]], float]] = {
    ScenarioKind.TELE_CHSH: _tele_chsh,
    ScenarioKind.RSP_VN_CHSH: _rsp_vn_chsh,
    ScenarioKind.RSP_BELL_CHSH: _rsp_bell_chsh,
    ScenarioKind.TELE_I3322: _tele_i3322,
    ScenarioKind.RSP_VN_I3322: _rsp_vn_i3322,
    ScenarioKind.RSP_BELL_I3322: _rsp_bell_i3322,
    ScenarioKind.STATE_CHSH: _state_chsh,
}

PAULI_VECTOR = (PAULI_X, PAULI_Y, PAULI_Z)

# <A1⊗σ1> + <A1⊗σ2> + <A2⊗σ1> − <A2⊗σ2>
CHSH_SIGNS = np.array([[1, 1],
                       [1, -1]])


def _directions(angles: np.ndarray) -> np.ndarray:
    """(polar, azimuth) pairs -> rows of unit 3-vectors."""
    polar, azimuth = angles[0::2], angles[1::2]
    sin = np.sin(polar)
    return np.stack([sin * np.cos(azimuth), sin * np.sin(azimuth), np.cos(polar)], axis=1)


def _phase_coefficients(phases: np.ndarray) -> np.ndarray:
    return np.stack([np.ones(phases.size, dtype=complex), np.exp(1j * phases)], axis=1)


def _sphere_coefficients(angles: np.ndarray) -> np.ndarray:
    polar, azimuth = angles[0::2], angles[1::2]
    return np.stack([np.cos(polar / 2).astype(complex), np.exp(1j * azimuth) * np.sin(polar / 2)], axis=1)


def _rsp_basis(stage: Callable[[float], StateVector]) -> np.ndarray:
    """Staged RSP register written as |s0> + e^{iφ}|s1>; columns s0, s1."""
    plus, minus = stage(0.0).amplitudes, stage(np.pi).amplitudes
    return np.stack([(plus + minus) / 2, (plus - minus) / 2], axis=1)


def _teleport_basis(theta: float) -> np.ndarray:
    """|0> ⊗ D and |1> ⊗ D as columns."""
    return np.stack([teleport_input(theta, AncillaState(1.0, 0.0)).amplitudes,
                     teleport_input(theta, AncillaState(0.0, 1.0)).amplitudes], axis=1)


def _gram(basis: np.ndarray, operator: np.ndarray) -> np.ndarray:
    return basis.conj().T @ operator @ basis


def _correlation_matrix(s: StateVector) -> np.ndarray:
    """T_ij = <σi ⊗ σj> on a two-qubit register."""
    return np.array([[expectation(np.kron(p, q), [0, 1], s) for q in PAULI_VECTOR] for p in PAULI_VECTOR])


def _chsh_value(vectors: np.ndarray, directions: np.ndarray) -> float:
    return float(abs(np.sum(CHSH_SIGNS * (vectors @ directions.T))))


@dataclass(frozen=True)
class _KernelLayout:
    basis: Callable[[Scenario], np.ndarray]
    alice: Callable[[], Tuple[Observable, ...]]
    coefficients: Callable[[np.ndarray], np.ndarray]


def _bell_pattern(count: int) -> Callable[[], Tuple[Observable, ...]]:
    return lambda: (observable_A1(),) * (count - 1) + (observable_A2(),)


KERNEL_LAYOUTS: Dict[ScenarioKind, _KernelLayout] = {
    ScenarioKind.TELE_CHSH: _KernelLayout(lambda sc: _teleport_basis(sc.theta), _bell_pattern(2),
                                          _sphere_coefficients),
    ScenarioKind.RSP_VN_CHSH: _KernelLayout(lambda sc: _rsp_basis(functools.partial(stage_rsp_vn, sc.theta)),
                                            lambda: (SIGMA_Z,) * 2, _phase_coefficients),
    ScenarioKind.RSP_BELL_CHSH: _KernelLayout(
        lambda sc: _rsp_basis(lambda phi: stage_rsp_bell(sc.theta, phi, sc.ancilla)),
        _bell_pattern(2), _phase_coefficients),
    ScenarioKind.TELE_I3322: _KernelLayout(lambda sc: _teleport_basis(sc.theta), _bell_pattern(3),
                                           _sphere_coefficients),
    ScenarioKind.RSP_VN_I3322: _KernelLayout(lambda sc: _rsp_basis(functools.partial(stage_rsp_vn, sc.theta)),
                                             lambda: (SIGMA_Z,) * 3, _phase_coefficients),
    ScenarioKind.RSP_BELL_I3322: _KernelLayout(
        lambda sc: _rsp_basis(lambda phi: stage_rsp_bell(sc.theta, phi, sc.ancilla)),
        _bell_pattern(3), _phase_coefficients),
}


class CorrelatorKernel:
    '''
    Plain-array evaluation of one scenario's correlator, built once per scenario.

    Every staged register is linear in a two-component coefficient c of Alice's
    setting: (1, e^{iφ}) for the RSP schemes, the amplitudes of η for teleportation.
    Each expectation value is then a quadratic form c†Gc of a 2x2 Gram matrix, and
    Bob's σ·n̂ enters through the correlation vector v with <A⊗σ·n̂> = v·n̂.
    The resource CHSH uses the correlation matrix T_ij = <σi⊗σj> instead.

    Settings are not validated here; `evaluate` is the checked entry point.
    '''

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.kind = scenario.kind
        bob_count = 2 if scenario.kind.is_chsh else 3
        self._split = scenario.dimension - 2 * bob_count
        if scenario.kind is ScenarioKind.STATE_CHSH:
            self._table = _correlation_matrix(resource_state(scenario.theta))
            return
        layout = KERNEL_LAYOUTS[scenario.kind]
        basis = layout.basis(scenario)
        alice = [a.matrix for a in layout.alice()]
        alice_identity = np.eye(alice[0].shape[0])
        self._coefficients = layout.coefficients
        self._joint = np.array([[_gram(basis, np.kron(a, p)) for p in PAULI_VECTOR] for a in alice])
        self._alice = np.array([_gram(basis, np.kron(a, IDENTITY)) for a in alice])
        self._bob = np.array([_gram(basis, np.kron(alice_identity, p)) for p in PAULI_VECTOR])

    def __call__(self, settings: np.ndarray) -> float:
        n = _directions(settings[self._split:])
        if self.kind is ScenarioKind.STATE_CHSH:
            return _chsh_value(_directions(settings[:self._split]) @ self._table, n)
        c = self._coefficients(settings[:self._split])
        v = np.einsum("ki,kjil,kl->kj", c.conj(), self._joint, c).real
        if self.kind.is_chsh:
            return _chsh_value(v, n)
        a = np.einsum("ki,kil,kl->k", c.conj(), self._alice, c).real
        r = np.einsum("ki,jil,kl->kj", c.conj(), self._bob, c).real
        # P(−1, −1) = (1 − <A> − <σ·n̂> + <A⊗σ·n̂>) / 4 on Alice's k-th staging
        joint = (1 - a[:, None] - r @ n.T + v @ n.T) / 4
        total = np.sum(I3322_JOINT * joint)
        total -= (1 - a[0]) / 2
        total -= 1 - r[0] @ n[0]
        total -= (1 - r[0] @ n[1]) / 2
        return float(total)


@functools.lru_cache(maxsize=512)
def correlator_kernel(scenario: Scenario) -> CorrelatorKernel:
    return CorrelatorKernel(scenario)


def evaluate(scenario: Scenario, settings: Sequence[float]) -> float:
    """Correlator of `scenario` at a raw setting vector (angles need not be reduced)."""
    named = decode_settings(scenario, settings)
    return correlator_kernel(scenario)(np.fromiter(named.values(), dtype=float, count=len(named)))


def evaluate_direct(scenario: Scenario, settings: Sequence[float]) -> float:
    """Same value through the validated state-vector functions, one register per call."""
    return EVALUATORS[scenario.kind](scenario, decode_settings(scenario, settings))


def canonical_settings(scenario: Scenario, settings: Sequence[float]) -> np.ndarray:
    '''
    Reduces a setting vector without changing the measurements it encodes:
    periodic coordinates into [0, 2π), polar coordinates into [0, π] by reflecting
    through the pole and turning the paired azimuth by π.
    '''
    values = np.array(settings, dtype=float)
    layout = scenario.setting_layout
    for i, p in enumerate(layout):
        if p.kind is ParameterKind.POLAR:
            polar = np.mod(values[i], 2 * np.pi)
            if polar > np.pi:
                polar = 2 * np.pi - polar
                values[i + 1] += np.pi
            values[i] = polar
    for i, p in enumerate(layout):
        if p.kind is not ParameterKind.POLAR:
            values[i] = np.mod(values[i], 2 * np.pi)
            if values[i] >= 2 * np.pi:
                values[i] = 0.0
    return values
