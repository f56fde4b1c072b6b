"""
Teleportation and the two remote-state-preparation schemes over cosθ|00> + sinθ|11>.

Registers are ordered (alice, bob) or (ancilla, alice, bob).
"""
import itertools
import logging
import math
from typing import Dict, Iterator, Optional

import numpy as np

from Project.Config import QuadratureConfig
from Project.QCore.QCore_module import (BELL_LABELS, IDENTITY, PAULI_X, PAULI_Z, apply_unitary,
                                        basis_state, bell_states, bell_projectors,
                                        cnot_ancilla_target, computational_projectors,
                                        condition_on, hadamard, partial_trace, phase_gate,
                                        projective_measure, state_fidelity, tensor)
from Project.Run import (CLASSICAL_BITS, ZERO_ANCILLA, AncillaState, Branch, ProtocolRun,
                         ResourceState, Scheme, TargetSpec, check_phase, check_theta)
from Project.States import DensityMatrix, StateVector

logger = logging.getLogger(__name__)

PHASE_FLIP = PAULI_Z

# pre-agreed corrections of the original protocol, fixed by the maximally entangled case
TELEPORT_CORRECTIONS: Dict[str, np.ndarray] = {
    "phi+": IDENTITY,
    "psi+": PAULI_X,
    "phi-": PAULI_Z,
    "psi-": PAULI_X @ PAULI_Z,
}

PAULI_CORRECTIONS: Dict[str, np.ndarray] = {
    "I": IDENTITY,
    "X": PAULI_X,
    "Z": PAULI_Z,
    "XZ": PAULI_X @ PAULI_Z,
}

# outcomes Alice clubs together in the Bell-measurement RSP scheme
RSP_BELL_PAIRS = {"phi+": "+", "psi+": "+", "phi-": "-", "psi-": "-"}


def resource_state(theta: float) -> StateVector:
    '''
    cosθ|00> + sinθ|11> on (alice, bob).

    :param theta: in [0, π/4]
    '''
    theta = ResourceState(theta).theta
    return StateVector([np.cos(theta), 0, 0, np.sin(theta)], ("alice", "bob"))


def _phased_resource(theta: float, phi: float) -> StateVector:
    return apply_unitary(phase_gate(check_phase(phi)), ["alice"], resource_state(theta))


def stage_rsp_vn(theta: float, phi: float) -> StateVector:
    """Phase rotation then Hadamard on Alice's qubit of the resource state."""
    return apply_unitary(hadamard(), ["alice"], _phased_resource(theta, phi))


def stage_rsp_bell(theta: float, phi: float, ancilla: AncillaState = ZERO_ANCILLA) -> StateVector:
    """Phase rotation on Alice's qubit, then CNOT from Alice's qubit onto the ancilla."""
    joint = tensor(ancilla.state("ancilla"), _phased_resource(theta, phi))
    return apply_unitary(cnot_ancilla_target(), ["ancilla", "alice"], joint)


def bell_decomposition(s: StateVector) -> Dict[str, Optional[np.ndarray]]:
    """
    Unnormalized Bob vectors <β|_(ancilla, alice) |s> for the four Bell states β.
    """
    out = {}
    amplitudes = s.amplitudes.reshape(4, 2)
    for label, bell in bell_states().items():
        out[label] = bell.amplitudes.conj() @ amplitudes
    return out


def bob_marginal(s: StateVector) -> DensityMatrix:
    """Bob's reduced state of any staged register."""
    return partial_trace(s, ["bob"])


def _corrected(state: Optional[StateVector], correction: np.ndarray) -> Optional[StateVector]:
    if state is None:
        return None
    return apply_unitary(correction, ["bob"], state)


def run_rsp_vn(theta: float, phi: float, correction: np.ndarray = PHASE_FLIP) -> ProtocolRun:
    '''
    RSP with a σz measurement on Alice's qubit after phase and Hadamard.

    :param correction: Bob's unitary for the -1 outcome, a phase flip in the protocol
    :return: branches "+1" and "-1" with probability 1/2 each
    '''
    staged = stage_rsp_vn(theta, phi)
    branches = []
    for outcome in projective_measure(staged, ["alice"], computational_projectors()):
        label = "+1" if outcome.label == "0" else "-1"
        bob = None
        if outcome.state is not None:
            bob = condition_on(outcome.state, ["alice"], basis_state(int(outcome.label), ("alice",)))
        unitary = IDENTITY if label == "+1" else correction
        branches.append(Branch(label, outcome.probability, bob, _corrected(bob, unitary)))
    return ProtocolRun(Scheme.RSP_VN, branches, CLASSICAL_BITS[Scheme.RSP_VN])


def run_rsp_bell(theta: float, phi: float, ancilla: AncillaState = ZERO_ANCILLA,
                 correction: np.ndarray = PHASE_FLIP) -> ProtocolRun:
    '''
    RSP with a Bell measurement on (ancilla, alice) after phase and CNOT.

    Alice sends one bit: which of the pairs {phi+, psi+} / {phi-, psi-} occurred.

    :param correction: Bob's unitary for the {phi-, psi-} pair
    '''
    staged = stage_rsp_bell(theta, phi, ancilla)
    outcomes = bell_states()
    branches = []
    for outcome in projective_measure(staged, ["ancilla", "alice"], bell_projectors()):
        bob = None
        if outcome.state is not None:
            bob = condition_on(outcome.state, ["ancilla", "alice"], outcomes[outcome.label])
        unitary = IDENTITY if RSP_BELL_PAIRS[outcome.label] == "+" else correction
        branches.append(Branch(outcome.label, outcome.probability, bob, _corrected(bob, unitary)))
    return ProtocolRun(Scheme.RSP_BELL, branches, CLASSICAL_BITS[Scheme.RSP_BELL])


def paired_probabilities(run: ProtocolRun) -> Dict[str, float]:
    """Probabilities of the two one-bit messages of the Bell-measurement RSP scheme."""
    pairs = {"+": 0.0, "-": 0.0}
    for b in run.branches:
        pairs[RSP_BELL_PAIRS[b.label]] += b.probability
    return pairs


def run_teleport(theta: float, eta: AncillaState,
                 corrections: Dict[str, np.ndarray] = TELEPORT_CORRECTIONS) -> ProtocolRun:
    '''
    Teleports η through the resource state: Bell measurement on (ancilla, alice),
    two classical bits, Pauli correction on Bob's qubit.
    '''
    staged = tensor(eta.state("ancilla"), resource_state(theta))
    outcomes = bell_states()
    branches = []
    for outcome in projective_measure(staged, ["ancilla", "alice"], bell_projectors()):
        bob = None
        if outcome.state is not None:
            bob = condition_on(outcome.state, ["ancilla", "alice"], outcomes[outcome.label])
        branches.append(Branch(outcome.label, outcome.probability, bob,
                               _corrected(bob, corrections[outcome.label])))
    return ProtocolRun(Scheme.TELEPORT, branches, CLASSICAL_BITS[Scheme.TELEPORT])


def teleport_average_fidelity(theta: float, eta: AncillaState,
                              corrections: Dict[str, np.ndarray] = TELEPORT_CORRECTIONS) -> float:
    """Σ_branches P(branch) |<η|Bob's corrected state>|² for one input η."""
    target = eta.state("bob")
    run = run_teleport(theta, eta, corrections)
    return math.fsum(b.probability * state_fidelity(target, b.bob_post_correction)
                     for b in run.branches if b.bob_post_correction is not None)


def correction_assignments() -> Iterator[Dict[str, np.ndarray]]:
    """Every assignment of {I, X, Z, XZ} to the four Bell outcomes (256 tables)."""
    for names in itertools.product(PAULI_CORRECTIONS, repeat=len(BELL_LABELS)):
        yield {label: PAULI_CORRECTIONS[name] for label, name in zip(BELL_LABELS, names)}


def teleport_fidelity_closed(theta: float) -> float:
    """
    Haar-averaged teleportation fidelity (2/3)(cos³θ - sin³θ)/(cosθ - sinθ),
    evaluated as (2/3)(1 + sinθ cosθ) so that θ = π/4 needs no limit.
    """
    theta = check_theta(theta)
    return 2.0 / 3.0 * (1.0 + np.sin(2 * theta) / 2.0)


def _weighted_overlaps(theta: float, etas: np.ndarray,
                       corrections: Dict[str, np.ndarray]) -> np.ndarray:
    """
    Per-input Σ_branches P·F for a batch of inputs, shape (N, 2) -> (N,).

    P·F of a branch equals |<η| C_β <β|η ⊗ D>|² with the unnormalized Bob vector.
    """
    d = resource_state(theta).amplitudes.reshape(2, 2)
    totals = np.zeros(etas.shape[0])
    for label, bell in bell_states().items():
        beta = bell.amplitudes.conj().reshape(2, 2)
        bob = np.einsum("xa,nx,ab->nb", beta, etas, d)
        corrected = bob @ corrections[label].T
        totals += np.abs(np.einsum("nb,nb->n", etas.conj(), corrected)) ** 2
    return totals


def teleport_fidelity_numeric(theta: float, quadrature: QuadratureConfig = QuadratureConfig(),
                              corrections: Dict[str, np.ndarray] = TELEPORT_CORRECTIONS) -> float:
    '''
    Haar average of the per-input teleport fidelity on a deterministic spherical grid.

    :param quadrature: Gauss-Legendre rings in cos(polar) x equally spaced azimuths
    '''
    theta = check_theta(theta)
    cosines, weights = np.polynomial.legendre.leggauss(quadrature.rings)
    azimuths = 2 * np.pi * (np.arange(quadrature.sectors) + 0.5) / quadrature.sectors
    polar = np.repeat(np.arccos(cosines), quadrature.sectors)
    azimuth = np.tile(azimuths, quadrature.rings)
    node_weights = np.repeat(weights / 2.0, quadrature.sectors) / quadrature.sectors
    etas = np.stack([np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)], axis=1)
    values = _weighted_overlaps(theta, etas, corrections)
    return math.fsum(node_weights * values)
