"""
Exact small-register linear algebra: states, gates, measurement, partial trace.

Every function is pure; inputs are never modified.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from Project.Errors import (DimensionError, IncompleteMeasurementError, NotBivalentError,
                            NotHermitianError, NotUnitaryError, SubsystemError)
from Project.States import (ACCUMULATED_TOL, ALGEBRAIC_TOL, MAX_QUBITS, DensityMatrix,
                            MeasurementBranch, Observable, StateVector)

logger = logging.getLogger(__name__)

Targets = Sequence[Union[str, int]]
MatrixLike = Union[np.ndarray, Observable]

SQRT_HALF = 1 / np.sqrt(2)

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# branches with less probability than this carry no post-measurement state
ZERO_PROBABILITY = 1e-14


def _matrix(m: MatrixLike) -> np.ndarray:
    return m.matrix if isinstance(m, Observable) else np.asarray(m, dtype=complex)


def basis_state(index: int, labels: Sequence[str]) -> StateVector:
    '''
    Computational basis ket |index> on the given register.

    :param index: integer whose binary digits (big-endian) are the qubit values
    :param labels: subsystem names
    '''
    amplitudes = np.zeros(2 ** len(labels), dtype=complex)
    amplitudes[index] = 1.0
    return StateVector(amplitudes, tuple(labels))


def qubit(a: complex, b: complex, label: str) -> StateVector:
    """Single-qubit state a|0> + b|1>."""
    return StateVector([a, b], (label,))


def bloch_state(polar: float, azimuth: float, label: str) -> StateVector:
    """cos(polar/2)|0> + e^{i azimuth} sin(polar/2)|1>, the Bloch-sphere point (polar, azimuth)."""
    return StateVector([np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)], (label,))


def bloch_direction(polar: float, azimuth: float) -> np.ndarray:
    """Unit 3-vector with spherical angles (polar, azimuth)."""
    return np.array([np.sin(polar) * np.cos(azimuth),
                     np.sin(polar) * np.sin(azimuth),
                     np.cos(polar)])


def tensor(a: StateVector, b: StateVector) -> StateVector:
    '''
    Composite state a ⊗ b; a's qubits become the most significant ones.

    :raises DimensionError: more than three qubits in total
    :raises SubsystemError: the two registers share a label
    '''
    if a.num_qubits + b.num_qubits > MAX_QUBITS:
        raise DimensionError(f"{a.num_qubits} + {b.num_qubits} qubits exceed the register limit")
    if set(a.labels) & set(b.labels):
        raise SubsystemError(f"registers {a.labels} and {b.labels} overlap")
    return StateVector.normalized(np.kron(a.amplitudes, b.amplitudes), a.labels + b.labels)


def _axes(labels: Tuple[str, ...], targets: Targets) -> Tuple[int, ...]:
    axes = []
    for t in targets:
        if isinstance(t, str):
            if t not in labels:
                raise SubsystemError(f"no subsystem {t!r} in {labels}")
            axes.append(labels.index(t))
        else:
            if not 0 <= int(t) < len(labels):
                raise SubsystemError(f"qubit index {t} out of range for {labels}")
            axes.append(int(t))
    if not axes or len(set(axes)) != len(axes):
        raise SubsystemError(f"targets {tuple(targets)} must be distinct and non-empty")
    return tuple(axes)


def _apply(matrix: np.ndarray, axes: Tuple[int, ...], psi: np.ndarray) -> np.ndarray:
    """Contracts a 2^k x 2^k matrix into the given axes of a (2,)*n amplitude tensor."""
    k = len(axes)
    if matrix.shape != (2 ** k, 2 ** k):
        raise DimensionError(f"{matrix.shape} matrix applied to {k} qubit(s)")
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(out, tuple(range(k)), axes)


def is_unitary(u: np.ndarray, tol: float = ALGEBRAIC_TOL) -> bool:
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def apply_unitary(u: MatrixLike, targets: Targets, s: StateVector) -> StateVector:
    '''
    Applies a local unitary to the target qubits, identity elsewhere.

    :param u: 2^k x 2^k unitary; its first qubit acts on targets[0]
    :param targets: labels or indices of the k target qubits
    :param s: state of the full register
    '''
    matrix = _matrix(u)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or not is_unitary(matrix):
        raise NotUnitaryError("operator is not unitary")
    axes = _axes(s.labels, targets)
    out = _apply(matrix, axes, s.tensor())
    return StateVector.normalized(out, s.labels)


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF


def phase_gate(phi: float) -> np.ndarray:
    """diag(1, e^{i phi}): the local rotation |1> -> e^{i phi}|1>."""
    if not np.isfinite(phi):
        raise ValueError(f"phase {phi!r} is not finite")
    return np.diag([1.0, np.exp(1j * phi)]).astype(complex)


def cnot_ancilla_target() -> np.ndarray:
    """
    CNOT on the (ancilla, alice) pair with alice as control:
    |x>|0> -> |x>|0>, |x>|1> -> |x+1 mod 2>|1>.
    """
    u = np.zeros((4, 4), dtype=complex)
    for x in (0, 1):
        for y in (0, 1):
            u[2 * ((x + y) % 2) + y, 2 * x + y] = 1.0
    return u


BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


def bell_states(labels: Sequence[str] = ("ancilla", "alice")) -> Dict[str, StateVector]:
    """phi± = (|00> ± |11>)/√2, psi± = (|01> ± |10>)/√2."""
    h = SQRT_HALF
    return {
        "phi+": StateVector([h, 0, 0, h], tuple(labels)),
        "phi-": StateVector([h, 0, 0, -h], tuple(labels)),
        "psi+": StateVector([0, h, h, 0], tuple(labels)),
        "psi-": StateVector([0, h, -h, 0], tuple(labels)),
    }


def projector(s: StateVector) -> np.ndarray:
    return np.outer(s.amplitudes, s.amplitudes.conj())


def bell_projectors() -> Dict[str, np.ndarray]:
    return {name: projector(state) for name, state in bell_states().items()}


def computational_projectors() -> Dict[str, np.ndarray]:
    return {"0": np.diag([1.0, 0.0]).astype(complex), "1": np.diag([0.0, 1.0]).astype(complex)}


def pauli_direction(n: Sequence[float]) -> Observable:
    '''
    Spin observable σ·n̂ = n_x σx + n_y σy + n_z σz.

    :raises ValueError: |n| differs from 1 by more than 1e-9
    '''
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError(f"direction {n.tolist()} is not a unit 3-vector")
    return Observable(n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z)


def expectation(m: MatrixLike, targets: Targets, s: StateVector) -> float:
    '''
    <s| M_targets |s> for a Hermitian M acting on the target qubits.

    :raises NotHermitianError: imaginary residue of 1e-10 or more
    '''
    matrix = _matrix(m)
    axes = _axes(s.labels, targets)
    value = np.vdot(s.amplitudes, _apply(matrix, axes, s.tensor()).reshape(-1))
    if abs(value.imag) >= ACCUMULATED_TOL:
        raise NotHermitianError(f"expectation value has imaginary part {value.imag!r}")
    return float(value.real)


def projective_measure(s: StateVector, targets: Targets,
                       projectors: Dict[str, np.ndarray]) -> List[MeasurementBranch]:
    '''
    Projective measurement of the target qubits.

    :param projectors: outcome label -> projector on the target subspace; must sum to identity
    :return: one branch per outcome, in the order of `projectors`
    '''
    axes = _axes(s.labels, targets)
    family = {label: np.asarray(p, dtype=complex) for label, p in projectors.items()}
    dim = 2 ** len(axes)
    total = sum(family.values(), np.zeros((dim, dim), dtype=complex))
    if np.max(np.abs(total - np.eye(dim))) > ALGEBRAIC_TOL:
        raise IncompleteMeasurementError("projectors do not sum to identity")

    branches = []
    for label, p in family.items():
        v = _apply(p, axes, s.tensor()).reshape(-1)
        probability = float(np.vdot(v, v).real)
        state = StateVector.normalized(v, s.labels) if probability > ZERO_PROBABILITY else None
        branches.append(MeasurementBranch(label, probability, state))

    total_probability = sum(b.probability for b in branches)
    if abs(total_probability - 1.0) > ACCUMULATED_TOL:
        raise IncompleteMeasurementError(f"outcome probabilities sum to {total_probability!r}")
    return branches


def condition_on(s: StateVector, targets: Targets, outcome: StateVector) -> Optional[StateVector]:
    '''
    State of the remaining qubits after the target qubits were found in `outcome`.

    Returns None if the outcome has zero amplitude in s.
    '''
    axes = _axes(s.labels, targets)
    if outcome.num_qubits != len(axes):
        raise DimensionError(f"{outcome.num_qubits}-qubit outcome for {len(axes)} targets")
    if len(axes) == s.num_qubits:
        raise SubsystemError("nothing left after conditioning on every qubit")
    bra = outcome.tensor().conj()
    rest = np.tensordot(bra, s.tensor(), axes=(tuple(range(len(axes))), axes)).reshape(-1)
    if np.vdot(rest, rest).real <= ZERO_PROBABILITY:
        return None
    labels = tuple(l for i, l in enumerate(s.labels) if i not in axes)
    return StateVector.normalized(rest, labels)


def as_density(s: StateVector) -> DensityMatrix:
    return DensityMatrix(projector(s), s.labels)


def partial_trace(s: Union[StateVector, DensityMatrix], keep: Targets) -> DensityMatrix:
    '''
    Reduced state on the `keep` qubits (returned in register order).

    :raises SubsystemError: keep is empty or covers the whole register
    '''
    if isinstance(s, StateVector):
        rho, labels = projector(s), s.labels
    else:
        rho, labels = s.matrix, s.labels
    if not labels:
        raise SubsystemError("density matrix carries no subsystem labels")
    if not keep:
        raise SubsystemError("keep set is empty")
    kept = sorted(_axes(labels, keep))
    if len(kept) == len(labels):
        raise SubsystemError("keep set must be a proper subset")
    traced = [i for i in range(len(labels)) if i not in kept]

    n = len(labels)
    t = rho.reshape((2,) * (2 * n))
    order = kept + traced
    t = t.transpose(order + [n + i for i in order])
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    reduced = np.trace(t.reshape(dk, dt, dk, dt), axis1=1, axis2=3)
    return DensityMatrix(reduced, tuple(labels[i] for i in kept))


def fidelity_pure(target: StateVector, rho: DensityMatrix) -> float:
    '''
    <target| rho |target>, clipped into [0, 1].

    :raises DimensionError: dimensions differ
    '''
    if rho.dim != target.amplitudes.size:
        raise DimensionError(f"{target.amplitudes.size}-dim target against {rho.dim}-dim state")
    value = np.vdot(target.amplitudes, rho.matrix @ target.amplitudes)
    if abs(value.imag) >= ACCUMULATED_TOL:
        raise NotHermitianError(f"fidelity has imaginary part {value.imag!r}")
    return float(min(1.0, max(0.0, value.real)))


def state_fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for two pure states."""
    return fidelity_pure(a, as_density(b))


def joint_minus_probability(m_a: Observable, targets_a: Targets,
                            m_b: Observable, targets_b: Targets, s: StateVector) -> float:
    '''
    <s| Π-(A) ⊗ Π-(B) |s> with Π-(M) = (I - M)/2: both parties obtain -1.

    :raises NotBivalentError: either observable is not ±1-valued
    '''
    for m in (m_a, m_b):
        if not m.is_bivalent():
            raise NotBivalentError("observable does not square to identity")
    axes_a = _axes(s.labels, targets_a)
    axes_b = _axes(s.labels, targets_b)
    if set(axes_a) & set(axes_b):
        raise SubsystemError("the two parties measure overlapping qubits")
    v = _apply(m_a.minus_projector(), axes_a, s.tensor())
    v = _apply(m_b.minus_projector(), axes_b, v)
    return float(np.vdot(v, v).real)


def minus_probability(m: Observable, rho: DensityMatrix) -> float:
    """tr(Π-(M) rho): probability of the -1 outcome on a (reduced) state."""
    if not m.is_bivalent():
        raise NotBivalentError("observable does not square to identity")
    if m.dim != rho.dim:
        raise DimensionError(f"{m.dim}-dim observable on {rho.dim}-dim state")
    return float(np.trace(m.minus_projector() @ rho.matrix).real)
