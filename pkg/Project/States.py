from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from Project.Errors import DimensionError, NormalizationError, NotHermitianError, SubsystemError

# tolerance ladder: algebraic identities / accumulated arithmetic
ALGEBRAIC_TOL = 1e-12
ACCUMULATED_TOL = 1e-10

MAX_QUBITS = 3


def _as_matrix(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class StateVector:
    """
        Pure state of up to three qubits

        Attributes
        __________
        amplitudes: np.ndarray - 2^n complex amplitudes, big-endian: the first
        label is the most significant bit of the index

        labels: Tuple[str, ...] - subsystem names in register order,
        e.g. ("ancilla", "alice", "bob")
    """
    amplitudes: np.ndarray
    labels: Tuple[str, ...]

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        labels = tuple(self.labels)
        if not 1 <= len(labels) <= MAX_QUBITS:
            raise DimensionError(f"{len(labels)} qubits requested, registers hold 1..{MAX_QUBITS}")
        if len(set(labels)) != len(labels):
            raise SubsystemError(f"duplicate subsystem labels {labels}")
        if amplitudes.size != 2 ** len(labels):
            raise DimensionError(f"{amplitudes.size} amplitudes for {len(labels)} qubits")
        if not np.all(np.isfinite(amplitudes)):
            raise NormalizationError("non-finite amplitude")
        norm = np.vdot(amplitudes, amplitudes).real
        if abs(norm - 1.0) > ALGEBRAIC_TOL:
            raise NormalizationError(f"state norm {norm!r} differs from 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def normalized(cls, amplitudes, labels) -> "StateVector":
        """Builds a state from unnormalized amplitudes."""
        v = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = np.sqrt(np.vdot(v, v).real)
        if norm == 0.0:
            raise NormalizationError("zero vector cannot be normalized")
        return cls(v / norm, labels)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def __repr__(self) -> str:
        return f"StateVector({np.round(self.amplitudes, 6).tolist()}, labels={self.labels})"


@dataclass(frozen=True, eq=False)
class Observable:
    """
        Hermitian operator on 1, 2 or 3 qubits

        Attributes
        __________
        matrix: np.ndarray - dim x dim, dim in {2, 4, 8}
    """
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4, 8):
            raise DimensionError(f"observable of shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NotHermitianError("non-finite matrix entry")
        if np.max(np.abs(m - m.conj().T)) > ALGEBRAIC_TOL:
            raise NotHermitianError("matrix is not Hermitian")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return int(np.log2(self.dim))

    def is_bivalent(self) -> bool:
        """M^2 = I, i.e. the spectrum is {+1, -1}."""
        return bool(np.max(np.abs(self.matrix @ self.matrix - np.eye(self.dim))) <= ALGEBRAIC_TOL)

    def minus_projector(self) -> np.ndarray:
        """(I - M) / 2, the projector onto the -1 eigenspace of a bivalent observable."""
        return (np.eye(self.dim) - self.matrix) / 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
        Mixed state, mostly reduced states produced by partial_trace

        Attributes
        __________
        matrix: np.ndarray - dim x dim

        labels: Tuple[str, ...] - subsystems the matrix lives on
    """
    matrix: np.ndarray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        labels = tuple(self.labels)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix of shape {m.shape}")
        if labels and m.shape[0] != 2 ** len(labels):
            raise DimensionError(f"{m.shape[0]}-dimensional matrix for labels {labels}")
        if np.max(np.abs(m - m.conj().T)) > ALGEBRAIC_TOL:
            raise NotHermitianError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > ALGEBRAIC_TOL:
            raise NormalizationError(f"density matrix trace {np.trace(m).real!r}")
        # positive semidefinite up to ACCUMULATED_TOL iff the shifted matrix has a Cholesky factor
        try:
            np.linalg.cholesky(m + ACCUMULATED_TOL * np.eye(m.shape[0]))
        except np.linalg.LinAlgError:
            raise NormalizationError("density matrix is not positive semidefinite") from None
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementBranch:
    """
        One outcome of a projective measurement

        Attributes
        __________
        label: str - outcome name ("0", "1", "phi+", ...)

        probability: float

        state: Optional[StateVector] - normalized post-measurement state,
        None when the branch has zero probability
    """
    label: str
    probability: float
    state: Optional[StateVector]
