"""Dense pure-state primitives for small qubit registers.

Basis labels are big-endian: qubit 0 is the most significant bit of the
amplitude index. Measured qubits are removed from the register.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Protocol, Sequence

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-10
COMPLETENESS_TOL = 1e-12
ZERO_PROBABILITY = 1e-14

_SQRT_HALF = 1.0 / np.sqrt(2.0)


class CapacityError(ValueError):
    """Raised when a register would exceed ``MAX_QUBITS``."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Immutable amplitude vector over ``num_qubits`` qubits.

    ``num_qubits`` may be 0 for the scalar left over when every qubit of a
    register has been measured.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).ravel()
        n = amps.size.bit_length() - 1
        if amps.size == 0 or amps.size != 1 << n:
            raise ValueError(f"amplitude vector length {amps.size} is not a power of two")
        if n > MAX_QUBITS:
            raise CapacityError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def qubit(cls, a: complex, b: complex) -> PureState:
        return cls(np.array([a, b], dtype=np.complex128))

    @classmethod
    def basis(cls, label: str) -> PureState:
        """Computational basis state from a bit string such as ``"010"``."""
        amps = np.zeros(1 << len(label), dtype=np.complex128)
        amps[int(label, 2)] = 1.0
        return cls(amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> PureState:
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.amplitudes / nrm)

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"PureState(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


class BellOutcome(enum.IntEnum):
    """Bell-basis outcome; the value is the 2-bit wire code (parity, phase)."""

    PHI_PLUS = 0b00
    PHI_MINUS = 0b01
    PSI_PLUS = 0b10
    PSI_MINUS = 0b11

    @property
    def parity(self) -> int:
        return self.value >> 1

    @property
    def phase(self) -> int:
        return self.value & 1

    @classmethod
    def from_bits(cls, parity: int, phase: int) -> BellOutcome:
        return cls((parity << 1) | phase)

    @property
    def vector(self) -> np.ndarray:
        return BELL_VECTORS[self.value]


# rows indexed by BellOutcome value, columns by the two-qubit label |q1 q2>
BELL_VECTORS = _SQRT_HALF * np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1, -1, 0],
    ],
    dtype=np.complex128,
)
BELL_VECTORS.setflags(write=False)


class PauliCorrection(enum.Enum):
    IDENTITY = "I"
    Z = "Z"
    X = "X"
    IY = "iY"

    @property
    def matrix(self) -> np.ndarray:
        return PAULI_MATRICES[self]

    @classmethod
    def for_outcome(cls, outcome: BellOutcome) -> PauliCorrection:
        return _CORRECTION_TABLE[BellOutcome(outcome)]


PAULI_MATRICES = {
    PauliCorrection.IDENTITY: np.eye(2, dtype=np.complex128),
    PauliCorrection.Z: np.array([[1, 0], [0, -1]], dtype=np.complex128),
    PauliCorrection.X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    PauliCorrection.IY: np.array([[0, 1], [-1, 0]], dtype=np.complex128),
}
for _m in PAULI_MATRICES.values():
    _m.setflags(write=False)

_CORRECTION_TABLE = {
    BellOutcome.PHI_PLUS: PauliCorrection.IDENTITY,
    BellOutcome.PHI_MINUS: PauliCorrection.Z,
    BellOutcome.PSI_PLUS: PauliCorrection.X,
    BellOutcome.PSI_MINUS: PauliCorrection.IY,
}


def correction_for(outcome: BellOutcome) -> PauliCorrection:
    return PauliCorrection.for_outcome(outcome)


@dataclass(frozen=True, eq=False)
class KrausPair:
    """Two-outcome generalized measurement ``{E_S, E_F}`` on one qubit."""

    e_success: np.ndarray
    e_fail: np.ndarray

    def __post_init__(self):
        es = np.array(self.e_success, dtype=np.complex128)
        ef = np.array(self.e_fail, dtype=np.complex128)
        if es.shape != (2, 2) or ef.shape != (2, 2):
            raise ValueError("Kraus operators must be 2x2")
        es.setflags(write=False)
        ef.setflags(write=False)
        object.__setattr__(self, "e_success", es)
        object.__setattr__(self, "e_fail", ef)

    def completeness_error(self) -> float:
        total = self.e_success.conj().T @ self.e_success + self.e_fail.conj().T @ self.e_fail
        return float(np.max(np.abs(total - np.eye(2))))

    def is_complete(self, tol: float = COMPLETENESS_TOL) -> bool:
        return self.completeness_error() <= tol

    @property
    def is_identity(self) -> bool:
        return np.array_equal(self.e_success, np.eye(2)) and not np.any(self.e_fail)

    @classmethod
    def identity(cls) -> KrausPair:
        return cls(np.eye(2), np.zeros((2, 2)))


class Uniform(Protocol):
    def random(self) -> float: ...


class RandomSource:
    """Seeded stream of uniform reals on [0, 1)."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self._gen = np.random.default_rng(seed)

    def random(self) -> float:
        return float(self._gen.random())

    def __repr__(self):
        return f"RandomSource(seed={self.seed})"


class ReplaySource:
    """Uniform source that replays a fixed sequence of draws."""

    def __init__(self, draws: Sequence[float]):
        self._draws = draws
        self.position = 0

    def random(self) -> float:
        u = float(self._draws[self.position])
        self.position += 1
        return u


def tensor(a: PureState, b: PureState) -> PureState:
    if a.num_qubits + b.num_qubits > MAX_QUBITS:
        raise CapacityError(
            f"{a.num_qubits + b.num_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap"
        )
    return PureState(np.kron(a.amplitudes, b.amplitudes))


def _check_qubit(state: PureState, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.num_qubits}-qubit state")


def apply_single_qubit(state: PureState, qubit: int, op) -> PureState:
    """Apply a 2x2 operator to one tensor factor. No renormalization."""
    _check_qubit(state, qubit)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (2, 2):
        raise ValueError("operator must be 2x2")
    n = state.num_qubits
    if n == 1:
        return PureState(op @ state.amplitudes)
    psi = state.amplitudes.reshape((1 << qubit, 2, -1))
    return PureState(np.einsum("ij,ajb->aib", op, psi).ravel())


class BellBranch(NamedTuple):
    outcome: BellOutcome
    probability: float
    state: PureState | None  # None when the branch is impossible


def bell_branches(state: PureState, q1: int, q2: int) -> list[BellBranch]:
    """All four Bell-measurement branches on qubits ``q1, q2``, in wire-code order."""
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    if q1 == q2:
        raise ValueError("Bell measurement needs two distinct qubits")
    n = state.num_qubits
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.moveaxis(psi, (q1, q2), (0, 1)).reshape(4, -1)
    projected = BELL_VECTORS.conj() @ psi
    probs = np.einsum("kr,kr->k", projected.conj(), projected).real

    branches = []
    for outcome, p, vec in zip(BellOutcome, probs, projected):
        p = float(p)
        if p < ZERO_PROBABILITY:
            branches.append(BellBranch(outcome, p, None))
        else:
            branches.append(BellBranch(outcome, p, PureState(vec / np.sqrt(p))))
    return branches


def pick_branch(probabilities: Sequence[float], u: float) -> int:
    """Index of the branch selected by a uniform draw ``u``.

    Impossible branches (below ``ZERO_PROBABILITY``) are never chosen.
    """
    cumulative = 0.0
    last = -1
    for k, p in enumerate(probabilities):
        if p < ZERO_PROBABILITY:
            continue
        cumulative += p
        last = k
        if u < cumulative:
            return k
    if last < 0:
        raise ValueError("no branch has nonzero probability")
    return last


def bell_measure(state: PureState, q1: int, q2: int, rng: Uniform):
    """Sample a Bell measurement; returns ``(outcome, collapsed, probability)``."""
    branches = bell_branches(state, q1, q2)
    k = pick_branch([b.probability for b in branches], rng.random())
    chosen = branches[k]
    return chosen.outcome, chosen.state, chosen.probability


class KrausBranch(NamedTuple):
    success: bool
    probability: float
    state: PureState | None


def kraus_branches(state: PureState, qubit: int, kraus: KrausPair) -> list[KrausBranch]:
    if not kraus.is_complete():
        raise ValueError(
            f"Kraus pair is not complete (error {kraus.completeness_error():.3g})"
        )
    out = []
    for success, op in ((True, kraus.e_success), (False, kraus.e_fail)):
        raw = apply_single_qubit(state, qubit, op)
        p = raw.norm() ** 2
        out.append(KrausBranch(success, p, raw.normalized() if p >= ZERO_PROBABILITY else None))
    return out


def generalized_measure(state: PureState, qubit: int, kraus: KrausPair, rng: Uniform):
    """Sample ``{E_S, E_F}``; returns ``(success, post_state, probability)``."""
    branches = kraus_branches(state, qubit, kraus)
    k = pick_branch([b.probability for b in branches], rng.random())
    chosen = branches[k]
    return chosen.success, chosen.state, chosen.probability


def fidelity(a: PureState, b: PureState) -> float:
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
