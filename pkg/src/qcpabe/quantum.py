"""Minimal state-vector simulator for the handful of qubits the protocols need.

Qubit positions are 1-based and position 1 is the most significant bit of
the basis-state index, so a codeword string such as ``"0101101"`` reads
left to right as positions 1..7.
"""
from __future__ import annotations

import enum
import zlib
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexOutOfRange, LengthMismatch

NORM_TOL = 1e-10
_COLLAPSE_GUARD = 1e-12
_DETERMINISTIC = 1e-12
MAX_QUBITS = 12

_INV_SQRT2 = 1 / np.sqrt(2)


class Basis(enum.IntEnum):
    """Conjugate-coding bases; the integer value is the public bit convention."""

    Z = 0
    X = 1


class RandomSource:
    """Seeded randomness injected into every probabilistic step.

    Two sources built from the same seed produce identical draw sequences.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, label: str) -> "RandomSource":
        """Independent deterministic stream keyed by ``label``."""
        ss = np.random.SeedSequence([self.seed, zlib.crc32(label.encode())])
        return RandomSource(int(ss.generate_state(1, dtype=np.uint64)[0]))

    def random(self) -> float:
        return float(self._gen.random())

    def bit(self) -> int:
        return int(self._gen.integers(0, 2))

    def bits(self, n: int) -> list[int]:
        return [int(b) for b in self._gen.integers(0, 2, size=n)]

    def integers(self, low: int, high: int, size: int | None = None):
        if size is None:
            return int(self._gen.integers(low, high))
        return [int(v) for v in self._gen.integers(low, high, size=size)]

    def bytes(self, n: int) -> bytes:
        return self._gen.bytes(n)

    def permutation(self, n: int) -> list[int]:
        return [int(v) for v in self._gen.permutation(n)]


class StateVector:
    """Normalized amplitude vector over ``num_qubits`` qubits."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes: Iterable[complex], num_qubits: int | None = None):
        amps = np.array(amplitudes, dtype=complex)
        if num_qubits is None:
            num_qubits = int(round(np.log2(len(amps)))) if len(amps) else 0
        if num_qubits < 1 or len(amps) != 2**num_qubits:
            raise LengthMismatch(
                f"amplitude vector of length {len(amps)} does not describe {num_qubits} qubits"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.flags.writeable = False
        self.num_qubits = num_qubits
        self.amplitudes = amps

    @classmethod
    def basis_state(cls, bits: str | Sequence[int]) -> "StateVector":
        """Computational basis state from a bit string, position 1 leftmost."""
        bits = [int(b) for b in bits]
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int("".join(map(str, bits)), 2)] = 1.0
        return cls(amps, len(bits))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

    def equal_up_to_phase(self, other: "StateVector", tol: float = NORM_TOL) -> bool:
        if other.num_qubits != self.num_qubits:
            return False
        overlap = np.vdot(self.amplitudes, other.amplitudes)
        if abs(overlap) < _COLLAPSE_GUARD:
            return False
        phase = overlap / abs(overlap)
        return bool(np.max(np.abs(self.amplitudes * phase - other.amplitudes)) < tol)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    def __hash__(self):
        return hash((self.num_qubits, self.amplitudes.tobytes()))

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


_PREPARED = {
    (0, Basis.Z): StateVector([1, 0]),
    (1, Basis.Z): StateVector([0, 1]),
    (0, Basis.X): StateVector([_INV_SQRT2, _INV_SQRT2]),
    (1, Basis.X): StateVector([_INV_SQRT2, -_INV_SQRT2]),
}


def prepare(bit: int, basis: Basis) -> StateVector:
    """|0>, |1> in Z; |+>, |-> in X."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return _PREPARED[(bit, Basis(basis))]


def _draw(p0: float, rng: RandomSource) -> int:
    # Deterministic outcomes consume no randomness.
    if p0 >= 1 - _DETERMINISTIC:
        return 0
    if p0 <= _DETERMINISTIC:
        return 1
    return 0 if rng.random() < p0 else 1


def measure(state: StateVector, basis: Basis, rng: RandomSource) -> tuple[int, StateVector]:
    """Born-rule measurement of a single qubit in ``basis``."""
    if state.num_qubits != 1:
        raise LengthMismatch("measure expects a 1-qubit state; use measure_subset_z")
    a, b = complex(state.amplitudes[0]), complex(state.amplitudes[1])
    if basis == Basis.Z:
        p0 = abs(a) ** 2
    else:
        p0 = abs(a + b) ** 2 / 2
    bit = _draw(p0, rng)
    return bit, prepare(bit, basis)


def _check_positions(num_qubits: int, indices: Sequence[int]) -> list[int]:
    indices = [int(i) for i in indices]
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate qubit positions in {indices}")
    for i in indices:
        if not 1 <= i <= num_qubits:
            raise IndexOutOfRange(f"qubit position {i} outside 1..{num_qubits}")
    return indices


def _position_bits(num_qubits: int, indices: Sequence[int]) -> np.ndarray:
    """Array of shape (len(indices), 2**n) with the Z value of each position."""
    idx = np.arange(2**num_qubits)
    return np.array([(idx >> (num_qubits - i)) & 1 for i in indices], dtype=np.int64)


def z_distribution(state: StateVector, indices: Sequence[int]) -> dict[tuple[int, ...], float]:
    """Exact marginal distribution of a Z measurement on ``indices``."""
    indices = _check_positions(state.num_qubits, indices)
    bits = _position_bits(state.num_qubits, indices)
    probs = state.probabilities()
    out: dict[tuple[int, ...], float] = {}
    for k in range(2 ** len(indices)):
        outcome = tuple((k >> (len(indices) - 1 - j)) & 1 for j in range(len(indices)))
        mask = np.all(bits == np.array(outcome)[:, None], axis=0)
        out[outcome] = float(probs[mask].sum())
    return out


def measure_subset_z(
    state: StateVector, indices: Sequence[int], rng: RandomSource
) -> tuple[list[int], StateVector]:
    """Z-measure the given positions and collapse the rest consistently."""
    indices = _check_positions(state.num_qubits, indices)
    dist = z_distribution(state, indices)
    outcomes = list(dist)
    weights = np.array([dist[o] for o in outcomes])
    support = np.flatnonzero(weights > _DETERMINISTIC)
    if len(support) == 1:
        choice = int(support[0])
    else:
        u = rng.random()
        choice = int(np.searchsorted(np.cumsum(weights), u * weights.sum(), side="right"))
        choice = min(choice, len(outcomes) - 1)
    outcome = outcomes[choice]

    bits = _position_bits(state.num_qubits, indices)
    keep = np.all(bits == np.array(outcome)[:, None], axis=0)
    amps = np.where(keep, state.amplitudes, 0)
    total = float(np.sum(np.abs(amps) ** 2))
    if total < _COLLAPSE_GUARD:
        raise RuntimeError("collapse onto an outcome of vanishing probability")
    return list(outcome), StateVector(amps / np.sqrt(total), state.num_qubits)


def apply_pauli_mask(state: StateVector, x_mask: Sequence[int], z_mask: Sequence[int]) -> StateVector:
    """Apply X^x_i Z^z_i to every qubit i (Z acts first)."""
    n = state.num_qubits
    if len(x_mask) != n or len(z_mask) != n:
        raise LengthMismatch(f"masks must have length {n}")
    x_int = int("".join(str(int(b) & 1) for b in x_mask), 2)
    z_int = int("".join(str(int(b) & 1) for b in z_mask), 2)
    idx = np.arange(2**n)
    parity = np.array([bin(v).count("1") & 1 for v in (idx & z_int)])
    phased = state.amplitudes * np.where(parity, -1.0, 1.0)
    out = np.empty_like(phased)
    out[idx ^ x_int] = phased
    return StateVector(out, n)
