"""CSS logical states and the quantum secret sharing built on them.

A code is stored as its two codeword cosets.  ``words0`` spans the logical
|0>_L and ``words1`` the logical |1>_L; both are uniform superpositions.
A set of qubit positions is *qualified* when the XOR of those positions is
constant on each coset and differs between them, so a Z measurement of
just those qubits reveals the logical bit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CapacityExceeded,
    DependentGenerators,
    InvalidCode,
    NotQualified,
    RepInSpan,
    SharesConsumed,
)
from .quantum import MAX_QUBITS, RandomSource, StateVector, measure_subset_z, z_distribution

MAX_BRUTE_FORCE = 20

STEANE_ZERO = (
    "0000000", "0101101", "0011011", "0110110",
    "1111000", "1010101", "1100011", "1001110",
)
STEANE_ONE = (
    "1111111", "1010010", "1100100", "1001001",
    "0000111", "0101010", "0011100", "0110001",
)
# Generators of STEANE_ZERO, read off the printed codeword list.
STEANE_GENERATORS = ("0101101", "0011011", "1111000")


def _to_int(word: str) -> int:
    return int(word, 2)


def _to_word(value: int, n: int) -> str:
    return format(value, f"0{n}b")


def _xor(a: str, b: str) -> str:
    return _to_word(_to_int(a) ^ _to_int(b), len(a))


def parity(word: str, positions: Iterable[int]) -> int:
    """XOR of the bits of ``word`` at 1-based ``positions``."""
    return sum(int(word[p - 1]) for p in positions) & 1


@dataclass(frozen=True)
class CssCode:
    n: int
    words0: tuple[str, ...]
    words1: tuple[str, ...]

    def __post_init__(self):
        words = self.words0 + self.words1
        if any(len(w) != self.n or set(w) - {"0", "1"} for w in words):
            raise InvalidCode(f"codewords must be {self.n}-bit strings")
        zero = "0" * self.n
        set0, set1 = set(self.words0), set(self.words1)
        if zero not in set0:
            raise InvalidCode("L0 must contain the zero word")
        if len(set0) != len(self.words0) or len(set1) != len(self.words1):
            raise InvalidCode("duplicate codewords")
        if any(_xor(a, b) not in set0 for a in set0 for b in set0):
            raise InvalidCode("L0 is not closed under XOR")
        size = len(set0)
        if size & (size - 1):
            raise InvalidCode("|L0| must be a power of two")
        rep = self.words1[0] if self.words1 else None
        if rep is None or {_xor(c, rep) for c in set0} != set1:
            raise InvalidCode("L1 must be a coset of L0")
        if set0 & set1:
            raise InvalidCode("L0 and L1 intersect")

    @property
    def coset_rep(self) -> str:
        return self.words1[0]

    def is_qualified(self, positions: Iterable[int]) -> bool:
        positions = sorted(set(positions))
        if not positions:
            return False
        p0 = {parity(w, positions) for w in self.words0}
        p1 = {parity(w, positions) for w in self.words1}
        return len(p0) == 1 and len(p1) == 1 and p0 != p1

    def decode_parity(self, positions: Iterable[int]) -> int:
        """The XOR value that signals logical 0 on a qualified set."""
        return parity(self.words0[0], positions)


def steane_default() -> CssCode:
    return CssCode(7, STEANE_ZERO, STEANE_ONE)


def _gf2_rank(rows: Sequence[int]) -> int:
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                break
            row ^= pivots[top]
    return len(pivots)


def css_from_generators(gen: Sequence[str], coset_rep: str) -> CssCode:
    """Build L0 = span(gen) and L1 = L0 XOR coset_rep."""
    if not gen:
        raise InvalidCode("at least one generator is required")
    n = len(coset_rep)
    if any(len(g) != n for g in gen):
        raise InvalidCode("generators and coset representative differ in length")
    ints = [_to_int(g) for g in gen]
    if _gf2_rank(ints) != len(ints):
        raise DependentGenerators("generator rows are linearly dependent over GF(2)")
    span = []
    for coeffs in itertools.product((0, 1), repeat=len(ints)):
        v = 0
        for c, g in zip(coeffs, ints):
            if c:
                v ^= g
        span.append(v)
    rep = _to_int(coset_rep)
    if rep in span:
        raise RepInSpan(f"coset representative {coset_rep} lies in the span")
    return CssCode(n, tuple(_to_word(v, n) for v in span), tuple(_to_word(v ^ rep, n) for v in span))


def encode_logical(code: CssCode, bit: int) -> StateVector:
    if code.n > MAX_QUBITS:
        raise CapacityExceeded(f"{code.n} qubits exceeds simulator capacity {MAX_QUBITS}")
    words = code.words1 if bit else code.words0
    amps = np.zeros(2**code.n, dtype=complex)
    amps[[_to_int(w) for w in words]] = 1 / np.sqrt(len(words))
    return StateVector(amps, code.n)


@dataclass(frozen=True)
class QualifiedSet:
    positions: frozenset[int]
    minimal: bool

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.positions))


def qualified_sets(code: CssCode) -> list[QualifiedSet]:
    """Every qualified position set, found by enumerating all 2^n subsets.

    Sets come back ordered by size and then lexicographically.
    """
    if code.n > MAX_BRUTE_FORCE:
        raise CapacityExceeded(f"brute force over 2^{code.n} subsets refused")
    found = [
        frozenset(t)
        for k in range(1, code.n + 1)
        for t in itertools.combinations(range(1, code.n + 1), k)
        if code.is_qualified(t)
    ]
    return [QualifiedSet(s, not any(o < s for o in found)) for s in found]


def xor_distribution(state: StateVector, positions: Iterable[int]) -> tuple[float, float]:
    """Exact probabilities of XOR = 0 and XOR = 1 for a Z measurement."""
    dist = z_distribution(state, sorted(positions))
    p1 = sum(p for outcome, p in dist.items() if sum(outcome) & 1)
    return 1.0 - p1, p1


def reconstruct_bit(
    code: CssCode, state: StateVector, positions: Iterable[int], rng: RandomSource
) -> tuple[int, StateVector]:
    """Measure the share positions in Z and XOR them back into the logical bit.

    Returns the bit and the collapsed joint state.
    """
    positions = sorted(set(positions))
    if not code.is_qualified(positions):
        raise NotQualified(f"positions {positions} do not determine the logical bit")
    bits, collapsed = measure_subset_z(state, positions, rng)
    return (sum(bits) & 1) ^ code.decode_parity(positions), collapsed


@dataclass
class ShareRegistry:
    """Joint codeword states held by the authority, addressed by handle.

    A handle is ``(state_id, position)``.  Granting shares transfers the
    qubits out of the registry, so each state can be handed out once.
    """

    _states: dict[int, StateVector] = field(default_factory=dict)
    _granted: set[int] = field(default_factory=set)
    _next_id: int = 0

    def register(self, state: StateVector) -> int:
        sid = self._next_id
        self._next_id += 1
        self._states[sid] = state
        return sid

    def state(self, state_id: int) -> StateVector:
        if state_id in self._granted:
            raise SharesConsumed(f"state {state_id} was already handed out")
        return self._states[state_id]

    def grant(self, state_id: int, positions: Iterable[int]) -> "GrantedShares":
        state = self.state(state_id)
        self._granted.add(state_id)
        del self._states[state_id]
        return GrantedShares(state_id, frozenset(positions), state)

    def __contains__(self, state_id: int) -> bool:
        return state_id in self._states

    def __len__(self) -> int:
        return len(self._states)


@dataclass(frozen=True)
class GrantedShares:
    """Qubits of one codeword state released to a data user.

    The joint state travels with the grant; the holder may only measure the
    granted positions.
    """

    state_id: int
    positions: frozenset[int]
    state: StateVector

    def reconstruct(self, code: CssCode, rng: RandomSource) -> int:
        bit, _ = reconstruct_bit(code, self.state, self.positions, rng)
        return bit
