"""Expansion of the BB84 seed into the basis-selection string.

The default generator is a plain Fibonacci LFSR.  It is linear and
therefore predictable from 2m output bits; it is *not* a secure stream
cipher.  Anything implementing :class:`Keystream` can replace it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import sympy

from .errors import DegenerateSeed, UnsupportedLength

DEFAULT_TAPS: dict[int, tuple[int, ...]] = {
    8: (8, 6, 5, 4),
    16: (16, 15, 13, 4),
    24: (24, 23, 22, 17),
    32: (32, 22, 2, 1),
}


@dataclass(frozen=True)
class LfsrSpec:
    """Register length and feedback taps.

    Tap p reads register cell m - p counted from the output cell, so tap m
    is the bit about to be emitted.  The feedback polynomial is
    x^m + sum(x^p for p in taps if p != m) + 1.
    """

    m: int
    taps: tuple[int, ...]

    def __post_init__(self):
        if self.m not in self.taps or any(not 1 <= t <= self.m for t in self.taps):
            raise ValueError(f"taps {self.taps} invalid for a {self.m}-bit register")

    @classmethod
    def default(cls, m: int) -> "LfsrSpec":
        if m not in DEFAULT_TAPS:
            raise UnsupportedLength(f"no default taps for m={m}; supported: {sorted(DEFAULT_TAPS)}")
        return cls(m, DEFAULT_TAPS[m])

    def polynomial(self) -> int:
        poly = (1 << self.m) | 1
        for t in self.taps:
            if t != self.m:
                poly |= 1 << t
        return poly


def _gf2_mulmod(a: int, b: int, poly: int, m: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if (a >> m) & 1:
            a ^= poly
    return r


def _gf2_pow_x(e: int, poly: int, m: int) -> int:
    result, base = 1, 2
    while e:
        if e & 1:
            result = _gf2_mulmod(result, base, poly, m)
        base = _gf2_mulmod(base, base, poly, m)
        e >>= 1
    return result


def is_primitive(spec: LfsrSpec) -> bool:
    """True when x has multiplicative order 2^m - 1 modulo the feedback polynomial."""
    order = 2**spec.m - 1
    poly = spec.polynomial()
    if _gf2_pow_x(order, poly, spec.m) != 1:
        return False
    return all(_gf2_pow_x(order // q, poly, spec.m) != 1 for q in sympy.factorint(order))


class Lfsr:
    """Fibonacci LFSR; ``seed[0]`` is the first bit emitted."""

    def __init__(self, seed: str, spec: LfsrSpec):
        if len(seed) != spec.m or set(seed) - {"0", "1"}:
            raise UnsupportedLength(f"seed must be a {spec.m}-bit string")
        if "1" not in seed:
            raise DegenerateSeed("all-zero seed locks the register")
        self.spec = spec
        self.state = sum(int(b) << i for i, b in enumerate(seed))
        self._shifts = tuple(spec.m - t for t in spec.taps)

    def step(self) -> int:
        out = self.state & 1
        fb = 0
        for s in self._shifts:
            fb ^= (self.state >> s) & 1
        self.state = (self.state >> 1) | (fb << (self.spec.m - 1))
        return out


class Keystream(Protocol):
    def expand(self, seed: str, out_len: int) -> str: ...


@dataclass(frozen=True)
class LfsrKeystream:
    spec: LfsrSpec

    @classmethod
    def for_bits(cls, m: int) -> "LfsrKeystream":
        return cls(LfsrSpec.default(m))

    def expand(self, seed: str, out_len: int) -> str:
        return expand(seed, out_len, self.spec)


def expand(seed: str, out_len: int, spec: LfsrSpec | None = None) -> str:
    """First ``out_len`` output bits of the LFSR started from ``seed``."""
    if spec is None:
        spec = LfsrSpec.default(len(seed))
    if out_len < 1:
        raise ValueError("out_len must be at least 1")
    reg = Lfsr(seed, spec)
    return "".join(str(reg.step()) for _ in range(out_len))


def period(seed: str, spec: LfsrSpec) -> int:
    """Length of the state cycle through ``seed``, by direct walk."""
    reg = Lfsr(seed, spec)
    start = reg.state
    steps = 0
    while True:
        reg.step()
        steps += 1
        if reg.state == start:
            return steps
        if steps > 2**spec.m:
            raise RuntimeError("state walk did not return to the seed")
