"""Conjugate-coding encryption: message bits in Z or X as chosen by B'."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, RecordFormatError
from .quantum import Basis, RandomSource, StateVector, apply_pauli_mask, measure, prepare

CIPHERTEXT_HEADER = "qcpabe-ciphertext v1"


@dataclass(frozen=True)
class QubitCiphertext:
    qubits: tuple[StateVector, ...]

    @property
    def length(self) -> int:
        return len(self.qubits)

    def __len__(self):
        return len(self.qubits)

    def scrambled(self, x_mask: Sequence[int], z_mask: Sequence[int]) -> "QubitCiphertext":
        """Per-qubit Pauli one-time pad X^x_i Z^z_i."""
        if len(x_mask) != self.length or len(z_mask) != self.length:
            raise LengthMismatch("pad masks must match the ciphertext length")
        return QubitCiphertext(
            tuple(apply_pauli_mask(q, [x], [z]) for q, x, z in zip(self.qubits, x_mask, z_mask))
        )

    def to_text(self) -> str:
        lines = [CIPHERTEXT_HEADER, f"length {self.length}"]
        lines += [_qubit_line(q) for q in self.qubits]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QubitCiphertext":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != CIPHERTEXT_HEADER:
            raise RecordFormatError("missing ciphertext header")
        try:
            n = int(lines[1].split()[1])
            qubits = tuple(_parse_qubit(ln) for ln in lines[2:])
        except (IndexError, ValueError) as exc:
            raise RecordFormatError(f"malformed ciphertext: {exc}") from exc
        if len(qubits) != n:
            raise RecordFormatError(f"declared {n} qubits, found {len(qubits)}")
        return cls(qubits)


def _qubit_line(q: StateVector) -> str:
    for (bit, basis), ref in _TAGS.items():
        if q == ref:
            return f"T {basis.name}{bit}"
    a, b = q.amplitudes
    return "A " + " ".join(repr(float(v)) for v in (a.real, a.imag, b.real, b.imag))


def _parse_qubit(line: str) -> StateVector:
    kind, *rest = line.split()
    if kind == "T":
        (tag,) = rest
        return prepare(int(tag[1]), Basis[tag[0]])
    if kind == "A":
        re0, im0, re1, im1 = (float(v) for v in rest)
        return StateVector([complex(re0, im0), complex(re1, im1)])
    raise ValueError(f"unknown qubit line kind {kind!r}")


_TAGS = {(bit, basis): prepare(bit, basis) for basis in Basis for bit in (0, 1)}


def _bits(s: str | Sequence[int]) -> list[int]:
    out = [int(b) for b in s]
    if any(b not in (0, 1) for b in out):
        raise ValueError("bit strings may only contain 0 and 1")
    return out


def encrypt(message: str | Sequence[int], b_prime: str | Sequence[int]) -> QubitCiphertext:
    m, b = _bits(message), _bits(b_prime)
    if len(b) < len(m):
        raise LengthMismatch(f"basis string has {len(b)} bits for a {len(m)}-bit message")
    return QubitCiphertext(tuple(prepare(mi, Basis(bi)) for mi, bi in zip(m, b)))


def decrypt(c: QubitCiphertext, b_prime: str | Sequence[int], rng: RandomSource) -> str:
    b = _bits(b_prime)
    if len(b) < c.length:
        raise LengthMismatch(f"basis string has {len(b)} bits for {c.length} qubits")
    return "".join(str(measure(q, Basis(bi), rng)[0]) for q, bi in zip(c.qubits, b))


def random_pad(length: int, rng: RandomSource) -> tuple[list[int], list[int]]:
    return rng.bits(length), rng.bits(length)


def bits_to_hex(bits: str) -> str:
    if len(bits) % 4:
        raise ValueError("bit length must be a multiple of 4")
    return "".join(format(int(bits[i : i + 4], 2), "x") for i in range(0, len(bits), 4))


def hex_to_bits(text: str) -> str:
    return "".join(format(int(ch, 16), "04b") for ch in text.strip())


def agreement(a: str, b: str) -> float:
    return float(np.mean([x == y for x, y in zip(a, b)]))
