"""Linear secret sharing over Z_p compiled from threshold policy trees.

The share-generating matrix is built by repeated insertion: start from
W = (1) labelled with the root gate, then expand the first row whose label
is still a gate.  A t-of-k gate on row v appends t-1 zero columns to every
row and replaces v by k rows (v, i, i^2, ..., i^(t-1)) for child i = 1..k.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import sympy

from .errors import FieldTooSmall, LengthMismatch, NotQualified, RecordFormatError
from .policy import Leaf, PolicyNode, Threshold
from .quantum import RandomSource

MATRIX_HEADER = "qcpabe-share-matrix v1"


@dataclass(frozen=True)
class FieldPrime:
    m: int
    p: int

    def __post_init__(self):
        if not sympy.isprime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.p <= 2**self.m:
            raise ValueError(f"p = {self.p} does not exceed 2^{self.m}")

    @classmethod
    def for_bits(cls, m: int) -> "FieldPrime":
        """Smallest prime above 2^m, so every m-bit integer embeds."""
        return cls(m, int(sympy.nextprime(2**m)))


@dataclass(frozen=True)
class ShareMatrix:
    rows: tuple[tuple[int, ...], ...]
    rho: tuple[str, ...]
    p: int

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def to_text(self) -> str:
        l, d = self.shape
        lines = [MATRIX_HEADER, f"p {self.p}", f"rows {l}", f"cols {d}"]
        for i, (row, label) in enumerate(zip(self.rows, self.rho), start=1):
            lines.append(f"row {i} {label}: {' '.join(map(str, row))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ShareMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        try:
            if lines[0] != MATRIX_HEADER:
                raise RecordFormatError(f"bad header {lines[0]!r}")
            p = int(lines[1].split()[1])
            l = int(lines[2].split()[1])
            d = int(lines[3].split()[1])
            rows, rho = [], []
            for i, ln in enumerate(lines[4:], start=1):
                head, values = ln.split(":")
                _, idx, label = head.split()
                if int(idx) != i:
                    raise RecordFormatError(f"row index {idx} out of order")
                rows.append(tuple(int(v) for v in values.split()))
                rho.append(label)
        except (IndexError, ValueError) as exc:
            raise RecordFormatError(f"malformed share matrix: {exc}") from exc
        if len(rows) != l or any(len(r) != d for r in rows):
            raise RecordFormatError("declared dimensions do not match the rows")
        return cls(tuple(rows), tuple(rho), p)


def build_lsss(policy: PolicyNode, field: FieldPrime | int) -> ShareMatrix:
    p = field.p if isinstance(field, FieldPrime) else int(field)
    rows: list[list[int]] = [[1]]
    labels: list[PolicyNode] = [policy]
    while True:
        try:
            at = next(i for i, lab in enumerate(labels) if isinstance(lab, Threshold))
        except StopIteration:
            break
        gate = labels[at]
        k = len(gate.children)
        if k >= p:
            raise FieldTooSmall(f"gate with {k} children needs p > {k}, got {p}")
        extra = gate.t - 1
        for row in rows:
            row.extend([0] * extra)
        v = rows[at][: len(rows[at]) - extra]
        new_rows = [v + [pow(i, e, p) for e in range(1, gate.t)] for i in range(1, k + 1)]
        rows[at : at + 1] = new_rows
        labels[at : at + 1] = list(gate.children)
    rho = tuple(lab.attr for lab in labels if isinstance(lab, Leaf))
    return ShareMatrix(tuple(tuple(r) for r in rows), rho, p)


@dataclass(frozen=True)
class Share:
    attr: str
    row_index: int  # 1-based row of W
    value: int


def share_vector(mat: ShareMatrix, v: Sequence[int]) -> list[Share]:
    """Shares (W . v) mod p for an explicit vector v = (s, r2, ..., rd)."""
    if len(v) != mat.shape[1]:
        raise LengthMismatch(f"vector of length {len(v)} for {mat.shape[1]} columns")
    return [
        Share(label, i, sum(a * b for a, b in zip(row, v)) % mat.p)
        for i, (row, label) in enumerate(zip(mat.rows, mat.rho), start=1)
    ]


def generate_shares(mat: ShareMatrix, secret: int, rng: RandomSource) -> list[Share]:
    if not 0 <= secret < mat.p:
        raise ValueError(f"secret {secret} outside [0, {mat.p})")
    d = mat.shape[1]
    randomness = rng.integers(0, mat.p, size=d - 1) if d > 1 else []
    return share_vector(mat, [secret, *randomness])


@dataclass(frozen=True)
class ReconstructionVector:
    p: int
    coeffs: dict[int, int]  # row index -> coefficient

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.coeffs[i] for i in sorted(self.coeffs))


def _solve_mod_p(a: list[list[int]], b: list[int], p: int) -> list[int] | None:
    """One solution of a x = b over Z_p, free variables set to zero."""
    n_rows, n_cols = len(a), len(a[0]) if a else 0
    aug = [[x % p for x in row] + [bi % p] for row, bi in zip(a, b)]
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][c], -1, p)
        aug[r] = [x * inv % p for x in aug[r]]
        for i in range(n_rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    if any(all(x == 0 for x in row[:-1]) and row[-1] for row in aug):
        return None
    x = [0] * n_cols
    for i, c in enumerate(pivots):
        x[c] = aug[i][-1]
    return x


def reconstruction_vector(mat: ShareMatrix, attrs: Iterable[str]) -> ReconstructionVector:
    """Coefficients c with c . W' = (1, 0, ..., 0) over the rows owned by ``attrs``.

    Raises NotQualified when no such combination exists.
    """
    attrs = set(attrs)
    selected = [i for i, label in enumerate(mat.rho, start=1) if label in attrs]
    if not selected:
        raise NotQualified("no rows belong to the given attributes")
    d = mat.shape[1]
    # c . W' = e1  <=>  W'^T c = e1
    transposed = [[mat.rows[i - 1][col] for i in selected] for col in range(d)]
    target = [1] + [0] * (d - 1)
    solution = _solve_mod_p(transposed, target, mat.p)
    if solution is None:
        raise NotQualified(f"attributes {sorted(attrs)} are not authorized")
    return ReconstructionVector(mat.p, dict(zip(selected, solution)))


def reconstruct_secret(shares: Iterable[Share], vector: ReconstructionVector) -> int:
    by_row = {s.row_index: s.value for s in shares}
    missing = [i for i in vector.coeffs if i not in by_row]
    if missing:
        raise LengthMismatch(f"no share supplied for rows {missing}")
    return sum(c * by_row[i] for i, c in vector.coeffs.items()) % vector.p
