"""Bit-packed GF(2) linear algebra and brute-force oracles for small codes.

Vectors are Python ints; bit ``i`` (least significant first) is coordinate ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

ENUMERATION_LIMIT = 28


class DimensionTooLargeError(ValueError):
    pass


def weight(v: int) -> int:
    return v.bit_count() if hasattr(v, "bit_count") else bin(v).count("1")


def dot(u: int, v: int) -> int:
    return weight(u & v) & 1


def bits_to_int(bits: str) -> int:
    if any(ch not in "01" for ch in bits):
        raise ValueError(f"row {bits!r} contains characters outside {{0,1}}")
    return sum(1 << i for i, ch in enumerate(bits) if ch == "1")


def int_to_bits(v: int, n: int) -> str:
    return "".join("1" if (v >> i) & 1 else "0" for i in range(n))


@dataclass(frozen=True)
class BitMatrix:
    rows: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("column count must be at least 1")
        limit = 1 << self.n
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r:#x} does not fit in {self.n} columns")

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "BitMatrix":
        rows = list(rows)
        if not rows:
            raise ValueError("at least one row is required to infer n")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("rows have differing lengths")
        return cls(tuple(bits_to_int(r) for r in rows), n)

    def to_strings(self) -> list[str]:
        return [int_to_bits(r, self.n) for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def rref(m: BitMatrix) -> tuple[BitMatrix, int]:
    """Reduced row-echelon form over GF(2); pivots taken left to right."""
    work = [r for r in m.rows if r]
    out: list[int] = []
    for col in range(m.n):
        bit = 1 << col
        pivot = next((i for i, r in enumerate(work) if r & bit), None)
        if pivot is None:
            continue
        prow = work.pop(pivot)
        work = [r ^ prow if r & bit else r for r in work]
        out = [r ^ prow if r & bit else r for r in out]
        out.append(prow)
        work = [r for r in work if r]
    return BitMatrix(tuple(out), m.n), len(out)


def _pivot_col(row: int) -> int:
    return (row & -row).bit_length() - 1


@dataclass(frozen=True)
class LinearCode:
    """A binary linear code, canonicalized to RREF on construction."""

    generator: BitMatrix

    def __post_init__(self) -> None:
        canon, _ = rref(self.generator)
        object.__setattr__(self, "generator", canon)

    @classmethod
    def from_rows(cls, rows: Iterable[int] | Iterable[str], n: int | None = None) -> "LinearCode":
        rows = list(rows)
        if rows and isinstance(rows[0], str):
            m = BitMatrix.from_strings(rows)
            if n is not None and m.n != n:
                raise ValueError("row length disagrees with n")
            return cls(m)
        if n is None:
            raise ValueError("n is required for integer rows")
        return cls(BitMatrix(tuple(rows), n))

    @property
    def n(self) -> int:
        return self.generator.n

    @property
    def k(self) -> int:
        return len(self.generator.rows)

    def codewords(self) -> Iterator[int]:
        if self.k > ENUMERATION_LIMIT:
            raise DimensionTooLargeError(f"k = {self.k} exceeds the enumeration guard {ENUMERATION_LIMIT}")
        rows = self.generator.rows
        # Gray-code walk: one XOR per codeword.
        word = 0
        yield word
        for i in range(1, 1 << self.k):
            word ^= rows[(i & -i).bit_length() - 1]
            yield word

    def contains(self, v: int) -> bool:
        for r in self.generator.rows:
            if v >> _pivot_col(r) & 1:
                v ^= r
        return v == 0

    def __contains__(self, v: int) -> bool:
        return self.contains(v)


def dual_basis(c: LinearCode) -> LinearCode:
    """Generator of the dual code, read off the RREF as [I | P] -> [P^T | I]."""
    rows = c.generator.rows
    pivots = [_pivot_col(r) for r in rows]
    pivot_set = set(pivots)
    dual_rows = []
    for j in range(c.n):
        if j in pivot_set:
            continue
        v = 1 << j
        for r, p in zip(rows, pivots):
            if (r >> j) & 1:
                v |= 1 << p
        dual_rows.append(v)
    return LinearCode(BitMatrix(tuple(dual_rows), c.n))


@dataclass(frozen=True)
class WeightVector:
    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    @classmethod
    def from_mapping(cls, mapping: dict[int, int], n: int) -> "WeightVector":
        counts = [0] * (n + 1)
        for w, a in mapping.items():
            counts[w] = a
        return cls(tuple(counts))

    def as_dict(self) -> dict[int, int]:
        return {w: a for w, a in enumerate(self.counts) if a}

    def __getitem__(self, w: int) -> int:
        return self.counts[w]

    def total(self) -> int:
        return sum(self.counts)


def weight_distribution(c: LinearCode) -> WeightVector:
    counts = [0] * (c.n + 1)
    for word in c.codewords():
        counts[weight(word)] += 1
    return WeightVector(tuple(counts))


def split_weight_distribution(c: LinearCode, first_block: Sequence[int]) -> dict[tuple[int, int], int]:
    """Joint counts of (weight on ``first_block``, weight on the remaining coordinates)."""
    mask = sum(1 << i for i in first_block)
    table: dict[tuple[int, int], int] = {}
    for word in c.codewords():
        key = (weight(word & mask), weight(word & ~mask))
        table[key] = table.get(key, 0) + 1
    return table


@dataclass(frozen=True)
class Classification:
    self_orthogonal: bool
    self_dual: bool
    doubly_even: bool
    min_distance: int


def is_self_orthogonal(c: LinearCode) -> bool:
    rows = c.generator.rows
    return all(dot(a, b) == 0 for i, a in enumerate(rows) for b in rows[i:])


def classify(c: LinearCode) -> Classification:
    wd = weight_distribution(c)
    nonzero = [w for w in range(1, c.n + 1) if wd[w]]
    self_orth = is_self_orthogonal(c)
    return Classification(
        self_orthogonal=self_orth,
        self_dual=self_orth and c.n == 2 * c.k,
        doubly_even=all(w % 4 == 0 for w in nonzero),
        min_distance=min(nonzero) if nonzero else 0,
    )


def read_generator(path: str | Path) -> LinearCode:
    """Read ``n k`` then ``k`` rows of exactly ``n`` characters from {0,1}."""
    lines = [ln.rstrip("\r\n") for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty generator file")
    try:
        n, k = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"{path}: first line must be 'n k'") from exc
    body = lines[1:]
    if len(body) != k:
        raise ValueError(f"{path}: expected {k} rows, found {len(body)}")
    for i, row in enumerate(body, start=2):
        if len(row) != n:
            raise ValueError(f"{path}:{i}: expected {n} characters, found {len(row)}")
    return LinearCode(BitMatrix(tuple(bits_to_int(r) for r in body), n))


def write_generator(c: LinearCode, path: str | Path) -> None:
    text = "\n".join([f"{c.n} {c.k}", *c.generator.to_strings()]) + "\n"
    Path(path).write_text(text)


def permute(v: int, perm: Sequence[int]) -> int:
    """Image of ``v`` under the coordinate map ``i -> perm[i]``."""
    out = 0
    for i, j in enumerate(perm):
        if (v >> i) & 1:
            out |= 1 << j
    return out


def is_automorphism(c: LinearCode, perm: Sequence[int]) -> bool:
    return all(c.contains(permute(r, perm)) for r in c.generator.rows)


def fixed_subcode(c: LinearCode, perm: Sequence[int]) -> LinearCode:
    """Codewords fixed by ``perm`` (brute force; small codes only)."""
    rows = [w for w in c.codewords() if permute(w, perm) == w]
    if not rows:
        return LinearCode(BitMatrix((), c.n))
    return LinearCode(BitMatrix(tuple(rows), c.n))


def extended_hamming() -> LinearCode:
    return LinearCode.from_rows(["11110000", "00111100", "00001111", "01010101"])


def extended_golay() -> LinearCode:
    """The [24,12,8] code as the extended quadratic-residue code of length 23.

    Coordinate ``i < 23`` is the field element ``i``; coordinate 23 is infinity.
    """
    qr = {(x * x) % 23 for x in range(1, 23)}
    # Shifts of the nonresidues-plus-zero word span the even subcode; the
    # all-one word completes it.
    base = [0] + sorted(set(range(1, 23)) - qr)
    rows = []
    for s in range(23):
        v = 0
        for i in base:
            v |= 1 << ((i + s) % 23)
        if weight(v) % 2:
            v |= 1 << 23
        rows.append(v)
    rows.append((1 << 24) - 1)
    return LinearCode(BitMatrix(tuple(rows), 24))
