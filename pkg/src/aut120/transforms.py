"""Exact Krawtchouk values, MacWilliams and split-MacWilliams transforms, power moments."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping

from .affine import AffineRelation
from .codes_gf2 import WeightVector


class NonIntegralTransformError(ValueError):
    """The transformed distribution has a non-integral or negative entry."""

    def __init__(self, message: str, values: Mapping) -> None:
        super().__init__(message)
        self.values = values


def _krawtchouk_sum(k: int, x: int, n: int) -> int:
    return sum((-1) ** j * comb(x, j) * comb(n - x, k - j) for j in range(k + 1))


@dataclass(frozen=True)
class KrawtchoukTable:
    """All values K_k(x; n) for 0 <= k, x <= n, frozen after construction."""

    n: int
    values: tuple[tuple[int, ...], ...]

    def __call__(self, k: int, x: int) -> int:
        return self.values[k][x]


@lru_cache(maxsize=None)
def krawtchouk_table(n: int) -> KrawtchoukTable:
    if n < 0:
        raise ValueError("n must be nonnegative")
    # Column recurrence K_k(x+1) = K_k(x) - K_{k-1}(x) - K_{k-1}(x+1) is cheaper,
    # but the direct sum keeps the table independent of any recurrence bug.
    rows = tuple(tuple(_krawtchouk_sum(k, x, n) for x in range(n + 1)) for k in range(n + 1))
    return KrawtchoukTable(n, rows)


def krawtchouk(k: int, x: int, n: int) -> int:
    if not (0 <= k <= n and 0 <= x <= n):
        raise ValueError(f"krawtchouk arguments out of range: k={k}, x={x}, n={n}")
    return krawtchouk_table(n)(k, x)


def _as_integer(values: dict, what: str) -> dict:
    bad = {key: v for key, v in values.items() if v.denominator != 1 or v < 0}
    if bad:
        raise NonIntegralTransformError(f"{what} is not a code distribution: offending entries {bad}", values)
    return {key: int(v) for key, v in values.items()}


def macwilliams_rational(counts: Mapping[int, int | Fraction], n: int, k: int) -> dict[int, Fraction]:
    table = krawtchouk_table(n)
    scale = Fraction(1, 2**k)
    return {
        j: scale * sum(a * table(j, i) for i, a in counts.items() if a)
        for j in range(n + 1)
    }


def macwilliams(w: WeightVector, n: int, k: int) -> WeightVector:
    """Dual distribution B_j = 2^-k sum_i A_i K_j(i; n)."""
    if w.n != n:
        raise ValueError(f"weight vector has length {w.n}, expected {n}")
    if w.total() != 2**k:
        raise ValueError(f"counts sum to {w.total()}, expected 2^{k}")
    dual = _as_integer(macwilliams_rational(w.as_dict(), n, k), "MacWilliams transform")
    return WeightVector(tuple(dual[j] for j in range(n + 1)))


@dataclass(frozen=True)
class SplitWeightTable:
    c: int
    f: int
    k: int
    entries: tuple[tuple[tuple[int, int], int], ...]

    @classmethod
    def from_mapping(cls, entries: Mapping[tuple[int, int], int], c: int, f: int, k: int) -> "SplitWeightTable":
        for (x, y) in entries:
            if not (0 <= x <= c and 0 <= y <= f):
                raise ValueError(f"entry {(x, y)} outside the {c}x{f} block")
        return cls(c, f, k, tuple(sorted((key, v) for key, v in entries.items() if v)))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.entries)

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.as_dict().get(key, 0)

    def total(self) -> int:
        return sum(v for _, v in self.entries)


def split_macwilliams(t: SplitWeightTable) -> SplitWeightTable:
    """Dual split distribution via the product kernel K_r(w; c) K_i(v; f)."""
    if t.total() != 2**t.k:
        raise ValueError(f"table sums to {t.total()}, expected 2^{t.k}")
    kc, kf = krawtchouk_table(t.c), krawtchouk_table(t.f)
    scale = Fraction(1, 2**t.k)
    entries = t.entries
    out = {}
    for r in range(t.c + 1):
        for i in range(t.f + 1):
            out[(r, i)] = scale * sum(a * kc(r, w) * kf(i, v) for (w, v), a in entries)
    dual = _as_integer(out, "split MacWilliams transform")
    return SplitWeightTable.from_mapping(dual, t.c, t.f, t.c + t.f - t.k)


def power_moment_system(n: int, k: int, support: Iterable[int]) -> list[AffineRelation]:
    """First three power moments for a binary [n, k] code with no dual weight-1 words.

    Unknowns are ``A_j`` for the nonzero weights in ``support`` plus ``B_2``.
    """
    weights = sorted(j for j in set(support) if j > 0)
    if any(j > n for j in weights):
        raise ValueError("support exceeds the code length")
    names = {j: f"A_{j}" for j in weights}
    zeroth = AffineRelation.build({names[j]: 1 for j in weights}, 2**k - 1)
    first = AffineRelation.build({names[j]: j for j in weights}, Fraction(2 ** k * n, 2))
    second_coeffs: dict[str, Fraction] = {names[j]: Fraction(j * j) for j in weights}
    second_coeffs["B_2"] = -Fraction(2**k, 2)
    second = AffineRelation.build(second_coeffs, Fraction(2**k * n * (n + 1), 4))
    return [zeroth, first, second]
