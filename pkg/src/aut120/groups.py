"""Arithmetic screening of possible automorphism group orders.

Everything here is integer arithmetic over the order space 2^a * 3^b * 5^c * 7^d * 19^e *
23^g * 29^h: Sylow counting with a normalizer rule, orbit-count integrality, composite
cycle types, and exclusions that come from an explicit, cited fact table.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .projection import ALLOWED_TYPES_120, CompositeType, validate_prime_type
from .textfmt import FormatError, SectionFile, parse_sections, read_sections

PRIMES = (2, 3, 5, 7, 19, 23, 29)
ODD_PRIMES = PRIMES[1:]
LARGE_PRIMES = (7, 19, 23, 29)
EXPONENT_NAMES = "abcdegh"
LENGTH = 120


def valuation(n: int, q: int) -> int:
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


def prime_support(n: int) -> frozenset[int]:
    out, q = set(), 2
    while q * q <= n:
        while n % q == 0:
            out.add(q)
            n //= q
        q += 1
    if n > 1:
        out.add(n)
    return frozenset(out)


@dataclass(frozen=True)
class FixTable:
    """Number of fixed coordinates of an element, keyed by element order."""

    entries: tuple[tuple[int, int], ...]

    @classmethod
    def default(cls, involution_fixed: int = 0) -> "FixTable":
        base = {2: involution_fixed, 3: 0, 5: 0, 7: 1, 19: 6, 23: 5, 29: 4, 15: 0, 57: 0, 115: 0, 4: 0, 8: 0}
        return cls(tuple(sorted(base.items())))

    @property
    def fpf_involutions(self) -> bool:
        return self[2] == 0

    def __getitem__(self, order: int) -> int:
        table = dict(self.entries)
        if order in table:
            return table[order]
        if order == 1:
            return LENGTH
        # any other composite order has a power of order 2, 3 or 5, which fixes nothing
        # under the default table; fall back to the minimum over its prime divisors
        return min(table.get(q, LENGTH) for q in prime_support(order))


@dataclass(frozen=True, order=True)
class PrimePowerSignature:
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.exponents) != len(PRIMES):
            raise ValueError("one exponent per prime is required")
        a, *rest = self.exponents
        if not 0 <= a <= 3 or any(e not in (0, 1) for e in rest):
            raise ValueError(f"exponents out of range: {self.exponents}")

    @classmethod
    def of(cls, order: int) -> "PrimePowerSignature":
        exps = []
        for q in PRIMES:
            e = valuation(order, q)
            order //= q**e
            exps.append(e)
        if order != 1:
            raise ValueError("order has a prime factor outside the allowed set")
        return cls(tuple(exps))

    @property
    def order(self) -> int:
        return math.prod(q**e for q, e in zip(PRIMES, self.exponents))

    def exponent(self, q: int) -> int:
        return self.exponents[PRIMES.index(q)]

    def divisible_by(self, q: int) -> bool:
        return self.exponent(q) > 0

    def __str__(self) -> str:
        parts = [f"{q}^{e}" if e > 1 else str(q) for q, e in zip(PRIMES, self.exponents) if e]
        return "*".join(parts) or "1"


def signature_space(max_two: int = 3) -> list[PrimePowerSignature]:
    ranges = [range(max_two + 1)] + [range(2)] * (len(PRIMES) - 1)
    return [PrimePowerSignature(e) for e in itertools.product(*ranges)]


# -- fact tables ---------------------------------------------------------------------------------

FACT_KINDS = ("forbid_element_order", "odd_composite_orders", "normalizer_order", "exclude_orders")


@dataclass(frozen=True)
class OrderPattern:
    """Exponent ranges per prime; primes not mentioned must be absent."""

    ranges: tuple[tuple[int, int, int], ...]  # (prime, lo, hi)
    text: str

    _TERM = re.compile(r"^(\d+)(?:\^(\d+)(?:-(\d+))?)?$")

    @classmethod
    def parse(cls, text: str) -> "OrderPattern":
        ranges = []
        for term in text.split("*"):
            m = cls._TERM.match(term.strip())
            if not m:
                raise FormatError(f"bad order pattern term {term!r} in {text!r}")
            q, lo, hi = m.groups()
            lo_i = 1 if lo is None else int(lo)
            ranges.append((int(q), lo_i, lo_i if hi is None else int(hi)))
        return cls(tuple(ranges), text)

    def matches(self, sig: PrimePowerSignature) -> bool:
        want = {q: (lo, hi) for q, lo, hi in self.ranges}
        for q in PRIMES:
            lo, hi = want.get(q, (0, 0))
            if not lo <= sig.exponent(q) <= hi:
                return False
        return True


@dataclass(frozen=True)
class Fact:
    kind: str
    args: tuple[str, ...]
    citation: str

    def __str__(self) -> str:
        return f"{self.kind} {' '.join(self.args)}"


@dataclass(frozen=True)
class FactTable:
    facts: tuple[Fact, ...]

    @classmethod
    def from_sections(cls, sf: SectionFile) -> "FactTable":
        facts = []
        for e in sf.fact:
            kind, *args = e.words
            if kind not in FACT_KINDS:
                raise FormatError(f"{sf.source}:{e.line}: unknown fact kind {kind!r}")
            fact = Fact(kind, tuple(args), e.citation)
            _validate_fact(fact, f"{sf.source}:{e.line}")
            facts.append(fact)
        return cls(tuple(facts))

    @classmethod
    def parse(cls, text: str, source: str = "<string>") -> "FactTable":
        return cls.from_sections(parse_sections(text, source))

    @classmethod
    def load(cls, path: str | Path) -> "FactTable":
        return cls.from_sections(read_sections(path))

    @classmethod
    def default(cls) -> "FactTable":
        text = resources.files("aut120").joinpath("data/facts/default.facts").read_text()
        return cls.parse(text, "default.facts")

    def without(self, predicate) -> "FactTable":
        return FactTable(tuple(f for f in self.facts if not predicate(f)))

    def of_kind(self, kind: str) -> list[Fact]:
        return [f for f in self.facts if f.kind == kind]

    def forbidden_orders(self) -> dict[int, Fact]:
        return {int(f.args[0]): f for f in self.of_kind("forbid_element_order")}

    def odd_composites(self) -> tuple[frozenset[int], Fact | None]:
        facts = self.of_kind("odd_composite_orders")
        if not facts:
            return frozenset(), None
        return frozenset(int(a) for f in facts for a in f.args), facts[0]

    def normalizer_orders(self, group_order: int, p: int) -> tuple[frozenset[int], Fact] | None:
        for f in self.of_kind("normalizer_order"):
            if int(f.args[0]) == group_order and int(f.args[1]) == p:
                return frozenset(int(a) for a in f.args[2:]), f
        return None

    def exclusions(self) -> list[tuple[OrderPattern, Fact]]:
        return [(OrderPattern.parse(f.args[0]), f) for f in self.of_kind("exclude_orders")]

    def element_order_allowed(self, order: int) -> tuple[bool, Fact | None]:
        """Whether an element of this (composite) order may exist, with the deciding fact."""
        forbidden = self.forbidden_orders()
        if order in forbidden:
            return False, forbidden[order]
        if order % 2:
            allowed, fact = self.odd_composites()
            if fact is not None and order not in allowed and len(prime_support(order)) > 1:
                return False, fact
        return True, None


_ARITY = {"forbid_element_order": (1, 1), "odd_composite_orders": (1, None), "normalizer_order": (3, None)}


def _validate_fact(f: Fact, where: str) -> None:
    if f.kind == "exclude_orders":
        if len(f.args) != 1:
            raise FormatError(f"{where}: exclude_orders takes one pattern")
        OrderPattern.parse(f.args[0])
        return
    lo, hi = _ARITY[f.kind]
    if len(f.args) < lo or (hi is not None and len(f.args) > hi) or not all(a.isdigit() for a in f.args):
        raise FormatError(f"{where}: malformed arguments for {f.kind}: {' '.join(f.args)}")


# -- composite cycle types ----------------------------------------------------------------------------


def composite_structures(table: Mapping[int, Sequence[tuple[int, int]]] = ALLOWED_TYPES_120) -> list[CompositeType]:
    """Cycle types of order p*r (odd primes p < r) whose two prime powers are both allowed."""
    primes = sorted(q for q in table if q % 2)
    out = []
    for p, r in itertools.combinations(primes, 2):
        for s3 in range(LENGTH // (p * r) + 1):
            for s1 in range((LENGTH - s3 * p * r) // p + 1):
                for s2 in range((LENGTH - s3 * p * r - s1 * p) // r + 1):
                    f = LENGTH - s1 * p - s2 * r - s3 * p * r
                    t = CompositeType(p, r, s1, s2, s3, f)
                    a, b = t.power(r), t.power(p)
                    if validate_prime_type(a.p, a.c, a.f, table) and validate_prime_type(b.p, b.c, b.f, table):
                        out.append(t)
    return sorted(out, key=lambda t: (t.order, t.s1, t.s2, t.s3, t.f))


@dataclass(frozen=True)
class PrimeCheck:
    p: int
    types: tuple[tuple[int, int], ...]
    cycles_not_divisible: bool
    fixed_below_p: bool

    @property
    def verified(self) -> bool:
        return self.cycles_not_divisible and self.fixed_below_p


def p_square_check(table: Mapping[int, Sequence[tuple[int, int]]] = ALLOWED_TYPES_120) -> list[PrimeCheck]:
    """Per odd prime: no allowed type has c divisible by p, and every f is below p.

    Together these rule out p^2 dividing the group order.
    """
    out = []
    for p in sorted(q for q in table if q % 2):
        types = tuple(table[p])
        out.append(
            PrimeCheck(
                p,
                types,
                all(c % p for c, _ in types),
                all(f < p for _, f in types),
            )
        )
    return out


# -- Sylow and orbit counting--------------------------------------------------------------------------


def _action_feasible(r: int, f: int, fix_r: int) -> bool:
    # an element of order r permuting f points: m fixed, the rest in r-cycles
    for m in range(min(f, fix_r) + 1):
        if (f - m) % r == 0 and (m == f or r <= f):
            return True
    return False


def normalizer_primes(p: int, fix: FixTable | None = None, facts: FactTable | None = None) -> frozenset[int]:
    """Primes r that can divide |N_G(P)| / |P| for a Sylow p-subgroup P of order p."""
    fix = fix or FixTable.default()
    facts = facts if facts is not None else FactTable.default()
    odd_allowed, _ = facts.odd_composites()
    f = fix[p]
    out = set()
    for r in PRIMES:
        if r == p:
            continue
        if not _action_feasible(r, f, fix[r]):
            continue
        # r acts nontrivially on P, or centralizes it and p*r is a permitted element order
        if (p - 1) % r == 0 or p * r in odd_allowed:
            out.add(r)
    return frozenset(out)


def _normalizer_orders(p: int, sig: PrimePowerSignature, nprimes: Iterable[int]) -> list[int]:
    choices = [[r**e for e in range(sig.exponent(r) + 1)] for r in sorted(nprimes)]
    return sorted({p * math.prod(c) for c in itertools.product(*choices)})


def sylow_options(p: int, sig: PrimePowerSignature, nprimes: Iterable[int]) -> dict[int, int]:
    """Admissible normalizer orders N mapped to n_p = |G| / N (with n_p = 1 mod p)."""
    g = sig.order
    out = {}
    for n in _normalizer_orders(p, sig, nprimes):
        if g % n == 0 and (g // n) % p == 1:
            out[n] = g // n
    return out


def sylow_candidates(
    p: int,
    sig_space: Iterable[PrimePowerSignature] | None = None,
    fix: FixTable | None = None,
    facts: FactTable | None = None,
) -> frozenset[int]:
    nprimes = normalizer_primes(p, fix, facts)
    space = signature_space() if sig_space is None else sig_space
    out = set()
    for sig in space:
        if sig.divisible_by(p):
            out.update(sylow_options(p, sig, nprimes).values())
    return frozenset(out)


def cfl_t(sig: PrimePowerSignature | int, nps: Mapping[int, int], fix: FixTable | None = None) -> Fraction:
    """Orbit count (120 + sum (p-1) * n_p * fix[p]) / |G|; only large-prime elements fix points."""
    fix = fix or FixTable.default()
    order = sig if isinstance(sig, int) else sig.order
    for p in LARGE_PRIMES:
        if order % p == 0 and p not in nps:
            raise ValueError(f"n_{p} is required for an order divisible by {p}")
    total = LENGTH + sum((p - 1) * n * fix[p] for p, n in nps.items() if order % p == 0)
    return Fraction(total, order)


@dataclass(frozen=True)
class Rejection:
    signature: PrimePowerSignature
    rule: str
    detail: str
    citation: str = ""

    @property
    def cited(self) -> bool:
        return bool(self.citation)


@dataclass(frozen=True)
class Screen:
    fix: FixTable
    arithmetic: tuple[PrimePowerSignature, ...]
    survivors: tuple[PrimePowerSignature, ...]
    log: tuple[Rejection, ...]

    @property
    def orders(self) -> list[int]:
        return sorted(s.order for s in self.survivors)

    @property
    def arithmetic_orders(self) -> list[int]:
        return sorted(s.order for s in self.arithmetic)

    def max_order(self) -> int:
        return max(self.orders)

    def divisible_by(self, p: int, arithmetic: bool = False) -> list[int]:
        pool = self.arithmetic_orders if arithmetic else self.orders
        return [o for o in pool if o % p == 0]

    def rejected(self, order: int) -> list[Rejection]:
        return [r for r in self.log if r.signature.order == order]


def _cfl_ok(sig: PrimePowerSignature, options: Mapping[int, Mapping[int, int]], fix: FixTable) -> bool:
    ps = sorted(options)
    for combo in itertools.product(*(sorted(set(options[p].values())) for p in ps)):
        t = cfl_t(sig, dict(zip(ps, combo)), fix)
        if t.denominator == 1 and t > 0:
            return True
    return False


def order_screen(fix: FixTable | None = None, facts: FactTable | None = None, max_two: int = 3) -> Screen:
    """Screen every signature; the log records each rejection with its rule and citation.

    ``arithmetic`` holds the survivors of Sylow counting and orbit-count integrality alone;
    ``survivors`` additionally respects the fact table.
    """
    fix = fix or FixTable.default()
    facts = facts if facts is not None else FactTable.default()
    use_cfl = fix.fpf_involutions
    nprimes = {p: normalizer_primes(p, fix, facts) for p in LARGE_PRIMES}
    log: list[Rejection] = []
    arithmetic, survivors = [], []
    for sig in signature_space(max_two):
        large = [p for p in LARGE_PRIMES if sig.divisible_by(p)]
        options = {p: sylow_options(p, sig, nprimes[p]) for p in large}
        empty = [p for p in large if not options[p]]
        if empty:
            p = empty[0]
            log.append(Rejection(sig, "sylow", f"no n_{p} = 1 (mod {p}) divides |G| with |N| built from {sorted(nprimes[p])}"))
            continue
        if use_cfl and not _cfl_ok(sig, options, fix):
            log.append(Rejection(sig, "orbit-count", "t is not a positive integer for any admissible Sylow numbers"))
            continue
        arithmetic.append(sig)
        rejection = _apply_facts(sig, options, facts, fix, use_cfl)
        if rejection is not None:
            log.append(rejection)
            continue
        survivors.append(sig)
    return Screen(fix, tuple(arithmetic), tuple(survivors), tuple(log))


def _apply_facts(
    sig: PrimePowerSignature, options: dict[int, dict[int, int]], facts: FactTable, fix: FixTable, use_cfl: bool
) -> Rejection | None:
    g = sig.order
    for pattern, fact in facts.exclusions():
        if pattern.matches(sig):
            return Rejection(sig, "excluded-form", f"order matches {pattern.text}", fact.citation)
    narrowed: dict[int, dict[int, int]] = {}
    for p, opts in options.items():
        keep = {}
        reasons = []
        pinned = facts.normalizer_orders(g, p)
        for n_order, n_p in opts.items():
            if pinned is not None and n_order not in pinned[0]:
                reasons.append((f"|N_G(P_{p})| = {n_order} contradicts the known values {sorted(pinned[0])}", pinned[1]))
                continue
            bad = _centralizer_conflict(p, n_order, facts)
            if bad is not None:
                reasons.append(bad)
                continue
            keep[n_order] = n_p
        if not keep:
            detail, fact = reasons[0]
            return Rejection(sig, "normalizer", detail, fact.citation)
        narrowed[p] = keep
    if use_cfl and narrowed and not _cfl_ok(sig, narrowed, fix):
        return Rejection(sig, "orbit-count", "t fails once fact-restricted Sylow numbers are used", "fact table")
    return None


def _centralizer_conflict(p: int, n_order: int, facts: FactTable) -> tuple[str, Fact] | None:
    # N/C embeds in Aut(C_p), cyclic of order p-1; surplus q-part lands in the centralizer
    for q in prime_support(n_order // p):
        if valuation(n_order, q) > valuation(p - 1, q):
            ok, fact = facts.element_order_allowed(p * q)
            if not ok:
                return (f"|N_G(P_{p})| = {n_order} puts an element of order {q} in C_G(P_{p}), "
                        f"giving order {p * q}", fact)
    return None


# -- simple factors --------------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleGroupRow:
    name: str
    order: int


# Every nonabelian simple group of order below 4080 = |PSL(2,16)|.
SIMPLE_GROUPS = (
    SimpleGroupRow("A5", 60),
    SimpleGroupRow("PSL(2,7)", 168),
    SimpleGroupRow("A6", 360),
    SimpleGroupRow("PSL(2,8)", 504),
    SimpleGroupRow("PSL(2,11)", 660),
    SimpleGroupRow("PSL(2,13)", 1092),
    SimpleGroupRow("PSL(2,17)", 2448),
    SimpleGroupRow("A7", 2520),
    SimpleGroupRow("PSL(2,19)", 3420),
)


def _odd_square_free(n: int) -> bool:
    odd = n >> valuation(n, 2)
    return all(valuation(odd, q) <= 1 for q in prime_support(odd))


def simple_factor_screen(
    max_order: int,
    support: Iterable[int] = PRIMES,
    square_free_odd: bool = True,
    orders: Iterable[int] | None = None,
) -> list[SimpleGroupRow]:
    """Simple groups that could be a composition factor.

    With ``orders`` given, a factor must also divide one of those group orders.
    """
    if max_order >= 4080:
        raise ValueError("the simple group table stops below order 4080")
    support = frozenset(support)
    pool = None if orders is None else tuple(orders)
    return [
        row
        for row in SIMPLE_GROUPS
        if row.order <= max_order
        and prime_support(row.order) <= support
        and (not square_free_odd or _odd_square_free(row.order))
        and (pool is None or any(o % row.order == 0 for o in pool))
    ]
