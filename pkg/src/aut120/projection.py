"""Fixed-subcode projection model for an automorphism of odd prime order.

An automorphism of type p-(c;f) has c cycles of length p and f fixed coordinates.
Projecting each cycle of a fixed codeword to a single coordinate gives a self-dual
code of length c + f whose split weights (x, y) lift to weight p*x + y.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .affine import split_var
from .textfmt import Entry, FormatError, SectionFile, parse_sections

# Prime cycle types of automorphisms of a [120, 60, 24] self-dual code, taken as given
# input data (the derivation lives outside this package).
PRIME_TYPES_120: Mapping[int, tuple[tuple[int, int], ...]] = {
    2: ((48, 24), (60, 0)),
    3: ((32, 24), (34, 18), (36, 12), (38, 6), (40, 0)),
    5: ((24, 0),),
    7: ((17, 1),),
    19: ((6, 6),),
    23: ((5, 5),),
    29: ((4, 4),),
}

# Types that survive once order-3 elements are known to act without fixed points.
ALLOWED_TYPES_120: Mapping[int, tuple[tuple[int, int], ...]] = {
    p: tuple(cf for cf in types if p != 3 or cf[1] == 0) for p, types in PRIME_TYPES_120.items()
}


@dataclass(frozen=True)
class PrimeType:
    p: int
    c: int
    f: int

    @property
    def n(self) -> int:
        return self.p * self.c + self.f

    @property
    def order(self) -> int:
        return self.p

    def __str__(self) -> str:
        return f"{self.p}-({self.c};{self.f})"


@dataclass(frozen=True)
class CompositeType:
    """Order p*r with s1 p-cycles, s2 r-cycles, s3 pr-cycles and f fixed points."""

    p: int
    r: int
    s1: int
    s2: int
    s3: int
    f: int

    @property
    def n(self) -> int:
        return self.s1 * self.p + self.s2 * self.r + self.s3 * self.p * self.r + self.f

    @property
    def order(self) -> int:
        return self.p * self.r

    def power(self, e: int) -> PrimeType:
        """Cycle type of sigma^e for e in {p, r}."""
        if e == self.r:
            return PrimeType(self.p, self.s1 + self.s3 * self.r, self.s2 * self.r + self.f)
        if e == self.p:
            return PrimeType(self.r, self.s2 + self.s3 * self.p, self.s1 * self.p + self.f)
        raise ValueError(f"exponent {e} is neither {self.p} nor {self.r}")

    def __str__(self) -> str:
        return f"{self.p * self.r}-({self.s1},{self.s2},{self.s3};{self.f})"


CycleType = PrimeType | CompositeType

_PRIME_RE = re.compile(r"^\s*(\d+)\s*-\s*\(?\s*(\d+)\s*[;,-]\s*(\d+)\s*\)?\s*$")


def parse_prime_type(text: str) -> PrimeType:
    """Accepts ``3-(34;18)`` and the preset spelling ``3-34-18``."""
    m = _PRIME_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse cycle type {text!r}")
    return PrimeType(*(int(g) for g in m.groups()))


def extremal_distance(n: int) -> int:
    if n < 2 or n % 2:
        raise ValueError("length must be even and at least 2")
    return 4 * (n // 24) + (6 if n % 24 == 22 else 4)


def validate_prime_type(p: int, c: int, f: int, table: Mapping[int, Sequence[tuple[int, int]]] = ALLOWED_TYPES_120) -> bool:
    return (c, f) in table.get(p, ())


def lifted_weight(x: int, y: int, p: int) -> int:
    if x < 0 or y < 0:
        raise ValueError("split weights are nonnegative")
    return p * x + y


@dataclass(frozen=True)
class ProjectedCodeModel:
    """Dimensions of the projected code; ``k1[i]`` pairs with ``k2[i]``."""

    p: int
    c: int
    f: int
    k1: tuple[int, ...]
    k2: tuple[int, ...]

    @property
    def length(self) -> int:
        return self.c + self.f

    @property
    def dim(self) -> int:
        return (self.c + self.f) // 2

    @property
    def lift_multiplier(self) -> int:
        return self.p

    def k1_for(self, k2: int) -> int:
        return self.k1[self.k2.index(k2)]

    def rank_d(self, k2: int) -> int:
        return self.dim - self.k1_for(k2) - k2


def subcode_dimension_candidates(f: int, d: int) -> tuple[int, ...]:
    """Possible dimensions of the fixed-point-supported subcode, an [f, k2, >= d] code."""
    if f < d:
        return (0,)
    # Singleton bound plus self-orthogonality; exact for f == d (only the all-one word).
    top = min(f - d + 1, f // 2)
    return tuple(range(top + 1))


def project(t: PrimeType, d: int, table: Mapping[int, Sequence[tuple[int, int]]] | None = PRIME_TYPES_120) -> ProjectedCodeModel:
    if not isinstance(t, PrimeType):
        raise TypeError("project needs a prime cycle type")
    if table is not None and not validate_prime_type(t.p, t.c, t.f, table):
        raise ValueError(f"{t} is not a listed cycle type")
    if (t.c + t.f) % 2:
        raise ValueError(f"{t}: c + f must be even for a self-dual projection")
    k1s, k2s = [], []
    for k2 in subcode_dimension_candidates(t.f, d):
        # balance principle: k1 - c/2 = k2 - f/2
        k1 = k2 + (t.c - t.f) // 2
        if k1 < 0 or k1 + k2 > (t.c + t.f) // 2:
            continue
        k1s.append(k1)
        k2s.append(k2)
    if not k2s:
        raise ValueError(f"{t}: no dimension pair satisfies the balance principle")
    return ProjectedCodeModel(t.p, t.c, t.f, tuple(k1s), tuple(k2s))


def projected_distance_bounds(t: PrimeType, d: int) -> tuple[int, int]:
    """(lower, upper) bounds on the minimum distance of the projected code.

    Lower: smallest x + y over nonzero split weights whose lift reaches d.
    Upper: the extremal bound at length c + f.
    """
    lower = min(
        x + y
        for x in range(t.c + 1)
        for y in range(t.f + 1)
        if (x, y) != (0, 0) and lifted_weight(x, y, t.p) >= d
    )
    return lower, extremal_distance(t.c + t.f)


# -- scenarios ---------------------------------------------------------------------------

ZERO_TAGS = ("parity", "doubly-even", "distance", "assumption", "manual")
ASSUMPTION_KINDS = ("k2", "dual_distance_at_least", "absent_first_block_weight")


@dataclass(frozen=True)
class ZeroRule:
    x: int
    y: int
    tag: str
    reason: str

    @property
    def var(self) -> str:
        return split_var(self.x, self.y)


@dataclass(frozen=True)
class Assumption:
    kind: str
    value: int
    citation: str

    def __post_init__(self) -> None:
        if self.kind not in ASSUMPTION_KINDS:
            raise ValueError(f"unknown assumption kind {self.kind!r}")
        if not self.citation:
            raise ValueError("assumptions must carry a citation")


@dataclass(frozen=True)
class ConstraintScenario:
    name: str
    cycle_type: PrimeType
    d: int
    model: ProjectedCodeModel
    k2: int
    zero_rules: tuple[ZeroRule, ...]
    symmetry: bool
    assumptions: tuple[Assumption, ...]
    marginal_links: bool = True
    distance_bounds: tuple[int, int] = (0, 0)

    @property
    def c(self) -> int:
        return self.model.c

    @property
    def f(self) -> int:
        return self.model.f

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def k1(self) -> int:
        return self.model.k1_for(self.k2)

    def zero_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((z.x, z.y) for z in self.zero_rules)

    def rules_for(self, x: int, y: int) -> list[ZeroRule]:
        return [z for z in self.zero_rules if (z.x, z.y) == (x, y)]


def scenario(
    t: PrimeType,
    d: int,
    assumptions: Iterable[Assumption] = (),
    *,
    name: str | None = None,
    table: Mapping[int, Sequence[tuple[int, int]]] | None = PRIME_TYPES_120,
    extra_zeros: Iterable[ZeroRule] = (),
    doubly_even: bool = True,
) -> ConstraintScenario:
    model = project(t, d, table)
    assumptions = tuple(assumptions)
    k2_choices = [a.value for a in assumptions if a.kind == "k2"]
    if len(k2_choices) > 1:
        raise ValueError("at most one k2 branch assumption")
    if k2_choices:
        k2 = k2_choices[0]
        if k2 not in model.k2:
            raise ValueError(f"k2 = {k2} is not admissible for {t}; candidates {model.k2}")
    elif len(model.k2) == 1:
        k2 = model.k2[0]
    else:
        raise ValueError(f"{t}: k2 is one of {model.k2}; pick a branch with a 'k2' assumption")

    lower, upper = projected_distance_bounds(t, d)
    rules: list[ZeroRule] = []
    for x in range(t.c + 1):
        for y in range(t.f + 1):
            if (x + y) % 2:
                rules.append(ZeroRule(x, y, "parity", "projected code is self-dual, so all weights are even"))
            lift = lifted_weight(x, y, t.p)
            if doubly_even and lift % 4:
                rules.append(ZeroRule(x, y, "doubly-even", f"lifted weight {lift} is not divisible by 4"))
            if 0 < x + y < lower or 0 < lift < d:
                rules.append(ZeroRule(x, y, "distance", f"weight {x + y} / lifted weight {lift} below the minimum distance"))
            for a in assumptions:
                if a.kind == "dual_distance_at_least" and 0 < x < a.value:
                    rules.append(ZeroRule(x, y, "assumption", f"dual distance of the first-block code is at least {a.value}: {a.citation}"))
                if a.kind == "absent_first_block_weight" and (x, y) == (a.value, 0):
                    rules.append(ZeroRule(x, y, "assumption", f"first-block code has no word of weight {a.value}: {a.citation}"))
    rules.extend(extra_zeros)
    return ConstraintScenario(
        name=name or f"{t.p}-{t.c}-{t.f}",
        cycle_type=t,
        d=d,
        model=model,
        k2=k2,
        zero_rules=tuple(rules),
        # the all-one word lies in every self-dual code, hence in the projection
        symmetry=True,
        assumptions=assumptions,
        marginal_links=True,
        distance_bounds=(lower, upper),
    )


# -- scenario files ---------------------------------------------------------------------------


def _parse_assumption(e: Entry) -> Assumption:
    if len(e.words) != 2:
        raise FormatError(f"line {e.line}: assumption must be '<kind> <value>'")
    return Assumption(e.words[0], int(e.words[1]), e.citation)


def _parse_zero(e: Entry) -> ZeroRule:
    m = re.fullmatch(r"A\((\d+),(\d+)\)", "".join(e.words))
    if not m:
        raise FormatError(f"line {e.line}: zero entry must look like A(x,y)")
    return ZeroRule(int(m.group(1)), int(m.group(2)), "manual", e.citation)


def scenario_from_sections(sf: SectionFile) -> ConstraintScenario:
    try:
        t = parse_prime_type(sf.model["type"])
        d = int(sf.model["d"])
    except KeyError as exc:
        raise FormatError(f"{sf.source}: [model] needs 'type' and 'd'") from exc
    assumptions = [_parse_assumption(e) for e in sf.assume]
    if "k2" in sf.model:
        assumptions.insert(0, Assumption("k2", int(sf.model["k2"]), "[model] k2"))
    table = None if sf.model.get("table", "120") == "none" else PRIME_TYPES_120
    sc = scenario(
        t,
        d,
        assumptions,
        name=sf.model.get("name"),
        table=table,
        extra_zeros=[_parse_zero(e) for e in sf.zero],
    )
    if sf.model.get("symmetry", "on") == "off":
        sc = replace(sc, symmetry=False)
    if sf.model.get("marginal_links", "on") == "off":
        sc = replace(sc, marginal_links=False)
    return sc


def load_scenario(path: str | Path) -> ConstraintScenario:
    p = Path(path)
    return scenario_from_sections(parse_sections(p.read_text(), source=str(p)))


def dump_scenario(sc: ConstraintScenario) -> str:
    t = sc.cycle_type
    lines = [
        "[model]",
        f"name = {sc.name}",
        f"type = {t}",
        f"d = {sc.d}",
        f"k2 = {sc.k2}",
        f"symmetry = {'on' if sc.symmetry else 'off'}",
        f"marginal_links = {'on' if sc.marginal_links else 'off'}",
        "[assume]",
    ]
    lines += [f"{a.kind} {a.value} | {a.citation}" for a in sc.assumptions if a.kind != "k2"]
    manual = [z for z in sc.zero_rules if z.tag == "manual"]
    if manual:
        lines.append("[zero]")
        lines += [f"A({z.x},{z.y}) | {z.reason}" for z in manual]
    return "\n".join(lines) + "\n"


PRESET_NAMES = ("3-32-24", "3-34-18", "3-36-12", "3-38-6")


def preset_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown scenario preset {name!r}; known: {', '.join(PRESET_NAMES)}")
    return resources.files("aut120").joinpath("data", "scenarios", f"{name}.scn").read_text()


def preset(name: str) -> ConstraintScenario:
    return scenario_from_sections(parse_sections(preset_text(name), source=f"preset:{name}"))
