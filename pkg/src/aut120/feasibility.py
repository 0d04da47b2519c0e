"""Exact parametric linear solving, implied-relation proofs and integer infeasibility certificates.

Systems are solved in two layers. Relations of the form ``v = const`` or ``v = w`` (zero
rules, symmetry, normalization) are applied as substitutions; everything else goes through
fraction-free Gaussian elimination over the remaining class representatives.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Callable, Iterable, Mapping, Sequence

from .affine import AffineRelation, LinearExpr, collect_variables, compile_predicate, split_var, var_sort_key
from .projection import ConstraintScenario
from .transforms import krawtchouk_table

DOMAIN_LIMIT = 10**7
BOX_LIMIT = 10**6


class InconsistentSystemError(ValueError):
    def __init__(self, verdict: "Infeasible") -> None:
        super().__init__("system has no rational solution")
        self.verdict = verdict


class DomainTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class LinearSystem:
    relations: tuple[AffineRelation, ...]
    variables: tuple[str, ...]
    provenance: tuple[str, ...]
    _echelons: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def build(cls, tagged: Iterable[tuple[AffineRelation, str]], variables: Iterable[str] = ()) -> "LinearSystem":
        tagged = list(tagged)
        rels = tuple(r for r, _ in tagged)
        names = dict.fromkeys(variables)
        for v in collect_variables(rels):
            names.setdefault(v, None)
        return cls(rels, tuple(names), tuple(t for _, t in tagged))

    def extended(self, relations: Iterable[AffineRelation], tag: str = "extra") -> "LinearSystem":
        return LinearSystem.build(
            [*zip(self.relations, self.provenance), *((r, tag) for r in relations)], self.variables
        )

    def __add__(self, other: "LinearSystem") -> "LinearSystem":
        return LinearSystem.build(
            [*zip(self.relations, self.provenance), *zip(other.relations, other.provenance)],
            (*self.variables, *other.variables),
        )

    def __len__(self) -> int:
        return len(self.relations)

    @property
    def echelon(self) -> "Echelon":
        return self.echelon_for(())

    def echelon_for(self, prefer_free: Sequence[str] = ()) -> "Echelon":
        key = tuple(prefer_free)
        if key not in self._echelons:
            self._echelons[key] = Echelon(self, key)
        return self._echelons[key]

    @cached_property
    def _integer_rows(self) -> tuple[tuple[tuple[tuple[str, int], ...], int], ...]:
        out = []
        for r in self.relations:
            den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for _, c in r.coefficients), r.constant.denominator)
            out.append((tuple((v, int(c * den)) for v, c in r.coefficients), int(r.constant * den)))
        return tuple(out)

    def satisfied_by(self, assignment: Mapping[str, Fraction | int]) -> bool:
        # scale the point to integers once; Fraction arithmetic per term is far slower
        values = {v: Fraction(x) for v, x in assignment.items()}
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (q.denominator for q in values.values()), 1)
        scaled = {v: int(q * den) for v, q in values.items()}
        get = scaled.get
        return all(sum(c * get(v, 0) for v, c in row) == const * den for row, const in self._integer_rows)


def _total(assignment: Mapping[str, Fraction | int], names: Iterable[str]) -> dict:
    return {v: assignment.get(v, 0) for v in names}


# -- substitution layer -----------------------------------------------------------------


def is_simple(r: AffineRelation) -> bool:
    """``a*v = k`` or ``a*v - a*w = 0``."""
    if len(r.coefficients) == 1:
        return True
    if len(r.coefficients) == 2 and r.constant == 0:
        (_, a), (_, b) = r.coefficients
        return a == -b
    return False


class Substitution:
    """Union-find over variables with optional fixed class values."""

    def __init__(self, rank: Callable[[str], tuple]) -> None:
        self.parent: dict[str, str] = {}
        self.value: dict[str, Fraction] = {}
        self.rank = rank

    def find(self, v: str) -> str:
        if v not in self.parent:
            return v
        root = v
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(v, v) != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def absorb(self, r: AffineRelation) -> bool:
        """Apply a simple relation; False if it conflicts with what is already known."""
        if len(r.coefficients) == 1:
            (v, a), = r.coefficients
            root, val = self.find(v), r.constant / a
            if root in self.value:
                return self.value[root] == val
            self.value[root] = val
            return True
        (v, _), (w, _) = r.coefficients
        rv, rw = self.find(v), self.find(w)
        if rv == rw:
            return True
        if rv in self.value and rw in self.value and self.value[rv] != self.value[rw]:
            return False
        # keep the representative that ranks later (the more "free" one)
        keep, drop = (rv, rw) if self.rank(rv) >= self.rank(rw) else (rw, rv)
        self.parent[drop] = keep
        if drop in self.value:
            self.value[keep] = self.value.pop(drop)
        return True

    def image(self, v: str) -> LinearExpr:
        root = self.find(v)
        if root in self.value:
            return LinearExpr.const(self.value[root])
        return LinearExpr.var(root)

    def apply(self, r: AffineRelation) -> AffineRelation:
        acc: dict[str, Fraction | int] = {}
        const = r.constant
        value = self.value
        for v, c in r.coefficients:
            root = self.find(v)
            val = value.get(root)
            if val is not None:
                if val:
                    const -= c * val
            else:
                acc[root] = acc.get(root, 0) + (c.numerator if c.denominator == 1 else c)
        return AffineRelation.build(acc, const)


def substitute_with(relations: Sequence[AffineRelation], target: AffineRelation) -> AffineRelation:
    """Independent rewriting check: eliminate variables of ``target`` using simple relations.

    Used by certificate checkers; deliberately does not share code with ``Substitution``.
    """
    value: dict[str, Fraction] = {}
    edges: dict[str, set[str]] = {}
    for r in relations:
        if not is_simple(r):
            raise ValueError(f"not a substitution relation: {r}")
        if len(r.coefficients) == 1:
            (v, a), = r.coefficients
            value[v] = r.constant / a
        else:
            (v, _), (w, _) = r.coefficients
            edges.setdefault(v, set()).add(w)
            edges.setdefault(w, set()).add(v)
    # connected components; every component collapses to its minimal name or to a value
    comp: dict[str, str] = {}
    comp_val: dict[str, Fraction] = {}
    for start in sorted(edges.keys() | value.keys()):
        if start in comp:
            continue
        stack, members = [start], []
        comp[start] = start
        while stack:
            u = stack.pop()
            members.append(u)
            for w in edges.get(u, ()):
                if w not in comp:
                    comp[w] = start
                    stack.append(w)
        vals = {value[m] for m in members if m in value}
        if len(vals) > 1:
            raise ValueError(f"substitution relations disagree on the class of {start}")
        if vals:
            comp_val[start] = vals.pop()
    acc: dict[str, Fraction] = {}
    const = target.constant
    for v, c in target.coefficients:
        root = comp.get(v, v)
        if root in comp_val:
            const -= c * comp_val[root]
        else:
            acc[root] = acc.get(root, 0) + c
    return AffineRelation.build(acc, const)


# -- elimination ---------------------------------------------------------------------------


def _primitive(row: dict[int, int], const: int) -> tuple[dict[int, int], int]:
    g = reduce(math.gcd, row.values(), abs(const))
    if g > 1:
        row = {k: v // g for k, v in row.items()}
        const //= g
    return row, const


def _to_int_row(r: AffineRelation, col: Mapping[str, int]) -> tuple[dict[int, int], int]:
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for _, c in r.coefficients), r.constant.denominator)
    row = {col[v]: int(c * den) for v, c in r.coefficients}
    return _primitive(row, int(r.constant * den))


def _combine(row: dict[int, int], col: int, prow: dict[int, int]) -> dict[int, int]:
    """``a*row - b*prow`` cancelling ``col``, divided by the gcd of all entries."""
    a, b = prow[col], row[col]
    g = math.gcd(a, b)
    ma, mb = a // g, b // g
    if ma < 0:
        ma, mb = -ma, -mb
    out = {k: v * ma for k, v in row.items()} if ma != 1 else dict(row)
    for k, v in prow.items():
        nv = out.get(k, 0) - mb * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    g = reduce(math.gcd, out.values(), 0)
    if g > 1:
        out = {k: v // g for k, v in out.items()}
    return out


def _eliminate(row: dict[int, int], const: int, col: int, prow: dict[int, int], pconst: int) -> tuple[dict[int, int], int]:
    a, b = prow[col], row[col]
    g = math.gcd(a, b)
    ma, mb = a // g, b // g
    if ma < 0:
        ma, mb = -ma, -mb
    out = {k: v * ma for k, v in row.items()} if ma != 1 else dict(row)
    for k, v in prow.items():
        nv = out.get(k, 0) - mb * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return _primitive(out, const * ma - mb * pconst)


class Echelon:
    """Reduced echelon form of a system after substitution; built once, then read-only."""

    def __init__(self, system: LinearSystem, prefer_free: Sequence[str] = ()) -> None:
        self.system = system
        self.prefer_free = tuple(prefer_free)
        preferred = {v: i for i, v in enumerate(self.prefer_free)}

        def rank(v: str) -> tuple:
            # higher rank = better kept free
            if v in preferred:
                return (1, -preferred[v])
            key = var_sort_key(v)
            return (0, key)

        self._rank = rank
        sub = Substitution(rank)
        self.simple_indices: list[int] = []
        dense: list[int] = []
        for i, r in enumerate(system.relations):
            if is_simple(r) and sub.absorb(r):
                self.simple_indices.append(i)
            else:
                dense.append(i)
        self.substitution = sub

        reduced = {i: sub.apply(system.relations[i]) for i in dense}
        names = sorted(
            {v for r in reduced.values() for v in r.variables},
            key=rank,
        )
        self.columns: list[str] = names  # pivot-preferred first
        col = {v: i for i, v in enumerate(names)}
        self._col = col

        pivots: dict[int, tuple[dict[int, int], int]] = {}
        self.basis: list[int] = []
        self.inconsistent_row: int | None = None
        for i in dense:
            r = reduced[i]
            if r.is_trivial():
                continue
            row, const = _to_int_row(r, col)
            for c in [c for c in row if c in pivots]:
                if c in row:
                    row, const = _eliminate(row, const, c, *pivots[c])
            if not row:
                if const and self.inconsistent_row is None:
                    self.inconsistent_row = i
                continue
            p = min(row)
            if row[p] < 0:
                row, const = {k: -v for k, v in row.items()}, -const
            for q, (prow, pconst) in list(pivots.items()):
                if p in prow:
                    pivots[q] = _eliminate(prow, pconst, p, row, const)
            pivots[p] = (row, const)
            self.basis.append(i)
        self.pivots = pivots
        self.reduced = reduced

    # -- queries ------------------------------------------------------------------------

    @property
    def consistent(self) -> bool:
        return self.inconsistent_row is None

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def free_variables(self) -> list[str]:
        return [v for i, v in enumerate(self.columns) if i not in self.pivots]

    def pivot_expression(self, c: int) -> LinearExpr:
        row, const = self.pivots[c]
        a = row[c]
        return LinearExpr.build(
            {self.columns[k]: Fraction(-v, a) for k, v in row.items() if k != c}, Fraction(const, a)
        )

    def express(self, v: str) -> LinearExpr:
        """``v`` as an affine expression in the free variables."""
        img = self.substitution.image(v)
        if img.is_constant():
            return img
        root = img.terms[0][0]
        c = self._col.get(root)
        if c is not None and c in self.pivots:
            return self.pivot_expression(c)
        return LinearExpr.var(root)

    def reduce(self, expr: LinearExpr) -> LinearExpr:
        out = LinearExpr.const(expr.constant)
        for v, c in expr.terms:
            out = out + self.express(v) * c
        return out

    def assignment(self, free_values: Mapping[str, Fraction | int] | None = None) -> dict[str, Fraction]:
        """A rational solution; free variables default to zero."""
        free_values = free_values or {}
        env = {v: Fraction(free_values.get(v, 0)) for v in self.free_variables}
        out = {}
        for v in self.system.variables:
            e = self.express(v)
            out[v] = e.evaluate({u: env.get(u, free_values.get(u, 0)) for u, _ in e.terms})
        return out

    # -- certificates ---------------------------------------------------------------------

    @cached_property
    def _tracked(self) -> dict[int, dict[int, int]]:
        """Fraction-free elimination over the basis rows with combination multipliers tracked.

        Each augmented row stores column coefficients (keys below ``C``), the constant (key
        ``C``) and multipliers of dense relation ``i`` (key ``C + 1 + i``); the row always
        equals the tracked combination of relations.
        """
        C = len(self.columns)
        rows = list(self.basis)
        if self.inconsistent_row is not None:
            rows.append(self.inconsistent_row)
        pivots: dict[int, dict[int, int]] = {}
        self._leftover: list[dict[int, int]] = []
        for i in rows:
            aug = self._augmented(self.reduced[i], C + 1 + i)
            for c in [c for c in aug if c < C and c in pivots]:
                if c in aug:
                    aug = _combine(aug, c, pivots[c])
            cols = [k for k in aug if k < C]
            if not cols:
                self._leftover.append(aug)
                continue
            p = min(cols)
            for q, qrow in list(pivots.items()):
                if p in qrow:
                    pivots[q] = _combine(qrow, p, aug)
            pivots[p] = aug
        return pivots

    def _augmented(self, r: AffineRelation, tag: int) -> dict[int, int]:
        row, const = _to_int_row(r, self._col)
        first_var, first_coeff = r.coefficients[0]
        scale = Fraction(row[self._col[first_var]]) / first_coeff
        m = scale.denominator
        aug = {k: v * m for k, v in row.items()}
        if const:
            aug[len(self.columns)] = const * m
        aug[tag] = -scale.numerator
        return aug

    def combination_for(self, target: AffineRelation) -> dict[int, Fraction] | None:
        """Multipliers over dense relations whose sum equals ``target`` modulo substitutions."""
        pivots = self._tracked
        t = self.substitution.apply(target)
        if any(v not in self._col for v in t.variables):
            return None
        if t.is_trivial():
            return {}
        C = len(self.columns)
        tag = C + 1 + len(self.system.relations)
        if t.is_contradiction():
            return None
        aug = self._augmented(t, tag)
        # pivot rows are fully reduced, so clearing pivot columns only touches free columns;
        # a free column may be cancelled by a later pivot, hence check only at the end
        for c in sorted(k for k in aug if k < C and k in pivots):
            if c in aug:
                aug = _combine(aug, c, pivots[c])
        if any(k <= C for k in aug):
            return None
        # 0 = sum(mu_i * rel_i) + mu_t * target  =>  target = -sum(mu_i / mu_t * rel_i)
        mu_t = aug[tag]
        return {k - C - 1: Fraction(-v, mu_t) for k, v in aug.items() if k != tag}

    def contradiction(self) -> dict[int, Fraction]:
        """Multipliers producing ``0 = nonzero`` (only for inconsistent systems)."""
        if self.inconsistent_row is None:
            raise ValueError("system is consistent")
        self._tracked
        aug = self._leftover[-1]
        C = len(self.columns)
        return {k - C - 1: Fraction(-v) for k, v in aug.items() if k > C}


# -- verdicts -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundStep:
    relation: int
    var: str
    lo: Fraction | None
    hi: Fraction | None


@dataclass(frozen=True)
class Certificate:
    """Re-checkable infeasibility evidence.

    ``NegativeForced``: replaying ``trail`` on the relations leaves ``var`` with an empty
    integer range (negative, or a single non-integral value).
    ``CombinationContradiction``: ``multipliers`` over the relations (plus the listed
    substitution relations) sum to ``0 = nonzero``.
    ``BoxExhausted``: every integer point of ``box`` violates some relation.
    """

    kind: str
    trail: tuple[BoundStep, ...] = ()
    var: str | None = None
    relation: int | None = None
    multipliers: tuple[tuple[int, Fraction], ...] = ()
    substitutions: tuple[int, ...] = ()
    box: tuple[tuple[str, int, int], ...] = ()
    detail: str = ""


@dataclass(frozen=True)
class Feasible:
    witness: dict

    kind = "Feasible"


@dataclass(frozen=True)
class Infeasible:
    certificate: Certificate

    kind = "Infeasible"


@dataclass(frozen=True)
class Unknown:
    reason: str

    kind = "Unknown"


Verdict = Feasible | Infeasible | Unknown


@dataclass(frozen=True)
class Implication:
    target: AffineRelation
    multipliers: tuple[tuple[int, Fraction], ...]
    substitutions: tuple[int, ...]

    holds = True

    def check(self, system: LinearSystem) -> bool:
        combo = AffineRelation.build({}, 0)
        for i, lam in self.multipliers:
            combo = combo + system.relations[i] * lam
        residual = combo - self.target
        subs = [system.relations[i] for i in self.substitutions]
        return substitute_with(subs, residual).is_trivial()


@dataclass(frozen=True)
class Refutation:
    target: AffineRelation
    point: dict
    derived: LinearExpr | None = None

    holds = False

    def check(self, system: LinearSystem) -> bool:
        return system.satisfied_by(self.point) and not self.target.satisfied_by(_total(self.point, self.target.variables))


# -- operations ---------------------------------------------------------------------------------


def _single_enumerator_rows(n: int, k: int, weights: Sequence[int], prefix: str = "A", dual: str = "B",
                            fixed_point: bool = False) -> list[tuple[AffineRelation, str]]:
    kt = krawtchouk_table(n)
    rows = []
    for j in range(n + 1):
        coeffs: dict[str, Fraction] = {}
        for i in weights:
            coeffs[f"{prefix}_{i}"] = coeffs.get(f"{prefix}_{i}", 0) + Fraction(kt(j, i))
        target = f"{prefix}_{j}" if fixed_point else f"{dual}_{j}"
        if fixed_point and j not in weights:
            rows.append((AffineRelation.build(coeffs, 0), f"macwilliams({j})"))
            continue
        coeffs[target] = coeffs.get(target, 0) - 2**k
        rows.append((AffineRelation.build(coeffs, 0), f"macwilliams({j})"))
    return rows


@dataclass(frozen=True)
class EnumeratorScenario:
    """A single weight enumerator of an [n, k] code with prescribed support and dual zeros."""

    name: str
    n: int
    k: int
    support: tuple[int, ...]
    dual_zero: tuple[int, ...]
    citation: str = ""

    @property
    def unknowns(self) -> tuple[str, ...]:
        return tuple(f"A_{j}" for j in self.support if j > 0)


def assemble_system(s: ConstraintScenario | EnumeratorScenario, fixed_point: bool = True) -> LinearSystem:
    """Linear constraints of a scenario.

    With ``fixed_point=False`` the transform equations are left out, keeping only zero rules,
    symmetry, normalization and marginal links (useful for arguments built on marginals alone).
    """
    if isinstance(s, EnumeratorScenario):
        return _assemble_enumerator(s)
    if s.f == 0:
        return _assemble_unsplit(s, fixed_point)
    return _assemble_split(s, fixed_point)


def _assemble_enumerator(s: EnumeratorScenario) -> LinearSystem:
    tagged: list[tuple[AffineRelation, str]] = [
        (AffineRelation.build({"A_0": 1}, 1), "normalization"),
        (AffineRelation.build({"B_0": 1}, 1), "normalization"),
    ]
    tagged += _single_enumerator_rows(s.n, s.k, [j for j in s.support])
    tagged += [(AffineRelation.build({f"B_{j}": 1}, 0), "dual-zero") for j in s.dual_zero]
    return LinearSystem.build(tagged, ["A_0", *s.unknowns] + [f"B_{j}" for j in range(s.n + 1)])


def _assemble_unsplit(s: ConstraintScenario, fixed_point: bool = True) -> LinearSystem:
    c = s.c
    weights = list(range(c + 1))
    tagged: list[tuple[AffineRelation, str]] = [(AffineRelation.build({"A_0": 1}, 1), "normalization")]
    if fixed_point:
        tagged += _single_enumerator_rows(c, s.dim, weights, fixed_point=True)
    zeros = sorted({z.x for z in s.zero_rules})
    tagged += [(AffineRelation.build({f"A_{x}": 1}, 0), "zero") for x in zeros]
    if s.symmetry:
        tagged += [(AffineRelation.build({f"A_{x}": 1, f"A_{c - x}": -1}, 0), "symmetry") for x in range(c // 2) if x != c - x]
    return LinearSystem.build(tagged, [f"A_{x}" for x in weights])


def _assemble_split(s: ConstraintScenario, fixed_point: bool = True) -> LinearSystem:
    c, f = s.c, s.f
    kc, kf = krawtchouk_table(c), krawtchouk_table(f)
    grid = [(x, y) for x in range(c + 1) for y in range(f + 1)]
    names = {xy: split_var(*xy) for xy in grid}
    scale = 2**s.dim
    tagged: list[tuple[AffineRelation, str]] = []
    for r in range(c + 1 if fixed_point else 0):
        for i in range(f + 1):
            coeffs = {names[(w, v)]: kc(r, w) * kf(i, v) for (w, v) in grid}
            coeffs[names[(r, i)]] -= scale
            tagged.append((AffineRelation.build(coeffs, 0), f"split-macwilliams({r},{i})"))
    tags: dict[tuple[int, int], list[str]] = {}
    for z in s.zero_rules:
        tags.setdefault((z.x, z.y), []).append(z.tag)
    for xy in sorted(tags):
        tagged.append((AffineRelation.build({names[xy]: 1}, 0), "zero:" + ",".join(dict.fromkeys(tags[xy]))))
    if s.symmetry:
        for (x, y) in grid:
            partner = (c - x, f - y)
            if (x, y) < partner:
                tagged.append((AffineRelation.build({names[(x, y)]: 1, names[partner]: -1}, 0), "symmetry"))
    tagged.append((AffineRelation.build({names[(0, 0)]: 1}, 1), "normalization"))
    variables = list(names.values())
    if s.marginal_links:
        for x in range(c + 1):
            tagged.append((AffineRelation.build({names[(x, 0)]: 1, f"A_{x}": -1}, 0), "marginal:first-block-code"))
            row = {names[(x, y)]: 1 for y in range(f + 1)}
            row[f"B_{x}"] = -(2**s.k2)
            tagged.append((AffineRelation.build(row, 0), "marginal:first-block-dual"))
        variables += [f"A_{x}" for x in range(c + 1)] + [f"B_{x}" for x in range(c + 1)]
    return LinearSystem.build(tagged, variables)


def _infeasible_from(e: Echelon) -> Infeasible:
    lam = e.contradiction()
    return Infeasible(
        Certificate(
            kind="CombinationContradiction",
            multipliers=tuple(sorted(lam.items())),
            substitutions=tuple(e.simple_indices),
            detail="rational combination of relations reduces to 0 = nonzero",
        )
    )


def solve_parametric(sys: LinearSystem, prefer_free: Sequence[str] = ()) -> list[AffineRelation]:
    """Every determined variable as ``v = affine(free variables)``, sorted by variable."""
    e = sys.echelon_for(prefer_free)
    if not e.consistent:
        raise InconsistentSystemError(_infeasible_from(e))
    free = set(e.free_variables)
    out = []
    for v in sorted(sys.variables, key=var_sort_key):
        if v in free:
            continue
        expr = e.express(v)
        out.append(AffineRelation.equation(LinearExpr.var(v), expr))
    return out


def implies(sys: LinearSystem, target: AffineRelation, prefer_free: Sequence[str] = ()) -> Implication | Refutation:
    e = sys.echelon_for(prefer_free)
    if not e.consistent:
        raise InconsistentSystemError(_infeasible_from(e))
    lam = e.combination_for(target)
    if lam is not None:
        return Implication(target, tuple(sorted(lam.items())), tuple(e.simple_indices))
    derived = e.reduce(target.lhs())
    residual = derived - target.constant
    free_vals: dict[str, Fraction] = {}
    if residual.is_constant():
        pass  # lhs is determined but differs from the claimed constant
    else:
        # residual is nonconstant in the free variables; pick a point where it is nonzero
        v0, c0 = residual.terms[0]
        if residual.constant == 0:
            free_vals[v0] = Fraction(1)
    point = e.assignment(free_vals)
    ref = Refutation(target, point, derived)
    if not ref.check(sys):
        # the zero point made the residual vanish by accident; nudge the leading free variable
        v0 = residual.terms[0][0]
        free_vals[v0] = free_vals.get(v0, 0) + 1
        ref = Refutation(target, e.assignment(free_vals), derived)
    return ref


# -- integer feasibility ------------------------------------------------------------------------

Bounds = dict[str, list]  # var -> [lo: Fraction, hi: Fraction | None]


def _range_of_rest(r: AffineRelation, skip: str, bounds: Bounds) -> tuple[Fraction | None, Fraction | None]:
    lo: Fraction | None = Fraction(0)
    hi: Fraction | None = Fraction(0)
    for v, c in r.coefficients:
        if v == skip:
            continue
        vlo, vhi = bounds[v]
        if c > 0:
            lo = None if lo is None else lo + c * vlo
            hi = None if hi is None or vhi is None else hi + c * vhi
        else:
            lo = None if lo is None or vhi is None else lo + c * vhi
            hi = None if hi is None else hi + c * vlo
    return lo, hi


def _implied_interval(r: AffineRelation, var: str, bounds: Bounds) -> tuple[Fraction | None, Fraction | None]:
    c = r.coeffs[var]
    smin, smax = _range_of_rest(r, var, bounds)
    a = None if smax is None else (r.constant - smax) / c
    b = None if smin is None else (r.constant - smin) / c
    return (a, b) if c > 0 else (b, a)


def propagate_bounds(
    relations: Sequence[AffineRelation], variables: Iterable[str] | None = None, max_rounds: int = 200
) -> tuple[Bounds, list[BoundStep], BoundStep | None]:
    """Interval propagation for nonnegative integer variables.

    Returns (bounds, trail, conflict); ``conflict`` is the step whose range came out empty.
    """
    names = list(variables) if variables is not None else collect_variables(relations)
    for v in collect_variables(relations):
        if v not in names:
            names.append(v)
    bounds: Bounds = {v: [Fraction(0), None] for v in names}
    trail: list[BoundStep] = []
    for _ in range(max_rounds):
        changed = False
        for idx, r in enumerate(relations):
            if r.is_contradiction():
                step = BoundStep(idx, "", None, None)
                return bounds, trail, step
            for v, _ in r.coefficients:
                lo, hi = _implied_interval(r, v, bounds)
                cur_lo, cur_hi = bounds[v]
                new_lo = cur_lo if lo is None else max(cur_lo, Fraction(math.ceil(lo)))
                new_hi = cur_hi if hi is None else (Fraction(math.floor(hi)) if cur_hi is None else min(cur_hi, Fraction(math.floor(hi))))
                if new_lo == cur_lo and new_hi == cur_hi:
                    continue
                step = BoundStep(idx, v, new_lo, new_hi)
                if new_hi is not None and new_lo > new_hi:
                    return bounds, trail, step
                bounds[v] = [new_lo, new_hi]
                trail.append(step)
                changed = True
        if not changed:
            break
    return bounds, trail, None


def integer_feasible(relations: Sequence[AffineRelation], variables: Iterable[str] | None = None) -> Verdict:
    relations = list(relations)
    names = list(variables) if variables is not None else collect_variables(relations)
    bounds, trail, conflict = propagate_bounds(relations, names)
    if conflict is not None:
        return Infeasible(
            Certificate(
                kind="NegativeForced",
                trail=tuple(trail),
                var=conflict.var,
                relation=conflict.relation,
                detail=_conflict_detail(relations, conflict, bounds),
            )
        )
    unbounded = [v for v, (_, hi) in bounds.items() if hi is None]
    if unbounded:
        return Unknown(f"unbounded after propagation: {', '.join(sorted(unbounded, key=var_sort_key))}")
    box = [(v, int(lo), int(hi)) for v, (lo, hi) in bounds.items()]
    size = math.prod(hi - lo + 1 for _, lo, hi in box)
    if size > BOX_LIMIT:
        return Unknown(f"box of {size} points exceeds the search limit {BOX_LIMIT}")
    keys = [v for v, _, _ in box]
    for point in itertools.product(*(range(lo, hi + 1) for _, lo, hi in box)):
        env = dict(zip(keys, point))
        if all(r.satisfied_by(env) for r in relations):
            return Feasible(env)
    return Infeasible(Certificate(kind="BoxExhausted", trail=tuple(trail), box=tuple(box), detail=f"{size} integer points checked"))


def _conflict_detail(relations: Sequence[AffineRelation], step: BoundStep, bounds: Bounds) -> str:
    if not step.var:
        return f"relation {relations[step.relation]} reduces to 0 = nonzero"
    r = relations[step.relation]
    lo, hi = _implied_interval(r, step.var, bounds)
    if lo is not None and lo == hi:
        if lo.denominator != 1:
            return f"{step.var} is forced to the non-integral value {lo} by {r}"
        return f"{step.var} is forced to {lo} < 0 by {r}"
    return f"{step.var} has empty integer range [{step.lo}, {step.hi}] from {r}"


def check_certificate(cert: Certificate, relations: Sequence[AffineRelation]) -> bool:
    """Re-derive the contradiction from scratch with exact arithmetic."""
    relations = list(relations)
    if cert.kind == "CombinationContradiction":
        total = AffineRelation.build({}, 0)
        for i, lam in cert.multipliers:
            total = total + relations[i] * lam
        subs = [relations[i] for i in cert.substitutions]
        return substitute_with(subs, total).is_contradiction()

    lo: dict[str, Fraction] = {}
    hi: dict[str, Fraction | None] = {}

    def interval(r: AffineRelation, var: str) -> tuple[Fraction | None, Fraction | None]:
        # independent re-evaluation of the range of var implied by r
        c = r.coeffs[var]
        rest_min: Fraction | None = Fraction(0)
        rest_max: Fraction | None = Fraction(0)
        for v, a in r.coefficients:
            if v == var:
                continue
            l, h = lo.get(v, Fraction(0)), hi.get(v)
            terms = (a * l, None if h is None else a * h)
            low_t, high_t = (terms[0], terms[1]) if a > 0 else (terms[1], terms[0])
            rest_min = None if rest_min is None or low_t is None else rest_min + low_t
            rest_max = None if rest_max is None or high_t is None else rest_max + high_t
        ends = [None if rest_max is None else (r.constant - rest_max) / c, None if rest_min is None else (r.constant - rest_min) / c]
        return (ends[0], ends[1]) if c > 0 else (ends[1], ends[0])

    for step in cert.trail:
        r = relations[step.relation]
        a, b = interval(r, step.var)
        new_lo = max(lo.get(step.var, Fraction(0)), Fraction(math.ceil(a)) if a is not None else Fraction(0))
        cur_hi = hi.get(step.var)
        cand = None if b is None else Fraction(math.floor(b))
        new_hi = cand if cur_hi is None else (cur_hi if cand is None else min(cur_hi, cand))
        if step.lo is not None and new_lo < step.lo:
            return False
        if step.hi is not None and (new_hi is None or new_hi > step.hi):
            return False
        lo[step.var], hi[step.var] = step.lo, step.hi

    if cert.kind == "NegativeForced":
        r = relations[cert.relation]
        if not cert.var:
            return r.is_contradiction()
        a, b = interval(r, cert.var)
        new_lo = max(lo.get(cert.var, Fraction(0)), Fraction(math.ceil(a)) if a is not None else Fraction(0))
        cur_hi = hi.get(cert.var)
        cand = None if b is None else Fraction(math.floor(b))
        new_hi = cand if cur_hi is None else (cur_hi if cand is None else min(cur_hi, cand))
        return new_hi is not None and new_lo > new_hi
    if cert.kind == "BoxExhausted":
        box = {v: (l, h) for v, l, h in cert.box}
        for v, (l, h) in box.items():
            if l < lo.get(v, 0) or (hi.get(v) is not None and h > hi[v]):
                return False
        missing = set(collect_variables(relations)) - box.keys()
        if missing:
            return False
        keys = list(box)
        for point in itertools.product(*(range(l, h + 1) for l, h in box.values())):
            env = dict(zip(keys, point))
            if all(r.satisfied_by(env) for r in relations):
                return False
        return True
    raise ValueError(f"unknown certificate kind {cert.kind!r}")


def forced_congruence(r: AffineRelation, var: str) -> tuple[int, int] | None:
    """(residue, modulus) that ``var`` must satisfy if every variable in ``r`` is an integer.

    ``None`` when no integer solution exists at all.
    """
    values = [c for _, c in r.coefficients] + [r.constant]
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (q.denominator for q in values), 1)
    ints = {v: int(c * den) for v, c in r.coefficients}
    k = int(r.constant * den)
    a = ints.pop(var)
    g = reduce(math.gcd, (abs(x) for x in ints.values()), 0)
    if g == 0:
        return (k // a, 0) if k % a == 0 else None
    d = math.gcd(a, g)
    if k % d:
        return None
    m = g // d
    if m == 1:
        return (0, 1)
    return ((k // d) * pow(a // d, -1, m) % m, m)


# -- finite case enumeration ---------------------------------------------------------------------


def _as_values(values) -> list[int]:
    if isinstance(values, range):
        return list(values)
    if isinstance(values, tuple) and len(values) == 2:
        lo, hi = values
        return list(range(lo, hi + 1))
    return list(values)


def enumerate_cases(
    domain: Mapping[str, Iterable[int] | tuple[int, int]],
    predicates: Sequence[str | Callable[[Mapping[str, int]], object]],
    let: Mapping[str, str] | None = None,
    report: Sequence[str] | None = None,
    limit: int = DOMAIN_LIMIT,
) -> list[tuple]:
    """All points of a finite integer box that satisfy every predicate.

    ``domain`` values are iterables or inclusive ``(lo, hi)`` tuples; ``let`` defines derived
    quantities (evaluated in order); ``report`` selects which names make up each result tuple.
    """
    names = list(domain)
    values = [_as_values(domain[v]) for v in names]
    size = math.prod(len(v) for v in values)
    if size > limit:
        raise DomainTooLargeError(f"domain has {size} points; limit is {limit}")
    lets = [(k, compile_predicate(expr)) for k, expr in (let or {}).items()]
    preds = [compile_predicate(p) if isinstance(p, str) else p for p in predicates]
    keys = list(report) if report else names
    hits = set()
    for point in itertools.product(*values):
        env: dict[str, object] = dict(zip(names, point))
        for k, fn in lets:
            env[k] = fn(env)
        if all(p(env) for p in preds):
            hits.add(tuple(env[k] for k in keys))
    return sorted(hits)
