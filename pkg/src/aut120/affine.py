"""Exact affine relations over named variables, plus a small safe expression evaluator.

Relations are written as ordinary arithmetic, e.g. ``A(9,1) + 22*A(8,0) = 34 - 4*A(12,0)``
or ``A_20 = 31 - 10*A_8 + B_2/4``. Both sides must be affine in the variables.
"""

from __future__ import annotations

import ast
import operator
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Callable, Iterable, Mapping

Number = int | Fraction


class ExpressionError(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


_NAME_RE = re.compile(r"^([A-Za-z]+)(?:_(\d+)|\((\d+),(\d+)\))?$")


def var_sort_key(name: str) -> tuple:
    """Order variables by family, then by descending weight (split vars by x, then y)."""
    m = _NAME_RE.match(name)
    if not m:
        return (name, 0, 0)
    fam, j, x, y = m.groups()
    if x is not None:
        return (fam + "()", -int(x), -int(y))
    if j is not None:
        return (fam + "_", -int(j), 0)
    return (fam, 0, 0)


def split_var(x: int, y: int) -> str:
    return f"A({x},{y})"


@dataclass(frozen=True)
class LinearExpr:
    """``constant + sum(coeff * var)`` with exact rational coefficients."""

    terms: tuple[tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    @classmethod
    def build(cls, terms: Mapping[str, Number], constant: Number = 0) -> "LinearExpr":
        return cls(tuple((v, Fraction(c)) for v, c in terms.items() if c != 0), Fraction(constant))

    @classmethod
    def var(cls, name: str) -> "LinearExpr":
        return cls(((name, Fraction(1)),))

    @classmethod
    def const(cls, value: Number) -> "LinearExpr":
        return cls((), Fraction(value))

    @property
    def coeffs(self) -> dict[str, Fraction]:
        return dict(self.terms)

    def is_constant(self) -> bool:
        return not self.terms

    def __add__(self, other: "LinearExpr | Number") -> "LinearExpr":
        other = _lift(other)
        acc = self.coeffs
        for v, c in other.terms:
            acc[v] = acc.get(v, 0) + c
        return LinearExpr.build(acc, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> "LinearExpr":
        return self * -1

    def __sub__(self, other: "LinearExpr | Number") -> "LinearExpr":
        return self + (-_lift(other))

    def __rsub__(self, other: Number) -> "LinearExpr":
        return _lift(other) - self

    def __mul__(self, k: Number) -> "LinearExpr":
        if isinstance(k, LinearExpr):
            if k.is_constant():
                k = k.constant
            elif self.is_constant():
                return k * self.constant
            else:
                raise ExpressionError("product of two non-constant expressions is not affine")
        k = Fraction(k)
        return LinearExpr.build({v: c * k for v, c in self.terms}, self.constant * k)

    __rmul__ = __mul__

    def __truediv__(self, k: "Number | LinearExpr") -> "LinearExpr":
        if isinstance(k, LinearExpr):
            if not k.is_constant():
                raise ExpressionError("division by a non-constant expression")
            k = k.constant
        if k == 0:
            raise ExpressionError("division by zero")
        return self * (1 / Fraction(k))

    def substitute(self, bindings: Mapping[str, "LinearExpr | Number"]) -> "LinearExpr":
        out = LinearExpr.const(self.constant)
        for v, c in self.terms:
            out = out + (_lift(bindings[v]) * c if v in bindings else LinearExpr.var(v) * c)
        return out

    def evaluate(self, assignment: Mapping[str, Number]) -> Fraction:
        return self.constant + sum((c * Fraction(assignment[v]) for v, c in self.terms), Fraction(0))

    def __str__(self) -> str:
        parts = [(c, v) for v, c in sorted(self.terms, key=lambda t: var_sort_key(t[0]))]
        return _format_terms(parts, self.constant, constant_first=True)


def _lift(x: "LinearExpr | Number") -> LinearExpr:
    return x if isinstance(x, LinearExpr) else LinearExpr.const(x)


def _fmt_num(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _format_terms(parts: list[tuple[Fraction, str]], constant: Fraction, constant_first: bool) -> str:
    chunks: list[tuple[bool, str]] = []
    if constant_first and constant != 0:
        chunks.append((constant < 0, _fmt_num(abs(constant))))
    for c, v in parts:
        mag = abs(c)
        body = v if mag == 1 else f"{_fmt_num(mag)}*{v}"
        chunks.append((c < 0, body))
    if not constant_first and constant != 0:
        chunks.append((constant < 0, _fmt_num(abs(constant))))
    if not chunks:
        return "0"
    neg, first = chunks[0]
    out = ("-" if neg else "") + first
    for neg, body in chunks[1:]:
        out += (" - " if neg else " + ") + body
    return out


@dataclass(frozen=True)
class AffineRelation:
    """``sum(coeff * var) = constant``; zero coefficients are never stored."""

    coefficients: tuple[tuple[str, Fraction], ...]
    constant: Fraction

    def __post_init__(self) -> None:
        if any(c == 0 for _, c in self.coefficients):
            raise ValueError("zero coefficients must not be stored")
        names = [v for v, _ in self.coefficients]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable in relation")

    @classmethod
    def build(cls, coefficients: Mapping[str, Number], constant: Number = 0) -> "AffineRelation":
        return cls(tuple((v, Fraction(c)) for v, c in coefficients.items() if c != 0), Fraction(constant))

    @classmethod
    def equation(cls, lhs: LinearExpr, rhs: LinearExpr | Number = 0) -> "AffineRelation":
        diff = lhs - _lift(rhs)
        return cls.build(diff.coeffs, -diff.constant)

    @classmethod
    def parse(cls, text: str) -> "AffineRelation":
        return parse_relation(text)

    @property
    def coeffs(self) -> dict[str, Fraction]:
        return dict(self.coefficients)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coefficients)

    def is_trivial(self) -> bool:
        return not self.coefficients and self.constant == 0

    def is_contradiction(self) -> bool:
        return not self.coefficients and self.constant != 0

    def lhs(self) -> LinearExpr:
        return LinearExpr(self.coefficients)

    def residual(self, assignment: Mapping[str, Number]) -> Fraction:
        """lhs - rhs at ``assignment``; zero iff satisfied."""
        return self.lhs().evaluate(assignment) - self.constant

    def satisfied_by(self, assignment: Mapping[str, Number]) -> bool:
        return self.residual(assignment) == 0

    def __mul__(self, k: Number) -> "AffineRelation":
        k = Fraction(k)
        return AffineRelation.build({v: c * k for v, c in self.coefficients}, self.constant * k)

    __rmul__ = __mul__

    def __add__(self, other: "AffineRelation") -> "AffineRelation":
        acc = self.coeffs
        for v, c in other.coefficients:
            acc[v] = acc.get(v, 0) + c
        return AffineRelation.build(acc, self.constant + other.constant)

    def __sub__(self, other: "AffineRelation") -> "AffineRelation":
        return self + other * -1

    def solved_for(self, var: str) -> LinearExpr:
        """Expression for ``var`` implied by this relation."""
        coeffs = self.coeffs
        if var not in coeffs:
            raise KeyError(var)
        a = coeffs.pop(var)
        return LinearExpr.build({v: -c / a for v, c in coeffs.items()}, self.constant / a)

    def canonical(self) -> "AffineRelation":
        """Primitive integer multiple with the leading variable positive and sorted terms."""
        if not self.coefficients:
            if self.constant == 0:
                return self
            return AffineRelation((), Fraction(1 if self.constant > 0 else -1))
        items = sorted(self.coefficients, key=lambda t: var_sort_key(t[0]))
        values = [c for _, c in items] + [self.constant]
        den = reduce(_lcm, (q.denominator for q in values), 1)
        ints = [int(q * den) for q in values]
        g = reduce(gcd, (abs(i) for i in ints if i), 0) or 1
        sign = -1 if ints[0] < 0 else 1
        scale = Fraction(sign * den, g)
        return AffineRelation(tuple((v, c * scale) for v, c in items), self.constant * scale)

    def same_as(self, other: "AffineRelation") -> bool:
        return self.canonical() == other.canonical()

    def to_string(self) -> str:
        """Integer-coefficient form, e.g. ``3*A(31,3) + 2*A(20,0) = 0``; order preserved."""
        values = [c for _, c in self.coefficients] + [self.constant]
        den = reduce(_lcm, (q.denominator for q in values), 1)
        parts = [(c * den, v) for v, c in self.coefficients]
        return f"{_format_terms(parts, Fraction(0), True)} = {_fmt_num(self.constant * den)}"

    def __str__(self) -> str:
        return self.to_string()


# -- parsing -------------------------------------------------------------------------

_BINOPS: dict[type, Callable] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


def _affine_node(node: ast.AST) -> LinearExpr:
    if isinstance(node, ast.Expression):
        return _affine_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return LinearExpr.const(node.value)
    if isinstance(node, ast.Name):
        return LinearExpr.var(node.id)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        idx = []
        for a in node.args:
            if isinstance(a, ast.UnaryOp) or not (isinstance(a, ast.Constant) and isinstance(a.value, int)):
                raise ExpressionError("variable indices must be nonnegative integer literals")
            idx.append(str(a.value))
        return LinearExpr.var(f"{node.func.id}({','.join(idx)})")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _affine_node(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, right = _affine_node(node.left), _affine_node(node.right)
        return _BINOPS[type(node.op)](left, right)
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        base, exp = _affine_node(node.left), _affine_node(node.right)
        if base.is_constant() and exp.is_constant() and exp.constant.denominator == 1:
            return LinearExpr.const(base.constant ** int(exp.constant))
        raise ExpressionError("powers are not affine")
    raise ExpressionError(f"unsupported syntax in affine expression: {ast.dump(node)}")


def parse_expr(text: str) -> LinearExpr:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from exc
    return _affine_node(tree)


def parse_relation(text: str) -> AffineRelation:
    pieces = text.split("=")
    if len(pieces) != 2 or "<" in text or ">" in text or "!" in text:
        raise ExpressionError(f"relation needs exactly one '=': {text!r}")
    return AffineRelation.equation(parse_expr(pieces[0]), parse_expr(pieces[1]))


# -- predicate evaluation --------------------------------------------------------------

_CMP: dict[type, Callable] = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
    ast.In: lambda a, b: a in b,
    ast.NotIn: lambda a, b: a not in b,
}
_ARITH: dict[type, Callable] = {
    **_BINOPS,
    ast.Div: lambda a, b: Fraction(a) / Fraction(b),
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: operator.pow,
}
_FUNCS: dict[str, Callable] = {"min": min, "max": max, "abs": abs}


def compile_predicate(text: str) -> Callable[[Mapping[str, Number]], object]:
    """Compile integer/rational arithmetic with comparisons and boolean logic.

    No attribute access, subscripts or arbitrary calls are allowed.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from exc

    def ev(node: ast.AST, env: Mapping[str, Number]):
        if isinstance(node, ast.Expression):
            return ev(node.body, env)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, bool)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ExpressionError(f"unknown name {node.id!r} in {text!r}")
            return env[node.id]
        if isinstance(node, (ast.Tuple, ast.List, ast.Set)):
            return tuple(ev(e, env) for e in node.elts)
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand, env)
            if isinstance(node.op, ast.Not):
                return not v
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.UAdd):
                return v
        if isinstance(node, ast.BinOp) and type(node.op) in _ARITH:
            return _ARITH[type(node.op)](ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.BoolOp):
            if isinstance(node.op, ast.And):
                return all(ev(v, env) for v in node.values)
            return any(ev(v, env) for v in node.values)
        if isinstance(node, ast.Compare):
            left = ev(node.left, env)
            for op, comp in zip(node.ops, node.comparators):
                right = ev(comp, env)
                if not _CMP[type(op)](left, right):
                    return False
                left = right
            return True
        if isinstance(node, ast.IfExp):
            return ev(node.body, env) if ev(node.test, env) else ev(node.orelse, env)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            return _FUNCS[node.func.id](*(ev(a, env) for a in node.args))
        raise ExpressionError(f"unsupported syntax in {text!r}: {type(node).__name__}")

    return lambda env: ev(tree, env)


def evaluate(text: str, env: Mapping[str, Number] | None = None):
    return compile_predicate(text)(env or {})


def as_fraction(value: object) -> Fraction:
    """Parse ``7/2``-style strings (and ints) into exact rationals."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(str(value).replace(" ", ""))


def format_fraction(q: Fraction) -> str:
    return _fmt_num(Fraction(q))


def collect_variables(relations: Iterable[AffineRelation]) -> list[str]:
    seen: dict[str, None] = {}
    for r in relations:
        for v in r.variables:
            seen.setdefault(v, None)
    return list(seen)
