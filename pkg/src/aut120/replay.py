"""Scripted replay of the exclusion arguments.

Pipelines live in ``data/pipelines.yaml`` as ordered steps. Each step names an action,
its arguments and the values it must reproduce (``expect``); the step is VERIFIED when
the engine reproduces them exactly, CITED when it only records an external fact, and
FAILED otherwise.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Callable, Mapping

import yaml

from . import __version__
from .affine import AffineRelation, ExpressionError, as_fraction, evaluate, format_fraction
from .feasibility import (
    EnumeratorScenario,
    Feasible,
    Implication,
    Infeasible,
    InconsistentSystemError,
    LinearSystem,
    assemble_system,
    check_certificate,
    enumerate_cases,
    forced_congruence,
    implies,
    integer_feasible,
    propagate_bounds,
)
from .groups import (
    FactTable,
    FixTable,
    PrimePowerSignature,
    Screen,
    cfl_t,
    composite_structures,
    normalizer_primes,
    order_screen,
    p_square_check,
    prime_support,
    simple_factor_screen,
    sylow_candidates,
)
from .projection import (
    ALLOWED_TYPES_120,
    PRIME_TYPES_120,
    CompositeType,
    dump_scenario,
    extremal_distance,
    parse_prime_type,
    preset,
    project,
    projected_distance_bounds,
    validate_prime_type,
)
from .transforms import power_moment_system

KINDS = ("ArithmeticCheck", "RelationImplied", "FiniteEnumeration", "CitedFact")
VERIFIED, CITED, FAILED = "VERIFIED", "CITED", "FAILED"


class PipelineError(ValueError):
    """Malformed pipeline data or an unknown pipeline id (an input error, not a failed claim)."""


@dataclass(frozen=True)
class ReplayStep:
    kind: str
    description: str
    citation: str
    status: str
    payload: dict

    def record(self) -> dict:
        return {
            "kind": self.kind,
            "description": self.description,
            "citation": self.citation,
            "status": self.status,
            "payload": self.payload,
        }


@dataclass(frozen=True)
class Report:
    pipeline: str
    title: str
    steps: tuple[ReplayStep, ...]
    timing: float
    version: str = __version__

    @property
    def verdict(self) -> str:
        return "FAILED" if any(s.status == FAILED for s in self.steps) else "PASS"

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


# -- pipeline data ----------------------------------------------------------------------------------


def load_pipelines(text: str | None = None) -> dict:
    if text is None:
        text = resources.files("aut120").joinpath("data/pipelines.yaml").read_text()
    data = yaml.safe_load(text)
    if not isinstance(data, dict) or "pipelines" not in data:
        raise PipelineError("pipeline file needs a top-level 'pipelines' mapping")
    for pid, entry in data["pipelines"].items():
        for i, step in enumerate(entry.get("steps", []), 1):
            if step.get("kind") not in KINDS:
                raise PipelineError(f"{pid} step {i}: unknown kind {step.get('kind')!r}")
            if step.get("action") not in ACTIONS:
                raise PipelineError(f"{pid} step {i}: unknown action {step.get('action')!r}")
            if (step["kind"] == "CitedFact") != (step["action"] in CITING_ACTIONS):
                raise PipelineError(f"{pid} step {i}: CitedFact steps must use a citing action and vice versa")
    return data


def pipeline_ids(data: Mapping | None = None) -> list[str]:
    data = data or load_pipelines()
    return sorted(data["pipelines"])


# -- execution context ------------------------------------------------------------------------------

_SYSTEM_CACHE: dict[str, LinearSystem] = {}
_SCREEN_CACHE: dict[tuple, Screen] = {}


@dataclass
class Context:
    data: dict
    facts: FactTable = field(default_factory=FactTable.default)
    fix: FixTable = field(default_factory=FixTable.default)
    scenario_override: Any = None
    _reports: dict = field(default_factory=dict)

    def system(self, ref: Any) -> LinearSystem:
        entry = self.data.get("systems", {}).get(ref, ref) if isinstance(ref, str) else ref
        key = json.dumps(entry, sort_keys=True)
        if self.scenario_override is not None:
            key += "|" + dump_scenario(self.scenario_override)
        if key not in _SYSTEM_CACHE:
            _SYSTEM_CACHE[key] = self._build_system(entry)
        return _SYSTEM_CACHE[key]

    def _build_system(self, entry: Mapping) -> LinearSystem:
        if "scenario" in entry:
            name = entry["scenario"]
            sc = self.scenario_override if (self.scenario_override is not None and self.scenario_override.name == name) else preset(name)
            return assemble_system(sc, fixed_point=entry.get("fixed_point", True))
        if "enumerator" in entry:
            e = entry["enumerator"]
            return assemble_system(
                EnumeratorScenario(e.get("name", "enumerator"), e["n"], e["k"], tuple(e["support"]), tuple(e.get("dual_zero", ())))
            )
        if "power_moments" in entry:
            pm = entry["power_moments"]
            rels = power_moment_system(pm["n"], pm["k"], pm["support"])
            return LinearSystem.build([(r, f"power-moment-{i}") for i, r in enumerate(rels)])
        if "combine" in entry:
            parts = [self.system(p) for p in entry["combine"]]
            out = parts[0]
            for p in parts[1:]:
                out = out + p
            return out.extended([AffineRelation.parse(t) for t in entry.get("extra", [])], "hypothesis")
        raise PipelineError(f"cannot build a system from {entry!r}")

    def screen(self, stage_fix: FixTable | None = None) -> Screen:
        fix = stage_fix or self.fix
        key = (fix, self.facts)
        if key not in _SCREEN_CACHE:
            _SCREEN_CACHE[key] = order_screen(fix, self.facts)
        return _SCREEN_CACHE[key]


# -- helpers ----------------------------------------------------------------------------------------------


def _num(v: Any) -> Any:
    """Exact values rendered for reports: integers and rationals become strings."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return format_fraction(v)
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _num(x) for k, x in v.items()}
    return v


def _domain(entry: Mapping) -> dict:
    out = {}
    for name, d in entry.items():
        if isinstance(d, Mapping):
            out[name] = list(d["values"])
        elif isinstance(d, list) and len(d) == 2 and all(isinstance(x, int) for x in d):
            out[name] = (d[0], d[1])
        else:
            raise PipelineError(f"domain entry {name}: use [lo, hi] or {{values: [...]}}")
    return out


def _same_set(got, want) -> bool:
    norm = lambda xs: sorted(tuple(x) if isinstance(x, (list, tuple)) else x for x in xs)
    return norm(got) == norm(want)


def _relation_list(texts) -> list[AffineRelation]:
    return [AffineRelation.parse(t) for t in texts]


_DIGESTS: dict[int, tuple[LinearSystem, str]] = {}


def _digest(sys: LinearSystem) -> str:
    hit = _DIGESTS.get(id(sys))
    if hit is not None and hit[0] is sys:
        return hit[1]
    h = hashlib.sha256()
    for r in sys.relations:
        h.update(repr((r.coefficients, r.constant)).encode())
    _DIGESTS[id(sys)] = (sys, h.hexdigest()[:16])
    return _DIGESTS[id(sys)][1]


# -- actions ------------------------------------------------------------------------------------------------
# Each action returns (ok, payload).


def _act_extremal_distance(ctx, args, expect):
    d = extremal_distance(args["n"])
    return d == expect["d"], {"d": d}


def _act_project(ctx, args, expect):
    t = parse_prime_type(args["type"])
    m = project(t, args["d"])
    got = {"k1": list(m.k1), "k2": list(m.k2), "length": m.length, "dim": m.dim}
    ok = all(got[k] == v for k, v in expect.items())
    return ok, got


def _act_distance_bounds(ctx, args, expect):
    lo, hi = projected_distance_bounds(parse_prime_type(args["type"]), args["d"])
    got = {"lower": lo, "upper": hi}
    return all(got[k] == v for k, v in expect.items()), got


def _act_allowed_types(ctx, args, expect):
    table = ALLOWED_TYPES_120 if args.get("table", "allowed") == "allowed" else PRIME_TYPES_120
    got = {str(p): [list(cf) for cf in table[p]] for p in args["primes"]}
    want = {str(p): v for p, v in expect["types"].items()}
    return got == want, {"types": got}


def _act_validate_type(ctx, args, expect):
    table = ALLOWED_TYPES_120 if args.get("table", "allowed") == "allowed" else PRIME_TYPES_120
    got = validate_prime_type(args["p"], args["c"], args["f"], table)
    return got == expect["valid"], {"valid": got}


def _act_check(ctx, args, expect):
    value = evaluate(args["expr"])
    if isinstance(value, bool):
        return value == expect["value"], {"expr": args["expr"], "value": value}
    got = Fraction(value)
    return got == as_fraction(expect["value"]), {"expr": args["expr"], "value": got}


def _act_enumerate(ctx, args, expect):
    cases = enumerate_cases(
        _domain(args["domain"]), args.get("where", []), args.get("let"), args.get("report")
    )
    payload: dict = {"count": len(cases), "cases": [list(c) for c in cases[:20]]}
    ok = True
    if "cases" in expect:
        ok &= _same_set(cases, expect["cases"])
    if "count" in expect:
        ok &= len(cases) == expect["count"]
    if "max" in expect:
        m = max((c[0] for c in cases), default=None)
        payload["max"] = m
        ok &= m == expect["max"]
    return ok, payload


def _act_system_shape(ctx, args, expect):
    sys = ctx.system(args["system"])
    tags: dict[str, int] = {}
    for t in sys.provenance:
        base = t.split("(")[0].split(":")[0]
        tags[base] = tags.get(base, 0) + 1
    got = {"variables": len(sys.variables), "relations": len(sys.relations), **{f"tag:{k}": v for k, v in sorted(tags.items())}}
    if "unknowns" in args:
        got["unknowns"] = sum(1 for v in sys.variables if v in set(args["unknowns"]))
    ok = all(got.get(k) == v for k, v in expect.items())
    return ok, got


def _act_implies(ctx, args, expect):
    sys = ctx.system(args["system"])
    target = AffineRelation.parse(expect["relation"])
    try:
        res = implies(sys, target, args.get("prefer_free", ()))
    except InconsistentSystemError as exc:
        return False, {"relation": target.to_string(), "error": "system is inconsistent", "certificate": exc.verdict.certificate.kind}
    payload: dict = {"relation": target.to_string(), "system": _digest(sys), "system_size": len(sys.relations)}
    if isinstance(res, Implication):
        checked = res.check(sys)
        payload["proof"] = {
            "multipliers": [[str(i), format_fraction(m)] for i, m in res.multipliers],
            "substitution_relations": str(len(res.substitutions)),
            "rechecked": checked,
        }
        return checked, payload
    payload["refutation"] = {
        "reduced_lhs": str(res.derived) if res.derived is not None else None,
        "point": {v: format_fraction(res.point.get(v, Fraction(0))) for v in target.variables},
        "rechecked": res.check(sys),
    }
    return False, payload


def _act_integer_feasible(ctx, args, expect):
    rels = _relation_list(args["relations"])
    verdict = integer_feasible(rels)
    payload: dict = {"verdict": verdict.kind}
    ok = verdict.kind == expect["verdict"]
    if isinstance(verdict, Infeasible):
        cert = verdict.certificate
        checked = check_certificate(cert, rels)
        payload["certificate"] = {"kind": cert.kind, "detail": cert.detail, "steps": str(len(cert.trail)), "rechecked": checked}
        if cert.var:
            payload["certificate"]["var"] = cert.var
        ok &= checked
        if "certificate" in expect:
            ok &= cert.kind == expect["certificate"]
        if "var" in expect:
            ok &= cert.var == expect["var"]
    elif isinstance(verdict, Feasible):
        payload["witness"] = {k: v for k, v in sorted(verdict.witness.items())}
    else:
        payload["reason"] = verdict.reason
    return ok, payload


def _act_bound(ctx, args, expect):
    rels = _relation_list(args["relations"])
    bounds, trail, conflict = propagate_bounds(rels)
    if conflict is not None:
        return False, {"error": "bounds are contradictory", "var": conflict.var}
    lo, hi = bounds[args["var"]]
    payload = {"var": args["var"], "lo": lo, "hi": hi}
    ok = True
    if "lo" in expect:
        ok &= lo == expect["lo"]
    if "lo_at_least" in expect:
        ok &= lo >= expect["lo_at_least"]
    if "hi" in expect:
        ok &= hi is not None and hi == expect["hi"]
    return ok, payload


def _act_congruence(ctx, args, expect):
    res = forced_congruence(AffineRelation.parse(args["relation"]), args["var"])
    if res is None:
        return False, {"error": "no integer solution"}
    r, m = res
    return (r, m) == (expect["residue"], expect["modulus"]), {"residue": r, "modulus": m}


def _act_composite_structures(ctx, args, expect):
    got = [str(t) for t in composite_structures()]
    return _same_set(got, expect["types"]), {"types": got}


def _act_power_map(ctx, args, expect):
    t = CompositeType(args["p"], args["r"], args["s1"], args["s2"], args["s3"], args["f"])
    got = str(t.power(args["exponent"]))
    return got == expect["type"], {"type": str(t), "power": got}


def _act_p_square_check(ctx, args, expect):
    checks = p_square_check()
    got = [c.p for c in checks if c.verified]
    return got == expect["verified"], {"verified": got, "failed": [c.p for c in checks if not c.verified]}


def _act_normalizer_primes(ctx, args, expect):
    got = sorted(normalizer_primes(args["p"], ctx.fix, ctx.facts))
    return got == sorted(expect["primes"]), {"p": args["p"], "primes": got}


def _act_sylow_candidates(ctx, args, expect):
    got = sorted(sylow_candidates(args["p"], fix=ctx.fix, facts=ctx.facts))
    ok = got == sorted(expect["values"])
    return ok, {"p": args["p"], "values": got, "all_congruent": all(v % args["p"] == 1 for v in got)}


def _act_cfl_t(ctx, args, expect):
    nps = {int(p): n for p, n in args["nps"].items()}
    t = cfl_t(PrimePowerSignature.of(args["order"]), nps, ctx.fix)
    return t == as_fraction(expect["t"]), {"order": args["order"], "t": t}


def _select(orders: list[int], sel: Mapping) -> list[int]:
    out = orders
    if "divisible_by" in sel:
        out = [o for o in out if o % sel["divisible_by"] == 0]
    if "primes_within" in sel:
        allowed = set(sel["primes_within"])
        out = [o for o in out if prime_support(o) <= allowed]
    return out


def _act_order_screen(ctx, args, expect):
    fix = FixTable.default(24) if args.get("involutions") == "with-fixed-points" else None
    screen = ctx.screen(fix)
    pool = screen.arithmetic_orders if args.get("stage") == "arithmetic" else screen.orders
    orders = _select(pool, args.get("select", {}))
    payload: dict = {"orders": orders}
    ok = True
    if "orders" in expect:
        ok &= orders == sorted(expect["orders"])
    if "subset_of" in expect:
        extra = sorted(set(orders) - set(expect["subset_of"]))
        payload["outside"] = extra
        ok &= not extra
    if "max" in expect:
        payload["max"] = max(orders)
        ok &= max(orders) == expect["max"]
    if "max_at_most" in expect:
        payload["max"] = max(orders)
        ok &= max(orders) <= expect["max_at_most"]
    if "tuples" in expect:
        primes = args["tuple_primes"]
        tuples = sorted(tuple(PrimePowerSignature.of(o).exponent(q) for q in primes) for o in orders)
        payload["tuples"] = [list(t) for t in tuples]
        ok &= _same_set(tuples, expect["tuples"])
    rejected = [r for r in screen.log if r.signature.order in set(args.get("explain", []))]
    if rejected:
        payload["rejections"] = [f"{r.signature.order}: {r.rule}: {r.detail}" for r in rejected]
    return ok, payload


def _act_simple_screen(ctx, args, expect):
    max_order = args["max_order"]
    if max_order == "arithmetic-screen":
        max_order = max(ctx.screen().arithmetic_orders)
    divides = args.get("divides")
    orders = None
    if divides == "arithmetic":
        orders = ctx.screen().arithmetic_orders
    elif divides == "final":
        orders = ctx.screen().orders
    elif divides is not None:
        raise PipelineError(f"divides must be 'arithmetic' or 'final', not {divides!r}")
    rows = simple_factor_screen(max_order, args.get("support", (2, 3, 5, 7, 19, 23, 29)), args.get("square_free_odd", True), orders)
    got = [g.name for g in rows]
    payload = {"max_order": max_order, "groups": got}
    if orders is not None:
        payload["witnesses"] = {g.name: [o for o in orders if o % g.order == 0] for g in rows}
    return got == expect["groups"], payload


def _act_cited(ctx, args, expect):
    return True, {"statement": args["statement"]}


def _act_fact_present(ctx, args, expect):
    want = (args["fact"], tuple(str(a) for a in args["args"]))
    present = any((f.kind, f.args) == want for f in ctx.facts.facts)
    return present, {"fact": " ".join([want[0], *want[1]]), "present": present}


ACTIONS: dict[str, Callable] = {
    "extremal_distance": _act_extremal_distance,
    "project": _act_project,
    "distance_bounds": _act_distance_bounds,
    "allowed_types": _act_allowed_types,
    "validate_type": _act_validate_type,
    "check": _act_check,
    "enumerate": _act_enumerate,
    "system_shape": _act_system_shape,
    "implies": _act_implies,
    "integer_feasible": _act_integer_feasible,
    "bound": _act_bound,
    "congruence": _act_congruence,
    "composite_structures": _act_composite_structures,
    "power_map": _act_power_map,
    "p_square_check": _act_p_square_check,
    "normalizer_primes": _act_normalizer_primes,
    "sylow_candidates": _act_sylow_candidates,
    "cfl_t": _act_cfl_t,
    "order_screen": _act_order_screen,
    "simple_screen": _act_simple_screen,
    "cited": _act_cited,
    "fact_present": _act_fact_present,
}
CITING_ACTIONS = frozenset({"cited", "fact_present"})


def run_step(ctx: Context, step: Mapping) -> ReplayStep:
    action = ACTIONS[step["action"]]
    args, expect = step.get("args", {}) or {}, step.get("expect", {}) or {}
    try:
        ok, payload = action(ctx, args, expect)
    except PipelineError:
        raise
    except (ValueError, KeyError, ExpressionError, TypeError) as exc:
        ok, payload = False, {"error": f"{type(exc).__name__}: {exc}"}
    if step["kind"] == "CitedFact":
        status = CITED if ok else FAILED
    else:
        status = VERIFIED if ok else FAILED
    if expect:
        payload = {**payload, "expected": expect}
    if step.get("reconstruction"):
        payload = {**payload, "reconstruction": True}
    return ReplayStep(step["kind"], step["description"], step.get("citation", ""), status, _num(payload))


def replay(pipeline_id: str, ctx: Context | None = None) -> Report:
    ctx = ctx or Context(load_pipelines())
    pipelines = ctx.data["pipelines"]
    if pipeline_id not in pipelines:
        raise PipelineError(f"unknown pipeline {pipeline_id!r}; known: {', '.join(sorted(pipelines))}")
    if pipeline_id in ctx._reports:
        return ctx._reports[pipeline_id]
    entry = pipelines[pipeline_id]
    start = time.perf_counter()
    steps = tuple(run_step(ctx, s) for s in entry["steps"])
    rep = Report(pipeline_id, entry.get("title", ""), steps, time.perf_counter() - start)
    ctx._reports[pipeline_id] = rep
    return rep


def run_all(ctx: Context | None = None) -> list[Report]:
    ctx = ctx or Context(load_pipelines())
    return [replay(pid, ctx) for pid in pipeline_ids(ctx.data)]


# -- rendering ----------------------------------------------------------------------------------------------------


def _summary(payload: Mapping) -> str:
    keep = {k: v for k, v in payload.items() if k not in ("expected", "proof", "cases") or k == "cases"}
    parts = []
    for k, v in keep.items():
        text = json.dumps(v, sort_keys=True) if not isinstance(v, str) else v
        if len(text) > 160:
            text = text[:157] + "..."
        parts.append(f"{k}={text}")
    return "; ".join(parts)


def render_text(reports: list[Report], timing: bool = False) -> str:
    lines = []
    for rep in reports:
        head = f"== {rep.pipeline}: {rep.verdict}"
        if rep.title:
            head += f"  ({rep.title})"
        if timing:
            head += f"  [{rep.timing:.2f}s]"
        lines.append(head)
        for i, s in enumerate(rep.steps, 1):
            flag = " [reconstruction]" if s.payload.get("reconstruction") else ""
            lines.append(f"  {i:2d}. {s.status:<8} {s.kind:<17} {s.description}{flag}")
            if s.citation:
                lines.append(f"        cite: {s.citation}")
            detail = _summary(s.payload)
            if detail:
                lines.append(f"        {detail}")
    total = len(reports)
    passed = sum(r.passed for r in reports)
    lines.append(f"-- {passed}/{total} pipelines PASS (engine {__version__})")
    return "\n".join(lines) + "\n"


def render_machine(reports: list[Report], timing: bool = False) -> str:
    lines = []
    for rep in reports:
        for i, s in enumerate(rep.steps, 1):
            rec = {"pipeline": rep.pipeline, "step": str(i), **s.record()}
            lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
        verdict = {"pipeline": rep.pipeline, "record": "verdict", "verdict": rep.verdict, "engine": rep.version}
        if timing:
            verdict["seconds"] = f"{rep.timing:.3f}"
        lines.append(json.dumps(verdict, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + "\n"
