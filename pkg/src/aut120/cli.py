"""Command-line front end.

Exit status: 0 when every replayed step holds, 1 when some step FAILED, 2 on bad input
(unknown pipeline, unreadable or malformed files, invalid arguments).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import __version__
from .codes_gf2 import dual_basis, read_generator, weight_distribution
from .groups import FactTable, FixTable, order_screen, simple_factor_screen
from .projection import PRIME_TYPES_120, load_scenario, validate_prime_type
from .replay import Context, PipelineError, load_pipelines, render_machine, render_text, replay, run_all
from .textfmt import FormatError
from .transforms import NonIntegralTransformError, krawtchouk, macwilliams

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2

# Pipelines that exclude a listed prime cycle type.
EXCLUSIONS = {
    (3, 32, 24): "lemma-3.1",
    (3, 34, 18): "lemma-3.2",
    (3, 36, 12): "lemma-3.3",
    (3, 38, 6): "lemma-3.4",
}


class InputError(Exception):
    pass


def _line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _context(args: argparse.Namespace) -> Context:
    facts = FactTable.load(args.facts) if args.facts else FactTable.default()
    override = load_scenario(args.scenario) if getattr(args, "scenario", None) else None
    return Context(load_pipelines(), facts=facts, scenario_override=override)


def _emit_reports(reports, args) -> int:
    render = render_machine if args.format == "machine" else render_text
    sys.stdout.write(render(reports, timing=args.timing))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_replay(args) -> int:
    ctx = _context(args)
    return _emit_reports([replay(args.pipeline, ctx)], args)


def cmd_run_all(args) -> int:
    return _emit_reports(run_all(_context(args)), args)


def cmd_krawtchouk(args) -> int:
    value = krawtchouk(args.k, args.x, args.n)
    if args.format == "machine":
        print(_line({"k": str(args.k), "x": str(args.x), "n": str(args.n), "value": str(value)}))
    else:
        print(value)
    return EXIT_OK


def cmd_macwilliams(args) -> int:
    code = read_generator(args.file)
    w = weight_distribution(code)
    dual = macwilliams(w, code.n, code.k)
    brute = weight_distribution(dual_basis(code))
    agree = dual.counts == brute.counts
    if args.format == "machine":
        for j, a in enumerate(dual.counts):
            if a:
                print(_line({"weight": str(j), "dual_count": str(a)}))
        print(_line({"record": "summary", "n": str(code.n), "k": str(code.k), "matches_brute_force": agree}))
    else:
        print(f"[{code.n},{code.k}] code")
        print("weight  count  dual")
        for j in range(code.n + 1):
            a, b = w.counts[j], dual.counts[j]
            if a or b:
                print(f"{j:6d}  {a:5d}  {b}")
        print(f"dual distribution matches brute-force dual: {'yes' if agree else 'NO'}")
    return EXIT_OK if agree else EXIT_FAILED


def cmd_exclude(args) -> int:
    key = (args.p, args.c, args.f)
    if args.p * args.c + args.f != 120:
        raise InputError(f"{args.p}-({args.c};{args.f}) does not act on 120 coordinates")
    if not validate_prime_type(args.p, args.c, args.f, PRIME_TYPES_120):
        msg = f"{args.p}-({args.c};{args.f}): excluded, not a listed prime cycle type"
        print(_line({"type": f"{args.p}-({args.c};{args.f})", "excluded": True, "reason": "not listed"}) if args.format == "machine" else msg)
        return EXIT_OK
    pid = EXCLUSIONS.get(key)
    if pid is None:
        msg = f"{args.p}-({args.c};{args.f}): listed type, no exclusion pipeline applies"
        print(_line({"type": f"{args.p}-({args.c};{args.f})", "excluded": False}) if args.format == "machine" else msg)
        return EXIT_OK
    return _emit_reports([replay(pid, _context(args))], args)


def cmd_orders(args) -> int:
    fix = FixTable.default(24 if args.no_fpf else 0)
    facts = FactTable.load(args.facts) if args.facts else FactTable.default()
    screen = order_screen(fix, facts)
    if args.format == "machine":
        for sig in sorted(screen.survivors, key=lambda s: s.order):
            print(_line({"order": str(sig.order), "signature": str(sig)}))
        for r in screen.log:
            print(_line({"rejected": str(r.signature.order), "rule": r.rule, "detail": r.detail, "citation": r.citation}))
        print(_line({"record": "summary", "survivors": str(len(screen.orders)), "max": str(screen.max_order())}))
    else:
        print(f"involutions: {'fixed-point-free' if fix.fpf_involutions else f'{fix[2]} fixed points'}")
        print(f"after Sylow counting: {len(screen.arithmetic_orders)} orders, max {max(screen.arithmetic_orders)}")
        print(f"after facts: {len(screen.orders)} orders, max {screen.max_order()}")
        print("orders: " + " ".join(str(o) for o in screen.orders))
        if args.explain:
            for r in screen.log:
                print(f"  {r.signature.order}: {r.rule}: {r.detail}")
    return EXIT_OK


def cmd_simple_screen(args) -> int:
    max_order = args.max_order
    orders = None
    if max_order is None or args.divides:
        facts = FactTable.load(args.facts) if args.facts else FactTable.default()
        screen = order_screen(FixTable.default(), facts)
        if max_order is None:
            max_order = max(screen.arithmetic_orders)
        if args.divides:
            orders = screen.arithmetic_orders if args.divides == "arithmetic" else screen.orders
    rows = simple_factor_screen(max_order, orders=orders)
    if args.format == "machine":
        for g in rows:
            print(_line({"group": g.name, "order": str(g.order)}))
        print(_line({"record": "summary", "max_order": str(max_order), "divides": args.divides or "any"}))
    else:
        scope = f", dividing a {args.divides}-stage order" if args.divides else ""
        print(f"simple groups of order <= {max_order} with admissible order{scope}: " + ", ".join(g.name for g in rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--facts", metavar="FILE", help="fact table replacing the built-in one")
    timed = argparse.ArgumentParser(add_help=False)
    timed.add_argument("--timing", action="store_true", help="include wall-clock timings (breaks byte-identical output)")
    timed.add_argument("--scenario", metavar="FILE", help="scenario file overriding the preset of the same name")

    parser = argparse.ArgumentParser(prog="aut120", description="Exact replay of automorphism exclusions for [120,60,24] codes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", parents=[common, timed], help="replay one pipeline")
    p.add_argument("pipeline")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("run-all", parents=[common, timed], help="replay every pipeline")
    p.set_defaults(func=cmd_run_all)

    p = sub.add_parser("krawtchouk", parents=[common], help="evaluate K_k(x; n)")
    for name in ("k", "x", "n"):
        p.add_argument(name, type=int)
    p.set_defaults(func=cmd_krawtchouk)

    p = sub.add_parser("macwilliams", parents=[common], help="dual weight distribution of a generator-matrix file")
    p.add_argument("file")
    p.set_defaults(func=cmd_macwilliams)

    p = sub.add_parser("exclude", parents=[common, timed], help="check whether a prime cycle type is excluded")
    for name in ("p", "c", "f"):
        p.add_argument(name, type=int)
    p.set_defaults(func=cmd_exclude)

    p = sub.add_parser("orders", parents=[common], help="screen candidate group orders")
    p.add_argument("--no-fpf", action="store_true", help="involutions fix 24 points instead of none")
    p.add_argument("--explain", action="store_true", help="list every rejection")
    p.set_defaults(func=cmd_orders)

    p = sub.add_parser("simple-screen", parents=[common], help="candidate nonabelian simple composition factors")
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--divides", choices=("arithmetic", "final"), help="keep groups whose order divides a surviving group order")
    p.set_defaults(func=cmd_simple_screen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, PipelineError, FormatError, NonIntegralTransformError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
