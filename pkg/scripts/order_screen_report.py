"""Walk the group-order screen stage by stage and show why each order drops out."""

from __future__ import annotations

import argparse
from collections import Counter

from aut120.groups import FactTable, FixTable, order_screen, simple_factor_screen


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixed-involutions", action="store_true", help="involutions fix 24 points")
    ap.add_argument("--drop-fact", action="append", default=[], metavar="ORDER",
                    help="remove the forbid_element_order fact for ORDER (repeatable)")
    args = ap.parse_args()

    facts = FactTable.default().without(lambda f: f.kind == "forbid_element_order" and f.args[0] in args.drop_fact)
    screen = order_screen(FixTable.default(24 if args.fixed_involutions else 0), facts)
    arith, final = screen.arithmetic_orders, screen.orders
    print(f"arithmetic survivors ({len(arith)}): {arith}")
    print(f"after the fact table ({len(final)}): {final}")
    print(f"largest order: {screen.max_order()}")

    print("\nrejections by rule:")
    for rule, n in sorted(Counter(r.rule for r in screen.log).items()):
        print(f"  {rule:<12} {n}")
    print("\norders removed by facts:")
    for o in sorted(set(arith) - set(final)):
        for r in screen.rejected(o):
            print(f"  {o:>5}  {r.rule}: {r.detail}")

    for label, pool in (("arithmetic", arith), ("final", final)):
        rows = simple_factor_screen(max(arith), orders=pool)
        print(f"\nsimple factors dividing a {label} order: {', '.join(g.name for g in rows)}")


if __name__ == "__main__":
    main()
