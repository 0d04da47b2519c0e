"""The 3-(38;6) split system pins the first-block count A_8 on its own.

Zero rules, symmetry and the marginal links, joined to the [38,16] enumerator, leave
no freedom in A_8. With A_8 = 44 + 4*beta this gives a negative beta, which closes the
case without the weight-12 comparison.
"""

from __future__ import annotations

from aut120.affine import AffineRelation
from aut120.feasibility import implies, integer_feasible
from aut120.replay import Context, load_pipelines


def main() -> None:
    ctx = Context(load_pipelines())
    system = ctx.system("marginal-38-6")
    print(f"system: {len(system.relations)} relations in {len(system.variables)} unknowns")
    for value in range(0, 61):
        res = implies(system, AffineRelation.parse(f"A_8 = {value}"), ["A_8"])
        if res.holds:
            print(f"A_8 = {value} is implied; multipliers on {len(res.multipliers)} relations, rechecked: {res.check(system)}")
            beta = AffineRelation.parse(f"{value} - 4*beta = 44").solved_for("beta")
            print(f"so beta = {beta}")
            break
    else:
        print("A_8 is not pinned to a value in [0, 60]")
    verdict = integer_feasible([AffineRelation.parse("A_8 = 20"), AffineRelation.parse("A_8 - 4*beta = 44")])
    print(f"with beta >= 0: {verdict.kind}")


if __name__ == "__main__":
    main()
