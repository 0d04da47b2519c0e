from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from aut120.affine import AffineRelation, parse_relation
from aut120.feasibility import (
    DomainTooLargeError,
    EnumeratorScenario,
    Feasible,
    InconsistentSystemError,
    Infeasible,
    LinearSystem,
    Unknown,
    assemble_system,
    check_certificate,
    enumerate_cases,
    forced_congruence,
    implies,
    integer_feasible,
    solve_parametric,
)
from aut120.projection import preset


def system(*texts: str) -> LinearSystem:
    return LinearSystem.build((parse_relation(t), "test") for t in texts)


def random_system(rng: random.Random, nvars: int, nrels: int):
    """Relations built around a known integer solution."""
    names = [f"x_{i}" for i in range(nvars)]
    sol = {v: rng.randint(0, 9) for v in names}
    rels = []
    for _ in range(nrels):
        coeffs = {v: rng.randint(-4, 4) for v in rng.sample(names, rng.randint(1, nvars))}
        rels.append(AffineRelation.build(coeffs, sum(c * sol[v] for v, c in coeffs.items())))
    return rels, sol


def test_implication_with_multipliers():
    sys = system("x + y = 3", "x - y = 1")
    proof = implies(sys, parse_relation("x = 2"))
    assert proof.holds and proof.check(sys)
    assert implies(sys, parse_relation("2*x + 2*y = 6")).holds


def test_refutation_gives_a_witness_point():
    sys = system("x + y + z = 3")
    ref = implies(sys, parse_relation("x = 1"))
    assert not ref.holds and ref.check(sys)
    assert sys.satisfied_by(ref.point)


def test_inconsistent_system():
    with pytest.raises(InconsistentSystemError):
        implies(system("x + y = 1", "x + y = 2"), parse_relation("x = 0"))


def test_parametric_solution_in_preferred_free_variables():
    sys = system("a + b + c = 10", "a - c = 2")
    forms = {r.variables[0]: r for r in solve_parametric(sys, prefer_free=["c"])}
    assert forms["a"].same_as(parse_relation("a - c = 2"))
    assert forms["b"].same_as(parse_relation("b + 2*c = 8"))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_solver_never_refutes_a_true_relation(seed):
    rng = random.Random(seed)
    rels, sol = random_system(rng, rng.randint(2, 6), rng.randint(1, 6))
    sys = LinearSystem.build((r, "rand") for r in rels)
    for r in rels:
        res = implies(sys, r)
        assert res.holds and res.check(sys)
    # a relation violated by a known solution can never be implied
    probe = AffineRelation.build({v: 1 for v in sol}, sum(sol.values()) + 1)
    res = implies(sys, probe)
    assert not res.holds and res.check(sys)
    assert not isinstance(integer_feasible(rels), Infeasible)


def test_negative_forced_certificate():
    rels = [parse_relation(t) for t in ("x + y = 2", "y - x = 5")]
    verdict = integer_feasible(rels)
    assert isinstance(verdict, Infeasible)
    assert verdict.certificate.kind == "NegativeForced"
    assert check_certificate(verdict.certificate, rels)


def test_non_integral_forced_value():
    rels = [parse_relation("4*x = 34")]
    verdict = integer_feasible(rels)
    assert isinstance(verdict, Infeasible) and check_certificate(verdict.certificate, rels)


def test_box_exhaustion_and_feasible_witness():
    rels = [parse_relation(t) for t in ("x + y = 3", "2*x + 4*y = 7")]
    verdict = integer_feasible(rels)
    assert isinstance(verdict, Infeasible) and check_certificate(verdict.certificate, rels)
    good = integer_feasible([parse_relation("x + y = 3"), parse_relation("x - y = 1")])
    assert isinstance(good, Feasible) and good.witness == {"x": 2, "y": 1}
    assert isinstance(integer_feasible([parse_relation("x - y = 1")]), Unknown)


def test_tampered_certificate_is_rejected():
    rels = [parse_relation(t) for t in ("x + y = 2", "y - x = 5")]
    cert = integer_feasible(rels).certificate
    loose = [parse_relation("x + y = 20"), parse_relation("y - x = 5")]
    assert not check_certificate(cert, loose)


def test_forced_congruence():
    assert forced_congruence(parse_relation("B_2/4 + A_8 = 5"), "B_2") == (0, 4)
    assert forced_congruence(parse_relation("2*x + 4*y = 7"), "x") is None


def test_enumerate_cases():
    hits = enumerate_cases({"a": (0, 5), "b": [1, 2, 3]}, ["a + b == 4", "a % 2 == 1"])
    assert hits == [(1, 3), (3, 1)]
    sums = enumerate_cases({"a": (0, 3)}, ["s > 4"], let={"s": "a * a"}, report=["s"])
    assert sums == [(9,)]
    with pytest.raises(DomainTooLargeError):
        enumerate_cases({"a": (0, 10**4), "b": (0, 10**4)}, [], limit=1000)


def test_enumerator_system_shape():
    s = EnumeratorScenario("hamming", 8, 4, (0, 4, 8), (1, 2, 3))
    sys = assemble_system(s)
    # with A_0 = 1 and B_0 = 1 pinned, the [8,4] doubly-even enumerator is determined
    proof = implies(sys, parse_relation("A_4 = 14"))
    assert proof.holds


def test_split_system_has_tagged_relations():
    sys = assemble_system(preset("3-36-12"))
    tags = {t.split("(")[0].split(":")[0] for t in sys.provenance}
    assert {"split-macwilliams", "normalization", "symmetry"} <= tags
    assert all(sys.relations)
