from __future__ import annotations

import pytest

from aut120.projection import (
    ALLOWED_TYPES_120,
    PRIME_TYPES_120,
    CompositeType,
    PrimeType,
    dump_scenario,
    extremal_distance,
    load_scenario,
    parse_prime_type,
    preset,
    project,
    projected_distance_bounds,
    scenario,
    validate_prime_type,
)


def test_extremal_distance():
    assert [extremal_distance(n) for n in (24, 44, 48, 72, 120)] == [8, 8, 12, 16, 24]


def test_type_parsing_and_printing():
    t = parse_prime_type("3-(40;0)")
    assert t == PrimeType(3, 40, 0) and str(t) == "3-(40;0)" and t.n == 120
    assert str(CompositeType(3, 5, 0, 0, 8, 0)) == "15-(0,0,8;0)"
    assert CompositeType(3, 5, 0, 0, 8, 0).power(5) == PrimeType(3, 40, 0)
    assert CompositeType(3, 5, 0, 0, 8, 0).power(3) == PrimeType(5, 24, 0)
    with pytest.raises(ValueError):
        parse_prime_type("3-(x;0)")


def test_validation_tables():
    assert validate_prime_type(3, 38, 6, PRIME_TYPES_120)
    assert not validate_prime_type(3, 38, 6, ALLOWED_TYPES_120)
    assert validate_prime_type(3, 40, 0)
    assert all(p * c + f == 120 for p, types in PRIME_TYPES_120.items() for c, f in types)


@pytest.mark.parametrize(
    "c,f,k1,k2",
    [(32, 24, (4, 5), (0, 1)), (34, 18, (8,), (0,)), (36, 12, (12,), (0,)), (38, 6, (16,), (0,))],
)
def test_balance_principle(c, f, k1, k2):
    m = project(PrimeType(3, c, f), 24)
    assert (m.length, m.dim) == (c + f, (c + f) // 2)
    assert (m.k1, m.k2) == (k1, k2)
    for a, b in zip(m.k1, m.k2):
        assert 2 * a - c == 2 * b - f


def test_project_rejects_unlisted_type():
    with pytest.raises(ValueError):
        project(PrimeType(3, 30, 30), 24)


def test_distance_bounds():
    lo, hi = projected_distance_bounds(PrimeType(3, 34, 18), 24)
    assert lo == 8 and hi >= lo


def test_preset_zero_rules_respect_parity_and_lift():
    s = preset("3-38-6")
    assert (s.k1, s.k2) == (16, 0)
    zeros = s.zero_set()
    assert (1, 0) in zeros and (7, 1) in zeros
    assert (8, 0) not in zeros
    assert (36, 0) in zeros


def test_scenario_round_trip(tmp_path):
    s = preset("3-36-12")
    path = tmp_path / "s.scn"
    path.write_text(dump_scenario(s))
    again = load_scenario(path)
    assert again.zero_set() == s.zero_set() and again.k2 == s.k2


def test_scenario_needs_a_branch_when_ambiguous():
    m = project(PrimeType(3, 32, 24), 24)
    if len(m.k2) > 1:
        with pytest.raises(ValueError):
            scenario(PrimeType(3, 32, 24), 24)
