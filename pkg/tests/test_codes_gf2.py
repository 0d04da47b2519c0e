from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings

from aut120.codes_gf2 import (
    BitMatrix,
    DimensionTooLargeError,
    LinearCode,
    classify,
    dot,
    dual_basis,
    extended_golay,
    extended_hamming,
    read_generator,
    rref,
    weight_distribution,
    write_generator,
)
from conftest import codes


def _span(rows, n):
    out = {0}
    for r in rows:
        out |= {w ^ r for w in out}
    return out


def test_rref_identity_and_duplicates():
    eye = BitMatrix.from_strings(["10", "01"])
    m, rank = rref(eye)
    assert rank == 2 and sorted(m.rows) == sorted(eye.rows)
    m, rank = rref(BitMatrix.from_strings(["11", "11"]))
    assert rank == 1 and m.to_strings() == ["11"]
    assert rref(BitMatrix((0, 0), 3))[1] == 0


def test_rref_hamming_rank_against_span_size():
    h = BitMatrix.from_strings(["11110000", "00111100", "00001111", "01010101"])
    _, rank = rref(h)
    assert rank == 4
    assert len(_span(h.rows, 8)) == 2**rank


def test_bitmatrix_rejects_bad_shapes():
    with pytest.raises(ValueError):
        BitMatrix.from_strings(["101", "10"])
    with pytest.raises(ValueError):
        BitMatrix((8,), 3)
    with pytest.raises(ValueError):
        BitMatrix((), 0)


def test_small_duals():
    rep = LinearCode.from_rows(["11"])
    assert weight_distribution(dual_basis(rep)).as_dict() == {0: 1, 2: 1}
    c = LinearCode.from_rows(["1110"])
    assert c.contains(0b1000) is False
    assert dual_basis(c).contains(int("0001"[::-1], 2))


def test_extended_hamming_is_self_dual_and_doubly_even():
    h = extended_hamming()
    assert dual_basis(h) == h
    words = list(h.codewords())
    assert all(dot(a, b) == 0 for a, b in itertools.combinations(words, 2))
    assert weight_distribution(h).as_dict() == {0: 1, 4: 14, 8: 1}
    cl = classify(h)
    assert (cl.self_dual, cl.doubly_even, cl.min_distance) == (True, True, 4)


def test_golay_distribution():
    g = extended_golay()
    assert (g.n, g.k) == (24, 12)
    assert weight_distribution(g).as_dict() == {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}
    assert classify(g).self_dual


def test_classify_small_cases():
    cl = classify(LinearCode.from_rows(["11"]))
    assert (cl.self_dual, cl.doubly_even, cl.min_distance) == (True, False, 2)
    cl = classify(LinearCode.from_rows(["1111"]))
    assert cl.self_orthogonal and not cl.self_dual and cl.doubly_even and cl.min_distance == 4


def test_full_space_distribution():
    full = LinearCode.from_rows(["100", "010", "001"])
    assert weight_distribution(full).counts == (1, 3, 3, 1)


def test_enumeration_guard():
    big = LinearCode(BitMatrix(tuple(1 << i for i in range(29)), 29))
    with pytest.raises(DimensionTooLargeError):
        weight_distribution(big)


def test_generator_file_round_trip(tmp_path):
    path = tmp_path / "h8.txt"
    write_generator(extended_hamming(), path)
    assert read_generator(path) == extended_hamming()
    (tmp_path / "bad.txt").write_text("4 1\n1 11\n")
    with pytest.raises(ValueError):
        read_generator(tmp_path / "bad.txt")


@settings(max_examples=60, deadline=None)
@given(codes())
def test_rank_nullity_and_double_dual(c):
    d = dual_basis(c)
    assert d.k == c.n - c.k
    assert all(dot(a, b) == 0 for a in c.generator.rows for b in d.generator.rows)
    assert dual_basis(d) == c


@settings(max_examples=60, deadline=None)
@given(codes())
def test_distribution_sums_to_code_size(c):
    w = weight_distribution(c)
    assert w.total() == 2**c.k
    assert w[0] == 1
