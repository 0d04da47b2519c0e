from __future__ import annotations

import random
import sys

import pytest
from hypothesis import strategies as st

from aut120.codes_gf2 import BitMatrix, LinearCode


def random_code(rng: random.Random, n: int, k: int) -> LinearCode:
    rows = tuple(rng.getrandbits(n) for _ in range(k))
    return LinearCode(BitMatrix(rows, n))


@st.composite
def codes(draw, max_n: int = 12, max_k: int = 8) -> LinearCode:
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(0, min(n, max_k)))
    rows = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=k, max_size=k))
    return LinearCode(BitMatrix(tuple(rows), n))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
