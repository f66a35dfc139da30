from fractions import Fraction

import pytest
from hypothesis import strategies as st

from famlab.boolalg import Element, MeasuredAlgebra


def F(x, y=1):
    return Fraction(x, y)


@pytest.fixture
def four_uniform():
    return MeasuredAlgebra.uniform(4)


@pytest.fixture
def four_skewed():
    return MeasuredAlgebra([F(1, 2), F(1, 4), F(1, 8), F(1, 8)])


@st.composite
def algebras(draw, max_atoms=8):
    n = draw(st.integers(1, max_atoms))
    raw = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    total = sum(raw)
    return MeasuredAlgebra([Fraction(x, total) for x in raw])


@st.composite
def elements(draw, size, nonzero=False):
    low = 1 if nonzero else 0
    return Element(size, draw(st.integers(low, (1 << size) - 1)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
