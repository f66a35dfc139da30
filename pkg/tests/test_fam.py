from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famlab.errors import IllegalRegionError, UnsupportedSetError
from famlab.fam import (
    IndexPartition,
    PeriodicFAM,
    PeriodicSet,
    PeriodicSimpleFunction,
    approximation_errors,
    integrate,
    partition_decompose,
    uniform_approx_select,
    xi,
)

from conftest import F


def test_xi_examples():
    fam = PeriodicFAM.uniform(4)
    assert xi(fam, PeriodicSet.full()) == 1
    cls = PeriodicSet.classes(4, {1})
    assert xi(fam, cls) == F(1, 4)
    assert xi(fam, cls | {17}) == F(1, 4)
    assert xi(fam, cls | {16}) == F(1, 4)


def test_finite_sets_are_null():
    fam = PeriodicFAM(3, (F(1, 2), F(1, 3), F(1, 6)))
    assert xi(fam, {0, 1, 2, 3, 1000}) == 0
    assert xi(fam, PeriodicSet.full() - {5, 6}) == 1


def test_unsupported_set():
    with pytest.raises(UnsupportedSetError):
        xi(PeriodicFAM.uniform(2), "evens")
    with pytest.raises(UnsupportedSetError):
        PeriodicSimpleFunction.indicator(PeriodicSet.classes(2, {0}) | {1})


def test_integrate_examples():
    fam = PeriodicFAM.uniform(4)
    E = PeriodicSet.classes(4, {0, 3})
    assert integrate(PeriodicSimpleFunction.indicator(E), fam) == xi(fam, E) == F(1, 2)
    assert integrate(PeriodicSimpleFunction.constant(F(2, 7)), fam) == F(2, 7)
    f = PeriodicSimpleFunction(4, (0, F(1, 2), 1, F(1, 2)))
    assert integrate(f, fam) == F(1, 2)


def test_integrate_over_subset():
    fam = PeriodicFAM.uniform(4)
    f = PeriodicSimpleFunction(4, (0, F(1, 2), 1, F(1, 2)))
    assert integrate(f, fam, PeriodicSet.classes(2, {0})) == F(1, 4)
    # a finite change of the region does not matter
    assert integrate(f, fam, PeriodicSet.classes(2, {0}) | {1, 3}) == F(1, 4)


def test_partition_examples():
    fam = PeriodicFAM.uniform(3)
    f = PeriodicSimpleFunction(3, (F(1, 3), 1, 0))
    assert partition_decompose(f, fam, IndexPartition.trivial()) == [integrate(f, fam)]
    two = IndexPartition(3, ({0}, {1, 2}))
    ind = PeriodicSimpleFunction.indicator(two.block_set(0))
    assert partition_decompose(ind, fam, two) == [xi(fam, two.block_set(0)), 0]
    assert partition_decompose(PeriodicSimpleFunction.constant(1), fam, two) == [F(1, 3), F(2, 3)]
    assert two.masses(fam) == [F(1, 3), F(2, 3)]


def test_partition_validation():
    with pytest.raises(ValueError):
        IndexPartition(3, ({0}, {1}))
    with pytest.raises(ValueError):
        IndexPartition(2, ({0, 1}, {1}))


def test_fam_validation():
    with pytest.raises(ValueError):
        PeriodicFAM(2, (F(1, 2), F(1, 3)))
    with pytest.raises(ValueError):
        PeriodicFAM(2, (F(3, 2), F(-1, 2)))


def test_function_bounds():
    with pytest.raises(ValueError):
        PeriodicSimpleFunction(2, (0, 2))
    assert PeriodicSimpleFunction(2, (0, 2), None).bounds == (0, 2)


def test_select_fresh_period():
    fam = PeriodicFAM.uniform(1)
    f = PeriodicSimpleFunction(4, (0, F(1, 3), 1, F(2, 3)))
    u = uniform_approx_select([f], fam, PeriodicSet.full(), F=range(10), eps=F(1, 100))
    assert u == [12, 13, 14, 15]
    assert sum(f(k) for k in u) / len(u) == integrate(f, fam)


def test_select_constant_function():
    fam = PeriodicFAM.uniform(3)
    c = PeriodicSimpleFunction.constant(F(5, 9))
    u = uniform_approx_select([c], fam, PeriodicSet.classes(3, {2}), F={4, 40})
    assert u and all(k > 40 and k % 3 == 2 for k in u)
    assert approximation_errors([c], fam, PeriodicSet.classes(3, {2}), u) == [0]


def test_select_weighted_residues():
    fam = PeriodicFAM(4, (F(1, 2), F(1, 2), 0, 0))
    f = PeriodicSimpleFunction(4, (F(1, 5), F(3, 5), 1, 1))
    u = uniform_approx_select([f], fam, PeriodicSet.full(), F={7})
    assert sorted(k % 4 for k in u) == [0, 1]
    assert min(u) > 7
    assert approximation_errors([f], fam, PeriodicSet.full(), u) == [0]


def test_select_null_region():
    fam = PeriodicFAM(2, (1, 0))
    with pytest.raises(IllegalRegionError):
        uniform_approx_select([], fam, PeriodicSet.classes(2, {1}))


@st.composite
def fams(draw, max_period=6, den=64):
    p = draw(st.integers(1, max_period))
    raw = draw(st.lists(st.integers(0, den), min_size=p, max_size=p).filter(lambda r: sum(r) > 0))
    return PeriodicFAM(p, tuple(Fraction(x, sum(raw)) for x in raw))


@st.composite
def functions(draw, max_period=6):
    p = draw(st.integers(1, max_period))
    vals = draw(st.lists(st.fractions(0, 1, max_denominator=12), min_size=p, max_size=p))
    return PeriodicSimpleFunction(p, tuple(vals))


@settings(max_examples=200, deadline=None)
@given(fams(), functions(), functions(), st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))
def test_linearity(fam, f, g, a, b):
    assert integrate(f * a + g * b, fam) == a * integrate(f, fam) + b * integrate(g, fam)


@settings(max_examples=200, deadline=None)
@given(fams(), functions(), functions())
def test_monotonicity(fam, f, h):
    g = f + h
    assert f <= g
    assert integrate(f, fam) <= integrate(g, fam)


@settings(max_examples=200, deadline=None)
@given(fams(), functions(), st.sets(st.integers(0, 200), max_size=6))
def test_freeness_for_integrals(fam, f, extra):
    E = PeriodicSet.classes(2, {0})
    assert integrate(f, fam, E | extra) == integrate(f, fam, E)
    assert integrate(f, fam, E - extra) == integrate(f, fam, E)
    assert xi(fam, extra) == 0


@settings(max_examples=200, deadline=None)
@given(
    fams(),
    st.lists(functions(), min_size=1, max_size=3),
    st.integers(1, 6),
    st.data(),
    st.sets(st.integers(0, 60), max_size=5),
)
def test_select_postcondition(fam, fs, ep, data, F_set):
    res = data.draw(st.sets(st.integers(0, ep - 1), min_size=1))
    E = PeriodicSet.classes(ep, res)
    if xi(fam, E) == 0:
        return
    eps = data.draw(st.fractions(Fraction(1, 64), 1, max_denominator=64))
    u = uniform_approx_select(fs, fam, E, F=F_set, eps=eps)
    assert u and not set(u) & F_set
    assert all(k in E for k in u)
    for f in fs:
        avg = sum((f(k) for k in u), Fraction(0)) / len(u)
        assert abs(avg - integrate(f, fam, E) / xi(fam, E)) < eps
        assert avg == integrate(f, fam, E) / xi(fam, E)
