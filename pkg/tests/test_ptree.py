import csv
import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famlab.errors import NotMaterializedError, StructureError
from famlab.ptree import (
    LevelRV,
    ProbTree,
    binomial_distribution,
    binomial_tree,
    chebyshev_audit,
    expectation,
    level_measure,
    moments,
    random_tree,
    relative_expectation,
    tower_check,
)

from conftest import F


def thirds_tree():
    table = {(): {0: F(1, 3), 1: F(2, 3)}}
    for a in (0, 1):
        table[(a,)] = {0: F(1, 4), 1: F(3, 4)}
    return ProbTree.from_table(table, 2)


def test_root_level():
    assert level_measure(ProbTree.uniform(2, 3), 0) == {(): 1}


def test_uniform_binary_levels():
    lm = level_measure(ProbTree.uniform(2, 3), 3)
    assert len(lm) == 8 and set(lm.values()) == {F(1, 8)}


def test_product_identity():
    t = thirds_tree()
    assert level_measure(t, 2)[(0, 0)] == F(1, 12)
    assert t.subtree_level_measure((0,), 1)[(0, 0)] * level_measure(t, 1)[(0,)] == F(1, 12)


def test_level_beyond_height():
    t = ProbTree.uniform(2, 2)
    with pytest.raises(NotMaterializedError):
        level_measure(t, 3)
    with pytest.raises(IndexError):
        t.subtree_level_measure((0,), 2)


def test_bad_successor_weights():
    t = ProbTree(lambda node, _p: [(0, F(1, 2), None), (1, F(1, 3), None)], 1)
    with pytest.raises(ValueError):
        t.children(())
    t = ProbTree(lambda node, _p: [], 1)
    with pytest.raises(StructureError):
        t.children(())


def test_relative_expectation_examples():
    t = thirds_tree()
    X = LevelRV.constant(t, 2, F(3, 7))
    assert relative_expectation(t, X, (1,)) == F(3, 7)
    Y = LevelRV.from_function(t, 2, lambda n: n[0] + 2 * n[1])
    assert relative_expectation(t, Y, ()) == expectation(Y)
    assert expectation(Y) == sum(p * Y(n) for n, p in level_measure(t, 2).items())
    ind = LevelRV.from_function(t, 2, lambda n: int(n == (1, 0)))
    assert relative_expectation(t, ind, ()) == t.subtree_level_measure((), 2)[(1, 0)] == F(1, 6)
    with pytest.raises(StructureError):
        relative_expectation(t, Y, (5,))


def test_tower_examples():
    t = ProbTree.uniform(2, 3)
    leaf = LevelRV.from_function(t, 3, lambda n: int(n == (0, 1, 1)))
    rep = tower_check(t, leaf, 0, 1)
    assert rep.holds
    assert rep.rows == [((), F(1, 8), F(1, 8))]
    const = LevelRV.constant(t, 3, 4)
    rep = tower_check(t, const, 1, 1)
    assert rep.holds and all(d == i == 4 for _, d, i in rep.rows)
    table = {(): {0: F(1, 3), 1: F(2, 3)}, (0,): {0: F(1, 2), 1: F(1, 2)}, (1,): {0: F(1, 2), 1: F(1, 2)}}
    t2 = ProbTree.from_table(table, 2)
    X = LevelRV(t2, 2, {(0, 0): 1, (0, 1): F(1, 5), (1, 0): 7, (1, 1): F(-2, 3)})
    rep = tower_check(t2, X, 0, 1)
    assert rep.holds
    # both sides expanded by hand over the four leaves
    hand = F(1, 3) * (F(1, 2) * 1 + F(1, 2) * F(1, 5)) + F(2, 3) * (F(1, 2) * 7 + F(1, 2) * F(-2, 3))
    assert rep.rows[0][1] == hand
    with pytest.raises(ValueError):
        tower_check(t2, X, 0, 2)


def test_moment_examples():
    t = thirds_tree()
    X = LevelRV.from_function(t, 2, lambda n: n[0] - n[1])
    c = LevelRV.constant(t, 2, F(5, 2))
    assert moments(c).variance == 0
    assert moments(X, c).covariance == 0
    assert moments(c, X).covariance == 0
    assert moments(X + 5).variance == moments(X).variance


@pytest.mark.parametrize("n,p", [(1, F(1, 2)), (5, F(1, 3)), (8, F(3, 4))])
def test_binomial_tree_moments(n, p):
    t = binomial_tree(n, p)
    X = LevelRV.from_function(t, n, lambda node: sum(node))
    m = moments(X)
    assert m.mean == n * p and m.variance == n * p * (1 - p)
    assert dict(X.distribution().items()) == dict(binomial_distribution(n, p).items())


def test_chebyshev_examples():
    t = ProbTree.uniform(2, 1)
    coin = LevelRV.from_function(t, 1, lambda n: n[0])
    audit = chebyshev_audit(coin, F(1, 2))
    assert (audit.lhs, audit.rhs, audit.holds) == (1, 1, True)
    const = LevelRV.constant(t, 1, 3)
    audit = chebyshev_audit(const, F(1, 10))
    assert (audit.lhs, audit.rhs) == (0, 0)
    audit = chebyshev_audit(binomial_distribution(4, F(1, 2)), 2)
    # outcomes 0000 and 1111 are the only ones at distance 2 from the mean
    assert (audit.lhs, audit.rhs) == (F(2, 16), F(1, 4))
    with pytest.raises(ValueError):
        chebyshev_audit(coin, 0)


def test_binomial_tail_for_deviation_bound():
    # V = share of one of two equally likely blocks over 26 draws
    d = binomial_distribution(26, F(1, 2))
    tail = d.prob(lambda k: abs(k / 26 - F(1, 2)) >= F(1, 4))
    bound = 2 * F(1, 2) * F(1, 2) / (52 * F(1, 16))
    assert bound == F(2, 13)
    assert tail == F(2 * sum(__import__("math").comb(26, k) for k in range(0, 7)), 2**26)
    assert tail <= bound


def test_levelrv_domain_and_csv(tmp_path):
    t = thirds_tree()
    with pytest.raises(StructureError):
        LevelRV(t, 1, {(0,): 1})
    X = LevelRV.from_function(t, 1, lambda n: n[0])
    X.to_csv(tmp_path / "x.csv")
    rows = list(csv.reader(open(tmp_path / "x.csv")))
    assert rows == [["node", "probability", "value"], ["0", "1/3", "0/1"], ["1", "2/3", "1/1"]]
    assert X.lift(2)((1, 0)) == 1


def test_sampling_is_exact_and_seeded():
    t = thirds_tree()
    a = [t.sample_path(random.Random(f"s/{j}")) for j in range(200)]
    b = [t.sample_path(random.Random(f"s/{j}")) for j in range(200)]
    assert a == b
    assert set(a) <= set(level_measure(t, 2))


@st.composite
def trees(draw):
    seed = draw(st.integers(0, 10**6))
    height = draw(st.integers(1, 4))
    return random_tree(random.Random(seed), height, 3)


@settings(max_examples=60, deadline=None)
@given(trees(), st.data())
def test_level_laws(t, data):
    for h in range(t.height + 1):
        assert sum(level_measure(t, h).values()) == 1
    leaves = level_measure(t, t.height)
    for rho in t.level(data.draw(st.integers(0, t.height))):
        for eta, q in t.subtree_level_measure(rho, t.height - len(rho)).items():
            assert t.path_probability(rho) * q == leaves[eta]


@settings(max_examples=60, deadline=None)
@given(trees(), st.data())
def test_linearity_of_relative_expectation(t, data):
    vals = st.fractions(-5, 5, max_denominator=9)
    X = LevelRV.from_function(t, t.height, lambda n: data.draw(vals))
    Y = LevelRV.from_function(t, t.height, lambda n: data.draw(vals))
    r, s = data.draw(vals), data.draw(vals)
    for rho in t.level(data.draw(st.integers(0, t.height))):
        lhs = relative_expectation(t, X * r + Y * s, rho)
        assert lhs == r * relative_expectation(t, X, rho) + s * relative_expectation(t, Y, rho)


@settings(max_examples=40, deadline=None)
@given(trees(), st.data())
def test_variance_of_sums(t, data):
    vals = st.fractions(-3, 3, max_denominator=5)
    k = data.draw(st.integers(1, 5))
    Xs = [LevelRV.from_function(t, t.height, lambda n: data.draw(vals)) for _ in range(k)]
    a = [data.draw(vals) for _ in range(k)]
    total = Xs[0] * a[0]
    for x, c in zip(Xs[1:], a[1:]):
        total = total + x * c
    expanded = sum(a[i] ** 2 * moments(Xs[i]).variance for i in range(k))
    expanded += sum(
        a[i] * a[j] * moments(Xs[i], Xs[j]).covariance for i, j in product(range(k), repeat=2) if i != j
    )
    assert moments(total).variance == expanded
    assert moments(total).variance >= 0
    eps = data.draw(st.fractions(Fraction(1, 8), 4, max_denominator=8))
    assert chebyshev_audit(total, eps).holds
