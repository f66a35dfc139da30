import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famlab.boolalg import Element
from famlab.cylinder import Clopen, Cylinder, DyadicAlgebra, density_search, embed, leb
from famlab.errors import RefinementNeeded

from conftest import F, elements


def test_empty_cylinder_is_everything():
    dy = DyadicAlgebra.of_depth(3)
    assert embed(Cylinder.of({}), dy).is_top()
    assert leb({}, dy) == 1


def test_one_fixed_coordinate_halves():
    dy = DyadicAlgebra.of_depth(3)
    e = embed({1: 0}, dy)
    assert e.count() == 4
    assert dy.measure(e) == F(1, 2)
    assert all(dy.point(x)[1] == 0 for x in e.atoms())


def test_disjoint_union_adds():
    dy = DyadicAlgebra.of_depth(4)
    c = Clopen.of([{0: 0, 1: 0}, {0: 1, 2: 1}])
    assert leb(c, dy) == F(1, 4) + F(1, 4)


def test_basic_cylinder_measure():
    assert Cylinder.of({0: 1, 5: 0, 7: 1}).measure() == F(1, 8)


def test_coordinate_outside_support():
    dy = DyadicAlgebra.of_depth(2)
    with pytest.raises(RefinementNeeded):
        embed({"z": 1}, dy)
    with pytest.raises(KeyError):
        embed({5: 1}, dy)


def test_named_coordinates():
    dy = DyadicAlgebra(["alpha", "beta"])
    assert embed({"beta": 1}, dy).atoms() == [2, 3]


def test_density_search_examples():
    dy = DyadicAlgebra.of_depth(3)
    assert density_search(dy.backing.top(), dy, F(1, 8)) == Cylinder.of({})
    atom = Element(8, 1 << 5)
    assert density_search(atom, dy, F(1, 8)) == Cylinder.of({0: 1, 1: 0, 2: 1})
    # all points with coordinate 0 equal to 0, plus one more point
    b = embed({0: 0}, dy) | Element(8, 1 << 1)
    assert dy.measure(b) == F(5, 8)
    s = density_search(b, dy, F(1, 8))
    assert s == Cylinder.of({0: 0})
    assert dy.conditional_measure(b, embed(s, dy)) == 1


def test_density_search_reference_scan():
    # reference: first cylinder fixing at most one coordinate, scanning by hand
    dy = DyadicAlgebra.of_depth(3)
    b = embed({0: 0}, dy) | Element(8, 1 << 1)
    hand = [Cylinder.of({})] + [Cylinder.of({j: v}) for j in range(3) for v in (0, 1)]
    first = next(c for c in hand if dy.conditional_measure(b, embed(c, dy)) >= F(7, 8))
    assert density_search(b, dy, F(1, 8), max_depth=1) == first


def test_density_search_depth_cap():
    dy = DyadicAlgebra.of_depth(3)
    with pytest.raises(LookupError):
        density_search(Element(8, 1), dy, F(1, 8), max_depth=1)


def test_density_search_rejects_zero():
    dy = DyadicAlgebra.of_depth(2)
    with pytest.raises(ValueError):
        density_search(Element(4, 0), dy, F(1, 2))


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_density_property_exhaustive(depth):
    dy = DyadicAlgebra.of_depth(depth)
    for eps in (F(1, 2), F(1, 4), F(1, 8)):
        for b in dy.backing.space.elements():
            s = embed(density_search(b, dy, eps), dy)
            assert dy.conditional_measure(b, s) >= 1 - eps


def test_density_property_depth_six_sample():
    import random

    rng = random.Random(6)
    dy = DyadicAlgebra.of_depth(6)
    for _ in range(300):
        b = Element(64, rng.getrandbits(64) or 1)
        for eps in (F(1, 2), F(1, 4), F(1, 8)):
            s = embed(density_search(b, dy, eps), dy)
            assert dy.conditional_measure(b, s) >= 1 - eps


def test_refinement_doubles_atoms():
    dy = DyadicAlgebra.of_depth(2)
    finer = dy.extend([2])
    assert finer.size == 2 * dy.size
    assert finer.backing.weights[0] == dy.backing.weights[0] / 2


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_lift_preserves_measure(data):
    depth = data.draw(st.integers(1, 4))
    dy = DyadicAlgebra.of_depth(depth)
    finer = dy.extend(range(depth, depth + data.draw(st.integers(1, 3))))
    a = data.draw(elements(dy.size))
    lifted = dy.lift(a, finer)
    assert finer.measure(lifted) == dy.measure(a)
    cyl = {j: data.draw(st.integers(0, 1)) for j in range(depth) if data.draw(st.booleans())}
    assert dy.lift(embed(cyl, dy), finer) == embed(cyl, finer)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_projection_keeps_measure(data):
    dy = DyadicAlgebra.of_depth(4)
    coords = sorted(data.draw(st.sets(st.integers(0, 3), min_size=1)))
    sub = DyadicAlgebra(coords)
    small = data.draw(elements(sub.size))
    # spread an element of the small algebra over the big one
    bits = 0
    for x in range(dy.size):
        y = sum(((x >> c) & 1) << j for j, c in enumerate(coords))
        if (small.bits >> y) & 1:
            bits |= 1 << x
    big = Element(dy.size, bits)
    assert dy.depends_only_on(big, coords)
    got_sub, got = dy.project(big, coords)
    assert got == small
    assert got_sub.measure(got) == dy.measure(big)
