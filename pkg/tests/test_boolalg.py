import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famlab.boolalg import (
    AtomSpace,
    Element,
    MeasuredAlgebra,
    complement,
    generated_atoms,
    join,
    leq,
    meet,
    minus,
)
from famlab.errors import CapacityError, IllegalConditioningError, StructureError

from conftest import F, algebras, elements


def E(*atoms, size=4):
    return Element.from_atoms(size, atoms)


def test_meet_with_top_is_identity():
    b = E(0, 2)
    assert meet(AtomSpace(4).top(), b) == b


def test_double_complement():
    b = E(1, 3)
    assert complement(complement(b)) == b


def test_minus_is_set_difference():
    assert minus(E(0, 1), E(1, 2)) == E(0)
    assert minus(E(0, 1), E(1, 2)) == E(0, 1) & ~E(1, 2)


def test_join_and_order():
    assert join(E(0), E(3)) == E(0, 3)
    assert leq(E(0), E(0, 3))
    assert not leq(E(1), E(0, 3))


def test_mismatched_spaces_are_rejected():
    with pytest.raises(StructureError):
        E(0) & E(0, size=5)


def test_atoms_of_empty_generator_list():
    assert generated_atoms([], AtomSpace(4)) == [AtomSpace(4).top()]


def test_atoms_of_one_generator():
    b = E(0, 1)
    assert generated_atoms([b]) == [b, ~b]


def test_atoms_of_two_generators_in_pattern_order():
    # patterns (in b, in c), (in b, out c), (out b, in c), (out b, out c)
    assert generated_atoms([E(0, 1), E(1, 2)]) == [E(1), E(0), E(2), E(3)]


def test_generator_bound():
    gens = [E(0)] * 17
    with pytest.raises(CapacityError):
        generated_atoms(gens)
    assert len(generated_atoms(gens[:16])) == 2


def test_measure_examples(four_uniform, four_skewed):
    assert four_uniform.measure(E(0, 1)) == F(1, 2)
    assert four_skewed.measure(E()) == 0
    assert four_skewed.measure(E(1, 2)) == F(3, 8)
    assert four_skewed.measure(four_skewed.top()) == 1


def test_conditional_examples(four_uniform, four_skewed):
    b = E(0, 1)
    assert four_uniform.conditional_measure(b, b) == 1
    assert four_uniform.conditional_measure(E(0), b) == F(1, 2)
    assert four_skewed.conditional(E(1, 2, 3))(E(2, 3)) == F(1, 2)


def test_conditioning_on_zero_fails(four_uniform):
    with pytest.raises(IllegalConditioningError):
        four_uniform.conditional(E())
    with pytest.raises(ZeroDivisionError):
        four_uniform.conditional_measure(E(1), E())


def test_weights_must_be_positive_and_sum_to_one():
    with pytest.raises(ValueError):
        MeasuredAlgebra([F(1, 2), F(1, 2), 0])
    with pytest.raises(ValueError):
        MeasuredAlgebra([F(1, 2), F(1, 3)])


def test_json_round_trip(four_skewed):
    four_skewed.names["left"] = E(0, 1)
    again = MeasuredAlgebra.from_json(four_skewed.to_json())
    assert again.weights == four_skewed.weights
    assert again.names == {"left": E(0, 1)}
    assert four_skewed.to_json()["weights"] == ["1/2", "1/4", "1/8", "1/8"]


def test_relative_algebra(four_skewed):
    rel, idx = four_skewed.conditional(E(1, 2, 3)).relative_algebra()
    assert idx == [1, 2, 3]
    assert rel.weights == (F(1, 2), F(1, 4), F(1, 4))


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_boolean_laws_by_truth_table(data):
    n = data.draw(st.integers(1, 8))
    a, b, c = (data.draw(elements(n)) for _ in range(3))
    for x in range(n):
        bit = lambda e: (e.bits >> x) & 1
        assert bit(a & b) == (bit(a) and bit(b))
        assert bit(a | b) == (bit(a) or bit(b))
        assert bit(~a) == 1 - bit(a)
    assert a & (b | c) == (a & b) | (a & c)
    assert ~(a | b) == ~a & ~b
    assert (a.leq(b)) == (set(a.atoms()) <= set(b.atoms()))


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_additivity_and_conditionals(data):
    alg = data.draw(algebras())
    a = data.draw(elements(alg.size))
    b = data.draw(elements(alg.size))
    assert alg.measure(a) + alg.measure(b - a) == alg.measure(a | b)
    if not b.is_zero():
        mu = alg.conditional(b)
        assert mu(alg.top()) == 1
        assert mu(a) + mu(~a) == 1
        rel, idx = mu.relative_algebra()
        assert sum(rel.weights) == 1
        assert rel.measure(Element.from_atoms(rel.size, [j for j, i in enumerate(idx) if (a.bits >> i) & 1])) == mu(a)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_generated_atoms_partition_and_span(data):
    n = data.draw(st.integers(1, 64))
    gens = data.draw(st.lists(elements(n), max_size=12))
    space = AtomSpace(n)
    atoms = generated_atoms(gens, space)
    union = 0
    for a in atoms:
        assert not a.is_zero()
        assert union & a.bits == 0
        union |= a.bits
    assert union == space.full_mask
    for g in gens:
        # each generator is the join of the atoms below it
        below = [a for a in atoms if a.leq(g)]
        assert all(a.disjoint(g) for a in atoms if a not in below)
        assert sum(a.bits for a in below) == g.bits
