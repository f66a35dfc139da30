"""Limit conditions: a part of ``r*`` below which every success integral stays high."""

from __future__ import annotations

from fractions import Fraction

from ..boolalg import Element, MeasuredAlgebra
from ..errors import InvariantViolation, PreconditionError
from ..fam import PeriodicFAM, integrate
from ..rational import as_fraction
from .model import BlockFamily, ConditionSequence, success_function

__all__ = ["limit_construct", "success_integral", "atom_integrals"]


def success_integral(
    algebra: MeasuredAlgebra, fam: PeriodicFAM, blocks: BlockFamily, seq: ConditionSequence, r: Element
) -> Fraction:
    return integrate(success_function(algebra, blocks, seq, r), fam)


def atom_integrals(algebra, fam, blocks, seq, r_star: Element) -> dict:
    return {
        a: success_integral(algebra, fam, blocks, seq, Element(algebra.size, 1 << a))
        for a in r_star.atoms()
    }


def limit_construct(
    algebra: MeasuredAlgebra,
    fam: PeriodicFAM,
    blocks: BlockFamily,
    seq: ConditionSequence,
    r_star: Element,
    delta,
) -> Element:
    """The heaviest ``r <= r*`` such that every part of ``r`` has success integral ``>= delta``.

    An element has no part with integral below ``delta`` exactly when every
    atom below it reaches ``delta`` (integrals of parts are weighted means of
    atom integrals). So the admissible elements are the nonzero parts of the
    join of the good atoms, and that join is the first admissible element in
    order of decreasing measure.
    """
    delta = as_fraction(delta)
    if r_star.is_zero():
        raise PreconditionError("r* must be nonzero")
    seq.check_blocks(blocks)
    mr = algebra.measure(r_star)
    for row_index, row in enumerate(seq.table):
        for j, b in enumerate(row):
            if algebra.measure(b & r_star) < delta * mr:
                raise PreconditionError(
                    f"entry {j} of row {row_index} has conditional measure below {delta} inside r*"
                )
    scores = atom_integrals(algebra, fam, blocks, seq, r_star)
    bits = 0
    for a, g in scores.items():
        if g >= delta:
            bits |= 1 << a
    if bits == 0:
        worst = min(scores, key=lambda a: (scores[a], a))
        raise InvariantViolation(
            f"every atom below r* has integral below {delta}; lowest is atom {worst} at {scores[worst]}"
        )
    return Element(algebra.size, bits)
