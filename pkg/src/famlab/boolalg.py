"""Finite atomic Boolean algebras over an atom space.

An element is a bit-set of atom indices; the ambient algebra is the full
power set of the atoms. A :class:`MeasuredAlgebra` attaches strictly positive
exact-rational weights to the atoms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CapacityError, IllegalConditioningError, StructureError
from .rational import as_fraction, fmt

__all__ = [
    "AtomSpace",
    "Element",
    "MeasuredAlgebra",
    "ConditionalMeasure",
    "generated_atoms",
    "meet",
    "join",
    "complement",
    "leq",
    "minus",
    "iter_bits",
    "DEFAULT_GENERATOR_BOUND",
]

DEFAULT_GENERATOR_BOUND = 16


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``bits`` in increasing order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class AtomSpace:
    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise ValueError(f"atom space needs at least one atom, got {self.size!r}")

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def top(self) -> "Element":
        return Element(self.size, self.full_mask)

    def bottom(self) -> "Element":
        return Element(self.size, 0)

    def atom(self, index: int) -> "Element":
        if not 0 <= index < self.size:
            raise StructureError(f"atom {index} outside a space of {self.size} atoms")
        return Element(self.size, 1 << index)

    def element(self, atoms: Iterable[int]) -> "Element":
        return Element.from_atoms(self.size, atoms)

    def elements(self, nonzero: bool = True) -> Iterator["Element"]:
        """Every element of the power-set algebra (exponential; small spaces only)."""
        start = 1 if nonzero else 0
        for bits in range(start, 1 << self.size):
            yield Element(self.size, bits)


@dataclass(frozen=True, order=True)
class Element:
    """A member of the power-set algebra on ``size`` atoms."""

    size: int
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.size:
            raise StructureError(f"bits {self.bits:#x} do not fit {self.size} atoms")

    @classmethod
    def from_atoms(cls, size: int, atoms: Iterable[int]) -> "Element":
        bits = 0
        for a in atoms:
            if not 0 <= a < size:
                raise StructureError(f"atom {a} outside a space of {size} atoms")
            bits |= 1 << a
        return cls(size, bits)

    @property
    def space(self) -> AtomSpace:
        return AtomSpace(self.size)

    def atoms(self) -> list[int]:
        return list(iter_bits(self.bits))

    def atom_elements(self) -> list["Element"]:
        return [Element(self.size, 1 << a) for a in iter_bits(self.bits)]

    def count(self) -> int:
        return bin(self.bits).count("1")

    def is_zero(self) -> bool:
        return self.bits == 0

    def is_top(self) -> bool:
        return self.bits == (1 << self.size) - 1

    def _check(self, other: "Element") -> None:
        if not isinstance(other, Element):
            raise StructureError(f"expected an Element, got {type(other).__name__}")
        if other.size != self.size:
            raise StructureError(
                f"elements over different atom spaces ({self.size} vs {other.size})"
            )

    def __and__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.size, self.bits & other.bits)

    def __or__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.size, self.bits | other.bits)

    def __invert__(self) -> "Element":
        return Element(self.size, ~self.bits & ((1 << self.size) - 1))

    def __sub__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.size, self.bits & ~other.bits)

    def leq(self, other: "Element") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def disjoint(self, other: "Element") -> bool:
        self._check(other)
        return self.bits & other.bits == 0

    def below(self, nonzero: bool = True) -> Iterator["Element"]:
        """Every element ``x <= self`` (submask enumeration, decreasing bits)."""
        sub = self.bits
        while True:
            if sub or not nonzero:
                yield Element(self.size, sub)
            if sub == 0:
                return
            sub = (sub - 1) & self.bits

    def power(self, d: int) -> "Element":
        """``b^d``: the element itself for d = 0, its complement for d = 1."""
        if d == 0:
            return self
        if d == 1:
            return ~self
        raise ValueError("exponent must be 0 or 1")

    def __repr__(self) -> str:
        return f"Element({self.size}, {self.atoms()})"


def meet(a: Element, b: Element) -> Element:
    return a & b


def join(a: Element, b: Element) -> Element:
    return a | b


def complement(a: Element) -> Element:
    return ~a


def leq(a: Element, b: Element) -> bool:
    return a.leq(b)


def minus(a: Element, b: Element) -> Element:
    """``a ~ b``, i.e. ``a`` meet the complement of ``b``."""
    return a - b


def generated_atoms(
    generators: Sequence[Element],
    space: AtomSpace | None = None,
    bound: int = DEFAULT_GENERATOR_BOUND,
) -> list[Element]:
    """Atoms of the subalgebra generated by ``generators``.

    The result is ``[a_sigma for sigma in 2^B if a_sigma != 0]`` in
    lexicographic order of sigma, where ``a_sigma`` meets each generator
    (``sigma = 0``) or its complement (``sigma = 1``). Zero meets are pruned as
    soon as they appear, so the cost is linear in the number of atoms.
    """
    generators = list(generators)
    if len(generators) > bound:
        raise CapacityError(f"{len(generators)} generators exceed the bound of {bound}")
    if space is None:
        if not generators:
            raise StructureError("an empty generator list needs an explicit atom space")
        space = generators[0].space
    blocks = [space.top()]
    for g in generators:
        if g.size != space.size:
            raise StructureError("generators over different atom spaces")
        refined = []
        for block in blocks:
            inside = block.bits & g.bits
            if inside:
                refined.append(Element(space.size, inside))
            outside = block.bits & ~g.bits
            if outside:
                refined.append(Element(space.size, outside))
        blocks = refined
    return blocks


class MeasuredAlgebra:
    """A finite power-set algebra with a strictly positive probability on atoms."""

    def __init__(self, weights: Sequence, names: dict[str, Element] | None = None):
        ws = tuple(as_fraction(w) for w in weights)
        if not ws:
            raise ValueError("at least one atom is required")
        if any(w <= 0 for w in ws):
            raise ValueError("atom weights must be strictly positive")
        if sum(ws) != 1:
            raise ValueError(f"atom weights sum to {sum(ws)}, not 1")
        self.weights = ws
        self.space = AtomSpace(len(ws))
        self._uniform = all(w == ws[0] for w in ws)
        self.names = dict(names or {})

    @classmethod
    def uniform(cls, size: int) -> "MeasuredAlgebra":
        return cls([Fraction(1, size)] * size)

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def is_uniform(self) -> bool:
        return self._uniform

    def top(self) -> Element:
        return self.space.top()

    def bottom(self) -> Element:
        return self.space.bottom()

    def element(self, atoms: Iterable[int]) -> Element:
        return self.space.element(atoms)

    def _check(self, a: Element) -> None:
        if not isinstance(a, Element) or a.size != self.size:
            raise StructureError("element does not belong to this algebra")

    def measure(self, a: Element) -> Fraction:
        self._check(a)
        if self._uniform:
            return Fraction(bin(a.bits).count("1"), self.size)
        return sum((self.weights[i] for i in iter_bits(a.bits)), Fraction(0))

    def conditional(self, b: Element) -> "ConditionalMeasure":
        return ConditionalMeasure(self, b)

    def conditional_measure(self, a: Element, b: Element) -> Fraction:
        """``mu_b(a) = mu(a & b) / mu(b)``."""
        mb = self.measure(b)
        if mb == 0:
            raise IllegalConditioningError("conditioning on a null element")
        return self.measure(a & b) / mb

    def to_json(self) -> dict:
        return {
            "atoms": self.size,
            "weights": [fmt(w) for w in self.weights],
            "elements": {k: v.atoms() for k, v in sorted(self.names.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "MeasuredAlgebra":
        size = int(data["atoms"])
        weights = data.get("weights")
        if weights is None:
            weights = [Fraction(1, size)] * size
        if len(weights) != size:
            raise ValueError(f"{len(weights)} weights for {size} atoms")
        names = {
            name: Element.from_atoms(size, atoms)
            for name, atoms in data.get("elements", {}).items()
        }
        return cls(weights, names)

    @classmethod
    def load(cls, path) -> "MeasuredAlgebra":
        return cls.from_json(json.loads(Path(path).read_text()))

    def __repr__(self) -> str:
        return f"MeasuredAlgebra({[fmt(w) for w in self.weights]})"


class ConditionalMeasure:
    """The functional ``a -> mu(a & b) / mu(b)``."""

    def __init__(self, algebra: MeasuredAlgebra, b: Element):
        self.algebra = algebra
        self.condition = b
        self.mass = algebra.measure(b)
        if self.mass == 0:
            raise IllegalConditioningError("conditioning on a null element")

    def __call__(self, a: Element) -> Fraction:
        return self.algebra.measure(a & self.condition) / self.mass

    def relative_algebra(self) -> tuple[MeasuredAlgebra, list[int]]:
        """The relative algebra below ``b`` as a standalone measured algebra.

        Returns the algebra and the ambient atom index of each of its atoms.
        """
        idx = self.condition.atoms()
        weights = [self.algebra.weights[i] / self.mass for i in idx]
        return MeasuredAlgebra(weights), idx
