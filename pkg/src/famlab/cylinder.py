"""Depth-n dyadic model of the measure algebra adding random reals.

A :class:`DyadicAlgebra` over coordinates ``c_0, ..., c_{n-1}`` has one atom
per point of ``2^n``; atom index ``x`` stands for the point whose value at
``c_j`` is bit ``j`` of ``x``. Every atom weighs ``2^-n`` (product Lebesgue
measure restricted to the finite support).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .boolalg import Element, MeasuredAlgebra
from .errors import RefinementNeeded, StructureError

__all__ = ["Cylinder", "Clopen", "DyadicAlgebra", "embed", "density_search", "leb"]


@dataclass(frozen=True)
class Cylinder:
    """A basic clopen set: a finite partial function from coordinates to bits."""

    conditions: tuple[tuple[Hashable, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[Hashable, int] | None = None, **kw) -> "Cylinder":
        items = dict(mapping or {})
        items.update(kw)
        for coord, bit in items.items():
            if bit not in (0, 1):
                raise ValueError(f"coordinate {coord!r} fixed to non-bit {bit!r}")
        return cls(tuple(sorted(items.items(), key=lambda kv: repr(kv[0]))))

    def as_dict(self) -> dict:
        return dict(self.conditions)

    @property
    def coords(self) -> tuple:
        return tuple(c for c, _ in self.conditions)

    def __len__(self) -> int:
        return len(self.conditions)

    def measure(self) -> Fraction:
        return Fraction(1, 2 ** len(self.conditions))


@dataclass(frozen=True)
class Clopen:
    """A finite union of basic cylinders."""

    parts: tuple[Cylinder, ...]

    @classmethod
    def of(cls, cylinders: Iterable[Cylinder | Mapping]) -> "Clopen":
        parts = tuple(c if isinstance(c, Cylinder) else Cylinder.of(c) for c in cylinders)
        return cls(parts)


class DyadicAlgebra:
    """Cylinder algebra of depth ``len(coords)`` with uniform atom weights."""

    def __init__(self, coords: Sequence[Hashable]):
        coords = tuple(coords)
        if len(set(coords)) != len(coords):
            raise ValueError("coordinate labels must be distinct")
        if not coords:
            raise ValueError("depth must be at least 1")
        self.coords = coords
        self.depth = len(coords)
        self._pos = {c: j for j, c in enumerate(coords)}
        self.backing = MeasuredAlgebra.uniform(2**self.depth)
        self._masks: dict = {}

    @classmethod
    def of_depth(cls, depth: int) -> "DyadicAlgebra":
        return cls(range(depth))

    @property
    def size(self) -> int:
        return self.backing.size

    def position(self, coord: Hashable) -> int:
        try:
            return self._pos[coord]
        except KeyError:
            raise RefinementNeeded(
                f"coordinate {coord!r} is outside the support {self.coords!r}"
            ) from None

    def point(self, atom: int) -> dict:
        return {c: (atom >> j) & 1 for j, c in enumerate(self.coords)}

    def measure(self, a: Element) -> Fraction:
        return self.backing.measure(a)

    def conditional_measure(self, a: Element, s: Element) -> Fraction:
        return self.backing.conditional_measure(a, s)

    def extend(self, new_coords: Iterable[Hashable]) -> "DyadicAlgebra":
        extra = [c for c in new_coords if c not in self._pos]
        return DyadicAlgebra(self.coords + tuple(extra))

    def lift(self, a: Element, finer: "DyadicAlgebra") -> Element:
        """Image of ``a`` in an extension whose coordinates start with ours."""
        if finer.coords[: self.depth] != self.coords:
            raise StructureError("target algebra does not extend this one")
        bits = 0
        step = self.size
        for hi in range(finer.size // step):
            bits |= a.bits << (hi * step)
        return Element(finer.size, bits)

    def depends_only_on(self, a: Element, coords: Iterable[Hashable]) -> bool:
        keep = 0
        for c in coords:
            keep |= 1 << self.position(c)
        for x in range(self.size):
            if ((a.bits >> x) & 1) != ((a.bits >> (x & keep)) & 1):
                return False
        return True

    def project(self, a: Element, coords: Sequence[Hashable]) -> tuple["DyadicAlgebra", Element]:
        """Rewrite an element that depends only on ``coords`` inside ``2^coords``."""
        if not self.depends_only_on(a, coords):
            raise StructureError("element depends on coordinates outside the projection")
        sub = DyadicAlgebra(coords)
        pos = [self.position(c) for c in coords]
        bits = 0
        for y in range(sub.size):
            x = 0
            for j, p in enumerate(pos):
                x |= ((y >> j) & 1) << p
            if (a.bits >> x) & 1:
                bits |= 1 << y
        return sub, Element(sub.size, bits)

    def cylinders(self, max_fixed: int | None = None) -> Iterator[Cylinder]:
        """Basic cylinders by fixed-coordinate count, then coordinate order, then values."""
        top = self.depth if max_fixed is None else min(max_fixed, self.depth)
        for k in range(top + 1):
            for chosen in combinations(self.coords, k):
                for values in product((0, 1), repeat=k):
                    yield Cylinder.of(dict(zip(chosen, values)))

    def cylinder_masks(self, max_fixed: int | None = None) -> list[tuple[Cylinder, int]]:
        """``(cylinder, atom bits)`` in canonical order, computed once per bound."""
        got = self._masks.get(max_fixed)
        if got is None:
            got = [(c, embed(c, self).bits) for c in self.cylinders(max_fixed)]
            self._masks[max_fixed] = got
        return got

    def __repr__(self) -> str:
        return f"DyadicAlgebra(coords={self.coords!r})"


def embed(c: Cylinder | Clopen | Mapping, alg: DyadicAlgebra) -> Element:
    """Atom set of the depth-n points extending ``c``."""
    if isinstance(c, Clopen):
        bits = 0
        for part in c.parts:
            bits |= embed(part, alg).bits
        return Element(alg.size, bits)
    if not isinstance(c, Cylinder):
        c = Cylinder.of(c)
    mask = value = 0
    for coord, bit in c.conditions:
        j = alg.position(coord)
        mask |= 1 << j
        value |= bit << j
    bits = 0
    for x in range(alg.size):
        if x & mask == value:
            bits |= 1 << x
    return Element(alg.size, bits)


def leb(c: Cylinder | Clopen | Mapping, alg: DyadicAlgebra) -> Fraction:
    return alg.measure(embed(c, alg))


def density_search(
    b: Element,
    alg: DyadicAlgebra,
    eps,
    max_depth: int | None = None,
) -> Cylinder:
    """First basic cylinder ``s`` (canonical order) with ``Leb_s(b) >= 1 - eps``.

    At full depth some atom-cylinder lies inside ``b``, so the scan always
    succeeds unless ``max_depth`` cuts it short.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if b.size != alg.size:
        raise StructureError("element does not belong to this algebra")
    if b.is_zero():
        raise ValueError("density search needs an element of positive measure")
    target = 1 - eps
    num, den = target.numerator, target.denominator
    for cyl, mask in alg.cylinder_masks(max_depth):
        # inside / |cyl| >= num / den, compared on integers
        if (mask & b.bits).bit_count() * den >= num * mask.bit_count():
            return cyl
    raise LookupError(
        f"no cylinder fixing at most {max_depth} coordinates reaches {target}"
    )
