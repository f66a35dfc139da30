"""Free finitely additive probability measures on the natural numbers.

The measure lives on the algebra of eventually periodic sets: finite unions of
residue classes modulo some period, adjusted by finitely many points. A
:class:`PeriodicFAM` assigns a weight to every residue class modulo its period;
a class modulo a finer period ``L`` (a multiple of ``p``) gets the weight of
its parent class divided evenly, i.e. the relative natural density inside the
parent class. Finite sets get measure zero, so the measure is free.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Sequence

from .errors import IllegalRegionError, InvariantViolation, UnsupportedSetError
from .rational import as_fraction, fmt, lcm, lcm_all

__all__ = [
    "PeriodicSet",
    "PeriodicFAM",
    "IndexPartition",
    "PeriodicSimpleFunction",
    "xi",
    "integrate",
    "partition_decompose",
    "uniform_approx_select",
    "approximation_errors",
]


@dataclass(frozen=True)
class PeriodicSet:
    """``{k : k mod period in residues}`` plus ``added`` minus ``removed``."""

    period: int
    residues: frozenset = frozenset()
    added: frozenset = frozenset()
    removed: frozenset = frozenset()

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be positive")
        object.__setattr__(self, "residues", frozenset(r % self.period for r in self.residues))
        added = frozenset(k for k in self.added if k % self.period not in self.residues)
        removed = frozenset(k for k in self.removed if k % self.period in self.residues)
        if any(k < 0 for k in added | removed):
            raise ValueError("indices are natural numbers")
        object.__setattr__(self, "added", added)
        object.__setattr__(self, "removed", removed)

    @classmethod
    def full(cls) -> "PeriodicSet":
        return cls(1, frozenset({0}))

    @classmethod
    def empty(cls) -> "PeriodicSet":
        return cls(1)

    @classmethod
    def classes(cls, period: int, residues: Iterable[int]) -> "PeriodicSet":
        return cls(period, frozenset(residues))

    @classmethod
    def finite(cls, points: Iterable[int]) -> "PeriodicSet":
        return cls(1, frozenset(), frozenset(points))

    def __contains__(self, k: int) -> bool:
        if k in self.added:
            return True
        return k % self.period in self.residues and k not in self.removed

    @property
    def exceptions(self) -> frozenset:
        return self.added | self.removed

    def is_pure(self) -> bool:
        return not self.added and not self.removed

    def residues_mod(self, modulus: int) -> frozenset:
        """Residues modulo a multiple of the period that belong to the set."""
        if modulus % self.period:
            raise ValueError(f"{modulus} is not a multiple of the period {self.period}")
        return frozenset(r for r in range(modulus) if r % self.period in self.residues)

    def _combine(self, other: "PeriodicSet", op: Callable[[bool, bool], bool]) -> "PeriodicSet":
        L = lcm(self.period, other.period)
        res = frozenset(
            r for r in range(L) if op(r % self.period in self.residues, r % other.period in other.residues)
        )
        added, removed = set(), set()
        for k in self.exceptions | other.exceptions:
            actual = op(k in self, k in other)
            predicted = k % L in res
            if actual and not predicted:
                added.add(k)
            elif predicted and not actual:
                removed.add(k)
        return PeriodicSet(L, res, frozenset(added), frozenset(removed))

    def __or__(self, other):
        return self._combine(_as_periodic(other), lambda x, y: x or y)

    def __and__(self, other):
        return self._combine(_as_periodic(other), lambda x, y: x and y)

    def __sub__(self, other):
        return self._combine(_as_periodic(other), lambda x, y: x and not y)

    def __invert__(self) -> "PeriodicSet":
        res = frozenset(range(self.period)) - self.residues
        return PeriodicSet(self.period, res, self.removed, self.added)

    def points(self, limit: int) -> list[int]:
        return [k for k in range(limit) if k in self]


def _as_periodic(s) -> PeriodicSet:
    if isinstance(s, PeriodicSet):
        return s
    if isinstance(s, (set, frozenset, list, tuple, range)):
        return PeriodicSet.finite(s)
    raise UnsupportedSetError(f"{type(s).__name__} is not an eventually periodic set")


@dataclass(frozen=True)
class PeriodicFAM:
    period: int
    weights: tuple

    def __post_init__(self):
        ws = tuple(as_fraction(w) for w in self.weights)
        if len(ws) != self.period:
            raise ValueError(f"{len(ws)} residue weights for period {self.period}")
        if any(w < 0 for w in ws):
            raise ValueError("residue weights must be non-negative")
        if sum(ws) != 1:
            raise ValueError(f"residue weights sum to {sum(ws)}, not 1")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def uniform(cls, period: int) -> "PeriodicFAM":
        return cls(period, (Fraction(1, period),) * period)

    def class_weight(self, residue: int, modulus: int) -> Fraction:
        """Mass of ``{k : k = residue mod modulus}``; ``modulus`` is refined to a multiple of the period."""
        if modulus % self.period:
            raise ValueError(f"{modulus} is not a multiple of the period {self.period}")
        return self.weights[residue % self.period] * self.period / modulus

    def to_json(self) -> dict:
        return {"period": self.period, "weights": [fmt(w) for w in self.weights]}

    @classmethod
    def from_json(cls, data: dict) -> "PeriodicFAM":
        period = int(data["period"])
        weights = data.get("weights")
        if weights is None:
            return cls.uniform(period)
        return cls(period, tuple(weights))


def xi(fam: PeriodicFAM, s) -> Fraction:
    """Measure of an eventually periodic set; finite adjustments weigh nothing."""
    s = _as_periodic(s)
    L = lcm(fam.period, s.period)
    return sum((fam.class_weight(r, L) for r in s.residues_mod(L)), Fraction(0))


@dataclass(frozen=True)
class IndexPartition:
    """A partition of the naturals into unions of residue classes mod ``period``."""

    period: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(frozenset(int(r) for r in b) for b in self.blocks)
        seen = set()
        for b in blocks:
            if not b:
                raise ValueError("partition blocks must be non-empty")
            if any(not 0 <= r < self.period for r in b):
                raise ValueError(f"residue outside 0..{self.period - 1}")
            if seen & b:
                raise ValueError("partition blocks overlap")
            seen |= b
        if seen != set(range(self.period)):
            raise ValueError("partition blocks do not cover every residue")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def trivial(cls) -> "IndexPartition":
        return cls(1, (frozenset({0}),))

    def __len__(self) -> int:
        return len(self.blocks)

    def block_set(self, m: int) -> PeriodicSet:
        return PeriodicSet(self.period, self.blocks[m])

    def block_sets(self) -> list[PeriodicSet]:
        return [self.block_set(m) for m in range(len(self.blocks))]

    def block_of(self, k: int) -> int:
        r = k % self.period
        for m, b in enumerate(self.blocks):
            if r in b:
                return m
        raise AssertionError("unreachable: blocks cover every residue")

    def masses(self, fam: PeriodicFAM) -> list[Fraction]:
        return [xi(fam, b) for b in self.block_sets()]

    def to_json(self) -> dict:
        return {"period": self.period, "blocks": [sorted(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, data: dict) -> "IndexPartition":
        return cls(int(data["period"]), tuple(data["blocks"]))


@dataclass(frozen=True)
class PeriodicSimpleFunction:
    """A function on the naturals determined by its values on residues mod ``period``."""

    period: int
    values: tuple
    bounds: tuple | None = (0, 1)

    def __post_init__(self):
        vs = tuple(as_fraction(v) for v in self.values)
        if len(vs) != self.period:
            raise ValueError(f"{len(vs)} values for period {self.period}")
        object.__setattr__(self, "values", vs)
        if self.bounds is None:
            object.__setattr__(self, "bounds", (min(vs), max(vs)))
        else:
            lo, hi = (as_fraction(x) for x in self.bounds)
            if any(v < lo or v > hi for v in vs):
                raise ValueError(f"values leave the declared bounds [{lo}, {hi}]")
            object.__setattr__(self, "bounds", (lo, hi))

    @classmethod
    def constant(cls, c) -> "PeriodicSimpleFunction":
        return cls(1, (as_fraction(c),), None)

    @classmethod
    def indicator(cls, s: PeriodicSet) -> "PeriodicSimpleFunction":
        if not s.is_pure():
            raise UnsupportedSetError("indicator of a set with finite exceptions is not periodic")
        return cls(s.period, tuple(int(r in s.residues) for r in range(s.period)))

    def __call__(self, k: int) -> Fraction:
        return self.values[k % self.period]

    def on(self, modulus: int) -> list[Fraction]:
        if modulus % self.period:
            raise ValueError(f"{modulus} is not a multiple of the period {self.period}")
        return [self.values[r % self.period] for r in range(modulus)]

    def _pointwise(self, other, op) -> "PeriodicSimpleFunction":
        if not isinstance(other, PeriodicSimpleFunction):
            other = PeriodicSimpleFunction.constant(other)
        L = lcm(self.period, other.period)
        return PeriodicSimpleFunction(L, tuple(op(self(r), other(r)) for r in range(L)), None)

    def __add__(self, other):
        return self._pointwise(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._pointwise(other, lambda x, y: x - y)

    def __mul__(self, other):
        return self._pointwise(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __le__(self, other: "PeriodicSimpleFunction") -> bool:
        L = lcm(self.period, other.period)
        return all(self(r) <= other(r) for r in range(L))


def integrate(f: PeriodicSimpleFunction, fam: PeriodicFAM, over=None) -> Fraction:
    """``integral over `over` of f dXi`` (whole index set when ``over`` is None)."""
    s = PeriodicSet.full() if over is None else _as_periodic(over)
    L = lcm_all([f.period, fam.period, s.period])
    return sum((f(r) * fam.class_weight(r, L) for r in s.residues_mod(L)), Fraction(0))


def partition_decompose(
    f: PeriodicSimpleFunction, fam: PeriodicFAM, partition: IndexPartition
) -> list[Fraction]:
    return [integrate(f, fam, b) for b in partition.block_sets()]


def approximation_errors(
    fs: Sequence[PeriodicSimpleFunction], fam: PeriodicFAM, E, u: Sequence[int]
) -> list[Fraction]:
    """``|mean of f over u - (1/Xi(E)) integral_E f|`` for each function."""
    mass = xi(fam, E)
    out = []
    for f in fs:
        avg = sum((f(k) for k in u), Fraction(0)) / len(u)
        out.append(abs(avg - integrate(f, fam, E) / mass))
    return out


def uniform_approx_select(
    fs: Sequence[PeriodicSimpleFunction],
    fam: PeriodicFAM,
    E,
    F: Iterable[int] = (),
    eps=Fraction(1, 2),
) -> list[int]:
    """Finite ``u`` inside ``E`` and outside ``F`` whose uniform average matches ``Xi_E``.

    Each residue class of ``E`` (modulo the common period of ``E``, ``fam``
    and every function) is replicated in proportion to its weight, using
    fresh periods above every excluded point, so the averages agree exactly.
    """
    E = _as_periodic(E)
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if xi(fam, E) == 0:
        raise IllegalRegionError("the target region has measure zero")
    L = lcm_all([fam.period, E.period, *(f.period for f in fs)])
    weights = {r: fam.class_weight(r, L) for r in E.residues_mod(L)}
    weights = {r: w for r, w in weights.items() if w > 0}
    denom = lcm_all(w.denominator for w in weights.values())
    mult = {r: int(w * denom) for r, w in weights.items()}
    g = 0
    for n in mult.values():
        g = gcd(g, n)
    mult = {r: n // g for r, n in mult.items()}

    excluded = set(F) | E.exceptions
    base = 0 if not excluded else (max(excluded) // L + 1) * L
    u = sorted(base + r + L * t for r, n in mult.items() for t in range(n))
    errs = approximation_errors(fs, fam, E, u)
    if any(e >= eps for e in errs):
        raise InvariantViolation(f"period replication missed tolerance: {errs}")
    return u
