"""Index blocks, periodic condition sequences and their success functions.

For a condition ``r`` and a sequence ``r^i`` the success function is

    f^i_r(k) = (1/|P_k|) * sum over l in P_k of mu_r(r^i_l)

and the strict version counts the labels with ``r <= r^i_l``. Both are
periodic in ``k`` because the blocks and the sequences are.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..boolalg import Element, MeasuredAlgebra, iter_bits
from ..errors import IllegalConditioningError, StructureError
from ..fam import IndexPartition, PeriodicFAM, PeriodicSimpleFunction, integrate
from ..rational import fmt, lcm, lcm_all

__all__ = ["BlockFamily", "ConditionSequence", "LimitProblem", "success_function"]


@dataclass(frozen=True)
class BlockFamily:
    """Finite label blocks ``P_k = {(k, 0), ..., (k, n_k - 1)}`` with ``n_k`` periodic in ``k``."""

    period: int
    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if len(sizes) != self.period or self.period < 1:
            raise ValueError(f"{len(sizes)} block sizes for period {self.period}")
        if any(n < 1 for n in sizes):
            raise ValueError("every block needs at least one label")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def singletons(cls) -> "BlockFamily":
        return cls(1, (1,))

    def size(self, k: int) -> int:
        return self.sizes[k % self.period]

    def labels(self, k: int) -> list[tuple[int, int]]:
        return [(k, j) for j in range(self.size(k))]

    def to_json(self) -> dict:
        return {"period": self.period, "sizes": list(self.sizes)}

    @classmethod
    def from_json(cls, data: dict) -> "BlockFamily":
        return cls(int(data["period"]), tuple(data["sizes"]))


@dataclass(frozen=True)
class ConditionSequence:
    """``r_(k, j) = table[k % period][j]``."""

    period: int
    table: tuple
    name: str = ""

    def __post_init__(self):
        table = tuple(tuple(row) for row in self.table)
        if len(table) != self.period or self.period < 1:
            raise ValueError(f"{len(table)} table rows for period {self.period}")
        for row in table:
            if not row:
                raise ValueError("table rows must be non-empty")
            for e in row:
                if not isinstance(e, Element):
                    raise StructureError("table entries must be elements")
                if e.is_zero():
                    raise ValueError("sequence entries must be nonzero")
        object.__setattr__(self, "table", table)

    @classmethod
    def constant(cls, b: Element, width: int = 1, name: str = "") -> "ConditionSequence":
        return cls(1, ((b,) * width,), name)

    def element(self, label: tuple[int, int]) -> Element:
        k, j = label
        return self.table[k % self.period][j]

    def row(self, k: int) -> tuple:
        return self.table[k % self.period]

    def elements(self) -> list[Element]:
        return list(dict.fromkeys(e for row in self.table for e in row))

    def check_blocks(self, blocks: BlockFamily) -> None:
        L = lcm(self.period, blocks.period)
        for k in range(L):
            if len(self.row(k)) != blocks.size(k):
                raise StructureError(
                    f"sequence {self.name or '?'} has {len(self.row(k))} entries at index {k}"
                    f" but the block there has {blocks.size(k)} labels"
                )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "period": self.period,
            "table": [[e.atoms() for e in row] for row in self.table],
        }


def success_function(
    algebra: MeasuredAlgebra, blocks: BlockFamily, seq: ConditionSequence, r: Element, strict: bool = False
) -> PeriodicSimpleFunction:
    """``f_r`` (or the strict count version) for one sequence, one period's worth."""
    mr = algebra.measure(r)
    if mr == 0:
        raise IllegalConditioningError("success function of the zero element")
    L = lcm(blocks.period, seq.period)
    values = []
    for k in range(L):
        row = seq.row(k)
        if strict:
            hits = sum(1 for e in row if r.leq(e))
        else:
            hits = sum((algebra.measure(r & e) for e in row), Fraction(0)) / mr
        values.append(Fraction(hits) / len(row))
    return PeriodicSimpleFunction(L, tuple(values))


@dataclass
class LimitProblem:
    """Everything the witness construction works on, except tolerances.

    ``algebra_spec`` records how the algebra was described (for example a
    dyadic depth) so that certificates can be written back out.
    """

    algebra: MeasuredAlgebra
    fam: PeriodicFAM
    partition: IndexPartition
    blocks: BlockFamily
    sequences: list
    algebra_spec: dict | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.sequences = list(self.sequences)
        for seq in self.sequences:
            seq.check_blocks(self.blocks)
            for e in seq.elements():
                if e.size != self.algebra.size:
                    raise StructureError("sequence entry lies outside the algebra")
        self.masses = self.partition.masses(self.fam)
        self.M = [m for m, a in enumerate(self.masses) if a > 0]

    @property
    def i_star(self) -> int:
        return len(self.sequences)

    @property
    def m_star(self) -> int:
        return len(self.partition)

    def success(self, i: int, r: Element) -> PeriodicSimpleFunction:
        key = ("f", i, r.bits)
        out = self._cache.get(key)
        if out is None:
            out = success_function(self.algebra, self.blocks, self.sequences[i], r)
            self._cache[key] = out
        return out

    def strict_success(self, i: int, r: Element) -> PeriodicSimpleFunction:
        key = ("rho", i, r.bits)
        out = self._cache.get(key)
        if out is None:
            out = success_function(self.algebra, self.blocks, self.sequences[i], r, strict=True)
            self._cache[key] = out
        return out

    def integral(self, i: int, r: Element) -> Fraction:
        return integrate(self.success(i, r), self.fam)

    def block_average(self, i: int, m: int, r: Element) -> Fraction:
        """``c_{i,m}(r)``: the integral of ``f^i_r`` over block ``m`` divided by its mass."""
        a = self.masses[m]
        if a == 0:
            raise IllegalConditioningError(f"block {m} has measure zero")
        return integrate(self.success(i, r), self.fam, self.partition.block_set(m)) / a

    def atom(self, a: int) -> Element:
        return Element(self.algebra.size, 1 << a)

    def atoms_below(self, r: Element) -> list[int]:
        return list(iter_bits(r.bits))

    def common_period(self) -> int:
        return lcm_all(
            [self.fam.period, self.partition.period, self.blocks.period]
            + [s.period for s in self.sequences]
        )

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra_spec or self.algebra.to_json(),
            "fam": self.fam.to_json(),
            "partition": self.partition.to_json(),
            "blocks": self.blocks.to_json(),
            "sequences": [s.to_json() for s in self.sequences],
            "masses": [fmt(a) for a in self.masses],
        }
