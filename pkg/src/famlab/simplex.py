"""Exact rational simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The origin is feasible, so no phase one is needed. Pivots follow the most
negative reduced cost until the first degenerate pivot; from then on the
smallest-index (Bland) rule is used, which rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import StructureError
from .rational import as_fraction

__all__ = ["LPResult", "maximize", "Unbounded"]


class Unbounded(StructureError):
    pass


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: tuple  # primal optimum
    y: tuple  # dual optimum, one entry per row
    pivots: int


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence, max_pivots: int = 100_000) -> LPResult:
    m, n = len(A), len(c)
    c = [as_fraction(v) for v in c]
    b = [as_fraction(v) for v in b]
    if any(v < 0 for v in b):
        raise StructureError("right-hand side must be non-negative")
    if len(b) != m or any(len(row) != n for row in A):
        raise StructureError("constraint matrix has the wrong shape")

    width = n + m
    rows = []
    for i in range(m):
        row = [as_fraction(v) for v in A[i]] + [Fraction(0)] * m + [b[i]]
        row[n + i] = Fraction(1)
        rows.append(row)
    obj = [-v for v in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]

    bland = False
    pivots = 0
    while True:
        entering = None
        if bland:
            for j in range(width):
                if obj[j] < 0:
                    entering = j
                    break
        else:
            best = Fraction(0)
            for j in range(width):
                if obj[j] < best:
                    best, entering = obj[j], j
        if entering is None:
            break

        leave = None
        ratio = None
        for i in range(m):
            a = rows[i][entering]
            if a > 0:
                q = rows[i][-1] / a
                if ratio is None or q < ratio or (q == ratio and basis[i] < basis[leave]):
                    ratio, leave = q, i
        if leave is None:
            raise Unbounded("objective is unbounded")
        if ratio == 0:
            bland = True

        prow = rows[leave]
        piv = prow[entering]
        if piv != 1:
            prow = [v / piv for v in prow]
            rows[leave] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i in range(m):
            if i != leave:
                f = rows[i][entering]
                if f:
                    r = rows[i]
                    for j in nz:
                        r[j] -= f * prow[j]
        f = obj[entering]
        for j in nz:
            obj[j] -= f * prow[j]
        basis[leave] = entering
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit exceeded")

    x = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = rows[i][-1]
    y = tuple(obj[n + i] for i in range(m))
    return LPResult(obj[-1], tuple(x), y, pivots)
