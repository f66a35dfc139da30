"""Grid refinement: a condition below which the block averages are pinned down.

``c_{i,m}(r')`` is the ``mu_{r'}``-weighted mean of the same quantity over
the atoms below ``r'``. So a set of atoms whose values all lie within ``eps``
of a grid point gives a condition every part of which stays within ``eps``,
and in a finite algebra a set is dense below ``r*`` exactly when it contains
every atom below ``r*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from ..boolalg import Element
from ..errors import InvariantViolation, PreconditionError
from ..rational import as_fraction, fmt
from .model import LimitProblem

__all__ = ["GridResult", "grid_refine", "grid_size"]


def grid_size(eps) -> int:
    """Smallest ``N`` with ``1/N < eps``."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return math.floor(1 / eps) + 1


@dataclass
class GridResult:
    problem: LimitProblem = field(repr=False)
    r: Element
    r_star: Element
    c: dict  # (i, m) -> grid value
    eps: Fraction
    N: int
    deltas: tuple
    method: str = "direct"

    def distances(self, x: Element) -> dict:
        return {
            (i, m): abs(self.problem.block_average(i, m, x) - v) for (i, m), v in self.c.items()
        }

    def in_dstar(self, x: Element) -> bool:
        if x.is_zero():
            return False
        return all(d < self.eps for d in self.distances(x).values())

    def dense_below(self, x: Element) -> bool:
        """Density of ``D*`` below ``x``: every atom below ``x`` must itself be a member."""
        return all(self.in_dstar(self.problem.atom(a)) for a in x.atoms())

    def check(self) -> None:
        if not self.r_star.leq(self.r):
            raise InvariantViolation("r* is not below r")
        for (i, m), v in self.c.items():
            if not 0 <= v <= 1 or (v * self.N).denominator != 1:
                raise InvariantViolation(f"grid value {v} for {(i, m)} is off the grid")
        for i, delta in enumerate(self.deltas):
            total = sum((v * self.problem.masses[m] for (j, m), v in self.c.items() if j == i), Fraction(0))
            if total < delta:
                raise InvariantViolation(f"grid values for sequence {i} sum to {total} < {delta}")
        if not self.in_dstar(self.r_star):
            raise InvariantViolation("r* is not in D*")
        if not self.dense_below(self.r_star):
            raise InvariantViolation("D* is not dense below r*")

    def to_json(self) -> dict:
        return {
            "r": self.r.atoms(),
            "r_star": self.r_star.atoms(),
            "c": [[i, m, fmt(v)] for (i, m), v in sorted(self.c.items())],
            "eps": fmt(self.eps),
            "N": self.N,
            "method": self.method,
        }


def _atom_values(problem: LimitProblem, a: int) -> dict:
    e = problem.atom(a)
    return {(i, m): problem.block_average(i, m, e) for i in range(problem.i_star) for m in problem.M}


def grid_refine(
    problem: LimitProblem,
    deltas: Sequence,
    r: Element,
    eps,
    method: str = "direct",
) -> GridResult:
    """Find ``r* <= r`` and grid values ``c`` with ``D*`` dense below ``r*`` and ``r*`` in ``D*``.

    ``method="direct"`` rounds the values of each atom up to the grid and
    keeps the heaviest cluster of atoms around one rounded point.
    ``method="induction"`` walks the whole grid in lexicographic order,
    descending to a counterexample atom whenever one exists; it is exponential
    in the number of grid coordinates and meant for small cross-checks.
    """
    eps = as_fraction(eps)
    N = grid_size(eps)
    deltas = tuple(as_fraction(d) for d in deltas)
    if len(deltas) != problem.i_star:
        raise ValueError(f"{len(deltas)} thresholds for {problem.i_star} sequences")
    if r.is_zero():
        raise PreconditionError("r must be nonzero")
    if problem.i_star == 0:
        return GridResult(problem, r, r, {}, eps, N, deltas, method)

    # The integral at any r' <= r is a weighted mean of the atom integrals, so
    # the hypothesis holds below r exactly when it holds at each atom.
    for a in r.atoms():
        for i, delta in enumerate(deltas):
            got = problem.integral(i, problem.atom(a))
            if got < delta:
                raise PreconditionError(
                    f"atom {a} below r has integral {got} < {delta} for sequence {i}",
                )

    values = {a: _atom_values(problem, a) for a in r.atoms()}
    if method == "direct":
        result = _direct(problem, deltas, r, eps, N, values)
    elif method == "induction":
        result = _induction(problem, deltas, r, eps, N, values)
    else:
        raise ValueError(f"unknown grid method {method!r}")
    result.check()
    return result


def _near(vals: dict, c: dict, eps: Fraction) -> bool:
    return all(abs(vals[key] - c[key]) < eps for key in c)


def _direct(problem, deltas, r, eps, N, values) -> GridResult:
    best = None
    for a in r.atoms():
        c = {key: Fraction(math.ceil(v * N), N) for key, v in values[a].items()}
        bits = 0
        for b, vals in values.items():
            if _near(vals, c, eps):
                bits |= 1 << b
        cluster = Element(r.size, bits)
        mass = problem.algebra.measure(cluster)
        if best is None or mass > best[0]:
            best = (mass, cluster, c)
    _, r_star, c = best
    return GridResult(problem, r, r_star, c, eps, N, deltas, "direct")


def _grid_points(problem, deltas, N):
    keys = [(i, m) for i in range(problem.i_star) for m in problem.M]
    for combo in product(range(N + 1), repeat=len(keys)):
        c = {key: Fraction(x, N) for key, x in zip(keys, combo)}
        ok = all(
            sum((c[(i, m)] * problem.masses[m] for m in problem.M), Fraction(0)) >= delta
            for i, delta in enumerate(deltas)
        )
        if ok:
            yield c


def _induction(problem, deltas, r, eps, N, values) -> GridResult:
    current = r
    for c in _grid_points(problem, deltas, N):
        far = [a for a in current.atoms() if not _near(values[a], c, eps)]
        if not far:
            # stuck: nothing below the current condition avoids D*
            return GridResult(problem, r, current, c, eps, N, deltas, "induction")
        current = problem.atom(far[0])
    raise InvariantViolation("grid induction ran past the last grid point")
