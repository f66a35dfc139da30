"""Linked pieces ``Q_{s,eps} = {b : mu_s(b) >= 1 - eps}`` and the full witness pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from ..boolalg import Element, MeasuredAlgebra
from ..errors import CoverageError, PreconditionError
from ..intnum import IntersectionQuery, kelley_lower, threshold_minimal
from ..rational import as_fraction, fmt
from .grid import grid_refine
from .limit import limit_construct
from .model import ConditionSequence, LimitProblem
from .params import TreeParameters
from .tree import build_tree
from .witness import Certificate, Report, verify_characterization, witness_search

__all__ = ["QSet", "LinkedWitness", "fam_linked_witness", "AssemblyResult", "assemble", "piece_limit"]


class QSet:
    """Elements whose conditional measure inside ``s`` is at least ``1 - eps``."""

    def __init__(self, algebra: MeasuredAlgebra, s: Element, eps):
        self.algebra = algebra
        self.s = s
        self.eps = as_fraction(eps)
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie strictly between 0 and 1")
        if s.is_zero():
            raise ValueError("s must be nonzero")
        self._threshold = (1 - self.eps) * algebra.measure(s)
        self._minimal = None

    def __contains__(self, b: Element) -> bool:
        return self.algebra.measure(b & self.s) >= self._threshold

    def minimal_elements(self) -> list[Element]:
        if self._minimal is None:
            self._minimal = threshold_minimal(self.algebra, 1 - self.eps, self.s)
        return self._minimal

    def elements(self) -> Iterator[Element]:
        for b in self.algebra.space.elements():
            if b in self:
                yield b

    def kelley(self):
        query = IntersectionQuery(self.algebra, self.minimal_elements(), 1)
        return kelley_lower(query)


@dataclass
class LinkedWitness:
    algebra: MeasuredAlgebra
    S: list
    eps_grid: list
    qsets: dict  # (s index, eps) -> QSet
    kelley: dict  # (s index, eps) -> lower bound
    coverage: dict  # eps -> number of nonzero elements checked

    def qset(self, s_index: int, eps) -> QSet:
        return self.qsets[(s_index, as_fraction(eps))]

    def limit(self, problem: LimitProblem, seq: ConditionSequence, s_index: int, eps) -> Element:
        """The limit condition of ``seq`` for the piece ``Q_{s,eps}``."""
        return piece_limit(problem, seq, self.qset(s_index, eps))

    def kelley_ok(self) -> bool:
        return all(self.kelley[(j, e)] >= 1 - e for (j, e) in self.kelley)

    def to_json(self) -> dict:
        return {
            "S": [s.atoms() for s in self.S],
            "eps_grid": [fmt(e) for e in self.eps_grid],
            "kelley": [
                {"s": j, "eps": fmt(e), "lower": fmt(v), "holds": v >= 1 - e}
                for (j, e), v in sorted(self.kelley.items())
            ],
            "coverage": {fmt(e): n for e, n in sorted(self.coverage.items())},
        }


def fam_linked_witness(
    algebra: MeasuredAlgebra, S: Sequence[Element], eps_grid: Sequence, check_kelley: bool = True
) -> LinkedWitness:
    """Build every piece, check that each grid level covers all nonzero elements, and bound intersection numbers."""
    S = list(S)
    eps_grid = [as_fraction(e) for e in eps_grid]
    qsets = {(j, e): QSet(algebra, s, e) for j, s in enumerate(S) for e in eps_grid}

    coverage = {}
    for e in eps_grid:
        uncovered = _uncovered(algebra, S, e)
        if uncovered:
            raise CoverageError(
                f"{len(uncovered)} nonzero elements lie in no piece for eps={e}", uncovered
            )
        coverage[e] = (1 << algebra.size) - 1

    kelley = {}
    if check_kelley:
        for key, q in qsets.items():
            kelley[key] = q.kelley().value
    return LinkedWitness(algebra, S, eps_grid, qsets, kelley, coverage)


def _uncovered(algebra: MeasuredAlgebra, S: list, eps: Fraction) -> list[Element]:
    out = []
    if algebra.is_uniform:
        # compare popcounts: |b & s| >= (1 - eps) |s|
        need = [(s.bits, (1 - eps) * s.count()) for s in S]
        for bits in range(1, 1 << algebra.size):
            if not any((bits & sb).bit_count() >= t for sb, t in need):
                out.append(Element(algebra.size, bits))
        return out
    need = [(s, (1 - eps) * algebra.measure(s)) for s in S]
    for b in algebra.space.elements():
        if not any(algebra.measure(b & s) >= t for s, t in need):
            out.append(b)
    return out


@dataclass
class AssemblyResult:
    limits: list
    q: Element
    grid: object
    tree: object
    certificate: Certificate
    characterization: Report
    extras: dict = field(default_factory=dict)


def assemble(
    problem: LimitProblem,
    pieces: Sequence[QSet],
    params: TreeParameters,
    F: Sequence[int] = (),
    q: Element | None = None,
    search: dict | None = None,
) -> AssemblyResult:
    """From sequences drawn from given pieces to a verified certificate.

    Sequence ``i`` must take values in ``pieces[i]``. The limits of all
    sequences are met (together with ``q`` when given), refined on the grid
    with thresholds ``1 - eps_i``, and the witness tree is searched.
    """
    if len(pieces) != problem.i_star:
        raise ValueError(f"{len(pieces)} pieces for {problem.i_star} sequences")
    limits = [piece_limit(problem, seq, piece) for seq, piece in zip(problem.sequences, pieces)]
    start = problem.algebra.top() if q is None else q
    for lim in limits:
        start = start & lim
    if start.is_zero():
        raise PreconditionError("the limit conditions have no common part")
    eps_bar = [piece.eps for piece in pieces]
    deltas = [1 - e for e in eps_bar]
    grid = grid_refine(problem, deltas, start, params.grid_tolerance)
    wt = build_tree(grid, problem, params, F)
    cert = witness_search(wt, deltas, **dict(search or {}))
    cert.eps_bar = tuple(eps_bar)
    report = verify_characterization(cert, eps_bar, params.eps, q=start)
    return AssemblyResult(limits, start, grid, wt, cert, report)


def piece_limit(problem: LimitProblem, seq: ConditionSequence, piece: QSet) -> Element:
    """The limit condition of a sequence taking values in ``piece``."""
    for e in seq.elements():
        if e not in piece:
            raise PreconditionError(f"{e!r} is not in the piece below {piece.s!r} at eps={piece.eps}")
    return limit_construct(problem.algebra, problem.fam, problem.blocks, seq, piece.s, 1 - piece.eps)
