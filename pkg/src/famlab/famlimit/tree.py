"""The lazily expanded witness tree.

Even depths choose a block ``m`` with probability ``a_m``. Odd depths pick a
fresh finite ``u`` inside that block whose uniform average tracks the block
average of every success function, split the current condition along the
sequence entries of ``u`` and move to one of the pieces ``y`` together with an
index ``k`` in ``u``, with probability ``mu_r(y) / |u|``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from ..boolalg import Element
from ..errors import DensityFailure
from ..fam import uniform_approx_select
from ..ptree import LevelRV, ProbTree, moments, relative_expectation
from ..rational import fmt
from .grid import GridResult
from .model import LimitProblem
from .params import TreeParameters

__all__ = ["NodeState", "Split", "WitnessTree", "build_tree", "audit_tree", "refine"]

# sub-elements are scanned literally only for pieces with at most this many atoms
SCAN_LIMIT = 14


@dataclass(frozen=True)
class NodeState:
    r: Element
    used: frozenset
    m: int | None = None
    k: int | None = None
    hits: tuple | None = None  # (i, label) pairs with r <= r^i_label


@dataclass(frozen=True)
class Split:
    """How an odd-depth node was expanded."""

    u: tuple
    pieces: tuple  # (hits, y, mu_r(y))


def refine(start: Element, generators: Iterable[Element]) -> list[Element]:
    """Atoms of the algebra below ``start`` generated by the meets with ``generators``."""
    blocks = [start]
    for g in generators:
        nxt = []
        for b in blocks:
            inside = b.bits & g.bits
            if inside:
                nxt.append(Element(b.size, inside))
            outside = b.bits & ~g.bits
            if outside:
                nxt.append(Element(b.size, outside))
        blocks = nxt
    return blocks


class WitnessTree:
    def __init__(
        self,
        problem: LimitProblem,
        grid: GridResult,
        params: TreeParameters,
        F: Iterable[int] = (),
    ):
        self.problem = problem
        self.grid = grid
        self.params = params
        self.F = frozenset(int(k) for k in F)
        self.splits: dict = {}
        root = NodeState(grid.r_star, self.F)
        self.tree = ProbTree(self._expand, params.h_star, root)

    @property
    def height(self) -> int:
        return self.params.h_star

    def _expand(self, node: tuple, state: NodeState):
        p = self.problem
        if len(node) % 2 == 0:
            return [(m, p.masses[m], replace(state, m=m)) for m in p.M]
        split = self.split(node, state)
        share = Fraction(1, len(split.u))
        out = []
        for hits, y, weight in split.pieces:
            child_r = self.choose_condition(y)
            for k in split.u:
                child = NodeState(child_r, state.used | {k}, state.m, k, hits)
                out.append(((hits, k), weight * share, child))
        return out

    def split(self, node: tuple, state: NodeState) -> Split:
        got = self.splits.get(node)
        if got is not None:
            return got
        p = self.problem
        fs = [p.success(i, state.r) for i in range(p.i_star)]
        u = uniform_approx_select(
            fs, p.fam, p.partition.block_set(state.m), F=state.used, eps=self.params.grid_tolerance
        )
        labels = [lab for k in u for lab in p.blocks.labels(k)]
        gens = list(dict.fromkeys(state.r & seq.element(lab) for seq in p.sequences for lab in labels))
        mr = p.algebra.measure(state.r)
        pieces = []
        for y in refine(state.r, gens):
            hits = tuple(
                (i, lab) for i, seq in enumerate(p.sequences) for lab in labels if y.leq(seq.element(lab))
            )
            pieces.append((hits, y, p.algebra.measure(y) / mr))
        split = Split(tuple(u), tuple(pieces))
        self.splits[node] = split
        return split

    def choose_condition(self, y: Element) -> Element:
        """A member of ``D*`` below ``y``: ``y`` itself when possible, else the heaviest one found."""
        grid = self.grid
        if grid.in_dstar(y):
            return y
        if y.count() <= SCAN_LIMIT:
            alg = self.problem.algebra
            for x in sorted(y.below(), key=lambda x: (-alg.measure(x), -x.bits)):
                if grid.in_dstar(x):
                    return x
        else:
            good = [a for a in y.atom_elements() if grid.in_dstar(a)]
            if good:
                joined = Element(y.size, 0)
                for a in good:
                    joined = joined | a
                if grid.in_dstar(joined):
                    return joined
                return max(good, key=lambda a: (self.problem.algebra.measure(a), -a.bits))
        raise DensityFailure(f"no member of D* below {y!r}; the grid result does not fit this tree")

    # quantities read off nodes

    def state(self, node: tuple) -> NodeState:
        return self.tree.payload(node)

    def chosen_indices(self, node: tuple) -> list[int]:
        """The ``k`` picked at each odd step along ``node``."""
        return [node[j][1] for j in range(1, len(node), 2)]

    def z_value(self, node: tuple, i: int) -> Fraction:
        """Strict success of the node's condition at the index chosen last."""
        st = self.state(node)
        return self.problem.strict_success(i, st.r)(st.k)


def build_tree(
    grid: GridResult,
    problem: LimitProblem,
    params: TreeParameters,
    F: Iterable[int] = (),
) -> WitnessTree:
    if grid.eps > params.grid_tolerance:
        raise ValueError(
            f"grid tolerance {grid.eps} is coarser than eps_star/4 = {params.grid_tolerance}"
        )
    return WitnessTree(problem, grid, params, F)


def audit_tree(wt: WitnessTree) -> list[dict]:
    """Exact checks of the level calculus on a fully expanded (small) tree.

    Rows cover: piece weights summing to 1 at each odd node, the conditional
    mean of the next success value equalling the average of the success
    function over ``u``, its distance to the grid values, and the covariance
    of success values at different depths.
    """
    p, t, h_star = wt.problem, wt.tree, wt.height
    rows = []

    def row(check, lhs, rhs, relation):
        holds = {"==": lhs == rhs, "<": lhs < rhs, "<=": lhs <= rhs}[relation]
        rows.append({"check": check, "lhs": lhs, "rhs": rhs, "relation": relation, "holds": holds})

    z = {}
    for h in range(2, h_star + 1, 2):
        for i in range(p.i_star):
            z[(h, i)] = LevelRV.from_function(t, h, lambda n, i=i: wt.z_value(n, i))

    for h in range(1, h_star, 2):
        for node in t.level(h):
            st = wt.state(node)
            t.children(node)
            split = wt.split(node, st)
            total = sum((w for _, _, w in split.pieces), Fraction(0))
            row(f"piece weights at {node!r}", total, Fraction(1), "==")
            for i in range(p.i_star):
                f = p.success(i, st.r)
                avg = sum((f(k) for k in split.u), Fraction(0)) / len(split.u)
                got = relative_expectation(t, z[(h + 1, i)], node)
                row(f"conditional mean of Z[{h + 1},{i}] at {node!r}", got, avg, "==")
                c_here = p.block_average(i, st.m, st.r)
                row(f"u-average vs block average, {i} at {node!r}", abs(avg - c_here), wt.grid.eps, "<")
                row(
                    f"conditional mean vs grid value, {i} at {node!r}",
                    abs(got - wt.grid.c[(i, st.m)]),
                    wt.params.eps_star / 2,
                    "<",
                )
    for i in range(p.i_star):
        for j in range(2, h_star + 1, 2):
            for h in range(j + 2, h_star + 1, 2):
                cov = moments(z[(j, i)].lift(h), z[(h, i)]).covariance
                row(f"Cov[Z{j},Z{h}] for sequence {i}", cov, wt.params.eps_star, "<=")
        y = None
        for h in range(2, h_star + 1, 2):
            term = z[(h, i)].lift(h_star) * Fraction(2, h_star)
            y = term if y is None else y + term
        var = moments(y).variance
        row(f"Var[Y] for sequence {i}", var, Fraction(2, h_star) + wt.params.eps_star, "<=")
    return rows


def audit_json(rows: list[dict]) -> list[dict]:
    return [
        {**r, "lhs": fmt(r["lhs"]), "rhs": fmt(r["rhs"])} for r in rows
    ]
