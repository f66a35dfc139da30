"""Intersection numbers of finite families of nonzero elements.

For a sequence ``q_0, ..., q_{n-1}`` the size of the largest subfamily with a
nonzero meet is the largest number of ``q_i`` sharing a common atom. The
intersection number of ``Q`` is the infimum of that size divided by ``n``.
Upper bounds come from explicit sequences, lower bounds from a probability
measure on the atoms giving every member of ``Q`` mass at least ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .boolalg import AtomSpace, Element, MeasuredAlgebra, iter_bits
from .rational import as_fraction, fmt
from .simplex import maximize

__all__ = [
    "IntersectionQuery",
    "UpperBound",
    "KelleyBound",
    "SandwichResult",
    "istar",
    "minimal_elements",
    "threshold_family",
    "threshold_minimal",
    "int_upper",
    "kelley_lower",
    "sandwich",
]


@dataclass
class IntersectionQuery:
    algebra: MeasuredAlgebra | AtomSpace
    Q: list
    max_len: int = 6

    def __post_init__(self):
        size = self.algebra.size
        self.Q = list(dict.fromkeys(self.Q))
        if not self.Q:
            raise ValueError("Q must contain at least one element")
        for q in self.Q:
            if not isinstance(q, Element) or q.size != size:
                raise ValueError("members of Q must be elements of the algebra")
            if q.is_zero():
                raise ValueError("members of Q must be nonzero")
        if self.max_len < 1:
            raise ValueError("max_len must be at least 1")

    @property
    def size(self) -> int:
        return self.algebra.size


def istar(seq: Sequence[Element]) -> int:
    """Largest number of entries of ``seq`` with a nonzero common meet."""
    if not seq:
        raise ValueError("istar is undefined on the empty sequence")
    counts = [0] * seq[0].size
    for q in seq:
        if q.is_zero():
            raise ValueError("sequence entries must be nonzero")
        for a in iter_bits(q.bits):
            counts[a] += 1
    return max(counts)


def minimal_elements(Q: Iterable[Element]) -> list[Element]:
    """The distinct members of ``Q`` with no strictly smaller member in ``Q``."""
    items = sorted(set(Q), key=lambda e: (e.count(), e.bits))
    out: list[Element] = []
    for q in items:
        if not any(p.leq(q) for p in out):
            out.append(q)
    return out


def threshold_family(algebra: MeasuredAlgebra, delta, s: Element | None = None) -> list[Element]:
    """Every element ``b`` with ``mu_s(b) >= delta`` (all elements; small algebras only)."""
    delta = as_fraction(delta)
    s = algebra.top() if s is None else s
    ms = algebra.measure(s)
    return [b for b in algebra.space.elements() if algebra.measure(b & s) >= delta * ms]


def threshold_minimal(algebra: MeasuredAlgebra, delta, s: Element | None = None) -> list[Element]:
    """Minimal elements of ``{b : mu_s(b) >= delta}``; they all lie below ``s``."""
    delta = as_fraction(delta)
    s = algebra.top() if s is None else s
    target = delta * algebra.measure(s)
    atoms = s.atoms()
    w = [algebra.weights[a] for a in atoms]
    if target <= 0:
        return []
    tail = [Fraction(0)] * (len(atoms) + 1)
    for j in range(len(atoms) - 1, -1, -1):
        tail[j] = tail[j + 1] + w[j]
    out = []

    def dfs(j, bits, mass, lightest):
        if mass >= target:
            if mass - lightest < target:
                out.append(Element(algebra.size, bits))
            return
        if j == len(atoms) or mass + tail[j] < target:
            return
        dfs(j + 1, bits | (1 << atoms[j]), mass + w[j], min(lightest, w[j]))
        dfs(j + 1, bits, mass, lightest)

    dfs(0, 0, Fraction(0), Fraction(2))
    return out


@dataclass
class UpperBound:
    value: Fraction
    witness: list  # the minimizing sequence
    per_length: dict  # n -> min istar / n
    partial: bool
    nodes: int


def int_upper(query: IntersectionQuery, budget: int = 2_000_000, bound_weights=None) -> UpperBound:
    """``min istar(q)/n`` over sequences from ``Q`` of length ``n <= max_len``.

    Only minimal members of ``Q`` are used (shrinking an entry never raises
    ``istar``) and sequences are enumerated as multisets. Branches are cut
    with ``max_a count(a) >= sum_a w_a count(a)`` for a probability ``w`` on
    the atoms (``bound_weights``; defaults to the Kelley optimum). When the
    node budget runs out the best values found so far are returned with
    ``partial`` set.
    """
    size = query.size
    Q = minimal_elements(query.Q)
    inc = [list(iter_bits(q.bits)) for q in Q]
    if bound_weights is None:
        bound_weights = kelley_lower(query).measure
    w = [as_fraction(x) for x in bound_weights]
    qw = [sum((w[a] for a in atoms), Fraction(0)) for atoms in inc]
    # lighter members first, so good sequences turn up early
    order = sorted(range(len(Q)), key=lambda j: (qw[j], Q[j].bits))
    Q = [Q[j] for j in order]
    inc = [inc[j] for j in order]
    qw = [qw[j] for j in order]
    min_qw = min(qw)

    nodes = 0
    partial = False
    per_length: dict[int, Fraction] = {}
    best_overall = None
    best_seq: list = []

    for n in range(1, query.max_len + 1):
        best_k, best_ms = _greedy(inc, size, n)
        counts = [0] * size
        chosen: list[int] = []
        exhausted = False

        def dfs(start, depth, cur_max, cur_w):
            nonlocal best_k, best_ms, nodes, exhausted
            if exhausted:
                return
            nodes += 1
            if nodes > budget:
                exhausted = True
                return
            rem = n - depth
            if rem == 0:
                if cur_max < best_k:
                    best_k, best_ms = cur_max, list(chosen)
                return
            lb = max(cur_max, math.ceil(cur_w + rem * min_qw))
            if lb >= best_k:
                return
            for j in range(start, len(inc)):
                if cur_w + qw[j] + (rem - 1) * min_qw > best_k - 1:
                    break  # members are sorted by weight
                atoms = inc[j]
                new_max = cur_max
                for a in atoms:
                    counts[a] += 1
                    if counts[a] > new_max:
                        new_max = counts[a]
                if new_max < best_k:
                    chosen.append(j)
                    dfs(j, depth + 1, new_max, cur_w + qw[j])
                    chosen.pop()
                for a in atoms:
                    counts[a] -= 1
                if exhausted:
                    return

        dfs(0, 0, 0, Fraction(0))
        partial = partial or exhausted
        per_length[n] = Fraction(best_k, n)
        if best_overall is None or per_length[n] < best_overall:
            best_overall = per_length[n]
            best_seq = [Q[j] for j in best_ms]
        if exhausted:
            break
    return UpperBound(best_overall, best_seq, per_length, partial, nodes)


def _greedy(inc, size, n):
    """A starting sequence: repeatedly add the member keeping the peak count lowest."""
    counts = [0] * size
    seq = []
    for _ in range(n):
        best = None
        for j, atoms in enumerate(inc):
            peak = max(counts[a] + 1 for a in atoms)
            load = sum(counts[a] for a in atoms)
            key = (peak, load, j)
            if best is None or key < best:
                best = key
        j = best[2]
        for a in inc[j]:
            counts[a] += 1
        seq.append(j)
    return max(counts), seq


@dataclass
class KelleyBound:
    value: Fraction
    measure: list  # optimal atom weights


def kelley_lower(query: IntersectionQuery, batch: int | None = None) -> KelleyBound:
    """Best ``t`` such that some probability ``w`` on the atoms has ``w(q) >= t`` for all ``q``.

    Solved through the packing program ``max sum z_q`` subject to
    ``sum_{q containing a} z_q <= 1`` for every atom ``a``: its optimum ``V``
    equals ``1/t`` and its dual solution divided by ``V`` is an optimal ``w``.
    The program has one row per atom but possibly very many columns, so it is
    solved over a growing working set of columns: after each exact solve,
    every member ``q`` with dual weight ``y(q) < 1`` is a column that could
    still improve the value, and the most violated ones are added.
    """
    size = query.size
    Q = query.Q
    atoms_of = [list(iter_bits(q.bits)) for q in Q]
    batch = 2 * size if batch is None else batch
    working = [0]
    in_working = {0}
    while True:
        A = [[1 if (Q[j].bits >> a) & 1 else 0 for j in working] for a in range(size)]
        res = maximize([1] * len(working), A, [1] * size)
        denom = 1
        for y in res.y:
            denom = denom * y.denominator // math.gcd(denom, y.denominator)
        yi = [int(y * denom) for y in res.y]
        violated = []
        for j, atoms in enumerate(atoms_of):
            total = 0
            for a in atoms:
                total += yi[a]
            if total < denom:
                violated.append((total, j))
        if not violated:
            break
        violated.sort()
        added = 0
        for _, j in violated:
            if j not in in_working:
                working.append(j)
                in_working.add(j)
                added += 1
                if added == batch:
                    break
        if added == 0:
            raise AssertionError("column generation stalled on a column already in use")
    t = 1 / res.value
    w = [y / res.value for y in res.y]
    if sum(w) != 1 or any(x < 0 for x in w):
        raise AssertionError("dual solution is not a probability vector")
    got = min(sum((w[a] for a in atoms), Fraction(0)) for atoms in atoms_of)
    if got != t:
        raise AssertionError(f"dual measure certifies {got}, primal says {t}")
    return KelleyBound(t, w)


@dataclass
class SandwichResult:
    upper: Fraction
    lower: Fraction
    witness: list
    measure: list
    per_length: dict
    partial: bool = False
    closed: bool = field(init=False)

    def __post_init__(self):
        self.closed = self.upper == self.lower

    def to_json(self) -> dict:
        return {
            "upper": fmt(self.upper),
            "lower": fmt(self.lower),
            "closed": self.closed,
            "partial": self.partial,
            "witness": [q.atoms() for q in self.witness],
            "measure": [fmt(x) for x in self.measure],
            "per_length": {str(n): fmt(v) for n, v in sorted(self.per_length.items())},
            "lower_le_upper": self.lower <= self.upper,
        }


def sandwich(query: IntersectionQuery, budget: int = 2_000_000) -> SandwichResult:
    low = kelley_lower(query)
    up = int_upper(query, budget=budget, bound_weights=low.measure)
    return SandwichResult(up.value, low.value, up.witness, low.measure, up.per_length, up.partial)
