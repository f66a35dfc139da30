"""Probability trees with finite levels and exact expectation calculus.

Nodes are tuples of labels (the path from the root). Successors are produced
lazily by an ``expand`` callback; once a node's successors are materialized
they never change.
"""

from __future__ import annotations

import csv
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Hashable, Mapping, Sequence

from .errors import NotMaterializedError, StructureError
from .rational import as_fraction, fmt

__all__ = [
    "ProbTree",
    "LevelRV",
    "Distribution",
    "level_measure",
    "relative_expectation",
    "expectation",
    "tower_check",
    "moments",
    "chebyshev_audit",
    "binomial_distribution",
    "binomial_tree",
    "random_tree",
]

Node = tuple
Expand = Callable[[Node, Any], Sequence[tuple]]


class ProbTree:
    """A well-pruned probability tree of a fixed height.

    ``expand(node, payload)`` returns ``(label, probability, payload)``
    triples for the successors of a non-maximal node; the probabilities must
    be non-negative rationals summing to 1.
    """

    def __init__(self, expand: Expand, height: int, root_payload: Any = None):
        if height < 0:
            raise ValueError("height must be non-negative")
        self.height = height
        self._expand = expand
        self._payload: dict[Node, Any] = {(): root_payload}
        self._children: dict[Node, list[tuple[Node, Fraction]]] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_table(cls, table: Mapping[Node, Mapping[Hashable, Any]], height: int) -> "ProbTree":
        """Explicit tree: ``table[node]`` maps child labels to probabilities."""
        table = {tuple(k): dict(v) for k, v in table.items()}

        def expand(node, _payload):
            return [(lab, p, None) for lab, p in table[node].items()]

        return cls(expand, height)

    @classmethod
    def uniform(cls, branching: int, height: int) -> "ProbTree":
        w = Fraction(1, branching)
        return cls(lambda node, _p: [(b, w, None) for b in range(branching)], height)

    def is_node(self, node: Node) -> bool:
        node = tuple(node)
        if node == ():
            return True
        if len(node) > self.height:
            return False
        parent = node[:-1]
        if not self.is_node(parent):
            return False
        return any(child == node for child, _ in self.children(parent))

    def payload(self, node: Node) -> Any:
        node = tuple(node)
        if node not in self._payload:
            if node and self.is_node(node):
                return self._payload[node]
            raise StructureError(f"{node!r} is not a node of the tree")
        return self._payload[node]

    def children(self, node: Node) -> list[tuple[Node, Fraction]]:
        """Successors of ``node`` with their conditional probabilities."""
        node = tuple(node)
        kids = self._children.get(node)
        if kids is not None:
            return kids
        if len(node) >= self.height:
            return []
        if node not in self._payload:
            raise StructureError(f"{node!r} is not a materialized node")
        with self._lock:
            kids = self._children.get(node)
            if kids is not None:
                return kids
            raw = self._expand(node, self._payload[node])
            if not raw:
                raise StructureError(f"non-maximal node {node!r} has no successors")
            kids, total, labels = [], Fraction(0), set()
            for label, prob, payload in raw:
                prob = as_fraction(prob)
                if prob < 0:
                    raise ValueError(f"negative successor probability at {node!r}")
                if label in labels:
                    raise StructureError(f"duplicate successor label {label!r}")
                labels.add(label)
                child = node + (label,)
                self._payload[child] = payload
                kids.append((child, prob))
                total += prob
            if total != 1:
                raise ValueError(f"successor probabilities at {node!r} sum to {total}")
            self._children[node] = kids
            return kids

    def level(self, h: int) -> list[Node]:
        return list(self.subtree_level_measure((), h))

    def subtree_level_measure(self, rho: Node, n: int) -> dict[Node, Fraction]:
        """Level ``n`` of the subtree above ``rho`` with subtree probabilities."""
        rho = tuple(rho)
        if n < 0:
            raise ValueError("relative level must be non-negative")
        if len(rho) + n > self.height:
            raise NotMaterializedError(
                f"level {len(rho) + n} is beyond the tree height {self.height}"
            )
        frontier = {rho: Fraction(1)}
        for _ in range(n):
            nxt: dict[Node, Fraction] = {}
            for node, p in frontier.items():
                for child, q in self.children(node):
                    nxt[child] = p * q
            frontier = nxt
        return frontier

    def path_probability(self, node: Node) -> Fraction:
        node = tuple(node)
        p = Fraction(1)
        for h in range(len(node)):
            for child, q in self.children(node[:h]):
                if child == node[: h + 1]:
                    p *= q
                    break
            else:
                raise StructureError(f"{node!r} is not a node of the tree")
        return p

    def sample_path(self, rng: random.Random, depth: int | None = None) -> Node:
        """Draw a node at ``depth`` (default: the last level) from the level measure.

        Sampling is exact: each step draws an integer below the common
        denominator of the successor probabilities.
        """
        depth = self.height if depth is None else depth
        node: Node = ()
        for _ in range(depth):
            kids = self.children(node)
            denom = 1
            for _, p in kids:
                denom = denom * p.denominator // _gcd(denom, p.denominator)
            draw = rng.randrange(denom)
            acc = 0
            for child, p in kids:
                acc += p.numerator * (denom // p.denominator)
                if draw < acc:
                    node = child
                    break
        return node


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def level_measure(t: ProbTree, h: int) -> dict[Node, Fraction]:
    """Probability of each node of level ``h`` (product along its path)."""
    return t.subtree_level_measure((), h)


class LevelRV:
    """A random variable on one level of a probability tree."""

    def __init__(self, tree: ProbTree, level: int, values: Mapping[Node, Any]):
        self.tree = tree
        self.level = level
        self.values = {tuple(k): as_fraction(v) for k, v in values.items()}
        expected = set(tree.level(level))
        if set(self.values) != expected:
            raise StructureError(f"values are not defined on exactly level {level}")

    @classmethod
    def from_function(cls, tree: ProbTree, level: int, fn: Callable[[Node], Any]) -> "LevelRV":
        return cls(tree, level, {node: fn(node) for node in tree.level(level)})

    @classmethod
    def constant(cls, tree: ProbTree, level: int, c) -> "LevelRV":
        return cls.from_function(tree, level, lambda _n: c)

    def __call__(self, node: Node) -> Fraction:
        return self.values[tuple(node)]

    def lift(self, level: int) -> "LevelRV":
        """The same variable read on a deeper level through restriction."""
        if level < self.level:
            raise StructureError("can only lift to a deeper level")
        return LevelRV.from_function(self.tree, level, lambda n: self.values[n[: self.level]])

    def _combine(self, other, op) -> "LevelRV":
        if isinstance(other, LevelRV):
            if other.tree is not self.tree or other.level != self.level:
                raise StructureError("random variables live on different levels")
            return LevelRV(self.tree, self.level, {n: op(v, other.values[n]) for n, v in self.values.items()})
        c = as_fraction(other)
        return LevelRV(self.tree, self.level, {n: op(v, c) for n, v in self.values.items()})

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y)

    def __mul__(self, other):
        return self._combine(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def distribution(self) -> "Distribution":
        probs = level_measure(self.tree, self.level)
        out: dict[Fraction, Fraction] = {}
        for node, v in self.values.items():
            out[v] = out.get(v, Fraction(0)) + probs[node]
        return Distribution(out)

    def to_csv(self, path) -> None:
        probs = level_measure(self.tree, self.level)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "probability", "value"])
            for node in sorted(probs, key=repr):
                w.writerow([_node_text(node), fmt(probs[node]), fmt(self.values[node])])


def _node_text(node: Node) -> str:
    return "/".join(str(lab) for lab in node)


class Distribution:
    """A finitely supported law on the rationals: value -> probability."""

    def __init__(self, masses: Mapping[Any, Any]):
        self.masses = {as_fraction(v): as_fraction(p) for v, p in masses.items() if as_fraction(p) != 0}
        if sum(self.masses.values(), Fraction(0)) != 1:
            raise ValueError("probabilities do not sum to 1")

    def distribution(self) -> "Distribution":
        return self

    def items(self):
        return sorted(self.masses.items())

    def prob(self, predicate: Callable[[Fraction], bool]) -> Fraction:
        return sum((p for v, p in self.masses.items() if predicate(v)), Fraction(0))

    def mean(self) -> Fraction:
        return sum((v * p for v, p in self.masses.items()), Fraction(0))

    def variance(self) -> Fraction:
        mu = self.mean()
        return sum((v * v * p for v, p in self.masses.items()), Fraction(0)) - mu * mu


def relative_expectation(t: ProbTree, X: LevelRV, rho: Node) -> Fraction:
    """Expectation of ``X`` over the nodes of its level that extend ``rho``."""
    rho = tuple(rho)
    if X.tree is not t:
        raise StructureError("random variable belongs to another tree")
    n = X.level - len(rho)
    if n < 0 or not t.is_node(rho):
        raise StructureError(f"{rho!r} is not a node below level {X.level}")
    sub = t.subtree_level_measure(rho, n)
    return sum((p * X.values[eta] for eta, p in sub.items()), Fraction(0))


def expectation(X: LevelRV) -> Fraction:
    return relative_expectation(X.tree, X, ())


@dataclass
class TowerReport:
    holds: bool
    rows: list  # (rho, direct, iterated)


def tower_check(t: ProbTree, X: LevelRV, h: int, n: int) -> TowerReport:
    """Compare ``E[X : rho]`` with ``E[E[X : eta] : rho]`` for every ``rho`` on level ``h``.

    ``eta`` ranges over level ``h + n``; requires ``0 < n < X.level - h``.
    """
    m = X.level - h
    if not 0 < n < m:
        raise ValueError(f"need 0 < n < m, got n={n}, m={m}")
    inner = LevelRV.from_function(t, h + n, lambda eta: relative_expectation(t, X, eta))
    rows = []
    for rho in t.level(h):
        direct = relative_expectation(t, X, rho)
        iterated = relative_expectation(t, inner, rho)
        rows.append((rho, direct, iterated))
    return TowerReport(all(d == i for _, d, i in rows), rows)


@dataclass(frozen=True)
class Moments:
    mean: Fraction
    variance: Fraction
    covariance: Fraction


def moments(X, Y=None) -> Moments:
    """``(E[X], Var[X], Cov[X, Y])`` with ``Y`` defaulting to ``X``."""
    if Y is None:
        d = X.distribution()
        mean = d.mean()
        var = d.variance()
        return Moments(mean, var, var)
    if not isinstance(X, LevelRV) or not isinstance(Y, LevelRV):
        raise StructureError("covariance needs two random variables on one level")
    ex, ey = expectation(X), expectation(Y)
    cov = expectation(X * Y) - ex * ey
    var = expectation(X * X) - ex * ex
    return Moments(ex, var, cov)


@dataclass(frozen=True)
class ChebyshevAudit:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def chebyshev_audit(X, eps) -> ChebyshevAudit:
    """Exact tail ``Pr[|X - E X| >= eps]`` against ``Var[X] / eps^2``."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = X.distribution()
    mu = d.mean()
    lhs = d.prob(lambda v: abs(v - mu) >= eps)
    rhs = d.variance() / (eps * eps)
    return ChebyshevAudit(lhs, rhs, lhs <= rhs)


def binomial_tree(n: int, p) -> ProbTree:
    """``n`` independent trials: every node has successors 1 (prob p) and 0."""
    p = as_fraction(p)
    kids = [(1, p, None), (0, 1 - p, None)]
    return ProbTree(lambda node, _pl: kids, n)


def binomial_distribution(n: int, p) -> Distribution:
    """Law of the success count on level ``n`` of :func:`binomial_tree`.

    The count only depends on how many 1-labels a path carries, so the level
    measure is pushed forward one level at a time instead of materializing
    all ``2^n`` paths.
    """
    p = as_fraction(p)
    law = {0: Fraction(1)}
    for _ in range(n):
        nxt: dict[int, Fraction] = {}
        for c, q in law.items():
            nxt[c] = nxt.get(c, Fraction(0)) + q * (1 - p)
            nxt[c + 1] = nxt.get(c + 1, Fraction(0)) + q * p
        law = nxt
    return Distribution(law)


def random_tree(rng: random.Random, height: int, max_branching: int, max_den: int = 12) -> ProbTree:
    """A fully random finite tree with rational successor weights."""
    table: dict[Node, dict] = {}

    def build(node):
        if len(node) >= height:
            return
        k = rng.randint(1, max_branching)
        raw = [rng.randint(1, max_den) for _ in range(k)]
        total = sum(raw)
        table[node] = {b: Fraction(w, total) for b, w in enumerate(raw)}
        for b in range(k):
            build(node + (b,))

    build(())
    return ProbTree.from_table(table, height)
