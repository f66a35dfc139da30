"""Searching the witness tree for a good path, and checking what it yields.

A path of full height gives a finite index set ``u`` (the ``k`` chosen at the
odd steps) and a condition (its last node). It is good when every block gets
roughly its share of ``u`` and the conditions' average success over ``u`` is
close to the thresholds. The certificate is re-derived from ``u`` and the
condition alone before it is handed out.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..boolalg import Element
from ..errors import CapacityError, InvariantViolation, NoWitnessFound
from ..rational import as_fraction, fmt
from .model import LimitProblem
from .params import TreeParameters
from .tree import WitnessTree

__all__ = [
    "PathScore",
    "Certificate",
    "score_path",
    "witness_search",
    "verify_certificate",
    "verify_characterization",
    "Report",
]


@dataclass(frozen=True)
class PathScore:
    u: tuple
    r: Element
    shares: dict  # m -> |u & B_m| / |u|
    averages: dict  # i -> mean strict success of r over u
    good: bool


def _shares(problem: LimitProblem, u: Sequence[int]) -> dict:
    out = {}
    for m in range(problem.m_star):
        out[m] = Fraction(sum(1 for k in u if problem.partition.block_of(k) == m), len(u))
    return out


def _averages(problem: LimitProblem, r: Element, u: Sequence[int]) -> dict:
    out = {}
    for i in range(problem.i_star):
        rho = problem.strict_success(i, r)
        out[i] = sum((rho(k) for k in u), Fraction(0)) / len(u)
    return out


def score_path(wt: WitnessTree, leaf: tuple, deltas: Sequence[Fraction]) -> PathScore:
    p, eps = wt.problem, wt.params.eps
    u = tuple(wt.chosen_indices(leaf))
    r = wt.state(leaf).r
    shares = _shares(p, u)
    averages = _averages(p, r, u)
    good = all(abs(shares[m] - p.masses[m]) < eps for m in shares) and all(
        averages[i] > deltas[i] - eps for i in averages
    )
    return PathScore(u, r, shares, averages, good)


@dataclass
class Certificate:
    problem: LimitProblem = field(repr=False)
    u: tuple
    r: Element  # the condition the search started below
    r_plus: Element
    deviations: dict  # m -> share - mass
    averages: dict  # i -> average strict success
    eps: Fraction
    deltas: tuple
    params: TreeParameters
    F: tuple = ()
    search: dict = field(default_factory=dict)
    eps_bar: tuple | None = None  # piece tolerances, when the sequences came from pieces

    def to_json(self) -> dict:
        p = self.problem
        return {
            "instance": p.to_json(),
            "u": list(self.u),
            "r": self.r.atoms(),
            "r_plus": self.r_plus.atoms(),
            "F": list(self.F),
            "eps": fmt(self.eps),
            "deltas": [fmt(d) for d in self.deltas],
            "masses": [fmt(a) for a in p.masses],
            "deviations": [fmt(self.deviations[m]) for m in range(p.m_star)],
            "averages": [fmt(self.averages[i]) for i in range(p.i_star)],
            "tree": self.params.to_json(),
            "search": self.search,
            "eps_bar": None if self.eps_bar is None else [fmt(e) for e in self.eps_bar],
        }


@dataclass
class Report:
    rows: list

    @property
    def holds(self) -> bool:
        return all(r["holds"] for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r["holds"]]

    def to_json(self) -> list:
        return [
            {
                **r,
                "lhs": fmt(r["lhs"]) if isinstance(r["lhs"], Fraction) else r["lhs"],
                "rhs": fmt(r["rhs"]) if isinstance(r["rhs"], Fraction) else r["rhs"],
            }
            for r in self.rows
        ]


def _row(rows, check, lhs, relation, rhs):
    ok = {
        "<": lambda: lhs < rhs,
        "<=": lambda: lhs <= rhs,
        ">": lambda: lhs > rhs,
        ">=": lambda: lhs >= rhs,
        "==": lambda: lhs == rhs,
    }[relation]()
    rows.append({"check": check, "lhs": lhs, "relation": relation, "rhs": rhs, "holds": bool(ok)})


def verify_certificate(cert: Certificate) -> Report:
    """Recompute everything from ``u`` and ``r_plus`` and compare with the thresholds and the record."""
    p, eps = cert.problem, cert.eps
    rows: list = []
    u = list(cert.u)
    _row(rows, "u is non-empty", len(u), ">", 0)
    _row(rows, "u has no repeated index", len(set(u)), "==", len(u))
    _row(rows, "u avoids F", len(set(u) & set(cert.F)), "==", 0)
    _row(rows, "r_plus is nonzero", cert.r_plus.count(), ">", 0)
    _row(rows, "r_plus lies below r", int(cert.r_plus.leq(cert.r)), "==", 1)
    if not u:
        return Report(rows)
    shares = _shares(p, u)
    for m in range(p.m_star):
        dev = shares[m] - p.masses[m]
        _row(rows, f"block {m}: |share - mass| < eps", abs(dev), "<", eps)
        _row(rows, f"block {m}: recorded deviation", cert.deviations.get(m), "==", dev)
    averages = _averages(p, cert.r_plus, u)
    for i in range(p.i_star):
        _row(rows, f"sequence {i}: average >= delta - eps", averages[i], ">=", cert.deltas[i] - eps)
        _row(rows, f"sequence {i}: recorded average", cert.averages.get(i), "==", averages[i])
    return Report(rows)


def verify_characterization(
    cert: Certificate,
    eps_bar: Sequence,
    eps_prime=None,
    q: Element | None = None,
) -> Report:
    """The block-share and success conditions, with the uniform measure on ``u``.

    Block shares: ``|Xi^-(u & B_m) - Xi(B_m)| < eps'`` for every block.
    Success: ``sum_k rho_i(k) Xi^-({k}) >= 1 - eps_i - eps'`` for every
    sequence, also reported with strict ``>`` for the uniform version.
    """
    p = cert.problem
    eps_prime = cert.eps if eps_prime is None else as_fraction(eps_prime)
    eps_bar = [as_fraction(e) for e in eps_bar]
    if len(eps_bar) != p.i_star:
        raise ValueError(f"{len(eps_bar)} tolerances for {p.i_star} sequences")
    rows: list = []
    u = list(cert.u)
    _row(rows, "u is non-empty", len(u), ">", 0)
    if q is not None:
        _row(rows, "q' lies below q", int(cert.r_plus.leq(q)), "==", 1)
    if not u:
        return Report(rows)
    w = Fraction(1, len(u))
    for m in range(p.m_star):
        mass = sum((w for k in u if p.partition.block_of(k) == m), Fraction(0))
        _row(rows, f"block {m}: share within eps'", abs(mass - p.masses[m]), "<", eps_prime)
    for i in range(p.i_star):
        rho = p.strict_success(i, cert.r_plus)
        total = sum((rho(k) * w for k in u), Fraction(0))
        _row(rows, f"sequence {i}: weighted success", total, ">=", 1 - eps_bar[i] - eps_prime)
        _row(rows, f"sequence {i}: weighted success, strict", total, ">", 1 - eps_bar[i] - eps_prime)
    return Report(rows)


def _certificate(wt: WitnessTree, score: PathScore, deltas, search: dict) -> Certificate:
    p = wt.problem
    cert = Certificate(
        problem=p,
        u=score.u,
        r=wt.grid.r,
        r_plus=score.r,
        deviations={m: score.shares[m] - p.masses[m] for m in range(p.m_star)},
        averages=dict(score.averages),
        eps=wt.params.eps,
        deltas=tuple(deltas),
        params=wt.params,
        F=tuple(sorted(wt.F)),
        search=search,
    )
    report = verify_certificate(cert)
    if not report.holds:
        raise InvariantViolation(f"path in the good event failed re-verification: {report.failures()}")
    return cert


def witness_search(
    wt: WitnessTree,
    deltas: Sequence,
    mode: str = "sampled",
    seed: int = 0,
    budget: int = 100_000,
    threads: int = 1,
    batch: int = 64,
    max_leaves: int = 1_000_000,
) -> Certificate:
    """Find a full-height path in the good event.

    ``exhaustive`` walks every path, reports the exact probability of the
    event and returns its first member in traversal order. ``sampled`` draws
    path ``j`` with a generator seeded by ``(seed, j)`` and returns the
    smallest ``j`` that lands in the event, so the answer does not depend on
    ``threads``.
    """
    deltas = tuple(as_fraction(d) for d in deltas)
    if len(deltas) != wt.problem.i_star:
        raise ValueError(f"{len(deltas)} thresholds for {wt.problem.i_star} sequences")
    if mode == "exhaustive":
        return _exhaustive(wt, deltas, max_leaves)
    if mode == "sampled":
        return _sampled(wt, deltas, seed, budget, threads, batch)
    raise ValueError(f"unknown search mode {mode!r}")


def _exhaustive(wt: WitnessTree, deltas, max_leaves) -> Certificate:
    t = wt.tree
    frontier = {(): Fraction(1)}
    for _ in range(wt.height):
        nxt = {}
        for node, pr in frontier.items():
            for child, q in t.children(node):
                nxt[child] = pr * q
                if len(nxt) > max_leaves:
                    raise CapacityError(f"more than {max_leaves} nodes on one level")
        frontier = nxt
    prob = Fraction(0)
    first = None
    for leaf, pr in frontier.items():
        score = score_path(wt, leaf, deltas)
        if score.good:
            prob += pr
            if first is None:
                first = score
    search = {"mode": "exhaustive", "leaves": len(frontier), "probability": fmt(prob)}
    if first is None:
        raise NoWitnessFound("no path of full height lies in the good event", {"probability": fmt(prob)})
    return _certificate(wt, first, deltas, search)


def _sampled(wt: WitnessTree, deltas, seed, budget, threads, batch) -> Certificate:
    p, eps = wt.problem, wt.params.eps
    if budget < 1:
        raise ValueError("budget must be at least one path")

    def draw(j):
        leaf = wt.tree.sample_path(random.Random(f"{seed}/{j}"))
        return j, score_path(wt, leaf, deltas)

    misses_block = {m: 0 for m in range(p.m_star)}
    misses_seq = {i: 0 for i in range(p.i_star)}
    tried = 0
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for start in range(0, budget, batch):
            idx = range(start, min(start + batch, budget))
            results = list(pool.map(draw, idx)) if pool else [draw(j) for j in idx]
            for j, score in results:
                tried += 1
                if score.good:
                    search = {"mode": "sampled", "seed": seed, "path_index": j}
                    return _certificate(wt, score, deltas, search)
                for m in misses_block:
                    if abs(score.shares[m] - p.masses[m]) >= eps:
                        misses_block[m] += 1
                for i in misses_seq:
                    if score.averages[i] <= deltas[i] - eps:
                        misses_seq[i] += 1
    finally:
        if pool:
            pool.shutdown()
    stats = {
        "paths": tried,
        "block_miss_rate": {m: fmt(Fraction(c, tried)) for m, c in misses_block.items()},
        "sequence_miss_rate": {i: fmt(Fraction(c, tried)) for i, c in misses_seq.items()},
    }
    raise NoWitnessFound(f"no good path among {tried} samples", stats)
