"""Randomized property suites with brute-force reference computations.

Each suite draws its cases from a seeded generator, checks every law
exactly and returns one row per check. ``famlab suite <name>`` runs them
from the command line; the acceptance tests call :func:`run_suite`.
"""

from __future__ import annotations

import json
import math
import random
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .boolalg import AtomSpace, Element, MeasuredAlgebra, generated_atoms
from .cylinder import DyadicAlgebra, embed
from .fam import (
    IndexPartition,
    PeriodicFAM,
    PeriodicSet,
    PeriodicSimpleFunction,
    integrate,
    partition_decompose,
    xi,
)
from .famlimit import (
    BlockFamily,
    ConditionSequence,
    LimitProblem,
    QSet,
    assemble,
    empirical_parameters,
    fam_linked_witness,
    limit_construct,
    verify_certificate,
    verify_characterization,
)
from .intnum import IntersectionQuery, sandwich, threshold_minimal
from .ptree import (
    LevelRV,
    binomial_distribution,
    binomial_tree,
    chebyshev_audit,
    expectation,
    level_measure,
    random_tree,
    tower_check,
)
from .rational import fmt, lcm_all

__all__ = ["plain", "SuiteResult", "SUITES", "run_suite", "instance_path", "random_algebra"]


def instance_path(name: str) -> Path:
    """Path of a shipped experiment file."""
    return Path(str(resources.files("famlab") / "instances" / name))


@dataclass
class SuiteResult:
    name: str
    cases: int
    rows: list
    seconds: float

    @property
    def holds(self) -> bool:
        return all(r["holds"] for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r["holds"]]

    def line(self) -> str:
        failed = len(self.failures())
        status = "PASS" if failed == 0 else "FAIL"
        return (
            f"[{status}] {self.name}: {self.cases} cases, "
            f"{len(self.rows) - failed}/{len(self.rows)} checks, {self.seconds:.2f}s"
        )

    def to_json(self) -> dict:
        # no timings, so reruns give identical files
        return {
            "suite": self.name,
            "cases": self.cases,
            "checks": len(self.rows),
            "failed": len(self.failures()),
            "status": "pass" if self.holds else "fail",
            "rows": [{k: plain(v) for k, v in r.items()} for r in self.rows],
        }


def plain(v):
    """JSON-friendly copy: rationals as "num/den", mapping keys as strings."""
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, dict):
        return {str(plain(k)): plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [plain(x) for x in v]
    return v


class _Rows:
    def __init__(self):
        self.rows = []

    def add(self, check, lhs, relation, rhs):
        holds = {
            "==": lambda: lhs == rhs,
            "<=": lambda: lhs <= rhs,
            ">=": lambda: lhs >= rhs,
            "<": lambda: lhs < rhs,
            ">": lambda: lhs > rhs,
        }[relation]()
        self.rows.append({"check": check, "lhs": lhs, "relation": relation, "rhs": rhs, "holds": bool(holds)})


def random_weights(rng: random.Random, n: int, max_int: int = 9, allow_zero: bool = False) -> list[Fraction]:
    low = 0 if allow_zero else 1
    raw = [rng.randint(low, max_int) for _ in range(n)]
    if sum(raw) == 0:
        raw[rng.randrange(n)] = 1
    total = sum(raw)
    return [Fraction(x, total) for x in raw]


def random_algebra(rng: random.Random, max_atoms: int = 10) -> MeasuredAlgebra:
    return MeasuredAlgebra(random_weights(rng, rng.randint(1, max_atoms)))


def random_element(rng: random.Random, size: int, nonzero: bool = True) -> Element:
    bits = rng.getrandbits(size)
    while nonzero and bits == 0:
        bits = rng.getrandbits(size)
    return Element(size, bits)


def _fraction(rng: random.Random, den: int = 12) -> Fraction:
    d = rng.randint(1, den)
    return Fraction(rng.randint(0, d), d)


# 1. atoms of generated subalgebras


def suite_atoms(rng: random.Random, cases: int = 500, **_) -> tuple[int, list]:
    out = _Rows()
    for c in range(cases):
        size = rng.randint(1, 1024)
        space = AtomSpace(size)
        gens = [random_element(rng, size, nonzero=False) for _ in range(rng.randint(0, 10))]
        atoms = generated_atoms(gens, space)
        overlaps, union = 0, 0
        for a in atoms:
            if union & a.bits:
                overlaps += 1
            union |= a.bits
        out.add(f"case {c}: atoms pairwise disjoint", overlaps, "==", 0)
        out.add(f"case {c}: atoms join to top", union, "==", space.full_mask)
        # reference: points with the same membership pattern form one atom
        classes: dict = {}
        for x in range(size):
            key = tuple((g.bits >> x) & 1 for g in gens)
            classes[key] = classes.get(key, 0) | (1 << x)
        out.add(
            f"case {c}: atoms equal membership classes",
            sorted(a.bits for a in atoms),
            "==",
            sorted(classes.values()),
        )
    return cases, out.rows


# 2. integration against periodic finitely additive measures


def _random_function(rng: random.Random, max_period: int = 6) -> PeriodicSimpleFunction:
    p = rng.randint(1, max_period)
    return PeriodicSimpleFunction(p, tuple(_fraction(rng) for _ in range(p)))


def _random_partition(rng: random.Random, max_period: int = 6) -> IndexPartition:
    p = rng.randint(1, max_period)
    m = rng.randint(1, p)
    owner = list(range(m)) + [rng.randrange(m) for _ in range(p - m)]
    rng.shuffle(owner)
    return IndexPartition(p, tuple(tuple(r for r in range(p) if owner[r] == j) for j in range(m)))


def _reference_integral(f, fam: PeriodicFAM, members=None) -> Fraction:
    """Sum over one common period, each index weighted by its residue class."""
    L = lcm_all([f.period, fam.period] + ([] if members is None else [members[0]]))
    total = Fraction(0)
    for k in range(L):
        if members is None or k % members[0] in members[1]:
            total += f(k) * fam.weights[k % fam.period] * fam.period / L
    return total


def suite_integration(rng: random.Random, cases: int = 200, **_) -> tuple[int, list]:
    out = _Rows()
    for c in range(cases):
        fp = rng.randint(1, 6)
        fam = PeriodicFAM(fp, tuple(random_weights(rng, fp, allow_zero=True)))
        f, g = _random_function(rng), _random_function(rng)
        a, b = _fraction(rng), _fraction(rng)
        If, Ig = integrate(f, fam), integrate(g, fam)
        out.add(f"case {c}: integral matches reference", If, "==", _reference_integral(f, fam))
        out.add(f"case {c}: linearity", integrate(f * a + g * b, fam), "==", a * If + b * Ig)
        h = _random_function(rng)
        bigger = f + h
        out.add(f"case {c}: pointwise order", f <= bigger, "==", True)
        out.add(f"case {c}: monotonicity", If, "<=", integrate(bigger, fam))
        ep = rng.randint(1, 6)
        res = {r for r in range(ep) if rng.random() < 0.5}
        extra = {rng.randrange(40) for _ in range(rng.randint(0, 3))}
        E = PeriodicSet.classes(ep, res) | extra
        pure = PeriodicSet.classes(ep, res)
        out.add(
            f"case {c}: integral of indicator is the measure",
            integrate(PeriodicSimpleFunction.indicator(pure), fam),
            "==",
            xi(fam, E),
        )
        out.add(
            f"case {c}: restricted integral matches reference",
            integrate(f, fam, E),
            "==",
            _reference_integral(f, fam, (ep, res)),
        )
        part = _random_partition(rng)
        out.add(f"case {c}: partition additivity", sum(partition_decompose(f, fam, part), Fraction(0)), "==", If)
    return cases, out.rows


# 3. probability trees


def suite_ptree(rng: random.Random, cases: int = 100, **_) -> tuple[int, list]:
    out = _Rows()
    for c in range(cases):
        height = rng.randint(1, 6)
        t = random_tree(rng, height, 4)
        for h in range(height + 1):
            out.add(f"case {c}: level {h} sums to 1", sum(level_measure(t, h).values(), Fraction(0)), "==", 1)
        leaves = level_measure(t, height)
        # product decomposition, recomputed edge by edge
        bad = 0
        for leaf, p in leaves.items():
            prod = Fraction(1)
            for j in range(len(leaf)):
                prod *= dict(t.children(leaf[:j]))[leaf[: j + 1]]
            bad += prod != p
        out.add(f"case {c}: leaf measure is the product of edge weights", bad, "==", 0)
        h = rng.randint(0, height)
        rho = rng.choice(t.level(h))
        n = height - h
        bad = 0
        for nu, q in t.subtree_level_measure(rho, n).items():
            bad += t.path_probability(rho) * q != leaves[nu]
        out.add(f"case {c}: subtree measure times path probability", bad, "==", 0)
        X = LevelRV.from_function(t, height, lambda node: _fraction(rng))
        out.add(
            f"case {c}: expectation is the leaf-weighted sum",
            expectation(X),
            "==",
            sum((p * X(node) for node, p in leaves.items()), Fraction(0)),
        )
        for h0 in range(0, height - 1):
            n0 = rng.randint(1, height - h0 - 1)
            rep = tower_check(t, X, h0, n0)
            out.add(f"case {c}: tower law from level {h0} through {h0 + n0}", rep.holds, "==", True)
    return cases, out.rows


# 4. binomial moments and Chebyshev


def suite_chebyshev(rng: random.Random, cases: int = 20, **_) -> tuple[int, list]:
    out = _Rows()
    for c in range(cases):
        n = rng.randint(1, 20)
        p = _fraction(rng, 10)
        eps = Fraction(rng.randint(1, 4 * n), 4)
        d = binomial_distribution(n, p)
        pmf = {Fraction(k): math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)}
        pmf = {k: v for k, v in pmf.items() if v}
        out.add(f"case {c}: law matches the binomial formula", dict(d.items()), "==", pmf)
        out.add(f"case {c}: mean", d.mean(), "==", n * p)
        out.add(f"case {c}: variance", d.variance(), "==", n * p * (1 - p))
        audit = chebyshev_audit(d, eps)
        tail = sum((v for k, v in pmf.items() if abs(k - n * p) >= eps), Fraction(0))
        out.add(f"case {c}: tail matches reference", audit.lhs, "==", tail)
        out.add(f"case {c}: Chebyshev bound", audit.lhs, "<=", n * p * (1 - p) / eps**2)
        if n <= 10:
            t = binomial_tree(n, p)
            X = LevelRV.from_function(t, n, lambda node: sum(node))
            out.add(f"case {c}: tree law matches", dict(X.distribution().items()), "==", pmf)
    return cases, out.rows


# 5. intersection-number sandwich


def suite_kelley(rng: random.Random, cases: int = 50, **kw) -> tuple[int, list]:
    out = _Rows()
    budget = kw.get("budget") or 2_000_000
    for c in range(cases):
        alg = random_algebra(rng, 10)
        for delta in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            tag = f"case {c}, delta={delta}"
            Q = threshold_minimal(alg, delta)
            # reference: minimal members of the threshold set by full enumeration
            members = [b for b in alg.space.elements() if alg.measure(b) >= delta]
            minimal = [b for b in members if not any(x.bits != b.bits and x.leq(b) for x in members)]
            out.add(f"{tag}: minimal threshold elements", sorted(q.bits for q in Q), "==", sorted(b.bits for b in minimal))
            res = sandwich(IntersectionQuery(alg, Q, 6), budget=budget)
            out.add(f"{tag}: search finished within budget", res.partial, "==", False)
            out.add(f"{tag}: kelley lower bound", res.lower, ">=", delta)
            w = res.measure
            out.add(f"{tag}: bound comes from a probability measure", sum(w, Fraction(0)), "==", 1)
            worst = min(sum((w[a] for a in q.atoms()), Fraction(0)) for q in Q)
            out.add(f"{tag}: measure gives every member the bound", worst, ">=", res.lower)
            for n, v in sorted(res.per_length.items()):
                out.add(f"{tag}: upper bound at length {n}", v, ">=", delta)
            out.add(f"{tag}: lower <= upper", res.lower, "<=", res.upper)
    return cases, out.rows


# 6. limit conditions


def _random_problem(rng: random.Random, max_atoms: int = 10):
    alg = random_algebra(rng, max_atoms)
    n = alg.size
    fp = rng.randint(1, 4)
    fam = PeriodicFAM(fp, tuple(random_weights(rng, fp)))
    bp = rng.randint(1, 3)
    blocks = BlockFamily(bp, tuple(rng.randint(1, 3) for _ in range(bp)))
    # rows must line up with the block sizes, so the period is a multiple of theirs
    sp = lcm_all([bp, rng.randint(1, 4)])
    table = tuple(tuple(random_element(rng, n) for _ in range(blocks.size(k))) for k in range(sp))
    seq = ConditionSequence(sp, table)
    return alg, fam, blocks, seq


def _reference_success_integral(alg, fam, blocks, seq, r) -> Fraction:
    L = lcm_all([fam.period, blocks.period, seq.period])
    total = Fraction(0)
    mr = alg.measure(r)
    for k in range(L):
        row = seq.row(k)
        f = sum((alg.measure(r & e) / mr for e in row), Fraction(0)) / len(row)
        total += f * fam.weights[k % fam.period] * fam.period / L
    return total


def suite_limit(rng: random.Random, cases: int = 20, **_) -> tuple[int, list]:
    out = _Rows()
    for c in range(cases):
        while True:
            alg, fam, blocks, seq = _random_problem(rng)
            r_star = random_element(rng, alg.size)
            mr = alg.measure(r_star)
            delta = min(alg.measure(e & r_star) / mr for e in seq.elements())
            if delta > 0:
                break
        lim = limit_construct(alg, fam, blocks, seq, r_star, delta)
        out.add(f"case {c}: limit lies below r*", lim.leq(r_star), "==", True)
        worst = min(_reference_success_integral(alg, fam, blocks, seq, x) for x in lim.below())
        out.add(f"case {c}: every part of the limit succeeds", worst, ">=", delta)
        left = [Element(alg.size, 1 << a) for a in (r_star - lim).atoms()]
        if left:
            best = max(_reference_success_integral(alg, fam, blocks, seq, a) for a in left)
            out.add(f"case {c}: atoms left out fall short", best, "<", delta)
    return cases, out.rows


# 7. end-to-end witness runs on the shipped instances


def _run_cli(spec_path: Path, out_dir: Path, *extra) -> int:
    from .cli import main

    return main(["run", str(spec_path), "--out-dir", str(out_dir), *extra])


def _check_certificate_file(out: _Rows, tag: str, path: Path) -> None:
    from .config import load_certificate

    cert = load_certificate(json.loads(path.read_text()))
    out.add(f"{tag}: certificate re-verifies", verify_certificate(cert).holds, "==", True)
    eps_bar = list(cert.eps_bar) if cert.eps_bar is not None else [1 - d for d in cert.deltas]
    out.add(f"{tag}: share and success conditions hold", verify_characterization(cert, eps_bar).holds, "==", True)


def suite_tree(rng: random.Random, budget=None, threads: int = 1, **_) -> tuple[int, list]:
    out = _Rows()
    extra = ["--threads", str(threads)]
    if budget is not None:
        extra += ["--budget", str(budget)]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        code = _run_cli(instance_path("depth4_sampled.json"), tmp, *extra)
        out.add("sampled instance: exit status", code, "==", 0)
        cert_path = tmp / "depth4_sampled.certificate.json"
        out.add("sampled instance: certificate written", cert_path.exists(), "==", True)
        if cert_path.exists():
            _check_certificate_file(out, "sampled instance", cert_path)
        code = _run_cli(instance_path("tiny_exhaustive.json"), tmp)
        out.add("exhaustive instance: exit status", code, "==", 0)
        report = json.loads((tmp / "tiny_exhaustive.report.json").read_text())
        prob = Fraction(report.get("search", {}).get("probability", "0"))
        out.add("exhaustive instance: probability of the good event", prob, ">", 0)
        cert_path = tmp / "tiny_exhaustive.certificate.json"
        if cert_path.exists():
            _check_certificate_file(out, "exhaustive instance", cert_path)
    return 2, out.rows


# 8. linked pieces on the depth-4 cylinder algebra


def _sample_member(rng: random.Random, q: QSet) -> Element:
    size = q.algebra.size
    while True:
        keep = rng.choice((0.6, 0.8, 0.95))
        atoms = [a for a in q.s.atoms() if rng.random() < keep]
        atoms += [a for a in range(size) if not (q.s.bits >> a) & 1 and rng.random() < 0.3]
        b = Element.from_atoms(size, atoms)
        if not b.is_zero() and b in q:
            return b


def piece_problem(rng: random.Random, dy: DyadicAlgebra, pieces: list) -> LimitProblem:
    """Two blocks of mass 1/2 and one sequence per piece, entries drawn from the piece."""
    fam = PeriodicFAM.uniform(2)
    part = IndexPartition(2, ((0,), (1,)))
    blocks = BlockFamily(2, (2, 1))
    seqs = []
    for j, q in enumerate(pieces):
        table = tuple(tuple(_sample_member(rng, q) for _ in range(blocks.size(k))) for k in range(4))
        seqs.append(ConditionSequence(4, table, f"piece{j}"))
    return LimitProblem(dy.backing, fam, part, blocks, seqs, algebra_spec={"dyadic_depth": dy.depth})


def suite_assembly(rng: random.Random, seed: int = 0, **_) -> tuple[int, list]:
    out = _Rows()
    dy = DyadicAlgebra.of_depth(4)
    alg = dy.backing
    S = [embed(c, dy) for c, _ in dy.cylinder_masks()]
    grid = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    lw = fam_linked_witness(alg, S, grid)
    for e in grid:
        out.add(f"eps={e}: nonzero elements covered", lw.coverage[e], "==", (1 << alg.size) - 1)
    for (j, e), v in sorted(lw.kelley.items()):
        out.add(f"s={j}, eps={e}: kelley lower bound", v, ">=", 1 - e)
    x0 = embed({0: 0}, dy)
    x1 = embed({1: 1}, dy)
    layouts = [
        [(x0, Fraction(1, 4)), (x0, Fraction(1, 4))],
        [(x0, Fraction(1, 2)), (x1, Fraction(1, 4))],
        [(alg.top(), Fraction(1, 8))],
    ]
    params = empirical_parameters(16, Fraction(1, 8))
    runs = 0
    for n, layout in enumerate(layouts):
        s_index = [S.index(s) for s, _ in layout]
        pieces = [lw.qset(j, e) for j, (_, e) in zip(s_index, layout)]
        problem = piece_problem(rng, dy, pieces)
        res = assemble(problem, pieces, params, search={"mode": "sampled", "seed": seed, "budget": 100_000})
        runs += 1
        tag = f"layout {n}"
        out.add(f"{tag}: certificate re-verifies", verify_certificate(res.certificate).holds, "==", True)
        for row in res.characterization.rows:
            out.add(f"{tag}: {row['check']}", row["lhs"], row["relation"], row["rhs"])
    return 1 + runs, out.rows


# 9. reruns reproduce files byte for byte


def suite_determinism(rng: random.Random, budget=None, **_) -> tuple[int, list]:
    out = _Rows()
    spec = instance_path("depth4_sampled.json")
    extra = [] if budget is None else ["--budget", str(budget)]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        runs = [("first", []), ("second", []), ("four threads", ["--threads", "4"])]
        for name, flags in runs:
            code = _run_cli(spec, tmp / name.replace(" ", "_"), *extra, *flags)
            out.add(f"{name} run: exit status", code, "==", 0)
        ref = tmp / "first"
        for name, _ in runs[1:]:
            other = tmp / name.replace(" ", "_")
            for fname in ("depth4_sampled.certificate.json", "depth4_sampled.report.json", "depth4_sampled.summary.csv"):
                a, b = ref / fname, other / fname
                same = a.exists() and b.exists() and a.read_bytes() == b.read_bytes()
                out.add(f"{name} run: {fname} identical", same, "==", True)
    return len(runs), out.rows


SUITES = {
    "atoms": suite_atoms,
    "integration": suite_integration,
    "ptree": suite_ptree,
    "chebyshev": suite_chebyshev,
    "kelley": suite_kelley,
    "limit": suite_limit,
    "tree": suite_tree,
    "assembly": suite_assembly,
    "determinism": suite_determinism,
}


def run_suite(name: str, seed: int = 0, budget=None, threads: int = 1) -> SuiteResult:
    fn = SUITES[name]
    rng = random.Random(f"{name}/{seed}")
    start = time.perf_counter()
    cases, rows = fn(rng, seed=seed, budget=budget, threads=threads)
    return SuiteResult(name, cases, rows, time.perf_counter() - start)
