"""Command line front end: ``famlab run|verify|suite``.

Exit codes: 0 all checks passed, 1 some check failed (or an input did not
meet a precondition), 2 the input could not be parsed, 3 an input file is
missing, 4 a search or enumeration budget ran out.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .config import (
    ConfigError,
    dump_json,
    load_algebra,
    load_certificate,
    load_json,
    load_params,
    load_problem,
)
from .cylinder import density_search, embed
from .errors import CapacityError, CoverageError, NoWitnessFound, PreconditionError, StructureError
from .famlimit import (
    QSet,
    assemble,
    audit_tree,
    build_tree,
    fam_linked_witness,
    grid_refine,
    verify_certificate,
    verify_characterization,
    witness_search,
)
from .famlimit.tree import audit_json
from .intnum import IntersectionQuery, sandwich, threshold_minimal
from .rational import as_fraction, fmt

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_MISSING = 3
EXIT_BUDGET = 4

KINDS = ("density-sweep", "intnum-sandwich", "tree-audit", "fam-limit-run", "verify-certificate")


class BudgetExhausted(Exception):
    """Raised after the partial report has been written."""


def resolve_seed(flag, spec_seed):
    """Seed from the flag, else the experiment file, else ``FAMLAB_SEED``."""
    if flag is not None:
        return int(flag)
    if spec_seed is not None:
        return int(spec_seed)
    env = os.environ.get("FAMLAB_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"FAMLAB_SEED must be an integer, got {env!r}") from exc
    return None


def _cell(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if v is None:
        return ""
    if isinstance(v, (dict, list, tuple)):
        from .suites import plain

        return json.dumps(plain(v), sort_keys=True)
    return v


def write_rows_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "lhs", "relation", "rhs", "holds"])
        for r in rows:
            w.writerow([r["check"], _cell(r["lhs"]), r["relation"], _cell(r["rhs"]), r["holds"]])


def _jsonable_rows(rows: list[dict]) -> list[dict]:
    return [{k: _cell(v) for k, v in r.items()} for r in rows]


def _row(check, lhs, relation, rhs) -> dict:
    holds = {"<": lhs < rhs, "<=": lhs <= rhs, ">=": lhs >= rhs, ">": lhs > rhs, "==": lhs == rhs}[relation]
    return {"check": check, "lhs": lhs, "relation": relation, "rhs": rhs, "holds": bool(holds)}


# experiment kinds; each returns (report body, rows, extra files)


def run_density_sweep(spec: dict, args, base: Path):
    ctx = load_algebra(spec["algebra"])
    if ctx.dyadic is None:
        raise ConfigError("density-sweep needs a dyadic algebra")
    dy, alg = ctx.dyadic, ctx.algebra
    eps_list = [as_fraction(e) for e in spec.get("eps", ["1/2"])]
    max_depth = spec.get("max_depth")
    if "elements" in spec:
        targets = [ctx.element(ref) for ref in spec["elements"]]
    else:
        targets = list(alg.space.elements())
    rows, sweeps, families = [], [], {}
    for eps in eps_list:
        found = {}
        for b in targets:
            try:
                cyl = density_search(b, dy, eps, max_depth)
            except LookupError as exc:
                raise PreconditionError(str(exc)) from exc
            found.setdefault(cyl, 0)
            found[cyl] += 1
        order = {c: j for j, (c, _) in enumerate(dy.cylinder_masks(max_depth))}
        fam_list = sorted(found, key=order.__getitem__)
        families[eps] = fam_list
        sweeps.append(
            {
                "eps": fmt(eps),
                "elements": len(targets),
                "family": [
                    {"cylinder": {str(k): v for k, v in c.as_dict().items()}, "hits": found[c]}
                    for c in fam_list
                ],
            }
        )
        rows.append(_row(f"eps={fmt(eps)}: elements placed", sum(found.values()), "==", len(targets)))
    body = {"sweeps": sweeps}
    if spec.get("linked"):
        S = list(dict.fromkeys(embed(c, dy) for eps in eps_list for c in families[eps]))
        if "S" in spec:
            S = [ctx.element(ref) for ref in spec["S"]]
        lw = fam_linked_witness(alg, S, eps_list)
        body["linked"] = lw.to_json()
        for (j, e), v in sorted(lw.kelley.items()):
            rows.append(_row(f"kelley lower bound, s={j}, eps={fmt(e)}", v, ">=", 1 - e))
    return body, rows, {}


def _query(spec: dict, ctx) -> IntersectionQuery:
    max_len = int(spec.get("max_len", 6))
    if "Q" in spec:
        Q = [ctx.element(ref) for ref in spec["Q"]]
    elif "threshold" in spec:
        t = spec["threshold"]
        s = ctx.element(t["s"]) if "s" in t else None
        Q = threshold_minimal(ctx.algebra, as_fraction(t["delta"]), s)
    else:
        raise ConfigError("intnum-sandwich needs Q or threshold")
    return IntersectionQuery(ctx.algebra, Q, max_len)


def run_intnum_sandwich(spec: dict, args, base: Path):
    ctx = load_algebra(spec["algebra"])
    query = _query(spec, ctx)
    budget = args.budget if args.budget is not None else int(spec.get("budget", 2_000_000))
    res = sandwich(query, budget=budget)
    rows = [_row("lower <= upper", res.lower, "<=", res.upper)]
    if "threshold" in spec:
        delta = as_fraction(spec["threshold"]["delta"])
        rows.append(_row("kelley lower bound >= delta", res.lower, ">=", delta))
        for n, v in sorted(res.per_length.items()):
            rows.append(_row(f"upper bound at length {n} >= delta", v, ">=", delta))
    body = {"query": {"size": query.size, "max_len": query.max_len}, "sandwich": res.to_json()}
    if res.partial:
        body["budget_exhausted"] = True
    return body, rows, {}


def _problem_and_tree(spec: dict):
    problem, ctx = load_problem(spec)
    eps = as_fraction(spec["eps"])
    params = load_params(spec, problem, eps)
    F = [int(k) for k in spec.get("F", [])]
    return problem, ctx, eps, params, F


def run_tree_audit(spec: dict, args, base: Path):
    problem, ctx, eps, params, F = _problem_and_tree(spec)
    deltas = [as_fraction(d) for d in spec["deltas"]]
    r = ctx.element(spec.get("r", "top"))
    grid = grid_refine(problem, deltas, r, params.grid_tolerance, spec.get("grid_method", "direct"))
    wt = build_tree(grid, problem, params, F)
    rows = audit_tree(wt)
    body = {"grid": grid.to_json(), "tree": params.to_json(), "audit": audit_json(rows)}
    return body, rows, {}


def run_fam_limit(spec: dict, args, base: Path):
    problem, ctx, eps, params, F = _problem_and_tree(spec)
    search = dict(spec.get("search", {}))
    mode = search.get("mode", "sampled")
    if mode == "sampled":
        seed = resolve_seed(args.seed, spec.get("seed"))
        if seed is None:
            raise ConfigError("sampled search needs a seed (--seed, a seed field, or FAMLAB_SEED)")
        search["seed"] = seed
        if args.budget is not None:
            search["budget"] = args.budget
        search["threads"] = args.threads
    else:
        search.pop("seed", None)
        search.pop("budget", None)
    r = ctx.element(spec.get("r", "top"))
    try:
        if "pieces" in spec:
            pieces = [QSet(ctx.algebra, ctx.element(p["s"]), p["eps"]) for p in spec["pieces"]]
            result = assemble(problem, pieces, params, F, q=r, search=search)
            cert, grid, report = result.certificate, result.grid, result.characterization
            limits = [x.atoms() for x in result.limits]
        else:
            deltas = [as_fraction(d) for d in spec["deltas"]]
            grid = grid_refine(problem, deltas, r, params.grid_tolerance)
            wt = build_tree(grid, problem, params, F)
            cert = witness_search(wt, deltas, **search)
            report = verify_characterization(cert, [1 - d for d in deltas], eps, q=r)
            limits = None
    except NoWitnessFound as exc:
        body = {"reason": "no witness", "stats": exc.stats, "tree": params.to_json()}
        raise BudgetExhausted(body) from exc
    rows = verify_certificate(cert).rows + report.rows
    cert_json = cert.to_json()
    body = {
        "grid": grid.to_json(),
        "tree": params.to_json(),
        "u": list(cert.u),
        "r_plus": cert.r_plus.atoms(),
        "search": cert.search,
    }
    if limits is not None:
        body["limits"] = limits
    return body, rows, {"certificate": cert_json}


def _verify(cert_data: dict):
    cert = load_certificate(cert_data)
    if cert.eps_bar is not None:
        eps_bar = list(cert.eps_bar)
    else:
        eps_bar = [1 - d for d in cert.deltas]
    rows = verify_certificate(cert).rows + verify_characterization(cert, eps_bar).rows
    body = {"u": list(cert.u), "r_plus": cert.r_plus.atoms()}
    return body, rows


def run_verify_certificate(spec: dict, args, base: Path):
    path = base / spec["certificate"]
    body, rows = _verify(load_json(path))
    return body, rows, {}


RUNNERS = {
    "density-sweep": run_density_sweep,
    "intnum-sandwich": run_intnum_sandwich,
    "tree-audit": run_tree_audit,
    "fam-limit-run": run_fam_limit,
    "verify-certificate": run_verify_certificate,
}


def _emit(out_dir: Path, stem: str, kind: str, body: dict, rows: list, extras: dict) -> bool:
    out_dir.mkdir(parents=True, exist_ok=True)
    ok = all(r["holds"] for r in rows)
    report = {"kind": kind, "input": stem, "status": "pass" if ok else "fail", **body}
    report["checks"] = _jsonable_rows(rows)
    dump_json(report, out_dir / f"{stem}.report.json")
    write_rows_csv(rows, out_dir / f"{stem}.summary.csv")
    for name, data in extras.items():
        dump_json(data, out_dir / f"{stem}.{name}.json")
    return ok


def cmd_run(args) -> int:
    path = Path(args.spec)
    spec = load_json(path)
    if not isinstance(spec, dict):
        raise ConfigError("experiment file must hold an object")
    kind = spec.get("kind")
    if kind not in RUNNERS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    out_dir = Path(args.out_dir)
    try:
        body, rows, extras = RUNNERS[kind](spec, args, path.parent)
    except BudgetExhausted as exc:
        out_dir.mkdir(parents=True, exist_ok=True)
        dump_json({"kind": kind, "input": path.stem, "status": "budget exhausted", **exc.args[0]},
                  out_dir / f"{path.stem}.report.json")
        print(f"{kind}: budget exhausted", file=sys.stderr)
        return EXIT_BUDGET
    ok = _emit(out_dir, path.stem, kind, body, rows, extras)
    failed = sum(1 for r in rows if not r["holds"])
    print(f"{kind}: {len(rows) - failed}/{len(rows)} checks passed -> {out_dir}")
    if body.get("budget_exhausted"):
        return EXIT_BUDGET
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify(args) -> int:
    path = Path(args.certificate)
    body, rows = _verify(load_json(path))
    ok = _emit(Path(args.out_dir), path.stem, "verify-certificate", body, rows, {})
    failed = sum(1 for r in rows if not r["holds"])
    print(f"verify: {len(rows) - failed}/{len(rows)} checks passed")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_suite(args) -> int:
    from .suites import SUITES, run_suite

    if args.name != "all" and args.name not in SUITES:
        raise ConfigError(f"unknown suite {args.name!r}; expected one of all, {', '.join(SUITES)}")
    names = list(SUITES) if args.name == "all" else [args.name]
    seed = resolve_seed(args.seed, None)
    seed = 0 if seed is None else seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_ok = True
    for name in names:
        res = run_suite(name, seed=seed, budget=args.budget, threads=args.threads)
        all_ok &= res.holds
        print(res.line())
        dump_json(res.to_json(), out_dir / f"suite-{name}.report.json")
        write_rows_csv(res.rows, out_dir / f"suite-{name}.summary.csv")
    return EXIT_OK if all_ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for sampled searches")
    common.add_argument("--budget", type=int, default=None, help="path or node budget")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sampled search")
    common.add_argument("--out-dir", default="famlab-out", help="directory for reports")
    parser = argparse.ArgumentParser(prog="famlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run an experiment file")
    p.add_argument("spec")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", parents=[common], help="re-check a certificate file")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("suite", parents=[common], help="run a property suite")
    p.add_argument("name")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing input: {exc.filename or exc}", file=sys.stderr)
        return EXIT_MISSING
    except (NoWitnessFound, CapacityError) as exc:
        print(f"error: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (PreconditionError, CoverageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ConfigError, StructureError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: cannot parse input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
