"""Reading experiment files and certificates.

Elements can be written as a name (``"top"``, ``"bottom"`` or a name declared
under ``algebra.elements``), a list of atom indices, ``{"atoms": [...]}``,
``{"cylinder": {coord: bit}}`` or ``{"cylinders": [{...}, ...]}`` (dyadic
algebras only). Rationals are ``"num/den"`` strings or integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .boolalg import Element, MeasuredAlgebra
from .cylinder import Clopen, Cylinder, DyadicAlgebra, embed
from .fam import IndexPartition, PeriodicFAM
from .famlimit.model import BlockFamily, ConditionSequence, LimitProblem
from .famlimit.params import TreeParameters, empirical_parameters, guaranteed_parameters
from .famlimit.witness import Certificate
from .rational import as_fraction

__all__ = [
    "ConfigError",
    "AlgebraContext",
    "load_json",
    "load_algebra",
    "load_problem",
    "load_params",
    "load_certificate",
    "dump_json",
]


class ConfigError(ValueError):
    """The experiment file is malformed."""


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dump_json(data, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


@dataclass
class AlgebraContext:
    algebra: MeasuredAlgebra
    dyadic: DyadicAlgebra | None
    spec: dict

    def element(self, ref: Any) -> Element:
        size = self.algebra.size
        if isinstance(ref, str):
            if ref == "top":
                return self.algebra.top()
            if ref == "bottom":
                return self.algebra.bottom()
            if ref in self.algebra.names:
                return self.algebra.names[ref]
            raise ConfigError(f"unknown element name {ref!r}")
        if isinstance(ref, list):
            try:
                return Element.from_atoms(size, [int(a) for a in ref])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad atom list {ref!r}: {exc}") from exc
        if isinstance(ref, dict):
            if "atoms" in ref:
                return self.element(list(ref["atoms"]))
            if "cylinder" in ref or "cylinders" in ref:
                if self.dyadic is None:
                    raise ConfigError("cylinders need a dyadic algebra")
                parts = [ref["cylinder"]] if "cylinder" in ref else ref["cylinders"]
                cyls = [Cylinder.of({int(k): int(v) for k, v in c.items()}) for c in parts]
                return embed(Clopen(tuple(cyls)), self.dyadic)
        raise ConfigError(f"cannot read element {ref!r}")


def load_algebra(spec: dict) -> AlgebraContext:
    if not isinstance(spec, dict):
        raise ConfigError("algebra must be an object")
    if "dyadic_depth" in spec:
        dy = DyadicAlgebra.of_depth(int(spec["dyadic_depth"]))
        ctx = AlgebraContext(dy.backing, dy, {"dyadic_depth": dy.depth})
        names = {}
        for name, ref in spec.get("elements", {}).items():
            names[name] = ctx.element(ref)
        dy.backing.names = names
        if names:
            ctx.spec["elements"] = {k: v.atoms() for k, v in sorted(names.items())}
        return ctx
    if "atoms" in spec:
        try:
            alg = MeasuredAlgebra.from_json(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad algebra: {exc}") from exc
        return AlgebraContext(alg, None, alg.to_json())
    raise ConfigError("algebra needs either dyadic_depth or atoms")


def _sequence(ctx: AlgebraContext, data: dict, index: int) -> ConditionSequence:
    table = tuple(tuple(ctx.element(ref) for ref in row) for row in data["table"])
    return ConditionSequence(int(data.get("period", len(table))), table, data.get("name", f"seq{index}"))


def load_problem(data: dict) -> tuple[LimitProblem, AlgebraContext]:
    try:
        ctx = load_algebra(data["algebra"])
        fam = PeriodicFAM.from_json(data.get("fam", {"period": 1}))
        partition = IndexPartition.from_json(data.get("partition", {"period": 1, "blocks": [[0]]}))
        blocks = BlockFamily.from_json(data.get("blocks", {"period": 1, "sizes": [1]}))
        seqs = [_sequence(ctx, s, i) for i, s in enumerate(data.get("sequences", []))]
        problem = LimitProblem(ctx.algebra, fam, partition, blocks, seqs, algebra_spec=ctx.spec)
    except KeyError as exc:
        raise ConfigError(f"missing field {exc}") from exc
    return problem, ctx


def load_params(data: dict, problem: LimitProblem, eps) -> TreeParameters:
    tree = data.get("tree", {})
    if tree.get("mode") == "guaranteed":
        return guaranteed_parameters(problem.masses, eps, problem.m_star, problem.i_star)
    if "h_star" not in tree:
        raise ConfigError("tree needs h_star or mode=guaranteed")
    return empirical_parameters(int(tree["h_star"]), eps, tree.get("eps_star"))


def load_certificate(data: dict) -> Certificate:
    """Rebuild a certificate (and its instance) from its JSON form."""
    try:
        problem, ctx = load_problem(data["instance"])
        p = data["tree"]
        params = TreeParameters(int(p["h_star"]), as_fraction(p["eps_star"]), as_fraction(p["eps"]), p["mode"])
        cert = Certificate(
            problem=problem,
            u=tuple(int(k) for k in data["u"]),
            r=ctx.element(data["r"]),
            r_plus=ctx.element(data["r_plus"]),
            deviations={m: as_fraction(v) for m, v in enumerate(data["deviations"])},
            averages={i: as_fraction(v) for i, v in enumerate(data["averages"])},
            eps=as_fraction(data["eps"]),
            deltas=tuple(as_fraction(d) for d in data["deltas"]),
            params=params,
            F=tuple(int(k) for k in data.get("F", [])),
            search=data.get("search", {}),
            eps_bar=None
            if data.get("eps_bar") is None
            else tuple(as_fraction(e) for e in data["eps_bar"]),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed certificate: {exc!r}") from exc
    return cert
