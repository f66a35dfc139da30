"""Finite witness construction for FAM-limit conditions."""

from .grid import GridResult, grid_refine, grid_size
from .limit import atom_integrals, limit_construct, success_integral
from .linked import AssemblyResult, LinkedWitness, QSet, assemble, fam_linked_witness, piece_limit
from .model import BlockFamily, ConditionSequence, LimitProblem, success_function
from .params import TreeParameters, empirical_parameters, guaranteed_parameters
from .tree import NodeState, WitnessTree, audit_tree, build_tree
from .witness import (
    Certificate,
    PathScore,
    Report,
    score_path,
    verify_certificate,
    verify_characterization,
    witness_search,
)

__all__ = [
    "AssemblyResult",
    "BlockFamily",
    "Certificate",
    "ConditionSequence",
    "GridResult",
    "LimitProblem",
    "LinkedWitness",
    "NodeState",
    "PathScore",
    "QSet",
    "Report",
    "TreeParameters",
    "WitnessTree",
    "assemble",
    "atom_integrals",
    "audit_tree",
    "build_tree",
    "empirical_parameters",
    "fam_linked_witness",
    "grid_refine",
    "grid_size",
    "guaranteed_parameters",
    "limit_construct",
    "piece_limit",
    "score_path",
    "success_function",
    "success_integral",
    "verify_certificate",
    "verify_characterization",
    "witness_search",
]
