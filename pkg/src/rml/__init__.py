"""Recursive McCormick linearizations of multilinear programs."""

from .core import (
    Domain,
    MlpInstance,
    Monomial,
    Triple,
    TripleUniverse,
    build_universe,
    canonical_triple,
    count_variables,
    enumerate_monomial_triples,
    eta,
    is_proper,
    minimal_support,
    parse_instance,
    parse_triples,
    write_instance,
    write_triples,
)
from .linearize import GreedyTieBreak, SeqPolicy, full_linearize, greedy_linearize, seq_linearize
from .relax import build_dual, build_rml_lp, lp_bound, opt_gap, root_node_gap, shift_multipliers

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "GreedyTieBreak",
    "MlpInstance",
    "Monomial",
    "SeqPolicy",
    "Triple",
    "TripleUniverse",
    "build_dual",
    "build_rml_lp",
    "build_universe",
    "canonical_triple",
    "count_variables",
    "enumerate_monomial_triples",
    "eta",
    "full_linearize",
    "greedy_linearize",
    "is_proper",
    "lp_bound",
    "minimal_support",
    "opt_gap",
    "parse_instance",
    "parse_triples",
    "root_node_gap",
    "seq_linearize",
    "shift_multipliers",
    "write_instance",
    "write_triples",
]
