"""Verb argument conceptualization over an isA taxonomy."""

from .evaluation import EvalPair, generate_swaps, identify, score
from .extraction import ArgumentRecord, DepToken, PatternKey, expand_phrase, extract_instances
from .solver import ConceptGraph, Solution, build_concept_graph, solve_bb, solve_bruteforce
from .taxonomy import Taxonomy, load_taxonomy, normalize
from .weighting import binary_mi, concept_weight, pattern_entropy, quality

__version__ = "0.1.0"
