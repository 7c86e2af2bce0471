"""Exact census engine for permutation endomorphisms of Cuntz algebras."""

from .words import (CycleParseError, DomainError, LevelPerm, Shape, WordPerm,
                    compose, embed, format_cycles, invert, parse_cycles, rank,
                    shift_embed, unrank)
from .transducer import CollisionWitness, Transducer, decide_b, find_witness, run_prefix
from .trees import LabeledTuple, criterion_b_tuple, fiber, is_tree_with_loop, tuple_of
from .endo import (Automorphism, NotFoundUpTo, ad_compose, check_d, conjugator,
                   decide_d, endo_compose, lambda_on_unit)

__all__ = [
    "Automorphism", "CollisionWitness", "CycleParseError", "DomainError", "LabeledTuple",
    "LevelPerm", "NotFoundUpTo", "Shape", "Transducer", "WordPerm", "ad_compose", "check_d",
    "compose", "conjugator", "criterion_b_tuple", "decide_b", "decide_d", "embed",
    "endo_compose", "fiber", "find_witness", "format_cycles", "invert", "is_tree_with_loop",
    "lambda_on_unit", "parse_cycles", "rank", "run_prefix", "shift_embed", "tuple_of", "unrank",
]

__version__ = "0.1.0"
