"""Packing constructions for digraphs near Wojda's conjecture.

>>> from wojda import Digraph, sum_pack
>>> cert = sum_pack(Digraph(3, [(0, 1), (1, 2)]), Digraph(3, [(0, 1), (1, 2)]))
>>> cert.is_packing
True
"""

from .decomposition import ForestDecomposition, check_claim_cl1, decompose, prefix_forest
from .digraph import (
    DegreeOrder,
    Digraph,
    Injection,
    PackingCertificate,
    check_prop_deg,
    collision_arcs,
    degree_order,
    union_injections,
)
from .forestpack import ForestPackRequest, check_conditions, forest_pack
from .nearpack import (
    NearPackInstance,
    conditional_expected_collisions,
    expected_collisions,
    near_pack,
    sum_pack,
)
from .search import MuResult, SearchBudget, exhaustive_pack, mu_search
from .witness import WitnessPair, build_witness, verify_witness_exhaustive, verify_witness_structural
from .wojda import CaseTrace, RegimeParams, find_low_degree_independent, repair_two_near, wojda_pack

__all__ = [
    "CaseTrace",
    "DegreeOrder",
    "Digraph",
    "ForestDecomposition",
    "ForestPackRequest",
    "Injection",
    "MuResult",
    "NearPackInstance",
    "PackingCertificate",
    "RegimeParams",
    "SearchBudget",
    "WitnessPair",
    "build_witness",
    "check_claim_cl1",
    "check_conditions",
    "check_prop_deg",
    "collision_arcs",
    "conditional_expected_collisions",
    "decompose",
    "degree_order",
    "exhaustive_pack",
    "expected_collisions",
    "find_low_degree_independent",
    "forest_pack",
    "mu_search",
    "near_pack",
    "prefix_forest",
    "repair_two_near",
    "sum_pack",
    "union_injections",
    "verify_witness_exhaustive",
    "verify_witness_structural",
    "wojda_pack",
]
