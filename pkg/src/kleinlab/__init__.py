"""Limit sets of finitely generated Moebius groups: exact-ish sphere
geometry, marked free groups, circle-image search, gasket verification, and
boundary-decomposition combinatorics."""

__version__ = "0.1.0"

from .mobius import (
    INFINITY,
    Circline,
    DegenerateMatrixError,
    MapClass,
    MoebiusMap,
    chordal_distance,
    moebius_mapping,
)
from .groups import (
    Alphabet,
    GroupPresentation,
    MarkedGroup,
    check_relations,
    enumerate_reduced_words,
    free_reduce,
    load_marking,
    load_presentation,
    parse_word,
    reduced_word_count,
    solve_parabolic_commutator,
)
from .gasket import (
    CirclePacking,
    OrientedCircle,
    descartes_residual,
    detect_tangencies,
    is_apollonian_like,
    load_packing,
    dump_packing,
    normalize_to_standard_gasket,
    standard_gasket,
    tangency_point,
    tangent_quadruple_flip,
)
from .limitset import (
    DfsConfig,
    LimitSetCloud,
    Rectangle,
    benchmark_word_traversal,
    hausdorff_distance,
    limit_points_by_fixed_points,
    limit_set_dfs,
    render,
)
from .decomposition import (
    FiniteMetricSpace,
    GraphOfGroups,
    SimpleGraph,
    TreeSystem,
    abc_example,
    cut_pairs,
    gromov_product,
    link_valency,
    local_cut_valency,
    tree_system_limit,
    validate_bowditch,
)

__all__ = [
    "__version__",
    "INFINITY",
    "Circline",
    "DegenerateMatrixError",
    "MapClass",
    "MoebiusMap",
    "chordal_distance",
    "moebius_mapping",
    "Alphabet",
    "GroupPresentation",
    "MarkedGroup",
    "check_relations",
    "enumerate_reduced_words",
    "free_reduce",
    "load_marking",
    "load_presentation",
    "parse_word",
    "reduced_word_count",
    "solve_parabolic_commutator",
    "CirclePacking",
    "OrientedCircle",
    "descartes_residual",
    "detect_tangencies",
    "is_apollonian_like",
    "load_packing",
    "dump_packing",
    "normalize_to_standard_gasket",
    "standard_gasket",
    "tangency_point",
    "tangent_quadruple_flip",
    "DfsConfig",
    "LimitSetCloud",
    "Rectangle",
    "benchmark_word_traversal",
    "hausdorff_distance",
    "limit_points_by_fixed_points",
    "limit_set_dfs",
    "render",
    "FiniteMetricSpace",
    "GraphOfGroups",
    "SimpleGraph",
    "TreeSystem",
    "abc_example",
    "cut_pairs",
    "gromov_product",
    "link_valency",
    "local_cut_valency",
    "tree_system_limit",
    "validate_bowditch",
]
