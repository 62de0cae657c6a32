"""Benes-family switch fabrics: explicit 2x2-switch networks, permutation
routing with control-cost accounting, and independent verification."""

from .analysis import (
    AverageComplexity,
    Boundedness,
    CountReport,
    average_control_complexity,
    boundedness,
    control_cost_summary,
    cost_summary_csv,
    count_k_bounded_exhaustive,
    count_k_bounded_formula,
    count_report,
    count_strictly_k_bounded,
)
from .errors import (
    CorruptPlanError,
    FabricError,
    InvalidBandWidthError,
    InvalidSizeError,
    MatchingViolationError,
    NotKBoundedError,
    SizeMismatchError,
    StructuralError,
    UnsupportedBandWidthError,
)
from .matching import (
    CompatibilityGraph,
    MatchingAssignment,
    MigrationBalanceReport,
    PermutationGraph,
    build_compatibility_graph,
    build_permutation_graph,
    check_migration_balance,
    compatibility_graph_dot,
    find_matching,
    permutation_graph_dot,
    positional_matching,
)
from .permutation import Permutation, identity, parse_permutation, reversal
from .routing import (
    BandDecomposition,
    ControlCost,
    KSubgraph,
    RoutePlan,
    decompose_bands,
    k_benes_route,
    kr_benes_route,
    looping_route,
    looping_route_truncated,
    plan_from_json,
    plan_to_json,
    route,
    select_k_subgraph,
    trace_path,
)
from .topology import (
    Column,
    EmbeddingReport,
    Network,
    PortRef,
    Switch,
    build_band_exchange,
    build_benes,
    build_butterfly,
    build_inverse_butterfly,
    build_k_benes,
    build_kr_benes,
    check_benes_embedding,
    export_dot,
    network_from_json,
    network_to_json,
)
from .verify import (
    VerifyReport,
    Violation,
    band_pair_swap,
    enumerate_k_bounded,
    gen_random_k_bounded,
    interior_band_swap,
    verify_plan,
    within_band,
)

__version__ = "0.1.0"
