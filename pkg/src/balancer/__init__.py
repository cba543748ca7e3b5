"""Signed-network structural balance and coalition prediction.

Pipeline stages: ingest a bilateral-relations CSV and normalize its factors,
score each directed pair and merge into an undirected signed graph, drive the
graph toward structural balance with randomized least-edge flips, extract two
opposing coalitions, and score the partition against known ally/enemy pairs.
"""

from .errors import InputError, InvariantError
from .graph import (
    NationId,
    SignedEdge,
    SignedGraph,
    Triangle,
    TriangleState,
    TriangleTable,
    classify,
    count_unstable,
    enumerate_triangles,
    normalize_name,
    read_edges_csv,
    write_edges_csv,
)
from .ingest import (
    FactorRecord,
    FactorStats,
    NormalizedRecord,
    load_dataset,
    normalize_border,
    normalize_exchange,
    normalize_minmax,
    normalize_records,
)
from .scoring import (
    DEFAULT_COEFFICIENTS,
    CoefficientSet,
    DirectedScore,
    build_graph,
    merge_undirected,
    score_directed,
)
from .balance import (
    BalanceConfig,
    BalanceState,
    BalanceTrace,
    flip_least_edge,
    pick_unstable,
    run_balance,
)
from .coalition import (
    CoalitionResult,
    see_coalitions,
    single_append,
    sweep_starts,
)
from .evaluate import (
    EvaluationPair,
    EvaluationReport,
    load_eval_set,
    score_partition,
)

__version__ = "0.1.0"

__all__ = [
    "BalanceConfig",
    "BalanceState",
    "BalanceTrace",
    "CoalitionResult",
    "CoefficientSet",
    "DEFAULT_COEFFICIENTS",
    "DirectedScore",
    "EvaluationPair",
    "EvaluationReport",
    "FactorRecord",
    "FactorStats",
    "InputError",
    "InvariantError",
    "NationId",
    "NormalizedRecord",
    "SignedEdge",
    "SignedGraph",
    "Triangle",
    "TriangleState",
    "TriangleTable",
    "build_graph",
    "classify",
    "count_unstable",
    "enumerate_triangles",
    "flip_least_edge",
    "load_dataset",
    "load_eval_set",
    "merge_undirected",
    "normalize_border",
    "normalize_exchange",
    "normalize_minmax",
    "normalize_name",
    "normalize_records",
    "pick_unstable",
    "read_edges_csv",
    "run_balance",
    "score_directed",
    "score_partition",
    "see_coalitions",
    "single_append",
    "sweep_starts",
    "write_edges_csv",
]
