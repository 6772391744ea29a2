"""Prioritized distance labelings and l_infinity embeddings, with exact auditors."""

__version__ = "0.1.0"

from .audit import (  # noqa: E402
    AuditReport,
    antipodal_coordinate_check,
    audit_distortion,
    audit_labels,
    audit_prioritized_contractive,
    audit_prioritized_dimension,
    bipartite_certify,
    coordinate_satisfaction,
)
from .errors import *  # noqa: E402,F401,F403
from .general import (  # noqa: E402
    BetaSchedule,
    chi,
    dimension_bound,
    distortion_bound,
    meta_embedding,
    preset_beta,
    uniform_clique_embedding,
)
from .instances import (  # noqa: E402
    HardInstance,
    antipodal_basis,
    bipartite_A12_embedding,
    code_with_prefix,
    cycle_instance,
    cycle_optimal_embedding,
    hypercube_code,
    padded_prefix_set,
    random_bipartite_hard,
)
from .labeling import (  # noqa: E402
    Label,
    LabelSet,
    exact_labels,
    exact_query,
    jl_layered_labels,
    jl_query,
    l1_snowflake_to_l2,
    layer_index,
)
from .metric import (  # noqa: E402
    EmbeddingMatrix,
    MetricSpace,
    PointSet,
    PriorityOrdering,
    WeightedTree,
    metric_from_graph,
    metric_from_points,
    metric_from_tree,
    validate_metric,
)
from .trees import (  # noqa: E402
    A_TERMINAL,
    fold_two_terminals,
    leafify_terminals,
    llr_tree_embedding,
    prioritized_tree_embedding,
    terminal_embed,
    tree_separator,
)
