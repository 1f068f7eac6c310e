"""Toolkit for measuring and mitigating bias in attributed networks."""

import os

# Cap BLAS parallelism before numpy loads; modules honor the same budget.
_threads = os.environ.get("EDITS_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .graph import (  # noqa: E402
    AttributedNetwork,
    ColumnSchema,
    GraphFormatError,
    PropagationOperator,
    default_operator,
    degree_normalize,
    geometric_betas,
    include_sensitive_feature,
    load_graph,
    load_graph_files,
    load_network,
    minmax_normalize,
    normalized_laplacian,
    propagation_operator,
    save_network,
    selfloop_normalize,
)
from .metrics import (  # noqa: E402
    BiasReport,
    SpectralResponse,
    attribute_bias,
    bias_report,
    frequency_response,
    measure_bias,
    pairwise_bias,
    propagation_matrix,
    structural_bias,
    wasserstein1_empirical,
)
from .synth import (  # noqa: E402
    SynthConfig,
    attach_labels_and_padding,
    gen_case_biased_attributes,
    gen_case_biased_structure,
    gen_ternary,
    one_step_propagation_demo,
)
from .debias import (  # noqa: E402
    DebiasConfig,
    DebiasResult,
    DebiasState,
    binarize,
    build_joint_views,
    critic_step,
    critic_value,
    debias_network,
    group_context,
    init_state,
    loss_l1,
    loss_l1_multigroup,
    mask_smallest,
    objective_gradients,
    objective_value,
    run_edits,
    adjacency_step,
    theta_step,
)
from .gnn import (  # noqa: E402
    FairnessReport,
    GcnHyper,
    GcnModel,
    auc_score,
    evaluate_fairness,
    evaluate_utility,
    fairness_evaluation,
    gcn_forward,
    init_gcn,
    make_splits,
    train_gcn,
)

__version__ = "0.1.0"
