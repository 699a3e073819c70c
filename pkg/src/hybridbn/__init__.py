"""Bayesian network learning on mixed discrete/continuous data.

Structure search scores candidate graphs with an entropy-based dependence
estimate that needs no discretization: discrete blocks use plug-in entropy,
continuous blocks a Gaussian approximation. Parameters follow the
conditional-linear-Gaussian taxonomy. Both a greedy hill climber and an
evolutionary algorithm are available for walking the DAG space.
"""

__version__ = "0.1.0"

from .data import (
    DataError,
    Dataset,
    DiscretizationMap,
    VariableKind,
    apply_discretization,
    equal_frequency_discretize,
    load_csv,
    load_schema,
    make_dataset,
    train_test_split,
)
from .graph import (
    CycleError,
    Dag,
    Move,
    MoveKind,
    apply_move,
    dag_from_parent_map,
    empty_dag,
    legal_moves,
    shd,
    skeleton_f1,
    to_dot,
)
from .scoring import (
    GroupStats,
    LocalScore,
    NumericalError,
    ParentSet,
    ScoreCache,
    ScoreDiagnostics,
    ScoreKind,
    ScoredNetwork,
    SingletonPathologyError,
    discrete_entropy,
    gaussian_entropy,
    information_gain,
    local_score,
    mixed_mi,
    network_score,
)
from .models import (
    BayesianNetwork,
    ConditionalLinearGaussian,
    Cpt,
    Gaussian,
    LinearGaussian,
    fit_parameters,
    local_log_likelihood,
    network_log_likelihood,
)
from .sampling import (
    ImputationReport,
    evaluate_restoration,
    forward_sample,
    impute_row,
    impute_rows,
)
from .search import EvoConfig, evolve, hill_climb
from .benchmark import (
    GeneratorSpec,
    MatrixResult,
    SHAPES,
    compare_distributions,
    generate_clg_network,
    matrix_summary,
    run_matrix,
)
from .serialize import (
    DocumentError,
    document_to_network,
    documents_equal,
    load_network,
    network_to_document,
    save_network,
)
