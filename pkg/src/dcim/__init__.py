"""Online influence maximization under the decreasing cascade model."""

from .graph import (
    DirectedGraph,
    load_edge_list,
    dump_edge_list,
    generate_erdos_renyi,
    extract_dense_subgraph,
    reachable_set,
    vertices_on_paths,
    max_reach,
)
from .cascade import (
    ActivationModel,
    CoinTable,
    DiffusionTrace,
    Observation,
    homogeneous_model,
    model_from_json,
    model_to_json,
    sample_count_dc_model,
    simulate,
    simulate_with_coins,
    validate_model,
)
from .spread import (
    SpreadEstimate,
    ObservationProbTable,
    estimate_spread_mc,
    exact_spread,
    exact_observation_probs,
    tpm_check,
)
from .oracle import OracleConfig, greedy_oracle, exact_best_seed_set
from .policies import (
    DcUcbPolicy,
    DcUcbState,
    FlatUcbPolicy,
    CmabNodePolicy,
    CucbIcPolicy,
    compute_ucb_vectors,
    make_policy,
)
from .experiment import (
    ExperimentConfig,
    RoundRecord,
    run_experiment,
    aggregate_runs,
    compute_regret_series,
)

__version__ = "0.1.0"
