"""Base-station clustering: long-term throughput model, coalition formation,
baselines, and a Monte Carlo experiment harness."""

__version__ = "0.1.0"

from .baselines import MethodId, exhaustive_best, kmeans_best, kmeans_clusters
from .coalition_formation import (
    FormationTrace,
    PlayerState,
    acceptable_coalitions,
    is_admissible,
    is_individually_stable,
    restricted_utility,
    run_formation,
)
from .network import (
    Network,
    ScenarioConfig,
    coherence_block_length,
    deployment_square_side,
    derive_rng,
    generate_network,
    greedy_associate,
    noise_power_dbm,
    pathloss_db,
)
from .partitions import (
    CoalitionStructure,
    bell_number,
    enumerate_partitions,
    grand,
    random_partition,
    singletons,
)
from .rate_model import (
    RateContext,
    ThroughputReport,
    csi_overhead_symbols,
    ia_feasible,
    longterm_se,
    per_stream_snr,
    prelog,
    throughput,
)
from .specfun import exp_integral_e1, exp_scaled_e1

__all__ = [
    "__version__",
    "MethodId",
    "exhaustive_best",
    "kmeans_best",
    "kmeans_clusters",
    "FormationTrace",
    "PlayerState",
    "acceptable_coalitions",
    "is_admissible",
    "is_individually_stable",
    "restricted_utility",
    "run_formation",
    "Network",
    "ScenarioConfig",
    "coherence_block_length",
    "deployment_square_side",
    "derive_rng",
    "generate_network",
    "greedy_associate",
    "noise_power_dbm",
    "pathloss_db",
    "CoalitionStructure",
    "bell_number",
    "enumerate_partitions",
    "grand",
    "random_partition",
    "singletons",
    "RateContext",
    "ThroughputReport",
    "csi_overhead_symbols",
    "ia_feasible",
    "longterm_se",
    "per_stream_snr",
    "prelog",
    "throughput",
    "exp_integral_e1",
    "exp_scaled_e1",
]
