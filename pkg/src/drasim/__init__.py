"""Event-driven simulation of competing two-state diffusion on networks,
with greedy dynamic resource allocation and an experiment harness."""

from .dynamics import (
    LinearSisParams,
    RateModel,
    SigmoidParams,
    linear_sis_rates,
    node_poisson_rate,
    sigmoid_infection,
    sigmoid_recovery,
)
from .experiments import ExperimentConfig, run_heatmap, run_scenario
from .graph import Graph, from_edges, generate_er, generate_pa, generate_sw, load_edge_list
from .metrics import (
    BatchSummary,
    RunMetrics,
    auc,
    auc_ratio,
    batch_summary,
    extinction_time,
    final_infection,
    run_metrics,
)
from .simulator import (
    NetworkState,
    SimConfig,
    Trajectory,
    infected_count_derivative,
    mc_infected_increment,
    run,
    step,
)
from .strategies import (
    ResourceAllocation,
    ScoreVector,
    allocate,
    cut_profile,
    glrie_scores,
    lrie_scores,
    lrsr_ranking,
    mcm_ordering,
)

__version__ = "0.1.0"

__all__ = [
    "BatchSummary",
    "ExperimentConfig",
    "Graph",
    "LinearSisParams",
    "NetworkState",
    "RateModel",
    "ResourceAllocation",
    "RunMetrics",
    "ScoreVector",
    "SigmoidParams",
    "SimConfig",
    "Trajectory",
    "allocate",
    "auc",
    "auc_ratio",
    "batch_summary",
    "cut_profile",
    "extinction_time",
    "final_infection",
    "from_edges",
    "generate_er",
    "generate_pa",
    "generate_sw",
    "glrie_scores",
    "infected_count_derivative",
    "linear_sis_rates",
    "load_edge_list",
    "lrie_scores",
    "lrsr_ranking",
    "mc_infected_increment",
    "mcm_ordering",
    "node_poisson_rate",
    "run",
    "run_heatmap",
    "run_metrics",
    "run_scenario",
    "sigmoid_infection",
    "sigmoid_recovery",
    "step",
]
