"""Beta(2-a, a) n-coalescent simulation and branch-length fluctuation toolkit."""

__version__ = "0.1.0"

from .rates import (
    AlphaModel,
    RateTable,
    JumpLawSampler,
    merger_rate,
    total_rate,
    jump_distribution,
    limit_jump_law,
    centering_constant,
)
from .simulator import (
    CoalescentPath,
    SpectrumState,
    LabeledPartition,
    simulate_path,
    simulate_partition,
    order_r_lengths,
    rescaled_walk,
)
from .lengths import (
    Composition,
    CutoffConfig,
    compositions,
    composition_weight,
    pi_product,
    cond_expect_Z,
    ell_tilde,
    ell_bar,
    ell_bar_symmetrized,
    split_lengths,
    fluctuation_functional,
    fluctuation_prediction,
)
from .stable import (
    StableSpec,
    StablePathSample,
    sample_stable_unit,
    sample_stable_path,
    weighted_integral,
    limit_vector,
    functional_limit_sums,
)
from .stats import (
    ExperimentConfig,
    SummaryTable,
    hill_tail_index,
    ks_distance,
    run_theorem1_experiment,
)

__all__ = [
    "AlphaModel",
    "RateTable",
    "JumpLawSampler",
    "merger_rate",
    "total_rate",
    "jump_distribution",
    "limit_jump_law",
    "centering_constant",
    "CoalescentPath",
    "SpectrumState",
    "LabeledPartition",
    "simulate_path",
    "simulate_partition",
    "order_r_lengths",
    "rescaled_walk",
    "Composition",
    "CutoffConfig",
    "compositions",
    "composition_weight",
    "pi_product",
    "cond_expect_Z",
    "ell_tilde",
    "ell_bar",
    "ell_bar_symmetrized",
    "split_lengths",
    "fluctuation_functional",
    "fluctuation_prediction",
    "StableSpec",
    "StablePathSample",
    "sample_stable_unit",
    "sample_stable_path",
    "weighted_integral",
    "limit_vector",
    "functional_limit_sums",
    "ExperimentConfig",
    "SummaryTable",
    "hill_tail_index",
    "ks_distance",
    "run_theorem1_experiment",
]
