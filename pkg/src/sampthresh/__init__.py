"""Differentially private histograms from sampling alone.

Bernoulli-sample the clients, aggregate exactly, and suppress counts below a
threshold: the sampling randomness by itself yields an (epsilon, delta)-DP
histogram, with no noise added to released counts.  The package bundles the
mechanism, its privacy calibration, trie-based heavy hitters and quantile
queries built on it, baseline mechanisms for comparison, brute-force
verification oracles, and an experiment harness.
"""

__version__ = "0.1.0"

from .calibration import (
    CalibrationError,
    PrivacyParams,
    TrieHHLegacyParams,
    c_alpha,
    calibrate,
    delta_bound_exact,
    eps_of,
    kl_divergence,
    lambert_w,
    log_delta_bound_exact,
    q_of,
    triehh_delta,
    triehh_log_delta,
    triehh_sample_size,
    triehh_sample_size_original,
    triehh_tau,
)
from .mechanism import (
    Dataset,
    FrequencyEstimate,
    Histogram,
    estimate_frequencies,
    run_mechanism,
    sample_bernoulli,
    threshold_histogram,
)
from .sampling import CohortConfig, cohort_sample, sentinel_bucket
from .trie_hh import (
    CompositionBudget,
    TrieConfig,
    WeightedTrie,
    compose,
    extend_level,
    flat_heavy_hitters,
    run_triehh,
)
from .quantiles import (
    QuantileResult,
    RangeChunk,
    binary_search_quantile,
    decompose_range,
    hierarchical_quantile,
    hierarchical_range_query,
    value_to_prefix,
)
from .datasets import gen_binomial, gen_geometric, ingest_corpus, true_histogram
from .harness import (
    ExperimentConfig,
    MetricRecord,
    mean_abs_error,
    run_experiment,
    topk_recall,
)

__all__ = [
    "CalibrationError",
    "CohortConfig",
    "CompositionBudget",
    "Dataset",
    "ExperimentConfig",
    "FrequencyEstimate",
    "Histogram",
    "MetricRecord",
    "PrivacyParams",
    "QuantileResult",
    "RangeChunk",
    "TrieConfig",
    "TrieHHLegacyParams",
    "WeightedTrie",
    "binary_search_quantile",
    "c_alpha",
    "calibrate",
    "cohort_sample",
    "compose",
    "decompose_range",
    "delta_bound_exact",
    "eps_of",
    "estimate_frequencies",
    "extend_level",
    "flat_heavy_hitters",
    "gen_binomial",
    "gen_geometric",
    "hierarchical_quantile",
    "hierarchical_range_query",
    "ingest_corpus",
    "kl_divergence",
    "lambert_w",
    "log_delta_bound_exact",
    "mean_abs_error",
    "q_of",
    "run_experiment",
    "run_mechanism",
    "run_triehh",
    "sample_bernoulli",
    "sentinel_bucket",
    "threshold_histogram",
    "topk_recall",
    "triehh_delta",
    "triehh_log_delta",
    "triehh_sample_size",
    "triehh_sample_size_original",
    "triehh_tau",
    "true_histogram",
    "value_to_prefix",
]
