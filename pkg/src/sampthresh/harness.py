"""Experiment runner: accuracy and recall sweeps with repetitions.

For each (mechanism, epsilon, repetition) cell the harness calibrates the
sampling parameters, draws one shared client sample per (epsilon,
repetition), runs every requested mechanism on that same cohort with an
independent noise stream, and scores the released frequencies against the
exact population histogram.  Results are flat metric records (CSV) plus
mean/standard-error aggregates (JSON).  Everything is deterministic given
the base seed; per-run failures become error rows instead of aborting the
sweep.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .baselines import central_laplace, ldp_hadamard, shuffle_bernoulli
from .calibration import calibrate
from .datasets import gen_binomial, gen_geometric, ingest_corpus, true_histogram
from .mechanism import (
    Dataset,
    FrequencyEstimate,
    Histogram,
    count_items,
    estimate_frequencies,
    sample_bernoulli,
    threshold_histogram,
)
from .seeding import derive_seed

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_HEADER = ["mechanism", "dataset", "epsilon", "B", "rep", "metric", "value"]

MECHANISMS = ("sample_threshold", "central_laplace", "ldp_hadamard", "shuffle_bernoulli")


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a dataset, an epsilon grid, mechanisms, repetitions."""

    dataset_kind: str
    n: int
    B: int
    epsilon_grid: tuple
    base_seed: int
    delta: float = 1e-8
    alpha: float = 1.0 / 6.0
    mechanisms: tuple = MECHANISMS
    repetitions: int = 10
    k_fraction: float = 0.1
    corpus_path: Optional[str] = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.dataset_kind not in ("binomial", "geometric", "corpus"):
            raise ValueError(f"unknown dataset kind {self.dataset_kind!r}")
        if self.dataset_kind == "corpus" and not self.corpus_path:
            raise ValueError("corpus datasets need corpus_path")
        for mech in self.mechanisms:
            if mech not in MECHANISMS:
                raise ValueError(f"unknown mechanism {mech!r}")
        object.__setattr__(self, "epsilon_grid", tuple(self.epsilon_grid))
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(**raw)

    @property
    def k(self) -> int:
        return math.ceil(self.B * self.k_fraction)


@dataclass(frozen=True)
class MetricRecord:
    mechanism: str
    dataset: str
    epsilon: float
    B: int
    rep: int
    metric: str
    value: float


def mean_abs_error(estimate: FrequencyEstimate, truth: Histogram) -> float:
    """Mean over all B buckets of |estimated freq - true freq| (absent = 0)."""
    if truth.B is None:
        raise ValueError("truth histogram needs a bucket count B")
    n = truth.total()
    total = 0.0
    for b in range(truth.B):
        total += abs(estimate.get(b) - truth.get(b) / n)
    return total / truth.B


def topk_recall(estimate: FrequencyEstimate, truth: Histogram, k: int) -> float:
    """Fraction of the true top-k buckets recovered among the estimated top-k.

    Ties break deterministically toward the smaller bucket id.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    def topk(values: dict) -> set:
        ranked = sorted(values.items(), key=lambda bv: (-bv[1], bv[0]))
        return {b for b, _ in ranked[:k]}

    true_top = topk({b: truth.get(b) for b in range(truth.B)})
    est_top = topk({b: estimate.get(b) for b in range(truth.B)})
    return len(true_top & est_top) / k


def build_dataset(cfg: ExperimentConfig) -> Dataset:
    seed = derive_seed(cfg.base_seed, 0)
    if cfg.dataset_kind == "binomial":
        return gen_binomial(cfg.n, cfg.B, seed)
    if cfg.dataset_kind == "geometric":
        return gen_geometric(cfg.n, cfg.B, seed)
    dataset, _ = ingest_corpus(cfg.corpus_path, cfg.B)
    return dataset


def _run_one(
    mech: str,
    sample: np.ndarray,
    dataset: Dataset,
    params,
    noise_seed: int,
) -> FrequencyEstimate:
    if mech == "sample_threshold":
        hist = threshold_histogram(sample, params.tau, B=dataset.B)
        return estimate_frequencies(hist, dataset.n, params.p_s)
    if mech == "central_laplace":
        counts = dict(count_items(sample))
        hist = Histogram(counts=counts, B=dataset.B, thresholded=False)
        return central_laplace(hist, params.epsilon, noise_seed)
    if mech == "ldp_hadamard":
        return ldp_hadamard(sample, params.epsilon, dataset.B, noise_seed)
    if mech == "shuffle_bernoulli":
        return shuffle_bernoulli(
            sample, params.epsilon, params.delta, dataset.B, noise_seed
        )
    raise ValueError(f"unknown mechanism {mech!r}")


def run_experiment(cfg: ExperimentConfig) -> tuple:
    """Run the full sweep; returns (records, aggregates).

    Seed layout: stream 0 generates the dataset; the sample for (epsilon
    index i, rep j) uses derive_seed(derive_seed(base, 1 + i), j); each
    mechanism's noise uses a further sub-stream of the sample seed.
    """
    dataset = build_dataset(cfg)
    truth = true_histogram(dataset)
    records = []
    for eps_idx, epsilon in enumerate(cfg.epsilon_grid):
        params = calibrate(epsilon, cfg.delta, cfg.alpha)
        eps_seed = derive_seed(cfg.base_seed, 1 + eps_idx)
        for rep in range(cfg.repetitions):
            sample_seed = derive_seed(eps_seed, rep)
            sample = sample_bernoulli(dataset, params.p_s, sample_seed)
            for mech_idx, mech in enumerate(cfg.mechanisms):
                noise_seed = derive_seed(sample_seed, 1 + mech_idx)
                try:
                    estimate = _run_one(mech, sample, dataset, params, noise_seed)
                    mae = mean_abs_error(estimate, truth)
                    recall = topk_recall(estimate, truth, cfg.k)
                except Exception:
                    logger.warning(
                        "run failed: mechanism=%s epsilon=%s rep=%d",
                        mech,
                        epsilon,
                        rep,
                        exc_info=True,
                    )
                    records.append(
                        MetricRecord(mech, cfg.dataset_kind, epsilon, cfg.B, rep, "error", math.nan)
                    )
                    continue
                records.append(
                    MetricRecord(mech, cfg.dataset_kind, epsilon, cfg.B, rep, "mean_abs_error", mae)
                )
                records.append(
                    MetricRecord(mech, cfg.dataset_kind, epsilon, cfg.B, rep, "topk_recall", recall)
                )
    return records, aggregate(records)


def aggregate(records) -> list:
    """Mean and standard error (sample stddev / sqrt(reps)) per metric cell."""
    cells: dict = {}
    for rec in records:
        if rec.metric == "error":
            continue
        cells.setdefault((rec.mechanism, rec.dataset, rec.epsilon, rec.B, rec.metric), []).append(
            rec.value
        )
    out = []
    for (mech, ds, eps, B, metric), values in sorted(cells.items()):
        arr = np.asarray(values)
        stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        out.append(
            {
                "mechanism": mech,
                "dataset": ds,
                "epsilon": eps,
                "B": B,
                "metric": metric,
                "mean": float(arr.mean()),
                "stderr": stderr,
                "reps": len(arr),
            }
        )
    return out


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(
                [rec.mechanism, rec.dataset, rec.epsilon, rec.B, rec.rep, rec.metric, rec.value]
            )


def write_aggregates_json(aggregates, path) -> None:
    payload = {"schema_version": SCHEMA_VERSION, "cells": aggregates}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
