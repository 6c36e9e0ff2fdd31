"""The sample-and-threshold histogram mechanism.

Bernoulli (Poisson) sampling of clients, exact aggregation of the sampled
items, and suppression of counts below the threshold tau.  All privacy comes
from the sampling randomness: no noise is ever added, surviving counts are
released verbatim, and items absent from the input can never appear in the
output.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import compress
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

from .calibration import PrivacyParams


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of one item per client.

    Items are either bucket ids (integers in [0, B)), strings (pre-mapping
    inputs for the trie protocols), or reals in [0, 1] (quantile queries).
    Integer and real items are held as numpy arrays and must not be mutated.
    """

    items: Any
    B: Optional[int] = None

    def __post_init__(self):
        items = self.items
        if isinstance(items, np.ndarray):
            pass
        elif len(items) > 0 and isinstance(items[0], str):
            items = tuple(items)
        else:
            items = np.asarray(items)
            if items.size == 0:
                items = items.astype(np.int64)
        object.__setattr__(self, "items", items)
        if self.B is not None and self.is_integer and len(items) > 0:
            lo, hi = int(items.min()), int(items.max())
            if lo < 0 or hi >= self.B:
                raise ValueError(
                    f"bucket ids must lie in [0, {self.B}), found range [{lo}, {hi}]"
                )

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def is_integer(self) -> bool:
        return isinstance(self.items, np.ndarray) and np.issubdtype(
            self.items.dtype, np.integer
        )


@dataclass(frozen=True)
class Histogram:
    """Sparse bucket -> count mapping; zero-count buckets are absent.

    ``thresholded`` marks post-threshold histograms, in which case every
    stored count is at least ``tau_applied``.
    """

    counts: dict
    B: Optional[int] = None
    thresholded: bool = False
    tau_applied: Optional[int] = None

    def __post_init__(self):
        for b, c in self.counts.items():
            if c <= 0:
                raise ValueError(f"zero/negative count {c} for bucket {b!r} must be omitted")
            if self.thresholded and self.tau_applied is not None and c < self.tau_applied:
                raise ValueError(
                    f"count {c} for bucket {b!r} is below the applied threshold "
                    f"{self.tau_applied}"
                )
            if self.B is not None and isinstance(b, (int, np.integer)):
                if not 0 <= b < self.B:
                    raise ValueError(f"bucket id {b} outside [0, {self.B})")

    def get(self, bucket) -> int:
        return self.counts.get(bucket, 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def support(self) -> set:
        return set(self.counts)


@dataclass(frozen=True)
class FrequencyEstimate:
    """Estimated relative frequency per bucket; absent buckets estimate 0.

    ``m`` is the scale basis: the expected sample size p_s * n for the
    sample-and-threshold mechanism, or the realized cohort size for the
    baselines.
    """

    estimates: dict
    m: float
    B: Optional[int] = None

    def __post_init__(self):
        for b, v in self.estimates.items():
            if v < 0.0:
                raise ValueError(f"negative frequency estimate {v} for bucket {b!r}")

    def get(self, bucket) -> float:
        return self.estimates.get(bucket, 0.0)


def sample_bernoulli(dataset: Dataset, p_s: float, seed: int):
    """Include each client's item independently with probability p_s.

    Deterministic for a fixed seed.  Returns items in input order, as a
    numpy array (integer/real datasets) or tuple (string datasets).
    """
    if not 0.0 <= p_s < 1.0:
        raise ValueError(f"p_s must be in [0, 1), got {p_s}")
    rng = np.random.default_rng(seed)
    mask = rng.random(dataset.n) < p_s
    if isinstance(dataset.items, np.ndarray):
        return dataset.items[mask]
    return tuple(compress(dataset.items, mask))


def count_items(sample) -> Counter:
    """Exact multiset counts of a sample (any item flavor)."""
    if isinstance(sample, np.ndarray):
        values, counts = np.unique(sample, return_counts=True)
        return Counter({v.item(): int(c) for v, c in zip(values, counts)})
    return Counter(sample)


def threshold_histogram(sample, tau: int, B: Optional[int] = None) -> Histogram:
    """Keep sampled counts >= tau verbatim, drop everything below.

    Counts exactly tau are retained.  The output support is a subset of the
    sample's support: no spurious items, no noise.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    counts = count_items(sample)
    kept = {b: c for b, c in counts.items() if c >= tau}
    return Histogram(counts=kept, B=B, thresholded=True, tau_applied=tau)


def run_mechanism(
    dataset: Dataset,
    params: PrivacyParams,
    seed: int,
    cohort=None,
) -> Histogram:
    """Sample-and-threshold release: Bernoulli sample, aggregate, threshold.

    With ``cohort`` set (a sampling.CohortConfig), the Poisson sample is
    emulated by a fixed-size contacted cohort; this requires tau >= 2 so the
    abstention sentinels can never survive.  The returned histogram carries
    no record of the pre-threshold sample size.
    """
    if cohort is not None:
        if params.tau < 2:
            raise ValueError("cohort mode requires tau >= 2 to suppress sentinels")
        from .sampling import cohort_sample

        sample = cohort_sample(dataset, cohort, seed)
    else:
        sample = sample_bernoulli(dataset, params.p_s, seed)
    hist = threshold_histogram(sample, params.tau)
    return Histogram(
        counts=hist.counts, B=dataset.B, thresholded=True, tau_applied=params.tau
    )


def estimate_frequencies(hist: Histogram, n: int, p_s: float) -> FrequencyEstimate:
    """Relative frequencies count / (p_s * n) for buckets present in ``hist``.

    The divisor is the expected sample size, not the realized one: the
    realized size is withheld by the mechanism.  Suppressed buckets estimate
    0, so up to tau / (p_s * n) of mass per pruned bucket is lost.
    """
    if p_s <= 0.0:
        raise ValueError(f"p_s must be > 0, got {p_s}")
    if not hist.thresholded:
        raise ValueError("estimate_frequencies expects a thresholded histogram")
    m = p_s * n
    return FrequencyEstimate(
        estimates={b: c / m for b, c in hist.counts.items()}, m=m, B=hist.B
    )
