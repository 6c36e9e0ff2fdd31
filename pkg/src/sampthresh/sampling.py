"""Fixed-size cohort emulation of Poisson sampling.

Releasing thresholded counts from a sample of publicly known size leaks the
number of suppressed items, so instead the server contacts a fixed cohort of
s = m + ceil(c * sqrt(m)) clients and each contacted client privately decides
with probability m/s whether to participate.  Abstainers vote for a unique
sentinel bucket outside the real bucket range; sentinel counts are always 1,
so any threshold tau >= 2 removes them and the aggregator never observes the
participant total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mechanism import Dataset


@dataclass(frozen=True)
class CohortConfig:
    """Cohort of s = m + ceil(c * sqrt(m)) contacted clients out of n."""

    n: int
    m: int
    c: float = 10.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.c < 0.0:
            raise ValueError(f"c must be >= 0, got {self.c}")
        if self.s > self.n:
            raise ValueError(
                f"cohort size s={self.s} exceeds population n={self.n}"
            )

    @property
    def s(self) -> int:
        return self.m + math.ceil(self.c * math.sqrt(self.m))


def sentinel_bucket(client_id: int, B: int) -> int:
    """Unique abstention bucket for a client: ids B, B+1, ... never collide
    with real buckets and are injective in the client id."""
    if client_id < 0:
        raise ValueError(f"client_id must be >= 0, got {client_id}")
    return B + client_id


def cohort_sample(dataset: Dataset, cfg: CohortConfig, seed: int) -> np.ndarray:
    """Contact s uniformly chosen clients; each participates w.p. m/s.

    Participants contribute their real bucket, abstainers their sentinel
    bucket, so the message count is always exactly s.  The per-client
    marginal participation probability is (s/n) * (m/s) = m/n.  Only integer
    bucket datasets are supported (sentinels need an id space).
    """
    if not dataset.is_integer:
        raise TypeError("cohort_sample requires an integer-bucket dataset")
    if dataset.B is None:
        raise ValueError("cohort_sample requires dataset.B for sentinel placement")
    if cfg.n != dataset.n:
        raise ValueError(f"cohort n={cfg.n} != dataset n={dataset.n}")
    rng = np.random.default_rng(seed)
    contacted = rng.choice(dataset.n, size=cfg.s, replace=False)
    participates = rng.random(cfg.s) < cfg.m / cfg.s
    sentinels = dataset.B + contacted
    return np.where(participates, dataset.items[contacted], sentinels)
