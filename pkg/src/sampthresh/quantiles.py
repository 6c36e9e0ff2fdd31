"""Quantile and range queries over private histograms.

Two routes: an interactive binary search that spends one two-bucket
histogram release per step (budget h * (epsilon, delta) after h steps), and
offline queries against the weighted trie, which is exactly a hierarchical
histogram: any prefix range [0, r) decomposes greedily into at most beta - 1
trie cells per level, so L(beta - 1) probes answer any range query.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .calibration import PrivacyParams
from .mechanism import Dataset
from .seeding import derive_seed
from .trie_hh import WeightedTrie

_RANK_ERROR_CONSTANT = 5.0  # engineering constant for the O(1/sqrt(m)) sampling error


@dataclass(frozen=True)
class RangeChunk:
    """One trie cell: index ``cell`` at ``level`` covers
    [cell * beta^-level, (cell + 1) * beta^-level).  Level 0 is the full
    interval [0, 1)."""

    level: int
    cell: int

    def interval(self, beta: int) -> tuple:
        width = beta ** (-self.level)
        return (self.cell * width, (self.cell + 1) * width)

    def prefix(self, alphabet: str, beta: int) -> str:
        digits = []
        cell = self.cell
        for _ in range(self.level):
            digits.append(alphabet[cell % beta])
            cell //= beta
        return "".join(reversed(digits))


@dataclass(frozen=True)
class QuantileResult:
    """A quantile answer with its resolution and the privacy budget it cost."""

    value: float
    phi: float
    resolution: float
    rank_error_bound: float
    epsilon_spent: float
    delta_spent: float
    method: str


def value_to_prefix(x: float, beta: int, L: int, alphabet: Optional[str] = None) -> str:
    """First L base-beta digits of x in [0, 1]; x = 1 maps to the last cell."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if beta < 2:
        raise ValueError(f"beta must be >= 2, got {beta}")
    if alphabet is None:
        from .trie_hh import DIGIT_ALPHABET

        alphabet = DIGIT_ALPHABET[:beta]
    cells = beta**L
    idx = min(int(x * cells), cells - 1)
    digits = []
    for _ in range(L):
        digits.append(alphabet[idx % beta])
        idx //= beta
    return "".join(reversed(digits))


def decompose_range(r: float, beta: int, L: int) -> list:
    """Greedy coarsest-first cover of [0, floor(r * beta^L) / beta^L) by trie
    cells, at most beta - 1 cells per level.

    The cells are disjoint and exactly cover the truncated prefix interval;
    truncation error is below beta^-L.  r = 1 returns the single level-0
    full cover.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must be in [0, 1], got {r}")
    if beta < 2 or L < 1:
        raise ValueError(f"need beta >= 2 and L >= 1, got beta={beta}, L={L}")
    target = int(math.floor(r * beta**L))
    if target >= beta**L:
        return [RangeChunk(level=0, cell=0)]
    chunks = []
    start = 0
    for level in range(1, L + 1):
        digit = (target // beta ** (L - level)) % beta
        for cell in range(start, start + digit):
            chunks.append(RangeChunk(level=level, cell=cell))
        start = (start + digit) * beta
    return chunks


def hierarchical_range_query(trie: WeightedTrie, r: float) -> float:
    """Estimated population mass of [0, r) from the trie's released counts.

    Sums the surviving counts of the decomposition cells (missing cells
    contribute 0) and rescales by the expected per-level sample size.
    """
    beta = trie.cfg.beta
    chunks = decompose_range(r, beta, trie.cfg.L)
    m = trie.expected_sample_size
    total = 0
    for chunk in chunks:
        if chunk.level == 0:
            total += sum(trie.level_nodes(1).values())
        else:
            prefix = chunk.prefix(trie.cfg.alphabet, beta)
            total += trie.level_nodes(chunk.level).get(prefix, 0)
    return total / m


def hierarchical_error_budget(beta: int, L: int, tau: int, epsilon: float, n: int) -> float:
    """Analytic worst-case rank error (beta - 1) (L tau)^2 / (epsilon n) of
    trie quantiles when the per-level sample is sized ~ epsilon n / (L tau)."""
    return (beta - 1) * (L * tau) ** 2 / (epsilon * n)


def hierarchical_quantile(trie: WeightedTrie, phi: float) -> QuantileResult:
    """Smallest grid point r (step beta^-L) whose estimated mass reaches phi.

    Ties resolve to the smallest r (left-continuous CDF inverse); if the
    pruned trie never accumulates phi, the top of the range is returned.
    The budget is the trie's composed (L epsilon, L delta).
    """
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must be in [0, 1], got {phi}")
    cfg = trie.cfg
    cells = cfg.beta**cfg.L
    value = 1.0
    for t in range(cells + 1):
        r = t / cells
        if hierarchical_range_query(trie, r) >= phi:
            value = r
            break
    m = trie.expected_sample_size
    pruning_error = cfg.L * (cfg.beta - 1) * cfg.params.tau / m
    budget = trie.budget
    eps_spent, delta_spent = (
        budget.basic if budget is not None else (cfg.L * cfg.params.epsilon, cfg.L * cfg.params.delta)
    )
    return QuantileResult(
        value=value,
        phi=phi,
        resolution=cfg.beta ** (-cfg.L),
        rank_error_bound=pruning_error + _RANK_ERROR_CONSTANT / math.sqrt(m),
        epsilon_spent=eps_spent,
        delta_spent=delta_spent,
        method="trie",
    )


def binary_search_quantile(
    dataset: Dataset,
    phi: float,
    h: int,
    params: PrivacyParams,
    seed: int,
) -> QuantileResult:
    """Interactive phi-quantile search over real items in [0, 1].

    Each of the h rounds releases a fresh-seeded two-bucket thresholded
    histogram [0, t), [t, 1] and halves the search interval toward the
    target mass; a suppressed bucket is treated as empty mass.  The result
    has resolution 2^-h and costs (h epsilon, h delta).  phi should lie in
    (tau/m, 1 - tau/m), otherwise thresholding dominates and a warning is
    issued.
    """
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if not 0.0 < phi < 1.0:
        raise ValueError(f"phi must be in (0, 1), got {phi}")
    items = dataset.items
    if not isinstance(items, np.ndarray) or not np.issubdtype(items.dtype, np.floating):
        raise TypeError("binary_search_quantile requires real-valued items in [0, 1]")
    m = params.p_s * dataset.n
    if m <= 0.0:
        raise ValueError("binary_search_quantile needs p_s > 0 and a nonempty dataset")
    if not params.tau / m < phi < 1.0 - params.tau / m:
        warnings.warn(
            f"phi={phi} outside (tau/m, 1 - tau/m) = "
            f"({params.tau / m:.4g}, {1.0 - params.tau / m:.4g}); "
            f"thresholding will dominate the answer",
            stacklevel=2,
        )
    lo, hi = 0.0, 1.0
    for step in range(1, h + 1):
        t = (lo + hi) / 2.0
        rng = np.random.default_rng(derive_seed(seed, step))
        sampled = items[rng.random(dataset.n) < params.p_s]
        below = int(np.count_nonzero(sampled < t))
        released = below if below >= params.tau else 0
        if released / m < phi:
            lo = t
        else:
            hi = t
    return QuantileResult(
        value=(lo + hi) / 2.0,
        phi=phi,
        resolution=2.0**-h,
        rank_error_bound=_RANK_ERROR_CONSTANT / math.sqrt(m),
        epsilon_spent=h * params.epsilon,
        delta_spent=h * params.delta,
        method="search",
    )
