"""Comparison mechanisms applied to the same sampled cohort.

Three alternatives at matched (epsilon, delta): central Laplace noise
addition, local DP via Hadamard response, and a shuffle-style scheme where
every client adds Bernoulli noise bits to each cell.  All three debias to
the sample frequencies; estimates are floored at zero on release.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .mechanism import FrequencyEstimate, Histogram

# Scale factor in the shuffle noise rate q = c * ln(2/delta) / (eps^2 * s).
# Not taken from any published analysis: calibrated once so the per-cell
# noise variance s*q(1-q) ~= ln(2/delta)/eps^2 matches the advertised
# O(log(1/delta)/eps^2) law.  The rate is capped at 1/2.
SHUFFLE_NOISE_CONSTANT = 1.0


class BaselineKind(enum.Enum):
    CENTRAL_LAPLACE = "central_laplace"
    LDP_HADAMARD = "ldp_hadamard"
    SHUFFLE_BERNOULLI = "shuffle_bernoulli"


def central_laplace(sample_hist: Histogram, epsilon: float, seed: int) -> FrequencyEstimate:
    """Laplace(1/epsilon) noise on every one of the B counts (zeros included),
    normalized by the realized sample size.

    Scale 1/epsilon assumes add/remove adjacency where one client moves one
    count by one.  Negative noisy frequencies are floored at zero.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if sample_hist.B is None:
        raise ValueError("central_laplace needs a histogram with a known bucket count B")
    B = sample_hist.B
    total = sample_hist.total()
    if total == 0:
        return FrequencyEstimate(estimates={}, m=0.0, B=B)
    rng = np.random.default_rng(seed)
    counts = np.zeros(B)
    for b, c in sample_hist.counts.items():
        counts[b] = c
    noisy = counts + rng.laplace(0.0, 1.0 / epsilon, size=B)
    estimates = {b: v / total for b, v in enumerate(noisy) if v > 0.0}
    return FrequencyEstimate(estimates=estimates, m=float(total), B=B)


def _next_pow2(x: int) -> int:
    return 1 << max(x - 1, 1).bit_length()


def _fwht(v: np.ndarray) -> np.ndarray:
    """In-place fast Walsh-Hadamard transform (H v, unnormalized)."""
    h = 1
    n = len(v)
    while h < n:
        for start in range(0, n, h * 2):
            a = v[start : start + h].copy()
            b = v[start + h : start + 2 * h]
            v[start : start + h] = a + b
            v[start + h : start + 2 * h] = a - b
        h *= 2
    return v


def ldp_hadamard(clients: np.ndarray, epsilon: float, B: int, seed: int) -> FrequencyEstimate:
    """Hadamard-response frequency oracle at epsilon-LDP.

    The domain is padded to the next power of two D.  Each client draws one
    uniform coefficient index j, evaluates the +-1 Hadamard entry H[j, x] of
    its item x, and reports it through binary randomized response (kept with
    probability e^eps / (1 + e^eps)).  The server debiases per report,
    accumulates the transform coordinates, and inverts with a fast
    Walsh-Hadamard transform.  Unbiased for the sample frequencies.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    clients = np.asarray(clients, dtype=np.int64)
    n_c = len(clients)
    D = _next_pow2(B)
    if n_c == 0:
        return FrequencyEstimate(estimates={}, m=0.0, B=B)
    if clients.min() < 0 or clients.max() >= B:
        raise ValueError(f"client items must be bucket ids in [0, {B})")
    rng = np.random.default_rng(seed)
    j = rng.integers(0, D, size=n_c)
    signs = 1.0 - 2.0 * (np.bitwise_count(j & clients) & 1)
    keep_prob = math.exp(epsilon) / (1.0 + math.exp(epsilon))
    flips = rng.random(n_c) >= keep_prob
    reports = np.where(flips, -signs, signs)
    scale = (math.exp(epsilon) + 1.0) / (math.exp(epsilon) - 1.0)
    transform = np.zeros(D)
    np.add.at(transform, j, reports)
    transform *= D * scale / n_c
    freqs = _fwht(transform) / D
    estimates = {b: f for b, f in enumerate(freqs[:B]) if f > 0.0}
    return FrequencyEstimate(estimates=estimates, m=float(n_c), B=B)


def shuffle_noise_rate(epsilon: float, delta: float, s: int) -> float:
    """Per-cell Bernoulli noise rate, capped at 1/2."""
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if s < 1:
        raise ValueError(f"cohort size must be >= 1, got {s}")
    return min(0.5, SHUFFLE_NOISE_CONSTANT * math.log(2.0 / delta) / (epsilon**2 * s))


def shuffle_bernoulli(
    clients: np.ndarray,
    epsilon: float,
    delta: float,
    B: int,
    seed: int,
    q_noise: float = None,
) -> FrequencyEstimate:
    """Shuffle-style histogram: one-hot reports plus per-cell Bernoulli noise.

    Every client submits its own cell plus, for each of the B cells, an
    independent Bernoulli(q_noise) one.  The server subtracts the expected
    noise s * q_noise per cell and rescales by the cohort size; estimates are
    floored at zero.  With q_noise = 0 this reproduces the exact sample
    histogram.
    """
    clients = np.asarray(clients, dtype=np.int64)
    s = len(clients)
    if s == 0:
        return FrequencyEstimate(estimates={}, m=0.0, B=B)
    if clients.min() < 0 or clients.max() >= B:
        raise ValueError(f"client items must be bucket ids in [0, {B})")
    if q_noise is None:
        q_noise = shuffle_noise_rate(epsilon, delta, s)
    if not 0.0 <= q_noise <= 0.5:
        raise ValueError(f"q_noise must be in [0, 1/2], got {q_noise}")
    rng = np.random.default_rng(seed)
    counts = np.bincount(clients, minlength=B).astype(np.float64)
    counts += rng.binomial(s, q_noise, size=B)
    debiased = (counts - s * q_noise) / s
    estimates = {b: v for b, v in enumerate(debiased) if v > 0.0}
    return FrequencyEstimate(estimates=estimates, m=float(s), B=B)
