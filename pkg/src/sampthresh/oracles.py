"""Brute-force and exact-combinatorics oracles.

Everything here is an independent check on the mechanism and its calibration
math: exhaustive enumeration of the mechanism's output law on tiny inputs,
hockey-stick divergences, exact binomial pmfs and tails, the closed-form
count-ratio law, and the subset-counting quantities of the trie analysis.
Exactness is the point, so counting uses big integers and probabilities are
evaluated in log space where needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

from .calibration import delta_bound_exact

MAX_ENUM_N = 20


def canonical_key(counts: dict) -> tuple:
    """Canonical form of a thresholded histogram: sorted (bucket, count) pairs."""
    return tuple(sorted(counts.items()))


@dataclass(frozen=True)
class OutputDistribution:
    """Exact law of the mechanism on one input: canonical histogram -> probability."""

    probs: dict

    def total_mass(self) -> float:
        return sum(self.probs.values())

    def get(self, key) -> float:
        return self.probs.get(key, 0.0)


def _as_items(dataset) -> list:
    items = getattr(dataset, "items", dataset)
    return [x.item() if hasattr(x, "item") else x for x in items]


def output_distribution(dataset, p_s: float, tau: int) -> OutputDistribution:
    """Exact output law under Bernoulli(p_s) sampling and threshold tau.

    Enumerates all 2^n client inclusion patterns, weighting each by
    p_s^|S| (1-p_s)^(n-|S|); limited to n <= MAX_ENUM_N.
    """
    items = _as_items(dataset)
    n = len(items)
    if n > MAX_ENUM_N:
        raise ValueError(f"exhaustive enumeration limited to n <= {MAX_ENUM_N}, got {n}")
    if not 0.0 <= p_s <= 1.0:
        raise ValueError(f"p_s must be in [0, 1], got {p_s}")
    p_in = [p_s**k * (1.0 - p_s) ** (n - k) for k in range(n + 1)]
    probs: dict = {}
    for mask in range(1 << n):
        counts: dict = {}
        m = mask
        i = 0
        while m:
            if m & 1:
                b = items[i]
                counts[b] = counts.get(b, 0) + 1
            m >>= 1
            i += 1
        key = canonical_key({b: c for b, c in counts.items() if c >= tau})
        probs[key] = probs.get(key, 0.0) + p_in[mask.bit_count()]
    return OutputDistribution(probs)


def output_distribution_fixed(dataset, m: int, tau: int) -> OutputDistribution:
    """Exact output law under fixed-size sampling of exactly m of n clients.

    Used to demonstrate that releasing counts from a known-size sample leaks:
    on the worst-case pair the observable sample size forces delta >= m/n.
    """
    items = _as_items(dataset)
    n = len(items)
    if n > MAX_ENUM_N:
        raise ValueError(f"exhaustive enumeration limited to n <= {MAX_ENUM_N}, got {n}")
    if not 0 <= m <= n:
        raise ValueError(f"sample size m={m} must be in [0, {n}]")
    weight = 1.0 / math.comb(n, m)
    probs: dict = {}
    for chosen in combinations(range(n), m):
        counts: dict = {}
        for i in chosen:
            b = items[i]
            counts[b] = counts.get(b, 0) + 1
        key = canonical_key({b: c for b, c in counts.items() if c >= tau})
        probs[key] = probs.get(key, 0.0) + weight
    return OutputDistribution(probs)


def hockey_stick(P: OutputDistribution, Q: OutputDistribution, epsilon: float) -> float:
    """Smallest delta with P(H) <= e^eps Q(H) + delta for every event H.

    Equals sum_o max(P(o) - e^eps Q(o), 0) over the union of outcomes.
    At epsilon = 0 this is the total variation distance.
    """
    e_eps = math.exp(epsilon)
    keys = set(P.probs) | set(Q.probs)
    return sum(max(P.get(k) - e_eps * Q.get(k), 0.0) for k in keys)


def hockey_stick_symmetric(
    P: OutputDistribution, Q: OutputDistribution, epsilon: float
) -> float:
    """Hockey-stick divergence maximized over both neighbor directions."""
    return max(hockey_stick(P, Q, epsilon), hockey_stick(Q, P, epsilon))


def _neighboring(d1: list, d2: list) -> bool:
    if len(d1) != len(d2):
        return False
    c1: dict = {}
    c2: dict = {}
    for x in d1:
        c1[x] = c1.get(x, 0) + 1
    for x in d2:
        c2[x] = c2.get(x, 0) + 1
    extra1 = sum(max(c1.get(b, 0) - c2.get(b, 0), 0) for b in set(c1) | set(c2))
    extra2 = sum(max(c2.get(b, 0) - c1.get(b, 0), 0) for b in set(c1) | set(c2))
    return extra1 <= 1 and extra2 <= 1


@dataclass(frozen=True)
class VerifyRow:
    """One grid point of a DP verification: observed vs analytic delta."""

    epsilon: float
    observed_delta: float
    bound_delta: Optional[float]

    @property
    def within_bound(self) -> Optional[bool]:
        if self.bound_delta is None:
            return None
        return self.observed_delta <= self.bound_delta + 1e-12


def dp_verify(
    D,
    D_prime,
    p_s: float,
    tau: int,
    epsilon_grid: Sequence[float],
) -> list[VerifyRow]:
    """Certify the mechanism's privacy on one neighboring pair by enumeration.

    For each grid epsilon, the observed delta is the symmetrized hockey-stick
    divergence between the two exact output laws; the analytic bound column
    is filled whenever the theorem's condition p_s <= 1 - e^-eps holds.
    """
    d1, d2 = _as_items(D), _as_items(D_prime)
    if not _neighboring(d1, d2):
        raise ValueError("datasets are not neighbors (must differ in one client's value)")
    P = output_distribution(d1, p_s, tau)
    Q = output_distribution(d2, p_s, tau)
    rows = []
    for eps in epsilon_grid:
        observed = hockey_stick_symmetric(P, Q, eps)
        bound = None
        if p_s <= 1.0 - math.exp(-eps):
            bound = delta_bound_exact(eps, p_s, tau)
        rows.append(VerifyRow(epsilon=eps, observed_delta=observed, bound_delta=bound))
    return rows


def binomial_logpmf(k: int, p: float, v: int) -> float:
    """Natural log of Pr[Binomial(k, p) = v]."""
    if not 0 <= v <= k:
        raise ValueError(f"v must be in [0, {k}], got {v}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p == 0.0:
        return 0.0 if v == 0 else -math.inf
    if p == 1.0:
        return 0.0 if v == k else -math.inf
    return (
        math.lgamma(k + 1)
        - math.lgamma(v + 1)
        - math.lgamma(k - v + 1)
        + v * math.log(p)
        + (k - v) * math.log1p(-p)
    )


def binomial_pmf(k: int, p: float, v: int) -> float:
    """Pr[Binomial(k, p) = v]; exact comb arithmetic when representable."""
    if not 0 <= v <= k:
        raise ValueError(f"v must be in [0, {k}], got {v}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return math.exp(binomial_logpmf(k, p, v))
    if k <= 500:
        direct = math.comb(k, v) * p**v * (1.0 - p) ** (k - v)
        if direct > 0.0 and math.isfinite(direct):
            return direct
    return math.exp(binomial_logpmf(k, p, v))


def binomial_tail_ge(k: int, p: float, t: int) -> float:
    """Pr[Binomial(k, p) >= t], summed exactly over the upper tail."""
    if t <= 0:
        return 1.0
    if t > k:
        return 0.0
    return sum(binomial_pmf(k, p, v) for v in range(t, k + 1))


def count_ratio(k: int, v: int, p_s: float) -> float:
    """Probability ratio (1 - p_s) k / (k - v) between neighbors at count v.

    For an item with k copies versus k-1 copies, the ratio of probabilities
    of sampling exactly v copies equals this expression identically; the
    worst case v = 0 gives 1 - p_s.
    """
    if not k > v >= 0:
        raise ValueError(f"requires k > v >= 0, got k={k}, v={v}")
    if not 0.0 <= p_s < 1.0:
        raise ValueError(f"p_s must be in [0, 1), got {p_s}")
    return (1.0 - p_s) * k / (k - v)


def s_count_exact(k: int, n: int, s: int, v: int) -> int:
    """Number of size-s subsets of n items containing exactly v of the k target
    copies: C(k, v) * C(n - k, s - v).  Zero when out of range."""
    if v < 0 or v > k or s - v < 0 or s - v > n - k:
        return 0
    return math.comb(k, v) * math.comb(n - k, s - v)


def s_count_at_least(k: int, n: int, s: int, tau: int) -> int:
    """Number of size-s subsets of n items containing at least tau of the k
    target copies (big-integer exact)."""
    return sum(s_count_exact(k, n, s, v) for v in range(max(tau, 0), min(k, s) + 1))


def s_count_enumerate(k: int, n: int, s: int, tau: int) -> int:
    """Direct subset enumeration of s_count_at_least; only for tiny n."""
    if n > 12:
        raise ValueError(f"direct enumeration limited to n <= 12, got {n}")
    items = [1] * k + [0] * (n - k)
    return sum(1 for c in combinations(items, s) if sum(c) >= tau)


def omit_probability_bound(W: int, n: int, m: float, tau: int) -> float:
    """Chernoff bound exp(-(w - tau)^2 / (2w)) on missing an item of absolute
    count W, where w = W * m / n is its expected sampled count.

    Only meaningful for w > tau; vacuous inputs are rejected.
    """
    w = W * m / n
    if w <= tau:
        raise ValueError(
            f"bound vacuous: expected sampled count w={w} must exceed tau={tau}"
        )
    return math.exp(-((w - tau) ** 2) / (2.0 * w))


def freq_error_bound(gamma: float, mu: float) -> float:
    """Chernoff bound 2 exp(-gamma^2 mu / 3) on a relative error of gamma for
    a sampled count with expectation mu."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if mu <= 0.0:
        raise ValueError(f"mu must be > 0, got {mu}")
    return 2.0 * math.exp(-(gamma**2) * mu / 3.0)


def phi_solve(gamma: float, beta_conf: float, m: float) -> float:
    """Smallest reliably estimable frequency phi = (3 / gamma^2) ln(1/(2 beta)) / m.

    Items with frequency at least phi are estimated within relative error
    gamma except with probability 2 * beta_conf.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if not 0.0 < beta_conf < 0.5:
        raise ValueError(f"beta_conf must be in (0, 0.5), got {beta_conf}")
    if m <= 0.0:
        raise ValueError(f"m must be > 0, got {m}")
    return (3.0 / gamma**2) * math.log(1.0 / (2.0 * beta_conf)) / m
