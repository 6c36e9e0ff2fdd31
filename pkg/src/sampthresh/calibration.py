"""Privacy calibration for sample-and-threshold histograms.

Closed-form relations between the sampling probability ``p_s``, the count
threshold ``tau``, and the (epsilon, delta) guarantee of the mechanism, plus
the corresponding calibration formulas for the original trie-based
heavy-hitter protocol (sample fraction gamma * sqrt(n), Lambert-W threshold
lookup).

Quantities that can fall below the smallest positive float (delta down to
1e-157 and beyond) are exposed both directly and as natural logs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


class CalibrationError(ValueError):
    """A calibration precondition (a required inequality) is violated."""


def kl_divergence(q: float, p: float) -> float:
    """KL divergence D(q || p) between Bernoulli(q) and Bernoulli(p).

    Endpoints q in {0, 1} use the 0 * ln 0 = 0 convention; p must lie
    strictly inside (0, 1).
    """
    if not 0.0 < p < 1.0:
        raise CalibrationError(f"kl_divergence requires 0 < p < 1, got p={p}")
    if not 0.0 <= q <= 1.0:
        raise CalibrationError(f"kl_divergence requires 0 <= q <= 1, got q={q}")
    terms = 0.0
    if q > 0.0:
        terms += q * math.log(q / p)
    if q < 1.0:
        terms += (1.0 - q) * math.log((1.0 - q) / (1.0 - p))
    return terms


def q_of(epsilon: float, p_s: float) -> float:
    """Critical sampled fraction q = 1 - e^-eps * (1 - p_s).

    Sampled counts above q times the item's multiplicity are the
    privacy-violating event analyzed by the mechanism's tail bound.
    """
    if epsilon < 0.0:
        raise CalibrationError(f"epsilon must be >= 0, got {epsilon}")
    if not 0.0 <= p_s < 1.0:
        raise CalibrationError(f"p_s must be in [0, 1), got {p_s}")
    return 1.0 - math.exp(-epsilon) * (1.0 - p_s)


def log_delta_bound_exact(epsilon: float, p_s: float, tau: int) -> float:
    """Natural log of the exact Chernoff delta bound, -(tau/q) D(q || p_s)."""
    if p_s > 1.0 - math.exp(-epsilon):
        raise CalibrationError(
            f"delta bound requires p_s <= 1 - exp(-epsilon): "
            f"p_s={p_s} > {1.0 - math.exp(-epsilon)} at epsilon={epsilon}"
        )
    if tau < 1:
        raise CalibrationError(f"tau must be >= 1, got {tau}")
    if p_s == 0.0:
        return -math.inf
    q = q_of(epsilon, p_s)
    return -(tau / q) * kl_divergence(q, p_s)


def delta_bound_exact(epsilon: float, p_s: float, tau: int) -> float:
    """Exact delta bound exp(-(tau/q) D(q || p_s)) with q = q_of(epsilon, p_s).

    Monotone nonincreasing in tau.  Requires p_s <= 1 - exp(-epsilon); the
    violated inequality is named in the raised CalibrationError otherwise.
    """
    return math.exp(log_delta_bound_exact(epsilon, p_s, tau))


def c_alpha(alpha: float) -> float:
    """Simplified privacy exponent ln(1/alpha) - 1/(1+alpha).

    Under the sampling rule p_s = alpha * (1 - e^-eps), the mechanism
    satisfies delta <= exp(-c_alpha(alpha) * tau).  Positive only for alpha
    small enough (roughly alpha < 0.4); alpha = 1 gives -0.5, i.e. no bound.
    """
    if not 0.0 < alpha <= 1.0:
        raise CalibrationError(f"alpha must be in (0, 1], got {alpha}")
    return math.log(1.0 / alpha) - 1.0 / (1.0 + alpha)


@dataclass(frozen=True)
class PrivacyParams:
    """The (epsilon, delta, alpha, p_s, tau) bundle for one mechanism run."""

    epsilon: float
    delta: float
    alpha: float
    p_s: float
    tau: int

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise CalibrationError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise CalibrationError(f"delta must be in (0, 1), got {self.delta}")
        if not 0.0 < self.alpha <= 1.0:
            raise CalibrationError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.p_s < 1.0:
            raise CalibrationError(f"p_s must be in [0, 1), got {self.p_s}")
        if self.p_s > 1.0 - math.exp(-self.epsilon) + 1e-15:
            raise CalibrationError(
                f"p_s={self.p_s} violates p_s <= 1 - exp(-epsilon) "
                f"= {1.0 - math.exp(-self.epsilon)}"
            )
        if int(self.tau) != self.tau or self.tau < 1:
            raise CalibrationError(f"tau must be an integer >= 1, got {self.tau}")

    @property
    def q(self) -> float:
        return q_of(self.epsilon, self.p_s)

    @property
    def c_alpha(self) -> float:
        return c_alpha(self.alpha)

    def expected_sample_size(self, n: int) -> float:
        return self.p_s * n


def calibrate(epsilon: float, delta: float, alpha: float) -> PrivacyParams:
    """Pick (p_s, tau) achieving (epsilon, delta)-DP at sampling fraction alpha.

    Sets p_s = alpha * (1 - e^-eps) and tau = ceil(ln(1/delta) / c_alpha(alpha)).
    The ceiling keeps the realized delta bound at or below the target.
    """
    if epsilon <= 0.0:
        raise CalibrationError(f"epsilon must be > 0, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise CalibrationError(f"delta must be in (0, 1), got {delta}")
    if not 0.0 < alpha < 1.0:
        raise CalibrationError(f"alpha must be in (0, 1), got {alpha}")
    c = c_alpha(alpha)
    if c <= 0.0:
        raise CalibrationError(
            f"c_alpha({alpha}) = {c} <= 0: the simplified bound is vacuous; "
            f"choose a smaller alpha"
        )
    p_s = alpha * (1.0 - math.exp(-epsilon))
    tau = math.ceil(math.log(1.0 / delta) / c)
    return PrivacyParams(epsilon=epsilon, delta=delta, alpha=alpha, p_s=p_s, tau=tau)


def eps_of(p_s: float, alpha: float) -> float:
    """Invert the calibration sampling rule: epsilon = ln(alpha / (alpha - p_s))."""
    if not 0.0 < alpha <= 1.0:
        raise CalibrationError(f"alpha must be in (0, 1], got {alpha}")
    if not 0.0 <= p_s < alpha:
        raise CalibrationError(f"eps_of requires 0 <= p_s < alpha, got p_s={p_s}, alpha={alpha}")
    return math.log(alpha / (alpha - p_s))


_INV_E = math.exp(-1.0)


def lambert_w(x: float, tol: float = 1e-10, max_iter: int = 80) -> float:
    """Principal branch of the Lambert W function: w with w * e^w = x.

    Halley iteration with damping.  Initial guess ln(1+x) for x >= 0 and the
    branch-point expansion -1 + sqrt(2(1 + e*x)) for x < 0.  Converges to
    |w e^w - x| <= tol * max(1, |x|); defined for x >= -1/e.
    """
    if x < -_INV_E:
        raise CalibrationError(f"lambert_w requires x >= -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if x >= 0.0:
        w = math.log1p(x)
    else:
        w = -1.0 + math.sqrt(2.0 * (1.0 + math.e * x))
        if w >= 0.0:
            w = -1e-12
    target = tol * max(1.0, abs(x))
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= target:
            return w
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        # damp steps that would leave the principal branch (w >= -1)
        while w - step <= -1.0:
            step *= 0.5
        w -= step
    raise CalibrationError(f"lambert_w failed to converge for x={x}")


def triehh_log_delta(tau: float) -> float:
    """Natural log of the trie protocol's per-level failure bound: -tau ln tau + tau - 1."""
    if tau <= 1.0:
        raise CalibrationError(f"triehh_delta requires tau > 1, got {tau}")
    return -tau * math.log(tau) + tau - 1.0


def triehh_delta(tau: float) -> float:
    """Failure probability bound exp(-tau ln tau + tau - 1) for the trie protocol."""
    return math.exp(triehh_log_delta(tau))


def triehh_tau(delta: float) -> int:
    """Smallest integer threshold with triehh_delta(tau) <= delta.

    Solves (tau/e) ln(tau/e) = (1/e) ln(1/(e delta)) via Lambert W, i.e.
    tau = e * exp(W((1/e) ln(1/(e delta)))), then takes the ceiling.
    Requires delta < 1/e so that the real-valued solution exceeds 1.
    """
    if not 0.0 < delta < _INV_E:
        raise CalibrationError(f"triehh_tau requires 0 < delta < 1/e, got {delta}")
    arg = (-1.0 - math.log(delta)) / math.e
    tau_real = math.e * math.exp(lambert_w(arg))
    tau = math.ceil(tau_real)
    # guard against ceil landing one too low on exact-integer solutions
    if tau > 1 and triehh_delta(tau) > delta:
        tau += 1
    return tau


def triehh_sample_size(epsilon: float, L: int, tau: int, n: int) -> float:
    """Per-level expected sample size m = 9 * epsilon * n / (10 * L * tau).

    Returned as a real value; callers round as needed.  The derivation
    assumes the regime m <= n / (10 * tau) (the sample is a small fraction
    of the population); a violation is reported as a warning, since the
    formula remains the standard calibration outside it.
    """
    if epsilon < 0.0 or L < 1 or tau < 1 or n < 1:
        raise CalibrationError(
            f"triehh_sample_size requires epsilon >= 0, L, tau, n >= 1; "
            f"got ({epsilon}, {L}, {tau}, {n})"
        )
    m = 9.0 * epsilon * n / (10.0 * L * tau)
    if m > n / (10.0 * tau):
        warnings.warn(
            f"sample size m={m:.1f} exceeds the small-sample region "
            f"n/(10 tau) = {n / (10.0 * tau):.1f}; the epsilon bound is loose here",
            stacklevel=2,
        )
    return m


def triehh_sample_size_original(epsilon: float, L: int, tau: int, n: int) -> float:
    """Comparator sample size (1/tau) * (1 - exp(-epsilon/L)) * n.

    The rule used by the original trie protocol; agrees closely with
    triehh_sample_size for small epsilon/L.
    """
    if L < 1 or tau < 1 or n < 1:
        raise CalibrationError(f"invalid (L, tau, n) = ({L}, {tau}, {n})")
    return (1.0 - math.exp(-epsilon / L)) * n / tau


@dataclass(frozen=True)
class TrieHHLegacyParams:
    """Parameter bundle for the original trie protocol's analysis.

    gamma_legacy is the sample-fraction factor in m = gamma * sqrt(n); it is
    unrelated to the relative-error gamma of the frequency estimation bounds.
    """

    n: int
    gamma_legacy: float
    L: int
    tau: int
    m: int

    def __post_init__(self):
        if self.m > self.n:
            raise CalibrationError(f"m={self.m} exceeds population n={self.n}")
        if self.L < 1:
            raise CalibrationError(f"L must be >= 1, got {self.L}")

    @classmethod
    def for_target(cls, epsilon: float, delta: float, L: int, n: int) -> "TrieHHLegacyParams":
        tau = triehh_tau(delta)
        m = int(triehh_sample_size(epsilon, L, tau, n))
        gamma = m / math.sqrt(n)
        return cls(n=n, gamma_legacy=gamma, L=L, tau=tau, m=m)
