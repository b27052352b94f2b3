"""Concentration and index machinery behind the learning policies.

Everything here is a pure function: Hoeffding radii for paired-comparison
elimination, chi-square quantiles for the optimistic mean lower bound,
Bernoulli KL divergence, and the KL-UCB index solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .core import ParameterError

_ITMAX = 20000
_EPS = 1e-15
_FPMIN = 1e-300

# Elimination radius uses log(2 n^2 K^c); the analyzed constant is c=3, the
# pseudo-code constant c=4.  Both are selectable everywhere.
_LOG_CONSTANTS = {"k3": 3, "k4": 4}


def _log_constant_exponent(constant: str) -> int:
    try:
        return _LOG_CONSTANTS[constant]
    except KeyError:
        raise ParameterError(
            f"unknown elimination constant {constant!r}; expected one of "
            f"{sorted(_LOG_CONSTANTS)}"
        ) from None


def hoeffding_radius(m: int, n: int, K: int, constant: str = "k3") -> float:
    """Radius sqrt(log(2 n^2 K^c) / (2 m)) of the paired win-rate estimate.

    m = 0 returns +inf: with no comparisons no elimination is possible.
    """
    c = _log_constant_exponent(constant)
    if m < 0 or n < 1 or K < 2:
        raise ParameterError("need m >= 0, n >= 1, K >= 2")
    if m == 0:
        return math.inf
    return math.sqrt(math.log(2.0 * n * n * K**c) / (2.0 * m))


# ---------------------------------------------------------------------------
# Regularized lower incomplete gamma and the chi-square quantile


def _lower_gamma_series(a: float, x: float) -> float:
    # power series of P(a, x), converges fast for x < a + 1
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _upper_gamma_cf(a: float, x: float) -> float:
    # modified Lentz continued fraction of Q(a, x), for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x), directly summed."""
    if a <= 0.0:
        raise ParameterError("shape parameter must be positive")
    if x < 0.0:
        raise ParameterError("argument must be nonnegative")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _lower_gamma_series(a, x)
    return 1.0 - _upper_gamma_cf(a, x)


def chi2_cdf(dof: int, x: float) -> float:
    """CDF of the chi-square distribution with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ParameterError("degrees of freedom must be >= 1")
    return reg_lower_gamma(0.5 * dof, 0.5 * x)


@lru_cache(maxsize=None)
def chi2_quantile(dof: int, p: float) -> float:
    """Quantile of chi-square: the x with P(dof/2, x/2) = p.

    Solved by bracketed bisection against the directly computed CDF, to
    absolute tolerance well below 1e-10; accurate at the extreme percentiles
    the optimistic index needs.
    """
    if dof < 1:
        raise ParameterError("degrees of freedom must be >= 1")
    if not (0.0 < p < 1.0):
        raise ParameterError("percentile must lie strictly inside (0, 1)")
    hi = dof + 10.0 * math.sqrt(2.0 * dof) + 10.0
    while chi2_cdf(dof, hi) < p:
        hi *= 2.0
        if hi > 1e300:  # pragma: no cover - unreachable for p < 1
            raise ParameterError("quantile bracket failed")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(dof, mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12:
            break
    return 0.5 * (lo + hi)


def ucbu_lower_bound(sum_sizes: float, m: int, n: int, K: int) -> float:
    """Optimistic mean lower bound 2*sum / chi2_{2m}(1 - 1/(2 n^2 K^2)).

    m = 0 returns 0, the maximally optimistic value that forces every type
    to be tried once.
    """
    if sum_sizes < 0.0 or m < 0 or n < 1 or K < 1:
        raise ParameterError("negative inputs are not allowed")
    if m == 0:
        return 0.0
    p = 1.0 - 1.0 / (2.0 * n * n * K * K)
    return 2.0 * sum_sizes / chi2_quantile(2 * m, p)


# ---------------------------------------------------------------------------
# Bernoulli KL divergence and the KL-UCB index


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence d(p, q) between Bernoulli(p) and Bernoulli(q).

    Follows the usual conventions 0 log 0 = 0 and d(p, q) = +inf when q is
    degenerate (0 or 1) while p is not.
    """
    if not (0.0 <= p <= 1.0) or not (0.0 <= q <= 1.0):
        raise ParameterError("KL arguments must lie in [0, 1]")
    if q <= 0.0 or q >= 1.0:
        return 0.0 if p == q else math.inf
    if p <= 0.0:
        return -math.log1p(-q)
    if p >= 1.0:
        return -math.log(q)
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def klucb_index(mu_hat: float, pulls: int, bonus: float) -> float:
    """Largest mu in [mu_hat, 1] with d(mu_hat, mu) <= bonus / pulls.

    Located by bisection to 1e-9.  Callers handle pulls = 0 themselves (the
    index is then 1 by convention).
    """
    if pulls < 1:
        raise ParameterError("pulls must be >= 1")
    if not (0.0 <= mu_hat <= 1.0):
        raise ParameterError("empirical mean must lie in [0, 1]")
    if bonus < 0.0:
        raise ParameterError("bonus must be nonnegative")
    if math.isinf(bonus) or mu_hat >= 1.0:
        return 1.0
    threshold = bonus / pulls
    lo, hi = mu_hat, 1.0
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if bernoulli_kl(mu_hat, mid) <= threshold:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class PairedComparison:
    """Win counter of one ordered type pair: how often k beat ell."""

    wins: int = 0
    total: int = 0

    def __post_init__(self):
        if not (0 <= self.wins <= self.total):
            raise ParameterError("need 0 <= wins <= total")

    @property
    def rhat(self) -> float:
        return self.wins / self.total if self.total else 0.0

    def radius(self, n: int, K: int, constant: str = "k3") -> float:
        return hoeffding_radius(self.total, n, K, constant)

    def dominates(self, n: int, K: int, constant: str = "k3") -> bool:
        """True when the win rate clears 0.5 by the Hoeffding radius."""
        if self.total == 0:
            return False
        return self.rhat - self.radius(n, K, constant) >= 0.5
