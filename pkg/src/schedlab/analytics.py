"""Closed-form expected costs, competitive ratios, and excess-cost bounds.

Every function is a pure function of the type means and the per-type job
count.  Means are sorted ascending internally; callers never need to sort.
Bounds are returned as excess terms, i.e. the amount above the expected cost
of the perfect-prediction schedule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ParameterError, RunTrace, TypeParams

_EULER_GAMMA = 0.5772156649015328606


class BoundNotApplicableError(ValueError):
    """The requested bound's validity conditions do not hold."""


@dataclass(frozen=True)
class CostFormulaResult:
    kind: str
    value: float


def _sorted_lambdas(params: TypeParams) -> list[float]:
    return sorted(params.lambdas)


def _pairwise_min_mean(lam: Sequence[float]) -> float:
    # sum over unordered pairs of lam_k lam_l / (lam_k + lam_l), the expected
    # pairwise minimum of two independent exponentials
    total = 0.0
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            total += lam[i] * lam[j] / (lam[i] + lam[j])
    return total


def expected_cost_opt(params: TypeParams) -> float:
    """Expected flow time of the realization-aware shortest-first schedule."""
    lam = _sorted_lambdas(params)
    n = params.n
    s = sum(lam)
    return n * n * (0.25 * s + _pairwise_min_mean(lam)) + 0.75 * n * s


def expected_cost_ftpp(params: TypeParams) -> float:
    """Expected flow time when types run in increasing order of true mean."""
    lam = _sorted_lambdas(params)
    n, K = params.n, params.K
    s = sum(lam)
    tail = sum((K - (ell + 1)) * lam[ell] for ell in range(K))
    return n * n * (0.5 * s + tail) + 0.5 * n * s


def expected_cost_rr(params: TypeParams) -> float:
    """Expected flow time of equal processor sharing over all unfinished jobs.

    Each pair of jobs delays each other by twice the pairwise minimum, which
    gives exactly twice the optimal cost minus the total expected work.
    """
    return 2.0 * expected_cost_opt(params) - params.n * sum(params.lambdas)


def cr_ftpp_exact(params: TypeParams) -> float:
    """Exact competitive ratio of the mean-ordered schedule."""
    return expected_cost_ftpp(params) / expected_cost_opt(params)


def cr_ftpp_upper_2types(lam: float) -> float:
    """Two-type competitive-ratio bound 2 - 4(lam-1)/((1+lam)^2 + 4 lam)."""
    if lam < 1.0:
        raise ParameterError("the two-type bound is stated for lam >= 1")
    return 2.0 - 4.0 * (lam - 1.0) / ((1.0 + lam) ** 2 + 4.0 * lam)


def cr_ftpp_upper_Ktypes(params: TypeParams) -> float:
    """K-type competitive-ratio bound 2 - f(lambdas), valid for all n."""
    lam = _sorted_lambdas(params)
    K = params.K
    pair = _pairwise_min_mean(lam)
    tail = sum((K - (ell + 1)) * lam[ell] for ell in range(K))
    f = (2.0 * pair - tail) / (0.25 * sum(lam) + pair)
    return 2.0 - f


# ---------------------------------------------------------------------------
# The inverse-square mean sequence and its competitive-ratio value
#
# With means 1/(K-k+1)^2 the large-n competitive-ratio bound equals
# (H - B/2) / (B/4 + A) where H and B are the partial harmonic and
# inverse-square sums and A is the double sum of 1/(k^2 + l^2) over l < k.
# As K grows the value decreases toward 4/pi.

_EXACT_PAIR_CUTOFF = 2048


def _harmonic(K: int) -> float:
    total = 0.0
    step = 10**7
    for start in range(1, K + 1, step):
        ks = np.arange(start, min(start + step, K + 1), dtype=np.float64)
        total += float(np.sum(1.0 / ks))
    return total


def _inv_square_sum(K: int) -> float:
    total = 0.0
    step = 10**7
    for start in range(1, K + 1, step):
        ks = np.arange(start, min(start + step, K + 1), dtype=np.float64)
        total += float(np.sum(1.0 / ks**2))
    return total


def _pair_inv_square_sum(K: int) -> float:
    """Double sum of 1/(k^2 + l^2) for 1 <= l < k <= K.

    Exact summation up to a cutoff; beyond it the inner sum is evaluated by
    Euler-Maclaurin (trapezoid plus first derivative correction), whose
    remainder is far below double precision for k > 2000.
    """
    k0 = min(K, _EXACT_PAIR_CUTOFF)
    total = 0.0
    for k in range(2, k0 + 1):
        l = np.arange(1.0, k)
        total += float(np.sum(1.0 / (k * k + l * l)))
    if K > k0:
        step = 10**7
        for start in range(k0 + 1, K + 1, step):
            k = np.arange(start, min(start + step, K + 1), dtype=np.float64)
            m = k - 1.0
            integral = (np.arctan(m / k) - np.arctan(1.0 / k)) / k
            f1 = 1.0 / (k * k + 1.0)
            fm = 1.0 / (k * k + m * m)
            fp1 = -2.0 / (k * k + 1.0) ** 2
            fpm = -2.0 * m / (k * k + m * m) ** 2
            total += float(np.sum(integral + 0.5 * (f1 + fm) + (fpm - fp1) / 12.0))
    return total


def cr_ftpp_tilde_series(K: int):
    """Inverse-square mean sequence and its competitive-ratio value.

    Returns ``(lambdas, cr)`` where ``lambdas[k-1] = 1/(K-k+1)^2`` and ``cr``
    is the partial-sum value (H - B/2)/(B/4 + A).
    """
    if K < 1:
        raise ParameterError("K must be >= 1")
    lambdas = 1.0 / np.arange(K, 0, -1, dtype=np.float64) ** 2
    H = _harmonic(K)
    B = _inv_square_sum(K)
    A = _pair_inv_square_sum(K)
    cr = (H - 0.5 * B) / (0.25 * B + A)
    return lambdas, cr


def cr_ftpp_tilde_bracket(K: int) -> tuple[float, float]:
    """Rigorous enclosure of the inverse-square-sequence CR value, any K.

    Uses the sandwich (H - B/2)/(pi H/4 + B/4) <= cr <= (H - B/2)/(pi H/4 -
    3B/4), which follows from pi H/4 - B <= A <= pi H/4.  For K beyond direct
    summation, H and B are themselves enclosed: ln K + g < H < ln K + g +
    1/(2K) and pi^2/6 - 1/K < B < pi^2/6, with g the Euler constant.  Works
    for arbitrarily large integer K, so the existence of a K with value below
    any target above 4/pi can be certified concretely.
    """
    if K < 2:
        raise ParameterError("the enclosure needs K >= 2")
    if K <= 10**8:
        h_lo = h_hi = _harmonic(K)
        b_lo = b_hi = _inv_square_sum(K)
    else:
        log_k = math.log(K)
        h_lo = log_k + _EULER_GAMMA
        h_hi = h_lo + 0.5 / K if K < 2**53 else math.nextafter(h_lo, math.inf)
        b_hi = math.pi**2 / 6.0
        b_lo = b_hi - (1.0 / K if K < 2**53 else 0.0)
    # lower envelope is increasing in H and decreasing in B; upper envelope
    # is decreasing in H and increasing in B
    lo = (h_lo - 0.5 * b_hi) / (0.25 * math.pi * h_lo + 0.25 * b_hi)
    hi = (h_lo - 0.5 * b_hi) / (0.25 * math.pi * h_lo - 0.75 * b_hi)
    lo_alt = (h_hi - 0.5 * b_lo) / (0.25 * math.pi * h_hi + 0.25 * b_lo)
    hi_alt = (h_hi - 0.5 * b_lo) / (0.25 * math.pi * h_hi - 0.75 * b_lo)
    return min(lo, lo_alt) * (1 - 1e-12), max(hi, hi_alt) * (1 + 1e-12)


# ---------------------------------------------------------------------------
# Excess-cost upper bounds (value above the perfect-prediction cost)


def _log_term(n: int, K: int, exponent: int) -> float:
    return math.log(2.0 * n * n * K**exponent)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise BoundNotApplicableError(message)


def _strict_gaps(lam: Sequence[float]) -> None:
    _require(
        all(lam[i] < lam[i + 1] for i in range(len(lam) - 1)),
        "gap-dependent bound needs strictly increasing means",
    )


def excess_upper_bound(kind: str, params: TypeParams, delta: float | None = None) -> float:
    """Evaluate one of the excess-cost upper bounds by name.

    Kinds: ``etc-u``, ``etc-u-gap``, ``ucb-u``, ``ucb-u-gap``,
    ``etc-u-tight2``, ``ucb-u-tight2``, ``etc-rr``, ``ucb-rr``,
    ``etc-u-2types``, ``etc-rr-2types``.  Raises
    :class:`BoundNotApplicableError` outside a bound's stated validity.
    """
    lam = _sorted_lambdas(params)
    n, K = params.n, params.K
    opt = expected_cost_opt(params)
    if kind == "etc-u":
        log3 = _log_term(n, K, 3)
        total = 0.0
        for k in range(1, K + 1):
            w = 0.5 * (k - 1) * (2 * K - k) + (K - k) ** 2
            total += w * lam[k - 1]
        return opt / n + total * n * math.sqrt(8.0 * n * log3)
    if kind == "etc-u-gap":
        _strict_gaps(lam)
        log3 = _log_term(n, K, 3)
        total = 0.0
        for k in range(2, K + 1):
            for ell in range(1, k):
                lk, ll = lam[k - 1], lam[ell - 1]
                total += (K - ell) * (lk + ll) ** 2 / (lk - ll)
        return opt / n + total * n * 8.0 * log3
    if kind == "ucb-u":
        log2k = _log_term(n, K, 2)
        return 2.0 * opt / n + n * (K - 1) * math.sqrt(3.0 * n * log2k) * sum(lam)
    if kind == "ucb-u-gap":
        _strict_gaps(lam)
        log2k = _log_term(n, K, 2)
        total = 0.0
        for k in range(2, K + 1):
            for ell in range(1, k):
                lk, ll = lam[k - 1], lam[ell - 1]
                total += (lk + ll) ** 2 / (lk - ll)
        return 2.0 * opt / n + total * 3.0 * n * log2k
    if kind in ("etc-u-tight2", "ucb-u-tight2"):
        _require(K == 2, "tight two-type bound needs K = 2")
        _require(lam[1] >= 3.0 * lam[0], "tight two-type bound needs lam2 >= 3 lam1")
        if kind == "etc-u-tight2":
            return 12.0 * lam[1] * n * _log_term(n, K, 3) + 2.0 * opt / n
        return 4.5 * lam[1] * n * _log_term(n, K, 2) + 4.0 * opt / n
    if kind == "etc-rr":
        log3 = _log_term(n, K, 3)
        total = sum((K - ell) ** 2 * lam[ell - 1] for ell in range(1, K + 1))
        return 12.0 * K * opt / n + 4.0 * n * math.sqrt(n * log3) * total
    if kind == "ucb-rr":
        _require(delta is not None, "the slotted bound needs the slot length")
        _require(delta <= lam[0] / 4.0, "slotted bound needs slot length <= lam1/4")
        _require(n >= max(20.0, 10.0 * math.log(K)), "slotted bound needs n >= max(20, 10 ln K)")
        log2k = _log_term(n, K, 2)
        total = sum((K - ell) * lam[ell - 1] for ell in range(1, K + 1))
        return 12.0 * K * opt / n + 6.0 * n * math.sqrt(2.0 * n * log2k) * total
    if kind == "etc-u-2types":
        _require(K == 2, "two-type instantiation needs K = 2")
        log3 = _log_term(n, K, 3)
        return n * (lam[0] + lam[1]) * math.sqrt(8.0 * n * log3) + 8.0 * opt / n
    if kind == "etc-rr-2types":
        _require(K == 2, "two-type instantiation needs K = 2")
        log3 = _log_term(n, K, 3)
        return 2.0 * n * lam[0] * (math.sqrt(4.0 * n * log3) + 1.0) + 16.0 * opt / n
    raise ParameterError(f"unknown upper bound kind {kind!r}")


UPPER_BOUND_KINDS = (
    "etc-u",
    "etc-u-gap",
    "ucb-u",
    "ucb-u-gap",
    "etc-u-tight2",
    "ucb-u-tight2",
    "etc-rr",
    "ucb-rr",
    "etc-u-2types",
    "etc-rr-2types",
)


def excess_lower_bound(kind: str, params: TypeParams) -> float:
    """Excess-cost lower bounds for non-preemptive algorithms.

    Kinds: ``small-gap`` and its ``small-gap-sqrtn`` corollary (K = 2), the
    K-type ``large-gap`` bound, and ``large-gap-tight2`` (K = 2 with
    lam2 >= 3 lam1).
    """
    lam = _sorted_lambdas(params)
    n, K = params.n, params.K
    if kind == "small-gap":
        _require(K == 2, "small-gap bound is stated for K = 2")
        l1, l2 = lam
        if l1 == l2:
            return 0.0
        return (l2 - l1) * n * n * math.exp(-n * (l2 - l1) ** 2 / (l1 * l2)) / 8.0
    if kind == "small-gap-sqrtn":
        _require(K == 2, "small-gap bound is stated for K = 2")
        l1, l2 = lam
        _require(
            l2 <= l1 * (1.0 + 1.0 / math.sqrt(n)),
            "sqrt-n corollary needs lam2 <= lam1 (1 + 1/sqrt(n))",
        )
        return (l1 + l2) * n * math.sqrt(n) * math.exp(-0.25) / 24.0
    if kind == "large-gap":
        return (n / K) * sum((2 * k - K - 1) * lam[k - 1] for k in range(1, K + 1))
    if kind == "large-gap-tight2":
        _require(K == 2, "tight two-type bound needs K = 2")
        _require(lam[1] >= 3.0 * lam[0], "tight two-type bound needs lam2 >= 3 lam1")
        return n * (lam[0] + lam[1]) / 4.0
    raise ParameterError(f"unknown lower bound kind {kind!r}")


LOWER_BOUND_KINDS = ("small-gap", "small-gap-sqrtn", "large-gap", "large-gap-tight2")


# ---------------------------------------------------------------------------
# Trace-level excess decomposition


def nonpreemptive_excess_decomposition(
    trace: RunTrace, params: TypeParams, include_preemption_slack: bool = False
) -> float:
    """Weighted count of longer-mean-before-shorter-mean completions.

    For a non-preemptive run, the mean of this statistic over seeds equals
    the mean excess flow time above the perfect-prediction schedule.  With
    ``include_preemption_slack`` the (K-1) n sum(lambda) slack of the
    type-wise non-preemptive upper bound is added, which is the right form
    for processor-sharing traces.
    """
    from .engine import inversion_counts  # local import to avoid a cycle

    lam = params.lambdas
    counts = inversion_counts(trace)
    total = 0.0
    for k in range(params.K):
        for ell in range(params.K):
            if lam[k] > lam[ell]:
                total += (lam[k] - lam[ell]) * counts[k][ell]
    if include_preemption_slack:
        total += (params.K - 1) * params.n * sum(lam)
    return total


# ---------------------------------------------------------------------------
# Registry for the CLI


FORMULAS = {
    "cost-opt": lambda params, **kw: expected_cost_opt(params),
    "cost-ftpp": lambda params, **kw: expected_cost_ftpp(params),
    "cost-rr": lambda params, **kw: expected_cost_rr(params),
    "cr-ftpp": lambda params, **kw: cr_ftpp_exact(params),
    "cr-ftpp-upper": lambda params, **kw: cr_ftpp_upper_Ktypes(params),
}


def evaluate_formula(kind: str, params: TypeParams, **kwargs) -> CostFormulaResult:
    if kind in FORMULAS:
        return CostFormulaResult(kind, FORMULAS[kind](params))
    if kind.startswith("excess-upper:"):
        sub = kind.split(":", 1)[1]
        return CostFormulaResult(kind, excess_upper_bound(sub, params, kwargs.get("delta")))
    if kind.startswith("excess-lower:"):
        sub = kind.split(":", 1)[1]
        return CostFormulaResult(kind, excess_lower_bound(sub, params))
    raise ParameterError(f"unknown formula kind {kind!r}")
