import math

import numpy as np
import pytest
import scipy.special
import scipy.stats

from schedlab.core import ParameterError
from schedlab.stats import (
    PairedComparison,
    bernoulli_kl,
    chi2_cdf,
    chi2_quantile,
    hoeffding_radius,
    klucb_index,
    reg_lower_gamma,
    ucbu_lower_bound,
)


# ---------------------------------------------------------------------------
# Hoeffding radius


def test_hoeffding_radius_examples():
    # sqrt(ln 40000 / 16) and sqrt(ln 40000 / 60), ln 40000 ~ 10.5966
    assert hoeffding_radius(8, 50, 2) == pytest.approx(0.8138118153593646, abs=1e-12)
    assert hoeffding_radius(30, 50, 2) == pytest.approx(0.4202506143778192, abs=1e-12)
    assert hoeffding_radius(0, 50, 2) == math.inf


def test_hoeffding_radius_identity():
    for m in (1, 7, 100):
        for n, K in ((10, 2), (50, 3)):
            lhs = hoeffding_radius(m, n, K) * math.sqrt(2 * m)
            rhs = math.sqrt(math.log(2.0 * n * n * K**3))
            assert lhs == pytest.approx(rhs, rel=1e-15)


def test_hoeffding_radius_k4_variant():
    v3 = hoeffding_radius(10, 50, 2, constant="k3")
    v4 = hoeffding_radius(10, 50, 2, constant="k4")
    assert v4 > v3
    assert v4 == pytest.approx(math.sqrt(math.log(2 * 2500 * 16) / 20), rel=1e-15)
    with pytest.raises(ParameterError):
        hoeffding_radius(10, 50, 2, constant="k5")


# ---------------------------------------------------------------------------
# Incomplete gamma / chi-square quantile


def test_reg_lower_gamma_matches_scipy():
    for a in (0.5, 1.0, 2.0, 17.0, 200.0):
        for x in (1e-6, 0.3, 1.0, a, a + 5876.0 * 0.001, 3.0 * a + 10.0):
            assert reg_lower_gamma(a, x) == pytest.approx(
                float(scipy.special.gammainc(a, x)), rel=1e-12, abs=1e-300
            )


def test_chi2_quantile_examples():
    # dof=2 is Exponential(mean 2): median 2 ln 2, 95th percentile -2 ln 0.05
    assert chi2_quantile(2, 0.5) == pytest.approx(2.0 * math.log(2.0), abs=1e-10)
    assert chi2_quantile(2, 0.95) == pytest.approx(-2.0 * math.log(0.05), abs=1e-10)
    assert chi2_quantile(4, 0.5) == pytest.approx(3.356694, abs=1e-5)
    # independent oracle
    assert chi2_quantile(4, 0.5) == pytest.approx(
        float(scipy.stats.chi2.ppf(0.5, 4)), abs=1e-9
    )


def test_chi2_quantile_round_trip_subset():
    for dof in (2, 4, 20, 100, 400):
        for p in (1e-6, 0.01, 0.5, 0.99, 1.0 - 1e-6):
            assert abs(chi2_cdf(dof, chi2_quantile(dof, p)) - p) <= 1e-9


def test_chi2_quantile_monotone():
    qs = [chi2_quantile(10, p) for p in (0.01, 0.3, 0.5, 0.9, 0.999)]
    assert qs == sorted(qs) and len(set(qs)) == len(qs)
    ds = [chi2_quantile(dof, 0.7) for dof in (1, 2, 5, 40, 200)]
    assert ds == sorted(ds) and len(set(ds)) == len(ds)


def test_chi2_quantile_rejects_bad_p():
    for p in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ParameterError):
            chi2_quantile(2, p)


# ---------------------------------------------------------------------------
# Optimistic mean lower bound


def test_ucbu_lower_bound_examples():
    # percentile 1 - 1/(2 n^2 K^2) = 0.875 at n=1, K=2; chi2_2 quantile is
    # -2 ln(1 - p) so the bound has a closed form to check against
    expected = 2.0 / (-2.0 * math.log(0.125))
    assert ucbu_lower_bound(1.0, 1, 1, 2) == pytest.approx(expected, rel=1e-9)
    assert ucbu_lower_bound(3.0, 1, 1, 2) == pytest.approx(3.0 * expected, rel=1e-9)
    assert ucbu_lower_bound(123.0, 0, 1, 2) == 0.0
    assert ucbu_lower_bound(0.0, 5, 10, 2) == 0.0


def test_ucbu_lower_bound_is_a_lower_bound_in_probability():
    # the bound should undershoot the true mean except with tiny probability
    rng = np.random.default_rng(42)
    n, K, lam = 10, 2, 1.7
    failures = 0
    runs = 2000
    for _ in range(runs):
        xs = rng.exponential(lam, size=n)
        for m in range(1, n + 1):
            if ucbu_lower_bound(float(xs[:m].sum()), m, n, K) > lam:
                failures += 1
                break
    assert failures / runs <= 1.0 / (n * K)


def test_ucbu_lower_bound_rejects_negative():
    with pytest.raises(ParameterError):
        ucbu_lower_bound(-1.0, 1, 1, 2)
    with pytest.raises(ParameterError):
        ucbu_lower_bound(1.0, -1, 1, 2)


# ---------------------------------------------------------------------------
# Bernoulli KL and KL-UCB index


def test_bernoulli_kl_examples():
    assert bernoulli_kl(0.5, 0.5) == 0.0
    assert bernoulli_kl(0.5, 0.75) == pytest.approx(0.5 * math.log(4.0 / 3.0), rel=1e-12)
    assert bernoulli_kl(0.0, 0.3) == pytest.approx(-math.log(0.7), rel=1e-12)
    assert bernoulli_kl(0.3, 0.0) == math.inf
    assert bernoulli_kl(0.0, 0.0) == 0.0
    assert bernoulli_kl(1.0, 1.0) == 0.0
    with pytest.raises(ParameterError):
        bernoulli_kl(-0.1, 0.5)


def test_bernoulli_kl_pinsker_small_grid():
    grid = np.linspace(0.0, 1.0, 41)
    for p in grid:
        for q in grid:
            d = bernoulli_kl(float(p), float(q))
            assert d >= 2.0 * (p - q) ** 2 - 1e-12
            mx = max(p, q)
            if mx > 0:
                assert d >= (p - q) ** 2 / (2.0 * mx) - 1e-12


def test_klucb_index_examples():
    bonus = math.log(400.0)
    # closed form at mu_hat = 0: 1 - exp(-bonus/pulls)
    assert klucb_index(0.0, 10, bonus) == pytest.approx(
        1.0 - math.exp(-bonus / 10.0), abs=1e-8
    )
    assert klucb_index(1.0, 5, 12.3) == 1.0
    assert klucb_index(0.3, 7, math.inf) == 1.0
    # brute-force grid oracle for the general case
    mu, pulls = 0.2, 50
    threshold = bonus / pulls
    qs = np.clip(np.arange(mu, 1.0, 1e-6), mu, 1.0 - 1e-12)
    feasible = qs[[bernoulli_kl(mu, float(q)) <= threshold for q in qs]]
    assert klucb_index(mu, pulls, bonus) == pytest.approx(float(feasible[-1]), abs=1e-5)
    assert klucb_index(mu, pulls, bonus) == pytest.approx(0.4318505, abs=1e-4)


def test_klucb_index_monotonicity():
    bonus = math.log(400.0)
    for mu in (0.0, 0.2, 0.9):
        vals = [klucb_index(mu, T, bonus) for T in (1, 3, 10, 100)]
        assert all(v >= mu for v in vals)
        assert vals == sorted(vals, reverse=True)
    assert klucb_index(0.4, 10, 2.0) > klucb_index(0.4, 10, 1.0)


def test_paired_comparison():
    pc = PairedComparison(wins=28, total=30)
    assert pc.rhat == pytest.approx(28.0 / 30.0)
    # 0.9333 - 0.4202 > 0.5 clears the elimination line
    assert pc.dominates(50, 2)
    assert not PairedComparison(wins=8, total=8).dominates(50, 2)
    assert not PairedComparison().dominates(50, 2)
    with pytest.raises(ParameterError):
        PairedComparison(wins=5, total=3)
