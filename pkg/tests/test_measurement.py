import math

import numpy as np
import pytest
from scipy import integrate, stats

from softqec.measurement import (
    AmplitudeDampingModel,
    GaussianModel,
    ad_soft_flip_probs,
    average_flip_prob,
    harden,
    hardened_flip_prob,
    likelihood_ratio,
    optimize_measurement,
    sigma_for_hardened,
    soft_flip_prob,
)

PHI = stats.norm.cdf


def test_gaussian_harden_examples():
    g = GaussianModel(1.0)
    assert harden(g, 0.3) == 0
    assert harden(g, -0.3) == 1
    assert harden(g, 0.0) == 0  # tie resolves to 0


def test_gaussian_likelihood_examples():
    g = GaussianModel(1.0)
    assert likelihood_ratio(g, 0.5) == pytest.approx(math.exp(-1), rel=1e-12)
    assert likelihood_ratio(g, 2.0) == pytest.approx(math.exp(-4), rel=1e-12)
    assert likelihood_ratio(g, 0.0) == pytest.approx(1.0, rel=1e-12)


def test_gaussian_flip_prob_closed_form_and_symmetry():
    g = GaussianModel(0.5)
    assert soft_flip_prob(g, 0) == pytest.approx(PHI(-2.0), rel=1e-12)
    assert abs(soft_flip_prob(g, 0) - soft_flip_prob(g, 1)) < 1e-12
    # against direct quadrature of the density over the losing region
    q, _ = integrate.quad(g.pdf1, 0.0, np.inf)
    assert soft_flip_prob(g, 1) == pytest.approx(q, abs=1e-10)


def test_gaussian_flip_prob_with_boundary():
    g = GaussianModel(0.5, beta=0.8)
    thr = 0.8 * 0.5
    q0, _ = integrate.quad(g.pdf0, -np.inf, thr)
    q1, _ = integrate.quad(g.pdf1, thr, np.inf)
    assert g.soft_flip_prob(0) == pytest.approx(q0, abs=1e-12)
    assert g.soft_flip_prob(1) == pytest.approx(q1, abs=1e-12)


def test_sigma_for_hardened():
    assert sigma_for_hardened(PHI(-2.0)) == pytest.approx(0.5, rel=1e-12)
    for p in (0.3, 0.1, 0.01, 1e-4):
        sigma = sigma_for_hardened(p)
        assert soft_flip_prob(GaussianModel(sigma), 0) == pytest.approx(p, abs=1e-9)
    assert sigma_for_hardened(1e-8) < sigma_for_hardened(1e-3)
    for bad in (0.0, 0.5, 0.9, -0.1):
        with pytest.raises(ValueError):
            sigma_for_hardened(bad)


def test_hardened_flip_prob():
    assert hardened_flip_prob(0.0, 0.3) == 0.3
    assert hardened_flip_prob(0.3, 0.0) == 0.3
    assert hardened_flip_prob(0.01, 0.02) == pytest.approx(0.0298, abs=1e-15)


AD_REGIMES = [
    # (tau_m, tau_a, tau_f)
    (400e-9, 15e-6, 100e-9),
    (400e-9, 800e-9, 100e-9),
    (100e-9, 1000e-9, 100e-9),
    (2000e-9, 15e-6, 100e-9),
    (200e-6, 15e-6, 100e-9),  # tau_m/tau_f = 2000: stresses the scaled-erfc path
]


@pytest.mark.parametrize("tau_m,tau_a,tau_f", AD_REGIMES)
def test_ad_pdf_normalization(tau_m, tau_a, tau_f):
    m = AmplitudeDampingModel(tau_m, tau_a, tau_f)
    n0, _ = integrate.quad(m.pdf0, -np.inf, np.inf, limit=300)
    n1, _ = integrate.quad(m.pdf1, -np.inf, np.inf, limit=300)
    assert n0 == pytest.approx(1.0, abs=1e-6)
    assert n1 == pytest.approx(1.0, abs=1e-6)


def test_ad_gaussian_limits():
    p0, p1 = ad_soft_flip_probs(4.0, math.inf, 1.0, 0.0)
    assert p0 == pytest.approx(PHI(-2.0), rel=1e-12)
    assert p1 == pytest.approx(PHI(-2.0), rel=1e-12)
    p0, p1 = ad_soft_flip_probs(1.0, math.inf, 1.0, 0.0)
    assert p0 == pytest.approx(PHI(-1.0), rel=1e-12)
    assert p1 == pytest.approx(PHI(-1.0), rel=1e-12)


@pytest.mark.parametrize("tau_m,tau_a,tau_f", AD_REGIMES)
@pytest.mark.parametrize("beta", [0.0, 0.7, 2.0, -1.0])
def test_ad_closed_form_vs_quadrature(tau_m, tau_a, tau_f, beta):
    m = AmplitudeDampingModel(tau_m, tau_a, tau_f)
    p0, p1 = ad_soft_flip_probs(tau_m, tau_a, tau_f, beta)
    thr = beta * m.scale
    q0, _ = integrate.quad(m.pdf0, -np.inf, thr, limit=300)
    q1, _ = integrate.quad(m.pdf1, thr, np.inf, limit=300)
    assert abs(p0 - q0) < 1e-8
    assert abs(p1 - q1) < 1e-8


def test_ad_pdf1_gaussian_limit_supnorm():
    m = AmplitudeDampingModel(1.0, 1e6, 0.25)
    g = GaussianModel(0.5)
    mus = np.linspace(-5.0, 5.0, 2001)
    assert np.max(np.abs(m.pdf1(mus) - g.pdf1(mus))) < 1e-4


def test_ad_strong_damping_approaches_half():
    # with tau_m >> tau_a the distributions overlap completely
    vals = []
    for ratio in (10.0, 100.0, 1000.0):
        m = AmplitudeDampingModel(ratio, 1.0, 0.25 * ratio)
        vals.append(soft_flip_prob(m, 1))
    assert vals == sorted(vals)
    assert vals[-1] == pytest.approx(0.5, abs=1e-3)


def test_ad_ml_flip_prob_matches_quadrature():
    m = AmplitudeDampingModel(400e-9, 800e-9, 100e-9)
    thr = m.decision_threshold()
    q0, _ = integrate.quad(m.pdf0, -np.inf, thr, limit=300)
    q1, _ = integrate.quad(m.pdf1, thr, np.inf, limit=300)
    assert m.soft_flip_prob(0) == pytest.approx(q0, abs=1e-9)
    assert m.soft_flip_prob(1) == pytest.approx(q1, abs=1e-9)


def test_ad_ml_threshold_matches_pointwise_rule():
    # the closed-form flip probabilities assume a single density crossing;
    # verify the pointwise ML rule equals the threshold rule on a dense grid
    for tau_m, tau_a, tau_f in AD_REGIMES[:4]:
        m = AmplitudeDampingModel(tau_m, tau_a, tau_f)
        thr = m.decision_threshold()
        mus = np.linspace(-1 - 8 * m.scale, 1 + 8 * m.scale, 4001)
        bits = m.harden(mus)
        assert np.array_equal(bits == 1, mus < thr)


def test_ad_sampler_matches_pdf_ks():
    m = AmplitudeDampingModel(400e-9, 800e-9, 100e-9)
    rng = np.random.default_rng(42)
    ks = stats.kstest(m.sample1(rng, 200_000), m.cdf1)
    assert ks.statistic < 0.01
    ks0 = stats.kstest(m.sample0(rng, 100_000), stats.norm(1.0, m.scale).cdf)
    assert ks0.statistic < 0.01


@pytest.mark.parametrize(
    "model",
    [GaussianModel(0.7), AmplitudeDampingModel(400e-9, 2e-6, 100e-9)],
    ids=["gaussian", "damping"],
)
def test_empirical_flip_rate_matches_closed_form(model):
    rng = np.random.default_rng(7)
    n = 1_000_000
    for ideal in (0, 1):
        mu = model.sample(ideal, rng, n)
        flips = int(np.sum(model.harden(mu) != ideal))
        p = model.soft_flip_prob(ideal)
        sigma = math.sqrt(p * (1 - p) * n)
        assert abs(flips - n * p) < 3 * sigma


def test_likelihood_ratio_clamped_for_shifted_boundary():
    g = GaussianModel(1.0, beta=1.5)
    # between the ML boundary (0) and the shifted one, the raw ratio would
    # exceed 1; the reported value must stay in [0, 1]
    mus = np.linspace(-3, 3, 601)
    L = g.likelihood_ratio(mus)
    assert np.all((0.0 <= L) & (L <= 1.0))
    assert g.likelihood_ratio(0.75) == 1.0


def test_weight_and_bit_consistency():
    m = AmplitudeDampingModel(400e-9, 2e-6, 100e-9)
    rng = np.random.default_rng(3)
    mu = np.concatenate([m.sample0(rng, 3000), m.sample1(rng, 3000)])
    w, bit = m.weight_and_bit(mu)
    assert np.all(w >= 0)
    assert np.array_equal(bit, m.harden(mu))
    assert np.allclose(np.exp(-w), m.likelihood_ratio(mu))


def test_optimize_measurement_interior_minimum():
    tau_a, tau_f = 15e-6, 100e-9
    tau_m, beta, p = optimize_measurement(tau_a, tau_f)
    assert average_flip_prob(0.5 * tau_m, tau_a, tau_f, beta) > p
    assert average_flip_prob(2.0 * tau_m, tau_a, tau_f, beta) > p
    # the reported value beats everything on a coarse probe grid
    for tm in np.geomspace(2e-9, 5e-5, 40):
        for b in np.linspace(0.0, 3.0, 13):
            assert p <= average_flip_prob(tm, tau_a, tau_f, b) + 1e-12


def test_optimize_measurement_no_decay_pushes_to_bound():
    tau_f = 100e-9
    bounds = (1e-9, 1e-5)
    tau_m, beta, p = optimize_measurement(math.inf, tau_f, tau_m_bounds=bounds)
    assert tau_m == pytest.approx(bounds[1], rel=1e-3)
    assert abs(beta) < 1e-4
