"""Soft measurement models.

A soft measurement reports a continuous outcome mu instead of a bit.  A model
is a pair of conditional densities f0 (ideal outcome 0) and f1 (ideal outcome
1) plus samplers.  Hardening maps mu to the more likely bit; the likelihood
ratio of the discarded hypothesis is what decoders consume as soft
information.

Two families ship:

* GaussianModel: f0 = N(+1, sigma^2), f1 = N(-1, sigma^2).
* AmplitudeDampingModel: f0 = N(+1, s^2) with s^2 = tau_f/tau_m; f1 is the
  readout of a qubit that decays at an Exp(tau_a) time during the integration
  window tau_m, convolved with the same read noise.  Closed forms are
  evaluated through scaled complementary error functions so they stay finite
  when tau_m/tau_f is large.

All hardening thresholds beta are expressed in units of the f0 standard
deviation (mu_threshold = beta * scale); beta=None means the pointwise
maximum-likelihood rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import erfc, erfcx, log_ndtr, ndtri

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def hardened_flip_prob(p_m: float, p_soft: float) -> float:
    """Net flip probability of a hard flip channel followed by a soft flip."""
    return p_m + p_soft - p_m * p_soft


def sigma_for_hardened(p_target: float) -> float:
    """Gaussian spread whose ML soft-flip probability is p_target.

    The flip probability of N(+-1, sigma^2) under the mu >= 0 rule is
    Phi(-1/sigma), so the inverse is exact: sigma = -1/ndtri(p).
    """
    if not 0.0 < p_target < 0.5:
        raise ValueError(f"target flip probability must be in (0, 0.5), got {p_target}")
    return -1.0 / float(ndtri(p_target))


class SoftModel:
    """Base class: subclasses provide logpdf0/logpdf1, samplers and a scale.

    beta is an optional explicit decision boundary (in units of the f0
    standard deviation); None selects the maximum-likelihood rule.
    """

    beta = None

    # --- densities -------------------------------------------------------
    def logpdf0(self, mu):
        raise NotImplementedError

    def logpdf1(self, mu):
        raise NotImplementedError

    def pdf0(self, mu):
        return np.exp(self.logpdf0(mu))

    def pdf1(self, mu):
        return np.exp(self.logpdf1(mu))

    @property
    def scale(self) -> float:
        """Standard deviation of f0 (the unit for beta)."""
        raise NotImplementedError

    # --- sampling --------------------------------------------------------
    def sample0(self, rng, size=None):
        raise NotImplementedError

    def sample1(self, rng, size=None):
        raise NotImplementedError

    def sample(self, ideal, rng, size=None):
        return self.sample1(rng, size) if ideal else self.sample0(rng, size)

    # --- hardening -------------------------------------------------------
    def harden(self, mu):
        """0 where f0(mu) >= f1(mu) (ties to 0), or mu >= beta*scale."""
        mu = np.asarray(mu)
        if self.beta is None:
            bit = self.logpdf0(mu) < self.logpdf1(mu)
        else:
            bit = mu < self.beta * self.scale
        return bit.astype(np.uint8) if bit.ndim else int(bit)

    def weight_and_bit(self, mu):
        """Hardened bit and soft weight -log L, vectorized.

        L is the likelihood ratio of the discarded hypothesis, clamped into
        [0, 1] (the clamp only matters for non-ML decision boundaries).
        """
        mu = np.asarray(mu, dtype=float)
        l0 = self.logpdf0(mu)
        l1 = self.logpdf1(mu)
        bit = np.asarray(self.harden(mu))
        chosen = np.where(bit, l1, l0)
        other = np.where(bit, l0, l1)
        w = np.maximum(chosen - other, 0.0)
        return w, bit

    def likelihood_ratio(self, mu):
        """f of the discarded bit over f of the kept bit, in [0, 1]."""
        w, _ = self.weight_and_bit(mu)
        return np.exp(-w)

    # --- flip probabilities ----------------------------------------------
    def _ml_threshold(self) -> float:
        """First density crossing coming from the f1 side.

        f1 dominates far below the f0 mean for every model here; the decision
        rule is the first sign change of log f0 - log f1 scanning upward.  (A
        second crossing can reappear in a far tail of vanishing mass under
        strong damping; hardening itself always uses the pointwise rule.)
        """
        lo, hi = -1.0 - 40.0 * self.scale, 1.0 + 40.0 * self.scale
        grid = np.linspace(lo, hi, 4001)
        f = np.asarray(self.logpdf0(grid) - self.logpdf1(grid))
        if f[0] >= 0:
            return -np.inf  # always harden to 0
        idx = np.nonzero(f >= 0)[0]
        if idx.size == 0:
            return np.inf  # always harden to 1
        i = idx[0]
        fn = lambda mu: float(self.logpdf0(mu) - self.logpdf1(mu))
        return optimize.brentq(fn, grid[i - 1], grid[i], xtol=1e-14)

    def decision_threshold(self) -> float:
        """The mu value separating hardened 1 (below) from 0 (above)."""
        if self.beta is not None:
            return self.beta * self.scale
        return self._ml_threshold()

    def soft_flip_prob(self, ideal: int) -> float:
        """Probability that hardening disagrees with the ideal bit.

        Generic implementation by adaptive quadrature of the matching
        density over the losing side of the decision threshold.
        """
        thr = self.decision_threshold()
        if not math.isfinite(thr):
            # every outcome hardens to the same bit: 0 if thr=-inf, 1 if +inf
            always_zero = thr == -math.inf
            return float(bool(ideal) == always_zero)
        pdf = self.pdf1 if ideal else self.pdf0
        if ideal:
            val, err = integrate.quad(pdf, thr, np.inf, limit=200)
        else:
            val, err = integrate.quad(pdf, -np.inf, thr, limit=200)
        if err > 1e-8:
            raise RuntimeError(f"quadrature did not converge (err={err:.2e})")
        return val

    def flip_probs(self):
        return self.soft_flip_prob(0), self.soft_flip_prob(1)


@dataclass(frozen=True)
class GaussianModel(SoftModel):
    """Symmetric Gaussian soft readout: f0 = N(+1, sigma^2), f1 = N(-1, sigma^2)."""

    sigma: float
    beta: float | None = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def scale(self) -> float:
        return self.sigma

    def logpdf0(self, mu):
        mu = np.asarray(mu, dtype=float)
        return -((mu - 1.0) ** 2) / (2.0 * self.sigma**2) - math.log(self.sigma) - _LOG_SQRT_2PI

    def logpdf1(self, mu):
        mu = np.asarray(mu, dtype=float)
        return -((mu + 1.0) ** 2) / (2.0 * self.sigma**2) - math.log(self.sigma) - _LOG_SQRT_2PI

    def sample0(self, rng, size=None):
        return rng.normal(1.0, self.sigma, size)

    def sample1(self, rng, size=None):
        return rng.normal(-1.0, self.sigma, size)

    def soft_flip_prob(self, ideal: int) -> float:
        b = 0.0 if self.beta is None else self.beta
        # flip|0: mu below beta*sigma; flip|1: mu at or above it
        z = b - 1.0 / self.sigma if ideal == 0 else -b - 1.0 / self.sigma
        return float(np.exp(log_ndtr(z)))


def _ad_params(tau_m, tau_a, tau_f):
    if tau_m <= 0 or tau_f <= 0 or tau_a <= 0:
        raise ValueError("durations must be positive")
    r = tau_m / tau_a  # 0 when tau_a is infinite
    s = math.sqrt(tau_f / tau_m)
    u = math.sqrt(tau_m / (2.0 * tau_f))
    k = 0.0 if math.isinf(tau_a) else math.sqrt(tau_m * tau_f / 8.0) / tau_a
    return r, s, u, k


def _log_scaled_erf_diff(E, hi, lo, e_m_hi2, e_m_lo2, gap_sq):
    """log of exp(E) * (erf(hi) - erf(lo)) for hi > lo, elementwise stable.

    e_m_hi2 = E - hi^2 and e_m_lo2 = E - lo^2 must be supplied in closed form
    (computing them by subtraction loses everything when E and the squares
    are large); gap_sq = hi^2 - lo^2.  E itself is only exponentiated on the
    branch where lo < 0 < hi, where it is guaranteed nonpositive.
    """
    arrays = np.broadcast_arrays(E, hi, lo, e_m_hi2, e_m_lo2, gap_sq)
    shape = arrays[0].shape
    E, hi, lo, e_m_hi2, e_m_lo2, gap_sq = (
        np.asarray(v, dtype=float).reshape(-1) for v in arrays
    )
    tiny = np.finfo(float).tiny
    out = np.empty(hi.shape)

    pos = lo >= 0.0  # both args nonnegative
    neg = hi <= 0.0  # both args nonpositive
    mid = ~(pos | neg)

    if np.any(pos):
        inner = erfcx(lo[pos]) - erfcx(hi[pos]) * np.exp(-gap_sq[pos])
        out[pos] = e_m_lo2[pos] + np.log(np.maximum(inner, tiny))
    if np.any(neg):
        inner = erfcx(-hi[neg]) - erfcx(-lo[neg]) * np.exp(gap_sq[neg])
        out[neg] = e_m_hi2[neg] + np.log(np.maximum(inner, tiny))
    if np.any(mid):
        val = (
            2.0 * np.exp(E[mid])
            - np.exp(e_m_lo2[mid]) * erfcx(-lo[mid])
            - np.exp(e_m_hi2[mid]) * erfcx(hi[mid])
        )
        out[mid] = np.log(np.maximum(val, tiny))
    return out.reshape(shape)


@dataclass(frozen=True)
class AmplitudeDampingModel(SoftModel):
    """Soft readout of a qubit subject to energy relaxation.

    The |1> state decays at time K ~ Exp(tau_a); the integrated signal over
    the window tau_m is P = 1 - 2K/tau_m (or -1 if no decay), read through
    Gaussian noise of variance s^2 = tau_f/tau_m.  tau_a may be math.inf,
    recovering the symmetric Gaussian model.
    """

    tau_m: float
    tau_a: float
    tau_f: float
    beta: float | None = None

    def __post_init__(self):
        _ad_params(self.tau_m, self.tau_a, self.tau_f)

    @property
    def scale(self) -> float:
        return math.sqrt(self.tau_f / self.tau_m)

    def logpdf0(self, mu):
        mu = np.asarray(mu, dtype=float)
        s = self.scale
        return -((mu - 1.0) ** 2) / (2.0 * s * s) - math.log(s) - _LOG_SQRT_2PI

    def logpdf1(self, mu):
        mu = np.asarray(mu, dtype=float)
        r, s, u, k = _ad_params(self.tau_m, self.tau_a, self.tau_f)
        log_gauss = -r - ((mu + 1.0) ** 2) / (2.0 * s * s) - math.log(s) - _LOG_SQRT_2PI
        if r == 0.0:
            return log_gauss
        # decayed-in-window part: (r/4) e^E [erf(B) - erf(A)],
        # E = (r/2)(mu-1) + k^2, B = (1-mu)u - k, A = (-1-mu)u - k
        E = 0.5 * r * (mu - 1.0) + k * k
        B = (1.0 - mu) * u - k
        A = (-1.0 - mu) * u - k
        e_m_b2 = -((mu - 1.0) ** 2) * u * u
        e_m_a2 = -r - ((mu + 1.0) ** 2) * u * u
        gap_sq = e_m_a2 - e_m_b2  # B^2 - A^2 = -(4 mu u^2 + r)
        log_cont = math.log(r / 4.0) + _log_scaled_erf_diff(E, B, A, e_m_b2, e_m_a2, gap_sq)
        return np.logaddexp(log_gauss, log_cont)

    def sample0(self, rng, size=None):
        return rng.normal(1.0, self.scale, size)

    def sample1(self, rng, size=None):
        # exact simulation of the physical process
        k_decay = rng.exponential(self.tau_a, size) if not math.isinf(self.tau_a) else None
        noise = rng.normal(0.0, self.scale, size)
        if k_decay is None:
            return -1.0 + noise
        p = np.where(k_decay >= self.tau_m, -1.0, 1.0 - 2.0 * k_decay / self.tau_m)
        return p + noise

    def soft_flip_prob(self, ideal: int) -> float:
        if self.beta is not None:
            beta = self.beta
        else:
            thr = self._ml_threshold()
            if not math.isfinite(thr):
                return float(bool(ideal) == (thr == -math.inf))
            beta = thr / self.scale
        p0, p1 = ad_soft_flip_probs(self.tau_m, self.tau_a, self.tau_f, beta)
        return p1 if ideal else p0

    def cdf1(self, mu):
        """P(outcome <= mu | ideal 1); closed form shared with the flip probs."""
        _, p1 = _ad_flip_probs_arrays(self.tau_m, self.tau_a, self.tau_f, np.asarray(mu) / self.scale)
        return 1.0 - p1


def _ad_flip_probs_arrays(tau_m, tau_a, tau_f, beta):
    """Closed-form soft flip probabilities, vectorized over beta."""
    r, s, u, k = _ad_params(tau_m, tau_a, tau_f)
    a = np.asarray(beta, dtype=float) / math.sqrt(2.0)
    p0 = 0.5 * erfc(u - a)
    # p1 = (1/2) erfc(a - u) - (1/2) e^{E'} [erf(z2) - erf(z1)],
    # z1 = a - u + k, z2 = a + u + k, E' = sqrt(2) beta k + k^2 - r/2
    E = 2.0 * a * k + k * k - 0.5 * r
    z1 = a - u + k
    z2 = a + u + k
    e_m_z12 = -((u - a) ** 2)
    e_m_z22 = -r - (u + a) ** 2
    gap_sq = e_m_z12 - e_m_z22  # z2^2 - z1^2
    log_g = _log_scaled_erf_diff(E, z2, z1, e_m_z22, e_m_z12, gap_sq)
    p1 = 0.5 * erfc(a - u) - 0.5 * np.exp(log_g)
    p1 = np.clip(p1, 0.0, 1.0)
    return p0, p1


def ad_soft_flip_probs(tau_m, tau_a, tau_f, beta):
    """(P(soft flip | 0), P(soft flip | 1)) for the damping model at boundary beta."""
    p0, p1 = _ad_flip_probs_arrays(tau_m, tau_a, tau_f, beta)
    return float(p0), float(p1)


# --- module-level op aliases -------------------------------------------------

def harden(model: SoftModel, mu):
    return model.harden(mu)


def likelihood_ratio(model: SoftModel, mu):
    return model.likelihood_ratio(mu)


def soft_flip_prob(model: SoftModel, ideal: int) -> float:
    return model.soft_flip_prob(ideal)


def average_flip_prob(tau_m, tau_a, tau_f, beta) -> float:
    p0, p1 = ad_soft_flip_probs(tau_m, tau_a, tau_f, beta)
    return 0.5 * (p0 + p1)


def optimize_measurement(tau_a, tau_f, tau_m_bounds=None, beta_bounds=(-0.0, 8.0), xtol=1e-12):
    """Minimize the average soft-flip probability over (tau_m, beta).

    Nested bounded 1-D minimization: for each tau_m (searched on a log grid
    refined by golden/Brent iterations) the inner problem optimizes the
    decision boundary beta.  Returns (tau_m*, beta*, p_avg*).
    """
    if tau_m_bounds is None:
        tau_m_bounds = (tau_f / 100.0, 1000.0 * tau_f)
    lo, hi = tau_m_bounds

    def best_beta(tau_m):
        res = optimize.minimize_scalar(
            lambda b: average_flip_prob(tau_m, tau_a, tau_f, b),
            bounds=beta_bounds,
            method="bounded",
            options={"xatol": 1e-10},
        )
        return res.x, res.fun

    def outer(log_tau_m):
        return best_beta(math.exp(log_tau_m))[1]

    res = optimize.minimize_scalar(
        outer,
        bounds=(math.log(lo), math.log(hi)),
        method="bounded",
        options={"xatol": xtol},
    )
    tau_m_star = math.exp(res.x)
    beta_star, p_star = best_beta(tau_m_star)
    return tau_m_star, beta_star, p_star
