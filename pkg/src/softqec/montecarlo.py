"""Monte Carlo harness: trials, failure statistics, threshold fits, sweeps.

A trial samples one noise realization, decodes the X and Z bases
independently, and classifies the residual of error-plus-correction per
basis.  Failure counts get Jeffreys Beta(1/2 + k, 1/2 + n - k) posteriors;
per-round rates invert the independent-rounds failure model; thresholds come
from a quadratic fit in the scaled variable x = (p - p*) d^(1/nu).

Sweeps are deterministic for a fixed master seed regardless of how trials
are chunked across workers: every trial draws from its own counter-derived
stream seeded by (master seed, point index, trial index).
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import beta as beta_dist

from . import decoding
from .measurement import GaussianModel, sigma_for_hardened
from .mwpm import MatchingDecoder
from .noise import (
    CircuitSpec,
    ModelPair,
    build_circuit_model,
    build_parametric_circuit_model,
    build_pheno_model,
)
from .surface import classify_residual_masks
from .unionfind import UnionFindDecoder

DECODERS = ("soft-uf", "hard-uf", "soft-mwpm", "hard-mwpm")


@dataclass(frozen=True)
class TrialResult:
    x_fail: bool
    z_fail: bool
    seconds: float  # decoder wall-time, both bases


@dataclass(frozen=True)
class TrialStats:
    """Jeffreys posterior over a failure probability from k fails in n."""

    n: int
    k: int

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError(f"bad counts k={self.k} n={self.n}")

    @property
    def alpha(self):
        return 0.5 + self.k

    @property
    def beta(self):
        return 0.5 + self.n - self.k

    @property
    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    @property
    def std(self):
        a, b = self.alpha, self.beta
        return float(np.sqrt(a * b / ((a + b) ** 2 * (a + b + 1))))

    @property
    def ci68(self):
        lo = float(beta_dist.ppf(0.16, self.alpha, self.beta))
        hi = float(beta_dist.ppf(0.84, self.alpha, self.beta))
        return lo, hi


def estimate(results, basis: str = "combined") -> TrialStats:
    """Failure statistics over trial results for one failure definition."""
    picks = {
        "x": lambda r: r.x_fail,
        "z": lambda r: r.z_fail,
        "combined": lambda r: r.x_fail or r.z_fail,
    }[basis]
    results = list(results)
    return TrialStats(n=len(results), k=sum(1 for r in results if picks(r)))


def rate_per_round(p_x_fail: float, t: int) -> float:
    """Per-round logical X error rate from the T-round failure probability."""
    if p_x_fail >= 0.5:
        raise ValueError("failure probability at the mixing limit: no rate")
    return 1.0 - (1.0 - 2.0 * p_x_fail) ** (1.0 / t)


# ---------------------------------------------------------------------------
# experiment points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointSpec:
    """One grid point of a sweep; picklable so workers can rebuild it."""

    d: int
    rounds: int
    decoder: str
    family: str  # "pheno" | "circuit" | "parametric"
    p: float = 0.0
    p_m: float = 0.0
    hardened_mult: float = 1.0  # sigma chosen so p_hardened = mult * p
    sigma: float | None = None  # explicit override
    tau_g: float = 10e-9
    tau_m: float = 300e-9
    tau_d: float = 30e-6
    tau_a: float = 15e-6
    tau_f: float = 100e-9
    beta: float | None = None

    @property
    def scan_value(self) -> float:
        return self.tau_m if self.family == "parametric" else self.p


def build_pair(spec: PointSpec) -> ModelPair:
    if spec.family == "pheno":
        sig = spec.sigma if spec.sigma is not None else sigma_for_hardened(
            spec.hardened_mult * spec.p
        )
        return build_pheno_model(
            spec.d, spec.rounds, spec.p, spec.p_m, GaussianModel(sigma=sig)
        )
    if spec.family == "circuit":
        sig = spec.sigma if spec.sigma is not None else sigma_for_hardened(
            spec.hardened_mult * spec.p
        )
        cs = CircuitSpec(p_ig=spec.p, p_im=spec.p, p_cnot=spec.p, p_m=spec.p_m)
        return build_circuit_model(
            spec.d, spec.rounds, cs, GaussianModel(sigma=sig)
        )
    if spec.family == "parametric":
        return build_parametric_circuit_model(
            spec.d, spec.rounds, spec.tau_g, spec.tau_m, spec.tau_d,
            spec.tau_a, spec.tau_f, beta=spec.beta,
        )
    raise ValueError(f"unknown noise family {spec.family!r}")


def build_decoders(pair: ModelPair, decoder: str):
    if decoder not in DECODERS:
        raise ValueError(f"unknown decoder {decoder!r}")
    soft = decoder.startswith("soft")
    gx = decoding.build(pair.x, soft=soft)
    gz = decoding.build(pair.z, soft=soft)
    cls = UnionFindDecoder if decoder.endswith("uf") else MatchingDecoder
    return cls(gx), cls(gz)


def run_trial(pair: ModelPair, dec_x, dec_z, rng) -> TrialResult:
    (_, rec_x, resid_x), (_, rec_z, resid_z) = pair.sample_trial(rng)
    t0 = time.perf_counter()
    rx = dec_x.decode(rec_x)
    rz = dec_z.decode(rec_z)
    seconds = time.perf_counter() - t0
    x_fail = (
        classify_residual_masks(pair.x.code, resid_x ^ rx.residual, 0)
        == "logical"
    )
    z_fail = (
        classify_residual_masks(pair.z.code, 0, resid_z ^ rz.residual)
        == "logical"
    )
    return TrialResult(x_fail, z_fail, seconds)


def _trial_rng(master_seed: int, point_idx: int, trial_idx: int):
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, point_idx, trial_idx))
    )


def _run_chunk(args):
    spec, master_seed, point_idx, lo, hi = args
    pair = build_pair(spec)
    dec_x, dec_z = build_decoders(pair, spec.decoder)
    k_x = k_z = k_any = 0
    seconds = 0.0
    for t in range(lo, hi):
        res = run_trial(pair, dec_x, dec_z, _trial_rng(master_seed, point_idx, t))
        k_x += res.x_fail
        k_z += res.z_fail
        k_any += res.x_fail or res.z_fail
        seconds += res.seconds
    return k_x, k_z, k_any, seconds


@dataclass(frozen=True)
class PointResult:
    spec: PointSpec
    n: int
    k_x: int
    k_z: int
    k_any: int
    seconds_per_trial: float

    def stats(self, basis: str = "combined") -> TrialStats:
        k = {"x": self.k_x, "z": self.k_z, "combined": self.k_any}[basis]
        return TrialStats(n=self.n, k=k)

    def p_bar(self) -> float:
        return rate_per_round(self.stats("x").mean, self.spec.rounds)


def run_point(
    spec: PointSpec,
    trials: int,
    master_seed: int,
    point_idx: int,
    n_workers: int = 1,
    executor=None,
) -> PointResult:
    """All trials of one grid point; chunking never changes the counts."""
    if n_workers <= 1 or trials < 2 * n_workers:
        k_x, k_z, k_any, secs = _run_chunk(
            (spec, master_seed, point_idx, 0, trials)
        )
    else:
        bounds = np.linspace(0, trials, n_workers + 1).astype(int)
        jobs = [
            (spec, master_seed, point_idx, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        if executor is None:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                parts = list(pool.map(_run_chunk, jobs))
        else:
            parts = list(executor.map(_run_chunk, jobs))
        k_x = sum(p[0] for p in parts)
        k_z = sum(p[1] for p in parts)
        k_any = sum(p[2] for p in parts)
        secs = sum(p[3] for p in parts)
    return PointResult(spec, trials, k_x, k_z, k_any, secs / max(trials, 1))


def sweep(
    points, trials: int, master_seed: int, n_workers: int = 1, log=None
) -> list:
    """Run every point; results depend only on (points, trials, seed)."""
    points = list(points)
    out = []
    executor = None
    if n_workers > 1:
        executor = ProcessPoolExecutor(max_workers=n_workers)
    try:
        for idx, spec in enumerate(points):
            t0 = time.perf_counter()
            res = run_point(
                spec, trials, master_seed, idx, n_workers, executor
            )
            if log is not None:
                log(
                    f"[{idx + 1}/{len(points)}] d={spec.d} T={spec.rounds} "
                    f"{spec.decoder} scan={spec.scan_value:g} "
                    f"fail={res.k_any}/{res.n} "
                    f"({time.perf_counter() - t0:.1f}s)"
                )
            out.append(res)
    finally:
        if executor is not None:
            executor.shutdown()
    return out


# ---------------------------------------------------------------------------
# threshold fit
# ---------------------------------------------------------------------------


@dataclass
class ThresholdFit:
    p_star: float
    nu: float
    coeffs: tuple  # (A, B, C) of A + B x + C x^2
    resid_norm: float
    p_star_err: float
    n_points: int = 0


def _crossing_guess(points):
    """Midpoint of the first p interval where the d-ordering flips."""
    by_p = {}
    for d, p, stats in points:
        by_p.setdefault(p, []).append((d, stats.mean))
    ps = sorted(by_p)
    slopes = []
    for p in ps:
        rows = sorted(by_p[p])
        slopes.append(rows[-1][1] - rows[0][1])  # y(max d) - y(min d)
    for i in range(len(ps) - 1):
        if slopes[i] < 0 <= slopes[i + 1]:
            return 0.5 * (ps[i] + ps[i + 1])
    raise ValueError("failure curves do not cross in the scanned range")


def _quadratic_fit(points, p_star, nu):
    d = np.array([q[0] for q in points], dtype=float)
    p = np.array([q[1] for q in points], dtype=float)
    y = np.array([q[2].mean for q in points])
    sig = np.array([max(q[2].std, 1e-12) for q in points])
    x = (p - p_star) * d ** (1.0 / nu)
    design = np.stack([np.ones_like(x), x, x * x], axis=1)
    dw = design / sig[:, None]
    coeffs, *_ = np.linalg.lstsq(dw, y / sig, rcond=None)
    chi2 = float(np.sum((design @ coeffs - y) ** 2 / sig**2))
    return coeffs, chi2


def fit_threshold(
    points, nu_bounds=(0.5, 2.5), n_boot: int = 200, rng=None
) -> ThresholdFit:
    """Fit p_fail = A + B x + C x^2, x = (p - p*) d^(1/nu).

    points: iterable of (d, p, TrialStats).  The scale exponent search is
    derivative-free (Nelder-Mead) around the linear solve for (A, B, C);
    the p* uncertainty is a parametric bootstrap over the failure counts.
    """
    points = list(points)
    ds = {q[0] for q in points}
    ps = {q[1] for q in points}
    if len(ds) < 3 or len(ps) < 4:
        raise ValueError("need >= 3 distances and >= 4 noise values to fit")
    p0 = _crossing_guess(points)
    p_lo, p_hi = min(ps), max(ps)

    def objective(theta, pts):
        p_star, nu = theta
        pen = 0.0
        if not (nu_bounds[0] <= nu <= nu_bounds[1]):
            pen += 1e8 * (abs(nu - np.clip(nu, *nu_bounds)) + 1)
            nu = float(np.clip(nu, *nu_bounds))
        if not (p_lo <= p_star <= p_hi):
            pen += 1e8 * (abs(p_star - np.clip(p_star, p_lo, p_hi)) + 1)
            p_star = float(np.clip(p_star, p_lo, p_hi))
        return _quadratic_fit(pts, p_star, nu)[1] + pen

    def solve(pts):
        res = minimize(
            objective,
            x0=np.array([p0, 1.0]),
            args=(pts,),
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 4000},
        )
        return res.x

    p_star, nu = solve(points)
    coeffs, chi2 = _quadratic_fit(points, p_star, nu)

    rng = np.random.default_rng(0) if rng is None else rng
    boot = []
    for _ in range(n_boot):
        pts = [
            (d, p, TrialStats(n=s.n, k=int(rng.binomial(s.n, s.mean))))
            for d, p, s in points
        ]
        try:
            boot.append(solve(pts)[0])
        except ValueError:
            continue
    err = float(np.std(boot)) if len(boot) >= 10 else float("nan")
    return ThresholdFit(
        p_star=float(p_star),
        nu=float(nu),
        coeffs=tuple(float(c) for c in coeffs),
        resid_norm=float(np.sqrt(chi2 / max(len(points) - 5, 1))),
        p_star_err=err,
        n_points=len(points),
    )


# ---------------------------------------------------------------------------
# result tables
# ---------------------------------------------------------------------------

CSV_HEADER = "d,T,scan,decoder,basis,n,k,mean,ci_lo,ci_hi,p_bar"


def result_rows(results) -> list:
    """Flatten point results into per-basis dict rows (CSV/JSON schema)."""
    rows = []
    for res in results:
        try:
            p_bar = res.p_bar()
        except ValueError:  # at or past the mixing point: no per-round rate
            p_bar = None
        for basis in ("x", "z", "combined"):
            st = res.stats(basis)
            lo, hi = st.ci68
            row = {
                "d": res.spec.d,
                "T": res.spec.rounds,
                "scan": res.spec.scan_value,
                "decoder": res.spec.decoder,
                "basis": basis,
                "n": st.n,
                "k": st.k,
                "mean": st.mean,
                "ci_lo": lo,
                "ci_hi": hi,
                "p_bar": p_bar if basis == "x" else None,
                "seconds_per_trial": res.seconds_per_trial,
            }
            rows.append(row)
    return rows


def format_csv(rows) -> str:
    """Deterministic CSV (timing lives only in the JSON mirror)."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r["d"]),
                    str(r["T"]),
                    f"{r['scan']:.10g}",
                    r["decoder"],
                    r["basis"],
                    str(r["n"]),
                    str(r["k"]),
                    f"{r['mean']:.10g}",
                    f"{r['ci_lo']:.10g}",
                    f"{r['ci_hi']:.10g}",
                    "" if r["p_bar"] is None else f"{r['p_bar']:.10g}",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def format_json(rows, config: dict, fit: ThresholdFit = None, extra: dict = None) -> str:
    doc = {"config": config, "rows": rows}
    if fit is not None:
        doc["fit"] = {
            "p_star": fit.p_star,
            "nu": fit.nu,
            "coeffs": list(fit.coeffs),
            "resid_norm": fit.resid_norm,
            "p_star_err": fit.p_star_err,
        }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, default=float) + "\n"
