"""Command-line front end: presets, sweeps, threshold fits, validation.

Commands
--------
threshold     sweep a (d, p) grid and fit the crossing point
curve         sweep a grid and emit the failure-rate table, no fit
tradeoff      sweep measurement time for the duration-parameterized model
validate      structural and statistical self-checks of a configuration
export-graph  dump one decoding graph as JSON

Configuration is a YAML file (--config) and/or a named preset (--preset);
individual flags override file values.  Every run writes a CSV table and a
JSON mirror that echoes the resolved configuration.  Exit codes: 0 on
success, 1 for configuration errors, 2 for runtime failures.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np
import yaml
from scipy import integrate, special

from . import decoding
from .measurement import AmplitudeDampingModel, GaussianModel, optimize_measurement
from .montecarlo import (
    DECODERS,
    PointSpec,
    build_pair,
    fit_threshold,
    format_csv,
    format_json,
    result_rows,
    sweep,
)
from .noise import syndrome_array
from .noise import validate as validate_model

FAMILIES = ("pheno", "circuit", "parametric-circuit")
SOFT_MODELS = ("gaussian", "amplitude-damping")


class ConfigError(ValueError):
    """Bad or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    distances: tuple = (3, 5, 7)
    rounds: int | None = None  # None: T = d
    family: str = "pheno"
    soft_model: str | None = None  # None: implied by family
    decoder: str = "soft-uf"
    p_values: tuple = ()
    p_m: float = 0.0
    hardened_mult: float = 1.0
    sigma: float | None = None
    tau_g: float = 10e-9
    tau_m_values: tuple = (300e-9,)
    tau_d: float = 30e-6
    tau_a: float = 15e-6
    tau_f: float = 100e-9
    beta: float | None = None
    trials: int = 1000
    seed: int = 2024
    workers: int | None = None  # None: available parallelism
    out: str = "results"
    preset: str | None = None


# Named experiment plans.  The threshold scans bracket the crossing points
# they are meant to locate; the tradeoff plan scans measurement time on a
# log grid over the regime where readout noise and decay compete.
PRESETS = {
    "pheno-soft": dict(
        family="pheno", decoder="soft-uf", distances=(7, 9, 11, 13),
        p_values=(0.032, 0.0333, 0.0347, 0.036, 0.0373, 0.0387, 0.04),
        trials=20000, out="pheno-soft",
    ),
    "pheno-hard": dict(
        family="pheno", decoder="hard-uf", distances=(7, 9, 11, 13),
        p_values=(0.023, 0.0242, 0.0253, 0.0265, 0.0277, 0.0288, 0.03),
        trials=20000, out="pheno-hard",
    ),
    "circuit-10x": dict(
        family="circuit", decoder="soft-uf", distances=(5, 7, 9),
        p_values=(0.004, 0.0045, 0.005, 0.0055, 0.006, 0.0065, 0.007),
        hardened_mult=10.0, trials=10000, out="circuit-10x",
    ),
    "circuit-1x": dict(
        family="circuit", decoder="soft-uf", distances=(5, 7, 9),
        p_values=(0.0058, 0.0063, 0.0067, 0.0072, 0.0076, 0.0081, 0.0085),
        hardened_mult=1.0, trials=10000, out="circuit-1x",
    ),
    "tradeoff": dict(
        family="parametric-circuit", decoder="soft-uf", distances=(7, 11),
        rounds=100,
        tau_m_values=(1e-8, 1.7e-8, 2.9e-8, 5e-8, 8.6e-8, 1.5e-7, 2.5e-7,
                      4.3e-7, 7.4e-7, 1.3e-6, 2.2e-6, 3e-6),
        trials=2000, out="tradeoff",
    ),
}

_LIST_FIELDS = {"distances", "p_values", "tau_m_values"}
_FIELD_NAMES = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name, value):
    if name in _LIST_FIELDS:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name} must be a list")
        caster = int if name == "distances" else float
        return tuple(caster(v) for v in value)
    return value


def load_config(args) -> ExperimentConfig:
    """Defaults <- preset <- config file <- explicit flags."""
    merged = {}
    file_data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_data = yaml.safe_load(fh) or {}
        if not isinstance(file_data, dict):
            raise ConfigError(f"{args.config} is not a mapping")
    preset = getattr(args, "preset", None) or file_data.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r} (have {', '.join(sorted(PRESETS))})"
            )
        merged.update(PRESETS[preset])
        merged["preset"] = preset
    for key, value in file_data.items():
        key = key.replace("-", "_")
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config field {key!r}")
        merged[key] = _coerce(key, value)
    for key in _FIELD_NAMES:
        value = getattr(args, key, None)
        if value is not None and key != "preset":
            merged[key] = _coerce(key, value)
    return ExperimentConfig(**merged)


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.family not in FAMILIES:
        raise ConfigError(f"unknown noise family {cfg.family!r}")
    if cfg.decoder not in DECODERS:
        raise ConfigError(f"unknown decoder {cfg.decoder!r}")
    implied = "amplitude-damping" if cfg.family == "parametric-circuit" else "gaussian"
    soft_model = cfg.soft_model or implied
    if soft_model not in SOFT_MODELS:
        raise ConfigError(f"unknown soft model {soft_model!r}")
    if soft_model != implied:
        raise ConfigError(f"family {cfg.family!r} uses the {implied} readout model")
    cfg.soft_model = soft_model
    if not cfg.distances:
        raise ConfigError("at least one code distance is required")
    for d in cfg.distances:
        if d < 3 or d % 2 == 0:
            raise ConfigError(f"distances must be odd and >= 3, got {d}")
    if cfg.rounds is not None and cfg.rounds < 1:
        raise ConfigError("rounds must be a positive integer")
    if cfg.trials < 1:
        raise ConfigError("trials must be a positive integer")
    if cfg.workers is not None and cfg.workers < 1:
        raise ConfigError("workers must be a positive integer")
    if cfg.family == "parametric-circuit":
        for name in ("tau_g", "tau_d", "tau_a", "tau_f"):
            if getattr(cfg, name) <= 0:
                raise ConfigError(f"{name} must be a positive duration")
        if not cfg.tau_m_values:
            raise ConfigError("at least one tau_m value is required")
        for tm in cfg.tau_m_values:
            if tm <= 0:
                raise ConfigError(f"tau_m must be a positive duration, got {tm}")
            p_im = 1.0 - math.exp(-tm / cfg.tau_d)
            if p_im >= 0.5:
                raise ConfigError(
                    f"tau_m = {tm:g} gives idle probability {p_im:.3f} >= 0.5"
                )
    else:
        if not cfg.p_values:
            raise ConfigError("at least one p value is required")
        for p in cfg.p_values:
            if not 0.0 <= p < 0.5:
                raise ConfigError(f"probabilities must be in [0, 0.5), got {p}")
            if cfg.sigma is None:
                ph = cfg.hardened_mult * p
                if not 0.0 < ph < 0.5:
                    raise ConfigError(
                        f"hardened flip probability {ph:g} must be in (0, 0.5); "
                        "set sigma explicitly for noiseless readout"
                    )
        if not 0.0 <= cfg.p_m < 0.5:
            raise ConfigError(f"p_m must be in [0, 0.5), got {cfg.p_m}")
        if cfg.sigma is not None and cfg.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if cfg.hardened_mult <= 0:
            raise ConfigError("hardened_mult must be positive")
    if not cfg.out:
        raise ConfigError("output path must not be empty")
    return cfg


# ---------------------------------------------------------------------------
# plan -> points -> outputs
# ---------------------------------------------------------------------------


def point_specs(cfg: ExperimentConfig) -> list:
    fam = "parametric" if cfg.family == "parametric-circuit" else cfg.family
    specs = []
    for d in cfg.distances:
        t = cfg.rounds if cfg.rounds is not None else d
        if fam == "parametric":
            for tm in cfg.tau_m_values:
                specs.append(PointSpec(
                    d=d, rounds=t, decoder=cfg.decoder, family=fam,
                    tau_g=cfg.tau_g, tau_m=tm, tau_d=cfg.tau_d,
                    tau_a=cfg.tau_a, tau_f=cfg.tau_f, beta=cfg.beta,
                ))
        else:
            for p in cfg.p_values:
                specs.append(PointSpec(
                    d=d, rounds=t, decoder=cfg.decoder, family=fam, p=p,
                    p_m=cfg.p_m, hardened_mult=cfg.hardened_mult,
                    sigma=cfg.sigma,
                ))
    return specs


def config_dict(cfg: ExperimentConfig) -> dict:
    doc = dataclasses.asdict(cfg)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in doc.items()}


def _out_paths(out):
    base = out[:-4] if out.endswith(".csv") else out
    return base + ".csv", base + ".json"


def _write(path, text):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _run_sweep(cfg):
    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    return sweep(
        point_specs(cfg), cfg.trials, cfg.seed, n_workers=workers,
        log=lambda line: print(line, file=sys.stderr),
    )


def cmd_curve(cfg, args) -> int:
    rows = result_rows(_run_sweep(cfg))
    csv_path, json_path = _out_paths(cfg.out)
    _write(csv_path, format_csv(rows))
    _write(json_path, format_json(rows, config_dict(cfg)))
    return 0


def cmd_threshold(cfg, args) -> int:
    if cfg.family == "parametric-circuit":
        raise ConfigError("threshold fits scan p; use the tradeoff command "
                          "for measurement-time scans")
    results = _run_sweep(cfg)
    rows = result_rows(results)
    fit = fit_threshold(
        [(r.spec.d, r.spec.p, r.stats("combined")) for r in results]
    )
    csv_path, json_path = _out_paths(cfg.out)
    _write(csv_path, format_csv(rows))
    _write(json_path, format_json(rows, config_dict(cfg), fit=fit))
    print(f"p_star = {fit.p_star:.6f} +/- {fit.p_star_err:.6f}  "
          f"(nu = {fit.nu:.3f}, {fit.n_points} points)")
    return 0


def cmd_tradeoff(cfg, args) -> int:
    if cfg.family != "parametric-circuit":
        raise ConfigError("the tradeoff command needs family: parametric-circuit")
    rows = result_rows(_run_sweep(cfg))
    tau_star, beta_star, p_star = optimize_measurement(cfg.tau_a, cfg.tau_f)
    lines = format_csv(rows).strip("\n").split("\n")
    lines[0] += ",tau_m_flip_opt"
    mark = f"{tau_star:.10g}"
    lines[1:] = [line + f",{mark}" for line in lines[1:]]
    extra = {"flip_optimal": {"tau_m": tau_star, "beta": beta_star,
                              "p_flip": p_star}}
    csv_path, json_path = _out_paths(cfg.out)
    _write(csv_path, "\n".join(lines) + "\n")
    _write(json_path, format_json(rows, config_dict(cfg), extra=extra))
    print(f"flip-optimal tau_m = {tau_star:.5g} s  "
          f"(beta = {beta_star:.4f}, p_flip = {p_star:.5g})")
    return 0


def cmd_export_graph(cfg, args) -> int:
    spec = point_specs(cfg)[0]
    pair = build_pair(spec)
    model = pair.x if args.basis == "X" else pair.z
    g = decoding.build(model, soft=not args.hard)
    doc = decoding.export_graph(g)
    doc["config"] = config_dict(cfg)
    _, json_path = _out_paths(cfg.out)
    _write(json_path, json.dumps(doc, indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _graph_file_problems(doc) -> list:
    """Structural checks on an exported decoding-graph JSON."""
    problems = []
    try:
        n_vertices = int(doc["n_vertices"])
        rounds = int(doc["rounds"])
        edges = doc["edges"]
    except (KeyError, TypeError, ValueError):
        return ["file is not an exported decoding graph"]
    n_plaq = (n_vertices - 1) // (rounds + 1) if rounds >= 0 else 0
    for e in edges:
        eid = e.get("id", "?")
        try:
            u, v, soft = int(e["u"]), int(e["v"]), bool(e["soft"])
        except (KeyError, TypeError, ValueError):
            problems.append(f"C1: edge {eid} is malformed")
            continue
        if not (0 <= u < n_vertices and 0 <= v < n_vertices) or u == v:
            problems.append(
                f"C1: edge {eid} endpoints ({u}, {v}) are not two distinct vertices"
            )
            continue
        if soft:
            if v != u + n_plaq and u != v + n_plaq:
                problems.append(f"C1: soft edge {eid} is not a vertical pair")
            continue
        p = e.get("p")
        if p is None or not 0.0 < p < 0.5:
            problems.append(f"C2: edge {eid} has p = {p}")
            continue
        w = float(e.get("weight", np.nan))
        w_ref = math.log((1.0 - p) / p)
        if not abs(w - w_ref) <= 1e-6 * max(1.0, abs(w_ref)):
            problems.append(f"edge {eid} weight does not match its probability")
    return problems


def _lemma1_check(model, rng, shots) -> tuple:
    """Sampled syndromes equal the boundary of faults plus soft flips."""
    n_meas, n = model.n_meas, model.n_plaq
    g = model.fault_graph
    for shot in range(shots):
        _, rec, _, faults = model.sample_arrays(rng)
        bits = np.zeros(n_meas, dtype=np.uint8)
        for eid in model.fault_chain(faults).support:
            for v in g.edges[eid]:
                if v < n_meas:
                    bits[v] ^= 1
        for v in np.nonzero(rec.hard ^ rec.ideal)[0]:
            bits[v] ^= 1
            bits[v + n] ^= 1
        if not np.array_equal(bits, syndrome_array(rec)):
            return False, f"shot {shot} syndrome differs from the fault boundary"
    return True, f"{shots} shots exact"


def _lemma2_check(model, rng, shots) -> tuple:
    """Weight of a toggled cycle equals its posterior log-probability drop."""
    g = decoding.build(model, soft=True)
    n = g.n_plaq
    by_pair = {}
    for eid in range(g.n_hard):
        by_pair[(int(g.hard_u[eid]), int(g.hard_v[eid]))] = eid
    cycles = []
    for (u, v), e1 in by_pair.items():
        if v >= g.ghost or u // n != v // n or u >= g.rounds * n:
            continue  # need both endpoints under a noisy layer
        e2 = by_pair.get((u + n, v + n))
        if e2 is not None:
            cycles.append((u, v, e1, e2))
        if len(cycles) == 4:
            break
    if not cycles:
        return False, "no layered cycle available"
    m = model.soft_model
    worst = 0.0
    checked = 0
    for _ in range(shots):
        _, rec, _, _ = model.sample_arrays(rng)
        decoding.set_soft_weights(g, rec)
        for u, v, e1, e2 in cycles:
            # skip clamped soft weights (saturated or boundary-tied outcomes)
            if not (0.0 < g.soft_weight[u] < decoding.W_MAX):
                continue
            if not (0.0 < g.soft_weight[v] < decoding.W_MAX):
                continue
            d_w = (g.hard_weight[e1] + g.hard_weight[e2]
                   + g.soft_weight[u] + g.soft_weight[v])
            d_lp = 0.0
            for e in (e1, e2):
                d_lp += math.log(g.hard_p[e] / (1.0 - g.hard_p[e]))
            for vid in (u, v):
                mu = rec.mu[vid]
                bit = int(rec.hard[vid]) ^ int(rec.sym[vid])
                lp = (m.logpdf0(mu), m.logpdf1(mu))
                d_lp += lp[1 - bit] - lp[bit]
            worst = max(worst, abs(d_lp + d_w) / max(1.0, abs(d_lp)))
            checked += 1
    if checked == 0:
        return False, "all sampled outcomes were clamped"
    ok = worst <= 1e-9
    return ok, f"{checked} cycle checks, max relative deviation {worst:.2e}"


def _readout_checks(soft, rng, samples) -> list:
    """PDF normalization and sampled-vs-closed-form KS distances."""
    checks = []
    for name, pdf in (("pdf0", soft.pdf0), ("pdf1", soft.pdf1)):
        total, _ = integrate.quad(pdf, -30.0, 30.0, limit=400)
        checks.append((f"readout {name} normalization", abs(total - 1.0) < 1e-6,
                       f"integral = {total:.9f}"))
    scale = soft.scale
    cdf1 = getattr(soft, "cdf1", None)
    if cdf1 is None:  # symmetric Gaussian readout
        cdf1 = lambda x: special.ndtr((x + 1.0) / scale)  # noqa: E731
    bound = 2.0 / math.sqrt(samples)
    for name, sampler, cdf in (
        ("mu | 0", soft.sample0, lambda x: special.ndtr((x - 1.0) / scale)),
        ("mu | 1", soft.sample1, cdf1),
    ):
        xs = np.sort(sampler(rng, samples))
        ref = np.asarray(cdf(xs), dtype=float)
        steps = np.arange(1, samples + 1) / samples
        ks = max(np.abs(ref - steps).max(), np.abs(ref - steps + 1.0 / samples).max())
        checks.append((f"readout KS ({name})", ks < bound,
                       f"KS = {ks:.4f} over {samples} samples (bound {bound:.4f})"))
    return checks


def cmd_validate(cfg, args) -> int:
    checks = []
    if args.graph:
        with open(args.graph) as fh:
            doc = json.load(fh)
        problems = _graph_file_problems(doc)
        for line in problems:
            checks.append((f"graph file: {line}", False, ""))
        if not problems:
            checks.append(("graph file structure", True,
                           f"{len(doc['edges'])} edges"))
    else:
        spec = point_specs(cfg)[0]
        pair = build_pair(spec)
        rng = np.random.default_rng(cfg.seed)
        shots = max(50, args.samples // 100)
        for basis, model in (("X", pair.x), ("Z", pair.z)):
            problems = validate_model(model)
            checks.append((f"model checks C1/C2 ({basis} basis)", not problems,
                           "; ".join(problems) or "all edges rank 2, p < 1/2"))
        checks.append(("syndrome = fault boundary (X basis)",)
                      + _lemma1_check(pair.x, rng, shots))
        checks.append(("syndrome = fault boundary (Z basis)",)
                      + _lemma1_check(pair.z, rng, shots))
        checks.append(("cycle weight = posterior log-ratio",)
                      + _lemma2_check(pair.x, rng, min(shots, 200)))
        checks.extend(_readout_checks(pair.x.soft_model, rng, args.samples))
    failed = [c for c in checks if not c[1]]
    for name, ok, detail in checks:
        state = "PASS" if ok else "FAIL"
        print(f"{state}  {name}" + (f"  [{detail}]" if detail else ""))
    _, json_path = _out_paths(cfg.out)
    report = {
        "config": config_dict(cfg),
        "checks": [{"name": n, "pass": bool(ok), "detail": d}
                   for n, ok, d in checks],
    }
    _write(json_path, json.dumps(report, indent=2) + "\n")
    return 2 if failed else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the config-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text):
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _int_list(text):
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _add_common(sub):
    sub.add_argument("-c", "--config", metavar="FILE",
                     help="YAML experiment config")
    sub.add_argument("--preset", choices=sorted(PRESETS),
                     help="named experiment plan")
    sub.add_argument("--distances", type=_int_list, metavar="D1,D2,...")
    sub.add_argument("--rounds", type=int, metavar="T",
                     help="measurement rounds (default: T = d)")
    sub.add_argument("--family", choices=FAMILIES)
    sub.add_argument("--decoder", choices=DECODERS)
    sub.add_argument("--p", dest="p_values", type=_float_list,
                     metavar="P1,P2,...")
    sub.add_argument("--p-m", dest="p_m", type=float,
                     help="extra ideal-readout flip probability")
    sub.add_argument("--hardened-mult", dest="hardened_mult", type=float,
                     help="sigma chosen so the hardened flip rate is mult * p")
    sub.add_argument("--sigma", type=float, help="explicit readout noise scale")
    sub.add_argument("--tau-m", dest="tau_m_values", type=_float_list,
                     metavar="S1,S2,...", help="measurement durations (s)")
    for name in ("tau-g", "tau-d", "tau-a", "tau-f"):
        sub.add_argument(f"--{name}", dest=name.replace("-", "_"), type=float)
    sub.add_argument("--beta", type=float, help="hardening decision boundary")
    sub.add_argument("--trials", type=int)
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--workers", type=int,
                     help="worker processes (default: available cores)")
    sub.add_argument("--out", help="output path; .csv/.json suffixes added")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softqec", description=__doc__.split("\n")[0])
    subs = parser.add_subparsers(dest="command", metavar="command")
    for name, func, text in (
        ("threshold", cmd_threshold, "sweep a (d, p) grid and fit p_star"),
        ("curve", cmd_curve, "sweep a grid and tabulate failure rates"),
        ("tradeoff", cmd_tradeoff, "scan measurement time tau_m"),
        ("validate", cmd_validate, "run model and readout self-checks"),
        ("export-graph", cmd_export_graph, "dump a decoding graph as JSON"),
    ):
        sub = subs.add_parser(name, help=text, description=text)
        _add_common(sub)
        sub.set_defaults(func=func)
        if name == "validate":
            sub.add_argument("--graph", metavar="FILE",
                             help="check an exported decoding-graph JSON")
            sub.add_argument("--samples", type=int, default=20000,
                             help="sample budget for statistical checks")
        if name == "export-graph":
            sub.add_argument("--basis", choices=("X", "Z"), default="X")
            sub.add_argument("--hard", action="store_true",
                             help="export the hardened-input variant")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits; keep main() embeddable
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = load_config(args)
        if not getattr(args, "graph", None):  # file checks need no sweep plan
            cfg = validate_config(cfg)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report and signal runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
