"""Config resolution, command plumbing, exit codes, output determinism."""
from __future__ import annotations

import dataclasses
import json
import subprocess
import sys

import pytest
import yaml

from softqec.cli import (
    PRESETS,
    ConfigError,
    build_parser,
    load_config,
    main,
    validate_config,
)
from softqec.measurement import optimize_measurement

CONFIG_DIR = "configs"


def resolve(argv):
    args = build_parser().parse_args(argv)
    return validate_config(load_config(args))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def test_flags_override_preset():
    cfg = resolve(["curve", "--preset", "pheno-soft", "--trials", "17",
                   "--distances", "3,5"])
    assert cfg.preset == "pheno-soft"
    assert cfg.trials == 17
    assert cfg.distances == (3, 5)
    assert cfg.decoder == "soft-uf"
    assert cfg.p_values == PRESETS["pheno-soft"]["p_values"]


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_committed_configs_match_presets(name):
    file_cfg = resolve(["curve", "--config", f"{CONFIG_DIR}/{name}.yaml"])
    preset_cfg = resolve(["curve", "--preset", name])
    a = dataclasses.asdict(file_cfg)
    b = dataclasses.asdict(preset_cfg)
    a.pop("preset")
    b.pop("preset")
    assert a == b


def test_config_file_fields_are_schema_checked(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("family: pheno\nfrobnication: 3\n")
    with pytest.raises(ConfigError, match="frobnication"):
        resolve(["curve", "-c", str(path)])


def test_soft_model_must_match_family(tmp_path):
    path = tmp_path / "mix.yaml"
    path.write_text(
        "family: pheno\nsoft_model: amplitude-damping\np_values: [0.03]\n"
    )
    with pytest.raises(ConfigError, match="gaussian"):
        resolve(["curve", "-c", str(path)])


@pytest.mark.parametrize(
    "argv",
    [
        ["curve", "--family", "pheno", "--distances", "3", "--p", "0.6"],
        ["curve", "--family", "pheno", "--distances", "4", "--p", "0.03"],
        ["curve", "--family", "pheno", "--distances", "3", "--p", "0.03",
         "--trials", "0"],
        ["curve", "--family", "pheno", "--distances", "3", "--p", "0.03",
         "--p-m", "0.5"],
        ["curve", "--family", "pheno", "--distances", "3", "--p", "0.0"],
        ["curve", "--family", "parametric-circuit", "--distances", "3",
         "--tau-m=-1e-7"],
        ["curve", "--family", "parametric-circuit", "--distances", "3",
         "--tau-m", "1.0"],  # idle flip probability would reach 1/2
        ["curve", "--family", "pheno", "--distances", "3", "--p", "0.03",
         "--workers", "0"],
        ["threshold", "--preset", "tradeoff"],  # tau_m scans have no p grid
    ],
)
def test_config_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert "config error" in capsys.readouterr().err


def test_no_command_exits_1(capsys):
    assert main([]) == 1


def test_unknown_preset_exits_1(capsys):
    assert main(["curve", "--preset", "nope"]) == 1


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def test_curve_single_point(tmp_path, capsys):
    out = tmp_path / "single"
    rc = main(["curve", "--family", "pheno", "--distances", "3",
               "--p", "0.03", "--trials", "20", "--seed", "7",
               "--out", str(out)])
    assert rc == 0
    lines = (tmp_path / "single.csv").read_text().strip().split("\n")
    assert lines[0] == "d,T,scan,decoder,basis,n,k,mean,ci_lo,ci_hi,p_bar"
    assert len(lines) == 4  # one point, three bases
    doc = json.loads((tmp_path / "single.json").read_text())
    assert doc["config"]["distances"] == [3]
    assert doc["config"]["trials"] == 20
    assert doc["rows"][0]["n"] == 20


def test_threshold_fits_small_grid(tmp_path):
    out = tmp_path / "thr"
    rc = main(["threshold", "--family", "pheno", "--distances", "3,5,7",
               "--p", "0.02,0.03,0.045,0.055", "--trials", "250",
               "--seed", "3", "--out", str(out)])
    assert rc == 0
    doc = json.loads((tmp_path / "thr.json").read_text())
    assert 0.02 < doc["fit"]["p_star"] < 0.055
    assert 0.5 <= doc["fit"]["nu"] <= 2.5


def test_tradeoff_emits_flip_optimal_marker(tmp_path):
    out = tmp_path / "trd"
    rc = main(["tradeoff", "--family", "parametric-circuit",
               "--distances", "3", "--rounds", "2",
               "--tau-m", "1.0e-7,1.0e-6", "--trials", "10",
               "--seed", "1", "--out", str(out)])
    assert rc == 0
    lines = (tmp_path / "trd.csv").read_text().strip().split("\n")
    assert lines[0].endswith(",tau_m_flip_opt")
    tau_star, _, _ = optimize_measurement(15e-6, 100e-9)
    assert float(lines[1].split(",")[-1]) == pytest.approx(tau_star, rel=1e-9)
    doc = json.loads((tmp_path / "trd.json").read_text())
    assert doc["flip_optimal"]["tau_m"] == pytest.approx(tau_star, rel=1e-12)
    assert doc["flip_optimal"]["p_flip"] == pytest.approx(0.01494, abs=2e-4)


def test_validate_stock_models_pass(tmp_path, capsys):
    rc = main(["validate", "--family", "pheno", "--distances", "3",
               "--p", "0.08", "--p-m", "0.02", "--samples", "2000",
               "--seed", "5", "--out", str(tmp_path / "rep")])
    assert rc == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text
    report = json.loads((tmp_path / "rep.json").read_text())
    assert all(c["pass"] for c in report["checks"])
    names = " ".join(c["name"] for c in report["checks"])
    assert "C1/C2" in names and "KS" in names and "posterior" in names


def test_validate_amplitude_damping_readout(tmp_path, capsys):
    rc = main(["validate", "--family", "parametric-circuit",
               "--distances", "3", "--rounds", "2", "--tau-m", "3.0e-7",
               "--samples", "2000", "--seed", "5",
               "--out", str(tmp_path / "rep")])
    assert rc == 0
    assert "normalization" in capsys.readouterr().out


def test_validate_reports_graph_corruption(tmp_path, capsys):
    graph = tmp_path / "graph"
    assert main(["export-graph", "--family", "pheno", "--distances", "3",
                 "--rounds", "2", "--p", "0.05", "--p-m", "0.02",
                 "--out", str(graph)]) == 0
    doc = json.loads((tmp_path / "graph.json").read_text())
    assert main(["validate", "--graph", str(tmp_path / "graph.json"),
                 "--out", str(tmp_path / "ok")]) == 0
    capsys.readouterr()

    hard = [e for e in doc["edges"] if not e["soft"]]
    doc["edges"][hard[2]["id"]]["p"] = 0.7
    doc["edges"][hard[4]["id"]]["v"] = doc["edges"][hard[4]["id"]]["u"]
    bad = tmp_path / "corrupt.json"
    bad.write_text(json.dumps(doc))
    rc = main(["validate", "--graph", str(bad), "--out", str(tmp_path / "bad")])
    assert rc == 2
    text = capsys.readouterr().out
    assert "C2" in text and "C1" in text


def test_export_graph_contents(tmp_path):
    out = tmp_path / "g"
    rc = main(["export-graph", "--family", "pheno", "--distances", "3",
               "--rounds", "2", "--p", "0.05", "--basis", "X",
               "--out", str(out)])
    assert rc == 0
    doc = json.loads((tmp_path / "g.json").read_text())
    assert doc["basis"] == "X"
    assert doc["n_vertices"] == 13  # 4 plaquettes x 3 layers + ghost
    assert sum(e["soft"] for e in doc["edges"]) == 8
    assert doc["config"]["family"] == "pheno"


def test_same_seed_same_bytes_across_workers(tmp_path):
    argv = ["curve", "--preset", "pheno-soft", "--distances", "3",
            "--trials", "30", "--seed", "12"]
    assert main(argv + ["--workers", "1", "--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--workers", "2", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a.csv").read_bytes()
    b = (tmp_path / "b.csv").read_bytes()
    assert a == b
    assert len(a.splitlines()) == 22  # 7 p values x 3 bases + header


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "softqec.cli", "curve", "--family", "pheno",
         "--distances", "3", "--p", "0.04", "--trials", "5",
         "--out", str(tmp_path / "mod")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "mod.csv").exists()
    proc = subprocess.run(
        [sys.executable, "-m", "softqec.cli", "curve", "--family", "pheno",
         "--distances", "3", "--p", "0.9", "--trials", "5",
         "--out", str(tmp_path / "mod2")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert "config error" in proc.stderr


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_run_at_reduced_budget(name, tmp_path):
    """Every committed plan executes end to end on a trimmed grid."""
    cfg = PRESETS[name]
    argv = ["curve", "--preset", name, "--trials", "4", "--seed", "9",
            "--distances", str(cfg["distances"][0]),
            "--out", str(tmp_path / name)]
    if cfg["family"] == "parametric-circuit":
        argv += ["--rounds", "6", "--tau-m", "2.5e-7,1.3e-6"]
    else:
        argv += ["--p", ",".join(str(p) for p in cfg["p_values"][:2])]
    assert main(argv) == 0
    lines = (tmp_path / f"{name}.csv").read_text().strip().split("\n")
    assert len(lines) == 1 + 2 * 3
