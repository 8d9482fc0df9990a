import csv
import json

import numpy as np
import pytest

from mcsh.cli import main
from mcsh.io import config_digest, read_diagnostics_csv, read_snapshot


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=1))
    return path


def small_run_config(tmp_path, **extra):
    doc = {
        "grid": {"n": 32, "period": 2.0 * np.pi * 4.0},
        "integrator": {"dt": 0.01, "T": 0.05},
        "data": {"generator": "gaussian-bump", "params": {"amplitude": 0.05}},
        "output": {
            "snapshot_dir": str(tmp_path / "snaps"),
            "diagnostics_csv": str(tmp_path / "diag.csv"),
            "manifest": str(tmp_path / "manifest.json"),
        },
    }
    doc.update(extra)
    return write_config(tmp_path, doc)


def test_simulate_writes_all_outputs(tmp_path):
    cfg = small_run_config(tmp_path)
    out = tmp_path / "summary.json"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0

    summary = json.loads(out.read_text())
    assert summary["steps"] == 5
    assert summary["t_final"] == pytest.approx(0.05)
    # plumbing check only; tight conservation bounds live with the integrator tests
    assert abs(summary["energy_final"] - summary["energy_initial"]) < 1e-6 * summary["energy_initial"]

    snap = read_snapshot(tmp_path / "snaps" / "snapshot_000000.bin")
    assert snap.t == pytest.approx(0.05)

    rows = read_diagnostics_csv(tmp_path / "diag.csv")
    assert rows[0]["t"] == 0.0
    assert all("energy" in row for row in rows)

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config_sha256"] == config_digest(cfg.read_bytes())
    assert manifest["gauss_solve"]["residual"] <= 1e-9
    assert "numpy" in manifest["versions"]


def test_simulate_validation_failures(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1
    bad = write_config(tmp_path, {"params": {"kappa": -1.0}})
    assert main(["simulate", "--config", str(bad)]) == 1
    assert "κ > 0" in capsys.readouterr().err
    nondiv = write_config(tmp_path, {"integrator": {"dt": 0.3, "T": 1.0}}, "nd.json")
    assert main(["simulate", "--config", str(nondiv)]) == 1


def test_simulate_numerical_failure_exit_code(tmp_path):
    cfg = write_config(tmp_path, {
        "grid": {"n": 32},
        "integrator": {"dt": 5.0, "T": 5.0, "scheme": "midpoint"},
        "data": {"generator": "gaussian-bump", "params": {"amplitude": 2.0}},
    })
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_diagnose_reads_snapshots(tmp_path):
    cfg = small_run_config(tmp_path)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "s.json")]) == 0
    snap = tmp_path / "snaps" / "snapshot_000000.bin"
    out = tmp_path / "diagnose.csv"
    assert main(["diagnose", str(snap), "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_diagnostics_csv(out)
    assert len(rows) == 1
    assert rows[0]["gauss_res"] < 1e-4
    assert rows[0]["energy"] > 0.0


def test_norms_command(tmp_path):
    cfg = small_run_config(tmp_path)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "s.json")]) == 0
    snap = tmp_path / "snaps" / "snapshot_000000.bin"
    out = tmp_path / "norms.json"
    assert main(["norms", "--snapshot", str(snap), "--s", "1.0", "--r", "1.5",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["r"] == 1.5
    assert set(doc["norms"]) == {"A0", "A1", "A2", "phi", "N"}
    assert doc["norms"]["phi"] > 0.0
    assert all(np.isfinite(v) for v in doc["norms"].values())


def test_admissible_command(tmp_path):
    out = tmp_path / "adm.json"
    assert main(["admissible", "--r", "2", "--s", "1", "--l", "1", "--m", "1",
                 "--gap", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["ok"] is True
    assert doc["violations"] == []
    assert "gap" in doc

    assert main(["admissible", "--r", "2", "--s", "0.3", "--l", "1", "--m", "1",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["ok"] is False
    assert doc["violations"]


def test_scaling_test_command(tmp_path):
    out = tmp_path / "scaling.json"
    assert main(["scaling-test", "--n", "64", "--s", "1.0", "--r", "2.0",
                 "--lam", "2.0", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["results"][0]["lam"] == 2.0
    assert doc["results"][0]["deviation"] < 1e-9


def test_nullform_verify_command(tmp_path):
    out = tmp_path / "nf.json"
    assert main(["nullform-verify", "--count", "2", "--n", "32", "--kmax", "5",
                 "--amplitude", "0.3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["count"] == 2
    assert doc["max_residual"] < 1e-9


def test_delta_integrals_explicit_and_far_failure(tmp_path):
    out = tmp_path / "delta.csv"
    assert main(["delta-integrals", "--branch", "elliptic", "--tau", "3.0",
                 "--xi", "1.0", "--r", "2.0", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    # (p, q) defaults to (2, 1) at r = 2, whose closed form is 4 pi / (tau^2 - xi^2)
    assert float(rows[0]["value"]) == pytest.approx(4.0 * np.pi / 8.0, rel=1e-9)

    assert main(["delta-integrals", "--branch", "far", "--tau", "1.0",
                 "--xi", "2.0", "--r", "1.0"]) == 2


def test_delta_integrals_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["delta-integrals", "--sweep", "default", "--branch", "elliptic",
                 "--r", "2.0", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 100
    ratios = np.array([float(row["ratio"]) for row in rows])
    assert np.all(np.isfinite(ratios)) and np.all(ratios > 0.0)


def test_probe_command_and_ratio_dump(tmp_path):
    out = tmp_path / "probe.json"
    ratios_csv = tmp_path / "ratios.csv"
    argv = ["probe", "--lemma", "L31", "--r", "2.0", "--alpha1", "0.39",
            "--alpha2", "0.39", "--b", "0.51", "--count", "4", "--n", "16",
            "--nt", "32", "--kmin", "0.0", "--kmax", "3.0", "--seed", "3",
            "--dilations", "1", "--out", str(out), "--dump-ratios", str(ratios_csv)]
    assert main(argv) == 0
    doc = json.loads(out.read_text())
    assert doc["lemma"] == "L31"
    assert doc["hypothesis"]["ok"] is True
    with open(ratios_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert all(float(row["ratio"]) > 0.0 for row in rows)


def test_probe_enforces_hypotheses(tmp_path, capsys):
    argv = ["probe", "--lemma", "L31", "--r", "2.0", "--alpha1", "0.1",
            "--alpha2", "0.1", "--b", "0.51", "--count", "2", "--n", "16",
            "--nt", "32", "--dilations", "1"]
    assert main(argv) == 1
    assert "hypotheses violated" in capsys.readouterr().err
    assert main(argv + ["--no-enforce", "--out", str(tmp_path / "p.json")]) == 0
    doc = json.loads((tmp_path / "p.json").read_text())
    assert doc["hypothesis"]["ok"] is False
