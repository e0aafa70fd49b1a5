"""Config parsing, run artifacts, determinism, and the CLI front end."""

import json
import os

import numpy as np
import pytest

from wasep import cli, harness
from wasep.harness import ConfigError, parse_config


def test_parse_minimal():
    cfg = parse_config("kind=burgers\n")
    assert cfg.kind == "burgers"
    assert cfg.seed == harness.DEFAULT_SEED
    assert cfg.seed_was_defaulted
    assert cfg.N == 128


def test_parse_full():
    cfg = parse_config(
        "kind=hydro\nN=64\nalpha=0.4\nreplicas=3\nseed=9\n"
        "times=0.1,0.2\nsizes=64,128\ninitial=step\nthreads=2\n")
    assert cfg.N == 64
    assert cfg.alpha == 0.4
    assert cfg.times == (0.1, 0.2)
    assert cfg.sizes == (64, 128)
    assert cfg.initial == "step"
    assert not cfg.seed_was_defaulted


def test_parse_comments_and_blanks():
    cfg = parse_config("# a comment\n\nkind=burgers\n  # indented\n")
    assert cfg.kind == "burgers"


def test_overrides_take_precedence():
    cfg = parse_config("kind=burgers\nseed=1\n", {"seed": 2, "out": None})
    assert cfg.seed == 2


def test_all_violations_collected():
    with pytest.raises(ConfigError) as err:
        parse_config("kind=nope\nalpha=2.0\nbogus=1\nreplicas=zero\njunkline\n")
    v = "\n".join(err.value.violations)
    assert "kind=" in v
    assert "alpha=" in v
    assert "unknown key 'bogus'" in v
    assert "cannot convert" in v
    assert "junkline" in v
    # the invalid kind also triggers the missing-kind violation
    assert len(err.value.violations) == 6


def test_missing_kind_rejected():
    with pytest.raises(ConfigError):
        parse_config("N=32\n")


def test_threads_env_default(monkeypatch):
    monkeypatch.setenv(harness.THREADS_ENV_VAR, "3")
    assert parse_config("kind=burgers\n").threads == 3
    monkeypatch.setenv(harness.THREADS_ENV_VAR, "junk")
    assert parse_config("kind=burgers\n").threads == 1


BURGERS_CFG = "kind=burgers\nn_cells=50\ntimes=0.1,0.3\n"


def run_to_dir(tmp_path, name, text, extra=None):
    out = os.path.join(tmp_path, name)
    overrides = {"out": out}
    if extra:
        overrides.update(extra)
    cfg = parse_config(text, overrides)
    report = harness.RUNNERS[cfg.kind](cfg)
    return out, report


def test_burgers_runner_artifacts(tmp_path):
    out, report = run_to_dir(str(tmp_path), "a", BURGERS_CFG)
    names = sorted(os.listdir(out))
    assert names == ["config.resolved", "density.csv", "meta.json", "report.json"]
    with open(os.path.join(out, "report.json")) as f:
        on_disk = json.load(f)
    assert on_disk["mass"] == pytest.approx([0.5, 0.5])
    assert max(on_disk["flat_height_sup_error"]) <= 2.5 / 50
    with open(os.path.join(out, "density.csv")) as f:
        header = f.readline().strip()
    assert header == "t,x,density"


def test_artifacts_deterministic_except_meta(tmp_path):
    out1, r1 = run_to_dir(str(tmp_path), "r1", BURGERS_CFG)
    out2, r2 = run_to_dir(str(tmp_path), "r2", BURGERS_CFG)
    # everything except the out path and meta.json is a pure function of
    # the config
    r1["config"].pop("out")
    r2["config"].pop("out")
    assert r1 == r2
    for name in ("density.csv",):
        with open(os.path.join(out1, name), "rb") as f:
            b1 = f.read()
        with open(os.path.join(out2, name), "rb") as f:
            b2 = f.read()
        assert b1 == b2, name


def test_coupled_runner_threads_invariance(tmp_path):
    text = "kind=coupled\nN=8\nreplicas=6\ntimes=0.2\nseed=5\n"
    out1, r1 = run_to_dir(str(tmp_path), "t1", text, {"threads": 1})
    out2, r2 = run_to_dir(str(tmp_path), "t2", text, {"threads": 2})
    assert r1["sign_change_violations"] == r2["sign_change_violations"] == 0
    assert r1["site_density_max_dev"] == r2["site_density_max_dev"]
    with open(os.path.join(out1, "site_density.csv")) as f:
        c1 = f.read()
    with open(os.path.join(out2, "site_density.csv")) as f:
        c2 = f.read()
    assert c1 == c2


def test_equilibrium_runner_smoke(tmp_path):
    text = "kind=equilibrium\nN=16\nreplicas=400\ngrid=0\nseed=3\n"
    out, report = run_to_dir(str(tmp_path), "eq", text)
    (row,) = report["covariance"]
    assert row["x"] == 0.0 and row["y"] == 0.0
    assert 0.05 < row["empirical"] < 0.6
    assert row["limit"] == pytest.approx(0.25)


def test_hydro_runner_smoke(tmp_path):
    text = "kind=hydro\nsizes=32\nalpha=0.5\nreplicas=2\ntimes=0.1\nn_cells=8\nseed=4\n"
    out, report = run_to_dir(str(tmp_path), "hy", text)
    (row,) = report["errors"]
    assert row["N2"] == 32
    assert 0.0 <= row["l1_error"] < 0.5


def test_kernel_audit_runner_smoke(tmp_path):
    text = "kind=kernel-audit\nN=8\ntimes=0.05\nseed=1\n"
    out, report = run_to_dir(str(tmp_path), "ka", text)
    names = {r["ratio"] for r in report["rows"]}
    assert "eigen_images_max_abs_dev" in names
    dev = next(r for r in report["rows"] if r["ratio"] == "eigen_images_max_abs_dev")
    assert dev["value"] < 1e-8
    assert all(np.isfinite(r["value"]) for r in report["rows"])


def test_kpz_runner_smoke(tmp_path):
    text = ("kind=kpz\nsizes=16,32\nalpha=0.3333333333333333\nreplicas=20\n"
            "t=0.05\nseed=2\nmshe_cells=20\nmshe_support=2.0\nmshe_dt=0.001\n"
            "mshe_replicas=200\n")
    out, report = run_to_dir(str(tmp_path), "kz", text)
    assert len(report["ks_between_sizes"]) == 1
    assert set(report["variances"]) == {"8", "16"}
    assert report["reference_variance_h"] > 0.0


def test_cli_exit_codes(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("n_cells=50\ntimes=0.1\n")
    assert cli.main(["burgers", "--config", str(cfg)]) == 0
    assert cli.main(["burgers", "--config", str(tmp_path / "absent.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("alpha=7\n")
    assert cli.main(["burgers", "--config", str(bad)]) == 2


def test_cli_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "runout"
    code = cli.main(["kernel-audit", "--out", str(out), "--seed", "1"])
    assert code == 0
    assert (out / "report.json").exists()
    assert (out / "audit.csv").exists()
    summary = json.loads(capsys.readouterr().out)
    assert "rows" in summary
