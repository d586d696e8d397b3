import csv
import json
import subprocess
import sys

import pytest

from fracproj.cli import CHECKS, ExperimentConfig, main
from fracproj.errors import ConfigError

STRUCTURAL = {"mode": "structural", "b": 2, "q": 4, "tau": "1/2", "t": "5/6", "n": 2, "checks": "all"}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def read_summary(out):
    with open(out / "summary.csv") as fh:
        return list(csv.DictReader(fh))


def test_structural_all_checks_pass(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(write(tmp_path, STRUCTURAL)), "--out", str(out)]) == 0
    rows = read_summary(out)
    assert [r["check"] for r in rows] == list(CHECKS)
    assert all(r["pass"] == "true" for r in rows)
    for name in CHECKS:
        report = json.loads((out / f"{name}.json").read_text())
        assert report["pass"] is True
        assert report["check"] == name


def test_reports_are_deterministic(tmp_path):
    path = write(tmp_path, STRUCTURAL)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", str(path), "--out", str(a), "--trend", "2"])
    main(["run", "--config", str(path), "--out", str(b), "--trend", "2", "--parallel"])
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_paper_mode_params(tmp_path, capsys):
    cfg = {"mode": "paper", "t": "5/6", "tau": "1/2", "n_seed": 2, "checks": ["params"]}
    out = tmp_path / "p"
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    report = json.loads((out / "params.json").read_text())
    assert report["K"] == 2 and report["log2_inv_delta"] == 4 and report["rho_exp"] == 36


def test_unknown_check_is_config_error(tmp_path, capsys):
    cfg = dict(STRUCTURAL, checks=["params", "bogus"])
    assert main(["run", "--config", str(write(tmp_path, cfg))]) == 2
    assert "bogus" in capsys.readouterr().err


@pytest.mark.parametrize(
    "raw",
    [
        {"mode": "structural", "b": 2, "q": 4, "tau": "1/2", "t": "5/6"},
        {"mode": "weird", "t": "5/6", "tau": "1/2"},
        dict(STRUCTURAL, extra=1),
        dict(STRUCTURAL, n="2"),
        dict(STRUCTURAL, tau="x/y"),
        {"mode": "paper", "t": "5/6", "tau": "1/2", "n_seed": 2, "checks": ["uniformity"]},
    ],
)
def test_malformed_configs(raw):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_non_integral_structure_exits_two(tmp_path):
    cfg = dict(STRUCTURAL, b=3, q=2, t=1)
    assert main(["run", "--config", str(write(tmp_path, cfg))]) == 2


def test_unreadable_config_exits_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == 2


def test_failing_check_exits_one(tmp_path):
    # an impossible inclusion budget makes h-inclusion fail at depth 3
    cfg = dict(STRUCTURAL, n=3, checks=["h-inclusion"], inclusion_budget="1/1000")
    out = tmp_path / "f"
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out)]) == 1
    assert read_summary(out)[0]["pass"] == "false"


def test_module_error_names_check(tmp_path):
    cfg = dict(STRUCTURAL, n=3, checks=["product-ahlfors"], size_limit=100)
    out = tmp_path / "e"
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out)]) == 1
    report = json.loads((out / "product-ahlfors.json").read_text())
    assert report["error"] == "SizeLimit" and report["check"] == "product-ahlfors"


def test_h_inclusion_and_frostman_checks(tmp_path):
    cfg = dict(STRUCTURAL, checks=["h-inclusion", "frostman-nu"])
    out = tmp_path / "hf"
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    inc = json.loads((out / "h-inclusion.json").read_text())
    assert inc["within_budget"] is True
    fro = json.loads((out / "frostman-nu.json").read_text())
    assert fro["nu"]["pass"] and fro["rescaled_nu"]["pass"]


def test_sweep_with_theta_zero(tmp_path):
    cfg = dict(STRUCTURAL, checks=["projection-sweep"], sweep_thetas=["0"])
    out = tmp_path / "s"
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    report = json.loads((out / "projection-sweep.json").read_text())
    assert report["per_theta"][0]["count"] == 64


def test_trend_outputs(tmp_path):
    cfg = dict(STRUCTURAL, checks=["sumset-bound", "product-ahlfors"])
    out = tmp_path / "t"
    assert main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out), "--trend", "3"]) == 0
    with open(out / "trend.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["n"], r["check"]) for r in rows][:2] == [("1", "sumset-bound"), ("1", "product-ahlfors")]
    with open(out / "sumset_trend.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["cover_count"]) for r in rows] == [11, 148, 2211]


def test_timing_column(tmp_path):
    cfg = dict(STRUCTURAL, checks=["params"])
    out = tmp_path / "tm"
    main(["run", "--config", str(write(tmp_path, cfg)), "--out", str(out), "--timing"])
    assert read_summary(out)[0]["runtime_ms"] != ""


def test_params_subcommand(capsys):
    assert main(["params", "--t", "5/6", "--tau", "1/2", "--n-seed", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["K"] == 2 and report["log2_inv_delta"] == 9


def test_params_subcommand_bad_order():
    assert main(["params", "--t", "1/2", "--tau", "1/2", "--n-seed", "2"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fracproj", "params", "--t", "1", "--tau", "1/2", "--n-seed", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["K"] == 1
