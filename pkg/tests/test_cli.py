from __future__ import annotations

import json
import math
from types import SimpleNamespace

import pytest

import core.kernel as kernel
from core.cli import SCAN_HEADER, lau_tsang_tau, run_cli, term_count
from core.config import RunConfig

ENV_VARS = ("RLAB_CACHE_DIR", "RLAB_MAX_LIMIT", "RLAB_WORKERS", "RLAB_SUPPORT_CAP",
            "RLAB_LOG_LEVEL", "RLAB_LOG_FILE")


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)


def _dirs(tmp_path):
    return ["--cache-dir", str(tmp_path / "cache"), "--out", str(tmp_path / "out")]


# --- exit codes ---

def test_sieve_writes_the_cache(tmp_path, capsys) -> None:
    assert run_cli(["sieve", "--limit", "1000", *_dirs(tmp_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["N"] == 1000
    assert summary["primes"] == 168
    assert (tmp_path / "cache" / "tables_N1000_knone.rlab").exists()


def test_sieve_piltz_tables(tmp_path) -> None:
    assert run_cli(["sieve", "--limit", "500", "--variant", "piltz", "--k", "3", *_dirs(tmp_path)]) == 0
    assert (tmp_path / "cache" / "tables_N500_k3.rlab").exists()


def test_bad_arguments_exit_2(tmp_path) -> None:
    assert run_cli(["scan", "--X", "bogus", *_dirs(tmp_path)]) == 2
    assert run_cli(["explode"]) == 2
    assert run_cli(["scan", "--X", "10", *_dirs(tmp_path)]) == 2
    assert run_cli(["sieve", *_dirs(tmp_path)]) == 2
    assert run_cli(["verify", "--suite", "nope", *_dirs(tmp_path)]) == 2
    assert run_cli(["scan", "--X", "100", "--config", str(tmp_path / "missing.json")]) == 2


def test_limit_above_cap_exits_3(tmp_path, monkeypatch) -> None:
    monkeypatch.setenv("RLAB_MAX_LIMIT", "1000")
    assert run_cli(["sieve", "--limit", "5000", *_dirs(tmp_path)]) == 3


def test_dry_run(tmp_path, capsys) -> None:
    assert run_cli(["scan", "--X", "100", "--dry-run", *_dirs(tmp_path)]) == 0
    config = json.loads(capsys.readouterr().out)
    assert config["X"] == [100.0]
    assert config["command"] == "scan"
    assert not (tmp_path / "out").exists()


def test_config_file_feeds_the_run(tmp_path, capsys) -> None:
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"workers": 2, "X": [40, 80]}))
    assert run_cli(["scan", "--config", str(path), "--dry-run", *_dirs(tmp_path)]) == 0
    config = json.loads(capsys.readouterr().out)
    assert config["workers"] == 2
    assert config["X"] == [40.0, 80.0]


# --- verify ---

def test_verify_arith(tmp_path, capsys) -> None:
    assert run_cli(["verify", "--suite", "arith", *_dirs(tmp_path)]) == 0
    brief = json.loads(capsys.readouterr().out)
    assert brief["failed"] == 0
    doc = json.loads((tmp_path / "out" / "verify_arith.json").read_text())
    assert doc["checks"] == len(doc["results"])


@pytest.mark.slow
def test_broken_kernel_fails_verification(tmp_path, monkeypatch) -> None:
    original = kernel.weight
    monkeypatch.setattr(kernel, "weight", lambda lam, alpha: 2.0 * original(lam, alpha))
    assert run_cli(["verify", "--suite", "kernel", *_dirs(tmp_path)]) == 4
    doc = json.loads((tmp_path / "out" / "verify_kernel.json").read_text())
    assert doc["failed"] > 0


# --- resonate / scan / report ---

def test_resonate(tmp_path) -> None:
    assert run_cli(["resonate", "--X", "1e6", "--C", "1", *_dirs(tmp_path)]) == 0
    doc = json.loads((tmp_path / "out" / "resonator_X1e+06.json").read_text())
    assert doc["n_list"] == [30, 42]
    assert doc["size"] == 2
    assert doc["tuned"] is False
    assert doc["product_sup"] <= doc["sup_bound"]
    lines = (tmp_path / "out" / "support_X1e+06.csv").read_text().splitlines()
    assert lines[0] == "u,weight"
    assert len(lines) - 1 == doc["support_size"]


SCAN_ARGS = ["scan", "--X", "20", "--X", "40", "--X", "30", "--max-terms", "200", "--max-points", "2000"]


def test_scan_then_report(tmp_path) -> None:
    assert run_cli([*SCAN_ARGS, *_dirs(tmp_path)]) == 0
    out = tmp_path / "out"
    lines = (out / "scan.csv").read_text().splitlines()
    assert lines[0] == ",".join(SCAN_HEADER)
    assert [float(line.split(",")[0]) for line in lines[1:]] == [20.0, 30.0, 40.0]
    scan = json.loads((out / "scan.json").read_text())
    for entry in scan["results"]:
        assert entry["samples"] <= 2000
        assert entry["value"] > 0

    assert run_cli(["report", *_dirs(tmp_path)]) == 0
    report = json.loads((out / "growth.json").read_text())
    assert report["variant"] == "divisor"
    labels = [r["target"]["label"] for r in report["reports"]]
    assert labels == ["divisor", "divisor (previous)"]
    assert len(report["reports"][0]["rows"]) == 3


def test_scan_is_reproducible_across_workers(tmp_path) -> None:
    first, second = tmp_path / "a", tmp_path / "b"
    cache = ["--cache-dir", str(tmp_path / "cache")]
    assert run_cli([*SCAN_ARGS, *cache, "--out", str(first), "--workers", "1"]) == 0
    assert run_cli([*SCAN_ARGS, *cache, "--out", str(second), "--workers", "2"]) == 0
    assert (first / "scan.csv").read_bytes() == (second / "scan.csv").read_bytes()
    assert (first / "scan.json").read_bytes() == (second / "scan.json").read_bytes()


def test_report_needs_three_points(tmp_path) -> None:
    out = tmp_path / "out"
    out.mkdir()
    (out / "scan.csv").write_text(",".join(SCAN_HEADER) + "\n20,1,1.5,1,1,1\n40,1,1.7,1,1,1\n")
    assert run_cli(["report", *_dirs(tmp_path)]) == 2
    assert run_cli(["report", "--cache-dir", str(tmp_path), "--out", str(tmp_path / "empty")]) == 2


# --- term counts and variants ---

def test_term_count() -> None:
    config = RunConfig(X=(1e3,))
    assert term_count(config, 1e3) == 10
    assert term_count(config, 1e6) == 100
    assert term_count(config.with_values(max_terms=5), 1e3) == 5
    assert term_count(config.with_values(term_exponent=3.0, max_terms=50), 1e3) == 50
    assert term_count(config, 1e3, SimpleNamespace(n_list=[10, 14])) == 14
    assert term_count(config, 1e3, SimpleNamespace(n_list=[4, 6])) == 10
    assert term_count(config.with_values(term_exponent=0.01), 2.0) == 1


def test_lau_tsang_tau() -> None:
    assert lau_tsang_tau(2.0) == pytest.approx(4.0)
    tau = lau_tsang_tau(21.0)
    assert tau * tau / 4 == pytest.approx(2 * 21.0)


def test_resonate_lau_tsang(tmp_path) -> None:
    assert run_cli(["resonate", "--variant", "lau-tsang", "--X", "1e6", "--C", "1", *_dirs(tmp_path)]) == 0
    doc = json.loads((tmp_path / "out" / "resonator_X1e+06.json").read_text())
    assert doc["n_list"] == [30, 42]
    assert doc["tau"] == pytest.approx(math.sqrt(8 * doc["alpha"]))
    assert doc["budget_exponent"] == pytest.approx(1 / 32)


def test_resonate_piltz_budget(tmp_path) -> None:
    lam = repr(2 ** (4 / 3))
    args = ["resonate", "--variant", "piltz", "--k", "3", "--lambda", lam, "--X", "1e6"]
    assert run_cli([*args, *_dirs(tmp_path)]) == 0
    doc = json.loads((tmp_path / "out" / "resonator_X1e+06.json").read_text())
    assert doc["budget_exponent"] == 0.25
    assert doc["tuned"] is True
    assert doc["n_list"] == [30, 42]


def test_lau_tsang_scan_then_report(tmp_path) -> None:
    args = ["scan", "--variant", "lau-tsang", "--X", "1e4", "--X", "1e5", "--X", "1e6", "--max-points", "2000"]
    assert run_cli([*args, *_dirs(tmp_path)]) == 0
    out = tmp_path / "out"
    scan = json.loads((out / "scan.json").read_text())
    for entry in scan["results"]:
        assert entry["value"] > 0
        assert entry["window"][0] == pytest.approx(entry["X"] / 2)
        assert entry["grid_window"][1] <= entry["window"][1]

    assert run_cli(["report", "--variant", "lau-tsang", *_dirs(tmp_path)]) == 0
    report = json.loads((out / "growth.json").read_text())
    assert report["variant"] == "lau-tsang"
    labels = [r["target"]["label"] for r in report["reports"]]
    assert labels == ["lau-tsang", "lau-tsang (previous)"]


@pytest.mark.slow
def test_desk_scale_growth(tmp_path) -> None:
    args = ["scan", "--X", "1e3", "--X", "1e4", "--X", "1e5", "--max-points", "20000"]
    assert run_cli([*args, *_dirs(tmp_path)]) == 0
    results = json.loads((tmp_path / "out" / "scan.json").read_text())["results"]
    assert [entry["X"] for entry in results] == [1e3, 1e4, 1e5]
    terms = [entry["terms"] for entry in results]
    assert terms == sorted(terms) and terms[0] < terms[-1]
    for entry in results:
        assert entry["value"] >= 2 * entry["baseline_rms"]
        assert entry["window"][1] > entry["grid_window"][1]
    values = [entry["value"] for entry in results]
    assert values == sorted(values)
