from __future__ import annotations

import csv
import json
import shlex
import sys
from pathlib import Path

import numpy as np
import pytest

from fpopt.cli import main
from fpopt.harness import gen_seed_pool, load_seed_pool, sa_to_native

from conftest import fp


def write_config(tmp_path: Path, text: str, name: str = "exp.yaml") -> Path:
    path = tmp_path / name
    path.write_text(text)
    return path


SMALL_EXPERIMENT = """\
oracle:
  family: hidden_target
  length: 64
  seed: 3
algorithms:
  - name: ga
    params: {population_size: 8, offspring_size: 16, flips_per_mutation: 8}
  - name: dreinforce
    params:
      population_size: 4
      n_repeats: 2
      mh_flip_count: 4
      ga_local: {population_size: 4, offspring_size: 8, flips_per_mutation: 4, n_iterations: 2}
  - random
budget: 200
master_seed: 5
n_seeds: 2
seed_pool:
  generate: {count: 64, sparsity: 0.125}
output_dir: OUTPUT_DIR
"""


def run_small_experiment(tmp_path: Path, out_name: str = "runs") -> Path:
    out = tmp_path / out_name
    config = write_config(
        tmp_path, SMALL_EXPERIMENT.replace("OUTPUT_DIR", str(out)), f"{out_name}.yaml"
    )
    assert main(["run", str(config)]) == 0
    return out


class TestGenPool:
    def test_file_format_and_determinism(self, tmp_path):
        out = tmp_path / "pool.txt"
        assert main([
            "gen-pool", "--length", "64", "--count", "50", "--sparsity", "0.25",
            "--seed", "3", "--out", str(out),
        ]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "#fp_len=64"
        assert len(lines) == 51
        pool = load_seed_pool(out)
        assert len(pool) == 50 and pool[0].length == 64

        out2 = tmp_path / "pool2.txt"
        gen_seed_pool(64, 50, 0.25, 3, out2)
        assert out.read_bytes() == out2.read_bytes()

    def test_single_entry_pool(self, tmp_path):
        out = tmp_path / "one.txt"
        gen_seed_pool(16, 1, 0.5, 0, out)
        assert len(load_seed_pool(out)) == 1

    def test_mean_popcount_tracks_sparsity(self, tmp_path):
        out = tmp_path / "big.txt"
        gen_seed_pool(4096, 1000, 1 / 64, seed=9, path=out)
        pool = load_seed_pool(out)
        mean = np.mean([fp.popcount for fp in pool])
        # Binomial(4096, 1/64): mean 64, per-sample var ~63.0
        sigma = np.sqrt(63.0 / 1000)
        assert abs(mean - 64.0) < 3 * sigma

    def test_bad_sparsity_is_config_error(self, tmp_path):
        code = main([
            "gen-pool", "--length", "16", "--count", "5", "--sparsity", "1.5",
            "--out", str(tmp_path / "x.txt"),
        ])
        assert code == 2


class TestRun:
    def test_output_tree_and_aggregate(self, tmp_path):
        out = run_small_experiment(tmp_path)
        oracle_dir = out / "hidden-tanimoto-L64"
        for algo in ("ga", "dreinforce", "random"):
            for seed in (1, 2):
                run_dir = oracle_dir / algo / f"seed{seed}"
                assert (run_dir / "trace.csv").exists()
                assert (run_dir / "summary.csv").exists()
                assert (run_dir / "meta.json").exists()
        assert (out / "manifest.json").exists()
        with (out / "aggregate.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        algos = {r["algorithm"] for r in rows}
        assert algos == {"ga", "dreinforce", "random"}
        metrics = {r["metric"] for r in rows if r["algorithm"] == "ga"}
        assert metrics == {
            "top1_avg", "top10_avg", "top100_avg",
            "auc_top10", "auc_top100", "diversity_top100",
        }
        for row in rows:
            float(row["mean"]), float(row["std"])  # 3-decimal formatted numbers
            assert int(row["n_seeds"]) == 2

    def test_same_config_twice_is_byte_identical(self, tmp_path):
        out1 = run_small_experiment(tmp_path, "runs_a")
        out2 = run_small_experiment(tmp_path, "runs_b")
        traces1 = sorted(out1.rglob("trace.csv"))
        traces2 = sorted(out2.rglob("trace.csv"))
        assert len(traces1) == 6
        for t1, t2 in zip(traces1, traces2):
            assert t1.read_bytes() == t2.read_bytes(), t1

    def test_budget_never_exceeded(self, tmp_path):
        out = run_small_experiment(tmp_path)
        for trace in out.rglob("trace.csv"):
            rows = trace.read_text().splitlines()[1:]
            assert len(rows) <= 200

    def test_manifest_echo_reruns_identically(self, tmp_path):
        out = run_small_experiment(tmp_path)
        manifest = json.loads((out / "manifest.json").read_text())
        echo = manifest["config"]
        echo["output_dir"] = str(tmp_path / "rerun")
        import yaml

        config2 = write_config(tmp_path, yaml.safe_dump(echo), "echo.yaml")
        assert main(["run", str(config2)]) == 0
        for t1 in sorted(out.rglob("trace.csv")):
            t2 = Path(str(t1).replace(str(out), str(tmp_path / "rerun")))
            assert t1.read_bytes() == t2.read_bytes()

    def test_invalid_config_exits_2(self, tmp_path):
        config = write_config(tmp_path, "oracle: {family: onemax, length: 64}\n")
        assert main(["run", str(config)]) == 2

    def test_zero_budget_rejected_before_work(self, tmp_path):
        config = write_config(
            tmp_path,
            "oracle: {family: onemax, length: 64}\nalgorithms: [random]\nbudget: 0\n",
        )
        assert main(["run", str(config)]) == 2

    def test_external_handshake_failure_exits_3(self, tmp_path):
        config = write_config(
            tmp_path,
            f"""\
oracle:
  family: external
  length: 64
  spawn: ["{sys.executable}", "-m", "fpopt.loopback", "--fp-len", "32"]
  timeout_s: 10
algorithms: [random]
budget: 20
n_seeds: 1
output_dir: {tmp_path / "x"}
""",
        )
        assert main(["run", str(config)]) == 3

    def test_external_loopback_run_with_sa_aux(self, tmp_path):
        out = tmp_path / "ext"
        config = write_config(
            tmp_path,
            f"""\
oracle:
  family: external
  length: 32
  spawn: ["{sys.executable}", "-m", "fpopt.loopback", "--fp-len", "32", "--aux", "sa"]
  timeout_s: 30
algorithms: [random]
budget: 25
master_seed: 2
n_seeds: 2
output_dir: {out}
""",
        )
        assert main(["run", str(config)]) == 0
        summary = (out / "external" / "random" / "seed1" / "summary.csv").read_text()
        assert "sa_top100" in summary
        for line in summary.splitlines():
            if line.startswith("sa_top100"):
                value = float(line.split(",")[1])
                assert 1.0 <= value <= 10.0


class TestReport:
    def test_recomputation_matches(self, tmp_path, capsys):
        out = run_small_experiment(tmp_path)
        assert main(["report", str(out)]) == 0
        captured = capsys.readouterr()
        assert "all stored summaries match" in captured.out

    def test_detects_tampered_summary(self, tmp_path):
        out = run_small_experiment(tmp_path)
        victim = next(out.rglob("summary.csv"))
        text = victim.read_text().replace("top1_avg,", "top1_avg,9").replace(",99", ",9")
        lines = victim.read_text().splitlines()
        lines[1] = lines[1].split(",")[0] + ",0.123456"
        victim.write_text("\n".join(lines) + "\n")
        assert main(["report", str(out)]) == 4

    def test_empty_dir_is_invalid_input(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert main(["report", str(tmp_path / "empty")]) == 2


class TestOracleCheck:
    def test_loopback_passes(self, capsys):
        cmd = f"{sys.executable} -m fpopt.loopback --fp-len 64 --aux sa"
        assert main(["oracle-check", "--spawn", cmd]) == 0
        captured = capsys.readouterr()
        assert "handshake ok" in captured.out
        assert "oracle-check passed" in captured.out

    def test_misbehaving_server_exits_3(self):
        argv = shlex.join([
            sys.executable, str(Path(__file__).parent / "badserver.py"),
            "--mode", "wrong-arity", "--fp-len", "16",
        ])
        assert main(["oracle-check", "--spawn", argv]) == 3

    def test_unspawnable_server_exits_3(self):
        assert main(["oracle-check", "--spawn", "/nonexistent/oracle-server"]) == 3


def test_sa_native_mapping():
    assert sa_to_native(0.0) == 1.0
    assert sa_to_native(1.0) == 10.0
    assert sa_to_native(0.5) == 5.5
