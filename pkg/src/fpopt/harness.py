"""Experiment runner: seed pools, per-seed execution, output tree, reports.

Output layout for one experiment:

    <output_dir>/
      manifest.json                    config echo, version, wall clock
      aggregate.csv                    mean/std per (algorithm, metric)
      <oracle>/<algo>/seed<i>/
        trace.csv                      call_index,score,fingerprint_hex
        summary.csv                    metric,value (full precision)
        meta.json                      budget, seeds, lengths for recompute
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bridge import ExternalOracle, OracleEndpoint, ProtocolError
from .config import (
    AlgorithmConfig,
    RunConfig,
    config_echo,
    derive_pool_seed,
    derive_run_seed,
)
from .fingerprint import Fingerprint, random_fingerprint
from .metrics import (
    RunResult,
    aggregate,
    read_summary_csv,
    run_result_from_trace,
    write_aggregate_csv,
    write_summary_csv,
)
from .oracle import BudgetedOracle, Oracle, read_trace_csv, write_trace_csv
from .search import run_dreinforce, run_ga_baseline, run_random_search
from .synthetic import make_oracle

# Bit density of generated pools when the config does not pin one. Sparse
# pools mimic structural fingerprints; the bit-counting families start
# from balanced strings.
_POOL_SPARSITY = {
    "onemax": 0.5,
    "nk": 0.5,
    "ising": 0.5,
    "hidden_target": 0.125,
    "external": 0.125,
}

SA_NATIVE_MIN = 1.0
SA_NATIVE_MAX = 10.0


def sa_to_native(wire_score: float) -> float:
    """Map a wire-transport sa score in [0, 1] back to its native 1..10 range."""
    return SA_NATIVE_MIN + (SA_NATIVE_MAX - SA_NATIVE_MIN) * wire_score


def gen_seed_pool(
    length: int, count: int, sparsity: float, seed: int, path: str | Path
) -> Path:
    """Write a deterministic pool file: header ``#fp_len=<L>``, one hex per line."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not 0.0 < sparsity < 1.0:
        raise ValueError(f"sparsity must be in (0, 1), got {sparsity}")
    if length % 4 != 0:
        raise ValueError(f"length must be a multiple of 4, got {length}")
    rng = np.random.default_rng(seed)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"#fp_len={length}"]
    for _ in range(count):
        lines.append(random_fingerprint(length, rng, density=sparsity).to_hex())
    path.write_text("\n".join(lines) + "\n")
    return path


def load_seed_pool(path: str | Path) -> list[Fingerprint]:
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#fp_len="):
        raise ValueError(f"{path}: missing '#fp_len=<L>' header")
    length = int(lines[0].split("=", 1)[1])
    pool = [Fingerprint.from_hex(ln, length) for ln in lines[1:]]
    if not pool:
        raise ValueError(f"{path}: pool has no fingerprints")
    return pool


def _build_pool(config: RunConfig) -> list[Fingerprint]:
    if config.pool.path is not None:
        pool = load_seed_pool(config.pool.path)
        if pool[0].length != config.oracle.length:
            raise ValueError(
                f"seed pool length {pool[0].length} != oracle length {config.oracle.length}"
            )
        return pool
    sparsity = config.pool.sparsity
    if sparsity is None:
        sparsity = _POOL_SPARSITY[config.oracle.family]
    rng = np.random.default_rng(derive_pool_seed(config.master_seed))
    return [
        random_fingerprint(config.oracle.length, rng, density=sparsity)
        for _ in range(config.pool.count)
    ]


@dataclass
class SeedRunRecord:
    oracle_name: str
    algorithm: str
    seed_index: int
    run_seed: int
    result: RunResult
    out_dir: Path


@dataclass
class ExperimentOutput:
    output_dir: Path
    records: list[SeedRunRecord]
    aggregate_path: Path | None


def _make_inner_oracle(config: RunConfig) -> tuple[Oracle, OracleEndpoint | None]:
    """Fresh bare oracle for one seeded run (external runs get a new endpoint)."""
    if config.oracle.endpoint is None:
        return make_oracle(config.oracle.spec_dict()), None
    endpoint = OracleEndpoint(config.oracle.endpoint)
    descriptor = endpoint.handshake()
    if descriptor.fp_len != config.oracle.length:
        endpoint.shutdown()
        raise ProtocolError(
            f"oracle server fp_len {descriptor.fp_len} != configured length "
            f"{config.oracle.length}"
        )
    return ExternalOracle(endpoint, name=config.oracle.name), endpoint


def _execute_one(
    config: RunConfig, algo: AlgorithmConfig, seed_index: int
) -> tuple[RunResult, int]:
    run_seed = derive_run_seed(
        config.master_seed, seed_index, config.oracle.name or "", algo.name
    )
    rng = np.random.default_rng(run_seed)
    pool = _build_pool(config)
    inner, endpoint = _make_inner_oracle(config)
    try:
        oracle = BudgetedOracle(inner, config.budget)
        if algo.name == "ga":
            result = run_ga_baseline(algo.ga, oracle, pool, rng, config.diversity_sim)
        elif algo.name == "dreinforce":
            result = run_dreinforce(algo.dreinforce, oracle, pool, rng, config.diversity_sim)
        else:
            result = run_random_search(oracle, pool, rng, config.diversity_sim)
        if isinstance(inner, ExternalOracle) and "sa" in inner.aux and result.top_candidates:
            wire = inner.evaluate_aux([c.fp for c in result.top_candidates], "sa")
            native = [sa_to_native(s) for s in wire]
            result.metrics["sa_top100"] = sum(native) / len(native)
            result.extras["sa_native"] = native
    finally:
        if endpoint is not None:
            endpoint.shutdown()
    return result, run_seed


def run_experiment(config: RunConfig, echo: dict | None = None) -> ExperimentOutput:
    """Execute every (algorithm, seed) cell and write the output tree."""
    started = time.monotonic()
    out_root = Path(config.output_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    records: list[SeedRunRecord] = []
    for algo in config.algorithms:
        for seed_index in range(1, config.n_seeds + 1):
            result, run_seed = _execute_one(config, algo, seed_index)
            run_dir = out_root / config.oracle.name / algo.name / f"seed{seed_index}"
            run_dir.mkdir(parents=True, exist_ok=True)
            write_trace_csv(result.trace, run_dir / "trace.csv")
            write_summary_csv(result.metrics, run_dir / "summary.csv")
            meta = {
                "oracle": config.oracle.name,
                "algorithm": algo.name,
                "seed_index": seed_index,
                "run_seed": run_seed,
                "budget": config.budget,
                "fp_len": config.oracle.length,
                "diversity_sim": config.diversity_sim,
            }
            (run_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
            records.append(
                SeedRunRecord(config.oracle.name, algo.name, seed_index, run_seed, result, run_dir)
            )
    aggregate_path = None
    if config.n_seeds >= 2:
        groups: dict[tuple[str, str], list[dict[str, float]]] = {}
        for record in records:
            groups.setdefault((record.oracle_name, record.algorithm), []).append(
                record.result.metrics
            )
        report = aggregate(groups)
        aggregate_path = out_root / "aggregate.csv"
        write_aggregate_csv(report, aggregate_path)
    manifest = {
        "artifact": "fpopt",
        "version": __version__,
        "config": echo if echo is not None else config_echo(config),
        "wall_clock_s": round(time.monotonic() - started, 3),
    }
    (out_root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return ExperimentOutput(out_root, records, aggregate_path)


@dataclass
class ReportMismatch:
    run_dir: Path
    metric: str
    stored: float
    recomputed: float


def report_runs_dir(runs_dir: str | Path) -> tuple[Path | None, list[ReportMismatch]]:
    """Recompute metrics from each seed's trace.csv and rebuild the aggregate.

    Trace-derived metrics are checked against the stored summary.csv; any
    disagreement is returned as a mismatch. Metrics that cannot come from the
    trace alone (sa_top100) are passed through unchanged.
    """
    runs_dir = Path(runs_dir)
    seed_dirs = sorted(runs_dir.glob("*/*/seed*"))
    if not seed_dirs:
        raise ValueError(f"{runs_dir}: no '<oracle>/<algo>/seed*' run directories found")
    mismatches: list[ReportMismatch] = []
    groups: dict[tuple[str, str], list[dict[str, float]]] = {}
    n_seeds_max = 0
    for run_dir in seed_dirs:
        meta = json.loads((run_dir / "meta.json").read_text())
        trace = read_trace_csv(run_dir / "trace.csv")
        recomputed = run_result_from_trace(
            trace, meta["budget"], diversity_sim=meta["diversity_sim"]
        ).metrics
        stored = read_summary_csv(run_dir / "summary.csv")
        for name, value in stored.items():
            if name in recomputed and recomputed[name] != value:
                mismatches.append(ReportMismatch(run_dir, name, value, recomputed[name]))
            if name not in recomputed:
                recomputed[name] = value  # aux metrics pass through
        groups.setdefault((meta["oracle"], meta["algorithm"]), []).append(recomputed)
        n_seeds_max = max(n_seeds_max, meta["seed_index"])
    aggregate_path = None
    if all(len(runs) >= 2 for runs in groups.values()):
        report = aggregate(groups)
        aggregate_path = runs_dir / "aggregate.csv"
        write_aggregate_csv(report, aggregate_path)
    return aggregate_path, mismatches
