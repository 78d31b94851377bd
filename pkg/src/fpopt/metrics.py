"""Trace metrics: top-K averages, budget-normalized top-K AUC, diversity.

All metrics are pure functions of an evaluation trace, so a run is fully
reproducible from its exported trace CSV. Fewer-than-K prefixes average over
whatever is available; runs that stop before the budget hold their last
top-K value to the full budget, so stopping early is never rewarded.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .fingerprint import Fingerprint, similarity_by_name, diversity
from .oracle import EvalTrace

METRIC_ORDER = (
    "top1_avg",
    "top10_avg",
    "top100_avg",
    "auc_top10",
    "auc_top100",
    "diversity_top100",
)


@dataclass(frozen=True)
class Candidate:
    """A fingerprint with its oracle score."""

    fp: Fingerprint
    score: float


@dataclass
class RunResult:
    """One seeded run: the trace, its metric table, and the top candidates."""

    trace: EvalTrace
    budget: int
    metrics: dict[str, float]
    top_candidates: list[Candidate]
    extras: dict = field(default_factory=dict)

    @property
    def best_score(self) -> float:
        return self.top_candidates[0].score if self.top_candidates else math.nan


def _ascending_mean(sorted_scores: Sequence[float]) -> float:
    """Mean accumulated in ascending order; shared by streaming and oracle paths."""
    total = 0.0
    for s in sorted_scores:
        total += s
    return total / len(sorted_scores)


def top_k_average(trace: EvalTrace, k: int) -> float:
    """Mean of the K highest scores among unique evaluations.

    Falls back to all available scores when the trace holds fewer than K.
    """
    if len(trace) == 0:
        raise ValueError("top_k_average of an empty trace is undefined")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    scores = sorted(entry.score for entry in trace)
    return _ascending_mean(scores[-k:])


def top_k_auc(trace: EvalTrace, k: int, budget: int) -> float:
    """(1/B) * sum over calls t=1..B of the top-K average of the trace prefix.

    Past the final call the last value is held constant. The per-step top-K
    multiset is kept sorted and summed in ascending order so a brute-force
    prefix recomputation reproduces this value bit for bit.
    """
    if budget <= 0:
        raise ValueError(f"budget must be positive, got {budget}")
    n = len(trace)
    if n == 0:
        raise ValueError("top_k_auc of an empty trace is undefined")
    if n > budget:
        raise ValueError(f"trace length {n} exceeds budget {budget}")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    top: list[float] = []  # ascending
    acc = 0.0
    current = 0.0
    for entry in trace:
        if len(top) < k:
            bisect.insort(top, entry.score)
        elif entry.score > top[0]:
            top.pop(0)
            bisect.insort(top, entry.score)
        current = _ascending_mean(top)
        acc += current
    acc += (budget - n) * current
    return acc / budget


def top_candidates(trace: EvalTrace, limit: int = 100) -> list[Candidate]:
    """Best ``limit`` candidates by score; ties go to the earlier call."""
    ranked = sorted(trace, key=lambda e: (-e.score, e.call_index))
    return [Candidate(e.fingerprint, e.score) for e in ranked[:limit]]


def top_100_diversity(
    result: "RunResult | Sequence[Candidate]", sim_kind: str = "tanimoto"
) -> float:
    """Diversity of a run's top candidates under the named similarity."""
    candidates = result.top_candidates if isinstance(result, RunResult) else result
    if len(candidates) < 2:
        raise ValueError(f"diversity needs >= 2 candidates, got {len(candidates)}")
    return diversity([c.fp for c in candidates], similarity_by_name(sim_kind))


def run_result_from_trace(
    trace: EvalTrace,
    budget: int,
    diversity_sim: str = "tanimoto",
    extras: dict | None = None,
) -> RunResult:
    """Compute the standard metric table for one finished run.

    diversity_top100 is omitted when fewer than two unique evaluations exist.
    """
    if len(trace) == 0:
        raise ValueError("cannot build a RunResult from an empty trace")
    best = top_candidates(trace, 100)
    metrics = {
        "top1_avg": top_k_average(trace, 1),
        "top10_avg": top_k_average(trace, 10),
        "top100_avg": top_k_average(trace, 100),
        "auc_top10": top_k_auc(trace, 10, budget),
        "auc_top100": top_k_auc(trace, 100, budget),
    }
    if len(best) >= 2:
        metrics["diversity_top100"] = top_100_diversity(best, diversity_sim)
    return RunResult(
        trace=trace,
        budget=budget,
        metrics=metrics,
        top_candidates=best,
        extras=extras or {},
    )


@dataclass(frozen=True)
class AggregateRow:
    oracle: str
    algorithm: str
    metric: str
    mean: float
    std: float
    n_seeds: int


@dataclass
class AggregateReport:
    """Per (oracle, algorithm, metric) mean and sample std over seeds."""

    rows: list[AggregateRow]

    def format_table(self) -> str:
        """mean +- std lines, 3 decimals, one block per (oracle, algorithm)."""
        lines = []
        current = None
        for row in self.rows:
            head = (row.oracle, row.algorithm)
            if head != current:
                lines.append(f"{row.oracle} / {row.algorithm} (n={row.n_seeds})")
                current = head
            lines.append(f"  {row.metric:<18} {row.mean:.3f} +- {row.std:.3f}")
        return "\n".join(lines)


def aggregate(
    groups: Mapping[tuple[str, str], Sequence[Mapping[str, float]]]
) -> AggregateReport:
    """Aggregate per-seed metric maps grouped by (oracle, algorithm).

    Every group needs at least two seeds and a consistent metric schema;
    std uses the n-1 denominator.
    """
    rows: list[AggregateRow] = []
    for (oracle_name, algo), runs in groups.items():
        if len(runs) < 2:
            raise ValueError(
                f"group ({oracle_name}, {algo}) has {len(runs)} runs; need >= 2 seeds"
            )
        keys = set(runs[0])
        for run in runs[1:]:
            if set(run) != keys:
                raise ValueError(
                    f"group ({oracle_name}, {algo}) has inconsistent metrics: "
                    f"{sorted(keys)} vs {sorted(run)}"
                )
        ordered = [m for m in METRIC_ORDER if m in keys]
        ordered += sorted(keys.difference(METRIC_ORDER))
        for metric in ordered:
            values = [run[metric] for run in runs]
            n = len(values)
            mean = sum(values) / n
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            rows.append(AggregateRow(oracle_name, algo, metric, mean, math.sqrt(var), n))
    return AggregateReport(rows)


def write_summary_csv(metrics: Mapping[str, float], path: str | Path) -> None:
    """Per-run summary: ``metric,value`` rows in canonical order, full precision."""
    path = Path(path)
    ordered = [m for m in METRIC_ORDER if m in metrics]
    ordered += sorted(set(metrics).difference(METRIC_ORDER))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for name in ordered:
            writer.writerow([name, repr(metrics[name])])


def read_summary_csv(path: str | Path) -> dict[str, float]:
    path = Path(path)
    out: dict[str, float] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["metric", "value"]:
            raise ValueError(f"{path}: not a summary CSV (header {header!r})")
        for row in reader:
            if row:
                out[row[0]] = float(row[1])
    return out


def write_aggregate_csv(report: AggregateReport, path: str | Path) -> None:
    """``oracle,algorithm,metric,mean,std,n_seeds`` with 3-decimal statistics."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["oracle", "algorithm", "metric", "mean", "std", "n_seeds"])
        for row in report.rows:
            writer.writerow(
                [row.oracle, row.algorithm, row.metric, f"{row.mean:.3f}", f"{row.std:.3f}", row.n_seeds]
            )
