"""Black-box oracle runtime: budget enforcement, deduplicating cache, trace.

Every unique fingerprint evaluation, from any search phase, counts against a
single shared budget. Repeated fingerprints are answered from the cache and
are free. The trace records cache misses only, in evaluation order, which is
what the sample-efficiency metrics are computed from.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .fingerprint import Fingerprint


class BudgetExhausted(Exception):
    """Control signal: the unique-evaluation budget is spent.

    Raised instead of returning a score; drivers catch it and finalize the
    run from the trace. Never indicates a programming error.
    """


class Oracle:
    """Deterministic scorer of fingerprints, with values in [0, 1].

    Subclasses set ``name`` and ``fp_length`` and implement ``evaluate``.
    ``thread_safe`` declares whether ``evaluate`` tolerates concurrent calls;
    BudgetedOracle serializes bookkeeping either way.
    """

    name: str = "oracle"
    fp_length: int = 0
    thread_safe: bool = True

    def evaluate(self, fp: Fingerprint) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class TraceEntry:
    call_index: int  # 1-based, no gaps
    fingerprint: Fingerprint
    score: float


class EvalTrace:
    """Ordered record of unique (cache-miss) evaluations."""

    def __init__(self) -> None:
        self._entries: list[TraceEntry] = []

    def append(self, fp: Fingerprint, score: float) -> TraceEntry:
        entry = TraceEntry(len(self._entries) + 1, fp, score)
        self._entries.append(entry)
        return entry

    @property
    def entries(self) -> list[TraceEntry]:
        return self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[TraceEntry]:
        return iter(self._entries)

    def __getitem__(self, idx):
        return self._entries[idx]


class BudgetedOracle:
    """Budget-enforcing, caching wrapper around a bare oracle.

    The cache, trace, and budget counter are updated inside one critical
    section, so the budget invariant holds exactly under concurrent callers.
    The inner evaluate runs inside the same section; external oracles are
    strictly request/response anyway and synthetic ones are cheap.
    """

    def __init__(self, inner: Oracle, budget: int = 10_000):
        if budget < 0:
            raise ValueError(f"budget must be >= 0, got {budget}")
        self.inner = inner
        self.budget = int(budget)
        self.trace = EvalTrace()
        self._cache: dict[Fingerprint, float] = {}
        self._lock = threading.Lock()
        self._cache_hits = 0
        self._total_calls = 0

    @property
    def fp_length(self) -> int:
        return self.inner.fp_length

    @property
    def name(self) -> str:
        return self.inner.name

    def evaluate(self, fp: Fingerprint) -> float:
        if fp.length != self.inner.fp_length:
            raise ValueError(
                f"fingerprint length {fp.length} does not match oracle "
                f"{self.inner.name!r} length {self.inner.fp_length}"
            )
        with self._lock:
            self._total_calls += 1
            cached = self._cache.get(fp)
            if cached is not None:
                self._cache_hits += 1
                return cached
            if len(self.trace) >= self.budget:
                self._total_calls -= 1  # the refused call is not an evaluation
                raise BudgetExhausted(
                    f"budget of {self.budget} unique evaluations exhausted"
                )
            score = float(self.inner.evaluate(fp))
            if not (0.0 <= score <= 1.0):
                raise ValueError(
                    f"oracle {self.inner.name!r} returned score {score!r} outside [0, 1]"
                )
            self._cache[fp] = score
            self.trace.append(fp, score)
            return score

    def remaining_budget(self) -> int:
        return self.budget - len(self.trace)

    @property
    def exhausted(self) -> bool:
        return self.remaining_budget() <= 0

    @property
    def cache_hits(self) -> int:
        return self._cache_hits

    @property
    def total_calls(self) -> int:
        """Number of evaluate() calls that returned a score (hits + misses)."""
        return self._total_calls


def write_trace_csv(trace: EvalTrace, path: str | Path, include_hex: bool = True) -> None:
    """Export the trace as CSV with header ``call_index,score,fingerprint_hex``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if include_hex:
            writer.writerow(["call_index", "score", "fingerprint_hex"])
            for entry in trace:
                writer.writerow([entry.call_index, repr(entry.score), entry.fingerprint.to_hex()])
        else:
            writer.writerow(["call_index", "score"])
            for entry in trace:
                writer.writerow([entry.call_index, repr(entry.score)])


def read_trace_csv(path: str | Path) -> EvalTrace:
    """Load a trace exported by write_trace_csv.

    Fingerprints are reconstructed from the hex column when present; without
    it the trace carries zero-length placeholders unsuitable for diversity.
    """
    path = Path(path)
    trace = EvalTrace()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["call_index", "score"]:
            raise ValueError(f"{path}: not a trace CSV (header {header!r})")
        has_hex = len(header) >= 3 and header[2] == "fingerprint_hex"
        for row in reader:
            if not row:
                continue
            idx, score = int(row[0]), float(row[1])
            if has_hex:
                fp = Fingerprint.from_hex(row[2], 4 * len(row[2]))
            else:
                fp = Fingerprint([0])
            entry = trace.append(fp, score)
            if entry.call_index != idx:
                raise ValueError(f"{path}: call_index gap at row {row!r}")
    return trace
