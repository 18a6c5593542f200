"""Performance-profile style aggregation of run records.

Per instance (graph, k, epsilon) the fastest time is divided by each
strategy's time; per strategy the ratios are sorted ascending. Runs that hit
the time limit get a time ratio of -1 so they sort below every finished run.
Cuts and times are aggregated over instances with the geometric mean.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .refine import RunRecord
from .solver import SolveStatus

TIMED_OUT_RATIO = -1.0
_TIMEOUT_STATUSES = {SolveStatus.FEASIBLE_TIME_LIMIT.value, SolveStatus.TIME_LIMIT_NO_SOLUTION.value}


def geometric_mean(values: Sequence[float]) -> float:
    """Geometric mean; 0 if any value is 0."""
    if not values:
        raise ValueError("geometric mean of an empty sequence")
    if any(v < 0 for v in values):
        raise ValueError("geometric mean needs non-negative values")
    if any(v == 0 for v in values):
        return 0.0
    return math.exp(math.fsum(math.log(v) for v in values) / len(values))


def _ratio(best: float, value: float) -> float:
    if value == 0:
        return 1.0 if best == 0 else math.inf
    return best / value


@dataclass
class PerformanceReport:
    time_ratios: dict[str, list[float]] = field(default_factory=dict)
    cut_ratios: dict[str, list[float]] = field(default_factory=dict)
    geomean_time: dict[str, float] = field(default_factory=dict)
    geomean_cut: dict[str, float] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["strategy", "metric", "rank", "value"])
        for strategy in sorted(self.time_ratios):
            for rank, value in enumerate(self.time_ratios[strategy]):
                writer.writerow([strategy, "time_ratio", rank, repr(value)])
            for rank, value in enumerate(self.cut_ratios[strategy]):
                writer.writerow([strategy, "cut_ratio", rank, repr(value)])
            writer.writerow([strategy, "geomean_time", 0, repr(self.geomean_time[strategy])])
            writer.writerow([strategy, "geomean_cut", 0, repr(self.geomean_cut[strategy])])
        return buf.getvalue()


def report_performance(records: Iterable[RunRecord]) -> PerformanceReport:
    """Aggregate records into sorted ratio series and geometric means.

    Repeated records of one (instance, strategy) cell are averaged; a cell
    counts as timed out if any of its runs hit the time limit.
    """
    cells: dict[tuple, dict[str, list[RunRecord]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        cells[(r.instance, r.k, r.eps)][r.strategy].append(r)

    time_ratios: dict[str, list[float]] = defaultdict(list)
    cut_ratios: dict[str, list[float]] = defaultdict(list)
    times: dict[str, list[float]] = defaultdict(list)
    cuts: dict[str, list[float]] = defaultdict(list)
    for per_strategy in cells.values():
        summary = {}
        for strategy, runs in per_strategy.items():
            summary[strategy] = (
                math.fsum(r.time_s for r in runs) / len(runs),
                math.fsum(r.output_cut for r in runs) / len(runs),
                any(r.status in _TIMEOUT_STATUSES for r in runs),
            )
        finished = [t for t, _, out in summary.values() if not out]
        t_best = min(finished) if finished else None
        cut_best = min(cut for _, cut, _ in summary.values())
        for strategy, (t, cut, out) in summary.items():
            time_ratios[strategy].append(TIMED_OUT_RATIO if out else _ratio(t_best, t))
            cut_ratios[strategy].append(_ratio(cut_best, cut))
            times[strategy].append(t)
            cuts[strategy].append(cut)
    return PerformanceReport(
        time_ratios={s: sorted(v) for s, v in time_ratios.items()},
        cut_ratios={s: sorted(v) for s, v in cut_ratios.items()},
        geomean_time={s: geometric_mean(v) for s, v in times.items()},
        geomean_cut={s: geometric_mean(v) for s, v in cuts.items()},
    )


# --------------------------------------------------------------- record I/O


def write_records_jsonl(records: Iterable[RunRecord], path: str | os.PathLike, append: bool = True) -> None:
    with open(path, "a" if append else "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def read_records_jsonl(path: str | os.PathLike) -> list[RunRecord]:
    with open(path, encoding="utf-8") as fh:
        return [RunRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


def records_to_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RunRecord.FIELDS)
    for r in records:
        d = r.to_dict()
        writer.writerow([d[name] for name in RunRecord.FIELDS])
    return buf.getvalue()
