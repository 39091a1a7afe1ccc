"""Dataset-perspective introspection of model predictions.

Samples are grouped by prediction outcome: SAR-TP are the positives
whose signal the model demonstrably captured (TP'), SAR-FN are the
positives whose signal it missed (FN' plus FN).  Intersecting those
groups across runs gives AlwaysTP / AlwaysFN, the samples unaffected by
the intervention under study.  Groups are then compared as histograms
over a complexity metric: integer metrics get unit-width bins, real
valued ones Freedman-Diaconis bins, shared across all groups of one
comparison so per-bin deltas are meaningful.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from sigaware.errors import TestSetMismatch, UnknownMetric
from sigaware.metrics import METRIC_NAMES, ComplexityVector
from sigaware.saraudit import FN, FN_PRIME, SARReport, TP_PRIME

_INTEGER_METRICS = frozenset({"sloc", "ifs", "loops", "cyclomatic"})

EXCLUDED = "EXCLUDED"


@dataclass(slots=True)
class RunOutcome:
    label: str
    outcomes: dict[str, str]  # sample id -> TP' | FN' | FN | TN | FP | EXCLUDED

    def sar_tp(self) -> set[str]:
        return {sid for sid, o in self.outcomes.items() if o == TP_PRIME}

    def sar_fn(self) -> set[str]:
        return {sid for sid, o in self.outcomes.items() if o in (FN_PRIME, FN)}


def partition(report: SARReport, label: str = "") -> RunOutcome:
    """Per-sample outcomes of one audited run.

    TPs are reported through their refined outcome; budget-excluded TPs
    surface as EXCLUDED and belong to neither SAR group.
    """
    outcomes: dict[str, str] = {}
    for rec in report.records:
        if rec.sample_id in outcomes:
            raise TestSetMismatch(f"sample {rec.sample_id} appears twice in run {label!r}")
        if rec.base == "TP":
            outcomes[rec.sample_id] = EXCLUDED if rec.excluded else rec.refined
        else:
            outcomes[rec.sample_id] = rec.base
    return RunOutcome(label, outcomes)


def always_sets(runs: list[RunOutcome]) -> tuple[set[str], set[str]]:
    """(AlwaysTP, AlwaysFN): intersections of SAR-TP and SAR-FN across runs."""
    if not runs:
        raise ValueError("at least one run required")
    ids = set(runs[0].outcomes)
    for run in runs[1:]:
        if set(run.outcomes) != ids:
            raise TestSetMismatch(f"run {run.label!r} covers a different test set")
    always_tp = set.intersection(*(run.sar_tp() for run in runs))
    always_fn = set.intersection(*(run.sar_fn() for run in runs))
    return always_tp, always_fn


@dataclass(slots=True)
class Histogram:
    edges: list[float]  # len(counts) + 1, half-open bins, last bin right-closed
    counts: list[int]

    def total(self) -> int:
        return sum(self.counts)


def _unit_edges(values: list[float]) -> list[float]:
    lo = math.floor(min(values))
    hi = math.floor(max(values))
    return [float(v) for v in range(lo, hi + 2)]


def _fd_edges(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        return [lo, lo + 1.0]
    ordered = sorted(values)
    n = len(ordered)

    def quantile(q: float) -> float:
        pos = q * (n - 1)
        low = int(math.floor(pos))
        high = min(low + 1, n - 1)
        frac = pos - low
        return ordered[low] * (1 - frac) + ordered[high] * frac

    iqr = quantile(0.75) - quantile(0.25)
    width = 2.0 * iqr / (n ** (1.0 / 3.0)) if iqr > 0 else 0.0
    if width <= 0:
        width = (hi - lo) / 10.0
    bins = min(60, max(1, math.ceil((hi - lo) / width)))
    step = (hi - lo) / bins
    return [lo + i * step for i in range(bins)] + [hi]


def metric_edges(values: list[float], metric: str) -> list[float]:
    """Shared bin edges for one comparison population."""
    if not values:
        return [0.0, 1.0]
    if metric in _INTEGER_METRICS:
        return _unit_edges(values)
    return _fd_edges(values)


def distribution(
    group: set[str] | list[str],
    metric: str,
    metrics_by_id: dict[str, ComplexityVector],
    edges: list[float] | None = None,
) -> Histogram:
    """Histogram of a group's metric values; counts always sum to |group|.

    Values outside explicitly provided edges are clamped into the first
    or last bin so that conservation holds for any shared binning.
    """
    if metric not in METRIC_NAMES:
        raise UnknownMetric(f"unknown metric {metric!r}")
    values = [float(metrics_by_id[sid].get(metric)) for sid in group]
    if edges is None:
        edges = metric_edges(values, metric)
    counts = [0] * (len(edges) - 1)
    last = len(counts) - 1
    for v in values:
        if v <= edges[0]:
            b = 0
        elif v >= edges[-1]:
            b = last
        else:
            b = 0
            while b < last and v >= edges[b + 1]:
                b += 1
        counts[b] += 1
    return Histogram(list(edges), counts)


@dataclass(slots=True)
class IntrospectionReport:
    metric: str
    run_labels: list[str]
    edges: list[float]
    group_histograms: list[dict] = field(default_factory=list)  # {run, group, counts}
    always_tp: list[str] = field(default_factory=list)
    always_fn: list[str] = field(default_factory=list)
    skyline_delta: dict = field(default_factory=dict)  # group -> per-bin last-first
    summary: dict = field(default_factory=dict)
    statements: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "metric": self.metric,
            "runs": self.run_labels,
            "edges": self.edges,
            "histograms": self.group_histograms,
            "always_tp": self.always_tp,
            "always_fn": self.always_fn,
            "skyline_delta": self.skyline_delta,
            "summary": self.summary,
            "statements": self.statements,
        }


def compare(
    runs: list[RunOutcome],
    metric: str,
    metrics_by_id: dict[str, ComplexityVector],
) -> IntrospectionReport:
    """Side-by-side SAR-TP / SAR-FN distributions plus the Always groups.

    Pure function of its inputs: rerunning over the same reports yields
    an identical result.
    """
    if not runs:
        raise ValueError("at least one run required")
    always_tp, always_fn = always_sets(runs)

    population: set[str] = set()
    for run in runs:
        population |= run.sar_tp() | run.sar_fn()
    values = [float(metrics_by_id[sid].get(metric)) for sid in population]
    edges = metric_edges(values, metric)

    report = IntrospectionReport(metric=metric, run_labels=[r.label for r in runs], edges=edges)
    per_group: dict[tuple[str, str], Histogram] = {}
    for run in runs:
        for group_name, ids in (("SAR-TP", run.sar_tp()), ("SAR-FN", run.sar_fn())):
            hist = distribution(sorted(ids), metric, metrics_by_id, edges)
            per_group[(run.label, group_name)] = hist
            report.group_histograms.append(
                {"run": run.label, "group": group_name, "counts": hist.counts}
            )
    for group_name, ids in (("AlwaysTP", always_tp), ("AlwaysFN", always_fn)):
        hist = distribution(sorted(ids), metric, metrics_by_id, edges)
        per_group[("*", group_name)] = hist
        report.group_histograms.append({"run": "*", "group": group_name, "counts": hist.counts})

    report.always_tp = sorted(always_tp)
    report.always_fn = sorted(always_fn)

    first, last = runs[0].label, runs[-1].label
    for group_name in ("SAR-TP", "SAR-FN"):
        a = per_group[(first, group_name)].counts
        b = per_group[(last, group_name)].counts
        report.skyline_delta[group_name] = [y - x for x, y in zip(a, b)]

    top_bin_fn = {run.label: per_group[(run.label, "SAR-FN")].counts[-1] for run in runs}
    report.summary = {
        "top_bin_left_edge": edges[-2],
        "top_bin_sar_fn_counts": top_bin_fn,
        "always_tp_size": len(always_tp),
        "always_fn_size": len(always_fn),
        "always_tp_loop_fraction": _loop_fraction(always_tp, metrics_by_id),
        "always_fn_loop_fraction": _loop_fraction(always_fn, metrics_by_id),
    }
    for name, ids in (("AlwaysTP", always_tp), ("AlwaysFN", always_fn)):
        frac = _loop_fraction(ids, metrics_by_id)
        if frac is not None:
            report.statements.append(f"{100.0 * frac:.0f}% of {name} contain a loop")
    fn_first = per_group[(first, "SAR-FN")].counts[-1]
    fn_last = per_group[(last, "SAR-FN")].counts[-1]
    direction = "fell" if fn_last < fn_first else ("held" if fn_last == fn_first else "rose")
    report.statements.append(
        f"SAR-FN count at the top {metric} bin {direction} from {fn_first} ({first}) to {fn_last} ({last})"
    )
    return report


def _loop_fraction(ids: set[str], metrics_by_id) -> float | None:
    if not ids:
        return None
    return sum(1 for sid in ids if metrics_by_id[sid].loops > 0) / len(ids)


def write_report(report: IntrospectionReport, outdir: str | Path) -> None:
    """histograms.csv (run, group, metric, bin, count) plus summary.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "histograms.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "group", "metric", "bin", "count"])
        for entry in report.group_histograms:
            for edge, count in zip(report.edges, entry["counts"]):
                writer.writerow([entry["run"], entry["group"], report.metric, f"{edge:g}", count])
    (outdir / "summary.json").write_text(
        json.dumps(report.to_json(), sort_keys=True, indent=1), encoding="utf-8"
    )
