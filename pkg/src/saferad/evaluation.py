"""Experiment harness: set bookkeeping, metrics, sweeps, CSV reports.

For every scan four point-id sets are tracked:

* ``scored``    (A): points classified critical on the unfiltered cloud;
* ``truth``     (B): ground-truth critical points from the reachability
  synthesis (the target plus its nearby track companions);
* ``kept``      (F): survivors of the conventional filter cascade;
* ``clustered`` (C): points that ended up inside a cluster, C is a
  subset of F.

Three pipeline modes exist. ``baseline`` runs the plain cascade.
``posteriori`` additionally spawns criticality regions from the scored
set and exempts region members from the RCS criterion in later scans.
``velocity_metric`` swaps the drive-tube scorer for the doppler-ramp
scorer while keeping the region machinery.

Aggregation micro-averages: raw set cardinalities are summed across
sequences, and sequences without any ground-truth point are excluded
from truth-dependent metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable

from .clustering import ClusterConfig, clustered_ids, dbscan
from .criticality import (
    CriticalityParams,
    classify_critical,
    score_scan,
    velocity_based_criticality,
)
from .data_model import PointId, Scan, Sequence
from .filtering import FilterConfig, apply_filter
from .reachability import ReachabilityConfig, build_set_b, synthesize_critical_trajectory
from .regions import RegionConfig, RegionStore
from .trajectory import propagate_ego_tube

MODES = ("baseline", "posteriori", "velocity_metric")


@dataclass(frozen=True)
class PipelineConfig:
    """All tunables of one experiment run."""

    criticality: CriticalityParams = CriticalityParams()
    filters: FilterConfig = FilterConfig()
    clustering: ClusterConfig = ClusterConfig()
    regions: RegionConfig = RegionConfig()
    reachability: ReachabilityConfig = ReachabilityConfig()
    horizon: float = 3.0  # s, drive-tube look-ahead
    dt: float = 0.2       # s, state spacing

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.horizon < self.dt:
            raise ValueError("horizon and dt must satisfy horizon >= dt > 0")


@dataclass
class ScanSets:
    """Point-id sets of one scan."""

    index: int
    t: float
    n_points: int
    scored: set[PointId]
    truth: set[PointId]
    kept: set[PointId]
    clustered: set[PointId]
    modified: bool  # a synthesized critical trajectory replaced the ego tube


@dataclass
class EvalSets:
    """Per-scan sets of one sequence, with whole-sequence unions."""

    sequence_id: str
    scans: list[ScanSets] = field(default_factory=list)

    def _union(self, name: str) -> set[PointId]:
        out: set[PointId] = set()
        for s in self.scans:
            out |= getattr(s, name)
        return out

    @property
    def scored(self) -> set[PointId]:
        return self._union("scored")

    @property
    def truth(self) -> set[PointId]:
        return self._union("truth")

    @property
    def kept(self) -> set[PointId]:
        return self._union("kept")

    @property
    def clustered(self) -> set[PointId]:
        return self._union("clustered")


@dataclass(frozen=True)
class MetricCounts:
    """Raw cardinalities; addition is field-wise so reduction is associative."""

    n_scans: int = 0
    n_points: int = 0
    n_scored: int = 0                 # |A|
    n_truth: int = 0                  # |B|
    n_kept: int = 0                   # |F|
    n_clustered: int = 0              # |C|
    n_scored_truth: int = 0           # |A n B|
    n_scored_not_truth: int = 0       # |A \ B|, scoring false positives
    n_truth_not_scored: int = 0       # |B \ A|, scoring misses
    n_truth_clustered: int = 0        # |B n C|, correctly treated
    n_truth_removed: int = 0          # |B \ F|, lost to the filter
    n_truth_unclustered: int = 0      # |B \ C|, treatment false negatives
    n_truth_kept_unclustered: int = 0  # |B n F \ C|, survived but not clustered
    n_modified: int = 0               # scans with a synthesized trajectory

    def __add__(self, other: "MetricCounts") -> "MetricCounts":
        return MetricCounts(
            **{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)}
        )

    @property
    def recall(self) -> float | None:
        return None if self.n_truth == 0 else self.n_scored_truth / self.n_truth

    @property
    def precision(self) -> float | None:
        return None if self.n_scored == 0 else self.n_scored_truth / self.n_scored

    @property
    def f1(self) -> float | None:
        r, p = self.recall, self.precision
        if r is None or p is None:
            return None
        if r + p == 0.0:
            return 0.0
        return 2.0 * r * p / (r + p)

    @property
    def filter_rate(self) -> float | None:
        return None if self.n_points == 0 else self.n_kept / self.n_points


def counts_for_sequence(sets: EvalSets) -> MetricCounts:
    """Micro counts of one sequence, summed over its scans."""
    total = MetricCounts()
    for s in sets.scans:
        total = total + MetricCounts(
            n_scans=1,
            n_points=s.n_points,
            n_scored=len(s.scored),
            n_truth=len(s.truth),
            n_kept=len(s.kept),
            n_clustered=len(s.clustered),
            n_scored_truth=len(s.scored & s.truth),
            n_scored_not_truth=len(s.scored - s.truth),
            n_truth_not_scored=len(s.truth - s.scored),
            n_truth_clustered=len(s.truth & s.clustered),
            n_truth_removed=len(s.truth - s.kept),
            n_truth_unclustered=len(s.truth - s.clustered),
            n_truth_kept_unclustered=len((s.truth & s.kept) - s.clustered),
            n_modified=1 if s.modified else 0,
        )
    return total


@dataclass
class SequenceTrace:
    """Optional per-sequence artifacts for audit files."""

    sequence_id: str
    removals: list[tuple[int, PointId, str]] = field(default_factory=list)
    region_events: list[tuple[int, str, float, float, int]] = field(default_factory=list)
    trajectories: list[tuple[int, list[tuple[float, ...]]]] = field(default_factory=list)


def evaluate_scan_sets(
    scan: Scan,
    cfg: PipelineConfig,
    mode: str,
    store: RegionStore | None,
    index: int,
):
    """Run the pipeline on one scan.

    Returns ``(sets, filter_result, critical_trajectory)`` so callers can
    audit removals and export synthesized plans.
    """
    exempt = store.exempt_ids(scan) if store is not None else set()

    ct = synthesize_critical_trajectory(scan, cfg.reachability, cfg.horizon, cfg.dt)
    truth = build_set_b(scan, ct, cfg.reachability) if ct is not None else set()

    if mode == "velocity_metric":
        scores: dict[PointId, float] = {
            p.id: velocity_based_criticality(p, scan.ego) for p in scan.points
        }
    else:
        traj = ct.trajectory if ct is not None else propagate_ego_tube(
            scan.ego, cfg.horizon, cfg.dt
        )
        scores = score_scan(scan.points, traj, cfg.criticality)
    scored = classify_critical(scores, cfg.criticality)

    fr = apply_filter(scan, cfg.filters, exempt)
    clusters, _ = dbscan(fr.survivors, cfg.clustering)

    if store is not None:
        by_id = {p.id: p for p in scan.points}
        store.spawn(by_id[pid] for pid in sorted(scored))

    sets = ScanSets(
        index=index,
        t=scan.t,
        n_points=len(scan.points),
        scored=scored,
        truth=truth,
        kept={p.id for p in fr.survivors},
        clustered=clustered_ids(clusters),
        modified=ct is not None,
    )
    return sets, fr, ct


def evaluate_sequence(
    seq: Sequence,
    cfg: PipelineConfig,
    mode: str = "baseline",
    trace: SequenceTrace | None = None,
) -> EvalSets:
    """Run the full pipeline over one sequence."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    current_scan = {"index": 0}
    store: RegionStore | None = None
    if mode in ("posteriori", "velocity_metric"):
        on_event = None
        if trace is not None:

            def on_event(kind: str, region) -> None:
                trace.region_events.append(
                    (current_scan["index"], kind, region.center[0], region.center[1], region.age)
                )

        store = RegionStore(cfg.regions, on_event=on_event)

    out = EvalSets(sequence_id=seq.id)
    prev_ego = None
    for index, scan in enumerate(seq.scans):
        current_scan["index"] = index
        if store is not None and prev_ego is not None:
            store.advance(prev_ego, scan.ego)
        sets, fr, ct = evaluate_scan_sets(scan, cfg, mode, store, index)
        if trace is not None:
            for pid, reason in fr.reasons.items():
                trace.removals.append((index, pid, reason.value))
            if ct is not None:
                trace.trajectories.append(
                    (
                        index,
                        [(s.x, s.y, s.v, s.a, s.psi, s.alpha) for s in ct.trajectory.states],
                    )
                )
        out.scans.append(sets)
        prev_ego = scan.ego
    return out


@dataclass
class EvalReport:
    """Results of one experiment over a set of sequences."""

    mode: str
    sequences: list[EvalSets]
    per_sequence: list[tuple[str, MetricCounts]]
    aggregate_all: MetricCounts
    aggregate_with_truth: MetricCounts  # only sequences that have ground truth


def build_report(mode: str, all_sets: list[EvalSets]) -> EvalReport:
    """Micro-aggregate per-sequence counts into a report."""
    per_sequence = [(s.sequence_id, counts_for_sequence(s)) for s in all_sets]
    agg_all = MetricCounts()
    agg_truth = MetricCounts()
    for _, counts in per_sequence:
        agg_all = agg_all + counts
        if counts.n_truth > 0:
            agg_truth = agg_truth + counts
    return EvalReport(
        mode=mode,
        sequences=all_sets,
        per_sequence=per_sequence,
        aggregate_all=agg_all,
        aggregate_with_truth=agg_truth,
    )


def run_experiment(
    sequences: Iterable[Sequence], cfg: PipelineConfig, mode: str = "baseline"
) -> EvalReport:
    """Evaluate sequences (sorted by id) and micro-aggregate the counts."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    all_sets = [evaluate_sequence(s, cfg, mode) for s in sorted(sequences, key=lambda s: s.id)]
    return build_report(mode, all_sets)


@dataclass(frozen=True)
class SweepRow:
    crit_thresh: float
    rcs_thresh: float
    counts: MetricCounts


def run_threshold_sweep(
    sequences: list[Sequence],
    cfg: PipelineConfig,
    mode: str,
    crit_thresholds: Iterable[float] | None = None,
    rcs_thresholds: Iterable[float] | None = None,
) -> list[SweepRow]:
    """One experiment per (crit_thresh, rcs_thresh) grid cell.

    Metrics come from the truth-bearing aggregate, matching the single-run
    report. An empty grid is a configuration error.
    """
    crits = [cfg.criticality.crit_thresh] if crit_thresholds is None else list(crit_thresholds)
    rcss = [cfg.filters.rcs_thresh] if rcs_thresholds is None else list(rcs_thresholds)
    if not crits or not rcss:
        raise ValueError("sweep requires at least one threshold value")
    rows = []
    for ct in crits:
        for rt in rcss:
            cell_cfg = replace(
                cfg,
                criticality=replace(cfg.criticality, crit_thresh=ct),
                filters=replace(cfg.filters, rcs_thresh=rt),
            )
            report = run_experiment(sequences, cell_cfg, mode)
            rows.append(SweepRow(crit_thresh=ct, rcs_thresh=rt, counts=report.aggregate_with_truth))
    return rows


# ---------------------------------------------------------------------------
# CSV emission

def _cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "n/a"
        return format(value, ".9g")
    return str(value)


_COUNT_COLUMNS = [f.name for f in fields(MetricCounts)]
_METRIC_COLUMNS = ["filter_rate", "recall", "precision", "f1"]


def _counts_row(counts: MetricCounts) -> list[str]:
    row = [_cell(getattr(counts, name)) for name in _COUNT_COLUMNS]
    row += [_cell(getattr(counts, name)) for name in _METRIC_COLUMNS]
    return row


def write_report_csvs(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    """Write per_scan.csv, per_sequence.csv, and aggregate.csv.

    Every fraction in the reports can be recomputed from the per-scan
    counts alone; the CSVs are a pure function of the collected sets.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    per_scan = out / "per_scan.csv"
    with per_scan.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "sequence_id,scan_index,t,modified,n_points,n_scored,n_truth,n_kept,"
            "n_clustered,n_scored_truth,n_truth_clustered,n_truth_removed,"
            "n_truth_unclustered,n_truth_kept_unclustered\n"
        )
        for sets in report.sequences:
            for s in sets.scans:
                fh.write(
                    ",".join(
                        [
                            sets.sequence_id,
                            str(s.index),
                            _cell(float(s.t)),
                            _cell(s.modified),
                            str(s.n_points),
                            str(len(s.scored)),
                            str(len(s.truth)),
                            str(len(s.kept)),
                            str(len(s.clustered)),
                            str(len(s.scored & s.truth)),
                            str(len(s.truth & s.clustered)),
                            str(len(s.truth - s.kept)),
                            str(len(s.truth - s.clustered)),
                            str(len((s.truth & s.kept) - s.clustered)),
                        ]
                    )
                    + "\n"
                )
    paths["per_scan"] = per_scan

    per_sequence = out / "per_sequence.csv"
    with per_sequence.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("sequence_id," + ",".join(_COUNT_COLUMNS + _METRIC_COLUMNS) + "\n")
        for seq_id, counts in report.per_sequence:
            fh.write(",".join([seq_id] + _counts_row(counts)) + "\n")
    paths["per_sequence"] = per_sequence

    aggregate = out / "aggregate.csv"
    with aggregate.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("scope," + ",".join(_COUNT_COLUMNS + _METRIC_COLUMNS) + "\n")
        fh.write(",".join(["all"] + _counts_row(report.aggregate_all)) + "\n")
        fh.write(",".join(["with_truth"] + _counts_row(report.aggregate_with_truth)) + "\n")
    paths["aggregate"] = aggregate
    return paths


def write_sweep_csv(rows: list[SweepRow], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("crit_thresh,rcs_thresh," + ",".join(_COUNT_COLUMNS + _METRIC_COLUMNS) + "\n")
        for row in rows:
            fh.write(
                ",".join([_cell(row.crit_thresh), _cell(row.rcs_thresh)] + _counts_row(row.counts))
                + "\n"
            )
    return path
