"""Command-line front end.

Subcommands:

* ``run``   - evaluate sequence files in one mode, write CSV reports
* ``sweep`` - repeat the run over a grid of criticality / RCS thresholds
* ``synth`` - generate a synthetic sequence from a JSON scene spec

Every run writes a ``run_manifest.json`` snapshotting the full
configuration and inputs. Report CSVs are byte-identical across reruns
with the same manifest inputs, independent of ``--jobs``. Exit codes:
0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from .criticality import CriticalityParams
from .clustering import ClusterConfig
from .data_model import Label, SequenceFormatError, load_sequence, write_sequence
from .evaluation import (
    MODES,
    EvalSets,
    PipelineConfig,
    SequenceTrace,
    SweepRow,
    build_report,
    evaluate_sequence,
    write_report_csvs,
    write_sweep_csv,
)
from .filtering import FilterConfig
from .reachability import ReachabilityConfig
from .regions import RegionConfig
from .synth import generate, load_scene_spec


class UsageError(Exception):
    """Bad paths, config, or flag combinations; maps to exit code 2."""


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {exc}") from None


def _labels(text: str) -> frozenset[Label]:
    out = set()
    for part in text.split(","):
        name = part.strip().upper()
        if not name:
            continue
        try:
            out.add(Label[name])
        except KeyError:
            raise argparse.ArgumentTypeError(f"unknown label {part.strip()!r}") from None
    return frozenset(out)


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("criticality")
    g.add_argument("--v-max-domain", type=float, help="saturation speed of the velocity score (m/s)")
    g.add_argument("--vehicle-half-width", type=float, help="half vehicle width (m)")
    g.add_argument("--safety-margin", type=float, help="extra tube width (m)")
    g.add_argument("--insecurity-width", type=float, help="smooth decay zone width (m)")
    g.add_argument("--t-react", type=float, help="reaction time before braking (s)")
    g.add_argument("--a-brake", type=float, help="deceleration capability (m/s^2)")
    g.add_argument("--vehicle-length", type=float, help="behind-the-front tolerance (m)")

    g = parser.add_argument_group("filtering")
    g.add_argument("--x-max", type=float, help="longitudinal gate (m)")
    g.add_argument("--y-abs-max", type=float, help="lateral gate (m)")
    g.add_argument("--v-comp-min", type=float, help="static gate threshold (m/s)")
    g.add_argument("--v-dopp-max", type=float, help="doppler sanity bound (m/s)")
    g.add_argument(
        "--static-filter",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="enable the static-motion filter stage",
    )

    g = parser.add_argument_group("clustering")
    g.add_argument("--eps", type=float, help="DBSCAN neighborhood radius (m)")
    g.add_argument("--min-pts", type=int, help="DBSCAN core-point threshold")

    g = parser.add_argument_group("regions")
    g.add_argument("--radii", type=_floats, help="per-age region radii, comma separated (m)")
    g.add_argument("--t-life", type=int, help="region lifetime (cycles)")

    g = parser.add_argument_group("reachability")
    g.add_argument("--a-long-max", type=float, help="longitudinal acceleration limit (m/s^2)")
    g.add_argument("--a-lat-max", type=float, help="lateral acceleration limit (m/s^2)")
    g.add_argument("--r-min", type=float, help="minimum feasible arc radius (m)")
    g.add_argument("--reach-v-max-domain", type=float, help="speed cap of synthesized paths (m/s)")
    g.add_argument("--track-expand-radius", type=float, help="track companion radius (m)")
    g.add_argument("--vru-labels", type=_labels, help="comma-separated VRU label names")

    g = parser.add_argument_group("drive tube")
    g.add_argument("--horizon", type=float, help="look-ahead horizon (s)")
    g.add_argument("--dt", type=float, help="state spacing (s)")


#: argparse dest -> (PipelineConfig section, field). Sections named
#: "pipeline" live directly on PipelineConfig.
_FLAG_MAP = {
    "v_max_domain": ("criticality", "v_max_domain"),
    "vehicle_half_width": ("criticality", "vehicle_half_width"),
    "safety_margin": ("criticality", "safety_margin"),
    "insecurity_width": ("criticality", "insecurity_width"),
    "t_react": ("criticality", "t_react"),
    "a_brake": ("criticality", "a_brake"),
    "vehicle_length": ("criticality", "vehicle_length"),
    "crit_thresh": ("criticality", "crit_thresh"),
    "x_max": ("filters", "x_max"),
    "y_abs_max": ("filters", "y_abs_max"),
    "v_comp_min": ("filters", "v_comp_min"),
    "v_dopp_max": ("filters", "v_dopp_max"),
    "rcs_thresh": ("filters", "rcs_thresh"),
    "static_filter": ("filters", "static_filter_enabled"),
    "eps": ("clustering", "eps"),
    "min_pts": ("clustering", "min_pts"),
    "radii": ("regions", "radii"),
    "t_life": ("regions", "t_life"),
    "a_long_max": ("reachability", "a_long_max"),
    "a_lat_max": ("reachability", "a_lat_max"),
    "r_min": ("reachability", "r_min"),
    "reach_v_max_domain": ("reachability", "v_max_domain"),
    "track_expand_radius": ("reachability", "track_expand_radius"),
    "vru_labels": ("reachability", "vru_labels"),
    "horizon": ("pipeline", "horizon"),
    "dt": ("pipeline", "dt"),
}

_SECTION_TYPES = {
    "criticality": CriticalityParams,
    "filters": FilterConfig,
    "clustering": ClusterConfig,
    "regions": RegionConfig,
    "reachability": ReachabilityConfig,
}


def _load_config_file(path: Path) -> dict:
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        with path.open("rb") as fh:
            return tomllib.load(fh)
    with path.open(encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid config file {path}: {exc}") from None


def _coerce_section_value(section: str, key: str, value):
    if section == "regions" and key == "radii":
        return tuple(float(v) for v in value)
    if section == "reachability" and key == "vru_labels":
        if isinstance(value, frozenset):
            return value
        return frozenset(
            Label[str(v).upper()] if not isinstance(v, int) else Label(v) for v in value
        )
    return value


def _apply_sections(cfg: PipelineConfig, sections: dict) -> PipelineConfig:
    updates = {}
    for section, values in sections.items():
        if section == "pipeline":
            for key, value in values.items():
                if key not in ("horizon", "dt"):
                    raise UsageError(f"unknown pipeline option {key!r}")
                updates[key] = float(value)
            continue
        if section not in _SECTION_TYPES:
            raise UsageError(f"unknown config section {section!r}")
        current = getattr(cfg, section)
        valid = {f.name for f in dataclasses.fields(current)}
        section_updates = {}
        for key, value in values.items():
            if key not in valid:
                raise UsageError(f"unknown option {key!r} in section {section!r}")
            try:
                section_updates[key] = _coerce_section_value(section, key, value)
            except (TypeError, ValueError, KeyError) as exc:
                raise UsageError(f"invalid value for {section}.{key}: {exc}") from None
        try:
            updates[section] = replace(current, **section_updates)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"invalid {section} config: {exc}") from None
    try:
        return replace(cfg, **updates)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from None


def build_config(args: argparse.Namespace, skip: tuple[str, ...] = ()) -> PipelineConfig:
    """Defaults, then the --config file, then explicit flags."""
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = _apply_sections(cfg, _load_config_file(Path(args.config)))
    sections: dict[str, dict] = {}
    for dest, (section, key) in _FLAG_MAP.items():
        if dest in skip or not hasattr(args, dest):
            continue
        value = getattr(args, dest)
        if value is None:
            continue
        if dest == "radii":
            value = tuple(value)
        sections.setdefault(section, {})[key] = value
    return _apply_sections(cfg, sections)


def collect_sequence_paths(inputs: list[str]) -> list[Path]:
    """Expand files and directories into a stable list of sequence files."""
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            found = sorted(p.glob("*.jsonl"))
            if not found:
                raise UsageError(f"no .jsonl sequence files in directory: {p}")
            paths.extend(found)
        elif p.is_file():
            paths.append(p)
        else:
            raise UsageError(f"sequence path does not exist: {p}")
    return sorted(paths, key=lambda p: (p.stem, str(p)))


def config_snapshot(cfg: PipelineConfig) -> dict:
    """JSON-friendly nested dict of every parameter."""

    def convert(value):
        if isinstance(value, Label):
            return value.name.lower()
        if isinstance(value, frozenset):
            return sorted(convert(v) for v in value)
        if isinstance(value, tuple):
            return [convert(v) for v in value]
        if dataclasses.is_dataclass(value):
            return {f.name: convert(getattr(value, f.name)) for f in dataclasses.fields(value)}
        return value

    return convert(cfg)


def _write_manifest(
    out_dir: Path,
    command: str,
    mode: str,
    inputs: list[Path],
    cfg: PipelineConfig,
    jobs: int,
    extra: dict,
    wall_seconds: float,
) -> Path:
    manifest = {
        "tool": "saferad",
        "version": __version__,
        "command": command,
        "mode": mode,
        "inputs": [str(p.resolve()) for p in inputs],
        "out_dir": str(out_dir.resolve()),
        "jobs": jobs,
        "config": config_snapshot(cfg),
        "wall_seconds": round(wall_seconds, 3),
    }
    manifest.update(extra)
    path = out_dir / "run_manifest.json"
    with path.open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolve_jobs(value: int | None) -> int:
    if value is None:
        env = os.environ.get("SAFERAD_JOBS")
        value = int(env) if env else 1
    if value < 1:
        raise UsageError("--jobs must be at least 1")
    return value


def _eval_path(payload: tuple[str, PipelineConfig, str, bool]) -> tuple[EvalSets, SequenceTrace | None]:
    path, cfg, mode, want_trace = payload
    seq = load_sequence(path)
    trace = SequenceTrace(sequence_id=seq.id) if want_trace else None
    sets = evaluate_sequence(seq, cfg, mode, trace)
    return sets, trace


def _evaluate_paths(
    paths: list[Path], cfg: PipelineConfig, mode: str, jobs: int, want_trace: bool
) -> list[tuple[EvalSets, SequenceTrace | None]]:
    payloads = [(str(p), cfg, mode, want_trace) for p in paths]
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_eval_path, payloads))
    else:
        results = [_eval_path(p) for p in payloads]
    results.sort(key=lambda item: item[0].sequence_id)
    return results


def _write_traces(out_dir: Path, traces: list[SequenceTrace], args: argparse.Namespace) -> None:
    if args.audit:
        with (out_dir / "removed_points.jsonl").open("w", encoding="utf-8") as fh:
            for trace in traces:
                for scan_index, pid, reason in trace.removals:
                    fh.write(
                        json.dumps(
                            {
                                "sequence": trace.sequence_id,
                                "scan": scan_index,
                                "id": list(pid),
                                "reason": reason,
                            },
                            separators=(",", ":"),
                        )
                        + "\n"
                    )
    if args.region_trace:
        with (out_dir / "region_trace.jsonl").open("w", encoding="utf-8") as fh:
            for trace in traces:
                for scan_index, kind, cx, cy, age in trace.region_events:
                    fh.write(
                        json.dumps(
                            {
                                "sequence": trace.sequence_id,
                                "scan": scan_index,
                                "event": kind,
                                "center": [cx, cy],
                                "age": age,
                            },
                            separators=(",", ":"),
                        )
                        + "\n"
                    )
    if args.export_trajectories:
        with (out_dir / "trajectories.jsonl").open("w", encoding="utf-8") as fh:
            for trace in traces:
                for scan_index, states in trace.trajectories:
                    fh.write(
                        json.dumps(
                            {
                                "sequence": trace.sequence_id,
                                "scan": scan_index,
                                "states": [list(s) for s in states],
                            },
                            separators=(",", ":"),
                        )
                        + "\n"
                    )


def cmd_run(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = build_config(args)
    paths = collect_sequence_paths(args.sequences)
    jobs = _resolve_jobs(args.jobs)
    want_trace = args.audit or args.region_trace or args.export_trajectories

    results = _evaluate_paths(paths, cfg, args.mode, jobs, want_trace)
    report = build_report(args.mode, [sets for sets, _ in results])

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report_csvs(report, out_dir)
    if want_trace:
        _write_traces(out_dir, [t for _, t in results if t is not None], args)
    _write_manifest(
        out_dir,
        "run",
        args.mode,
        paths,
        cfg,
        jobs,
        {"n_sequences": len(paths)},
        time.monotonic() - started,
    )
    agg = report.aggregate_with_truth
    recall = "n/a" if agg.recall is None else f"{agg.recall:.4f}"
    print(
        f"run complete: {len(paths)} sequence(s), mode={args.mode}, "
        f"recall={recall}, reports in {out_dir}"
    )
    return 0


def _sweep_cell(payload) -> SweepRow:
    sequences, cfg, mode, crit_t, rcs_t = payload
    cell_cfg = replace(
        cfg,
        criticality=replace(cfg.criticality, crit_thresh=crit_t),
        filters=replace(cfg.filters, rcs_thresh=rcs_t),
    )
    all_sets = [evaluate_sequence(s, cell_cfg, mode) for s in sequences]
    report = build_report(mode, all_sets)
    return SweepRow(crit_thresh=crit_t, rcs_thresh=rcs_t, counts=report.aggregate_with_truth)


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = build_config(args, skip=("crit_thresh", "rcs_thresh"))
    paths = collect_sequence_paths(args.sequences)
    jobs = _resolve_jobs(args.jobs)

    crits = args.crit_thresh or [cfg.criticality.crit_thresh]
    rcss = args.rcs_thresh or [cfg.filters.rcs_thresh]
    if not crits or not rcss:
        raise UsageError("sweep requires at least one threshold value")

    sequences = [load_sequence(p) for p in paths]
    sequences.sort(key=lambda s: s.id)
    payloads = [(sequences, cfg, args.mode, ct, rt) for ct in crits for rt in rcss]
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, payloads))
    else:
        rows = [_sweep_cell(p) for p in payloads]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out_dir)
    _write_manifest(
        out_dir,
        "sweep",
        args.mode,
        paths,
        cfg,
        jobs,
        {
            "n_sequences": len(paths),
            "crit_thresholds": crits,
            "rcs_thresholds": rcss,
        },
        time.monotonic() - started,
    )
    print(f"sweep complete: {len(rows)} configuration(s), results in {out_dir / 'sweep.csv'}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        raise UsageError(f"scene spec not found: {spec_path}")
    try:
        spec = load_scene_spec(spec_path)
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid scene spec {spec_path}: {exc}") from None
    seq = generate(spec)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    write_sequence(seq, out)
    n_points = sum(len(s.points) for s in seq.scans)
    print(f"wrote {out}: {len(seq.scans)} scan(s), {n_points} point(s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saferad",
        description="Criticality-aware radar point-cloud filtering and evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="evaluate sequences and write CSV reports")
    run_p.add_argument("sequences", nargs="+", help="sequence .jsonl files or directories")
    run_p.add_argument("--mode", choices=MODES, default="baseline")
    run_p.add_argument("--out", default="saferad_out", help="output directory")
    run_p.add_argument("--config", help="JSON or TOML config file")
    run_p.add_argument("--jobs", type=int, default=None, help="parallel workers (env SAFERAD_JOBS)")
    run_p.add_argument("--crit-thresh", type=float, help="criticality classification threshold")
    run_p.add_argument("--rcs-thresh", type=float, help="RCS filter threshold (dBm^2)")
    run_p.add_argument("--audit", action="store_true", help="write removed_points.jsonl")
    run_p.add_argument("--region-trace", action="store_true", help="write region_trace.jsonl")
    run_p.add_argument(
        "--export-trajectories", action="store_true", help="write trajectories.jsonl"
    )
    _add_pipeline_flags(run_p)
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a grid of thresholds")
    sweep_p.add_argument("sequences", nargs="+", help="sequence .jsonl files or directories")
    sweep_p.add_argument("--mode", choices=MODES, default="baseline")
    sweep_p.add_argument("--out", default="saferad_out", help="output directory")
    sweep_p.add_argument("--config", help="JSON or TOML config file")
    sweep_p.add_argument("--jobs", type=int, default=None, help="parallel workers (env SAFERAD_JOBS)")
    sweep_p.add_argument(
        "--crit-thresh", type=_floats, help="comma-separated criticality thresholds"
    )
    sweep_p.add_argument("--rcs-thresh", type=_floats, help="comma-separated RCS thresholds")
    _add_pipeline_flags(sweep_p)
    sweep_p.set_defaults(func=cmd_sweep)

    synth_p = sub.add_parser("synth", help="generate a synthetic sequence")
    synth_p.add_argument("spec", help="scene spec JSON file")
    synth_p.add_argument("--out", required=True, help="output .jsonl path")
    synth_p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SequenceFormatError as exc:
        print(f"error: malformed sequence file: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
