"""Core domain types, the sequence interchange format, and frame utilities.

A recording is stored as UTF-8 JSON Lines with two record types:

    {"type":"ego","t":...,"x":...,"y":...,"yaw":...,"v":...,"yaw_rate":...}
    {"type":"pt","t":...,"sensor":...,"x":...,"y":...,"v_dopp":...,
     "rcs":...,"label":...,"track":...,"phi":...}

Each ``ego`` line opens a new scan; the ``pt`` lines that follow belong to
it. Point positions are in the vehicle frame of that scan (x forward, y
left, meters). ``track`` is a string entity id or null. ``label`` is an
integer from :class:`Label`. Floats are written with 9 significant digits,
so writing a loaded file reproduces it byte for byte.

Point ids are not part of the wire format; the loader assigns
``(scan_index, row_index)`` pairs, which stay stable for set bookkeeping
across a sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable

PointId = tuple[int, int]


class Label(IntEnum):
    """Semantic class of a radar detection."""

    CAR = 0
    TRUCK = 1
    BICYCLE = 2
    PEDESTRIAN = 3
    PEDESTRIAN_GROUP = 4
    STATIC = 5
    OTHER = 6


#: Classes counted as vulnerable road users.
VRU_LABELS = frozenset({Label.BICYCLE, Label.PEDESTRIAN, Label.PEDESTRIAN_GROUP})


@dataclass(frozen=True)
class RadarPoint:
    """One radar detection in the vehicle frame of its scan."""

    id: PointId
    t: float             # s
    sensor_id: int
    x: float             # m, forward positive
    y: float             # m, left positive
    v_dopp: float        # m/s, radial doppler, away from sensor positive
    rcs: float           # dBm^2
    label: Label
    track_id: str | None
    phi: float           # rad, angle between sensor normal and point


@dataclass(frozen=True)
class EgoState:
    """Vehicle pose and motion in the world frame at one scan."""

    t: float             # s
    x: float             # m
    y: float             # m
    yaw: float           # rad
    v: float             # m/s, >= 0
    yaw_rate: float      # rad/s


@dataclass(frozen=True)
class TrajectoryState:
    """One discrete state of a planned path, in the vehicle frame."""

    x: float             # m
    y: float             # m
    v: float             # m/s, planned speed
    a: float             # m/s^2, planned acceleration
    psi: float           # rad, steering angle
    alpha: float         # rad, yaw angle relative to the current heading


@dataclass(frozen=True)
class Trajectory:
    """Planned path as an ordered polyline of states, dt apart in time."""

    states: tuple[TrajectoryState, ...]
    dt: float = 0.2      # s between consecutive states
    horizon: float = 3.0  # s

    @property
    def n_states(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Scan:
    """One merged point cloud with the ego state it was measured from."""

    t: float
    points: tuple[RadarPoint, ...]
    ego: EgoState


@dataclass(frozen=True)
class Sequence:
    """A time-ordered series of scans from one recording."""

    id: str
    scans: tuple[Scan, ...]
    cycle_period: float = 0.091  # s


class SequenceFormatError(ValueError):
    """Raised for malformed or inconsistent sequence files."""


def compensate_doppler(p: RadarPoint, ego: EgoState) -> float:
    """Doppler velocity of ``p`` with the ego motion removed.

    Subtracts the projection of the vehicle speed onto the line of sight,
    so points on static objects come out near zero.
    """
    return p.v_dopp - ego.v * math.cos(p.phi)


def vehicle_to_world(ego: EgoState, xy: tuple[float, float]) -> tuple[float, float]:
    """Map a vehicle-frame position into the world frame of ``ego``."""
    c, s = math.cos(ego.yaw), math.sin(ego.yaw)
    x, y = xy
    return (ego.x + c * x - s * y, ego.y + s * x + c * y)


def world_to_vehicle(ego: EgoState, xy: tuple[float, float]) -> tuple[float, float]:
    """Map a world-frame position into the vehicle frame of ``ego``."""
    c, s = math.cos(ego.yaw), math.sin(ego.yaw)
    dx, dy = xy[0] - ego.x, xy[1] - ego.y
    return (c * dx + s * dy, -s * dx + c * dy)


def retarget_frame(
    xy: tuple[float, float], ego_from: EgoState, ego_to: EgoState
) -> tuple[float, float]:
    """Re-express a vehicle-frame position in the frame of a later pose."""
    return world_to_vehicle(ego_to, vehicle_to_world(ego_from, xy))


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _require_finite(value: float, what: str, lineno: int) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise SequenceFormatError(f"line {lineno}: non-finite {what}: {value!r}")
    return v


def _field(rec: dict, key: str, lineno: int):
    try:
        return rec[key]
    except KeyError:
        raise SequenceFormatError(f"line {lineno}: missing field {key!r}") from None


def load_sequence(
    path: str | Path,
    *,
    sequence_id: str | None = None,
    cycle_period: float = 0.091,
) -> Sequence:
    """Read a sequence JSONL file, validating structure and ordering.

    Raises :class:`SequenceFormatError` with the offending line number for
    malformed records, points before the first ego line, out-of-order
    timestamps, or out-of-range values.
    """
    if cycle_period <= 0:
        raise ValueError("cycle_period must be strictly positive")
    path = Path(path)
    scans: list[Scan] = []
    ego: EgoState | None = None
    rows: list[RadarPoint] = []

    def flush() -> None:
        nonlocal ego, rows
        if ego is not None:
            scans.append(Scan(t=ego.t, points=tuple(rows), ego=ego))
        ego = None
        rows = []

    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SequenceFormatError(f"line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(rec, dict):
                raise SequenceFormatError(f"line {lineno}: record is not an object")
            kind = rec.get("type")
            if kind == "ego":
                flush()
                t = _require_finite(_field(rec, "t", lineno), "t", lineno)
                if scans and t <= scans[-1].t:
                    raise SequenceFormatError(
                        f"line {lineno}: ego timestamps must strictly increase "
                        f"({t} after {scans[-1].t})"
                    )
                v = _require_finite(_field(rec, "v", lineno), "v", lineno)
                if v < 0:
                    raise SequenceFormatError(f"line {lineno}: negative ego speed {v}")
                ego = EgoState(
                    t=t,
                    x=_require_finite(_field(rec, "x", lineno), "x", lineno),
                    y=_require_finite(_field(rec, "y", lineno), "y", lineno),
                    yaw=_require_finite(_field(rec, "yaw", lineno), "yaw", lineno),
                    v=v,
                    yaw_rate=_require_finite(_field(rec, "yaw_rate", lineno), "yaw_rate", lineno),
                )
            elif kind == "pt":
                if ego is None:
                    raise SequenceFormatError(f"line {lineno}: point before any ego line")
                t = _require_finite(_field(rec, "t", lineno), "t", lineno)
                if abs(t - ego.t) > cycle_period:
                    raise SequenceFormatError(
                        f"line {lineno}: point time {t} outside the cycle window of "
                        f"scan at {ego.t}"
                    )
                if rows and t < rows[-1].t:
                    raise SequenceFormatError(
                        f"line {lineno}: point timestamps decrease within a scan"
                    )
                phi = _require_finite(_field(rec, "phi", lineno), "phi", lineno)
                if not -math.pi <= phi <= math.pi:
                    raise SequenceFormatError(f"line {lineno}: phi {phi} outside [-pi, pi]")
                label_raw = _field(rec, "label", lineno)
                try:
                    label = Label(label_raw)
                except ValueError:
                    raise SequenceFormatError(
                        f"line {lineno}: unknown label {label_raw!r}"
                    ) from None
                track = _field(rec, "track", lineno)
                if track is not None and not isinstance(track, str):
                    raise SequenceFormatError(f"line {lineno}: track must be string or null")
                try:
                    sensor = int(_field(rec, "sensor", lineno))
                except (TypeError, ValueError):
                    raise SequenceFormatError(f"line {lineno}: sensor must be an integer") from None
                rows.append(
                    RadarPoint(
                        id=(len(scans), len(rows)),
                        t=t,
                        sensor_id=sensor,
                        x=_require_finite(_field(rec, "x", lineno), "x", lineno),
                        y=_require_finite(_field(rec, "y", lineno), "y", lineno),
                        v_dopp=_require_finite(_field(rec, "v_dopp", lineno), "v_dopp", lineno),
                        rcs=_require_finite(_field(rec, "rcs", lineno), "rcs", lineno),
                        label=label,
                        track_id=track,
                        phi=phi,
                    )
                )
            else:
                raise SequenceFormatError(f"line {lineno}: unknown record type {kind!r}")
    flush()
    return Sequence(
        id=sequence_id if sequence_id is not None else path.stem,
        scans=tuple(scans),
        cycle_period=cycle_period,
    )


def _ego_line(ego: EgoState) -> str:
    return (
        '{"type":"ego"'
        f',"t":{_fmt(ego.t)},"x":{_fmt(ego.x)},"y":{_fmt(ego.y)}'
        f',"yaw":{_fmt(ego.yaw)},"v":{_fmt(ego.v)},"yaw_rate":{_fmt(ego.yaw_rate)}}}'
    )


def _point_line(p: RadarPoint) -> str:
    return (
        '{"type":"pt"'
        f',"t":{_fmt(p.t)},"sensor":{int(p.sensor_id)},"x":{_fmt(p.x)},"y":{_fmt(p.y)}'
        f',"v_dopp":{_fmt(p.v_dopp)},"rcs":{_fmt(p.rcs)},"label":{int(p.label)}'
        f',"track":{json.dumps(p.track_id)},"phi":{_fmt(p.phi)}}}'
    )


def write_sequence(seq: Sequence, path: str | Path) -> None:
    """Write a sequence in the JSONL interchange format."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for scan in seq.scans:
            fh.write(_ego_line(scan.ego) + "\n")
            for p in scan.points:
                fh.write(_point_line(p) + "\n")


def iter_points(seq: Sequence) -> Iterable[RadarPoint]:
    """All points of a sequence in scan order."""
    for scan in seq.scans:
        yield from scan.points
