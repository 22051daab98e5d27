"""Conventional point-cloud filter cascade with RCS exemptions.

Stages run in a fixed order for deterministic removal reasons: spatial
rectangle, doppler sanity bound, optional static-motion gate, RCS
threshold. An exemption set bypasses only the RCS criterion; ghosts with
implausible doppler are never readmitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable

from .data_model import PointId, RadarPoint, Scan, compensate_doppler


class RemovalReason(str, Enum):
    SPATIAL = "spatial"
    DOPPLER = "doppler"
    STATIC = "static"
    RCS = "rcs"


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds of the conventional cascade."""

    x_max: float = 20.0              # m, longitudinal gate
    y_abs_max: float = 10.0          # m, lateral gate
    v_comp_min: float = 0.5          # m/s, static gate on compensated doppler
    v_dopp_max: float = 20.0         # m/s, raw doppler sanity bound
    rcs_thresh: float = -10.0        # dBm^2, points below are dropped
    static_filter_enabled: bool = False

    def __post_init__(self) -> None:
        for name in ("x_max", "y_abs_max", "v_dopp_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class FilterResult:
    survivors: list[RadarPoint] = field(default_factory=list)
    removed: list[RadarPoint] = field(default_factory=list)
    reasons: dict[PointId, RemovalReason] = field(default_factory=dict)


def removal_reason(
    p: RadarPoint,
    scan: Scan,
    cfg: FilterConfig,
    exempt: frozenset[PointId] | set[PointId],
) -> RemovalReason | None:
    """First cascade stage that rejects ``p``, or None if it survives."""
    if abs(p.x) > cfg.x_max or abs(p.y) > cfg.y_abs_max:
        return RemovalReason.SPATIAL
    if abs(p.v_dopp) > cfg.v_dopp_max:
        return RemovalReason.DOPPLER
    if cfg.static_filter_enabled and abs(compensate_doppler(p, scan.ego)) < cfg.v_comp_min:
        return RemovalReason.STATIC
    if p.rcs < cfg.rcs_thresh and p.id not in exempt:
        return RemovalReason.RCS
    return None


def apply_filter(
    scan: Scan,
    cfg: FilterConfig,
    exempt: frozenset[PointId] | set[PointId] = frozenset(),
) -> FilterResult:
    """Split a scan into filter survivors and removed points.

    Ids in ``exempt`` skip the RCS test only; the spatial, doppler, and
    static stages always apply.
    """
    result = FilterResult()
    for p in scan.points:
        reason = removal_reason(p, scan, cfg, exempt)
        if reason is None:
            result.survivors.append(p)
        else:
            result.removed.append(p)
            result.reasons[p.id] = reason
    return result


def filter_rate(n_survivors: int, n_total: int) -> float:
    """Fraction of points remaining after the cascade."""
    if n_total <= 0:
        raise ValueError("filter rate is undefined for an empty cloud")
    return n_survivors / n_total


def write_removal_audit(
    fh: IO[str],
    sequence_id: str,
    scan_index: int,
    removed: Iterable[tuple[PointId, RemovalReason]],
) -> None:
    """Append one JSONL audit line per removed point."""
    for pid, reason in removed:
        fh.write(
            json.dumps(
                {
                    "sequence": sequence_id,
                    "scan": scan_index,
                    "id": list(pid),
                    "reason": reason.value,
                },
                separators=(",", ":"),
            )
            + "\n"
        )
