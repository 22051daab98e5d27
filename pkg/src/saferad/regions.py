"""Criticality-region lifecycle for filter-threshold suspension.

A region is a circular zone spawned around each classified-critical
point. Over the following cycles it grows through a fixed radius
schedule, is re-expressed in the moving vehicle frame, and expires after
a bounded lifetime. Points inside any region are exempt from the RCS
filter criterion.

Regions spawned from scan t act on scans t+1 onward, never on scan t
itself. :class:`RegionStore` enforces that timing: freshly spawned
regions are held aside and only join the active set on the next
``advance``, frame-shifted but still at age 1 so their first exemption
cycle uses the first radius of the schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence as Seq

from .data_model import EgoState, PointId, RadarPoint, Scan, retarget_frame


@dataclass(frozen=True)
class RegionConfig:
    radii: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8, 1.0)  # m, radius per age
    t_life: int = 5                                       # cycles

    def __post_init__(self) -> None:
        if self.t_life < 1:
            raise ValueError("t_life must be at least 1")
        if len(self.radii) != self.t_life:
            raise ValueError(
                f"radius schedule has {len(self.radii)} entries for t_life={self.t_life}"
            )
        if self.radii[0] <= 0 or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing and positive")

    def covered_speed(self, cycle_period: float) -> float:
        """Largest object speed (m/s) the first-cycle radius can absorb."""
        if cycle_period <= 0:
            raise ValueError("cycle_period must be strictly positive")
        return self.radii[0] / cycle_period


@dataclass(frozen=True)
class CriticalityRegion:
    center: tuple[float, float]  # m, current vehicle frame
    age: int                     # cycles since creation, 1..t_life
    created_t: float             # s, timestamp of the seeding scan


def spawn_regions(critical_points: Iterable[RadarPoint]) -> list[CriticalityRegion]:
    """One age-1 region per critical point, centered on it. No dedup."""
    return [
        CriticalityRegion(center=(p.x, p.y), age=1, created_t=p.t) for p in critical_points
    ]


def step_regions(
    regions: Seq[CriticalityRegion],
    ego_prev: EgoState,
    ego_now: EgoState,
    cfg: RegionConfig,
) -> list[CriticalityRegion]:
    """Advance regions one cycle: re-frame centers, age, drop expired."""
    if ego_now.t < ego_prev.t:
        raise ValueError("ego states must be time-ordered")
    out = []
    for r in regions:
        age = r.age + 1
        if age > cfg.t_life:
            continue
        out.append(replace(r, center=retarget_frame(r.center, ego_prev, ego_now), age=age))
    return out


def exempt_ids(
    scan: Scan, regions: Seq[CriticalityRegion], cfg: RegionConfig
) -> set[PointId]:
    """Ids of scan points inside any region at its current radius."""
    out: set[PointId] = set()
    if not regions:
        return out
    for p in scan.points:
        for r in regions:
            radius = cfg.radii[r.age - 1]
            dx, dy = p.x - r.center[0], p.y - r.center[1]
            if dx * dx + dy * dy <= radius * radius:
                out.add(p.id)
                break
    return out


class RegionStore:
    """Per-sequence region state, advanced strictly cycle by cycle.

    Critical points reported via :meth:`spawn` become active only after
    the next :meth:`advance`, so exemptions never act on the scan that
    produced them. ``on_event`` receives ("spawn"|"activate"|"expire",
    region) notifications for tracing.
    """

    def __init__(
        self,
        cfg: RegionConfig,
        on_event: Callable[[str, CriticalityRegion], None] | None = None,
    ) -> None:
        self.cfg = cfg
        self.active: list[CriticalityRegion] = []
        self._fresh: list[CriticalityRegion] = []
        self._on_event = on_event

    def spawn(self, critical_points: Iterable[RadarPoint]) -> None:
        born = spawn_regions(critical_points)
        self._fresh.extend(born)
        if self._on_event:
            for r in born:
                self._on_event("spawn", r)

    def advance(self, ego_prev: EgoState, ego_now: EgoState) -> None:
        stepped = step_regions(self.active, ego_prev, ego_now, self.cfg)
        if self._on_event:
            for r in self.active:
                if r.age + 1 > self.cfg.t_life:
                    self._on_event("expire", r)
        activated = [
            replace(r, center=retarget_frame(r.center, ego_prev, ego_now))
            for r in self._fresh
        ]
        if self._on_event:
            for r in activated:
                self._on_event("activate", r)
        self.active = stepped + activated
        self._fresh = []

    def exempt_ids(self, scan: Scan) -> set[PointId]:
        return exempt_ids(scan, self.active, self.cfg)
