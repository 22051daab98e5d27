"""Per-point criticality scoring against a planned drive tube.

A point's criticality is the product of three components, each in [0, 1]:

* velocity: grows quadratically with the assumed collision speed and
  saturates at the domain maximum speed;
* tube: 1 inside the swept corridor (half vehicle width plus a safety
  margin), easing smoothly to 0 across an insecurity zone;
* distance: fraction of kinetic energy the vehicle still carries at the
  point after an immediate brake release, i.e. the square of the residual
  collision speed over the planned speed.

The product keeps the total bounded and makes any vanishing component
veto the point. An alternative scorer rates points purely by their
ego-compensated doppler speed on a linear ramp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .data_model import EgoState, PointId, RadarPoint, Trajectory, compensate_doppler
from .trajectory import TubeProjection, project_point

#: Ramp of the doppler-based comparison scorer (m/s): scores are 0 up to
#: the deadband and reach 1 at deadband + width.
VELOCITY_SCORE_DEADBAND = 0.4
VELOCITY_SCORE_RAMP_WIDTH = 1.1


@dataclass(frozen=True)
class CriticalityParams:
    """Tunable parameters of the drive-tube criticality metric."""

    v_max_domain: float = 30.0 / 3.6   # m/s, speed where velocity criticality saturates
    vehicle_half_width: float = 1.0    # m
    safety_margin: float = 0.1         # m, widens the tube around the body
    insecurity_width: float = 2.0      # m, smooth decay zone outside the tube
    t_react: float = 0.5               # s, delay before braking starts
    a_brake: float = 8.0               # m/s^2, deceleration capability
    vehicle_length: float = 4.0        # m, behind-the-front tolerance band
    crit_thresh: float = 0.1           # classification threshold on the product

    def __post_init__(self) -> None:
        for name in (
            "v_max_domain",
            "vehicle_half_width",
            "safety_margin",
            "insecurity_width",
            "t_react",
            "a_brake",
            "vehicle_length",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not 0.0 < self.crit_thresh <= 1.0:
            raise ValueError("crit_thresh must be in (0, 1]")


@dataclass(frozen=True)
class CriticalityScore:
    """Component scores and their product for one point."""

    crit_vel: float
    crit_tube: float
    crit_ttc: float
    crit_p: float
    v_coll: float   # m/s, assumed collision speed


_ZERO_SCORE = CriticalityScore(0.0, 0.0, 0.0, 0.0, 0.0)


def velocity_criticality(v_coll: float, params: CriticalityParams) -> float:
    """Quadratic severity of a collision at ``v_coll``, capped at 1."""
    return min(1.0, (v_coll * v_coll) / (params.v_max_domain * params.v_max_domain))


def tube_criticality(d_tube: float, params: CriticalityParams) -> float:
    """Lateral membership score for a point ``d_tube`` off the centerline.

    1 inside the tube, a cubic ease-out across the insecurity zone with
    zero slope at both ends, 0 beyond it.
    """
    edge = params.vehicle_half_width + params.safety_margin
    if d_tube <= edge:
        return 1.0
    u = (d_tube - edge) / params.insecurity_width
    if u >= 1.0:
        return 0.0
    return 1.0 - (3.0 * u * u - 2.0 * u * u * u)


def distance_criticality(
    d_dist: float, v_pt: float, params: CriticalityParams
) -> tuple[float, float]:
    """Residual-energy score for a point ``d_dist`` down the path.

    Assumes braking is released immediately: the vehicle covers the
    reaction distance at the planned speed, then sheds speed at the
    braking capability. Returns ``(score, v_coll)`` where the score is
    the residual kinetic energy fraction, exactly 0 when the vehicle can
    stop short of the point.
    """
    if v_pt <= 0.0:
        return 0.0, 0.0
    d_react = v_pt * params.t_react
    if d_dist <= d_react:
        v_coll = v_pt
    else:
        v_coll = math.sqrt(max(0.0, v_pt * v_pt - 2.0 * params.a_brake * (d_dist - d_react)))
    return (v_coll * v_coll) / (v_pt * v_pt), v_coll


def score_projection(proj: TubeProjection, params: CriticalityParams) -> CriticalityScore:
    """Combine the three components for an already-computed projection."""
    tube = tube_criticality(proj.d_tube, params)
    if proj.behind_gap > 0.0:
        # foot behind the path start: still critical while alongside the
        # vehicle body, ignored once clearly behind it
        if proj.behind_gap <= params.vehicle_length:
            ttc, v_coll = distance_criticality(0.0, proj.v_pt, params)
        else:
            ttc, v_coll = 0.0, 0.0
    else:
        ttc, v_coll = distance_criticality(proj.d_dist, proj.v_pt, params)
    vel = velocity_criticality(v_coll, params)
    return CriticalityScore(
        crit_vel=vel,
        crit_tube=tube,
        crit_ttc=ttc,
        crit_p=vel * tube * ttc,
        v_coll=v_coll,
    )


def score_point(p: RadarPoint, traj: Trajectory, params: CriticalityParams) -> CriticalityScore:
    """Score one radar point against a planned trajectory."""
    if traj.n_states < 2:
        return _ZERO_SCORE
    return score_projection(project_point(traj, (p.x, p.y)), params)


def score_scan(
    scan_points: Mapping[PointId, RadarPoint] | list[RadarPoint] | tuple[RadarPoint, ...],
    traj: Trajectory,
    params: CriticalityParams,
) -> dict[PointId, CriticalityScore]:
    """Score every point of a scan against one trajectory."""
    points = scan_points.values() if isinstance(scan_points, Mapping) else scan_points
    return {p.id: score_point(p, traj, params) for p in points}


def classify_critical(
    scores: Mapping[PointId, CriticalityScore | float], params: CriticalityParams
) -> set[PointId]:
    """Ids whose criticality reaches the classification threshold."""
    thresh = params.crit_thresh
    out = set()
    for pid, score in scores.items():
        value = score.crit_p if isinstance(score, CriticalityScore) else float(score)
        if value >= thresh:
            out.add(pid)
    return out


def velocity_based_criticality(p: RadarPoint, ego: EgoState) -> float:
    """Comparison scorer: linear ramp over the compensated doppler speed."""
    speed = abs(compensate_doppler(p, ego))
    return min(1.0, max(0.0, (speed - VELOCITY_SCORE_DEADBAND) / VELOCITY_SCORE_RAMP_WIDTH))
