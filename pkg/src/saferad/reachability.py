"""Synthesis of feasible critical trajectories toward labeled VRU points.

Recorded data rarely contains genuinely critical scenes, so ground truth
is manufactured: the planned path is bent onto a constant-radius circular
arc that starts at the vehicle, tangent to its heading, and passes
through a VRU point. A candidate is reachable when the arc radius, the
lateral and longitudinal acceleration limits, and the domain speed cap
all hold. The first reachable VRU (nearest first) becomes the target; its
track companions within a small radius join the ground-truth set.

The collision-time estimate follows the closed-form mean-speed expression
``2 r asin(x / r) / (v0 + v_coll)``; the exact arc length and a
closed-form travel time for the trapezoidal speed profile are provided
alongside so the two can be cross-checked rather than silently merged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .data_model import (
    Label,
    PointId,
    Scan,
    Trajectory,
    TrajectoryState,
    VRU_LABELS,
)

#: Lateral offsets below this are treated as a straight-line approach.
STRAIGHT_EPS = 1e-6


@dataclass(frozen=True)
class ReachabilityConfig:
    a_long_max: float = 10.0          # m/s^2, drivable longitudinal limit
    a_lat_max: float = 8.0            # m/s^2, lateral limit along the arc
    r_min: float = 6.0                # m, smallest feasible arc radius
    v_max_domain: float = 8.5         # m/s, speed cap of the synthesized path
    track_expand_radius: float = 2.0  # m, track companions closer than this join B
    vru_labels: frozenset[Label] = VRU_LABELS

    def __post_init__(self) -> None:
        for name in ("a_long_max", "a_lat_max", "r_min", "v_max_domain", "track_expand_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class CriticalTrajectory:
    trajectory: Trajectory
    target_point_id: PointId
    r: float        # m, signed arc radius (positive = left turn), inf = straight
    t_coll: float   # s, estimated time to reach the target
    v_coll: float   # m/s, speed at the target


def arc_to_point(x_vru: float, y_vru: float) -> float:
    """Signed radius of the arc from the origin, tangent to +x, through the target.

    Positive radii turn left, negative right; ``math.inf`` marks a
    straight-line approach. The target must lie ahead of the vehicle.
    """
    if x_vru <= 0.0:
        raise ValueError("target must lie ahead of the vehicle (x > 0)")
    if abs(y_vru) < STRAIGHT_EPS:
        return math.inf
    return (x_vru * x_vru + y_vru * y_vru) / (2.0 * y_vru)


def arc_length_to(r: float, x_vru: float, y_vru: float) -> float:
    """Exact path length along the arc from the origin to the target."""
    chord = math.hypot(x_vru, y_vru)
    if math.isinf(r):
        return chord
    half = min(1.0, chord / (2.0 * abs(r)))
    return 2.0 * abs(r) * math.asin(half)


def collision_time(
    r: float, x_vru: float, v_0: float, v_coll: float, t_0: float = 0.0
) -> float:
    """Mean-speed time estimate to the target along the arc.

    Straight case: ``2 x / (v0 + v_coll) - t0``. Arc case uses the
    closed-form ``2 r asin(x / r) / (v0 + v_coll) - t0``; see
    :func:`profile_travel_time` for the profile-exact alternative.
    """
    if v_0 + v_coll <= 0.0:
        raise ValueError("no motion: v_0 + v_coll must be positive")
    if math.isinf(r):
        return 2.0 * x_vru / (v_0 + v_coll) - t_0
    ratio = x_vru / r
    if abs(ratio) > 1.0 + 1e-9:
        raise ValueError(f"x/r = {ratio} outside the asin domain")
    # diagonal targets (x close to |y|) give a ratio of exactly 1 up to
    # rounding; clamp so asin stays defined
    ratio = max(-1.0, min(1.0, ratio))
    return 2.0 * r * math.asin(ratio) / (v_0 + v_coll) - t_0


def profile_travel_time(s: float, v_0: float, v_end: float, a_mag: float) -> float:
    """Time to cover distance ``s`` on a monotone ramp from v_0 to v_end.

    The profile accelerates (or decelerates) at ``a_mag`` until ``v_end``
    and holds it afterwards. Serves as the independent check against
    :func:`collision_time`.
    """
    if s < 0:
        raise ValueError("distance must be non-negative")
    if a_mag <= 0:
        raise ValueError("a_mag must be strictly positive")
    if v_0 <= 0 and v_end <= 0:
        raise ValueError("profile never moves")
    a = a_mag if v_end >= v_0 else -a_mag
    s_ramp = abs(v_end * v_end - v_0 * v_0) / (2.0 * a_mag)
    if s <= s_ramp:
        # still ramping at distance s: solve s = v_0 t + a t^2 / 2
        v_s = math.sqrt(max(0.0, v_0 * v_0 + 2.0 * a * s))
        return (v_s - v_0) / a
    t_ramp = (v_end - v_0) / a
    return t_ramp + (s - s_ramp) / v_end


def _ramp_distance_at(t: float, v_0: float, v_end: float, a_mag: float) -> float:
    """Distance covered after time ``t`` on the monotone-ramp profile."""
    if v_end == v_0 or a_mag <= 0:
        return v_0 * t
    a = a_mag if v_end > v_0 else -a_mag
    t_ramp = (v_end - v_0) / a
    if t <= t_ramp:
        return v_0 * t + 0.5 * a * t * t
    return v_0 * t_ramp + 0.5 * a * t_ramp * t_ramp + v_end * (t - t_ramp)


def _ramp_speed_at(t: float, v_0: float, v_end: float, a_mag: float) -> tuple[float, float]:
    """(speed, acceleration) after time ``t`` on the monotone-ramp profile."""
    if v_end == v_0 or a_mag <= 0:
        return v_0, 0.0
    a = a_mag if v_end > v_0 else -a_mag
    t_ramp = (v_end - v_0) / a
    if t < t_ramp:
        return v_0 + a * t, a
    return v_end, 0.0


def _arc_position(r: float, s: float) -> tuple[float, float, float]:
    """(x, y, heading) after path length ``s`` along a signed-radius arc."""
    if math.isinf(r):
        return s, 0.0, 0.0
    theta = s / r
    return r * math.sin(theta), r * (1.0 - math.cos(theta)), theta


def _build_states(
    r: float, v_0: float, v_coll: float, a_long: float, horizon: float, dt: float
) -> Trajectory:
    n = int(round(horizon / dt))
    states = []
    for k in range(n):
        t = k * dt
        s = _ramp_distance_at(t, v_0, v_coll, a_long)
        x, y, heading = _arc_position(r, s)
        v, a = _ramp_speed_at(t, v_0, v_coll, a_long)
        states.append(TrajectoryState(x=x, y=y, v=v, a=a, psi=0.0, alpha=heading))
    return Trajectory(states=tuple(states), dt=dt, horizon=horizon)


def synthesize_critical_trajectory(
    scan: Scan,
    cfg: ReachabilityConfig,
    horizon: float = 3.0,
    dt: float = 0.2,
) -> CriticalTrajectory | None:
    """Bend the plan toward the nearest reachable VRU point, if any.

    Candidates are VRU-labeled points ahead of the vehicle, tried in
    ascending range (ties by id) so the result is reproducible. The
    collision speed is the largest value the domain cap, the lateral
    limit on the arc, and the longitudinal limit over the approach
    distance all allow; the emitted path ramps monotonically from the
    current speed to it and then holds it.
    """
    v_0 = scan.ego.v
    if v_0 > cfg.v_max_domain:
        return None  # scene outside the low-speed domain, no compliant plan exists
    candidates = sorted(
        (p for p in scan.points if p.label in cfg.vru_labels and p.x > 0.0),
        key=lambda p: (math.hypot(p.x, p.y), p.id),
    )
    for p in candidates:
        r = arc_to_point(p.x, p.y)
        if abs(r) < cfg.r_min:
            continue
        v_lat_cap = math.inf if math.isinf(r) else math.sqrt(cfg.a_lat_max * abs(r))
        if v_0 > v_lat_cap:
            continue  # already too fast for this arc
        s_target = arc_length_to(r, p.x, p.y)
        v_reach = math.sqrt(v_0 * v_0 + 2.0 * cfg.a_long_max * s_target)
        v_coll = min(cfg.v_max_domain, v_lat_cap, v_reach)
        if v_0 + v_coll <= 0.0:
            continue
        traj = _build_states(r, v_0, v_coll, cfg.a_long_max, horizon, dt)
        t_coll = collision_time(r, p.x, v_0, v_coll)
        return CriticalTrajectory(
            trajectory=traj, target_point_id=p.id, r=r, t_coll=t_coll, v_coll=v_coll
        )
    return None


def build_set_b(scan: Scan, ct: CriticalTrajectory, cfg: ReachabilityConfig) -> set[PointId]:
    """Ground-truth critical ids: the target plus nearby track companions."""
    target = None
    for p in scan.points:
        if p.id == ct.target_point_id:
            target = p
            break
    if target is None:
        raise ValueError(f"target point {ct.target_point_id} is not in the scan")
    out = {target.id}
    if target.track_id is not None:
        for p in scan.points:
            if p.id == target.id or p.track_id != target.track_id:
                continue
            if math.hypot(p.x - target.x, p.y - target.y) < cfg.track_expand_radius:
                out.add(p.id)
    return out
