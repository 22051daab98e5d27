"""Drive-tube geometry against a discrete planned path.

The planned path is a polyline of trajectory states. A radar point is
related to it through its perpendicular foot point: the lateral offset
from the centerline, the travel distance along the path up to the foot,
and the planned speed at the nearest state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .data_model import EgoState, Trajectory, TrajectoryState


@dataclass(frozen=True)
class TubeProjection:
    """Relation of one point to the drive-tube centerline.

    ``behind_gap`` is the backward overhang along the first segment when
    the foot point clamps behind the path start; it is 0.0 otherwise.
    """

    d_tube: float        # m, unsigned lateral distance to the centerline
    d_dist: float        # m, travel distance from the path start to the foot
    v_pt: float          # m/s, planned speed at the nearest state
    a_pt: float          # m/s^2, planned acceleration at the nearest state
    segment_index: int
    on_path: bool
    behind_gap: float = 0.0


def project_point(traj: Trajectory, point: tuple[float, float]) -> TubeProjection:
    """Project a point onto the path polyline.

    The foot is the global minimum-distance point over all segments;
    segment parameters are clamped to the segment, and ``on_path`` is
    False when the global foot clamps to the first or last vertex.
    Zero-length segments (repeated vertices) contribute nothing; a path
    whose states all coincide degenerates to a single position with
    ``v_pt = 0`` so that a standstill plan never reports planned speed.
    """
    states = traj.states
    if len(states) < 2:
        raise ValueError("trajectory must have at least 2 states")
    px, py = float(point[0]), float(point[1])

    nearest = 0
    nearest_d2 = math.inf
    for i, s in enumerate(states):
        d2 = (s.x - px) ** 2 + (s.y - py) ** 2
        if d2 < nearest_d2:
            nearest, nearest_d2 = i, d2

    best_d2 = math.inf
    best_seg = -1
    best_t = 0.0
    best_t_raw = 0.0
    best_prefix = 0.0
    best_len = 0.0
    first_seg = -1
    last_seg = -1
    arc = 0.0
    for i in range(len(states) - 1):
        ax, ay = states[i].x, states[i].y
        dx, dy = states[i + 1].x - ax, states[i + 1].y - ay
        len2 = dx * dx + dy * dy
        if len2 == 0.0:
            continue
        if first_seg < 0:
            first_seg = i
        last_seg = i
        seg_len = math.sqrt(len2)
        t_raw = ((px - ax) * dx + (py - ay) * dy) / len2
        t = min(1.0, max(0.0, t_raw))
        fx, fy = ax + t * dx, ay + t * dy
        d2 = (px - fx) ** 2 + (py - fy) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best_seg = i
            best_t = t
            best_t_raw = t_raw
            best_prefix = arc
            best_len = seg_len
        arc += seg_len

    if best_seg < 0:
        # all states coincide: standstill plan collapsed to one position
        return TubeProjection(
            d_tube=math.sqrt(nearest_d2),
            d_dist=0.0,
            v_pt=0.0,
            a_pt=0.0,
            segment_index=0,
            on_path=False,
        )

    clamped_before = best_seg == first_seg and best_t_raw < 0.0
    clamped_after = best_seg == last_seg and best_t_raw > 1.0
    return TubeProjection(
        d_tube=math.sqrt(best_d2),
        d_dist=best_prefix + best_t * best_len,
        v_pt=states[nearest].v,
        a_pt=states[nearest].a,
        segment_index=best_seg,
        on_path=not (clamped_before or clamped_after),
        behind_gap=-best_t_raw * best_len if clamped_before else 0.0,
    )


def propagate_ego_tube(ego: EgoState, horizon: float = 3.0, dt: float = 0.2) -> Trajectory:
    """Unroll the current motion state into a constant-turn-rate path.

    Produces ``horizon / dt`` states at times ``k * dt`` for
    ``k = 0 .. n-1`` in the vehicle frame, the first one at the vehicle
    front. Speed is held constant, acceleration is zero, and the yaw
    angle integrates the current yaw rate.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if horizon < dt:
        raise ValueError("horizon must be at least one dt")
    n = int(round(horizon / dt))
    v, w = ego.v, ego.yaw_rate
    states = []
    for k in range(n):
        t = k * dt
        if abs(w) < 1e-12:
            x, y, alpha = v * t, 0.0, 0.0
        else:
            x = (v / w) * math.sin(w * t)
            y = (v / w) * (1.0 - math.cos(w * t))
            alpha = w * t
        states.append(TrajectoryState(x=x, y=y, v=v, a=0.0, psi=0.0, alpha=alpha))
    return Trajectory(states=tuple(states), dt=dt, horizon=horizon)
