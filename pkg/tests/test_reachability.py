import math

import pytest
from hypothesis import given, settings, strategies as st

from saferad.data_model import Label
from saferad.reachability import (
    ReachabilityConfig,
    arc_length_to,
    arc_to_point,
    build_set_b,
    collision_time,
    profile_travel_time,
    synthesize_critical_trajectory,
)

from conftest import make_ego, make_point, make_scan

CFG = ReachabilityConfig()


class TestArcToPoint:
    def test_basic_radius(self):
        # (x^2 + y^2) / (2 y) at (8, 2): 68 / 4
        assert arc_to_point(8.0, 2.0) == pytest.approx(17.0)

    def test_straight_marker_for_on_axis_target(self):
        assert math.isinf(arc_to_point(10.0, 0.0))
        assert math.isinf(arc_to_point(10.0, 1e-9))

    def test_symmetric_target_small_radius(self):
        assert arc_to_point(3.0, 3.0) == pytest.approx(3.0)

    def test_right_turn_negative_radius(self):
        assert arc_to_point(8.0, -2.0) == pytest.approx(-17.0)

    def test_target_behind_rejected(self):
        with pytest.raises(ValueError):
            arc_to_point(-1.0, 2.0)
        with pytest.raises(ValueError):
            arc_to_point(0.0, 2.0)

    @given(x=st.floats(0.5, 25), y=st.floats(-10, 10))
    def test_circle_passes_through_origin_and_target(self, x, y):
        r = arc_to_point(x, y)
        if math.isinf(r):
            assert abs(y) < 1e-6
            return
        # center at (0, r): both origin and target lie on the circle
        assert math.hypot(0.0 - 0.0, 0.0 - r) == pytest.approx(abs(r))
        assert math.hypot(x - 0.0, y - r) == pytest.approx(abs(r), abs=1e-9)


class TestCollisionTime:
    def test_straight_mean_speed(self):
        assert collision_time(math.inf, 10.0, 0.0, 5.0, 0.0) == pytest.approx(4.0)

    def test_constant_speed_straight(self):
        v, length = 4.0, 12.0
        assert collision_time(math.inf, length, v, v, 0.0) == pytest.approx(length / v)

    def test_arc_form(self):
        expected = 2 * 17.0 * math.asin(8.0 / 17.0) / 8.0
        assert collision_time(17.0, 8.0, 2.0, 6.0, 0.0) == pytest.approx(expected)

    def test_time_origin_shift(self):
        base = collision_time(math.inf, 10.0, 0.0, 5.0, 0.0)
        assert collision_time(math.inf, 10.0, 0.0, 5.0, 1.5) == pytest.approx(base - 1.5)

    def test_no_motion_rejected(self):
        with pytest.raises(ValueError):
            collision_time(math.inf, 10.0, 0.0, 0.0)

    def test_diagonal_target_at_asin_boundary(self):
        # x = |y|: the chord ratio is exactly 1, a quarter circle
        r = arc_to_point(6.0, 6.0)
        t = collision_time(r, 6.0, 0.0, 4.0)
        assert t == pytest.approx(2 * r * (math.pi / 2) / 4.0)

    def test_ratio_beyond_rounding_slop_rejected(self):
        with pytest.raises(ValueError):
            collision_time(5.0, 6.0, 0.0, 4.0)


class TestProfileTravelTime:
    def test_pure_constant_speed(self):
        assert profile_travel_time(10.0, 5.0, 5.0, 10.0) == pytest.approx(2.0)

    def test_standing_start(self):
        # v^2 = 2 a s while ramping: 10 m at a=10 from rest, cap above
        t = profile_travel_time(5.0, 0.0, 100.0, 10.0)
        assert t == pytest.approx(1.0)  # s = a t^2 / 2

    def test_ramp_then_hold(self):
        # accelerate 0 -> 2 m/s at 1 m/s^2 (2 s, 2 m), then 8 m at 2 m/s
        assert profile_travel_time(10.0, 0.0, 2.0, 1.0) == pytest.approx(6.0)

    @given(
        s=st.floats(0.5, 40),
        v0=st.floats(0.0, 8.0),
        v_end=st.floats(0.5, 8.5),
        a=st.floats(1.0, 10.0),
    )
    @settings(deadline=None, max_examples=60)
    def test_matches_numeric_integration(self, s, v0, v_end, a):
        closed = profile_travel_time(s, v0, v_end, a)
        # time-step the profile until the distance is covered (no 1/v
        # singularity at a standing start, unlike distance stepping)
        dt = 1e-5
        sign = 1.0 if v_end >= v0 else -1.0
        t, covered, v = 0.0, 0.0, v0
        while covered < s:
            v_next = v + sign * a * dt
            if (sign > 0 and v_next > v_end) or (sign < 0 and v_next < v_end):
                v_next = v_end
            covered += 0.5 * (v + v_next) * dt
            v = v_next
            t += dt
        assert closed == pytest.approx(t, rel=1e-3, abs=1e-3)


def vru_scan(points, ego=None):
    return make_scan(points, ego=ego)


class TestSynthesis:
    def test_no_vru_labels_gives_none(self):
        scan = vru_scan([make_point(label=Label.CAR), make_point(pid=(0, 1), label=Label.STATIC)])
        assert synthesize_critical_trajectory(scan, CFG) is None

    def test_standing_ego_straight_accelerating_plan(self):
        scan = vru_scan([make_point(x=5.0, y=0.0)], ego=make_ego(v=0.0))
        ct = synthesize_critical_trajectory(scan, CFG)
        assert ct is not None
        assert math.isinf(ct.r)
        assert ct.v_coll == pytest.approx(CFG.v_max_domain)
        vs = [s.v for s in ct.trajectory.states]
        assert vs[0] == 0.0
        assert vs == sorted(vs)  # monotone ramp
        assert all(s.y == 0.0 for s in ct.trajectory.states)
        # acceleration reported while ramping, zero once the cap is reached
        assert ct.trajectory.states[0].a == CFG.a_long_max
        assert ct.trajectory.states[-1].a == 0.0

    def test_tight_target_rejected_by_radius(self):
        scan = vru_scan([make_point(x=3.0, y=3.0)], ego=make_ego(v=1.0))
        assert synthesize_critical_trajectory(scan, CFG) is None

    def test_nearest_candidate_wins(self):
        far = make_point(pid=(0, 0), x=9.0, y=0.2, track="far")
        near = make_point(pid=(0, 1), x=5.0, y=-0.4, track="near")
        ct = synthesize_critical_trajectory(vru_scan([far, near]), CFG)
        assert ct.target_point_id == near.id

    def test_candidates_behind_ignored(self):
        scan = vru_scan([make_point(x=-4.0, y=0.0)], ego=make_ego(v=2.0))
        assert synthesize_critical_trajectory(scan, CFG) is None

    def test_over_domain_speed_gives_none(self):
        # no seamless plan can respect the domain cap once the ego exceeds it
        scan = vru_scan([make_point(x=6.0, y=0.0)], ego=make_ego(v=CFG.v_max_domain + 1.0))
        assert synthesize_critical_trajectory(scan, CFG) is None

    def test_deterministic(self):
        pts = [
            make_point(pid=(0, i), x=4.0 + i * 0.5, y=0.3 * (-1) ** i, track=f"t{i}")
            for i in range(5)
        ]
        scan = vru_scan(pts, ego=make_ego(v=1.5))
        a = synthesize_critical_trajectory(scan, CFG)
        b = synthesize_critical_trajectory(scan, CFG)
        assert a == b

    def test_arc_target_feasibility_bounds(self):
        scan = vru_scan([make_point(x=7.0, y=2.5)], ego=make_ego(v=2.0))
        ct = synthesize_critical_trajectory(scan, CFG)
        assert ct is not None
        assert abs(ct.r) >= CFG.r_min
        states = ct.trajectory.states
        for s in states:
            assert s.v <= CFG.v_max_domain + 1e-9
            assert s.v * s.v / abs(ct.r) <= CFG.a_lat_max + 1e-9
        for s0, s1 in zip(states, states[1:]):
            assert abs(s1.v - s0.v) / ct.trajectory.dt <= CFG.a_long_max + 1e-9

    def test_arc_passes_near_target(self):
        x, y = 7.0, 2.5
        ct = synthesize_critical_trajectory(vru_scan([make_point(x=x, y=y)]), CFG)
        r = ct.r
        # residual of the target against the synthesized circle
        assert abs(math.hypot(x, y - r) - abs(r)) < 1e-9

    def test_reported_time_against_profile_time(self):
        # the mean-speed estimate and the profile-exact time may differ;
        # both must agree on the straight constant-speed case
        v = 4.0
        scan = vru_scan([make_point(x=6.0, y=0.0)], ego=make_ego(v=v))
        ct = synthesize_critical_trajectory(scan, CFG)
        s = arc_length_to(ct.r, 6.0, 0.0)
        t_profile = profile_travel_time(s, v, ct.v_coll, CFG.a_long_max)
        assert ct.t_coll > 0 and t_profile > 0


class TestSetB:
    def test_target_without_track_is_alone(self):
        target = make_point(pid=(0, 0), x=5.0, track=None)
        other = make_point(pid=(0, 1), x=5.2, track=None)
        ct = synthesize_critical_trajectory(vru_scan([target, other]), CFG)
        b = build_set_b(vru_scan([target, other]), ct, CFG)
        assert b == {ct.target_point_id}

    def test_track_companions_within_radius(self):
        target = make_point(pid=(0, 0), x=5.0, y=0.0, track="grp")
        near = make_point(pid=(0, 1), x=5.5, y=0.0, track="grp")      # 0.5 m
        edge = make_point(pid=(0, 2), x=5.0, y=1.9, track="grp")      # 1.9 m
        far = make_point(pid=(0, 3), x=7.5, y=0.0, track="grp")       # 2.5 m
        scan = vru_scan([target, near, edge, far])
        ct = synthesize_critical_trajectory(scan, CFG)
        assert ct.target_point_id == target.id
        assert build_set_b(scan, ct, CFG) == {target.id, near.id, edge.id}

    def test_other_tracks_excluded_even_if_close(self):
        target = make_point(pid=(0, 0), x=5.0, y=0.0, track="a")
        impostor = make_point(pid=(0, 1), x=5.05, y=0.0, track="b")
        scan = vru_scan([target, impostor])
        ct = synthesize_critical_trajectory(scan, CFG)
        assert build_set_b(scan, ct, CFG) == {target.id}

    def test_missing_target_rejected(self):
        target = make_point(pid=(0, 0), x=5.0)
        scan = vru_scan([target])
        ct = synthesize_critical_trajectory(scan, CFG)
        other_scan = vru_scan([make_point(pid=(9, 9), x=5.0)])
        with pytest.raises(ValueError):
            build_set_b(other_scan, ct, CFG)
