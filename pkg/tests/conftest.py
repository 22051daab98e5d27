import math

import pytest

from saferad.data_model import EgoState, Label, RadarPoint, Scan, Trajectory, TrajectoryState
from saferad.synth import EgoProfile, NoiseSpec, RcsSpec, SceneSpec, VruSpec, generate


def make_point(
    pid=(0, 0),
    x=5.0,
    y=0.0,
    *,
    t=0.0,
    sensor=0,
    v_dopp=0.0,
    rcs=0.0,
    label=Label.PEDESTRIAN,
    track=None,
    phi=None,
):
    if phi is None:
        phi = math.atan2(y, x)
    return RadarPoint(
        id=tuple(pid),
        t=t,
        sensor_id=sensor,
        x=x,
        y=y,
        v_dopp=v_dopp,
        rcs=rcs,
        label=label,
        track_id=track,
        phi=phi,
    )


def make_ego(t=0.0, x=0.0, y=0.0, yaw=0.0, v=0.0, yaw_rate=0.0):
    return EgoState(t=t, x=x, y=y, yaw=yaw, v=v, yaw_rate=yaw_rate)


def make_scan(points, ego=None, t=0.0):
    return Scan(t=t, points=tuple(points), ego=ego if ego is not None else make_ego(t=t))


def straight_trajectory(n=15, spacing=1.0, v=5.0, a=0.0):
    """States on the +x axis at x = 0, spacing, 2*spacing, ..."""
    states = tuple(
        TrajectoryState(x=k * spacing, y=0.0, v=v, a=a, psi=0.0, alpha=0.0) for k in range(n)
    )
    return Trajectory(states=states, dt=0.2, horizon=n * 0.2)


def _vru(start_x, lat, spread, track, label=Label.PEDESTRIAN, vel=(0.0, 0.0), rcs=None):
    return VruSpec(
        label=label,
        track=track,
        start=(start_x, lat),
        velocity=vel,
        n_points=5,
        spread=spread,
        jitter=0.04,
        rcs=rcs if rcs is not None else RcsSpec(kind="uniform", low=-16.0, high=-6.0),
    )


def build_corpus_specs(n=20):
    """Diverse deterministic scene specs for trend and additivity checks.

    VRU ranges and lateral offsets are varied so criticality scores of
    ground-truth points spread over (0, 1], and RCS models mix steady and
    flickering reflectors so the filter treatment matters.
    """
    egos = [
        EgoProfile(kind="standstill"),
        EgoProfile(kind="straight", v=2.0),
        EgoProfile(kind="straight", v=4.5),
        EgoProfile(kind="arc", v=3.0, yaw_rate=0.25),
    ]
    specs = []
    for i in range(n):
        ego = egos[i % len(egos)]
        base_x = 4.0 + 0.35 * i          # 4.0 .. 10.65 m ahead
        lat = (-1.0) ** i * (0.15 * (i % 5))  # up to 0.6 m lateral
        spread = 0.4 + 0.08 * (i % 9)    # 0.4 .. 1.04 m blob radius
        vrus = [
            _vru(
                base_x,
                lat,
                spread,
                track=f"trk-{i}-a",
                label=(Label.PEDESTRIAN, Label.BICYCLE, Label.PEDESTRIAN_GROUP)[i % 3],
                rcs=RcsSpec(kind="alternate", strong=-7.0, weak=-13.0)
                if i % 2 == 0
                else RcsSpec(kind="uniform", low=-16.0, high=-6.0),
            )
        ]
        if i % 3 == 0:
            vrus.append(
                _vru(
                    base_x + 2.5,
                    -lat + 1.2,
                    0.9,
                    track=f"trk-{i}-b",
                    vel=(-0.6, 0.2),
                )
            )
        specs.append(
            SceneSpec(
                seed=100 + i,
                sequence_id=f"seq-{i:03d}",
                n_scans=12 + (i % 4),
                ego=ego,
                vrus=tuple(vrus),
                noise=NoiseSpec(
                    rate=8 + (i % 5),
                    rcs=RcsSpec(kind="uniform", low=-24.0, high=-5.0),
                    v_rad_range=(-1.8, 1.8) if i % 4 == 0 else (0.0, 0.0),
                ),
            )
        )
    return specs


@pytest.fixture(scope="session")
def corpus_sequences():
    return [generate(spec) for spec in build_corpus_specs(20)]
