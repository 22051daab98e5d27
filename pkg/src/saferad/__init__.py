"""Criticality-aware radar point-cloud filtering and evaluation."""

__version__ = "0.1.0"

from .clustering import Cluster, ClusterConfig, dbscan
from .criticality import (
    CriticalityParams,
    CriticalityScore,
    classify_critical,
    distance_criticality,
    score_point,
    score_scan,
    tube_criticality,
    velocity_based_criticality,
    velocity_criticality,
)
from .data_model import (
    EgoState,
    Label,
    RadarPoint,
    Scan,
    Sequence,
    SequenceFormatError,
    Trajectory,
    TrajectoryState,
    VRU_LABELS,
    compensate_doppler,
    load_sequence,
    write_sequence,
)
from .evaluation import (
    EvalReport,
    EvalSets,
    MetricCounts,
    PipelineConfig,
    evaluate_sequence,
    run_experiment,
    run_threshold_sweep,
)
from .filtering import FilterConfig, FilterResult, RemovalReason, apply_filter, filter_rate
from .reachability import (
    CriticalTrajectory,
    ReachabilityConfig,
    arc_to_point,
    build_set_b,
    collision_time,
    synthesize_critical_trajectory,
)
from .regions import (
    CriticalityRegion,
    RegionConfig,
    RegionStore,
    exempt_ids,
    spawn_regions,
    step_regions,
)
from .synth import SceneSpec, generate, load_scene_spec
from .trajectory import TubeProjection, project_point, propagate_ego_tube

__all__ = [
    "__version__",
    "Cluster",
    "ClusterConfig",
    "CriticalityParams",
    "CriticalityRegion",
    "CriticalityScore",
    "CriticalTrajectory",
    "EgoState",
    "EvalReport",
    "EvalSets",
    "FilterConfig",
    "FilterResult",
    "Label",
    "MetricCounts",
    "PipelineConfig",
    "RadarPoint",
    "ReachabilityConfig",
    "RegionConfig",
    "RegionStore",
    "RemovalReason",
    "Scan",
    "SceneSpec",
    "Sequence",
    "SequenceFormatError",
    "Trajectory",
    "TrajectoryState",
    "TubeProjection",
    "VRU_LABELS",
    "apply_filter",
    "arc_to_point",
    "build_set_b",
    "classify_critical",
    "collision_time",
    "compensate_doppler",
    "dbscan",
    "distance_criticality",
    "evaluate_sequence",
    "exempt_ids",
    "filter_rate",
    "generate",
    "load_scene_spec",
    "load_sequence",
    "project_point",
    "propagate_ego_tube",
    "run_experiment",
    "run_threshold_sweep",
    "score_point",
    "score_scan",
    "spawn_regions",
    "step_regions",
    "synthesize_critical_trajectory",
    "tube_criticality",
    "velocity_based_criticality",
    "velocity_criticality",
    "write_sequence",
]
