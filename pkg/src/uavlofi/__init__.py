"""Low-fidelity UAV flight simulation and scenario filtering.

The pipeline: generate constrained two-obstacle scenarios around a mission's
arena-crossing segment, fly each one with an analytic depth camera feeding a
polar-histogram lookahead planner under simplified kinematics, and keep the
scenarios whose predicted closest pass falls in the interesting band.
"""

from .evaluation import (
    CampaignResult,
    CampaignStats,
    EvaluationReport,
    FilterPolicy,
    Verdict,
    evaluate,
    run_campaign,
)
from .generator import (
    CanonicalTransform,
    GeneratorConfig,
    Mission,
    NoSegmentOfInterest,
    PlacementFailed,
    SamplingExhausted,
    TestCase,
    canonicalize,
    find_soi,
    generate,
    place_second_obstacle,
    sample_first_obstacle,
)
from .geometry import (
    ArenaRect,
    CuboidObstacle,
    FlightSegment,
    Pose,
    Vec3,
    point_obstacle_distance,
    segment_line_intersection,
)
from .planner import LookaheadNode, PlannerParams, PolarHistogram, build_histogram, plan
from .rendering import (
    CameraExtrinsics,
    CameraIntrinsics,
    DepthImage,
    PointCloud,
    depth_to_cloud,
    render_depth,
)
from .simulator import (
    KinematicParams,
    Outcome,
    SimConfig,
    Trajectory,
    kinematic_step,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "ArenaRect",
    "CameraExtrinsics",
    "CameraIntrinsics",
    "CampaignResult",
    "CampaignStats",
    "CanonicalTransform",
    "CuboidObstacle",
    "DepthImage",
    "EvaluationReport",
    "FilterPolicy",
    "FlightSegment",
    "GeneratorConfig",
    "KinematicParams",
    "LookaheadNode",
    "Mission",
    "NoSegmentOfInterest",
    "Outcome",
    "PlacementFailed",
    "PlannerParams",
    "PointCloud",
    "PolarHistogram",
    "Pose",
    "SamplingExhausted",
    "SimConfig",
    "TestCase",
    "Trajectory",
    "Vec3",
    "Verdict",
    "build_histogram",
    "canonicalize",
    "depth_to_cloud",
    "evaluate",
    "find_soi",
    "generate",
    "kinematic_step",
    "place_second_obstacle",
    "plan",
    "point_obstacle_distance",
    "render_depth",
    "run_campaign",
    "sample_first_obstacle",
    "segment_line_intersection",
    "simulate",
]
