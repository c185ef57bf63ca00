"""Closed-loop flight simulation: sense, plan, step, repeat.

Each cycle renders a depth image from the current pose, lifts it to a point
cloud, asks the planner for a steering node, and advances the vehicle with a
simplified kinematic model (capped speed, capped yaw rate, forward motion
gated on heading alignment).  One cycle models 100 ms of flight.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .geometry import CuboidObstacle, Pose, Vec3, point_obstacle_distance, wrap_angle
from .planner import PlannerParams, plan
from .rendering import CameraExtrinsics, CameraIntrinsics, depth_to_cloud, render_depth

# A planner that fails this many cycles in a row is considered stuck.
STUCK_AFTER_FAILURES = 10


class Outcome(enum.Enum):
    REACHED_GOAL = "REACHED_GOAL"
    TIMEOUT = "TIMEOUT"
    PLANNER_STUCK = "PLANNER_STUCK"
    COLLISION = "COLLISION"


@dataclass(frozen=True)
class KinematicParams:
    """Simplified motion limits, evaluated once per planning cycle."""

    v_max_mps: float = 3.0
    yaw_rate_max_deg_s: float = 13.5
    dt_s: float = 0.1
    # Full speed only when the required yaw change is under this fraction
    # of one cycle's worth of yaw authority.
    yaw_gate_fraction: float = 1.0 / 3.0
    # "inverse": forward fraction shrinks as the required turn grows.
    # "direct": literal proportionality, kept for comparison runs.
    speed_rule: str = "inverse"

    def __post_init__(self) -> None:
        if self.v_max_mps <= 0 or self.yaw_rate_max_deg_s <= 0 or self.dt_s <= 0:
            raise ValueError("v_max_mps, yaw_rate_max_deg_s and dt_s must be positive")
        if not 0.0 < self.yaw_gate_fraction < 1.0:
            raise ValueError("yaw_gate_fraction must be in (0, 1)")
        if self.speed_rule not in ("inverse", "direct"):
            raise ValueError("speed_rule must be 'inverse' or 'direct'")

    @property
    def step_distance_m(self) -> float:
        return self.v_max_mps * self.dt_s

    @property
    def yaw_step_rad(self) -> float:
        return math.radians(self.yaw_rate_max_deg_s) * self.dt_s


def kinematic_step(pose: Pose, target: Vec3, k: KinematicParams) -> Pose:
    """Advance one cycle toward `target`.

    Yaw rotates toward the bearing of the target by at most one cycle's yaw
    authority.  Translation runs along the straight 3-D line to the target:
    the full speed budget when nearly aligned, a reduced fraction otherwise,
    and never past the target.
    """
    dx = target.x - pose.position.x
    dy = target.y - pose.position.y
    dz = target.z - pose.position.z
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist <= 1e-12:
        return pose

    horiz = math.hypot(dx, dy)
    bearing = math.atan2(dy, dx) if horiz > 1e-12 else pose.yaw
    dpsi_signed = wrap_angle(bearing - pose.yaw)
    dpsi = abs(dpsi_signed)
    psi_step = k.yaw_step_rad

    if dpsi <= psi_step:
        new_yaw = bearing
    else:
        new_yaw = wrap_angle(pose.yaw + math.copysign(psi_step, dpsi_signed))

    budget = k.v_max_mps * k.dt_s
    if dpsi >= k.yaw_gate_fraction * psi_step and dpsi > 0.0:
        if k.speed_rule == "inverse":
            budget *= min(1.0, psi_step / dpsi)
        else:
            budget *= min(1.0, dpsi / psi_step)
    move = min(budget, dist)

    new_pos = Vec3(
        pose.position.x + move * dx / dist,
        pose.position.y + move * dy / dist,
        pose.position.z + move * dz / dist,
    )
    return Pose(position=new_pos, yaw=new_yaw)


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    pose: Pose
    min_obstacle_distance: float
    planner_tag: str  # "init", "ok" or "no_path"


@dataclass
class Trajectory:
    samples: List[TrajectorySample] = field(default_factory=list)
    outcome: Optional[Outcome] = None

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def min_distance(self) -> float:
        return min(s.min_obstacle_distance for s in self.samples)

    @property
    def path_length(self) -> float:
        total = 0.0
        for a, b in zip(self.samples, self.samples[1:]):
            total += a.pose.position.distance_to(b.pose.position)
        return total

    def positions(self) -> List[Vec3]:
        return [s.pose.position for s in self.samples]


@dataclass(frozen=True)
class SimConfig:
    kinematics: KinematicParams = KinematicParams()
    intrinsics: CameraIntrinsics = CameraIntrinsics()
    extrinsics: CameraExtrinsics = CameraExtrinsics()
    planner: PlannerParams = PlannerParams()
    goal_tolerance_m: float = 0.5
    max_steps: int = 500
    cruise_altitude_m: float = 2.5
    cloud_stride: int = 4

    def __post_init__(self) -> None:
        if self.goal_tolerance_m <= 0:
            raise ValueError("goal_tolerance_m must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.cloud_stride < 1:
            raise ValueError("cloud_stride must be >= 1")
        if self.cruise_altitude_m <= 0:
            raise ValueError("cruise_altitude_m must be positive")


def _min_obstacle_distance(p: Vec3, obstacles: Sequence[CuboidObstacle]) -> float:
    if not obstacles:
        return math.inf
    return min(point_obstacle_distance(p, obs) for obs in obstacles)


def simulate(
    goal: Vec3,
    start: Pose,
    obstacles: Sequence[CuboidObstacle],
    cfg: SimConfig = SimConfig(),
) -> Trajectory:
    """Run the sense-plan-step loop until a terminal condition.

    Terminates on: goal within tolerance (REACHED_GOAL), step budget spent
    (TIMEOUT), repeated planner failure (PLANNER_STUCK), or contact with an
    obstacle (COLLISION).  The returned trajectory holds one sample per cycle
    plus the initial state; identical inputs yield identical trajectories.
    """
    d0 = _min_obstacle_distance(start.position, obstacles)
    if d0 <= 0.0:
        raise ValueError("start pose is inside an obstacle")

    traj = Trajectory()
    traj.samples.append(TrajectorySample(0.0, start, d0, "init"))
    if start.position.distance_to(goal) <= cfg.goal_tolerance_m:
        traj.outcome = Outcome.REACHED_GOAL
        return traj

    pose = start
    prev_target: Optional[Vec3] = None
    consecutive_failures = 0
    dt = cfg.kinematics.dt_s

    for step in range(1, cfg.max_steps + 1):
        img = render_depth(obstacles, pose, cfg.intrinsics, cfg.extrinsics)
        cloud = depth_to_cloud(img, pose, cfg.extrinsics, stride=cfg.cloud_stride)
        node, _ = plan(cloud, pose, goal, prev_target, cfg.planner)

        if node is None:
            consecutive_failures += 1
            d = _min_obstacle_distance(pose.position, obstacles)
            traj.samples.append(TrajectorySample(step * dt, pose, d, "no_path"))
            if consecutive_failures >= STUCK_AFTER_FAILURES:
                traj.outcome = Outcome.PLANNER_STUCK
                return traj
            continue

        consecutive_failures = 0
        prev_target = node.position
        pose = kinematic_step(pose, node.position, cfg.kinematics)
        d = _min_obstacle_distance(pose.position, obstacles)
        traj.samples.append(TrajectorySample(step * dt, pose, d, "ok"))

        if d <= 0.0:
            traj.outcome = Outcome.COLLISION
            return traj
        if pose.position.distance_to(goal) <= cfg.goal_tolerance_m:
            traj.outcome = Outcome.REACHED_GOAL
            return traj

    traj.outcome = Outcome.TIMEOUT
    return traj


def write_csv(traj: Trajectory, path: str) -> None:
    """Dump a trajectory as CSV, full float fidelity, outcome as a footer."""
    lines = ["t,x,y,z,yaw,min_dist"]
    for s in traj.samples:
        p = s.pose.position
        lines.append(
            f"{s.t!r},{p.x!r},{p.y!r},{p.z!r},{s.pose.yaw!r},{s.min_obstacle_distance!r}"
        )
    if traj.outcome is not None:
        lines.append(f"# outcome: {traj.outcome.value}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
