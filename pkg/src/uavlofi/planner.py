"""Reactive direction planner over a polar occupancy histogram.

The sensed cloud is binned into an azimuth/elevation grid of inverse-square
distance weights.  Free bins (weight under a threshold, elevation within a
flight band) become candidate directions; a best-first lookahead tree picks
the direction whose short-horizon path points most toward the goal while
staying smooth.  The caller receives the first tree edge (a depth-1 node)
to feed the vehicle's step controller, plus the whole tree for debugging.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .geometry import Pose, Vec3, angle_difference, wrap_angle
from .rendering import PointCloud

# Candidate directions are kept within this elevation band; the vehicle
# flies essentially level and must not dive into the ground or soar.
ELEVATION_CAP_DEG = 15.0

# Hard cap on tree expansions per plan; keeps worst-case latency bounded.
_MAX_EXPANSIONS = 96


@dataclass(frozen=True)
class PlannerParams:
    """Tuning knobs for histogram binning and tree search."""

    bin_resolution_deg: float = 6.0
    tree_depth: int = 4
    children_per_node: int = 8
    node_step_m: float = 2.0
    goal_weight: float = 10.0
    heading_weight: float = 1.0
    smoothness_weight: float = 1.0
    obstacle_inflation_m: float = 0.75
    occupancy_threshold: float = 0.1

    def __post_init__(self) -> None:
        if self.bin_resolution_deg <= 0 or self.bin_resolution_deg > 90:
            raise ValueError("bin_resolution_deg must be in (0, 90]")
        if self.tree_depth < 1 or self.children_per_node < 1:
            raise ValueError("tree_depth and children_per_node must be >= 1")
        if self.node_step_m <= 0:
            raise ValueError("node_step_m must be positive")
        if self.occupancy_threshold <= 0:
            raise ValueError("occupancy_threshold must be positive")

    @property
    def n_azimuth(self) -> int:
        return int(round(360.0 / self.bin_resolution_deg))

    @property
    def n_elevation(self) -> int:
        return int(round(180.0 / self.bin_resolution_deg))


@dataclass(frozen=True)
class PolarHistogram:
    """Occupancy weights over direction bins, as seen from `origin`."""

    weights: np.ndarray  # (n_azimuth, n_elevation)
    bin_resolution_deg: float
    origin: Vec3

    def bin_index(self, azimuth: float, elevation: float) -> Tuple[int, int]:
        """Bin holding a direction given in radians."""
        res = self.bin_resolution_deg
        n_az, n_el = self.weights.shape
        az_deg = math.degrees(wrap_angle(azimuth))
        ai = min(max(int(math.floor((az_deg + 180.0) / res)), 0), n_az - 1)
        el_deg = math.degrees(elevation)
        ei = min(max(int(math.floor((el_deg + 90.0) / res)), 0), n_el - 1)
        return ai, ei

    def bin_center(self, ai: int, ei: int) -> Tuple[float, float]:
        """(azimuth, elevation) radians at the centre of a bin."""
        res = self.bin_resolution_deg
        az = math.radians(-180.0 + (ai + 0.5) * res)
        el = math.radians(-90.0 + (ei + 0.5) * res)
        return wrap_angle(az), el

    def is_free(self, ai: int, ei: int, threshold: float) -> bool:
        return bool(self.weights[ai, ei] < threshold)


def build_histogram(cloud: PointCloud, origin: Vec3, params: PlannerParams) -> PolarHistogram:
    """Accumulate inverse-square weights (with inflation) into direction bins."""
    weights = kernels.accumulate_histogram(
        cloud.points,
        (origin.x, origin.y, origin.z),
        params.bin_resolution_deg,
        params.obstacle_inflation_m,
        params.n_azimuth,
        params.n_elevation,
    )
    return PolarHistogram(weights=weights, bin_resolution_deg=params.bin_resolution_deg, origin=origin)


def _candidate_arrays(
    hist: PolarHistogram, params: PlannerParams
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Free-bin indices and centre angles (radians), ordered by (az idx, el idx)."""
    res = hist.bin_resolution_deg
    n_az, n_el = hist.weights.shape
    el_centers = -90.0 + (np.arange(n_el) + 0.5) * res
    band = np.abs(el_centers) <= ELEVATION_CAP_DEG + 1e-9
    free = hist.weights < params.occupancy_threshold
    free[:, ~band] = False
    ai, ei = np.nonzero(free)  # row-major: az index outer, el index inner
    az_c = np.radians(-180.0 + (ai + 0.5) * res)
    el_c = np.radians(el_centers[ei])
    return ai, ei, az_c, el_c


def candidate_directions(hist: PolarHistogram, params: PlannerParams) -> List[Tuple[float, float]]:
    """Free directions as (azimuth, elevation) radians, deterministic order."""
    _, _, az_c, el_c = _candidate_arrays(hist, params)
    return [(wrap_angle(float(a)), float(e)) for a, e in zip(az_c, el_c)]


def angular_separation(dir_a: Tuple[float, float], dir_b: Tuple[float, float]) -> float:
    """Great-circle angle between two (azimuth, elevation) directions, [0, pi]."""
    az_a, el_a = dir_a
    az_b, el_b = dir_b
    d = math.cos(el_a) * math.cos(el_b) * math.cos(az_a - az_b) + math.sin(el_a) * math.sin(el_b)
    return math.acos(max(-1.0, min(1.0, d)))


def node_cost(
    node_dir: Tuple[float, float],
    goal_dir: Tuple[float, float],
    prev_heading: float,
    params: PlannerParams,
) -> float:
    """Cost of steering along `node_dir`.

    Weighed terms: angular separation from the goal direction, azimuth swing
    away from the previous heading, and elevation magnitude (level flight
    preferred).  All angles in radians.
    """
    goal_term = angular_separation(node_dir, goal_dir)
    heading_term = angle_difference(node_dir[0], prev_heading)
    elevation_term = abs(node_dir[1])
    return (
        params.goal_weight * goal_term
        + params.heading_weight * heading_term
        + params.smoothness_weight * elevation_term
    )


@dataclass(frozen=True)
class LookaheadNode:
    """One tree node: where an edge of the lookahead tree lands."""

    position: Vec3
    yaw: float  # azimuth of the edge that reached this node
    elevation: float  # elevation of that edge
    depth: int
    accumulated_cost: float
    parent: Optional[int]  # index into the tree list; None for the root


def _direction_to(src: Vec3, dst: Vec3) -> Tuple[float, float, float]:
    dx = dst.x - src.x
    dy = dst.y - src.y
    dz = dst.z - src.z
    horiz = math.hypot(dx, dy)
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    az = math.atan2(dy, dx) if horiz > 1e-12 else 0.0
    el = math.atan2(dz, horiz) if dist > 1e-12 else 0.0
    return az, el, dist


def _step_from(pos: Vec3, az: float, el: float, step: float) -> Vec3:
    ce = math.cos(el)
    return Vec3(
        pos.x + step * ce * math.cos(az),
        pos.y + step * ce * math.sin(az),
        pos.z + step * math.sin(el),
    )


def plan(
    cloud: PointCloud,
    pose: Pose,
    goal: Vec3,
    prev_target: Optional[Vec3],
    params: PlannerParams,
) -> Tuple[Optional[LookaheadNode], List[LookaheadNode]]:
    """Choose the next steering target.

    Grows the lookahead tree by greedy descent with backtracking: every
    expanded node re-bins the same cloud from its own position and branches
    into its `children_per_node` cheapest free directions, stepping
    `node_step_m` each; the deepest pending node (cost-ordered within a
    depth) is expanded next, so a typical plan runs straight down to a leaf.
    Among all generated full-depth leaves the one with the lowest total
    (accumulated cost plus goal_weight times the remaining angle to goal)
    wins, and its depth-1 ancestor is returned.  Returns (None, tree) when
    the vehicle is boxed in at the root.

    Args:
        cloud: world-frame sensed points.
        pose: current vehicle pose.
        goal: goal position.
        prev_target: previous steering target, for heading continuity.
        params: planner tuning.

    Returns:
        (next_node, tree): the steering node (or None) and all generated nodes.
    """
    root = LookaheadNode(
        position=pose.position,
        yaw=pose.yaw,
        elevation=0.0,
        depth=0,
        accumulated_cost=0.0,
        parent=None,
    )
    tree: List[LookaheadNode] = [root]

    root_prev_heading = pose.yaw
    if prev_target is not None and pose.position.horizontal_distance_to(prev_target) > 1e-9:
        root_prev_heading = math.atan2(
            prev_target.y - pose.position.y, prev_target.x - pose.position.x
        )

    root_hist = build_histogram(cloud, pose.position, params)
    goal_az, goal_el, goal_dist = _direction_to(pose.position, goal)

    # Final approach: snap straight onto a close, unobstructed goal.
    if goal_dist <= params.node_step_m:
        ai, ei = root_hist.bin_index(goal_az, goal_el)
        if root_hist.is_free(ai, ei, params.occupancy_threshold):
            node = LookaheadNode(
                position=goal,
                yaw=goal_az,
                elevation=goal_el,
                depth=1,
                accumulated_cost=0.0,
                parent=0,
            )
            tree.append(node)
            return node, tree

    # Heap key: deepest first, then the selection total (accumulated cost
    # plus goal_weight * remaining angle to goal), then insertion order.
    heap: List[Tuple[int, float, int, int]] = []
    seq = 0
    heapq.heappush(heap, (0, 0.0, seq, 0))
    seq += 1
    leaves: List[Tuple[float, int]] = []  # (selection total, node index)
    best_fallback: Optional[Tuple[float, int]] = None
    expansions = 0

    while heap:
        _, _, _, idx = heapq.heappop(heap)
        node = tree[idx]
        if node.depth == params.tree_depth:
            break  # a chain reached full depth; its cohort is in `leaves`
        if expansions >= _MAX_EXPANSIONS:
            break
        expansions += 1

        hist = root_hist if idx == 0 else build_histogram(cloud, node.position, params)
        ai, ei, az_c, el_c = _candidate_arrays(hist, params)
        if ai.size == 0:
            if idx == 0:
                return None, tree
            continue

        g_az, g_el, _ = _direction_to(node.position, goal)
        prev_heading = root_prev_heading if idx == 0 else node.yaw

        # When the bin containing the goal direction is itself free, represent
        # that candidate by the exact goal direction instead of the bin centre.
        # Chasing alternating 6 deg centres around an on-edge goal bearing
        # makes the yaw gate bleed speed on a perfectly clear straight line.
        g_ai, g_ei = hist.bin_index(g_az, g_el)
        exact = np.nonzero((ai == g_ai) & (ei == g_ei))[0]
        if exact.size:
            az_c[exact[0]] = g_az
            el_c[exact[0]] = g_el

        ce = np.cos(el_c)
        dot = ce * math.cos(g_el) * np.cos(az_c - g_az) + np.sin(el_c) * math.sin(g_el)
        goal_term = np.arccos(np.clip(dot, -1.0, 1.0))
        head = np.abs(np.remainder(az_c - prev_heading + math.pi, 2.0 * math.pi) - math.pi)
        costs = (
            params.goal_weight * goal_term
            + params.heading_weight * head
            + params.smoothness_weight * np.abs(el_c)
        )
        order = np.lexsort((ei, ai, costs))[: params.children_per_node]

        for j in order:
            az = wrap_angle(float(az_c[j]))
            el = float(el_c[j])
            child_pos = _step_from(node.position, az, el, params.node_step_m)
            child = LookaheadNode(
                position=child_pos,
                yaw=az,
                elevation=el,
                depth=node.depth + 1,
                accumulated_cost=node.accumulated_cost + float(costs[j]),
                parent=idx,
            )
            child_idx = len(tree)
            tree.append(child)
            c_az, c_el, _ = _direction_to(child_pos, goal)
            total = child.accumulated_cost + params.goal_weight * angular_separation(
                (az, el), (c_az, c_el)
            )
            heapq.heappush(heap, (-child.depth, total, seq, child_idx))
            seq += 1
            if child.depth == params.tree_depth:
                leaves.append((total, child_idx))
            if best_fallback is None or (total, child_idx) < best_fallback:
                best_fallback = (total, child_idx)

    if leaves:
        _, best_idx = min(leaves)
        return _first_edge(tree, best_idx), tree
    if best_fallback is not None:
        return _first_edge(tree, best_fallback[1]), tree
    return None, tree


def _first_edge(tree: Sequence[LookaheadNode], idx: int) -> LookaheadNode:
    """Walk back to the depth-1 ancestor (the edge leaving the root)."""
    node = tree[idx]
    while node.depth > 1:
        assert node.parent is not None
        node = tree[node.parent]
    return node
