"""Constrained pseudo-random generation of two-obstacle test scenarios.

Given a mission that crosses a rectangular arena, the generator picks the
flight segment of interest (SoI), normalizes it into a canonical frame
(travelling +y, sloping east) with axis reflections, samples a first oblong
obstacle that obstructs the segment at an obtuse angle with a 1/3 : 2/3
split, derives a perpendicular second obstacle placed a controlled gap
beyond the short arm, and maps everything back to the original frame.

All randomness flows through one numpy Generator, three uniforms per first
obstacle attempt plus one per gap draw, so equal seeds give equal streams
and longer runs extend shorter ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .geometry import (
    ArenaRect,
    CuboidObstacle,
    FlightSegment,
    Vec3,
    base_vertices,
    contains,
    point_obstacle_distance,
    wrap_angle,
)

# Margin keeping sampled geometry strictly inside the arena; also the slack
# used when clamping the second obstacle back from a border.
_EDGE_MARGIN = 1e-9


class NoSegmentOfInterest(ValueError):
    """No mission leg crosses both horizontal arena borders."""


class SamplingExhausted(RuntimeError):
    """Rejection sampling ran out of attempts."""


class PlacementFailed(RuntimeError):
    """No valid second-obstacle position for this draw."""


@dataclass(frozen=True)
class Mission:
    """Flight plan: start, intermediate waypoints, landing point."""

    start: Vec3
    waypoints: Tuple[Vec3, ...]
    landing: Vec3

    def __post_init__(self) -> None:
        if len(self.waypoints) < 1:
            raise ValueError("mission needs at least one waypoint")
        pts = self.points()
        for a, b in zip(pts, pts[1:]):
            if a.distance_to(b) <= 0.0:
                raise ValueError("consecutive mission points must be distinct")

    def points(self) -> List[Vec3]:
        return [self.start, *self.waypoints, self.landing]

    def legs(self) -> List[FlightSegment]:
        pts = self.points()
        return [FlightSegment(a, b) for a, b in zip(pts, pts[1:])]


@dataclass(frozen=True)
class GeneratorConfig:
    arena: ArenaRect = ArenaRect(x_min=-20.0, x_max=20.0, y_min=-20.0, y_max=20.0)
    diagonal_range_m: Tuple[float, float] = (6.0, 18.0)
    obstacle_width_m: float = 2.0
    obstacle_height_m: float = 20.0
    # Angle between SoI travel direction and the long-arm axis, degrees;
    # kept inside (90, 180) so the crossing is always obtuse.
    rotation_offset_range_deg: Tuple[float, float] = (95.0, 160.0)
    gap_range_m: Tuple[float, float] = (3.0, 8.0)
    length_ratio: float = 1.75
    rng_seed: int = 0
    rejection_budget: int = 1000
    # Where along the short arm the second obstacle anchors: 1 = at the tip.
    blocker_anchor: float = 1.0

    def __post_init__(self) -> None:
        d_lo, d_hi = self.diagonal_range_m
        if not (0 < self.obstacle_width_m < d_lo <= d_hi):
            raise ValueError("need 0 < width < diagonal min <= diagonal max")
        if self.obstacle_height_m <= 0:
            raise ValueError("obstacle_height_m must be positive")
        o_lo, o_hi = self.rotation_offset_range_deg
        if not (90.0 < o_lo <= o_hi < 180.0):
            raise ValueError("rotation offsets must lie within (90, 180) degrees")
        g_lo, g_hi = self.gap_range_m
        if not (0 < g_lo <= g_hi):
            raise ValueError("gap range must be positive and ordered")
        if self.length_ratio <= 0:
            raise ValueError("length_ratio must be positive")
        if self.rejection_budget < 1:
            raise ValueError("rejection_budget must be >= 1")
        if not 0.0 <= self.blocker_anchor <= 1.0:
            raise ValueError("blocker_anchor must be in [0, 1]")


@dataclass(frozen=True)
class CanonicalTransform:
    """Composition of arena-centre reflections, original frame -> canonical.

    Each op is self-inverse and they commute, so the inverse applies the
    same ops in reverse order.
    """

    ops: Tuple[str, ...]  # drawn from ("refl_h", "refl_v")
    center_x: float
    center_y: float

    def apply_point(self, p: Vec3) -> Vec3:
        x, y = p.x, p.y
        for op in self.ops:
            if op == "refl_h":
                y = 2.0 * self.center_y - y
            else:
                x = 2.0 * self.center_x - x
        return Vec3(x, y, p.z)

    def invert_point(self, p: Vec3) -> Vec3:
        x, y = p.x, p.y
        for op in reversed(self.ops):
            if op == "refl_h":
                y = 2.0 * self.center_y - y
            else:
                x = 2.0 * self.center_x - x
        return Vec3(x, y, p.z)

    def apply_segment(self, seg: FlightSegment) -> FlightSegment:
        return FlightSegment(self.apply_point(seg.start), self.apply_point(seg.end))

    def invert_obstacle(self, obs: CuboidObstacle) -> CuboidObstacle:
        x, y, r = obs.center_x, obs.center_y, obs.rotation
        for op in reversed(self.ops):
            if op == "refl_h":
                y = 2.0 * self.center_y - y
                r = -r
            else:
                x = 2.0 * self.center_x - x
                r = math.pi - r
        return CuboidObstacle(x, y, obs.length, obs.width, obs.height, wrap_angle(r))


@dataclass(frozen=True)
class TestCase:
    """One generated scenario, expressed in the original mission frame."""

    __test__ = False  # keep pytest from collecting this as a test class

    mission: Mission
    obstacles: Tuple[CuboidObstacle, CuboidObstacle]
    soi: FlightSegment
    seed: int
    index: int
    canonical_transform: Tuple[str, ...]


def find_soi(mission: Mission, arena: ArenaRect) -> FlightSegment:
    """Pick the mission leg that spans the arena nearest its vertical midline.

    A leg qualifies when its supporting line, clipped to the arena, runs
    border to border (enters through y_min and leaves through y_max or vice
    versa).  Among qualifiers the clipped segment whose midpoint is closest
    to x = centre wins; the returned segment preserves the leg's travel
    direction.
    """
    mid_x = arena.center_x
    best: Optional[FlightSegment] = None
    best_score = math.inf
    for leg in mission.legs():
        dy = leg.end.y - leg.start.y
        if dy == 0.0:
            continue
        x_bot = leg.x_at_y(arena.y_min)
        x_top = leg.x_at_y(arena.y_max)
        if not (arena.x_min <= x_bot <= arena.x_max and arena.x_min <= x_top <= arena.x_max):
            continue
        bot = Vec3(x_bot, arena.y_min, leg.z_at_y(arena.y_min))
        top = Vec3(x_top, arena.y_max, leg.z_at_y(arena.y_max))
        clipped = FlightSegment(bot, top) if dy > 0 else FlightSegment(top, bot)
        score = abs(0.5 * (x_bot + x_top) - mid_x)
        if score < best_score:
            best = clipped
            best_score = score
    if best is None:
        raise NoSegmentOfInterest(
            f"no mission leg crosses both arena borders y = {arena.y_min} and y = {arena.y_max}"
        )
    return best


def canonicalize(soi: FlightSegment, arena: ArenaRect) -> Tuple[CanonicalTransform, FlightSegment]:
    """Reflect the SoI into the canonical frame: travel +y, slope dx >= 0."""
    ops: List[str] = []
    if soi.end.y - soi.start.y < 0.0:
        ops.append("refl_h")
    if soi.end.x - soi.start.x < 0.0:
        ops.append("refl_v")
    tf = CanonicalTransform(tuple(ops), arena.center_x, arena.center_y)
    return tf, tf.apply_segment(soi)


def _soi_border_distances(soi: FlightSegment, arena: ArenaRect) -> Tuple[float, float]:
    """Min horizontal distance from the clipped SoI to the left/right borders."""
    lo = min(soi.start.x, soi.end.x)
    hi = max(soi.start.x, soi.end.x)
    return lo - arena.x_min, arena.x_max - hi


def _first_from_draw(
    d: float,
    offset_deg: float,
    y: float,
    soi: FlightSegment,
    arena: ArenaRect,
    cfg: GeneratorConfig,
) -> Optional[CuboidObstacle]:
    """Build the first obstacle from one (d, offset, y) draw, or reject."""
    w = cfg.obstacle_width_m
    left, right = _soi_border_distances(soi, arena)
    if not (d / 3.0 < left and 2.0 * d / 3.0 < right):
        return None
    half_d = 0.5 * d
    if not (y + half_d < arena.y_max and y - half_d > arena.y_min):
        return None

    length = math.sqrt(d * d - w * w)
    tx, ty = soi.direction2d()
    off = math.radians(offset_deg)
    # Long-arm axis: travel direction rotated clockwise by the offset, so the
    # long arm points right of travel and meets the SoI at the obtuse angle.
    ux = tx * math.cos(off) + ty * math.sin(off)
    uy = -tx * math.sin(off) + ty * math.cos(off)
    split_x = soi.x_at_y(y)
    cx = split_x + (length / 6.0) * ux
    cy = y + (length / 6.0) * uy

    # Keep the centre a half-diagonal clear of every border so the footprint
    # stays inside the arena no matter how the base is rotated.
    m = half_d + _EDGE_MARGIN
    if not (arena.x_min + m <= cx <= arena.x_max - m and arena.y_min + m <= cy <= arena.y_max - m):
        return None

    rotation = math.atan2(uy, ux)
    return CuboidObstacle(cx, cy, length, w, cfg.obstacle_height_m, rotation)


def sample_first_obstacle(
    soi: FlightSegment,
    arena: ArenaRect,
    cfg: GeneratorConfig,
    rng: np.random.Generator,
) -> CuboidObstacle:
    """Rejection-sample the first obstacle on a canonical SoI.

    Each attempt consumes exactly three uniforms (diagonal, rotation offset,
    y coordinate) whether or not it is accepted.
    """
    d_lo, d_hi = cfg.diagonal_range_m
    o_lo, o_hi = cfg.rotation_offset_range_deg
    for _ in range(cfg.rejection_budget):
        d = float(rng.uniform(d_lo, d_hi))
        off = float(rng.uniform(o_lo, o_hi))
        y = float(rng.uniform(arena.y_min, arena.y_max))
        obs = _first_from_draw(d, off, y, soi, arena, cfg)
        if obs is not None:
            return obs
    raise SamplingExhausted(
        f"no acceptable first obstacle in {cfg.rejection_budget} draws"
    )


def _shift_inside(obs: CuboidObstacle, arena: ArenaRect) -> CuboidObstacle:
    """Translate an obstacle inward until its base sits inside the arena."""
    verts = base_vertices(obs)
    dx = 0.0
    if verts[:, 0].min() < arena.x_min:
        dx = arena.x_min - float(verts[:, 0].min()) + _EDGE_MARGIN
    elif verts[:, 0].max() > arena.x_max:
        dx = arena.x_max - float(verts[:, 0].max()) - _EDGE_MARGIN
    dy = 0.0
    if verts[:, 1].min() < arena.y_min:
        dy = arena.y_min - float(verts[:, 1].min()) + _EDGE_MARGIN
    elif verts[:, 1].max() > arena.y_max:
        dy = arena.y_max - float(verts[:, 1].max()) - _EDGE_MARGIN
    if dx == 0.0 and dy == 0.0:
        return obs
    return CuboidObstacle(
        obs.center_x + dx, obs.center_y + dy, obs.length, obs.width, obs.height, obs.rotation
    )


def place_second_obstacle(
    first: CuboidObstacle,
    soi: FlightSegment,
    arena: ArenaRect,
    cfg: GeneratorConfig,
    rng: np.random.Generator,
) -> CuboidObstacle:
    """Derive the perpendicular blocker behind the first obstacle's short arm.

    The centre starts at the short-arm anchor and slides along the SoI travel
    direction until the base-to-base gap reaches a uniform draw from the
    configured range (the gap grows monotonically, so bisection nails it).
    Positions poking outside the arena are shifted back in, which may shrink
    the realized gap; overlap after shifting fails the placement.
    """
    gap = float(rng.uniform(*cfg.gap_range_m))

    ux, uy = math.cos(first.rotation), math.sin(first.rotation)
    half_l = 0.5 * first.length
    anchor_x = first.center_x - cfg.blocker_anchor * half_l * ux
    anchor_y = first.center_y - cfg.blocker_anchor * half_l * uy
    tx, ty = soi.direction2d()

    l2 = cfg.length_ratio * first.length
    r2 = wrap_angle(first.rotation + 0.5 * math.pi)
    seed_obs = CuboidObstacle(anchor_x, anchor_y, l2, cfg.obstacle_width_m, cfg.obstacle_height_m, r2)
    va = base_vertices(first)
    vb0 = base_vertices(seed_obs)

    def gap_at(s: float) -> float:
        vb = vb0 + np.array([s * tx, s * ty])
        return kernels.rect_distance_verts(va, vb)

    lo = 0.0
    hi = gap + 0.5 * first.diagonal + 0.5 * math.hypot(l2, cfg.obstacle_width_m) + 1.0
    if gap_at(hi) < gap:
        raise PlacementFailed("gap bracket failed")  # unreachable by triangle inequality
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if gap_at(mid) < gap:
            lo = mid
        else:
            hi = mid
    s_star = hi  # gap_at(hi) >= gap throughout

    second = CuboidObstacle(
        anchor_x + s_star * tx,
        anchor_y + s_star * ty,
        l2,
        cfg.obstacle_width_m,
        cfg.obstacle_height_m,
        r2,
    )
    if not contains(arena, second):
        second = _shift_inside(second, arena)
        if not contains(arena, second):
            raise PlacementFailed("second obstacle cannot fit inside the arena")
    if kernels.rect_distance_verts(va, base_vertices(second)) <= _EDGE_MARGIN:
        raise PlacementFailed("second obstacle collides with the first after clamping")
    return second


def generate(
    mission: Mission,
    arena: ArenaRect,
    cfg: GeneratorConfig,
    count: int,
) -> Iterator[TestCase]:
    """Yield `count` valid test cases, deterministically from cfg.rng_seed.

    Raises NoSegmentOfInterest immediately when the mission never spans the
    arena; raises SamplingExhausted when a case burns through the rejection
    budget.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    soi = find_soi(mission, arena)
    tf, soi_c = canonicalize(soi, arena)

    def _stream() -> Iterator[TestCase]:
        rng = np.random.default_rng(cfg.rng_seed)
        d_lo, d_hi = cfg.diagonal_range_m
        o_lo, o_hi = cfg.rotation_offset_range_deg
        for index in range(count):
            for _ in range(cfg.rejection_budget):
                d = float(rng.uniform(d_lo, d_hi))
                off = float(rng.uniform(o_lo, o_hi))
                y = float(rng.uniform(arena.y_min, arena.y_max))
                first_c = _first_from_draw(d, off, y, soi_c, arena, cfg)
                if first_c is None:
                    continue
                try:
                    second_c = place_second_obstacle(first_c, soi_c, arena, cfg, rng)
                except PlacementFailed:
                    continue
                first = tf.invert_obstacle(first_c)
                second = tf.invert_obstacle(second_c)
                if not (contains(arena, first) and contains(arena, second)):
                    continue
                blocked = any(
                    point_obstacle_distance(p, obs) <= 0.0
                    for p in (mission.start, mission.landing)
                    for obs in (first, second)
                )
                if blocked:
                    continue
                yield TestCase(
                    mission=mission,
                    obstacles=(first, second),
                    soi=soi,
                    seed=cfg.rng_seed,
                    index=index,
                    canonical_transform=tf.ops,
                )
                break
            else:
                raise SamplingExhausted(
                    f"case {index}: no valid scenario in {cfg.rejection_budget} attempts"
                )

    return _stream()


# ---------------------------------------------------------------------------
# JSON serialization (the hand-off format; key order is fixed)

def _vec_list(v: Vec3) -> List[float]:
    return [v.x, v.y, v.z]


def _vec_from(raw: Sequence[float]) -> Vec3:
    return Vec3(float(raw[0]), float(raw[1]), float(raw[2]))


def case_to_dict(tc: TestCase) -> Dict:
    return {
        "mission": {
            "start": _vec_list(tc.mission.start),
            "waypoints": [_vec_list(w) for w in tc.mission.waypoints],
            "landing": _vec_list(tc.mission.landing),
        },
        "obstacles": [
            {
                "x": o.center_x,
                "y": o.center_y,
                "l": o.length,
                "w": o.width,
                "h": o.height,
                "r": o.rotation,
            }
            for o in tc.obstacles
        ],
        "soi": {"start": _vec_list(tc.soi.start), "end": _vec_list(tc.soi.end)},
        "seed": tc.seed,
        "index": tc.index,
        "canonical_transform": list(tc.canonical_transform),
    }


def case_from_dict(raw: Dict) -> TestCase:
    mission = Mission(
        start=_vec_from(raw["mission"]["start"]),
        waypoints=tuple(_vec_from(w) for w in raw["mission"]["waypoints"]),
        landing=_vec_from(raw["mission"]["landing"]),
    )
    obstacles = tuple(
        CuboidObstacle(
            float(o["x"]), float(o["y"]), float(o["l"]), float(o["w"]), float(o["h"]), float(o["r"])
        )
        for o in raw["obstacles"]
    )
    if len(obstacles) != 2:
        raise ValueError("a test case carries exactly two obstacles")
    soi = FlightSegment(_vec_from(raw["soi"]["start"]), _vec_from(raw["soi"]["end"]))
    return TestCase(
        mission=mission,
        obstacles=obstacles,  # type: ignore[arg-type]
        soi=soi,
        seed=int(raw["seed"]),
        index=int(raw["index"]),
        canonical_transform=tuple(raw.get("canonical_transform", [])),
    )


def case_to_json(tc: TestCase) -> str:
    return json.dumps(case_to_dict(tc), indent=2) + "\n"
