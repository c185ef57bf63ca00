"""Planar-rotated cuboid geometry shared by the renderer, planner, and generator.

Conventions used across the package:

* World frame: x east, y north, z up.  The ground is the plane z = 0.
* Yaw is measured from the +x axis, counter-clockwise, in radians,
  normalized to (-pi, pi].
* Obstacles are cuboids standing on the ground: a rotated rectangle base
  (length >= width) extruded from z = 0 up to z = height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    return a - TWO_PI * math.ceil((a - math.pi) / TWO_PI)


def angle_difference(a: float, b: float) -> float:
    """Shortest absolute difference between two angles, in [0, pi]."""
    return abs(wrap_angle(a - b))


@dataclass(frozen=True)
class Vec3:
    """Immutable 3-D point/vector."""

    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def horizontal_distance_to(self, other: "Vec3") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class Pose:
    """Position plus heading.  Yaw is normalized at construction."""

    position: Vec3
    yaw: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))


@dataclass(frozen=True)
class ArenaRect:
    """Axis-aligned operating area on the ground plane (borders inclusive)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate arena: {self}")

    @property
    def center_x(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    @property
    def center_y(self) -> float:
        return 0.5 * (self.y_min + self.y_max)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class FlightSegment:
    """Directed straight stretch of a mission (start -> end)."""

    start: Vec3
    end: Vec3

    def __post_init__(self) -> None:
        if self.start == self.end:
            raise ValueError("flight segment endpoints must be distinct")

    @property
    def bearing(self) -> float:
        """Horizontal travel direction, radians from +x."""
        return math.atan2(self.end.y - self.start.y, self.end.x - self.start.x)

    def direction2d(self) -> Tuple[float, float]:
        """Unit horizontal travel direction (falls back on +x for vertical climbs)."""
        dx = self.end.x - self.start.x
        dy = self.end.y - self.start.y
        n = math.hypot(dx, dy)
        if n < 1e-12:
            return (1.0, 0.0)
        return (dx / n, dy / n)

    def x_at_y(self, y: float) -> float:
        """x of the segment's supporting line at a given y (line must not be horizontal)."""
        dy = self.end.y - self.start.y
        if abs(dy) < 1e-12:
            raise ValueError("segment line is horizontal; x is not a function of y")
        t = (y - self.start.y) / dy
        return self.start.x + t * (self.end.x - self.start.x)

    def z_at_y(self, y: float) -> float:
        dy = self.end.y - self.start.y
        if abs(dy) < 1e-12:
            raise ValueError("segment line is horizontal; z is not a function of y")
        t = (y - self.start.y) / dy
        return self.start.z + t * (self.end.z - self.start.z)


@dataclass(frozen=True)
class CuboidObstacle:
    """Ground-standing box: rotated rectangular base extruded to `height`.

    `rotation` orients the long axis of the base, radians CCW from +x.
    The base occupies z in [0, height].
    """

    center_x: float
    center_y: float
    length: float
    width: float
    height: float
    rotation: float

    def __post_init__(self) -> None:
        if not (self.length >= self.width > 0.0):
            raise ValueError(f"need length >= width > 0, got l={self.length} w={self.width}")
        if not self.height > 0.0:
            raise ValueError(f"need height > 0, got {self.height}")
        for v in (self.center_x, self.center_y, self.length, self.width, self.height, self.rotation):
            if not math.isfinite(v):
                raise ValueError("obstacle parameters must be finite")
        object.__setattr__(self, "rotation", wrap_angle(float(self.rotation)))

    @property
    def diagonal(self) -> float:
        return math.hypot(self.length, self.width)

    def axis_direction(self) -> Tuple[float, float]:
        """Unit vector along the long base axis, as oriented by `rotation`."""
        return (math.cos(self.rotation), math.sin(self.rotation))


def base_vertices(obs: CuboidObstacle) -> np.ndarray:
    """Corners of the base rectangle, CCW, as a (4, 2) array.

    Order starts at the (+length/2, +width/2) corner of the local frame.
    """
    c = math.cos(obs.rotation)
    s = math.sin(obs.rotation)
    hl = 0.5 * obs.length
    hw = 0.5 * obs.width
    local = np.array([(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)], dtype=np.float64)
    rot = np.array([(c, -s), (s, c)], dtype=np.float64)
    return local @ rot.T + np.array([obs.center_x, obs.center_y])


def point_obstacle_distance(p: Vec3, obs: CuboidObstacle, planar: bool = False) -> float:
    """Euclidean distance from a point to the solid cuboid (0 when inside).

    Args:
        p: query point, world frame.
        obs: the cuboid.
        planar: if True, ignore z and measure against the base rectangle only.

    Returns:
        Non-negative distance in metres.
    """
    c = math.cos(obs.rotation)
    s = math.sin(obs.rotation)
    px = p.x - obs.center_x
    py = p.y - obs.center_y
    lx = c * px + s * py
    ly = -s * px + c * py
    dx = max(abs(lx) - 0.5 * obs.length, 0.0)
    dy = max(abs(ly) - 0.5 * obs.width, 0.0)
    if planar:
        return math.hypot(dx, dy)
    dz = max(-p.z, p.z - obs.height, 0.0)
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def segment_line_intersection(
    seg: FlightSegment, obs: CuboidObstacle
) -> Optional[Tuple[Tuple[float, float], float]]:
    """Intersection of a flight segment with the obstacle's long base axis.

    The long axis is treated as a finite ground-plane segment of length
    `obs.length` centred on the base centre, in the direction given by
    `obs.rotation`.  Both the crossing point and the angle between the
    segment's travel direction and that axis direction are returned.

    Returns:
        ((x, y), angle) with angle in (0, pi), or None when the segment
        misses the axis or runs parallel to it.
    """
    ux, uy = seg.direction2d()
    ax, ay = obs.axis_direction()
    # seg.start + t*(seg.end-seg.start) == centre + s*axis, t in [0,1], |s| <= length/2
    ex = seg.end.x - seg.start.x
    ey = seg.end.y - seg.start.y
    det = ex * (-ay) - (-ax) * ey
    if abs(det) < 1e-12:
        return None
    rx = obs.center_x - seg.start.x
    ry = obs.center_y - seg.start.y
    t = (rx * (-ay) + ax * ry) / det
    s = (ex * ry - ey * rx) / det
    if not (0.0 <= t <= 1.0 and abs(s) <= 0.5 * obs.length):
        return None
    x = seg.start.x + t * ex
    y = seg.start.y + t * ey
    cross = ux * ay - uy * ax
    dot = ux * ax + uy * ay
    angle = math.atan2(abs(cross), dot)
    return ((x, y), angle)


def contains(arena: ArenaRect, obs: CuboidObstacle) -> bool:
    """True when all four base vertices lie within the arena (borders inclusive)."""
    verts = base_vertices(obs)
    return bool(
        np.all(verts[:, 0] >= arena.x_min)
        and np.all(verts[:, 0] <= arena.x_max)
        and np.all(verts[:, 1] >= arena.y_min)
        and np.all(verts[:, 1] <= arena.y_max)
    )


def _point_segment_distance(px, py, ax, ay, bx, by) -> float:
    abx = bx - ax
    aby = by - ay
    apx = px - ax
    apy = py - ay
    denom = abx * abx + aby * aby
    t = 0.0 if denom < 1e-18 else max(0.0, min(1.0, (apx * abx + apy * aby) / denom))
    cx = ax + t * abx
    cy = ay + t * aby
    return math.hypot(px - cx, py - cy)


def _point_in_convex(px, py, verts: np.ndarray) -> bool:
    # verts CCW; inside when left of (or on) every edge
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if (bx - ax) * (py - ay) - (by - ay) * (px - ax) < -1e-12:
            return False
    return True


def _segments_cross(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    def orient(ox, oy, px, py, qx, qy):
        return (px - ox) * (qy - oy) - (py - oy) * (qx - ox)

    d1 = orient(cx, cy, dx, dy, ax, ay)
    d2 = orient(cx, cy, dx, dy, bx, by)
    d3 = orient(ax, ay, bx, by, cx, cy)
    d4 = orient(ax, ay, bx, by, dx, dy)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    if _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    return min(
        _point_segment_distance(ax, ay, cx, cy, dx, dy),
        _point_segment_distance(bx, by, cx, cy, dx, dy),
        _point_segment_distance(cx, cy, ax, ay, bx, by),
        _point_segment_distance(dx, dy, ax, ay, bx, by),
    )


def rect_rect_distance(a: CuboidObstacle, b: CuboidObstacle) -> float:
    """Minimal distance between two base rectangles (0 when they overlap)."""
    va = base_vertices(a)
    vb = base_vertices(b)
    # containment covers one-inside-the-other; edge pairs cover everything else
    if _point_in_convex(va[0, 0], va[0, 1], vb) or _point_in_convex(vb[0, 0], vb[0, 1], va):
        return 0.0
    best = math.inf
    for i in range(4):
        ax, ay = va[i]
        bx, by = va[(i + 1) % 4]
        for j in range(4):
            cx, cy = vb[j]
            dx, dy = vb[(j + 1) % 4]
            d = _segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy)
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return best


def rects_overlap(a: CuboidObstacle, b: CuboidObstacle) -> bool:
    """True when the base rectangles intersect or touch."""
    return rect_rect_distance(a, b) <= 1e-12
