"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written with different tools than the
production code: shapely for polygon work, matrix transforms and numpy
broadcasting for the ray caster, quadrature for the acceptance-rate CDF.
Keep it slow and obvious.
"""

from __future__ import annotations

import math

import numpy as np
from shapely.geometry import Polygon

from uavlofi.geometry import CuboidObstacle, Pose, Vec3
from uavlofi.rendering import CameraExtrinsics, CameraIntrinsics


def rot2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def box_corners(obs: CuboidObstacle) -> np.ndarray:
    """Footprint corners, (4, 2), computed via an explicit rotation matrix."""
    half = np.array(
        [
            [obs.length / 2.0, obs.width / 2.0],
            [-obs.length / 2.0, obs.width / 2.0],
            [-obs.length / 2.0, -obs.width / 2.0],
            [obs.length / 2.0, -obs.width / 2.0],
        ]
    )
    centre = np.array([obs.center_x, obs.center_y])
    return half @ rot2d(obs.rotation).T + centre


def box_polygon(obs: CuboidObstacle) -> Polygon:
    return Polygon(box_corners(obs))


def polygon_gap(a: CuboidObstacle, b: CuboidObstacle) -> float:
    return box_polygon(a).distance(box_polygon(b))


def boxes_disjoint(a: CuboidObstacle, b: CuboidObstacle) -> bool:
    """Separating-axis test on the two footprints."""
    ca, cb = box_corners(a), box_corners(b)
    for theta in (a.rotation, a.rotation + math.pi / 2, b.rotation, b.rotation + math.pi / 2):
        axis = np.array([math.cos(theta), math.sin(theta)])
        pa = ca @ axis
        pb = cb @ axis
        if pa.max() < pb.min() or pb.max() < pa.min():
            return True
    return False


def surface_distance(point: np.ndarray, obstacles) -> float:
    """Distance from a 3-D point to the nearest rendered surface.

    Surfaces are the obstacle boxes and the ground plane z = 0.
    """
    x, y, z = float(point[0]), float(point[1]), float(point[2])
    best = abs(z)
    for obs in obstacles:
        lx = (x - obs.center_x) * math.cos(obs.rotation) + (y - obs.center_y) * math.sin(obs.rotation)
        ly = -(x - obs.center_x) * math.sin(obs.rotation) + (y - obs.center_y) * math.cos(obs.rotation)
        dx = abs(lx) - obs.length / 2.0
        dy = abs(ly) - obs.width / 2.0
        dz_out = max(-z, z - obs.height)
        if dx <= 0.0 and dy <= 0.0 and 0.0 <= z <= obs.height:
            # inside the solid: distance to the closest face
            d = min(-dx, -dy, z, obs.height - z)
        else:
            d = math.sqrt(max(dx, 0.0) ** 2 + max(dy, 0.0) ** 2 + max(dz_out, 0.0) ** 2)
        best = min(best, d)
    return best


def raycast_depth_oracle(
    obstacles,
    pose: Pose,
    intr: CameraIntrinsics,
    extr: CameraExtrinsics = CameraExtrinsics(),
) -> np.ndarray:
    """Slab-method depth render, broadcast over the whole image at once.

    Depth is the ray parameter along the unnormalised direction
    dir = dcx*right + dcy*down + forward; a hit is kept only while the
    Euclidean distance t*|dir| stays within the camera range.
    """
    cp, sp = math.cos(extr.mount_pitch), math.sin(extr.mount_pitch)
    cy, sy = math.cos(pose.yaw), math.sin(pose.yaw)
    fwd = np.array([cy * cp, sy * cp, sp])
    rgt = np.array([sy, -cy, 0.0])
    dwn = np.array([sp * cy, sp * sy, -cp])
    t = extr.mount_translation
    origin = np.array(
        [
            pose.position.x + t.x * cy - t.y * sy,
            pose.position.y + t.x * sy + t.y * cy,
            pose.position.z + t.z,
        ]
    )

    u = np.arange(intr.width, dtype=np.float64)
    v = np.arange(intr.height, dtype=np.float64)
    dcx = (u[None, :] - intr.cx) / intr.fx
    dcy = (v[:, None] - intr.cy) / intr.fy
    dirs = (
        dcx[..., None] * rgt[None, None, :]
        + dcy[..., None] * dwn[None, None, :]
        + fwd[None, None, :]
    )
    norms = np.linalg.norm(dirs, axis=-1)

    depth = np.full((intr.height, intr.width), np.inf)

    # ground plane z = 0
    dz = dirs[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        tg = np.where(np.abs(dz) > 0.0, -origin[2] / dz, np.inf)
    ok = (tg > 1e-12) & (tg * norms <= intr.max_range_m)
    depth = np.where(ok, tg, depth)

    for obs in obstacles:
        R = rot2d(obs.rotation)
        o_loc = np.empty(3)
        o_loc[:2] = R.T @ (origin[:2] - np.array([obs.center_x, obs.center_y]))
        o_loc[2] = origin[2]
        d_loc = np.empty_like(dirs)
        d_loc[..., :2] = dirs[..., :2] @ R
        d_loc[..., 2] = dirs[..., 2]

        lo = np.array([-obs.length / 2.0, -obs.width / 2.0, 0.0])
        hi = np.array([obs.length / 2.0, obs.width / 2.0, obs.height])
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - o_loc) / d_loc
            t2 = (hi - o_loc) / d_loc
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        # rays parallel to a slab: inside keeps (-inf, inf), outside misses
        inside = (o_loc >= lo) & (o_loc <= hi)
        parallel = np.abs(d_loc) < 1e-15
        near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
        far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
        tmin = near.max(axis=-1)
        tmax = far.min(axis=-1)
        thit = np.where(tmin > 1e-12, tmin, tmax)
        ok = (tmax >= tmin) & (tmax > 1e-12) & (thit * norms <= intr.max_range_m)
        depth = np.where(ok & (thit < depth), thit, depth)

    return depth


def accepted_diagonal_cdf(arena_half: float = 20.0,
                          d_range=(6.0, 18.0),
                          off_range_deg=(95.0, 160.0)):
    """CDF of the accepted first-obstacle diagonal for the centred mission.

    For a crossing at x = 0 with symmetric borders, the only binding
    rejection is the vertical placement: the centre, shifted by (l/6) of
    the axis direction from the intersection point, needs a d/2 margin
    from every border, and the diagonal's vertical extent must fit as
    well.  Acceptance probability over the uniform y draw is therefore
    max(0, 2*arena_half - d - |l/6 * cos(off)|) / (2*arena_half).
    """
    span = 2.0 * arena_half
    d_lo, d_hi = d_range
    o_lo, o_hi = math.radians(off_range_deg[0]), math.radians(off_range_deg[1])
    ds = np.linspace(d_lo, d_hi, 2001)
    offs = np.linspace(o_lo, o_hi, 401)
    ls = np.sqrt(ds**2 - 4.0)
    shift = np.abs((ls[:, None] / 6.0) * np.cos(offs)[None, :])
    accept = np.clip(span - ds[:, None] - shift, 0.0, None) / span
    dens = accept.mean(axis=1)
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(ds))])
    cdf /= cdf[-1]

    def F(x):
        return np.interp(x, ds, cdf)

    return F
