"""Analytic depth camera: pinhole rays cast against cuboids and the ground.

Depth semantics follow real depth sensors: each pixel records z-depth along
the optical axis, not ray length.  A hit is kept only when its world point
lies within ``max_range_m`` (Euclidean) of the camera origin, so every
back-projected cloud point is guaranteed to be in range; pixels without a
hit hold ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from . import kernels
from .geometry import CuboidObstacle, Pose, Vec3


def _default_focal(width: int, hfov_deg: float) -> float:
    return (width / 2.0) / math.tan(math.radians(hfov_deg) / 2.0)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole model.  Defaults: 640x480, 86 deg horizontal FOV, 15 m range."""

    width: int = 640
    height: int = 480
    fx: float = field(default=_default_focal(640, 86.0))
    fy: float = field(default=_default_focal(640, 86.0))
    cx: float = 640 / 2 - 0.5
    cy: float = 480 / 2 - 0.5
    max_range_m: float = 15.0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.fx <= 0 or self.fy <= 0 or self.max_range_m <= 0:
            raise ValueError("focal lengths and max range must be positive")

    @staticmethod
    def from_fov(width: int, height: int, hfov_deg: float, max_range_m: float = 15.0) -> "CameraIntrinsics":
        f = _default_focal(width, hfov_deg)
        return CameraIntrinsics(
            width=width,
            height=height,
            fx=f,
            fy=f,
            cx=width / 2 - 0.5,
            cy=height / 2 - 0.5,
            max_range_m=max_range_m,
        )


@dataclass(frozen=True)
class CameraExtrinsics:
    """Mount offset in the body frame (x forward, y left, z up) plus pitch.

    Positive ``mount_pitch`` tilts the optical axis upward.
    """

    mount_translation: Vec3 = Vec3(0.0, 0.0, 0.0)
    mount_pitch: float = 0.0


@dataclass(frozen=True)
class DepthImage:
    """(height, width) float64 z-depths; inf where nothing was hit in range."""

    data: np.ndarray
    intrinsics: CameraIntrinsics

    def finite_fraction(self) -> float:
        return float(np.isfinite(self.data).mean())


@dataclass(frozen=True)
class PointCloud:
    """World-frame points, (N, 3) float64."""

    points: np.ndarray

    def __len__(self) -> int:
        return int(self.points.shape[0])


def camera_frame(
    pose: Pose, extr: CameraExtrinsics
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Camera origin and basis (right, down, forward) in world coordinates.

    The camera looks along the vehicle heading, pitched by the mount angle;
    there is no roll.  Camera axes follow the usual image convention:
    +X right, +Y down, +Z forward (optical axis).
    """
    cy = math.cos(pose.yaw)
    sy = math.sin(pose.yaw)
    cp = math.cos(extr.mount_pitch)
    sp = math.sin(extr.mount_pitch)
    fwd = np.array([cy * cp, sy * cp, sp], dtype=np.float64)
    rgt = np.array([sy, -cy, 0.0], dtype=np.float64)
    dwn = np.array([sp * cy, sp * sy, -cp], dtype=np.float64)
    t = extr.mount_translation
    origin = np.array(
        [
            pose.position.x + cy * t.x - sy * t.y,
            pose.position.y + sy * t.x + cy * t.y,
            pose.position.z + t.z,
        ],
        dtype=np.float64,
    )
    return origin, rgt, dwn, fwd


def pack_boxes(obstacles: Sequence[CuboidObstacle]) -> np.ndarray:
    """Flatten obstacles into the (N, 7) layout the kernels consume."""
    out = np.empty((len(obstacles), 7), dtype=np.float64)
    for i, o in enumerate(obstacles):
        out[i] = (
            o.center_x,
            o.center_y,
            0.5 * o.length,
            0.5 * o.width,
            o.height,
            math.cos(o.rotation),
            math.sin(o.rotation),
        )
    return out


def render_depth(
    obstacles: Sequence[CuboidObstacle],
    pose: Pose,
    intr: CameraIntrinsics = CameraIntrinsics(),
    extr: CameraExtrinsics = CameraExtrinsics(),
) -> DepthImage:
    """Render the scene into a depth image from the vehicle's camera."""
    origin, rgt, dwn, fwd = camera_frame(pose, extr)
    data = kernels.render_scene(
        origin,
        rgt,
        dwn,
        fwd,
        intr.fx,
        intr.fy,
        intr.cx,
        intr.cy,
        intr.width,
        intr.height,
        pack_boxes(obstacles),
        intr.max_range_m,
    )
    return DepthImage(data=data, intrinsics=intr)


def depth_to_cloud(
    img: DepthImage,
    pose: Pose,
    extr: CameraExtrinsics = CameraExtrinsics(),
    stride: int = 1,
) -> PointCloud:
    """Back-project finite pixels to world-frame points.

    Args:
        img: depth image to lift.
        pose: the pose the image was rendered from.
        extr: camera mount used during rendering.
        stride: keep every stride-th pixel in both axes (>= 1).
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    intr = img.intrinsics
    origin, rgt, dwn, fwd = camera_frame(pose, extr)
    depth = img.data[::stride, ::stride]
    vs, us = np.nonzero(np.isfinite(depth))
    z = depth[vs, us]
    u = us * stride
    v = vs * stride
    xc = (u - intr.cx) / intr.fx * z
    yc = (v - intr.cy) / intr.fy * z
    pts = origin[None, :] + xc[:, None] * rgt[None, :] + yc[:, None] * dwn[None, :] + z[:, None] * fwd[None, :]
    return PointCloud(points=pts)


def write_pgm(img: DepthImage, path: str) -> None:
    """Dump depth as 16-bit PGM in millimetres (0 = no hit)."""
    mm = np.where(np.isfinite(img.data), np.clip(img.data * 1000.0, 0, 65535), 0.0)
    arr = mm.astype(">u2")
    with open(path, "wb") as f:
        f.write(f"P5\n{img.intrinsics.width} {img.intrinsics.height}\n65535\n".encode("ascii"))
        f.write(arr.tobytes())


def write_xyz(cloud: PointCloud, path: str) -> None:
    """Dump a cloud as plain 'x y z' text lines."""
    with open(path, "w", encoding="ascii") as f:
        for x, y, z in cloud.points:
            f.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
