"""Side-by-side timing of the two kernel lanes (numba @njit vs pure numpy).

Runs each hot kernel on a realistic workload in both lanes and prints a
small table with the median per-call time and the speedup.  The numpy
twins are called directly, so both lanes are measured in one process no
matter which lane the package itself selected at import time.

Usage:
    python benchmarks/bench_kernels.py [--repeats N] [--width W --height H]
"""

import argparse
import math
import statistics
import time

import numpy as np

from uavlofi import kernels
from uavlofi.config import default_mission
from uavlofi.generator import GeneratorConfig, generate
from uavlofi.geometry import ArenaRect, Pose, Vec3
from uavlofi.planner import PlannerParams
from uavlofi.rendering import (
    CameraExtrinsics,
    CameraIntrinsics,
    camera_frame,
    depth_to_cloud,
    render_depth,
)


def _boxes_array(obstacles):
    return np.array(
        [
            [o.center_x, o.center_y, o.length / 2.0, o.width / 2.0, o.height,
             math.cos(o.rotation), math.sin(o.rotation)]
            for o in obstacles
        ]
    )


def _median_ms(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--width", type=int, default=640)
    ap.add_argument("--height", type=int, default=480)
    args = ap.parse_args()

    if not kernels.USE_NUMBA:
        print("note: numba lane unavailable in this process "
              "(UAVLOFI_NO_NUMBA set or numba missing); timing numpy only")

    arena = ArenaRect(x_min=-20.0, x_max=20.0, y_min=-20.0, y_max=20.0)
    gen = GeneratorConfig(arena=arena, rng_seed=0)
    case = next(iter(generate(default_mission(arena), arena, gen, 1)))
    pose = Pose(Vec3(0.0, -15.0, 2.5), math.pi / 2)
    intr = CameraIntrinsics.from_fov(args.width, args.height, 86.0)
    extr = CameraExtrinsics()
    origin, rgt, dwn, fwd = camera_frame(pose, extr)
    boxes = _boxes_array(case.obstacles)

    img = render_depth(case.obstacles, pose, intr, extr)
    cloud = depth_to_cloud(img, pose, extr, stride=4).points
    params = PlannerParams()
    quad_a = np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 2.0], [0.0, 2.0]])
    quad_b = quad_a + np.array([6.0, 1.0])

    render_args = (origin, rgt, dwn, fwd, intr.fx, intr.fy, intr.cx, intr.cy,
                   intr.width, intr.height, boxes, intr.max_range_m)

    jobs = [
        (
            f"render {args.width}x{args.height}",
            lambda: kernels._render_scene_scalar(*render_args),
            lambda: kernels.render_scene_numpy(*render_args),
        ),
        (
            f"histogram {len(cloud)} pts",
            lambda: kernels._accumulate_histogram_scalar(
                cloud, pose.position.x, pose.position.y, pose.position.z,
                params.bin_resolution_deg, params.obstacle_inflation_m,
                params.n_azimuth, params.n_elevation),
            lambda: kernels.accumulate_histogram_numpy(
                cloud, pose.position.x, pose.position.y, pose.position.z,
                params.bin_resolution_deg, params.obstacle_inflation_m,
                params.n_azimuth, params.n_elevation),
        ),
        (
            "rect distance x1000",
            lambda: [kernels._rect_distance_scalar(quad_a, quad_b)
                     for _ in range(1000)],
            lambda: [kernels._rect_distance_loop(quad_a, quad_b)
                     for _ in range(1000)],
        ),
    ]

    print(f"{'kernel':<24} {'numba ms':>10} {'numpy ms':>10} {'speedup':>9}")
    for name, scalar_fn, numpy_fn in jobs:
        numpy_ms = _median_ms(numpy_fn, args.repeats)
        if kernels.USE_NUMBA:
            scalar_fn()  # trigger the JIT outside the timed region
            numba_ms = _median_ms(scalar_fn, args.repeats)
            print(f"{name:<24} {numba_ms:>10.3f} {numpy_ms:>10.3f} "
                  f"{numpy_ms / numba_ms:>8.1f}x")
        else:
            print(f"{name:<24} {'-':>10} {numpy_ms:>10.3f} {'-':>9}")

    # the lanes must agree on the rendered depths
    a = kernels._render_scene_scalar(*render_args) if kernels.USE_NUMBA else None
    b = kernels.render_scene_numpy(*render_args)
    if a is not None:
        finite = np.isfinite(b)
        assert (np.isfinite(a) == finite).all()
        print(f"lane agreement: max |depth diff| = "
              f"{float(np.max(np.abs(a[finite] - b[finite]))):.2e}")


if __name__ == "__main__":
    main()
