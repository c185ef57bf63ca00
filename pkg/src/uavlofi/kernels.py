"""Hot numeric kernels with two interchangeable lanes.

The default lane compiles the scalar loops below with numba's @njit.  Setting
the environment variable ``UAVLOFI_NO_NUMBA=1`` (before import) selects a
pure-numpy lane instead; the vectorized twins apply the same IEEE operations
in the same order per element, so the lanes agree bit-for-bit on the slab
ray casting and to within accumulation-order noise on histogram sums.

``benchmarks/bench_kernels.py`` times both lanes side by side.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


def _env_disabled() -> bool:
    return os.environ.get("UAVLOFI_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAS_NUMBA and not _env_disabled()

RAD2DEG = 180.0 / math.pi

# Direction components smaller than this are treated as parallel to a slab.
_PARALLEL_EPS = 1e-15
# Hits closer than this along the ray are ignored (surface-acne guard).
_T_EPS = 1e-12


# ---------------------------------------------------------------------------
# depth rendering: pinhole rays against ground plane + rotated cuboids
#
# boxes rows: [center_x, center_y, half_length, half_width, height, cos_r, sin_r]
# Depth is z-depth along the optical axis; rays whose hit point lies farther
# than max_range (Euclidean) from the camera origin record no hit (inf).
# ---------------------------------------------------------------------------


def _render_loop(depth, ox, oy, oz, rgt, dwn, fwd, fx, fy, cx, cy, boxes, max_range):
    h_px, w_px = depth.shape
    n_boxes = boxes.shape[0]
    for v in range(h_px):
        dcy = (v - cy) / fy
        for u in range(w_px):
            dcx = (u - cx) / fx
            dx = dcx * rgt[0] + dcy * dwn[0] + fwd[0]
            dy = dcx * rgt[1] + dcy * dwn[1] + fwd[1]
            dz = dcx * rgt[2] + dcy * dwn[2] + fwd[2]
            norm_d = math.sqrt(dx * dx + dy * dy + dz * dz)
            best = math.inf
            # ground plane z = 0
            if abs(dz) >= _PARALLEL_EPS:
                t = -oz / dz
                if t > _T_EPS and t * norm_d <= max_range and t < best:
                    best = t
            for b in range(n_boxes):
                bcx = boxes[b, 0]
                bcy = boxes[b, 1]
                hl = boxes[b, 2]
                hw = boxes[b, 3]
                bh = boxes[b, 4]
                cr = boxes[b, 5]
                sr = boxes[b, 6]
                pox = ox - bcx
                poy = oy - bcy
                lox = cr * pox + sr * poy
                loy = -sr * pox + cr * poy
                ldx = cr * dx + sr * dy
                ldy = -sr * dx + cr * dy
                # slab x: [-hl, hl]
                if abs(ldx) < _PARALLEL_EPS:
                    if -hl <= lox <= hl:
                        tlo_x, thi_x = -math.inf, math.inf
                    else:
                        tlo_x, thi_x = math.inf, -math.inf
                else:
                    inv = 1.0 / ldx
                    t1 = (-hl - lox) * inv
                    t2 = (hl - lox) * inv
                    tlo_x = min(t1, t2)
                    thi_x = max(t1, t2)
                # slab y: [-hw, hw]
                if abs(ldy) < _PARALLEL_EPS:
                    if -hw <= loy <= hw:
                        tlo_y, thi_y = -math.inf, math.inf
                    else:
                        tlo_y, thi_y = math.inf, -math.inf
                else:
                    inv = 1.0 / ldy
                    t1 = (-hw - loy) * inv
                    t2 = (hw - loy) * inv
                    tlo_y = min(t1, t2)
                    thi_y = max(t1, t2)
                # slab z: [0, bh]
                if abs(dz) < _PARALLEL_EPS:
                    if 0.0 <= oz <= bh:
                        tlo_z, thi_z = -math.inf, math.inf
                    else:
                        tlo_z, thi_z = math.inf, -math.inf
                else:
                    inv = 1.0 / dz
                    t1 = (0.0 - oz) * inv
                    t2 = (bh - oz) * inv
                    tlo_z = min(t1, t2)
                    thi_z = max(t1, t2)
                tmin = max(tlo_x, max(tlo_y, tlo_z))
                tmax = min(thi_x, min(thi_y, thi_z))
                if tmax >= tmin and tmax > _T_EPS:
                    t_hit = tmin if tmin > _T_EPS else tmax
                    if t_hit * norm_d <= max_range and t_hit < best:
                        best = t_hit
            depth[v, u] = best
    return depth


def render_scene_numpy(origin, rgt, dwn, fwd, fx, fy, cx, cy, w_px, h_px, boxes, max_range):
    """Vectorized twin of the scalar render loop (same op order per pixel)."""
    ox, oy, oz = origin
    dcx = ((np.arange(w_px, dtype=np.float64) - cx) / fx)[None, :]
    dcy = ((np.arange(h_px, dtype=np.float64) - cy) / fy)[:, None]
    dx = dcx * rgt[0] + dcy * dwn[0] + fwd[0]
    dy = dcx * rgt[1] + dcy * dwn[1] + fwd[1]
    dz = dcx * rgt[2] + dcy * dwn[2] + fwd[2]
    norm_d = np.sqrt(dx * dx + dy * dy + dz * dz)
    best = np.full((h_px, w_px), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        # ground plane z = 0
        par = np.abs(dz) < _PARALLEL_EPS
        t = np.where(par, np.inf, -oz / np.where(par, 1.0, dz))
        ok = (~par) & (t > _T_EPS) & (t * norm_d <= max_range) & (t < best)
        best = np.where(ok, t, best)
        for b in range(boxes.shape[0]):
            bcx, bcy, hl, hw, bh, cr, sr = boxes[b]
            pox = ox - bcx
            poy = oy - bcy
            lox = cr * pox + sr * poy
            loy = -sr * pox + cr * poy
            ldx = cr * dx + sr * dy
            ldy = -sr * dx + cr * dy
            tlo = np.full_like(best, -np.inf)
            thi = np.full_like(best, np.inf)
            for ld, o_axis, lo, hi in (
                (ldx, lox, -hl, hl),
                (ldy, loy, -hw, hw),
                (dz, oz, 0.0, bh),
            ):
                par = np.abs(ld) < _PARALLEL_EPS
                inside = (lo <= o_axis) & (o_axis <= hi)
                inv = 1.0 / np.where(par, 1.0, ld)
                t1 = (lo - o_axis) * inv
                t2 = (hi - o_axis) * inv
                tlo_a = np.where(par, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
                thi_a = np.where(par, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
                tlo = np.maximum(tlo, tlo_a)
                thi = np.minimum(thi, thi_a)
            hit = (thi >= tlo) & (thi > _T_EPS)
            t_hit = np.where(tlo > _T_EPS, tlo, thi)
            ok = hit & (t_hit * norm_d <= max_range) & (t_hit < best)
            best = np.where(ok, t_hit, best)
    return best


def _render_scene_scalar(origin, rgt, dwn, fwd, fx, fy, cx, cy, w_px, h_px, boxes, max_range):
    depth = np.empty((h_px, w_px), dtype=np.float64)
    impl = _render_loop_numba if USE_NUMBA else _render_loop
    return impl(
        depth,
        float(origin[0]),
        float(origin[1]),
        float(origin[2]),
        np.asarray(rgt, dtype=np.float64),
        np.asarray(dwn, dtype=np.float64),
        np.asarray(fwd, dtype=np.float64),
        float(fx),
        float(fy),
        float(cx),
        float(cy),
        np.asarray(boxes, dtype=np.float64).reshape(-1, 7),
        float(max_range),
    )


# ---------------------------------------------------------------------------
# polar histogram accumulation
#
# Each point adds 1/d^2 to its (azimuth, elevation) bin and, when an
# inflation radius is configured, to the square patch of bins within the
# angular margin asin(inflation/d), rounded up to whole bins.
# ---------------------------------------------------------------------------


def _hist_loop(hist, pts, ox, oy, oz, res_deg, inflation, n_az, n_el):
    n = pts.shape[0]
    for i in range(n):
        vx = pts[i, 0] - ox
        vy = pts[i, 1] - oy
        vz = pts[i, 2] - oz
        d2 = vx * vx + vy * vy + vz * vz
        dist = math.sqrt(d2)
        if dist < 1e-9:
            continue
        az_deg = math.atan2(vy, vx) * RAD2DEG
        if az_deg <= -180.0:
            az_deg += 360.0
        horiz = math.sqrt(vx * vx + vy * vy)
        el_deg = math.atan2(vz, horiz) * RAD2DEG
        ai = int(math.floor((az_deg + 180.0) / res_deg))
        if ai >= n_az:
            ai = n_az - 1
        if ai < 0:
            ai = 0
        ei = int(math.floor((el_deg + 90.0) / res_deg))
        if ei >= n_el:
            ei = n_el - 1
        if ei < 0:
            ei = 0
        w = 1.0 / d2
        k = 0
        if inflation > 0.0:
            ratio = inflation / dist
            if ratio > 1.0:
                ratio = 1.0
            k = int(math.ceil(math.asin(ratio) * RAD2DEG / res_deg))
        for da in range(-k, k + 1):
            a2 = (ai + da) % n_az
            for de in range(-k, k + 1):
                e2 = ei + de
                if 0 <= e2 < n_el:
                    hist[a2, e2] += w
    return hist


def accumulate_histogram_numpy(pts, ox, oy, oz, res_deg, inflation, n_az, n_el):
    """Vectorized histogram twin.

    Accumulation proceeds point-major (offsets inner), chunked over points,
    matching the scalar loop's addition order.
    """
    hist = np.zeros((n_az, n_el), dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] == 0:
        return hist
    vx = pts[:, 0] - ox
    vy = pts[:, 1] - oy
    vz = pts[:, 2] - oz
    d2 = vx * vx + vy * vy + vz * vz
    dist = np.sqrt(d2)
    keep = dist >= 1e-9
    vx, vy, vz, d2, dist = vx[keep], vy[keep], vz[keep], d2[keep], dist[keep]
    if vx.size == 0:
        return hist
    az_deg = np.arctan2(vy, vx) * RAD2DEG
    az_deg = np.where(az_deg <= -180.0, az_deg + 360.0, az_deg)
    horiz = np.sqrt(vx * vx + vy * vy)
    el_deg = np.arctan2(vz, horiz) * RAD2DEG
    ai = np.clip(np.floor((az_deg + 180.0) / res_deg).astype(np.int64), 0, n_az - 1)
    ei = np.clip(np.floor((el_deg + 90.0) / res_deg).astype(np.int64), 0, n_el - 1)
    w = 1.0 / d2
    if inflation > 0.0:
        ratio = np.minimum(inflation / dist, 1.0)
        k = np.ceil(np.arcsin(ratio) * RAD2DEG / res_deg).astype(np.int64)
    else:
        k = np.zeros(vx.shape, dtype=np.int64)
    kmax = int(k.max())
    if kmax == 0:
        # single-bin fast path, still point-major order
        np.add.at(hist, (ai, ei), w)
        return hist
    offs = np.array(
        [(da, de) for da in range(-kmax, kmax + 1) for de in range(-kmax, kmax + 1)],
        dtype=np.int64,
    )
    n_off = offs.shape[0]
    chunk = max(1, 8_388_608 // n_off)  # bound temp arrays to a few MB
    for s in range(0, ai.shape[0], chunk):
        e = min(s + chunk, ai.shape[0])
        ai_c = ai[s:e, None]
        ei_c = ei[s:e, None]
        k_c = k[s:e, None]
        w_c = np.broadcast_to(w[s:e, None], (e - s, n_off))
        da = offs[None, :, 0]
        de = offs[None, :, 1]
        a2 = (ai_c + da) % n_az
        e2 = ei_c + de
        mask = (np.abs(da) <= k_c) & (np.abs(de) <= k_c) & (e2 >= 0) & (e2 < n_el)
        flat_mask = mask.ravel()
        np.add.at(
            hist,
            (a2.ravel()[flat_mask], e2.ravel()[flat_mask]),
            w_c.ravel()[flat_mask],
        )
    return hist


def _accumulate_histogram_scalar(pts, ox, oy, oz, res_deg, inflation, n_az, n_el):
    hist = np.zeros((n_az, n_el), dtype=np.float64)
    impl = _hist_loop_numba if USE_NUMBA else _hist_loop
    return impl(
        hist,
        np.asarray(pts, dtype=np.float64).reshape(-1, 3),
        float(ox),
        float(oy),
        float(oz),
        float(res_deg),
        float(inflation),
        int(n_az),
        int(n_el),
    )


# ---------------------------------------------------------------------------
# rectangle-rectangle distance on (4, 2) CCW vertex arrays
# ---------------------------------------------------------------------------


def _rect_distance_loop(va, vb):
    # containment (one rectangle fully inside the other)
    for verts, qx, qy in ((vb, va[0, 0], va[0, 1]), (va, vb[0, 0], vb[0, 1])):
        inside = True
        for i in range(4):
            ax = verts[i, 0]
            ay = verts[i, 1]
            bx = verts[(i + 1) % 4, 0]
            by = verts[(i + 1) % 4, 1]
            if (bx - ax) * (qy - ay) - (by - ay) * (qx - ax) < -1e-12:
                inside = False
                break
        if inside:
            return 0.0
    best = math.inf
    for i in range(4):
        ax = va[i, 0]
        ay = va[i, 1]
        bx = va[(i + 1) % 4, 0]
        by = va[(i + 1) % 4, 1]
        for j in range(4):
            cx = vb[j, 0]
            cy = vb[j, 1]
            dx = vb[(j + 1) % 4, 0]
            dy = vb[(j + 1) % 4, 1]
            # proper crossing test
            d1 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
            d2 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
            d3 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            d4 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
            if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
                return 0.0
            for px, py, qx, qy, rx, ry in (
                (ax, ay, cx, cy, dx, dy),
                (bx, by, cx, cy, dx, dy),
                (cx, cy, ax, ay, bx, by),
                (dx, dy, ax, ay, bx, by),
            ):
                sx = rx - qx
                sy = ry - qy
                denom = sx * sx + sy * sy
                t = 0.0 if denom < 1e-18 else (px - qx) * sx + (py - qy) * sy
                if denom >= 1e-18:
                    t = t / denom
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                ex = px - (qx + t * sx)
                ey = py - (qy + t * sy)
                d = math.sqrt(ex * ex + ey * ey)
                if d < best:
                    best = d
    return best


def _rect_distance_scalar(va, vb):
    impl = _rect_distance_loop_numba if USE_NUMBA else _rect_distance_loop
    return float(
        impl(np.asarray(va, dtype=np.float64), np.asarray(vb, dtype=np.float64))
    )


# ---------------------------------------------------------------------------
# lane selection
# ---------------------------------------------------------------------------

if USE_NUMBA:
    _render_loop_numba = njit(cache=True, nogil=True)(_render_loop)
    _hist_loop_numba = njit(cache=True, nogil=True)(_hist_loop)
    _rect_distance_loop_numba = njit(cache=True, nogil=True)(_rect_distance_loop)


def render_scene(origin, rgt, dwn, fwd, fx, fy, cx, cy, w_px, h_px, boxes, max_range):
    """Depth image (h_px, w_px) of cuboids + ground plane; inf marks no hit."""
    if USE_NUMBA:
        return _render_scene_scalar(
            origin, rgt, dwn, fwd, fx, fy, cx, cy, w_px, h_px, boxes, max_range
        )
    return render_scene_numpy(
        np.asarray(origin, dtype=np.float64),
        np.asarray(rgt, dtype=np.float64),
        np.asarray(dwn, dtype=np.float64),
        np.asarray(fwd, dtype=np.float64),
        float(fx),
        float(fy),
        float(cx),
        float(cy),
        int(w_px),
        int(h_px),
        np.asarray(boxes, dtype=np.float64).reshape(-1, 7),
        float(max_range),
    )


def accumulate_histogram(pts, origin, res_deg, inflation, n_az, n_el):
    """Polar occupancy weights (n_az, n_el) for a cloud seen from `origin`."""
    ox, oy, oz = float(origin[0]), float(origin[1]), float(origin[2])
    if USE_NUMBA:
        return _accumulate_histogram_scalar(pts, ox, oy, oz, res_deg, inflation, n_az, n_el)
    return accumulate_histogram_numpy(pts, ox, oy, oz, res_deg, inflation, n_az, n_el)


def rect_distance_verts(va, vb) -> float:
    """Minimal distance between two CCW quads given as (4, 2) vertex arrays."""
    return _rect_distance_scalar(va, vb)


def backend() -> str:
    """Active kernel lane: 'numba' or 'numpy'."""
    return "numba" if USE_NUMBA else "numpy"
