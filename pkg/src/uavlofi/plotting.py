"""Top-down SVG plots of scenarios and flown paths.

The SVG is assembled by hand with fixed float formatting so that a given
scenario and trajectory always produce the same bytes, which keeps plot
outputs diffable across reruns.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .geometry import ArenaRect, CuboidObstacle, FlightSegment, base_vertices
from .simulator import Trajectory

_PAD_PX = 24.0


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _Frame:
    """World (x up-north) to SVG pixel (y down) mapping."""

    def __init__(self, x_min: float, y_min: float, x_max: float, y_max: float, canvas_px: float):
        span = max(x_max - x_min, y_max - y_min, 1e-9)
        self.k = (canvas_px - 2.0 * _PAD_PX) / span
        self.x_min = x_min
        self.y_max = y_max
        self.width = (x_max - x_min) * self.k + 2.0 * _PAD_PX
        self.height = (y_max - y_min) * self.k + 2.0 * _PAD_PX

    def to_px(self, x: float, y: float) -> Tuple[float, float]:
        return (
            (x - self.x_min) * self.k + _PAD_PX,
            (self.y_max - y) * self.k + _PAD_PX,
        )

    def pts(self, xy: Sequence[Tuple[float, float]]) -> str:
        return " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in (self.to_px(x, y) for x, y in xy))


def render_svg(
    arena: ArenaRect,
    obstacles: Sequence[CuboidObstacle],
    soi: Optional[FlightSegment] = None,
    trajectory: Optional[Trajectory] = None,
    canvas_px: float = 720.0,
) -> str:
    """Compose the scene as an SVG document string."""
    xs = [arena.x_min, arena.x_max]
    ys = [arena.y_min, arena.y_max]
    for obs in obstacles:
        v = base_vertices(obs)
        xs += [float(v[:, 0].min()), float(v[:, 0].max())]
        ys += [float(v[:, 1].min()), float(v[:, 1].max())]
    if trajectory is not None:
        for p in trajectory.positions():
            xs.append(p.x)
            ys.append(p.y)
    if soi is not None:
        xs += [soi.start.x, soi.end.x]
        ys += [soi.start.y, soi.end.y]
    pad_w = 1.0
    frame = _Frame(min(xs) - pad_w, min(ys) - pad_w, max(xs) + pad_w, max(ys) + pad_w, canvas_px)

    parts: List[str] = []
    parts.append('<?xml version="1.0" encoding="UTF-8"?>')
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fmt(frame.width)} {_fmt(frame.height)}" '
        f'width="{_fmt(frame.width)}" height="{_fmt(frame.height)}">'
    )
    parts.append(f'<rect x="0" y="0" width="{_fmt(frame.width)}" height="{_fmt(frame.height)}" fill="#ffffff"/>')

    ax0, ay0 = frame.to_px(arena.x_min, arena.y_max)
    parts.append(
        f'<rect x="{_fmt(ax0)}" y="{_fmt(ay0)}" width="{_fmt((arena.x_max - arena.x_min) * frame.k)}" '
        f'height="{_fmt((arena.y_max - arena.y_min) * frame.k)}" fill="none" stroke="#222222" stroke-width="1.5"/>'
    )

    if soi is not None:
        (sx, sy), (ex, ey) = frame.to_px(soi.start.x, soi.start.y), frame.to_px(soi.end.x, soi.end.y)
        parts.append(
            f'<line x1="{_fmt(sx)}" y1="{_fmt(sy)}" x2="{_fmt(ex)}" y2="{_fmt(ey)}" '
            'stroke="#888888" stroke-width="1" stroke-dasharray="6 4"/>'
        )

    for obs in obstacles:
        verts = base_vertices(obs)
        pts = frame.pts([(float(x), float(y)) for x, y in verts])
        parts.append(f'<polygon points="{pts}" fill="#c0392b" fill-opacity="0.55" stroke="#7f1d1d" stroke-width="1"/>')

    if trajectory is not None and len(trajectory) > 0:
        path_pts = frame.pts([(p.x, p.y) for p in trajectory.positions()])
        parts.append(f'<polyline points="{path_pts}" fill="none" stroke="#1f6feb" stroke-width="1.8"/>')

        first = trajectory.samples[0].pose.position
        fx, fy = frame.to_px(first.x, first.y)
        parts.append(f'<circle cx="{_fmt(fx)}" cy="{_fmt(fy)}" r="4" fill="#2da44e"/>')
        last = trajectory.samples[-1].pose.position
        lx, ly = frame.to_px(last.x, last.y)
        parts.append(f'<circle cx="{_fmt(lx)}" cy="{_fmt(ly)}" r="4" fill="#1f6feb"/>')

        best = min(trajectory.samples, key=lambda s: s.min_obstacle_distance)
        if best.min_obstacle_distance < float("inf"):
            bx, by = frame.to_px(best.pose.position.x, best.pose.position.y)
            r_px = max(best.min_obstacle_distance * frame.k, 2.0)
            parts.append(
                f'<circle cx="{_fmt(bx)}" cy="{_fmt(by)}" r="{_fmt(r_px)}" fill="none" '
                'stroke="#d4a72c" stroke-width="1.2" stroke-dasharray="3 3"/>'
            )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(text: str, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
