"""Layered runtime configuration.

Precedence, lowest to highest: dataclass defaults, a YAML/JSON config file,
environment variables, explicit overrides (CLI flags).  Environment keys use
the prefix UAVLOFI_ with double underscores between path segments, e.g.
UAVLOFI_GENERATOR__RNG_SEED=7 or UAVLOFI_SIMULATION__PLANNER__TREE_DEPTH=3.
Every tunable lives under a config key so campaigns are reproducible from
the manifest snapshot alone.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from .evaluation import FilterPolicy
from .generator import GeneratorConfig, Mission
from .geometry import ArenaRect, Vec3
from .planner import PlannerParams
from .rendering import CameraExtrinsics, CameraIntrinsics
from .simulator import KinematicParams, SimConfig
from .validation import validate

ENV_PREFIX = "UAVLOFI_"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AppConfig:
    generator: GeneratorConfig = GeneratorConfig()
    simulation: SimConfig = SimConfig()
    filter: FilterPolicy = FilterPolicy()
    campaign_budget: int = 200
    campaign_target: int = 5
    campaign_workers: Optional[int] = None

    def __post_init__(self) -> None:
        if self.campaign_budget < 0 or self.campaign_target < 0:
            raise ValueError("campaign budget and target must be >= 0")
        if self.campaign_workers is not None and self.campaign_workers < 1:
            raise ValueError("campaign_workers must be >= 1")


def _deep_merge(base: Dict[str, Any], extra: Mapping[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


def _env_layer(env: Mapping[str, str]) -> Dict[str, Any]:
    layer: Dict[str, Any] = {}
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        path = name[len(ENV_PREFIX):].lower().split("__")
        try:
            value = yaml.safe_load(env[name])
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse environment value {name}: {e}") from e
        node = layer
        for seg in path[:-1]:
            node = node.setdefault(seg, {})
            if not isinstance(node, dict):
                raise ConfigError(f"environment override {name} conflicts with a scalar")
        node[path[-1]] = value
    return layer


def _replace_checked(defaults: Any, section: Mapping[str, Any], coerce: Optional[Dict[str, Any]] = None) -> Any:
    cls = type(defaults)
    valid = {f.name for f in dataclasses.fields(cls)}
    kwargs: Dict[str, Any] = {}
    for key, value in section.items():
        if key not in valid:
            raise ConfigError(f"unknown key {key!r} in {cls.__name__} section")
        if coerce and key in coerce:
            value = coerce[key](value)
        kwargs[key] = value
    try:
        return dataclasses.replace(defaults, **kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{cls.__name__}: {e}") from e


def _as_pair(v: Any) -> Tuple[float, float]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"expected a [low, high] pair, got {v!r}")
    return float(v[0]), float(v[1])


def _as_arena(v: Any) -> ArenaRect:
    if isinstance(v, ArenaRect):
        return v
    if isinstance(v, Mapping):
        return ArenaRect(
            x_min=float(v["x_min"]), x_max=float(v["x_max"]),
            y_min=float(v["y_min"]), y_max=float(v["y_max"]),
        )
    if isinstance(v, (list, tuple)) and len(v) == 4:
        return ArenaRect(x_min=float(v[0]), x_max=float(v[2]), y_min=float(v[1]), y_max=float(v[3]))
    raise ConfigError(f"arena must be [x_min, y_min, x_max, y_max], got {v!r}")


def _build_camera(section: Mapping[str, Any]) -> Tuple[CameraIntrinsics, CameraExtrinsics]:
    known = {
        "width", "height", "hfov_deg", "max_range_m",
        "fx", "fy", "cx", "cy",
        "mount_translation", "mount_pitch_deg",
    }
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown camera keys: {sorted(unknown)}")

    width = int(section.get("width", 640))
    height = int(section.get("height", 480))
    intr = CameraIntrinsics.from_fov(
        width, height, float(section.get("hfov_deg", 86.0)), float(section.get("max_range_m", 15.0))
    )
    direct = {k: float(section[k]) for k in ("fx", "fy", "cx", "cy") if k in section}
    if direct:
        intr = dataclasses.replace(intr, **direct)

    translation = section.get("mount_translation", (0.0, 0.0, 0.0))
    if not isinstance(translation, (list, tuple)) or len(translation) != 3:
        raise ConfigError("mount_translation must be [forward, left, up]")
    extr = CameraExtrinsics(
        mount_translation=Vec3(float(translation[0]), float(translation[1]), float(translation[2])),
        mount_pitch=math.radians(float(section.get("mount_pitch_deg", 0.0))),
    )
    return intr, extr


def _build_simulation(section: Mapping[str, Any]) -> SimConfig:
    section = dict(section)
    kin_raw = section.pop("kinematics", {})
    plan_raw = section.pop("planner", {})
    cam_raw = section.pop("camera", {})
    kinematics = _replace_checked(KinematicParams(), kin_raw)
    planner = _replace_checked(PlannerParams(), plan_raw)
    intr, extr = _build_camera(cam_raw)
    base = SimConfig(kinematics=kinematics, planner=planner, intrinsics=intr, extrinsics=extr)
    return _replace_checked(base, section)


def build_config(layers: Mapping[str, Any]) -> AppConfig:
    """Assemble an AppConfig from a merged plain-dict configuration."""
    known = {"generator", "simulation", "filter", "campaign"}
    unknown = set(layers) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    generator = _replace_checked(
        GeneratorConfig(),
        layers.get("generator", {}),
        coerce={
            "arena": _as_arena,
            "diagonal_range_m": _as_pair,
            "rotation_offset_range_deg": _as_pair,
            "gap_range_m": _as_pair,
            "rng_seed": int,
            "rejection_budget": int,
        },
    )
    simulation = _build_simulation(layers.get("simulation", {}))
    filter_policy = _replace_checked(FilterPolicy(), layers.get("filter", {}))

    campaign = dict(layers.get("campaign", {}))
    unknown_c = set(campaign) - {"budget", "target", "workers"}
    if unknown_c:
        raise ConfigError(f"unknown campaign keys: {sorted(unknown_c)}")
    workers = campaign.get("workers")
    try:
        return AppConfig(
            generator=generator,
            simulation=simulation,
            filter=filter_policy,
            campaign_budget=int(campaign.get("budget", 200)),
            campaign_target=int(campaign.get("target", 5)),
            campaign_workers=None if workers is None else int(workers),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


def load_config(
    path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> AppConfig:
    """Resolve the layered configuration (defaults < file < env < overrides)."""
    merged: Dict[str, Any] = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = yaml.safe_load(fh)
            except yaml.YAMLError as e:
                raise ConfigError(f"cannot parse {path}: {e}") from e
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a mapping")
        merged = _deep_merge(merged, raw)
    merged = _deep_merge(merged, _env_layer(os.environ if env is None else env))
    if overrides:
        merged = _deep_merge(merged, overrides)
    return build_config(merged)


def snapshot(cfg: AppConfig) -> Dict[str, Any]:
    """Fully resolved, JSON-safe dump of a configuration (manifest record)."""
    g, s, f = cfg.generator, cfg.simulation, cfg.filter
    k, p, i, e = s.kinematics, s.planner, s.intrinsics, s.extrinsics
    return {
        "generator": {
            "arena": [g.arena.x_min, g.arena.y_min, g.arena.x_max, g.arena.y_max],
            "diagonal_range_m": list(g.diagonal_range_m),
            "obstacle_width_m": g.obstacle_width_m,
            "obstacle_height_m": g.obstacle_height_m,
            "rotation_offset_range_deg": list(g.rotation_offset_range_deg),
            "gap_range_m": list(g.gap_range_m),
            "length_ratio": g.length_ratio,
            "rng_seed": g.rng_seed,
            "rejection_budget": g.rejection_budget,
            "blocker_anchor": g.blocker_anchor,
        },
        "simulation": {
            "goal_tolerance_m": s.goal_tolerance_m,
            "max_steps": s.max_steps,
            "cruise_altitude_m": s.cruise_altitude_m,
            "cloud_stride": s.cloud_stride,
            "kinematics": {
                "v_max_mps": k.v_max_mps,
                "yaw_rate_max_deg_s": k.yaw_rate_max_deg_s,
                "dt_s": k.dt_s,
                "yaw_gate_fraction": k.yaw_gate_fraction,
                "speed_rule": k.speed_rule,
            },
            "planner": {
                "bin_resolution_deg": p.bin_resolution_deg,
                "tree_depth": p.tree_depth,
                "children_per_node": p.children_per_node,
                "node_step_m": p.node_step_m,
                "goal_weight": p.goal_weight,
                "heading_weight": p.heading_weight,
                "smoothness_weight": p.smoothness_weight,
                "obstacle_inflation_m": p.obstacle_inflation_m,
                "occupancy_threshold": p.occupancy_threshold,
            },
            "camera": {
                "width": i.width,
                "height": i.height,
                "fx": i.fx,
                "fy": i.fy,
                "cx": i.cx,
                "cy": i.cy,
                "max_range_m": i.max_range_m,
                "mount_translation": [e.mount_translation.x, e.mount_translation.y, e.mount_translation.z],
                "mount_pitch_deg": math.degrees(e.mount_pitch),
            },
        },
        "filter": {
            "violation_threshold_m": f.violation_threshold_m,
            "lower_cutoff_m": f.lower_cutoff_m,
            "require_goal_reached": f.require_goal_reached,
        },
        "campaign": {
            "budget": cfg.campaign_budget,
            "target": cfg.campaign_target,
            "workers": cfg.campaign_workers,
        },
    }


def default_mission(arena: ArenaRect, cruise_altitude_m: float = 2.5) -> Mission:
    """Straight crossing along the arena's vertical midline, south to north."""
    cx = arena.center_x
    return Mission(
        start=Vec3(cx, arena.y_min - 10.0, cruise_altitude_m),
        waypoints=(Vec3(cx, arena.y_max + 10.0, cruise_altitude_m),),
        landing=Vec3(cx, arena.y_max + 12.0, 0.0),
    )


def load_mission(path: str) -> Mission:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {path}: {e}") from e
    validate(raw, "mission")
    return Mission(
        start=Vec3(*[float(v) for v in raw["start"]]),
        waypoints=tuple(Vec3(*[float(v) for v in w]) for w in raw["waypoints"]),
        landing=Vec3(*[float(v) for v in raw["landing"]]),
    )
