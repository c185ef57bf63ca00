"""Command-line pipeline: generate scenarios, fly them, filter campaigns.

Exit codes: 0 success (simulate: SAFE), 10 simulate PREDICTED_VIOLATION,
20 simulate INVALID, 2 usage/config/schema errors, 3 mission never crosses
the arena, 4 rejection sampling exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .config import (
    AppConfig,
    ConfigError,
    default_mission,
    load_config,
    load_mission,
    snapshot,
)
from .evaluation import Verdict, evaluate, report_to_dict, run_campaign
from .generator import (
    NoSegmentOfInterest,
    SamplingExhausted,
    case_from_dict,
    case_to_dict,
    generate,
)
from .planner import plan
from .plotting import render_svg, write_svg
from .rendering import depth_to_cloud, render_depth, write_pgm, write_xyz
from .simulator import write_csv
from .validation import SchemaViolation, validate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_SOI = 3
EXIT_EXHAUSTED = 4
EXIT_VIOLATION = 10
EXIT_INVALID = 20

_VERDICT_EXIT = {
    Verdict.SAFE: EXIT_OK,
    Verdict.PREDICTED_VIOLATION: EXIT_VIOLATION,
    Verdict.INVALID: EXIT_INVALID,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="uavlofi",
        description="Low-fidelity UAV avoidance simulator and scenario filter.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="YAML/JSON config file")
        sp.add_argument("--seed", type=int, help="override the generator seed")
        sp.add_argument("--out", default="out", help="output directory (default: out)")

    g = sub.add_parser("generate", help="emit test-case JSON files")
    common(g)
    g.add_argument("--mission", help="mission file (default: straight arena crossing)")
    g.add_argument("--count", type=int, default=1, help="cases to produce")

    s = sub.add_parser("simulate", help="fly one test case and grade it")
    common(s)
    s.add_argument("case", help="test-case JSON file")
    s.add_argument("--dump-depth", action="store_true", help="write the first depth frame as PGM")
    s.add_argument("--dump-cloud", action="store_true", help="write the first point cloud as XYZ")
    s.add_argument("--debug", action="store_true", help="dump the first lookahead tree as JSON lines")

    c = sub.add_parser("campaign", help="generate + evaluate until enough violations")
    common(c)
    c.add_argument("--mission", help="mission file (default: straight arena crossing)")
    c.add_argument("--budget", type=int, help="max candidates to evaluate")
    c.add_argument("--target", type=int, help="violations wanted")
    c.add_argument("--workers", type=int, help="evaluation thread count")

    e = sub.add_parser("export", help="bundle a suite directory into one hand-off JSON")
    e.add_argument("suite_dir", help="directory of case_*.json files")
    e.add_argument("--seed", type=int, help="recorded in the manifest only")
    e.add_argument("--out", default="suite_export.json", help="bundle file path")
    return p


def _write_json(obj: Any, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


def _created_utc() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for fully reproducible manifests.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (
        datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        if epoch
        else datetime.now(timezone.utc)
    )
    return when.isoformat(timespec="seconds")


def _write_manifest(
    out_dir: Path,
    command: str,
    cfg: Optional[AppConfig],
    seed: Optional[int],
    config_path: Optional[str],
    outputs: List[str],
    name: str = "manifest.json",
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config_path": config_path,
        "config": snapshot(cfg) if cfg is not None else {},
        "created_utc": _created_utc(),
        "outputs": outputs,
    }
    validate(manifest, "manifest")
    _write_json(manifest, out_dir / name)


def _resolve_config(args: argparse.Namespace) -> AppConfig:
    overrides: Dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        overrides["generator"] = {"rng_seed": args.seed}
    campaign: Dict[str, Any] = {}
    for key in ("budget", "target", "workers"):
        if getattr(args, key, None) is not None:
            campaign[key] = getattr(args, key)
    if campaign:
        overrides["campaign"] = campaign
    return load_config(getattr(args, "config", None), overrides=overrides)


def _mission_for(args: argparse.Namespace, cfg: AppConfig):
    if getattr(args, "mission", None):
        return load_mission(args.mission)
    return default_mission(cfg.generator.arena, cfg.simulation.cruise_altitude_m)


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    mission = _mission_for(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs: List[str] = []
    for tc in generate(mission, cfg.generator.arena, cfg.generator, args.count):
        doc = case_to_dict(tc)
        validate(doc, "testcase")
        name = f"case_{tc.index:05d}.json"
        _write_json(doc, out / name)
        outputs.append(name)
    _write_manifest(out, "generate", cfg, cfg.generator.rng_seed, args.config, outputs)
    print(f"generate: wrote {len(outputs)} case(s) to {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    with open(args.case, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaViolation("testcase", "/", f"not valid JSON: {e}") from e
    validate(raw, "testcase")
    tc = case_from_dict(raw)

    rep = evaluate(tc, cfg.simulation, cfg.filter)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = ["trajectory.csv", "plot.svg", "report.json"]

    write_csv(rep.trajectory, str(out / "trajectory.csv"))
    svg = render_svg(cfg.generator.arena, tc.obstacles, tc.soi, rep.trajectory)
    write_svg(svg, str(out / "plot.svg"))
    doc = report_to_dict(rep)
    validate(doc, "report")
    _write_json(doc, out / "report.json")

    if args.dump_depth or args.dump_cloud or args.debug:
        from .evaluation import goal_for, start_pose_for

        start = start_pose_for(tc, cfg.simulation)
        img = render_depth(tc.obstacles, start, cfg.simulation.intrinsics, cfg.simulation.extrinsics)
        cloud = depth_to_cloud(img, start, cfg.simulation.extrinsics, stride=cfg.simulation.cloud_stride)
        if args.dump_depth:
            write_pgm(img, str(out / "depth.pgm"))
            outputs.append("depth.pgm")
        if args.dump_cloud:
            write_xyz(cloud, str(out / "cloud.xyz"))
            outputs.append("cloud.xyz")
        if args.debug:
            _, tree = plan(cloud, start, goal_for(tc, cfg.simulation), None, cfg.simulation.planner)
            with open(out / "tree.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                for node in tree:
                    fh.write(
                        json.dumps(
                            {
                                "position": [node.position.x, node.position.y, node.position.z],
                                "yaw": node.yaw,
                                "depth": node.depth,
                                "cost": node.accumulated_cost,
                                "parent": node.parent,
                            }
                        )
                        + "\n"
                    )
            outputs.append("tree.jsonl")

    _write_manifest(out, "simulate", cfg, getattr(args, "seed", None), args.config, outputs)
    min_d = "inf" if math.isinf(rep.min_distance_m) else f"{rep.min_distance_m:.3f}"
    print(
        f"simulate: verdict={rep.verdict.value} outcome={rep.outcome.value} "
        f"min_distance={min_d} steps={max(len(rep.trajectory) - 1, 0)} "
        f"wall_clock_ms={rep.wall_clock_ms:.1f}"
    )
    return _VERDICT_EXIT[rep.verdict]


def cmd_campaign(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    mission = _mission_for(args, cfg)
    result = run_campaign(
        mission,
        cfg.generator.arena,
        cfg.generator,
        cfg.simulation,
        cfg.filter,
        budget=cfg.campaign_budget,
        target=cfg.campaign_target,
        max_workers=cfg.campaign_workers,
    )

    out = Path(args.out)
    suite_dir = out / "suite"
    suite_dir.mkdir(parents=True, exist_ok=True)
    outputs: List[str] = []
    suite_entries = []
    for rep in result.suite:
        doc = case_to_dict(rep.case)
        validate(doc, "testcase")
        name = f"case_{rep.case.index:05d}.json"
        _write_json(doc, suite_dir / name)
        outputs.append(f"suite/{name}")
        suite_entries.append(
            {
                "file": f"suite/{name}",
                "case_index": rep.case.index,
                "min_distance_m": None if math.isinf(rep.min_distance_m) else rep.min_distance_m,
            }
        )

    rows = ["index,verdict,outcome,min_distance_m,time_of_min_s,steps"]
    for rep in result.reports:
        rows.append(
            f"{rep.case.index},{rep.verdict.value},{rep.outcome.value},"
            f"{rep.min_distance_m!r},{rep.time_of_min_s!r},{max(len(rep.trajectory) - 1, 0)}"
        )
    with open(out / "cases.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    outputs.append("cases.csv")

    stats_doc = result.stats.to_dict()
    stats_doc["suite"] = suite_entries
    validate(stats_doc, "campaign")
    _write_json(stats_doc, out / "stats.json")
    outputs.append("stats.json")

    _write_manifest(out, "campaign", cfg, cfg.generator.rng_seed, args.config, outputs)
    print(
        f"campaign: {result.stats.predicted_violation} violation(s) in "
        f"{result.stats.candidates_evaluated} evaluated (budget {cfg.campaign_budget}, "
        f"{result.stats.mean_ms_per_simulation:.0f} ms/sim) -> {out}"
    )
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    suite_dir = Path(args.suite_dir)
    files = sorted(suite_dir.glob("case_*.json"))
    cases = []
    for f in files:
        with open(f, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        validate(doc, "testcase")
        cases.append(doc)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _write_json({"cases": cases}, out_path)
    _write_manifest(
        out_path.parent,
        "export",
        None,
        getattr(args, "seed", None),
        None,
        [out_path.name],
        name=out_path.stem + ".manifest.json",
    )
    print(f"export: bundled {len(cases)} case(s) into {out_path}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "simulate": cmd_simulate,
        "campaign": cmd_campaign,
        "export": cmd_export,
    }
    try:
        return handlers[args.command](args)
    except SchemaViolation as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NoSegmentOfInterest as e:
        print(f"error: NO_SOI: {e}", file=sys.stderr)
        return EXIT_NO_SOI
    except SamplingExhausted as e:
        print(f"error: SAMPLING_EXHAUSTED: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        # bad argument combinations surfaced by library-level validation
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
