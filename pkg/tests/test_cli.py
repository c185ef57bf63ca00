"""End-to-end checks of the command-line pipeline.

Every test drives ``main(argv)`` in process; exit codes are the contract.
A shared low-resolution config keeps simulation runs fast.
"""

import json
import math
import xml.etree.ElementTree as ET

import pytest

from uavlofi.cli import main
from uavlofi.config import load_config
from uavlofi.generator import case_to_dict, generate

FAST_CFG = """\
simulation:
  camera:
    width: 160
    height: 120
  max_steps: 150
"""


@pytest.fixture()
def cfg_file(tmp_path):
    p = tmp_path / "cfg.yaml"
    p.write_text(FAST_CFG, encoding="utf-8")
    return str(p)


def _case_doc(obstacles, soi_start, soi_end):
    return {
        "mission": {
            "start": [0.0, -30.0, 2.5],
            "waypoints": [[0.0, 30.0, 2.5]],
            "landing": [0.0, 32.0, 0.0],
        },
        "obstacles": [
            {"x": o[0], "y": o[1], "l": o[2], "w": o[3], "h": o[4], "r": o[5]}
            for o in obstacles
        ],
        "soi": {"start": list(soi_start), "end": list(soi_end)},
        "seed": 0,
        "index": 0,
        "canonical_transform": [],
    }


# parallel walls, inner faces 1.0 m from the x = 0 line, flight starts between them
_CORRIDOR = _case_doc(
    [(1.5, 0.0, 30.0, 1.0, 20.0, math.pi / 2),
     (-1.5, 0.0, 30.0, 1.0, 20.0, math.pi / 2)],
    (0.0, -12.0, 2.5), (0.0, 20.0, 2.5),
)
# same walls squeezed until the clearance drops below the lower cutoff
_TIGHT = _case_doc(
    [(0.7, 0.0, 30.0, 1.0, 20.0, math.pi / 2),
     (-0.7, 0.0, 30.0, 1.0, 20.0, math.pi / 2)],
    (0.0, -12.0, 2.5), (0.0, 20.0, 2.5),
)
# obstacles far off to the sides of a short straight hop
_CLEAR = _case_doc(
    [(15.0, 0.0, 6.0, 2.0, 20.0, 0.0),
     (-15.0, 0.0, 6.0, 2.0, 20.0, 0.0)],
    (0.0, -5.0, 2.5), (0.0, 5.0, 2.5),
)


def _write_case(tmp_path, doc, name="case.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return str(p)


# ----------------------------------------------------------------- generate


def test_generate_writes_cases_and_manifest(tmp_path, cfg_file):
    out = tmp_path / "gen"
    code = main(["generate", "--config", cfg_file, "--seed", "0",
                 "--count", "2", "--out", str(out)])
    assert code == 0
    docs = [json.loads((out / f"case_{i:05d}.json").read_text()) for i in (0, 1)]

    cfg = load_config(cfg_file)
    from uavlofi.config import default_mission
    mission = default_mission(cfg.generator.arena, cfg.simulation.cruise_altitude_m)
    expected = [case_to_dict(tc)
                for tc in generate(mission, cfg.generator.arena, cfg.generator, 2)]
    assert docs == expected

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "generate"
    assert manifest["seed"] == 0
    assert manifest["outputs"] == ["case_00000.json", "case_00001.json"]
    assert manifest["config"]["generator"]["rng_seed"] == 0


def test_generate_reruns_byte_identically(tmp_path, cfg_file, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["generate", "--config", cfg_file, "--count", "2",
                     "--out", str(out)]) == 0
        outs.append(out)
    for fname in ("case_00000.json", "case_00001.json", "manifest.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
    created = json.loads((outs[0] / "manifest.json").read_text())["created_utc"]
    assert created == "2023-11-14T22:13:20+00:00"


# ----------------------------------------------------------------- simulate


def test_simulate_flags_the_corridor(tmp_path, cfg_file, capsys):
    case = _write_case(tmp_path, _CORRIDOR)
    out = tmp_path / "sim"
    code = main(["simulate", case, "--config", cfg_file, "--out", str(out)])
    assert code == 10

    report = json.loads((out / "report.json").read_text())
    assert report["verdict"] == "PREDICTED_VIOLATION"
    assert 0.25 <= report["min_distance_m"] < 1.5

    csv_lines = (out / "trajectory.csv").read_text().splitlines()
    assert csv_lines[0] == "t,x,y,z,yaw,min_dist"
    assert csv_lines[-1].startswith("# outcome: ")
    assert len(csv_lines) - 2 == report["steps"] + 1  # samples include t = 0

    ET.fromstring((out / "plot.svg").read_text())  # well-formed XML

    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert line.startswith("simulate: verdict=PREDICTED_VIOLATION outcome=TIMEOUT")
    assert "wall_clock_ms=" in line


def test_simulate_safe_crossing(tmp_path, cfg_file):
    case = _write_case(tmp_path, _CLEAR)
    out = tmp_path / "sim"
    assert main(["simulate", case, "--config", cfg_file, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"] == "SAFE" and report["outcome"] == "REACHED_GOAL"


def test_simulate_invalid_below_lower_cutoff(tmp_path, cfg_file):
    case = _write_case(tmp_path, _TIGHT)
    out = tmp_path / "sim"
    assert main(["simulate", case, "--config", cfg_file, "--out", str(out)]) == 20
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"] == "INVALID"
    assert report["min_distance_m"] < 0.25


def test_simulate_dump_artifacts(tmp_path, cfg_file):
    case = _write_case(tmp_path, _CLEAR)
    out = tmp_path / "sim"
    assert main(["simulate", case, "--config", cfg_file, "--out", str(out),
                 "--dump-depth", "--dump-cloud", "--debug"]) == 0

    assert (out / "depth.pgm").read_bytes().startswith(b"P5\n")
    for line in (out / "cloud.xyz").read_text().splitlines():
        assert len([float(v) for v in line.split()]) == 3
    nodes = [json.loads(l) for l in (out / "tree.jsonl").read_text().splitlines()]
    assert nodes and all(
        set(n) == {"position", "yaw", "depth", "cost", "parent"} for n in nodes
    )
    manifest = json.loads((out / "manifest.json").read_text())
    assert {"depth.pgm", "cloud.xyz", "tree.jsonl"} <= set(manifest["outputs"])


def test_simulate_reruns_byte_identically(tmp_path, cfg_file, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    case = _write_case(tmp_path, _CLEAR)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["simulate", case, "--config", cfg_file, "--out", str(out)]) == 0
        outs.append(out)
    for fname in ("trajectory.csv", "report.json", "plot.svg", "manifest.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


# ----------------------------------------------------------------- campaign


def test_campaign_stops_at_first_violation(tmp_path, cfg_file):
    out = tmp_path / "camp"
    code = main(["campaign", "--config", cfg_file, "--budget", "3",
                 "--target", "1", "--workers", "1", "--out", str(out)])
    assert code == 0

    stats = json.loads((out / "stats.json").read_text())
    assert stats["budget"] == 3 and stats["target"] == 1
    assert stats["candidates_evaluated"] == 1  # the very first case violates
    assert stats["verdicts"] == {"SAFE": 0, "PREDICTED_VIOLATION": 1, "INVALID": 0}
    assert stats["suite"][0]["file"] == "suite/case_00000.json"
    assert (out / "suite" / "case_00000.json").exists()

    rows = (out / "cases.csv").read_text().splitlines()
    assert rows[0] == "index,verdict,outcome,min_distance_m,time_of_min_s,steps"
    assert len(rows) == 2 and rows[1].startswith("0,PREDICTED_VIOLATION,")

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "campaign"
    assert "stats.json" in manifest["outputs"]


def test_campaign_worker_count_does_not_change_artifacts(tmp_path, cfg_file,
                                                         monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    outs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        assert main(["campaign", "--config", cfg_file, "--budget", "3",
                     "--target", "2", "--workers", workers,
                     "--out", str(out)]) == 0
        outs.append(out)
    a, b = outs
    names = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert names == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    for name in names:
        if name.name == "manifest.json":
            continue  # legitimately records the differing --workers value
        assert (a / name).read_bytes() == (b / name).read_bytes(), name

    manifests = []
    for out in outs:
        doc = json.loads((out / "manifest.json").read_text())
        doc["config"]["campaign"].pop("workers")
        manifests.append(doc)
    assert manifests[0] == manifests[1]


# ------------------------------------------------------------------- export


def test_export_bundles_a_suite(tmp_path, cfg_file):
    gen = tmp_path / "gen"
    assert main(["generate", "--config", cfg_file, "--count", "2",
                 "--out", str(gen)]) == 0
    bundle = tmp_path / "handoff" / "bundle.json"
    assert main(["export", str(gen), "--out", str(bundle)]) == 0

    doc = json.loads(bundle.read_text())
    assert doc["cases"] == [
        json.loads((gen / f"case_{i:05d}.json").read_text()) for i in (0, 1)
    ]
    manifest = json.loads((bundle.parent / "bundle.manifest.json").read_text())
    assert manifest["command"] == "export"
    assert manifest["outputs"] == ["bundle.json"]


def test_export_of_an_empty_directory(tmp_path):
    empty = tmp_path / "nothing"
    empty.mkdir()
    bundle = tmp_path / "bundle.json"
    assert main(["export", str(empty), "--out", str(bundle)]) == 0
    assert json.loads(bundle.read_text()) == {"cases": []}


# --------------------------------------------------------------- exit codes


def test_exit_3_when_mission_never_crosses(tmp_path, cfg_file):
    mission = tmp_path / "sideways.yaml"
    mission.write_text(
        "start: [-30, 0, 2.5]\nwaypoints: [[30, 0, 2.5]]\nlanding: [32, 0, 0]\n",
        encoding="utf-8",
    )
    assert main(["generate", "--config", cfg_file, "--mission", str(mission),
                 "--out", str(tmp_path / "out")]) == 3


def test_exit_4_when_sampling_exhausts(tmp_path):
    cfg = tmp_path / "hopeless.yaml"
    cfg.write_text(
        "generator:\n  diagonal_range_m: [39.0, 39.5]\n  rejection_budget: 50\n",
        encoding="utf-8",
    )
    assert main(["generate", "--config", str(cfg),
                 "--out", str(tmp_path / "out")]) == 4


def test_exit_2_on_missing_files(tmp_path):
    assert main(["generate", "--config", str(tmp_path / "absent.yaml"),
                 "--out", str(tmp_path / "out")]) == 2
    assert main(["simulate", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "out")]) == 2


def test_exit_2_on_malformed_cases(tmp_path, cfg_file):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("not json{", encoding="utf-8")
    assert main(["simulate", str(bad_json), "--config", cfg_file,
                 "--out", str(tmp_path / "out")]) == 2

    incomplete = dict(_CLEAR)
    del incomplete["obstacles"]
    case = _write_case(tmp_path, incomplete, "incomplete.json")
    assert main(["simulate", case, "--config", cfg_file,
                 "--out", str(tmp_path / "out")]) == 2


def test_exit_2_on_bad_campaign_arguments(tmp_path, cfg_file):
    assert main(["campaign", "--config", cfg_file, "--budget", "1",
                 "--target", "5", "--out", str(tmp_path / "out")]) == 2


def test_exit_2_when_start_pose_is_blocked(tmp_path, cfg_file):
    doc = _case_doc(
        [(0.0, 0.0, 6.0, 2.0, 20.0, 0.0), (10.0, 0.0, 6.0, 2.0, 20.0, 0.0)],
        (0.0, 0.0, 2.5), (0.0, 9.0, 2.5),
    )
    case = _write_case(tmp_path, doc, "blocked.json")
    assert main(["simulate", case, "--config", cfg_file,
                 "--out", str(tmp_path / "out")]) == 2
