"""Filtering evaluator: predict which scenarios force a too-close pass.

Each candidate scenario is flown in the closed-loop simulator; the minimum
obstacle distance over the trajectory decides the verdict.  Distances below
the violation threshold but above the crash cutoff mark the scenario as a
predicted violation worth escalating to a high-fidelity run; crashes, stuck
planners and sub-cutoff passes are discarded as invalid.

Campaigns evaluate candidates concurrently but consume results strictly in
candidate order and stop exactly at the requested violation count, so the
selected suite never depends on worker count or scheduling.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional

from .generator import GeneratorConfig, Mission, TestCase, generate
from .geometry import ArenaRect, Pose, Vec3
from .simulator import Outcome, SimConfig, Trajectory, simulate


class Verdict(enum.Enum):
    SAFE = "SAFE"
    PREDICTED_VIOLATION = "PREDICTED_VIOLATION"
    INVALID = "INVALID"


@dataclass(frozen=True)
class FilterPolicy:
    violation_threshold_m: float = 1.5
    # Below this the pass is treated as a de-facto crash and discarded.
    lower_cutoff_m: float = 0.25
    require_goal_reached: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower_cutoff_m < self.violation_threshold_m:
            raise ValueError("need 0 <= lower_cutoff_m < violation_threshold_m")


@dataclass(frozen=True)
class EvaluationReport:
    case: TestCase
    outcome: Outcome
    min_distance_m: float
    time_of_min_s: float
    verdict: Verdict
    wall_clock_ms: float
    trajectory: Trajectory


def start_pose_for(tc: TestCase, cfg: SimConfig) -> Pose:
    """Entry pose: on the SoI's first endpoint at cruise altitude, facing along it."""
    s = tc.soi.start
    return Pose(Vec3(s.x, s.y, cfg.cruise_altitude_m), tc.soi.bearing)


def goal_for(tc: TestCase, cfg: SimConfig) -> Vec3:
    e = tc.soi.end
    return Vec3(e.x, e.y, cfg.cruise_altitude_m)


def assign_verdict(outcome: Outcome, min_distance: float, policy: FilterPolicy) -> Verdict:
    if outcome in (Outcome.COLLISION, Outcome.PLANNER_STUCK):
        return Verdict.INVALID
    if min_distance < policy.lower_cutoff_m:
        return Verdict.INVALID
    if policy.require_goal_reached and outcome is not Outcome.REACHED_GOAL:
        return Verdict.INVALID
    if min_distance < policy.violation_threshold_m:
        return Verdict.PREDICTED_VIOLATION
    return Verdict.SAFE


def evaluate(tc: TestCase, cfg: SimConfig, policy: FilterPolicy) -> EvaluationReport:
    """Fly one candidate and grade it."""
    start = start_pose_for(tc, cfg)
    goal = goal_for(tc, cfg)
    t0 = time.perf_counter()
    traj = simulate(goal, start, tc.obstacles, cfg)
    elapsed_ms = (time.perf_counter() - t0) * 1e3

    min_d = math.inf
    t_min = 0.0
    for s in traj.samples:
        if s.min_obstacle_distance < min_d:
            min_d = s.min_obstacle_distance
            t_min = s.t
    assert traj.outcome is not None
    verdict = assign_verdict(traj.outcome, min_d, policy)
    return EvaluationReport(
        case=tc,
        outcome=traj.outcome,
        min_distance_m=min_d,
        time_of_min_s=t_min,
        verdict=verdict,
        wall_clock_ms=elapsed_ms,
        trajectory=traj,
    )


@dataclass
class CampaignStats:
    budget: int
    target: int
    candidates_evaluated: int
    safe: int
    predicted_violation: int
    invalid: int
    total_wall_clock_s: float
    mean_ms_per_simulation: float
    mean_ms_per_step: float

    def to_dict(self) -> Dict:
        # Wall-clock measurements stay off the serialized record so identical
        # runs serialize identically; read them from the dataclass instead.
        return {
            "budget": self.budget,
            "target": self.target,
            "candidates_evaluated": self.candidates_evaluated,
            "verdicts": {
                "SAFE": self.safe,
                "PREDICTED_VIOLATION": self.predicted_violation,
                "INVALID": self.invalid,
            },
        }


@dataclass
class CampaignResult:
    suite: List[EvaluationReport]  # predicted violations, closest pass first
    reports: List[EvaluationReport]  # every kept evaluation, candidate order
    stats: CampaignStats


def run_campaign(
    mission: Mission,
    arena: ArenaRect,
    gen_cfg: GeneratorConfig,
    sim_cfg: SimConfig,
    policy: FilterPolicy,
    budget: int,
    target: int,
    max_workers: Optional[int] = None,
) -> CampaignResult:
    """Generate and evaluate candidates until `target` violations or budget end.

    Candidates are consumed in generation order; evaluation fans out to a
    thread pool but results are folded back in candidate order, and the run
    cuts exactly after the candidate that produced the target-th violation.
    Anything evaluated speculatively past the cut is dropped, which keeps
    the output identical for any worker count.
    """
    if target < 0 or budget < 0:
        raise ValueError("budget and target must be >= 0")
    if budget < target:
        raise ValueError("budget must be at least target")

    t0 = time.perf_counter()
    kept: List[EvaluationReport] = []
    if target > 0:
        workers = max_workers or min(8, os.cpu_count() or 1)
        chunk = max(1, workers * 2)
        stream = generate(mission, arena, gen_cfg, budget)
        violations = 0
        done = False
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while not done:
                batch = list(itertools.islice(stream, chunk))
                if not batch:
                    break
                futures = [pool.submit(evaluate, tc, sim_cfg, policy) for tc in batch]
                for fut in futures:
                    rep = fut.result()
                    kept.append(rep)
                    if rep.verdict is Verdict.PREDICTED_VIOLATION:
                        violations += 1
                        if violations >= target:
                            done = True
                            break
    total_s = time.perf_counter() - t0

    suite = sorted(
        (r for r in kept if r.verdict is Verdict.PREDICTED_VIOLATION),
        key=lambda r: (r.min_distance_m, r.case.index),
    )
    n = len(kept)
    steps = sum(max(len(r.trajectory) - 1, 1) for r in kept)
    sim_ms = sum(r.wall_clock_ms for r in kept)
    stats = CampaignStats(
        budget=budget,
        target=target,
        candidates_evaluated=n,
        safe=sum(1 for r in kept if r.verdict is Verdict.SAFE),
        predicted_violation=sum(1 for r in kept if r.verdict is Verdict.PREDICTED_VIOLATION),
        invalid=sum(1 for r in kept if r.verdict is Verdict.INVALID),
        total_wall_clock_s=total_s,
        mean_ms_per_simulation=sim_ms / n if n else 0.0,
        mean_ms_per_step=sim_ms / steps if steps else 0.0,
    )
    return CampaignResult(suite=suite, reports=kept, stats=stats)


def report_to_dict(rep: EvaluationReport) -> Dict:
    """JSON-safe summary of one evaluation (trajectory stays in its CSV).

    Timing lives on the EvaluationReport only: serialized reports must be
    byte-stable across re-runs.
    """
    min_d = rep.min_distance_m
    return {
        "case_seed": rep.case.seed,
        "case_index": rep.case.index,
        "verdict": rep.verdict.value,
        "outcome": rep.outcome.value,
        "min_distance_m": None if math.isinf(min_d) else min_d,
        "time_of_min_s": rep.time_of_min_s,
        "steps": max(len(rep.trajectory) - 1, 0),
    }
