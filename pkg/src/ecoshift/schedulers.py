"""Placement policies: local baseline, spatial shifting with and without
persistent storage, temporal shifting, and combined spatio-temporal
shifting.

All policies perform an exhaustive search of their feasible candidate set
and break cost ties deterministically by (lower region index, earlier
start). Time-shifted candidates are the arrival step plus every top-of-hour
step inside the deadline window; profiles only change hourly, so finer
search granularity cannot improve the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .footprint import (
    CostBreakdown,
    WeightVector,
    cost_over_starts,
    migration_latency_steps,
    schedule_cost,
)
from .regions import ProfileSeries
from .workload import JobRequest

MINUTES_PER_HOUR = 60


class SchedulerKind(Enum):
    LOCAL = "local"
    SPATIAL_PERSISTENT = "sp"
    SPATIAL_NON_PERSISTENT = "s"
    TEMPORAL = "t"
    SPATIO_TEMPORAL = "stp"


# Kinds that keep migrated data available for later instances of the family.
PERSISTENT_KINDS = frozenset({SchedulerKind.SPATIAL_PERSISTENT, SchedulerKind.SPATIO_TEMPORAL})
TIME_SHIFTING_KINDS = frozenset({SchedulerKind.TEMPORAL, SchedulerKind.SPATIO_TEMPORAL})


@dataclass(frozen=True)
class ScheduleDecision:
    """Chosen placement for one job plus its predicted cost."""

    job_id: str
    region_id: str
    region_idx: int
    start: int
    migrated: bool
    cost: CostBreakdown
    fallback: bool = False


def _window_end(job: JobRequest, latency: int) -> int:
    # Latest feasible start: t + latency + runtime <= deadline.
    return math.floor(job.deadline_min - job.runtime_min - latency + 1e-9)


def candidate_starts(job: JobRequest, latency: int, kind: SchedulerKind) -> np.ndarray:
    """Feasible start steps for one (job, region) pair under ``kind``.

    Non-time-shifting kinds start at the arrival step. Time-shifting kinds
    search the arrival step plus every top-of-hour step up to the latest
    start that still meets the deadline; an invalid window yields no
    candidates.
    """
    arrival = job.arrival_min
    if kind not in TIME_SHIFTING_KINDS:
        end = arrival
    else:
        end = _window_end(job, latency)
    if end < arrival:
        return np.empty(0, dtype=np.int64)
    first_top = ((arrival + MINUTES_PER_HOUR - 1) // MINUTES_PER_HOUR) * MINUTES_PER_HOUR
    tops = np.arange(first_top, end + 1, MINUTES_PER_HOUR, dtype=np.int64)
    if arrival % MINUTES_PER_HOUR == 0:
        return tops
    return np.concatenate(([arrival], tops))


def _coverage_filter(starts: np.ndarray, latency: int, runtime: float, minutes: int) -> np.ndarray:
    return starts[starts + latency + runtime <= minutes + 1e-9]


def decide(
    kind: SchedulerKind,
    job: JobRequest,
    profiles: ProfileSeries,
    theta: WeightVector,
    data_regions: set[str] | None = None,
) -> ScheduleDecision:
    """Place one job according to ``kind``.

    ``data_regions`` overrides the job's own availability set (the engine
    passes the family's current set). When no candidate fits the deadline
    even at the origin, the job falls back to local placement and the
    decision is flagged.
    """
    data = job.data_regions if data_regions is None else data_regions
    origin_idx = profiles.region_index(job.origin)

    if kind is SchedulerKind.LOCAL:
        return _fixed_decision(job, origin_idx, profiles, theta, data)

    if kind is SchedulerKind.TEMPORAL:
        candidates = [(origin_idx, candidate_starts(job, 0, kind))]
    elif kind in (SchedulerKind.SPATIAL_PERSISTENT, SchedulerKind.SPATIAL_NON_PERSISTENT):
        candidates = [
            (d, candidate_starts(job, 0, kind)) for d in range(len(profiles.region_ids))
        ]
    else:  # spatio-temporal
        candidates = []
        for d in range(len(profiles.region_ids)):
            lat = migration_latency_steps(job, profiles.region_ids[d], data)
            candidates.append((d, candidate_starts(job, lat, kind)))

    best: tuple[int, int] | None = None
    best_cost = math.inf
    for d, starts in candidates:
        lat = migration_latency_steps(job, profiles.region_ids[d], data)
        starts = _coverage_filter(starts, lat, job.runtime_min, profiles.minutes)
        if starts.size == 0:
            continue
        costs = cost_over_starts(job, d, starts, theta, profiles, data)
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost = float(costs[i])
            best = (d, int(starts[i]))

    if best is None:
        # Deadline cannot accommodate the job anywhere; run it locally.
        return _fixed_decision(job, origin_idx, profiles, theta, data, fallback=True)

    d, start = best
    region_id = profiles.region_ids[d]
    return ScheduleDecision(
        job_id=job.id,
        region_id=region_id,
        region_idx=d,
        start=start,
        migrated=region_id not in data,
        cost=schedule_cost(job, d, start, theta, profiles, data),
    )


def _fixed_decision(
    job: JobRequest,
    region_idx: int,
    profiles: ProfileSeries,
    theta: WeightVector,
    data: set[str],
    fallback: bool = False,
) -> ScheduleDecision:
    region_id = profiles.region_ids[region_idx]
    return ScheduleDecision(
        job_id=job.id,
        region_id=region_id,
        region_idx=region_idx,
        start=job.arrival_min,
        migrated=region_id not in data,
        cost=schedule_cost(job, region_idx, job.arrival_min, theta, profiles, data),
        fallback=fallback,
    )


def post_decision_update(
    kind: SchedulerKind, decision: ScheduleDecision, data_regions: set[str]
) -> set[str]:
    """Grow the availability set after a migrating decision.

    Persistent kinds keep migrated data in the destination region for
    future instances of the job family; the non-persistent spatial variant
    and the non-migrating kinds leave the set untouched.
    """
    if kind in PERSISTENT_KINDS and decision.migrated:
        data_regions.add(decision.region_id)
    return data_regions


def scheduler_label(kind: SchedulerKind) -> str:
    return kind.value


def parse_scheduler(text: str) -> SchedulerKind:
    try:
        return SchedulerKind(text.strip().lower())
    except ValueError:
        valid = ", ".join(k.value for k in SchedulerKind)
        raise ValueError(f"unknown scheduler {text!r} (valid: {valid})") from None


__all__ = [
    "SchedulerKind",
    "ScheduleDecision",
    "PERSISTENT_KINDS",
    "TIME_SHIFTING_KINDS",
    "candidate_starts",
    "decide",
    "post_decision_update",
    "scheduler_label",
    "parse_scheduler",
]
