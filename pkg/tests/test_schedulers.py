"""Placement policies against brute-force search and their invariants."""

import math

import numpy as np
import pytest

from ecoshift.footprint import WeightVector, migration_latency_steps, schedule_cost
from ecoshift.regions import build_profile_series
from ecoshift.schedulers import (
    SchedulerKind,
    candidate_starts,
    decide,
    post_decision_update,
)
from ecoshift.workload import AWS_VMS, JobRequest

from conftest import random_jobs, random_scenario

ALL_KINDS = list(SchedulerKind)


def job(**overrides):
    base = dict(id="j", origin="r0", data_regions={"r0"}, size_gb=0.0, nodes=2,
                utilization=0.5, vm=AWS_VMS["m4.l"], runtime_min=45.0,
                arrival_min=30, deadline_min=30 + 45 + 240)
    base.update(overrides)
    return JobRequest(**base)


def brute_force(kind, j, profiles, theta, data):
    """Independent exhaustive search over every feasible (region, start)."""
    region_ids = profiles.region_ids
    origin = region_ids.index(j.origin)
    if kind is SchedulerKind.LOCAL:
        return origin, j.arrival_min
    best = None
    for d in range(len(region_ids)):
        if kind is SchedulerKind.TEMPORAL and d != origin:
            continue
        lat = migration_latency_steps(j, region_ids[d], data)
        if kind in (SchedulerKind.SPATIAL_PERSISTENT, SchedulerKind.SPATIAL_NON_PERSISTENT):
            starts = [j.arrival_min]
        else:
            lo = j.arrival_min
            hi = math.floor(j.deadline_min - j.runtime_min - lat + 1e-9)
            starts = [t for t in range(lo, hi + 1)
                      if t == lo or t % 60 == 0]
        for t in starts:
            if t + lat + j.runtime_min > profiles.minutes + 1e-9:
                continue
            cost = schedule_cost(j, d, t, theta, profiles, data).cost
            if best is None or cost < best[0]:
                best = (cost, d, t)
    if best is None:
        return origin, j.arrival_min
    return best[1], best[2]


class TestDecideBasics:
    def test_local_runs_at_origin_on_arrival(self, coeffs):
        regions, mixes, _ = random_scenario(0)
        profiles = build_profile_series(regions, mixes, coeffs)
        d = decide(SchedulerKind.LOCAL, job(origin="r1", data_regions={"r1"}), profiles, WeightVector(1, 0, 0))
        assert (d.region_id, d.start, d.migrated, d.fallback) == ("r1", 30, False, False)

    def test_spatial_picks_cheaper_constant_region(self, coeffs):
        # Data everywhere, zero size: pure execution comparison.
        regions, mixes, _ = random_scenario(1, n_regions=2)
        profiles = build_profile_series(regions, mixes, coeffs)
        theta = WeightVector(1, 0, 0)
        j = job(data_regions={"r0", "r1"})
        d = decide(SchedulerKind.SPATIAL_PERSISTENT, j, profiles, theta)
        c0 = schedule_cost(j, 0, 30, theta, profiles).cost
        c1 = schedule_cost(j, 1, 30, theta, profiles).cost
        assert d.region_idx == (0 if c0 <= c1 else 1)
        assert d.start == j.arrival_min

    def test_temporal_stays_at_origin(self, coeffs):
        regions, mixes, _ = random_scenario(2)
        profiles = build_profile_series(regions, mixes, coeffs)
        d = decide(SchedulerKind.TEMPORAL, job(origin="r2", data_regions={"r2"}), profiles, WeightVector(0, 1, 0))
        assert d.region_id == "r2"
        assert not d.migrated

    def test_infeasible_falls_back_to_local(self, coeffs):
        regions, mixes, _ = random_scenario(3)
        profiles = build_profile_series(regions, mixes, coeffs)
        j = job(arrival_min=10, deadline_min=10, runtime_min=30.0)
        for kind in (SchedulerKind.TEMPORAL, SchedulerKind.SPATIO_TEMPORAL):
            d = decide(kind, j, profiles, WeightVector(1, 0, 0))
            assert d.fallback
            assert (d.region_id, d.start) == ("r0", 10)

    def test_decide_is_pure(self, coeffs):
        regions, mixes, _ = random_scenario(4)
        profiles = build_profile_series(regions, mixes, coeffs)
        j = job(size_gb=1.5, deadline_min=500)
        a = decide(SchedulerKind.SPATIO_TEMPORAL, j, profiles, WeightVector(1, 1, 1))
        b = decide(SchedulerKind.SPATIO_TEMPORAL, j, profiles, WeightVector(1, 1, 1))
        assert (a.region_idx, a.start, a.migrated) == (b.region_idx, b.start, b.migrated)


class TestCandidateStarts:
    def test_zero_length_window_is_arrival_only(self):
        j = job(arrival_min=45, deadline_min=45 + 45, runtime_min=45.0)
        got = candidate_starts(j, 0, SchedulerKind.TEMPORAL)
        assert got.tolist() == [45]

    def test_hourly_grid_with_offset_arrival(self):
        # Arrival at minute 30 with 4 h of start slack.
        j = job(arrival_min=30, runtime_min=45.0, deadline_min=30 + 240 + 45)
        got = candidate_starts(j, 0, SchedulerKind.TEMPORAL)
        assert got.tolist() == [30, 60, 120, 180, 240]

    def test_all_candidates_meet_deadline(self):
        j = job(arrival_min=37, runtime_min=61.0, deadline_min=400, size_gb=2.0)
        lat = 1
        got = candidate_starts(j, lat, SchedulerKind.SPATIO_TEMPORAL)
        assert got.size > 0
        assert all(t + lat + j.runtime_min <= j.deadline_min for t in got)

    def test_top_of_hour_arrival_not_duplicated(self):
        j = job(arrival_min=120, runtime_min=30.0, deadline_min=120 + 30 + 120)
        got = candidate_starts(j, 0, SchedulerKind.TEMPORAL)
        assert got.tolist() == [120, 180, 240]

    def test_invalid_window_empty(self):
        j = job(arrival_min=100, runtime_min=50.0, deadline_min=120)
        assert candidate_starts(j, 0, SchedulerKind.TEMPORAL).size == 0

    def test_non_time_shifting_kinds_start_at_arrival(self):
        j = job(arrival_min=77)
        for kind in (SchedulerKind.LOCAL, SchedulerKind.SPATIAL_PERSISTENT,
                     SchedulerKind.SPATIAL_NON_PERSISTENT):
            assert candidate_starts(j, 0, kind).tolist() == [77]


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", range(12))
    def test_matches_brute_force(self, coeffs, seed):
        regions, mixes, rng = random_scenario(seed, n_regions=3, hours=12)
        profiles = build_profile_series(regions, mixes, coeffs)
        region_ids = [r.id for r in regions]
        jobs = random_jobs(rng, region_ids, 15, horizon_minutes=5 * 60,
                           max_runtime=90.0, max_slack_minutes=290, extra_data_region=True)
        thetas = [WeightVector(1, 0, 0), WeightVector(0.333, 0.333, 0.334)]
        for j in jobs:
            for kind in ALL_KINDS:
                for theta in thetas:
                    got = decide(kind, j, profiles, theta)
                    expect = brute_force(kind, j, profiles, theta, j.data_regions)
                    assert (got.region_idx, got.start) == expect, (kind, j.id)


class TestPredictedDominance:
    @pytest.mark.parametrize("seed", range(8))
    def test_candidate_sets_nest(self, coeffs, seed):
        regions, mixes, rng = random_scenario(100 + seed, n_regions=3, hours=16)
        profiles = build_profile_series(regions, mixes, coeffs)
        region_ids = [r.id for r in regions]
        jobs = random_jobs(rng, region_ids, 20, horizon_minutes=8 * 60,
                           max_runtime=100.0, max_slack_minutes=240)
        theta = WeightVector(0.333, 0.333, 0.334)
        for j in jobs:
            costs = {kind: decide(kind, j, profiles, theta).cost.cost for kind in ALL_KINDS}
            tol = 1e-12 + 1e-9 * abs(costs[SchedulerKind.LOCAL])
            assert costs[SchedulerKind.SPATIAL_PERSISTENT] <= costs[SchedulerKind.LOCAL] + tol
            assert costs[SchedulerKind.TEMPORAL] <= costs[SchedulerKind.LOCAL] + tol
            assert costs[SchedulerKind.SPATIO_TEMPORAL] <= costs[SchedulerKind.TEMPORAL] + tol
            assert (costs[SchedulerKind.SPATIO_TEMPORAL]
                    <= costs[SchedulerKind.SPATIAL_PERSISTENT] + tol)


class TestAvailabilityUpdates:
    def make_decision(self, coeffs, kind, data):
        regions, mixes, _ = random_scenario(42, n_regions=2)
        profiles = build_profile_series(regions, mixes, coeffs)
        j = job(size_gb=1.0, data_regions=set(data), deadline_min=400)
        d = decide(kind, j, profiles, WeightVector(1, 0, 0), set(data))
        return d

    def test_persistent_union_after_migration(self, coeffs):
        d = self.make_decision(coeffs, SchedulerKind.SPATIAL_PERSISTENT, {"r0"})
        data = {"r0"}
        post_decision_update(SchedulerKind.SPATIAL_PERSISTENT, d, data)
        if d.migrated:
            assert d.region_id in data and len(data) == 2
        else:
            assert data == {"r0"}

    def test_non_persistent_leaves_set(self, coeffs):
        d = self.make_decision(coeffs, SchedulerKind.SPATIAL_NON_PERSISTENT, {"r0"})
        data = {"r0"}
        post_decision_update(SchedulerKind.SPATIAL_NON_PERSISTENT, d, data)
        assert data == {"r0"}

    def test_union_is_idempotent(self, coeffs):
        d = self.make_decision(coeffs, SchedulerKind.SPATIAL_PERSISTENT, {"r0", "r1"})
        assert not d.migrated  # data everywhere already
        data = {"r0", "r1"}
        post_decision_update(SchedulerKind.SPATIAL_PERSISTENT, d, data)
        assert data == {"r0", "r1"}
