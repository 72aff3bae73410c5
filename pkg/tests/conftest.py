"""Shared builders for randomized scenarios and small fixtures."""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np
import pytest

from ecoshift.cli import _packaged
from ecoshift.grid import MixSeries, SOURCES, load_coefficients
from ecoshift.regions import Region
from ecoshift.workload import AWS_VMS, JobRequest

UTC0 = datetime(2024, 1, 15, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def coeffs():
    return load_coefficients(_packaged("coefficients.json"))


def constant_mix(grid_id: str, hours: int, shares_by_name: dict[str, float]) -> MixSeries:
    row = np.zeros(len(SOURCES))
    for name, value in shares_by_name.items():
        row[[s.value for s in SOURCES].index(name)] = value
    row = row / row.sum()
    return MixSeries(grid_id=grid_id, start=UTC0, shares=np.tile(row, (hours, 1)))


def random_mix(grid_id: str, hours: int, rng: np.random.Generator) -> MixSeries:
    shares = rng.dirichlet(np.full(len(SOURCES), 0.7), size=hours)
    return MixSeries(grid_id=grid_id, start=UTC0, shares=shares)


def make_regions(n: int, rng: np.random.Generator | None = None) -> list[Region]:
    rng = rng or np.random.default_rng(0)
    out = []
    for i in range(n):
        out.append(
            Region(
                id=f"r{i}",
                grid_id=f"g{i}",
                pue=float(1.05 + rng.random() * 0.4),
                wue=float(rng.random() * 1.5),
                land_area_m2=float(3e4 + rng.random() * 2e5),
                annual_it_energy_kwh=8.76e8,
            )
        )
    return out


def random_scenario(seed: int, n_regions: int = 3, hours: int = 30):
    """Regions with independent random grids over ``hours`` hours."""
    rng = np.random.default_rng(seed)
    regions = make_regions(n_regions, rng)
    mixes = {r.grid_id: random_mix(r.grid_id, hours, rng) for r in regions}
    return regions, mixes, rng


def random_jobs(
    rng: np.random.Generator,
    region_ids: list[str],
    n: int,
    horizon_minutes: int,
    max_runtime: float = 120.0,
    max_slack_minutes: int = 300,
    zero_size: bool = False,
    extra_data_region: bool = False,
) -> list[JobRequest]:
    """Jobs with deadline slack of at least the runtime plus any latency."""
    vms = list(AWS_VMS.values())
    jobs = []
    for i in range(n):
        origin = region_ids[rng.integers(0, len(region_ids))]
        data = {origin}
        if extra_data_region and len(region_ids) > 1 and rng.random() < 0.4:
            data.add(region_ids[rng.integers(0, len(region_ids))])
        runtime = float(1 + rng.random() * (max_runtime - 1))
        arrival = int(rng.integers(0, horizon_minutes))
        size = 0.0 if zero_size else float(rng.random() * 2.0)
        vm = vms[rng.integers(0, len(vms))]
        # Worst-case transfer latency so every region has a valid window.
        lat = int(np.ceil(size * 8000.0 / vm.bandwidth_mbps / 60.0))
        slack = int(rng.integers(lat + 1, lat + max_slack_minutes))
        deadline = arrival + int(np.ceil(runtime)) + slack
        jobs.append(
            JobRequest(
                id=f"job-{i:04d}",
                origin=origin,
                data_regions=data,
                size_gb=size,
                nodes=int(rng.integers(1, 9)),
                utilization=float(rng.random()),
                vm=vm,
                runtime_min=runtime,
                arrival_min=arrival,
                deadline_min=deadline,
            )
        )
    return jobs
