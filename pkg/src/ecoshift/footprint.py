"""Footprint evaluation for (job, region, start) candidates.

Predicted costs combine the execution integral over normalized profiles
with the migration energy priced at the normalized global profile of the
start step, weighted by the factor weight vector. Actual footprints use
raw profiles built from true mixes and are expressed in physical units
(gCO2e, liters, m2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .regions import HorizonOverflowError, ProfileSeries
from .workload import JobRequest, power_draw

# Network energy intensity of inter-region transfers, kWh per GB.
NEI_KWH_PER_GB = 0.06

# Megabits per gigabyte (decimal), for transfer-latency arithmetic.
MBITS_PER_GB = 8000.0


@dataclass(frozen=True)
class WeightVector:
    """Weights combining the carbon, water, and land cost components."""

    carbon: float
    water: float
    land: float

    def __post_init__(self) -> None:
        vec = (self.carbon, self.water, self.land)
        if any(w < 0 for w in vec):
            raise ValueError("factor weights must be nonnegative")
        if sum(vec) == 0:
            raise ValueError("factor weights must not all be zero")

    def as_array(self) -> np.ndarray:
        return np.array([self.carbon, self.water, self.land])

    def label(self) -> str:
        return f"{self.carbon:g}:{self.water:g}:{self.land:g}"

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        parts = text.replace(":", ",").split(",")
        if len(parts) != 3:
            raise ValueError(f"expected three weights, got {text!r}")
        return cls(*(float(p) for p in parts))


@dataclass(frozen=True)
class CostBreakdown:
    """Predicted cost of one (job, region, start) candidate."""

    execution: np.ndarray  # normalized-intensity kWh per factor
    migration: np.ndarray  # migration energy times normalized global profile
    cost: float

    @property
    def total(self) -> np.ndarray:
        return self.execution + self.migration


def _data_regions(job: JobRequest, data_regions: set[str] | None) -> set[str]:
    return job.data_regions if data_regions is None else data_regions


def migration_energy(job: JobRequest, region_id: str, data_regions: set[str] | None = None) -> float:
    """Transfer energy in kWh: size times NEI when data must move, else 0."""
    if region_id in _data_regions(job, data_regions):
        return 0.0
    return job.size_gb * NEI_KWH_PER_GB


def transfer_latency_steps(job: JobRequest) -> int:
    """Latency of moving the job's data once, in whole minute steps.

    The transfer moves ``size_gb`` at the VM's bandwidth; seconds are
    ``size * 8000 / bandwidth_mbps``, rounded up to the step grid.
    """
    if job.size_gb == 0:
        return 0
    seconds = job.size_gb * MBITS_PER_GB / job.vm.bandwidth_mbps
    return math.ceil(seconds / 60.0 - 1e-12)


def migration_latency_steps(
    job: JobRequest, region_id: str, data_regions: set[str] | None = None
) -> int:
    """Transfer latency toward ``region_id``: zero when the data is already there."""
    if region_id in _data_regions(job, data_regions):
        return 0
    return transfer_latency_steps(job)


def job_power_kw(job: JobRequest) -> float:
    return power_draw(job.vm, job.utilization, job.nodes) / 1000.0


def execution_footprint(
    job: JobRequest,
    region_idx: int,
    start: int,
    profiles: ProfileSeries,
    data_regions: set[str] | None = None,
) -> np.ndarray:
    """Execution integral over normalized profiles, per factor.

    Integrates P(kW) times the normalized profile over the minute interval
    [start + L, start + L + runtime); raises HorizonOverflowError when the
    interval runs past the profile coverage.
    """
    lat = migration_latency_steps(job, profiles.region_ids[region_idx], data_regions)
    a = float(start + lat)
    integral = profiles.norm_integral(region_idx, a, a + job.runtime_min)
    return job_power_kw(job) * integral / 60.0


def schedule_cost(
    job: JobRequest,
    region_idx: int,
    start: int,
    theta: WeightVector,
    profiles: ProfileSeries,
    data_regions: set[str] | None = None,
) -> CostBreakdown:
    """Predicted cost of running ``job`` in region ``region_idx`` at ``start``."""
    execution = execution_footprint(job, region_idx, start, profiles, data_regions)
    energy = migration_energy(job, profiles.region_ids[region_idx], data_regions)
    migration = energy * profiles.global_norm_at(start)
    cost = float((execution + migration) @ theta.as_array())
    return CostBreakdown(execution=execution, migration=migration, cost=cost)


def cost_over_starts(
    job: JobRequest,
    region_idx: int,
    starts: np.ndarray,
    theta: WeightVector,
    profiles: ProfileSeries,
    data_regions: set[str] | None = None,
) -> np.ndarray:
    """Vectorized predicted cost over candidate start steps (same region)."""
    lat = migration_latency_steps(job, profiles.region_ids[region_idx], data_regions)
    a = starts.astype(float) + lat
    integrals = profiles.norm_integral(region_idx, a, a + job.runtime_min)
    execution = job_power_kw(job) * integrals / 60.0
    energy = migration_energy(job, profiles.region_ids[region_idx], data_regions)
    migration = energy * profiles.global_norm_at(starts)
    return (execution + migration) @ theta.as_array()


@dataclass
class ActualFootprint:
    """Physical footprint of one scheduled job against true mixes."""

    execution: np.ndarray = field(default_factory=lambda: np.zeros(3))
    migration: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def total(self) -> np.ndarray:
        return self.execution + self.migration


def actual_footprint(
    job: JobRequest,
    region_idx: int,
    start: int,
    true_profiles: ProfileSeries,
    migrated: bool,
) -> ActualFootprint:
    """Physical (gCO2e, l, m2) footprint of an executed placement.

    Execution integrates the raw true profile of the chosen region over the
    execution interval. Migration energy is priced at the cross-region
    average raw intensity of the start step, mirroring the global-profile
    convention in physical units.
    """
    lat = transfer_latency_steps(job) if migrated else 0
    a = float(start + lat)
    execution = job_power_kw(job) * true_profiles.raw_integral(region_idx, a, a + job.runtime_min) / 60.0
    migration = np.zeros(3)
    if migrated and job.size_gb > 0:
        migration = job.size_gb * NEI_KWH_PER_GB * true_profiles.avg_raw_at(start)
    return ActualFootprint(execution=execution, migration=migration)


def total_footprints(parts: Iterable[ActualFootprint]) -> ActualFootprint:
    """Sum of per-job footprints (ledger additivity)."""
    out = ActualFootprint()
    for part in parts:
        out.execution = out.execution + part.execution
        out.migration = out.migration + part.migration
    return out


__all__ = [
    "NEI_KWH_PER_GB",
    "WeightVector",
    "CostBreakdown",
    "ActualFootprint",
    "migration_energy",
    "migration_latency_steps",
    "execution_footprint",
    "schedule_cost",
    "cost_over_starts",
    "actual_footprint",
    "total_footprints",
    "HorizonOverflowError",
]
