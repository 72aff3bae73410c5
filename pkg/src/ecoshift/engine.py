"""Discrete-event simulation of scheduling a job trace across regions.

The engine steps through the horizon in one-minute steps, releases jobs at
their arrival step, asks the configured scheduler for a placement against
the frozen predicted profiles, applies data-availability updates for
persistent kinds, and accounts the actual footprint of every placement
against profiles built from the true (un-noised) mixes.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .footprint import WeightVector, actual_footprint, transfer_latency_steps
from .grid import FACTORS, IntensityCoefficients, MixSeries, NoiseSpec, apply_noise
from .regions import ProfileSeries, Region, build_profile_series
from .schedulers import (
    SchedulerKind,
    ScheduleDecision,
    decide,
    post_decision_update,
)
from .workload import JobRequest

log = logging.getLogger(__name__)

STEP_MINUTES = 1
DEFAULT_SEEDS = (0, 1, 2, 3, 4, 5)
DEFAULT_THETAS = (
    WeightVector(1.0, 0.0, 0.0),
    WeightVector(0.0, 1.0, 0.0),
    WeightVector(0.0, 0.0, 1.0),
    WeightVector(0.333, 0.333, 0.334),
)
# Mid-month week per season: the 15th 00:00 UTC to the 22nd 00:00 UTC.
SEASON_MONTHS = {"winter": 1, "spring": 4, "summer": 7, "autumn": 10}


class SimulationError(ValueError):
    """Invalid simulation inputs."""


def season_window(season: str, year: int) -> tuple[datetime, datetime]:
    """UTC mid-month week for a season tag."""
    if season not in SEASON_MONTHS:
        raise SimulationError(f"unknown season {season!r} (valid: {sorted(SEASON_MONTHS)})")
    month = SEASON_MONTHS[season]
    start = datetime(year, month, 15, tzinfo=timezone.utc)
    return start, datetime(year, month, 22, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SimulationConfig:
    """One simulation run: horizon, scheduler, weights, and noise."""

    horizon_start: datetime
    horizon_end: datetime
    scheduler: SchedulerKind
    theta: WeightVector
    mae: float = 0.0
    seed: int = 0
    scenario: str = "custom"
    season: str = ""
    dt_hours: float | None = None

    def __post_init__(self) -> None:
        start, end = self.horizon_start, self.horizon_end
        if start.tzinfo is None:
            object.__setattr__(self, "horizon_start", start.replace(tzinfo=timezone.utc))
        if end.tzinfo is None:
            object.__setattr__(self, "horizon_end", end.replace(tzinfo=timezone.utc))
        minutes = (self.horizon_end - self.horizon_start).total_seconds() / 60.0
        if minutes <= 0 or minutes != int(minutes) or int(minutes) % 60:
            raise SimulationError("horizon must be a positive whole number of hours")
        if self.mae < 0:
            raise SimulationError("mae must be >= 0")

    @property
    def horizon_minutes(self) -> int:
        return int((self.horizon_end - self.horizon_start).total_seconds() // 60)


@dataclass
class FootprintLedger:
    """Accumulated actual footprints of one run.

    ``totals``/``migration`` are (regions, 3) arrays in physical units
    (gCO2e, l, m2); migration is the transfer-attributed share of the
    totals. ``requests`` counts placements per region and ``infeasible``
    the jobs that fell back to local placement.
    """

    scheduler: str
    theta: str
    region_ids: tuple[str, ...]
    totals: np.ndarray = field(init=False)
    migration: np.ndarray = field(init=False)
    requests: np.ndarray = field(init=False)
    infeasible: int = 0

    def __post_init__(self) -> None:
        n = len(self.region_ids)
        self.totals = np.zeros((n, 3))
        self.migration = np.zeros((n, 3))
        self.requests = np.zeros(n, dtype=np.int64)

    def add(self, region_idx: int, execution: np.ndarray, migration: np.ndarray) -> None:
        self.totals[region_idx] += execution + migration
        self.migration[region_idx] += migration
        self.requests[region_idx] += 1

    @property
    def overall(self) -> np.ndarray:
        return self.totals.sum(axis=0)

    @property
    def overall_migration(self) -> np.ndarray:
        return self.migration.sum(axis=0)

    def weighted_total(self, theta: WeightVector) -> float:
        return float(self.overall @ theta.as_array())

    def migration_share(self) -> np.ndarray:
        """Fraction of each factor total attributable to migration."""
        total = self.overall
        out = np.zeros(3)
        ok = total > 0
        out[ok] = self.overall_migration[ok] / total[ok]
        return out


def required_coverage_minutes(jobs: Sequence[JobRequest], horizon_minutes: int) -> int:
    """Profile coverage needed so every feasible placement can be integrated.

    Each job can end no later than ``max(arrival + latency + runtime,
    deadline)``; the bound holds for every scheduler kind because time-
    shifted starts are capped so execution finishes by the deadline.
    """
    needed = horizon_minutes
    for job in jobs:
        lat = transfer_latency_steps(job)
        bound = max(job.arrival_min + lat + job.runtime_min, float(job.deadline_min))
        needed = max(needed, int(math.ceil(bound - 1e-9)))
    return needed


def required_coverage_hours(jobs: Sequence[JobRequest], horizon_minutes: int) -> int:
    return -(-required_coverage_minutes(jobs, horizon_minutes) // 60)


def _validate_inputs(
    config: SimulationConfig,
    regions: Sequence[Region],
    true_mixes: Mapping[str, MixSeries],
    jobs: Sequence[JobRequest],
) -> int:
    if not regions:
        raise SimulationError("no regions")
    region_ids = {r.id for r in regions}
    hours = None
    for region in regions:
        mix = true_mixes.get(region.grid_id)
        if mix is None:
            raise SimulationError(f"no mix series for grid {region.grid_id!r}")
        if mix.start != config.horizon_start:
            raise SimulationError(
                f"grid {region.grid_id}: mix starts at {mix.start}, expected {config.horizon_start}"
            )
        hours = mix.hours if hours is None else hours
        if mix.hours != hours:
            raise SimulationError("mix series cover different spans")
    assert hours is not None
    horizon_minutes = config.horizon_minutes
    for job in jobs:
        if job.origin not in region_ids:
            raise SimulationError(f"job {job.id}: unknown origin {job.origin!r}")
        if not job.data_regions.issubset(region_ids):
            raise SimulationError(f"job {job.id}: data region outside the region set")
        if job.arrival_min < 0 or job.arrival_min >= horizon_minutes:
            raise SimulationError(f"job {job.id}: arrival outside the horizon")
    needed = required_coverage_hours(jobs, horizon_minutes)
    if hours < needed:
        raise SimulationError(
            f"mix series span {hours} h but {needed} h are needed to cover every "
            "feasible execution window"
        )
    return hours


def build_predicted(
    true_mixes: Mapping[str, MixSeries], mae: float, seed: int
) -> dict[str, MixSeries]:
    """Noised copies of the true mixes, mimicking a forecast with the given MAE."""
    spec = NoiseSpec(mae=mae, seed=seed)
    return {grid: apply_noise(series, spec) for grid, series in true_mixes.items()}


def run(
    config: SimulationConfig,
    regions: Sequence[Region],
    true_mixes: Mapping[str, MixSeries],
    jobs: Sequence[JobRequest],
    coeffs: IntensityCoefficients,
) -> tuple[FootprintLedger, list[ScheduleDecision]]:
    """Simulate one run and return the ledger plus all placement decisions.

    Schedulers see only the predicted (noised) profiles; actual footprints
    are accounted against the true mixes. Jobs are released at their
    arrival step in trace order; the caller's job objects are not mutated
    (family data-availability is tracked on working copies).
    """
    _validate_inputs(config, regions, true_mixes, jobs)
    predicted = build_predicted(true_mixes, config.mae, config.seed)
    pred_profiles = build_profile_series(regions, predicted, coeffs)
    true_profiles = build_profile_series(regions, true_mixes, coeffs)

    availability: dict[str, set[str]] = {}
    for job in jobs:
        availability.setdefault(job.family, set()).update(job.data_regions)

    ledger = FootprintLedger(
        scheduler=config.scheduler.value,
        theta=config.theta.label(),
        region_ids=pred_profiles.region_ids,
    )
    decisions: list[ScheduleDecision] = []
    for job in sorted(jobs, key=lambda j: j.arrival_min):
        data = availability[job.family]
        decision = decide(config.scheduler, job, pred_profiles, config.theta, data)
        post_decision_update(config.scheduler, decision, data)
        if decision.fallback:
            ledger.infeasible += 1
        actual = actual_footprint(job, decision.region_idx, decision.start, true_profiles, decision.migrated)
        ledger.add(decision.region_idx, actual.execution, actual.migration)
        decisions.append(decision)
    if ledger.infeasible:
        log.warning("%d job(s) could not meet their deadline and ran locally", ledger.infeasible)
    return ledger, decisions


def improvement(
    baseline: FootprintLedger, candidate: FootprintLedger
) -> dict[str, float | None]:
    """Per-factor improvement of ``candidate`` over ``baseline`` in percent.

    Positive values are reductions; a zero baseline component yields None
    (undefined) instead of a division error.
    """
    if baseline.region_ids != candidate.region_ids:
        raise SimulationError("ledgers cover different region sets")
    base = baseline.overall
    cand = candidate.overall
    out: dict[str, float | None] = {}
    for f, name in enumerate(FACTORS):
        out[name] = None if base[f] == 0 else float(100.0 * (base[f] - cand[f]) / base[f])
    return out


# ---------------------------------------------------------------------------
# CSV outputs: fixed six fractional digits for byte-stable reruns.
# ---------------------------------------------------------------------------

LEDGER_HEADER = ["scheduler", "theta", "factor", "region", "actual_value", "migration_value", "requests"]
DECISIONS_HEADER = ["job", "region", "start", "migrated", "predicted_cost"]
SWEEP_HEADER = [
    "season",
    "mae",
    "theta",
    "dt",
    "scheduler",
    "seeds",
    "carbon_mean",
    "carbon_std",
    "water_mean",
    "water_std",
    "land_mean",
    "land_std",
]


def _fmt(value: float | None) -> str:
    return "undef" if value is None else f"{value:.6f}"


def write_ledger_csv(path: str | Path, ledgers: Iterable[FootprintLedger]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEDGER_HEADER)
        for ledger in ledgers:
            for f, factor in enumerate(FACTORS):
                for d, region in enumerate(ledger.region_ids):
                    writer.writerow(
                        [
                            ledger.scheduler,
                            ledger.theta,
                            factor,
                            region,
                            _fmt(float(ledger.totals[d, f])),
                            _fmt(float(ledger.migration[d, f])),
                            int(ledger.requests[d]),
                        ]
                    )


def write_decisions_csv(path: str | Path, decisions: Iterable[ScheduleDecision]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DECISIONS_HEADER)
        for dec in decisions:
            writer.writerow(
                [dec.job_id, dec.region_id, dec.start, str(dec.migrated).lower(), _fmt(dec.cost.cost)]
            )


@dataclass(frozen=True)
class SweepAxes:
    """Factorial sweep axes; ``dts`` applies to time-shifting kinds only."""

    seasons: tuple[str, ...]
    maes: tuple[float, ...]
    thetas: tuple[WeightVector, ...]
    schedulers: tuple[SchedulerKind, ...]
    dts: tuple[float, ...] = ()
    seeds: tuple[int, ...] = DEFAULT_SEEDS


@dataclass(frozen=True)
class SweepCell:
    season: str
    mae: float
    theta: WeightVector
    dt: float | None
    scheduler: SchedulerKind

    def key(self) -> str:
        dt = "na" if self.dt is None else f"{self.dt:g}"
        return f"{self.season}_mae{self.mae:g}_th{self.theta.label()}_dt{dt}_{self.scheduler.value}"


@dataclass
class SweepResult:
    rows: list[list[str]]
    failures: list[tuple[SweepCell, str]]


# Scenario inputs for one sweep cell: (regions, true mixes, jobs, coeffs,
# horizon start/end). dt is None for kinds that ignore delay tolerance.
CellInputs = tuple[
    Sequence[Region],
    Mapping[str, MixSeries],
    Sequence[JobRequest],
    IntensityCoefficients,
    datetime,
    datetime,
]
CellLoader = Callable[[str, float | None], CellInputs]


def sweep_cells(axes: SweepAxes) -> list[SweepCell]:
    from itertools import product

    cells = []
    for season, mae, theta, kind in product(axes.seasons, axes.maes, axes.thetas, axes.schedulers):
        dts: tuple[float | None, ...]
        if kind in (SchedulerKind.TEMPORAL, SchedulerKind.SPATIO_TEMPORAL) and axes.dts:
            dts = axes.dts
        else:
            dts = (None,)
        for dt in dts:
            cells.append(SweepCell(season, mae, theta, dt, kind))
    return cells


def run_sweep(
    loader: CellLoader,
    axes: SweepAxes,
    out_dir: str | Path,
    resume: bool = True,
) -> SweepResult:
    """Run a factorial sweep, one row per cell with mean/std over seeds.

    Improvements are measured against a local-baseline run on the same
    inputs. Completed cells are persisted under ``out_dir/cells`` and
    skipped on resume; failing cells are recorded and the sweep continues.
    """
    out_dir = Path(out_dir)
    cell_dir = out_dir / "cells"
    cell_dir.mkdir(parents=True, exist_ok=True)

    baselines: dict[tuple[str, float | None], FootprintLedger] = {}
    result = SweepResult(rows=[], failures=[])
    for cell in sweep_cells(axes):
        cell_path = cell_dir / f"{cell.key()}.csv"
        if resume and cell_path.exists():
            with open(cell_path, newline="", encoding="utf-8") as fh:
                row = next(csv.reader(fh))
            result.rows.append(row)
            continue
        try:
            row = _run_cell(loader, cell, axes.seeds, baselines)
        except Exception as exc:  # noqa: BLE001 - sweep must survive bad cells
            log.error("sweep cell %s failed: %s", cell.key(), exc)
            result.failures.append((cell, str(exc)))
            continue
        with open(cell_path, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerow(row)
        result.rows.append(row)

    with open(out_dir / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        writer.writerows(result.rows)
    return result


def _run_cell(
    loader: CellLoader,
    cell: SweepCell,
    seeds: tuple[int, ...],
    baselines: dict[tuple[str, float | None], FootprintLedger],
) -> list[str]:
    regions, mixes, jobs, coeffs, start, end = loader(cell.season, cell.dt)
    base_key = (cell.season, cell.dt)
    if base_key not in baselines:
        base_config = SimulationConfig(
            horizon_start=start,
            horizon_end=end,
            scheduler=SchedulerKind.LOCAL,
            theta=cell.theta,
            mae=0.0,
            seed=0,
            season=cell.season,
        )
        baselines[base_key], _ = run(base_config, regions, mixes, jobs, coeffs)
    baseline = baselines[base_key]

    samples: dict[str, list[float | None]] = {name: [] for name in FACTORS}
    for seed in seeds:
        config = SimulationConfig(
            horizon_start=start,
            horizon_end=end,
            scheduler=cell.scheduler,
            theta=cell.theta,
            mae=cell.mae,
            seed=seed,
            season=cell.season,
            dt_hours=cell.dt,
        )
        ledger, _ = run(config, regions, mixes, jobs, coeffs)
        for name, value in improvement(baseline, ledger).items():
            samples[name].append(value)

    row = [
        cell.season,
        f"{cell.mae:g}",
        cell.theta.label(),
        "na" if cell.dt is None else f"{cell.dt:g}",
        cell.scheduler.value,
        str(len(seeds)),
    ]
    for name in FACTORS:
        values = samples[name]
        if any(v is None for v in values):
            row.extend(["undef", "undef"])
        else:
            arr = np.array(values, dtype=float)
            row.extend([f"{arr.mean():.6f}", f"{arr.std():.6f}"])
    return row
