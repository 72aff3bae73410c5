#!/usr/bin/env python3
"""Regenerate the bundled sample dataset (3 regions, 48 h horizon, 200 jobs).

The sample is fully synthetic: grid mixes are smooth seeded random walks
with distinct characters (hydro/wind-heavy, fossil-heavy, solar-cycling),
pool job sizes are invented, and the trace is produced by the big-data
generator. Regenerating with this script reproduces the committed files
byte for byte.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ecoshift.grid import MixSeries, SOURCE_NAMES, write_mix_csv
from ecoshift.workload import TraceSpec, load_spark_pool, synth_bigdata, write_trace

OUT = Path(__file__).resolve().parent.parent / "src" / "ecoshift" / "data" / "sample"
START = datetime(2024, 1, 15, tzinfo=timezone.utc)
COVERAGE_HOURS = 72
HORIZON_HOURS = 48
TRACE_JOBS = 200


def smooth_walk(rng: np.random.Generator, hours: int, base: float, wobble: float) -> np.ndarray:
    steps = rng.normal(0.0, wobble, hours).cumsum()
    steps -= steps.mean()
    return np.clip(base + steps, 0.0, None)


def cycle(hours: int, amplitude: float, phase_h: float) -> np.ndarray:
    hour = np.arange(hours)
    return amplitude * np.clip(np.sin((hour - phase_h) / 24 * 2 * np.pi), 0.0, None)


def make_grid(
    grid_id: str,
    seed: int,
    bases: dict[str, float],
    cycles: dict[str, tuple[float, float]],
) -> MixSeries:
    rng = np.random.default_rng(seed)
    cols = {name: np.zeros(COVERAGE_HOURS) for name in SOURCE_NAMES}
    for name, base in bases.items():
        cols[name] = smooth_walk(rng, COVERAGE_HOURS, base, 0.006)
    for name, (amplitude, phase) in cycles.items():
        cols[name] = cols[name] + cycle(COVERAGE_HOURS, amplitude, phase)
    shares = np.column_stack([cols[name] for name in SOURCE_NAMES])
    shares /= shares.sum(axis=1)[:, None]
    return MixSeries(grid_id=grid_id, start=START, shares=shares)


GRIDS = {
    # Renewable-heavy: low carbon, hydro pushes water intensity up; wind
    # swings by night so temporal shifting has something to chase.
    "grid-a": (
        11,
        {"hydro": 0.38, "wind": 0.18, "nuclear": 0.15, "gas": 0.12, "biomass": 0.05},
        {"wind": (0.30, 12.0)},
    ),
    # Fossil-heavy: high carbon, modest water, nightly wind dip.
    "grid-b": (
        12,
        {"gas": 0.40, "coal": 0.22, "nuclear": 0.10, "wind": 0.06, "oil": 0.05, "unknown": 0.04},
        {"wind": (0.28, 10.0)},
    ),
    # Mixed with a pronounced solar day cycle.
    "grid-c": (
        13,
        {"gas": 0.28, "wind": 0.16, "nuclear": 0.18, "hydro": 0.10, "coal": 0.06, "solar": 0.01},
        {"solar": (0.45, 0.0)},
    ),
}

REGIONS = {
    "regions": [
        {"id": "alpha", "grid": "grid-a", "pue": 1.12, "wue": 0.10, "land_area_m2": 150000, "annual_it_energy_kwh": 876000000},
        {"id": "beta", "grid": "grid-b", "pue": 1.30, "wue": 0.45, "land_area_m2": 60000, "annual_it_energy_kwh": 876000000},
        {"id": "gamma", "grid": "grid-c", "pue": 1.18, "wue": 0.22, "land_area_m2": 95000, "annual_it_energy_kwh": 876000000},
    ]
}

# Invented batch-job shapes; sizes are synthetic, not measured, and are
# scaled so one transfer costs roughly a tenth of the execution energy.
POOL_ROWS = [
    (2, "c.l", 60.0, 0.03, 0.70),
    (4, "c.xl", 90.0, 0.20, 0.65),
    (8, "c.xxl", 115.0, 1.00, 0.70),
    (2, "m4.l", 75.0, 0.05, 0.55),
    (4, "m4.xl", 100.0, 0.25, 0.60),
    (8, "m4.xxl", 110.0, 1.50, 0.65),
    (2, "r4.l", 90.0, 0.08, 0.50),
    (4, "r4.xl", 115.0, 0.40, 0.60),
    (8, "r4.xxl", 110.0, 2.50, 0.60),
    (3, "m4.l", 45.0, 0.04, 0.50),
    (6, "c.xl", 60.0, 0.20, 0.75),
    (4, "r4.l", 100.0, 0.25, 0.55),
]


def faas_stats() -> None:
    rng = np.random.default_rng(7)
    minute_cols = [str(m) for m in range(1, 1441)]
    hours = np.arange(1440) / 60.0
    shapes = {
        "fn-busy-day": np.exp(-((hours - 14) ** 2) / 18.0) + 0.1,
        "fn-steady": np.ones(1440),
        "fn-night-batch": np.exp(-((hours - 3) ** 2) / 8.0) + 0.05,
    }
    percentiles = {
        "fn-busy-day": [40, 55, 110, 180, 320, 900, 1500],
        "fn-steady": [120, 120, 120, 120, 120, 120, 120],
        "fn-night-batch": [500, 700, 1500, 2600, 4200, 9000, 15000],
    }
    totals = {"fn-busy-day": 90000, "fn-steady": 25000, "fn-night-batch": 4000}

    with open(OUT / "faas_minute_counts.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["HashOwner", "HashApp", "HashFunction", "Trigger", *minute_cols])
        for name, shape in shapes.items():
            weights = shape / shape.sum()
            counts = rng.multinomial(totals[name], weights)
            writer.writerow(["owner0", "app0", name, "http", *counts.tolist()])

    pct_cols = [f"percentile_Average_{p}" for p in (0, 1, 25, 50, 75, 99, 100)]
    with open(OUT / "faas_percentiles.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["HashOwner", "HashApp", "HashFunction", "Average", "Count", "Minimum", "Maximum", *pct_cols])
        for name, pct in percentiles.items():
            writer.writerow(["owner0", "app0", name, pct[3], totals[name], pct[0], pct[-1], *pct])


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "grids").mkdir(exist_ok=True)

    with open(OUT / "regions.json", "w", encoding="utf-8") as fh:
        json.dump(REGIONS, fh, indent=2)
        fh.write("\n")

    for grid_id, (seed, bases, cycles) in GRIDS.items():
        series = make_grid(grid_id, seed, bases, cycles)
        write_mix_csv(OUT / "grids" / f"{grid_id}.csv", series)

    with open(OUT / "spark_pool.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["nodes", "vm", "runtime_min", "size_gb", "utilization"])
        writer.writerows(POOL_ROWS)

    faas_stats()

    pool = load_spark_pool(OUT / "spark_pool.csv")
    spec = TraceSpec(scenario="bigdata", count=TRACE_JOBS, days=HORIZON_HOURS // 24,
                     periodic_fraction=0.5, dt_hours=4.0, seed=0)
    jobs = synth_bigdata(spec, pool, [r["id"] for r in REGIONS["regions"]])
    write_trace(OUT / "trace.csv", jobs)
    print(f"sample data written to {OUT} ({len(jobs)} trace jobs)")


if __name__ == "__main__":
    main()
