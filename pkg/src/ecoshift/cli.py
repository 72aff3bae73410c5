"""Command-line front end: trace synthesis, single runs, and sweeps.

The CLI is a thin shell over the library; every behavior here is reachable
through the package API with identical results. Outputs are CSV files
(ledger, decisions, sweep) plus a plain-text summary on stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from . import engine, workload
from .engine import (
    SimulationConfig,
    SweepAxes,
    improvement,
    required_coverage_hours,
    run_sweep,
    season_window,
    write_decisions_csv,
    write_ledger_csv,
)
from .footprint import WeightVector
from .grid import FACTORS, GridDataError, load_coefficients, load_mix_series
from .regions import Region, load_regions
from .schedulers import SchedulerKind, parse_scheduler
from .workload import TraceSpec, load_faas_stats, load_spark_pool, load_trace, write_trace

DATA_ENV_VAR = "FOOTPRINT_DATA_DIR"
DEFAULT_YEAR = 2023

# The bundled sample scenario: 3 synthetic regions, a 48 h horizon with
# 72 h of grid data, and a 200-job trace. Lets every command run offline.
SAMPLE_START = datetime(2024, 1, 15, tzinfo=timezone.utc)
SAMPLE_HORIZON_HOURS = 48

PRESET_REGIONS = {"azure-faas": "regions_azure_faas.json", "aws-bigdata": "regions_aws_bigdata.json"}

FACTOR_UNITS = {"carbon": "gCO2e", "water": "l", "land": "m2"}


class CliError(ValueError):
    """User-facing input error; printed as a one-line message."""


def data_root() -> Path:
    """Default data root: $FOOTPRINT_DATA_DIR or the packaged data files."""
    env = os.environ.get(DATA_ENV_VAR)
    if env:
        return Path(env)
    return Path(str(resources.files("ecoshift").joinpath("data")))


def _packaged(relative: str) -> Path:
    return Path(str(resources.files("ecoshift").joinpath("data"))) / relative


@dataclass
class ScenarioBundle:
    """Resolved input paths for one scenario."""

    scenario: str
    regions_path: Path
    grid_dir: Path
    coeffs_path: Path
    trace_path: Path | None

    def check(self) -> None:
        for label, path in (
            ("regions config", self.regions_path),
            ("grid-mix directory", self.grid_dir),
            ("coefficients", self.coeffs_path),
        ):
            if not path.exists():
                raise CliError(f"{label} not found: {path}")
        if self.trace_path is not None and not self.trace_path.exists():
            raise CliError(f"trace not found: {self.trace_path}")


def resolve_bundle(args: argparse.Namespace) -> ScenarioBundle:
    scenario = args.scenario
    root = data_root()
    if scenario in PRESET_REGIONS:
        regions_path = Path(args.regions) if args.regions else root / PRESET_REGIONS[scenario]
        if not regions_path.exists():
            regions_path = _packaged(PRESET_REGIONS[scenario])
        grid_dir = Path(args.grid_dir) if args.grid_dir else root / "grids"
        trace = Path(args.trace) if args.trace else None
        if trace is None:
            raise CliError(
                f"scenario {scenario!r} needs --trace (generate one with 'ecoshift synth')"
            )
    elif scenario == "custom":
        regions_path = Path(args.regions) if args.regions else root / "sample" / "regions.json"
        if not args.regions and not regions_path.exists():
            regions_path = _packaged("sample/regions.json")
        grid_dir = Path(args.grid_dir) if args.grid_dir else root / "sample" / "grids"
        if not args.grid_dir and not grid_dir.exists():
            grid_dir = _packaged("sample/grids")
        trace = Path(args.trace) if args.trace else root / "sample" / "trace.csv"
        if not args.trace and not trace.exists():
            trace = _packaged("sample/trace.csv")
    else:
        raise CliError(f"unknown scenario {scenario!r}")
    coeffs = Path(args.coeffs) if args.coeffs else root / "coefficients.json"
    if not args.coeffs and not coeffs.exists():
        coeffs = _packaged("coefficients.json")
    bundle = ScenarioBundle(
        scenario=scenario,
        regions_path=regions_path,
        grid_dir=grid_dir,
        coeffs_path=coeffs,
        trace_path=trace,
    )
    bundle.check()
    return bundle


def resolve_window(args: argparse.Namespace) -> tuple[datetime, datetime, str]:
    """Horizon window from --start/--end, or the season preset, or the sample."""
    if args.start or args.end:
        if not (args.start and args.end):
            raise CliError("--start and --end must be given together")
        start = datetime.fromisoformat(args.start)
        end = datetime.fromisoformat(args.end)
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        if end.tzinfo is None:
            end = end.replace(tzinfo=timezone.utc)
        return start, end, args.season or "na"
    if args.season:
        start, end = season_window(args.season, args.year)
        return start, end, args.season
    if args.scenario == "custom":
        from datetime import timedelta

        return SAMPLE_START, SAMPLE_START + timedelta(hours=SAMPLE_HORIZON_HOURS), "na"
    raise CliError("preset scenarios need --season (or explicit --start/--end)")


def load_mixes(
    bundle: ScenarioBundle,
    regions: list[Region],
    start: datetime,
    coverage_hours: int,
):
    from datetime import timedelta

    end = start + timedelta(hours=coverage_hours)
    mixes = {}
    for grid_id in sorted({r.grid_id for r in regions}):
        path = bundle.grid_dir / f"{grid_id}.csv"
        if not path.exists():
            raise CliError(f"no mix file for grid {grid_id!r}: {path}")
        mixes[grid_id] = load_mix_series(path, grid_id, start, end)
    return mixes


def _print_summary(
    config: SimulationConfig,
    ledger: engine.FootprintLedger,
    baseline: engine.FootprintLedger,
) -> None:
    gains = improvement(baseline, ledger)
    share = ledger.migration_share()
    print(f"scheduler={config.scheduler.value} theta={config.theta.label()} "
          f"mae={config.mae:g} seed={config.seed}")
    print(f"{'factor':<8} {'actual total':>16} {'unit':<6} {'migration %':>12} {'vs local %':>11}")
    for f, name in enumerate(FACTORS):
        gain = gains[name]
        gain_s = "undef" if gain is None else f"{gain:10.2f}"
        print(f"{name:<8} {ledger.overall[f]:>16.3f} {FACTOR_UNITS[name]:<6} "
              f"{100.0 * share[f]:>11.2f}% {gain_s:>11}")
    counts = ", ".join(
        f"{region}={int(ledger.requests[d])}" for d, region in enumerate(ledger.region_ids)
    )
    print(f"requests: {counts}")
    if ledger.infeasible:
        print(f"infeasible (ran locally): {ledger.infeasible}")


def cmd_run(args: argparse.Namespace) -> int:
    bundle = resolve_bundle(args)
    start, end, season = resolve_window(args)
    regions = load_regions(bundle.regions_path)
    coeffs = load_coefficients(bundle.coeffs_path)
    assert bundle.trace_path is not None
    jobs = load_trace(bundle.trace_path)
    if args.dt is not None:
        jobs = workload_adjust(jobs, args.dt)

    horizon_minutes = int((end - start).total_seconds() // 60)
    coverage = required_coverage_hours(jobs, horizon_minutes)
    mixes = load_mixes(bundle, regions, start, coverage)

    config = SimulationConfig(
        horizon_start=start,
        horizon_end=end,
        scheduler=parse_scheduler(args.scheduler),
        theta=WeightVector.parse(args.theta),
        mae=args.mae,
        seed=args.seed,
        scenario=args.scenario,
        season=season,
        dt_hours=args.dt,
    )
    ledger, decisions = engine.run(config, regions, mixes, jobs, coeffs)
    if config.scheduler is SchedulerKind.LOCAL:
        baseline = ledger
    else:
        base_config = SimulationConfig(
            horizon_start=start,
            horizon_end=end,
            scheduler=SchedulerKind.LOCAL,
            theta=config.theta,
            mae=0.0,
            seed=0,
            scenario=args.scenario,
            season=season,
        )
        baseline, _ = engine.run(base_config, regions, mixes, jobs, coeffs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_ledger_csv(out / "ledger.csv", [ledger, baseline] if baseline is not ledger else [ledger])
    write_decisions_csv(out / "decisions.csv", decisions)
    gains = improvement(baseline, ledger)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(engine.SWEEP_HEADER)
        row = [season, f"{config.mae:g}", config.theta.label(),
               "na" if args.dt is None else f"{args.dt:g}", config.scheduler.value, "1"]
        for name in FACTORS:
            value = gains[name]
            cell = "undef" if value is None else f"{value:.6f}"
            row.extend([cell, "0.000000"])
        writer.writerow(row)
    _print_summary(config, ledger, baseline)
    return 0


def workload_adjust(jobs, dt_hours: float):
    """Re-derive ad-hoc deadlines (singleton families) for a delay tolerance."""
    from dataclasses import replace

    families: dict[str, int] = {}
    for job in jobs:
        families[job.family] = families.get(job.family, 0) + 1
    dt_min = int(round(dt_hours * 60))
    return [
        replace(job, deadline_min=job.arrival_min + dt_min) if families[job.family] == 1 else job
        for job in jobs
    ]


def cmd_synth(args: argparse.Namespace) -> int:
    root = data_root()
    if args.scenario == "faas":
        regions_path = Path(args.regions) if args.regions else _packaged(PRESET_REGIONS["azure-faas"])
        regions = load_regions(regions_path)
        counts = Path(args.counts) if args.counts else _packaged("sample/faas_minute_counts.csv")
        percentiles = (
            Path(args.percentiles) if args.percentiles else _packaged("sample/faas_percentiles.csv")
        )
        stats = load_faas_stats(counts, percentiles)
        spec = TraceSpec(
            scenario="faas",
            count=args.requests_per_day,
            days=args.days,
            seed=args.seed,
        )
        jobs = workload.synth_faas(spec, [stats], [r.id for r in regions])
    elif args.scenario == "bigdata":
        regions_path = Path(args.regions) if args.regions else _packaged(PRESET_REGIONS["aws-bigdata"])
        regions = load_regions(regions_path)
        pool_path = Path(args.pool) if args.pool else root / "sample" / "spark_pool.csv"
        if not args.pool and not pool_path.exists():
            pool_path = _packaged("sample/spark_pool.csv")
        pool = load_spark_pool(pool_path)
        spec = TraceSpec(
            scenario="bigdata",
            count=args.total,
            days=args.days,
            periodic_fraction=args.periodic_fraction,
            dt_hours=args.dt,
            seed=args.seed,
        )
        jobs = workload.synth_bigdata(spec, pool, [r.id for r in regions])
    else:
        raise CliError(f"unknown synth scenario {args.scenario!r}")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(out, jobs)
    print(f"wrote {len(jobs)} jobs to {out}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    bundle = resolve_bundle(args)
    regions = load_regions(bundle.regions_path)
    coeffs = load_coefficients(bundle.coeffs_path)
    assert bundle.trace_path is not None
    base_jobs = load_trace(bundle.trace_path)

    schedulers = tuple(parse_scheduler(s) for s in _split(args.schedulers))
    dts = tuple(float(x) for x in _split(args.dts)) if args.dts else ()
    if dts and not any(
        k in (SchedulerKind.TEMPORAL, SchedulerKind.SPATIO_TEMPORAL) for k in schedulers
    ):
        raise CliError("--dts applies only to time-shifting schedulers (t, stp)")
    thetas = tuple(WeightVector.parse(t) for t in args.thetas.split(";")) if args.thetas \
        else engine.DEFAULT_THETAS
    seasons = tuple(_split(args.seasons)) if args.seasons else ("na",)
    maes = tuple(float(x) for x in _split(args.maes)) if args.maes else (0.1,)
    seeds = tuple(int(x) for x in _split(args.seeds)) if args.seeds else engine.DEFAULT_SEEDS

    window_cache: dict[str, tuple[datetime, datetime]] = {}
    mixes_cache: dict[tuple[str, float | None], object] = {}

    def loader(season: str, dt: float | None):
        if season not in window_cache:
            ns = argparse.Namespace(
                start=args.start, end=args.end, season=None if season == "na" else season,
                year=args.year, scenario=args.scenario,
            )
            start, end, _ = resolve_window(ns)
            window_cache[season] = (start, end)
        start, end = window_cache[season]
        jobs = base_jobs if dt is None else workload_adjust(base_jobs, dt)
        key = (season, dt)
        if key not in mixes_cache:
            horizon_minutes = int((end - start).total_seconds() // 60)
            coverage = required_coverage_hours(jobs, horizon_minutes)
            mixes_cache[key] = load_mixes(bundle, regions, start, coverage)
        return regions, mixes_cache[key], jobs, coeffs, start, end

    axes = SweepAxes(
        seasons=seasons, maes=maes, thetas=thetas, schedulers=schedulers, dts=dts, seeds=seeds
    )
    result = run_sweep(loader, axes, args.out, resume=not args.no_resume)
    print(f"sweep: {len(result.rows)} row(s), {len(result.failures)} failure(s) -> {args.out}/sweep.csv")
    for cell, message in result.failures:
        print(f"failed cell {cell.key()}: {message}", file=sys.stderr)
    return 1 if result.failures else 0


def _split(text: str | None) -> list[str]:
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_bundle_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", choices=["azure-faas", "aws-bigdata", "custom"],
                        default="custom")
    parser.add_argument("--regions", help="regions config JSON (defaults per scenario)")
    parser.add_argument("--grid-dir", help="directory of <grid_id>.csv mix files")
    parser.add_argument("--trace", help="job trace CSV")
    parser.add_argument("--coeffs", help="intensity coefficients JSON")
    parser.add_argument("--season", choices=sorted(engine.SEASON_MONTHS))
    parser.add_argument("--year", type=int, default=DEFAULT_YEAR,
                        help="year the season windows refer to")
    parser.add_argument("--start", help="horizon start (ISO-8601 UTC), overrides --season")
    parser.add_argument("--end", help="horizon end (ISO-8601 UTC)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecoshift",
        description="Carbon-, water-, and land-aware workload shifting simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation and write ledger/decisions/sweep CSVs")
    _add_bundle_flags(p_run)
    p_run.add_argument("--scheduler", default="local", help="local|s|sp|t|stp")
    p_run.add_argument("--theta", default="1,0,0", help="factor weights, e.g. 0.333,0.333,0.334")
    p_run.add_argument("--mae", type=float, default=0.0, help="renewable-share prediction MAE")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--dt", type=float, default=None,
                       help="delay tolerance in hours; rewrites ad-hoc deadlines")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_synth = sub.add_parser("synth", help="synthesize a job trace CSV")
    p_synth.add_argument("--scenario", choices=["faas", "bigdata"], required=True)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--days", type=int, default=7)
    p_synth.add_argument("--regions", help="regions config JSON (defaults per scenario)")
    p_synth.add_argument("--requests-per-day", type=int, default=100000, help="FaaS requests/day")
    p_synth.add_argument("--counts", help="FaaS per-minute invocation counts CSV")
    p_synth.add_argument("--percentiles", help="FaaS runtime percentiles CSV")
    p_synth.add_argument("--total", type=int, default=50000, help="big-data total requests")
    p_synth.add_argument("--periodic-fraction", type=float, default=0.5)
    p_synth.add_argument("--dt", type=float, default=4.0, help="ad-hoc delay tolerance (hours)")
    p_synth.add_argument("--pool", help="batch-job pool CSV (nodes,vm,runtime_min,size_gb)")
    p_synth.set_defaults(func=cmd_synth)

    p_sweep = sub.add_parser("sweep", help="factorial sweep with mean/std improvements per cell")
    _add_bundle_flags(p_sweep)
    p_sweep.add_argument("--schedulers", default="sp", help="comma list of local|s|sp|t|stp")
    p_sweep.add_argument("--seasons", help="comma list of winter|spring|summer|autumn")
    p_sweep.add_argument("--maes", help="comma list, e.g. 0.05,0.1,0.15,0.2")
    p_sweep.add_argument("--thetas", help="semicolon list of weight triples, e.g. 1,0,0;0,1,0")
    p_sweep.add_argument("--dts", help="comma list of delay tolerances (t/stp only)")
    p_sweep.add_argument("--seeds", help="comma list, default 0,1,2,3,4,5")
    p_sweep.add_argument("--no-resume", action="store_true", help="recompute completed cells")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, GridDataError, engine.SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
