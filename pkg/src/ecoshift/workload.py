"""Workload model: VM catalog and power draw, job requests, trace CSV IO,
and the two synthetic trace generators (FaaS and big data).

Runtimes are minutes and may be fractional (FaaS executions are
millisecond-scale); arrivals and deadlines are integer minute steps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

MINUTES_PER_DAY = 1440

# Per-provider CPU power bounds in watts per vCPU and memory draw in W/GB,
# following the Cloud Carbon Footprint methodology.
AWS_WATTS = (0.74, 3.5)
AZURE_WATTS = (0.78, 3.76)
MEM_WATTS_PER_GB = 0.357

# Quantile knots of the published per-function runtime percentiles.
PERCENTILE_KNOTS = np.array([0.0, 0.01, 0.25, 0.50, 0.75, 0.99, 1.0])
PERCENTILE_COLUMNS = tuple(f"percentile_Average_{p}" for p in (0, 1, 25, 50, 75, 99, 100))


class TraceError(ValueError):
    """Malformed trace, pool, or function-stats input."""


@dataclass(frozen=True)
class VmInstance:
    """A VM instance type with its power-model constants."""

    name: str
    cpus: int
    ram_gb: float
    bandwidth_mbps: float
    watts_min: float
    watts_max: float
    mem_watts_per_gb: float = MEM_WATTS_PER_GB

    def __post_init__(self) -> None:
        if self.cpus < 1 or self.ram_gb <= 0 or self.bandwidth_mbps <= 0:
            raise ValueError(f"vm {self.name}: cpus/ram/bandwidth must be positive")
        if self.watts_min > self.watts_max:
            raise ValueError(f"vm {self.name}: watts_min > watts_max")


def _aws_vm(name: str, cpus: int, ram: float, bw: float) -> VmInstance:
    return VmInstance(name, cpus, ram, bw, *AWS_WATTS)


# Instance specs: vCPU count, memory (GB), network bandwidth (Mbps).
AWS_VMS: dict[str, VmInstance] = {
    vm.name: vm
    for vm in (
        _aws_vm("c.l", 2, 4, 500),
        _aws_vm("c.xl", 4, 8, 750),
        _aws_vm("c.xxl", 8, 16, 1000),
        _aws_vm("m4.l", 2, 8, 450),
        _aws_vm("m4.xl", 4, 18, 750),
        _aws_vm("m4.xxl", 8, 34, 1000),
        _aws_vm("r4.l", 2, 16, 450),
        _aws_vm("r4.xl", 4, 32, 850),
        _aws_vm("r4.xxl", 8, 65, 1700),
    )
}

# Single function-execution VM (2 vCPU, 4 GB). Bandwidth is nominal: FaaS
# requests carry no data, so it never enters a transfer.
AZURE_FAAS_VM = VmInstance("azure.faas", 2, 4, 1000, *AZURE_WATTS)

VM_CATALOG: dict[str, VmInstance] = {**AWS_VMS, AZURE_FAAS_VM.name: AZURE_FAAS_VM}


def power_draw(vm: VmInstance, utilization: float, nodes: int = 1) -> float:
    """Power draw in watts of ``nodes`` instances at the given CPU utilization.

    Per node: ``cpus * (watts_min + u * (watts_max - watts_min)) + ram * mem_w``.
    """
    if not 0.0 <= utilization <= 1.0:
        raise ValueError(f"utilization must be in [0, 1], got {utilization}")
    if nodes < 1:
        raise ValueError("nodes must be >= 1")
    per_cpu = vm.watts_min + utilization * (vm.watts_max - vm.watts_min)
    return nodes * (vm.cpus * per_cpu + vm.ram_gb * vm.mem_watts_per_gb)


@dataclass
class JobRequest:
    """A schedulable unit of work.

    ``data_regions`` is the set of regions where the job's input data is
    available; the simulation engine may grow it when data migrates.
    ``family`` groups the instances of one periodic job so that migrated
    data persists across instances; ad-hoc jobs are their own family.
    """

    id: str
    origin: str
    data_regions: set[str]
    size_gb: float
    nodes: int
    utilization: float
    vm: VmInstance
    runtime_min: float
    arrival_min: int
    deadline_min: int
    family: str = ""

    def __post_init__(self) -> None:
        if not self.family:
            self.family = self.id.split("#", 1)[0]
        if self.origin not in self.data_regions:
            raise TraceError(f"job {self.id}: origin {self.origin!r} not in data regions")
        if self.arrival_min > self.deadline_min:
            raise TraceError(f"job {self.id}: arrival after deadline")
        if self.runtime_min <= 0:
            raise TraceError(f"job {self.id}: runtime must be > 0")
        if not 0.0 <= self.utilization <= 1.0:
            raise TraceError(f"job {self.id}: utilization out of [0, 1]")
        if self.nodes < 1 or self.size_gb < 0:
            raise TraceError(f"job {self.id}: bad nodes or data size")


@dataclass(frozen=True)
class TraceSpec:
    """Parameters of a synthetic trace.

    ``count`` is requests per day for the FaaS scenario and the total
    request target for the big-data scenario.
    """

    scenario: str
    count: int
    days: int = 7
    periodic_fraction: float = 0.5
    periods_hours: tuple[int, ...] = (2, 4, 8, 12)
    dt_hours: float = 4.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scenario not in ("faas", "bigdata"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.count <= 0 or self.days <= 0:
            raise ValueError("count and days must be positive")
        if not 0.0 <= self.periodic_fraction <= 1.0:
            raise ValueError("periodic fraction must be in [0, 1]")
        if self.dt_hours < 0 or not self.periods_hours:
            raise ValueError("bad delay tolerance or period set")


@dataclass(frozen=True)
class FunctionDayStats:
    """One function's daily invocation and runtime statistics."""

    func_id: str
    minute_counts: np.ndarray  # (1440,) invocations per minute of day
    percentiles_ms: np.ndarray  # (7,) runtime at the percentile knots

    def __post_init__(self) -> None:
        counts = np.asarray(self.minute_counts, dtype=float)
        pct = np.asarray(self.percentiles_ms, dtype=float)
        if counts.shape != (MINUTES_PER_DAY,) or (counts < 0).any():
            raise TraceError(f"function {self.func_id}: bad minute counts")
        if pct.shape != (7,) or (np.diff(pct) < 0).any() or pct[-1] <= 0:
            raise TraceError(f"function {self.func_id}: percentiles must be nondecreasing and end > 0")
        counts.setflags(write=False)
        pct.setflags(write=False)
        object.__setattr__(self, "minute_counts", counts)
        object.__setattr__(self, "percentiles_ms", pct)

    @property
    def total(self) -> float:
        return float(self.minute_counts.sum())


def sample_runtime_ms(stats: FunctionDayStats, q: float) -> float:
    """Runtime at quantile ``q`` by linear interpolation of the percentile knots."""
    return float(np.interp(q, PERCENTILE_KNOTS, stats.percentiles_ms))


def synth_faas(
    spec: TraceSpec,
    stats_by_day: Sequence[Sequence[FunctionDayStats]],
    region_ids: Sequence[str],
) -> list[JobRequest]:
    """Synthesize a FaaS trace: ``count`` requests per day for ``days`` days.

    Per request the function is chosen with probability proportional to its
    daily invocation total, the runtime is sampled from the interpolated
    percentile curve, and the arrival minute from the function's empirical
    per-minute distribution. Requests carry no data (size 0) and allow no
    delay (deadline = arrival). If fewer day-stats than days are given the
    stats repeat cyclically.
    """
    if spec.scenario != "faas":
        raise ValueError("spec.scenario must be 'faas'")
    if not stats_by_day or not all(stats_by_day):
        raise TraceError("no function statistics")
    rng = np.random.default_rng(spec.seed)
    jobs: list[JobRequest] = []
    serial = 0
    for day in range(spec.days):
        stats = [s for s in stats_by_day[day % len(stats_by_day)] if s.total > 0]
        if not stats:
            raise TraceError(f"day {day}: all functions have zero invocations")
        totals = np.array([s.total for s in stats])
        weights = totals / totals.sum()
        chosen = rng.choice(len(stats), size=spec.count, p=weights)
        q_runtime = rng.random(spec.count)
        q_arrival = rng.random(spec.count)
        origins = rng.integers(0, len(region_ids), size=spec.count)

        runtimes = np.empty(spec.count)
        arrivals = np.empty(spec.count, dtype=np.int64)
        for f in np.unique(chosen):
            mask = chosen == f
            runtimes[mask] = np.interp(q_runtime[mask], PERCENTILE_KNOTS, stats[f].percentiles_ms)
            cum = np.cumsum(stats[f].minute_counts)
            picked = np.searchsorted(cum, q_arrival[mask] * cum[-1], side="right")
            arrivals[mask] = np.minimum(picked, MINUTES_PER_DAY - 1)
        # A percentile curve may start at 0 ms; keep runtimes positive.
        runtimes_min = np.maximum(runtimes / 60000.0, 1e-6)

        for i in range(spec.count):
            arrival = day * MINUTES_PER_DAY + int(arrivals[i])
            origin = region_ids[origins[i]]
            jobs.append(
                JobRequest(
                    id=f"faas-{serial:07d}",
                    origin=origin,
                    data_regions={origin},
                    size_gb=0.0,
                    nodes=1,
                    utilization=0.5,
                    vm=AZURE_FAAS_VM,
                    runtime_min=float(runtimes_min[i]),
                    arrival_min=arrival,
                    deadline_min=arrival,
                )
            )
            serial += 1
    return jobs


@dataclass(frozen=True)
class PoolJob:
    """A (nodes, vm, runtime, size) template drawn from recorded batch runs."""

    nodes: int
    vm: VmInstance
    runtime_min: float
    size_gb: float
    utilization: float | None = None


def synth_bigdata(
    spec: TraceSpec,
    pool: Sequence[PoolJob],
    region_ids: Sequence[str],
) -> list[JobRequest]:
    """Synthesize a big-data trace of roughly ``count`` requests.

    A ``periodic_fraction`` share is periodic: each family's first instance
    arrives uniformly in the first 12 hours and repeats at a period drawn
    from ``periods_hours`` until the horizon end, with deadline = arrival +
    period. The rest are ad-hoc with per-minute Poisson arrivals whose rate
    matches the remaining budget in expectation and deadline = arrival +
    ``dt_hours``. Job shapes (nodes, vm, runtime, size, utilization) are
    drawn uniformly from the pool; jobs without a recorded utilization get
    0.5.
    """
    if spec.scenario != "bigdata":
        raise ValueError("spec.scenario must be 'bigdata'")
    if not pool:
        raise TraceError("empty trace pool")
    rng = np.random.default_rng(spec.seed)
    horizon_min = spec.days * MINUTES_PER_DAY
    first_window = min(12 * 60, horizon_min)
    periodic_budget = int(round(spec.count * spec.periodic_fraction))
    adhoc_budget = spec.count - periodic_budget

    jobs: list[JobRequest] = []

    def make(job_id: str, family: str, origin: str, row: PoolJob, arrival: int, deadline: int) -> JobRequest:
        u = 0.5 if row.utilization is None else row.utilization
        return JobRequest(
            id=job_id,
            origin=origin,
            data_regions={origin},
            size_gb=row.size_gb,
            nodes=row.nodes,
            utilization=u,
            vm=row.vm,
            runtime_min=row.runtime_min,
            arrival_min=arrival,
            deadline_min=deadline,
            family=family,
        )

    n_periodic = 0
    fam = 0
    while n_periodic < periodic_budget:
        family = f"big-p{fam:06d}"
        origin = region_ids[rng.integers(0, len(region_ids))]
        row = pool[rng.integers(0, len(pool))]
        first = int(rng.integers(0, first_window))
        period = int(rng.choice(spec.periods_hours)) * 60
        arrival = first
        k = 0
        while arrival < horizon_min and n_periodic < periodic_budget:
            jobs.append(make(f"{family}#{k}", family, origin, row, arrival, arrival + period))
            arrival += period
            k += 1
            n_periodic += 1
        fam += 1

    if adhoc_budget > 0:
        lam = adhoc_budget / horizon_min
        counts = rng.poisson(lam, size=horizon_min)
        arrivals = np.repeat(np.arange(horizon_min), counts)
        rows = rng.integers(0, len(pool), size=arrivals.size)
        origins = rng.integers(0, len(region_ids), size=arrivals.size)
        dt_min = int(round(spec.dt_hours * 60))
        for i in range(arrivals.size):
            arrival = int(arrivals[i])
            job_id = f"big-a{i:07d}"
            jobs.append(
                make(job_id, job_id, region_ids[origins[i]], pool[rows[i]], arrival, arrival + dt_min)
            )
    return jobs


TRACE_HEADER = [
    "id",
    "origin",
    "regions_with_data",
    "size_gb",
    "nodes",
    "vm",
    "utilization",
    "runtime_min",
    "arrival_min",
    "deadline_min",
]


def write_trace(path: str | Path, jobs: Sequence[JobRequest]) -> None:
    """Write jobs in the trace CSV format (data regions ';'-separated)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for job in jobs:
            writer.writerow(
                [
                    job.id,
                    job.origin,
                    ";".join(sorted(job.data_regions)),
                    f"{job.size_gb:.6f}",
                    job.nodes,
                    job.vm.name,
                    f"{job.utilization:.6f}",
                    f"{job.runtime_min:.6f}",
                    job.arrival_min,
                    job.deadline_min,
                ]
            )


def load_trace(path: str | Path, catalog: Mapping[str, VmInstance] = VM_CATALOG) -> list[JobRequest]:
    """Load a trace CSV. Periodic instances share 'family#k'-style ids."""
    path = Path(path)
    jobs: list[JobRequest] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != TRACE_HEADER:
            raise TraceError(f"{path}: expected header {','.join(TRACE_HEADER)}")
        for lineno, rec in enumerate(reader, start=2):
            vm_name = rec["vm"].strip()
            if vm_name not in catalog:
                raise TraceError(f"{path}:{lineno}: unknown vm {vm_name!r}")
            try:
                jobs.append(
                    JobRequest(
                        id=rec["id"].strip(),
                        origin=rec["origin"].strip(),
                        data_regions=set(filter(None, rec["regions_with_data"].split(";"))),
                        size_gb=float(rec["size_gb"]),
                        nodes=int(rec["nodes"]),
                        utilization=float(rec["utilization"]),
                        vm=catalog[vm_name],
                        runtime_min=float(rec["runtime_min"]),
                        arrival_min=int(rec["arrival_min"]),
                        deadline_min=int(rec["deadline_min"]),
                    )
                )
            except (TraceError, ValueError) as exc:
                raise TraceError(f"{path}:{lineno}: {exc}") from None
    if not jobs:
        raise TraceError(f"{path}: no jobs")
    return jobs


def load_spark_pool(path: str | Path, catalog: Mapping[str, VmInstance] = VM_CATALOG) -> list[PoolJob]:
    """Load a batch-job pool CSV: ``nodes,vm,runtime_min,size_gb[,utilization]``."""
    path = Path(path)
    pool: list[PoolJob] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"nodes", "vm", "runtime_min", "size_gb"}
        if reader.fieldnames is None or not required.issubset(set(reader.fieldnames)):
            raise TraceError(f"{path}: expected columns {sorted(required)}")
        for lineno, rec in enumerate(reader, start=2):
            vm_name = rec["vm"].strip()
            if vm_name not in catalog:
                raise TraceError(f"{path}:{lineno}: unknown vm {vm_name!r}")
            util = rec.get("utilization")
            pool.append(
                PoolJob(
                    nodes=int(rec["nodes"]),
                    vm=catalog[vm_name],
                    runtime_min=float(rec["runtime_min"]),
                    size_gb=float(rec["size_gb"]),
                    utilization=float(util) if util not in (None, "") else None,
                )
            )
    if not pool:
        raise TraceError(f"{path}: empty pool")
    return pool


def load_faas_stats(
    counts_path: str | Path, percentiles_path: str | Path
) -> list[FunctionDayStats]:
    """Join one day of per-minute invocation counts with runtime percentiles.

    Both CSVs follow the public Azure Functions dataset shape: a
    ``HashFunction`` key column, minute columns ``1..1440`` in the counts
    file, and ``percentile_Average_{0,1,25,50,75,99,100}`` columns (ms) in
    the percentiles file. Functions present in only one file, with zero
    invocations, or with an all-zero percentile curve are dropped.
    """
    minute_cols = [str(m) for m in range(1, MINUTES_PER_DAY + 1)]
    counts: dict[str, np.ndarray] = {}
    with open(counts_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        if "HashFunction" not in fields or not set(minute_cols).issubset(fields):
            raise TraceError(f"{counts_path}: expected HashFunction and minute columns 1..1440")
        for rec in reader:
            counts[rec["HashFunction"]] = np.array([float(rec[c] or 0) for c in minute_cols])

    stats: list[FunctionDayStats] = []
    with open(percentiles_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = set(reader.fieldnames or ())
        if "HashFunction" not in fields or not set(PERCENTILE_COLUMNS).issubset(fields):
            raise TraceError(f"{percentiles_path}: expected HashFunction and percentile columns")
        for rec in reader:
            func = rec["HashFunction"]
            if func not in counts:
                continue
            pct = np.array([float(rec[c]) for c in PERCENTILE_COLUMNS])
            if counts[func].sum() <= 0 or pct[-1] <= 0:
                continue
            stats.append(FunctionDayStats(func_id=func, minute_counts=counts[func], percentiles_ms=pct))
    if not stats:
        raise TraceError(f"{percentiles_path}: no usable functions after joining with counts")
    return stats
