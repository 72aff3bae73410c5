"""Deterministic simulator for carbon-, water-, and land-aware spatial and
temporal shifting of cloud workloads across modeled data-center regions."""

from .engine import (
    DEFAULT_SEEDS,
    DEFAULT_THETAS,
    FootprintLedger,
    SimulationConfig,
    SweepAxes,
    improvement,
    run,
    run_sweep,
    season_window,
)
from .footprint import (
    NEI_KWH_PER_GB,
    ActualFootprint,
    CostBreakdown,
    WeightVector,
    actual_footprint,
    execution_footprint,
    migration_energy,
    migration_latency_steps,
    schedule_cost,
)
from .grid import (
    EnergySource,
    IntensityCoefficients,
    MixSeries,
    NoiseSpec,
    apply_noise,
    harmonize,
    load_coefficients,
    load_mix_series,
    mix_intensity,
)
from .regions import ProfileSeries, Region, build_profile_series, load_regions, profile
from .schedulers import (
    SchedulerKind,
    ScheduleDecision,
    candidate_starts,
    decide,
    post_decision_update,
)
from .workload import (
    JobRequest,
    TraceSpec,
    VmInstance,
    load_trace,
    power_draw,
    synth_bigdata,
    synth_faas,
    write_trace,
)

__version__ = "0.1.0"
