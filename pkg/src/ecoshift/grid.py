"""Grid energy-mix model: source intensity coefficients, hourly mix series,
harmonization of raw operator data, and the prediction-noise model.

All series are hourly. A mix row is a vector of 10 source shares that sums
to one; intensities are obtained as share-weighted sums of per-source
coefficients (carbon in gCO2e/kWh, water in l/kWh, land in m2/kWh).
"""

from __future__ import annotations

import csv
import json
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

HOUR = timedelta(hours=1)

# Factor indices used across the package.
CARBON, WATER, LAND = 0, 1, 2
FACTORS = ("carbon", "water", "land")

# ha/TWh -> m2/kWh (1 ha = 1e4 m2, 1 TWh = 1e9 kWh).
HA_PER_TWH_TO_M2_PER_KWH = 1e-5


class EnergySource(Enum):
    """Generation technologies of a grid mix; the first five are renewable."""

    SOLAR = "solar"
    WIND = "wind"
    HYDRO = "hydro"
    GEOTHERMAL = "geothermal"
    BIOMASS = "biomass"
    NUCLEAR = "nuclear"
    COAL = "coal"
    GAS = "gas"
    OIL = "oil"
    UNKNOWN = "unknown"


SOURCES: tuple[EnergySource, ...] = tuple(EnergySource)
SOURCE_NAMES: tuple[str, ...] = tuple(s.value for s in SOURCES)
RENEWABLES: tuple[EnergySource, ...] = SOURCES[:5]
N_SOURCES = len(SOURCES)
_N_RENEWABLE = len(RENEWABLES)

# Error weights per renewable source, in SOURCES order (solar..biomass).
# Solar carries most of the prediction error, biomass the least.
RENEWABLE_ERROR_WEIGHTS = np.array([0.45, 0.30, 0.10, 0.10, 0.05])

ROW_SUM_TOL = 1e-9


class GridDataError(ValueError):
    """Malformed grid-mix input."""


class CoverageGapError(GridDataError):
    """Mix rows do not cover the requested horizon."""


@dataclass(frozen=True)
class IntensityCoefficients:
    """Per-source impact coefficients.

    ``table`` has shape (10, 3): rows in :data:`SOURCES` order, columns
    (carbon gCO2e/kWh, water l/kWh, land m2/kWh). Land values are stored
    in m2/kWh; published ha/TWh figures must be converted on load.
    """

    table: np.ndarray

    def __post_init__(self) -> None:
        tab = np.asarray(self.table, dtype=float)
        if tab.shape != (N_SOURCES, 3):
            raise ValueError(f"coefficient table must be {N_SOURCES}x3, got {tab.shape}")
        if (tab < 0).any():
            raise ValueError("intensity coefficients must be nonnegative")
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)

    def of(self, source: EnergySource, factor: int) -> float:
        return float(self.table[SOURCES.index(source), factor])

    @classmethod
    def from_mapping(cls, data: Mapping[str, Mapping[str, float]]) -> "IntensityCoefficients":
        """Build from ``{source: {ci, ewif, elif_ha_per_twh}}``."""
        rows = []
        for src in SOURCES:
            try:
                entry = data[src.value]
            except KeyError:
                raise ValueError(f"coefficients missing source {src.value!r}") from None
            rows.append(
                [
                    float(entry["ci"]),
                    float(entry["ewif"]),
                    float(entry["elif_ha_per_twh"]) * HA_PER_TWH_TO_M2_PER_KWH,
                ]
            )
        return cls(np.array(rows))


def load_coefficients(path: str | Path) -> IntensityCoefficients:
    """Load an intensity-coefficient JSON file (land figures in ha/TWh)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return IntensityCoefficients.from_mapping(data)


@dataclass(frozen=True)
class MixSeries:
    """Hourly energy-mix shares of one grid over a contiguous horizon.

    ``shares`` has shape (hours, 10) in :data:`SOURCES` order; every row
    sums to one within :data:`ROW_SUM_TOL`.
    """

    grid_id: str
    start: datetime
    shares: np.ndarray

    def __post_init__(self) -> None:
        if self.start.tzinfo is None:
            object.__setattr__(self, "start", self.start.replace(tzinfo=timezone.utc))
        shares = np.asarray(self.shares, dtype=float)
        if shares.ndim != 2 or shares.shape[1] != N_SOURCES:
            raise GridDataError(f"shares must be (hours, {N_SOURCES}), got {shares.shape}")
        if (shares < 0).any():
            raise GridDataError(f"grid {self.grid_id}: negative share")
        sums = shares.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
        if bad.size:
            raise GridDataError(
                f"grid {self.grid_id}: row {bad[0]} shares sum to {sums[bad[0]]:.12f}, expected 1"
            )
        shares.setflags(write=False)
        object.__setattr__(self, "shares", shares)

    @property
    def hours(self) -> int:
        return self.shares.shape[0]

    @property
    def end(self) -> datetime:
        return self.start + self.hours * HOUR

    def row(self, hour: int) -> np.ndarray:
        return self.shares[hour]


@dataclass(frozen=True)
class NoiseSpec:
    """Prediction-noise parameters for :func:`apply_noise`.

    ``mae`` is the target mean absolute error of the total renewable share.
    ``weights`` splits the renewable error across solar/wind/hydro/
    geothermal/biomass and must sum to one.
    """

    mae: float
    seed: int = 0
    weights: np.ndarray = field(default_factory=lambda: RENEWABLE_ERROR_WEIGHTS.copy())

    def __post_init__(self) -> None:
        if self.mae < 0:
            raise ValueError("mae must be >= 0")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (_N_RENEWABLE,) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("renewable error weights must be 5 values summing to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def sigma(self) -> float:
        """Std of the renewable error such that E|eps| equals ``mae``."""
        return self.mae / np.sqrt(2.0 / np.pi)


def harmonize(
    rows: Iterable[tuple[datetime, Sequence[float]]],
    grid_id: str,
    start: datetime,
    end: datetime,
) -> MixSeries:
    """Reshape timestamped mix rows of arbitrary granularity to hourly.

    Rows falling into the same hour are averaged per source and the hourly
    row is renormalized to sum one. Every hour of ``[start, end)`` must be
    covered by at least one row; rows outside the horizon are ignored.
    """
    if start.tzinfo is None:
        start = start.replace(tzinfo=timezone.utc)
    if end.tzinfo is None:
        end = end.replace(tzinfo=timezone.utc)
    n_hours = int((end - start) / HOUR)
    if n_hours <= 0 or start + n_hours * HOUR != end:
        raise GridDataError(f"horizon [{start}, {end}) is not a positive whole number of hours")

    acc = np.zeros((n_hours, N_SOURCES))
    counts = np.zeros(n_hours, dtype=int)
    for ts, shares in rows:
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        if ts < start or ts >= end:
            continue
        vec = np.asarray(shares, dtype=float)
        if vec.shape != (N_SOURCES,):
            raise GridDataError(f"grid {grid_id}: row at {ts} has {vec.size} shares, expected {N_SOURCES}")
        if (vec < 0).any():
            raise GridDataError(f"grid {grid_id}: negative share at {ts}")
        hour = int((ts - start) / HOUR)
        acc[hour] += vec
        counts[hour] += 1

    missing = np.nonzero(counts == 0)[0]
    if missing.size:
        h = int(missing[0])
        lo, hi = start + h * HOUR, start + (h + 1) * HOUR
        raise CoverageGapError(f"grid {grid_id}: no mix data for [{lo.isoformat()}, {hi.isoformat()})")

    hourly = acc / counts[:, None]
    sums = hourly.sum(axis=1)
    zero = np.nonzero(sums <= 0)[0]
    if zero.size:
        h = int(zero[0])
        raise GridDataError(f"grid {grid_id}: all-zero mix at hour {h} ({(start + h * HOUR).isoformat()})")
    hourly /= sums[:, None]
    return MixSeries(grid_id=grid_id, start=start, shares=hourly)


def mix_intensity(mix_row: Sequence[float], coeffs: IntensityCoefficients, factor: int) -> float:
    """Share-weighted intensity of one mix row for one factor."""
    row = np.asarray(mix_row, dtype=float)
    if abs(row.sum() - 1.0) > 1e-6:
        raise ValueError(f"mix row sums to {row.sum():.9f}, expected 1")
    return float(row @ coeffs.table[:, factor])


def mix_intensities(shares: np.ndarray, coeffs: IntensityCoefficients) -> np.ndarray:
    """Vectorized :func:`mix_intensity` over all factors: (hours, 10) -> (hours, 3)."""
    return np.asarray(shares, dtype=float) @ coeffs.table


def _grid_rng(spec: NoiseSpec, grid_id: str) -> np.random.Generator:
    # Seed folds in the grid id so the same NoiseSpec perturbs distinct
    # grids independently but reproducibly.
    return np.random.default_rng([spec.seed, zlib.crc32(grid_id.encode("utf-8"))])


def apply_noise(series: MixSeries, spec: NoiseSpec) -> MixSeries:
    """Perturb a mix series to mimic a prediction with the given MAE.

    Per hour, an error ``eps ~ Normal(0, mae / sqrt(2/pi))`` is added to
    the renewable sources (split by ``spec.weights``) and compensated
    uniformly across the non-renewable sources that have nonzero share
    (across the renewables themselves if no such source exists). Shares
    are then clamped to [0, 1] and the row renormalized.

    Pure function of (series, spec): the RNG is derived from the spec seed
    and the grid id only. ``mae == 0`` returns the input unchanged.
    """
    if spec.mae == 0:
        return series
    rng = _grid_rng(spec, series.grid_id)
    shares = series.shares
    eps = rng.normal(0.0, spec.sigma, size=shares.shape[0])

    noised = shares.copy()
    noised[:, :_N_RENEWABLE] += eps[:, None] * spec.weights[None, :]

    nonren = shares[:, _N_RENEWABLE:]
    active = nonren > 0
    n_active = active.sum(axis=1)
    has_nonren = n_active > 0
    comp = np.zeros_like(nonren)
    comp[has_nonren] = (eps[has_nonren] / n_active[has_nonren])[:, None] * active[has_nonren]
    noised[:, _N_RENEWABLE:] -= comp
    # Hours whose mix is fully renewable: balance within the renewables.
    if (~has_nonren).any():
        noised[~has_nonren, :_N_RENEWABLE] -= (eps[~has_nonren] / _N_RENEWABLE)[:, None]

    np.clip(noised, 0.0, 1.0, out=noised)
    noised /= noised.sum(axis=1)[:, None]
    return MixSeries(grid_id=series.grid_id, start=series.start, shares=noised)


MIX_CSV_HEADER = ["timestamp_utc", *SOURCE_NAMES]


def read_mix_rows(path: str | Path) -> list[tuple[datetime, np.ndarray]]:
    """Read raw timestamped mix rows from a grid CSV.

    Expected header: ``timestamp_utc,solar,wind,hydro,geothermal,biomass,
    nuclear,coal,gas,oil,unknown`` with ISO-8601 timestamps and decimal
    shares. Rows may be at any granularity; see :func:`harmonize`.
    """
    path = Path(path)
    rows: list[tuple[datetime, np.ndarray]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != MIX_CSV_HEADER:
            raise GridDataError(f"{path}: expected header {','.join(MIX_CSV_HEADER)}")
        for lineno, rec in enumerate(reader, start=2):
            try:
                ts = datetime.fromisoformat(rec["timestamp_utc"].strip())
            except ValueError as exc:
                raise GridDataError(f"{path}:{lineno}: bad timestamp: {exc}") from None
            if ts.tzinfo is None:
                ts = ts.replace(tzinfo=timezone.utc)
            try:
                vec = np.array([float(rec[name]) for name in SOURCE_NAMES])
            except (TypeError, ValueError):
                raise GridDataError(f"{path}:{lineno}: non-numeric share") from None
            rows.append((ts, vec))
    if not rows:
        raise GridDataError(f"{path}: no data rows")
    return rows


def load_mix_series(path: str | Path, grid_id: str, start: datetime, end: datetime) -> MixSeries:
    """Read one grid CSV and harmonize it onto ``[start, end)``."""
    return harmonize(read_mix_rows(path), grid_id, start, end)


def write_mix_csv(path: str | Path, series: MixSeries) -> None:
    """Write an hourly MixSeries in the grid CSV format."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MIX_CSV_HEADER)
        for h in range(series.hours):
            ts = (series.start + h * HOUR).strftime("%Y-%m-%dT%H:%M:%S+00:00")
            writer.writerow([ts, *(f"{v:.9f}" for v in series.shares[h])])
