"""Data-center regions and their per-step sustainability profiles.

A region's profile at a step is the 3-vector (carbon, water, land) of
intensities per kWh of IT energy, combining the grid mix intensity with
the facility's PUE/WUE/LUE. Profiles are piecewise-constant per hour
(grid data is hourly while the simulation step is one minute).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .grid import IntensityCoefficients, MixSeries, mix_intensities, mix_intensity

MINUTES_PER_HOUR = 60


@dataclass(frozen=True)
class Region:
    """One data center / cloud region."""

    id: str
    grid_id: str
    pue: float
    wue: float
    land_area_m2: float
    annual_it_energy_kwh: float

    def __post_init__(self) -> None:
        if self.pue < 1:
            raise ValueError(f"region {self.id}: PUE must be >= 1, got {self.pue}")
        if self.wue < 0:
            raise ValueError(f"region {self.id}: WUE must be >= 0")
        if self.land_area_m2 <= 0:
            raise ValueError(f"region {self.id}: land area must be > 0")
        if self.annual_it_energy_kwh <= 0:
            raise ValueError(f"region {self.id}: annual IT energy must be > 0")

    @property
    def lue(self) -> float:
        """Land-usage effectiveness in m2/kWh: property area over IT energy."""
        return self.land_area_m2 / self.annual_it_energy_kwh


def load_regions(path: str | Path) -> list[Region]:
    """Load a regions config: ``{"regions": [{id, grid, pue, wue, ...}]}``."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    regions = [
        Region(
            id=entry["id"],
            grid_id=entry["grid"],
            pue=float(entry["pue"]),
            wue=float(entry["wue"]),
            land_area_m2=float(entry["land_area_m2"]),
            annual_it_energy_kwh=float(entry["annual_it_energy_kwh"]),
        )
        for entry in data["regions"]
    ]
    if not regions:
        raise ValueError(f"{path}: empty region list")
    ids = [r.id for r in regions]
    if len(set(ids)) != len(ids):
        raise ValueError(f"{path}: duplicate region ids")
    return regions


def profile(region: Region, mix_row: Sequence[float], coeffs: IntensityCoefficients) -> np.ndarray:
    """Raw sustainability profile (carbon, water, land) for one mix row."""
    ci = mix_intensity(mix_row, coeffs, 0)
    ewif = mix_intensity(mix_row, coeffs, 1)
    elif_ = mix_intensity(mix_row, coeffs, 2)
    return np.array(
        [
            ci * region.pue,
            region.wue + ewif * region.pue,
            region.lue + elif_ * region.pue,
        ]
    )


@dataclass(frozen=True)
class ProfileSeries:
    """Hourly raw and normalized profiles for a set of regions.

    Arrays are indexed ``[region, hour, factor]``. Normalization bounds are
    the per-factor min/max over all regions and hours of this series and
    stay frozen once built. ``global_norm`` is the cross-region average raw
    profile normalized over time; ``avg_raw`` is the same average without
    normalization (used to price migration in physical units).

    ``cum_raw``/``cum_norm`` are hour-boundary prefix sums enabling O(1)
    integration of the piecewise-constant profiles over minute intervals.
    """

    region_ids: tuple[str, ...]
    hours: int
    raw: np.ndarray
    norm: np.ndarray
    bounds_min: np.ndarray
    bounds_max: np.ndarray
    global_norm: np.ndarray
    avg_raw: np.ndarray
    cum_raw: np.ndarray
    cum_norm: np.ndarray

    @property
    def minutes(self) -> int:
        return self.hours * MINUTES_PER_HOUR

    def region_index(self, region_id: str) -> int:
        return self.region_ids.index(region_id)

    def _cum_at(self, cum: np.ndarray, values: np.ndarray, d: int, m: np.ndarray) -> np.ndarray:
        # Prefix integral in minute*intensity units at (possibly fractional)
        # minute offsets m, shape (..., 3).
        idx = np.floor(m / MINUTES_PER_HOUR).astype(np.int64)
        idx_v = np.minimum(idx, self.hours - 1)
        rem = m - MINUTES_PER_HOUR * idx
        return MINUTES_PER_HOUR * cum[d, idx] + rem[..., None] * values[d, idx_v]

    def _integral(
        self, cum: np.ndarray, values: np.ndarray, d: int, a: np.ndarray, b: np.ndarray
    ) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if (a < -1e-9).any() or (b > self.minutes + 1e-6).any():
            raise HorizonOverflowError(
                f"interval exceeds the profile coverage of {self.minutes} minutes"
            )
        b = np.minimum(b, float(self.minutes))
        return self._cum_at(cum, values, d, b) - self._cum_at(cum, values, d, a)

    def norm_integral(self, d: int, a, b) -> np.ndarray:
        """Integral of the normalized profile over minutes [a, b), per factor."""
        return self._integral(self.cum_norm, self.norm, d, a, b)

    def raw_integral(self, d: int, a, b) -> np.ndarray:
        """Integral of the raw profile over minutes [a, b), per factor."""
        return self._integral(self.cum_raw, self.raw, d, a, b)

    def norm_at(self, d: int, step: int) -> np.ndarray:
        return self.norm[d, step // MINUTES_PER_HOUR]

    def raw_at(self, d: int, step: int) -> np.ndarray:
        return self.raw[d, step // MINUTES_PER_HOUR]

    def global_norm_at(self, step) -> np.ndarray:
        return self.global_norm[np.asarray(step) // MINUTES_PER_HOUR]

    def avg_raw_at(self, step: int) -> np.ndarray:
        return self.avg_raw[step // MINUTES_PER_HOUR]


class HorizonOverflowError(ValueError):
    """A candidate execution interval runs past the profile coverage."""


def _normalize(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    out = np.zeros_like(values)
    ok = span > 0
    out[..., ok] = (values[..., ok] - lo[ok]) / span[ok]
    return out


def build_profile_series(
    regions: Sequence[Region],
    mixes: Mapping[str, MixSeries],
    coeffs: IntensityCoefficients,
) -> ProfileSeries:
    """Build the frozen profile series for a region set.

    Every region's grid must have a mix series; all series must span the
    same number of hours. Normalization bounds are computed over all
    (region, hour) cells; a factor that is constant everywhere normalizes
    to zero rather than NaN.
    """
    hours = None
    for region in regions:
        if region.grid_id not in mixes:
            raise ValueError(f"region {region.id}: no mix series for grid {region.grid_id!r}")
        h = mixes[region.grid_id].hours
        if hours is None:
            hours = h
        elif h != hours:
            raise ValueError("mix series cover different numbers of hours")
    assert hours is not None

    raw = np.empty((len(regions), hours, 3))
    for d, region in enumerate(regions):
        grid = mix_intensities(mixes[region.grid_id].shares, coeffs)
        raw[d, :, 0] = grid[:, 0] * region.pue
        raw[d, :, 1] = region.wue + grid[:, 1] * region.pue
        raw[d, :, 2] = region.lue + grid[:, 2] * region.pue

    lo = raw.min(axis=(0, 1))
    hi = raw.max(axis=(0, 1))
    norm = _normalize(raw, lo, hi)

    avg_raw = raw.mean(axis=0)
    g_lo = avg_raw.min(axis=0)
    g_hi = avg_raw.max(axis=0)
    global_norm = _normalize(avg_raw, g_lo, g_hi)

    cum_raw = np.zeros((len(regions), hours + 1, 3))
    np.cumsum(raw, axis=1, out=cum_raw[:, 1:])
    cum_norm = np.zeros((len(regions), hours + 1, 3))
    np.cumsum(norm, axis=1, out=cum_norm[:, 1:])

    for arr in (raw, norm, global_norm, avg_raw, cum_raw, cum_norm, lo, hi):
        arr.setflags(write=False)
    return ProfileSeries(
        region_ids=tuple(r.id for r in regions),
        hours=hours,
        raw=raw,
        norm=norm,
        bounds_min=lo,
        bounds_max=hi,
        global_norm=global_norm,
        avg_raw=avg_raw,
        cum_raw=cum_raw,
        cum_norm=cum_norm,
    )
