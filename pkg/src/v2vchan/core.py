"""Domain types shared by the synthesis, analysis and IO layers.

All power quantities are linear milliwatts; decibels only appear at the
boundaries (thresholds, CSV export). Arrays held by the types are made
read-only on construction so instances can be shared between workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

# sounder defaults
DEFAULT_BANDWIDTH = 2.048e9
DEFAULT_SNAPSHOT_INTERVAL = 125e-6
DEFAULT_NUM_DELAY_BINS = 547


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SamplingGrid:
    """Time and delay sampling of a CIR record.

    Parameters
    ----------
    snapshot_interval : float
        Seconds between consecutive snapshots.
    delay_bin : float
        Delay resolution in seconds.
    num_snapshots, num_delay_bins : int
        Grid dimensions.
    carrier_frequency, bandwidth : float, optional
        Hz. When ``bandwidth`` is given, ``delay_bin`` must equal its inverse.
    """

    snapshot_interval: float
    delay_bin: float
    num_snapshots: int
    num_delay_bins: int
    carrier_frequency: Optional[float] = None
    bandwidth: Optional[float] = None

    def __post_init__(self):
        if not self.snapshot_interval > 0:
            raise ValueError(f"snapshot_interval must be > 0, got {self.snapshot_interval}")
        if not self.delay_bin > 0:
            raise ValueError(f"delay_bin must be > 0, got {self.delay_bin}")
        if int(self.num_snapshots) < 1 or int(self.num_delay_bins) < 1:
            raise ValueError(
                f"grid dimensions must be >= 1, got {self.num_snapshots} x {self.num_delay_bins}"
            )
        object.__setattr__(self, "num_snapshots", int(self.num_snapshots))
        object.__setattr__(self, "num_delay_bins", int(self.num_delay_bins))
        if self.bandwidth is not None:
            if not self.bandwidth > 0:
                raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
            if abs(self.delay_bin * self.bandwidth - 1.0) > 1e-6:
                raise ValueError(
                    f"delay_bin {self.delay_bin!r} inconsistent with bandwidth {self.bandwidth!r}"
                )

    @classmethod
    def from_bandwidth(cls, bandwidth: float, snapshot_interval: float, num_snapshots: int,
                       num_delay_bins: int, carrier_frequency: Optional[float] = None):
        return cls(snapshot_interval, 1.0 / bandwidth, num_snapshots, num_delay_bins,
                   carrier_frequency, bandwidth)

    @property
    def doppler_resolution(self) -> float:
        return 1.0 / (self.num_snapshots * self.snapshot_interval)

    @property
    def max_doppler(self) -> float:
        """Largest unambiguous Doppler shift in Hz."""
        return 1.0 / (2.0 * self.snapshot_interval)

    @property
    def duration(self) -> float:
        return self.num_snapshots * self.snapshot_interval

    def delay_axis(self) -> np.ndarray:
        return grid_delay_axis(self)

    def time_axis(self) -> np.ndarray:
        return np.arange(self.num_snapshots) * self.snapshot_interval

    def doppler_axis(self, length: Optional[int] = None) -> np.ndarray:
        """Centered Doppler axis for a transform of ``length`` snapshots."""
        n = self.num_snapshots if length is None else int(length)
        return np.fft.fftshift(np.fft.fftfreq(n, self.snapshot_interval))

    def with_snapshots(self, num_snapshots: int) -> "SamplingGrid":
        return SamplingGrid(self.snapshot_interval, self.delay_bin, num_snapshots,
                            self.num_delay_bins, self.carrier_frequency, self.bandwidth)


def grid_delay_axis(grid: SamplingGrid) -> np.ndarray:
    """Delay of each bin in seconds: ``[0, delay_bin, 2*delay_bin, ...]``."""
    return np.arange(grid.num_delay_bins) * grid.delay_bin


@dataclass(frozen=True)
class CirMatrix:
    """Complex CIR samples ``h(t_n, tau_m)``, shape ``(num_snapshots, num_delay_bins)``.

    ``|h|**2`` is linear power in mW.
    """

    grid: SamplingGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        shape = (self.grid.num_snapshots, self.grid.num_delay_bins)
        if s.shape != shape:
            raise ValueError(f"samples shape {s.shape} does not match grid {shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("CIR samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))

    @property
    def shape(self):
        return self.samples.shape

    def replace_samples(self, samples: np.ndarray) -> "CirMatrix":
        return CirMatrix(self.grid, samples)


@dataclass(frozen=True)
class PdpMatrix:
    """Power delay profile ``P(t_n, tau_m)`` in linear mW."""

    grid: SamplingGrid
    power: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.power, dtype=np.float64)
        shape = (self.grid.num_snapshots, self.grid.num_delay_bins)
        if p.shape != shape:
            raise ValueError(f"power shape {p.shape} does not match grid {shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("PDP entries must be finite and non-negative")
        object.__setattr__(self, "power", _frozen(p))


@dataclass(frozen=True)
class DelayDopplerSpectrum:
    """Power over delay x Doppler, shape ``(num_delay_bins, transform_length)``.

    ``doppler_axis`` is centered: negative shifts first, zero in the middle.
    """

    grid: SamplingGrid
    power: np.ndarray
    doppler_axis: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.power, dtype=np.float64)
        axis = np.asarray(self.doppler_axis, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != self.grid.num_delay_bins:
            raise ValueError(f"spectrum shape {p.shape} does not match {self.grid.num_delay_bins} delay bins")
        if axis.shape != (p.shape[1],):
            raise ValueError("doppler_axis length must equal the transform length")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("spectrum entries must be finite and non-negative")
        object.__setattr__(self, "power", _frozen(p))
        object.__setattr__(self, "doppler_axis", _frozen(axis))

    @property
    def transform_length(self) -> int:
        return self.power.shape[1]


# units of MetricSeries values, keyed by quantity
QUANTITY_UNITS = {
    "delay_spread": "s",
    "doppler_spread": "Hz",
    "correlation": "1",
    "duration": "s",
    "value": "1",
}


@dataclass(frozen=True)
class MetricSeries:
    """A scalar metric sampled along time or delay.

    ``mean`` and ``std`` (population) are computed from ``values``.
    ``excluded`` lists source indices that were dropped (e.g. all-zero snapshots).
    """

    axis: np.ndarray
    values: np.ndarray
    name: str = "value"
    quantity: str = "value"
    axis_kind: str = "time"
    excluded: tuple = field(default=())

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=np.float64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if axis.shape != values.shape:
            raise ValueError(f"axis ({axis.size}) and values ({values.size}) lengths differ")
        if self.quantity not in QUANTITY_UNITS:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if self.quantity in ("delay_spread", "doppler_spread") and np.any(values < 0):
            raise ValueError("spread values must be non-negative")
        object.__setattr__(self, "axis", _frozen(axis))
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "excluded", tuple(int(i) for i in self.excluded))

    def __len__(self):
        return self.values.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values.size else float("nan")

    @property
    def std(self) -> float:
        return float(np.std(self.values)) if self.values.size else float("nan")

    @property
    def unit(self) -> str:
        return QUANTITY_UNITS[self.quantity]


def power_to_db(p):
    """Linear mW to dBm. Zero maps to ``-inf``; negative input raises ``ValueError``."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("power_to_db is undefined for negative or NaN power")
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def db_to_power(db):
    """dBm to linear mW."""
    out = np.power(10.0, np.asarray(db, dtype=np.float64) / 10.0)
    return float(out) if out.ndim == 0 else out

