"""Channel characterization: PDP, alignment, delay/Doppler spreads, stationarity."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import get_window

from . import kernels
from .core import (
    CirMatrix,
    DelayDopplerSpectrum,
    MetricSeries,
    PdpMatrix,
    db_to_power,
    power_to_db,
)

log = logging.getLogger(__name__)

LOS_WINDOW_DB = 6.0
# complex samples per FFT batch in the sliding-window estimator
_STFT_BATCH_SAMPLES = 4_000_000


@dataclass(frozen=True)
class AnalysisParams:
    noise_threshold: float = -70.0
    align_los: bool = True
    los_bin: int = 0
    stft_window: int = 256
    stft_step: int = 64
    stft_taper: str = "rect"
    stationarity_step: int = 50
    stationarity_threshold: float = 0.9
    stationarity_mode: str = "anchor"
    stationarity_on: str = "power"
    trend_window: int = 25

    def __post_init__(self):
        if not 0 < self.stft_step <= self.stft_window:
            raise ValueError(f"need 0 < stft_step <= stft_window, got {self.stft_step}, {self.stft_window}")
        if not 0 < self.stationarity_threshold <= 1:
            raise ValueError(f"stationarity_threshold must be in (0, 1], got {self.stationarity_threshold}")
        if self.stationarity_step < 1:
            raise ValueError("stationarity_step must be >= 1")
        if self.stft_taper not in ("rect", "hann"):
            raise ValueError(f"unknown taper {self.stft_taper!r}")
        if self.stationarity_mode not in ("anchor", "adjacent"):
            raise ValueError(f"unknown stationarity mode {self.stationarity_mode!r}")
        if self.stationarity_on not in ("power", "magnitude"):
            raise ValueError(f"unknown stationarity input {self.stationarity_on!r}")
        if self.trend_window < 1:
            raise ValueError("trend_window must be >= 1")
        if self.los_bin < 0:
            raise ValueError("los_bin must be >= 0")


@dataclass(frozen=True)
class Alignment:
    cir: CirMatrix
    shifts: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class StationarityReport:
    """Stationarity regions; lengths in seconds, boundaries as snapshot indices of region starts."""

    region_lengths: np.ndarray
    boundaries: np.ndarray
    resolution: float
    snapshot_interval: float
    analyzed_span: float
    warnings: tuple = field(default=())

    @property
    def mean(self) -> float:
        return float(np.mean(self.region_lengths))

    @property
    def std(self) -> float:
        return float(np.std(self.region_lengths))

    def as_series(self) -> MetricSeries:
        return MetricSeries(self.boundaries * self.snapshot_interval, self.region_lengths,
                            "stationarity_region", "duration", "time")


def pdp(h: CirMatrix) -> PdpMatrix:
    """Instantaneous power delay profile ``|h|**2``."""
    s = h.samples
    return PdpMatrix(h.grid, s.real * s.real + s.imag * s.imag)


def align_los(h: CirMatrix, noise_threshold: float = -70.0, los_bin: int = 0) -> Alignment:
    """Circularly shift each snapshot so its LOS bin lands on ``los_bin``.

    The LOS bin is the earliest bin within 6 dB of the snapshot maximum.
    Snapshots whose maximum is below ``noise_threshold`` are left in place and
    marked invalid (shift -1).
    """
    power = pdp(h).power
    peak = power.max(axis=1)
    valid = power_to_db(peak) >= noise_threshold
    strong = power >= peak[:, None] * db_to_power(-LOS_WINDOW_DB)
    first = np.argmax(strong, axis=1)
    shifts = np.where(valid, first, -1)
    m = h.grid.num_delay_bins
    roll = np.where(valid, los_bin - first, 0)
    cols = (np.arange(m)[None, :] - roll[:, None]) % m
    aligned = np.take_along_axis(h.samples, cols, axis=1)
    if not valid.all():
        log.warning("%d snapshot(s) below %.1f dBm cannot be aligned", int((~valid).sum()), noise_threshold)
    return Alignment(h.replace_samples(aligned), shifts, valid)


def threshold_noise(P: PdpMatrix, threshold: float = -70.0) -> PdpMatrix:
    """Zero every entry whose dBm value is below ``threshold`` (entries at the threshold stay)."""
    keep = power_to_db(P.power) >= threshold
    return PdpMatrix(P.grid, np.where(keep, P.power, 0.0))


def rms_delay_spread(P: PdpMatrix) -> MetricSeries:
    """Per-snapshot RMS delay spread; all-zero snapshots are excluded."""
    sigma, total = kernels.row_spread(P.power, P.grid.delay_axis())
    keep = total > 0
    excluded = np.flatnonzero(~keep)
    if excluded.size:
        log.info("rms_delay_spread: %d all-zero snapshot(s) excluded", excluded.size)
    return MetricSeries(P.grid.time_axis()[keep], sigma[keep], "rms_delay_spread",
                        "delay_spread", "time", tuple(excluded))


def taper_window(kind: str, n: int) -> np.ndarray:
    if kind == "rect":
        return np.ones(n)
    if kind == "hann":
        return get_window("hann", n)
    raise ValueError(f"unknown taper {kind!r}")


def _spectra(block: np.ndarray, taper: np.ndarray) -> np.ndarray:
    # block: (..., time, delay) -> power (..., delay, doppler), Doppler centered
    spec = np.fft.fft(block * taper[:, None], axis=-2)
    spec = np.fft.fftshift(spec, axes=-2)
    return np.swapaxes(spec.real * spec.real + spec.imag * spec.imag, -1, -2)


def delay_doppler(h: CirMatrix, taper: str = "rect") -> DelayDopplerSpectrum:
    """Delay-Doppler spectrum: |DFT over time|^2 for every delay bin."""
    n = h.grid.num_snapshots
    if n < 2:
        raise ValueError("delay_doppler needs at least 2 snapshots")
    power = _spectra(h.samples, taper_window(taper, n))
    return DelayDopplerSpectrum(h.grid, power, h.grid.doppler_axis(n))


def rms_doppler_spread_m1(S: DelayDopplerSpectrum) -> MetricSeries:
    """RMS Doppler spread per delay bin over the whole spectrum; zero rows excluded."""
    sigma, total = kernels.row_spread(S.power, S.doppler_axis)
    keep = total > 0
    if not keep.any():
        raise ValueError("delay-Doppler spectrum has no delay bin with positive power")
    return MetricSeries(S.grid.delay_axis()[keep], sigma[keep], "rms_doppler_spread_m1",
                        "doppler_spread", "delay", tuple(np.flatnonzero(~keep)))


def _window_spread(power: np.ndarray, axis: np.ndarray) -> float:
    # power: (delay, doppler) of one window; mean of per-delay spreads over non-zero rows
    sigma, total = kernels.row_spread(power, axis)
    keep = total > 0
    return float(sigma[keep].mean()) if keep.any() else math.nan


def rms_doppler_spread_m2(h: CirMatrix, params: AnalysisParams = AnalysisParams()) -> MetricSeries:
    """Sliding-window (STFT) RMS Doppler spread, one value per window.

    Each window's value is the mean over delay bins of the per-delay spread;
    timestamps are window centers. Windows without any power are excluded.
    """
    n, m = h.shape
    w, step = params.stft_window, params.stft_step
    if n < w:
        raise ValueError(f"record has {n} snapshots, fewer than one window of {w}")
    starts = np.arange(0, n - w + 1, step)
    taper = taper_window(params.stft_taper, w)
    axis = h.grid.doppler_axis(w)
    view = np.lib.stride_tricks.sliding_window_view(h.samples, w, axis=0)  # (n-w+1, m, w)
    batch = max(1, _STFT_BATCH_SAMPLES // (w * m))
    values = np.empty(starts.size)
    for b in range(0, starts.size, batch):
        idx = starts[b:b + batch]
        block = np.swapaxes(view[idx], -1, -2)  # (k, w, m)
        spectra = _spectra(block, taper)
        for k in range(idx.size):
            values[b + k] = _window_spread(spectra[k], axis)
    centers = (starts + (w - 1) / 2.0) * h.grid.snapshot_interval
    keep = ~np.isnan(values)
    return MetricSeries(centers[keep], values[keep], "rms_doppler_spread_m2", "doppler_spread",
                        "time", tuple(np.flatnonzero(~keep)))


def pearson(x, y) -> float:
    """Sample Pearson correlation; NaN when either input has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two 1-D vectors of equal length >= 2")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return math.nan
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    den = math.sqrt(sxx) * math.sqrt(syy)
    if den == 0.0:
        return math.nan
    return float(np.clip((dx @ dy) / den, -1.0, 1.0))


def _row_correlator(rows: np.ndarray):
    centered = rows - rows.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    flat = np.ptp(rows, axis=1) == 0.0
    unit = centered / np.where(flat, 1.0, norms)[:, None]
    warned = []

    def corr(i, j):
        if flat[i] or flat[j]:
            if not warned:
                warned.append(f"constant PDP row(s) encountered (first at subsample {i if flat[i] else j})")
            return 1.0 if flat[i] and flat[j] else 0.0
        return float(unit[i] @ unit[j])

    return corr, warned


def stationarity_regions(P: PdpMatrix, params: AnalysisParams = AnalysisParams()) -> StationarityReport:
    """Split the record into quasi-stationary regions by PDP correlation.

    Every ``stationarity_step``-th PDP row is kept. In anchor mode a region
    grows while rows correlate with its first row at or above the threshold;
    in adjacent mode consecutive kept rows are compared instead.
    """
    step = params.stationarity_step
    n = P.grid.num_snapshots
    if n < 2 * step:
        raise ValueError(f"need at least {2 * step} snapshots for step {step}, got {n}")
    rows = P.power[::step]
    if params.stationarity_on == "magnitude":
        rows = np.sqrt(rows)
    corr, warned = _row_correlator(rows)
    count = rows.shape[0]
    starts = [0]
    anchor = 0
    for i in range(1, count):
        ref = anchor if params.stationarity_mode == "anchor" else i - 1
        if corr(ref, i) < params.stationarity_threshold:
            starts.append(i)
            anchor = i
    bounds = np.array(starts + [count])
    resolution = step * P.grid.snapshot_interval
    lengths = np.diff(bounds) * resolution
    for msg in warned:
        log.warning(msg)
    return StationarityReport(lengths, np.array(starts) * step, resolution,
                              P.grid.snapshot_interval, count * resolution, tuple(warned))


def moving_average(series: MetricSeries, window: int) -> MetricSeries:
    """Centered moving average; windows shrink at the edges. Axis is unchanged."""
    if window < 1:
        raise ValueError("window must be >= 1")
    v = series.values
    left, right = (window - 1) // 2, window // 2
    padded = np.concatenate([np.full(left, np.nan), v, np.full(right, np.nan)])
    windows = np.lib.stride_tricks.sliding_window_view(padded, window)
    smoothed = np.nanmean(windows, axis=1) if v.size else v
    return MetricSeries(series.axis, smoothed, series.name + "_trend", series.quantity,
                        series.axis_kind, series.excluded)


@dataclass(frozen=True)
class Characterization:
    """Everything the processing chain produces for one record."""

    params: AnalysisParams
    alignment: Optional[Alignment]
    pdp: PdpMatrix
    delay_spread: MetricSeries
    delay_spread_trend: MetricSeries
    spectrum: DelayDopplerSpectrum
    doppler_m1: MetricSeries
    doppler_m2: MetricSeries
    doppler_m2_trend: MetricSeries
    stationarity: StationarityReport


def characterize(h: CirMatrix, params: AnalysisParams = AnalysisParams()) -> Characterization:
    """Align, truncate below the noise threshold, then compute every metric.

    CIR samples below the threshold are zeroed before the Doppler analysis, and
    snapshots that could not be aligned are zeroed entirely.
    """
    alignment = None
    if params.align_los:
        alignment = align_los(h, params.noise_threshold, params.los_bin)
        h = alignment.cir
    P = threshold_noise(pdp(h), params.noise_threshold)
    power = P.power
    if alignment is not None and not alignment.valid.all():
        power = np.where(alignment.valid[:, None], power, 0.0)
        P = PdpMatrix(P.grid, power)
    h = h.replace_samples(np.where(power > 0, h.samples, 0.0))

    sigma_tau = rms_delay_spread(P)
    spectrum = delay_doppler(h, params.stft_taper)
    m2 = rms_doppler_spread_m2(h, params)
    return Characterization(
        params=params,
        alignment=alignment,
        pdp=P,
        delay_spread=sigma_tau,
        delay_spread_trend=moving_average(sigma_tau, params.trend_window),
        spectrum=spectrum,
        doppler_m1=rms_doppler_spread_m1(spectrum),
        doppler_m2=m2,
        doppler_m2_trend=moving_average(m2, params.trend_window),
        stationarity=stationarity_regions(P, params),
    )
