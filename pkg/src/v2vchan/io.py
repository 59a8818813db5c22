"""Binary CIR files and CSV metric export.

CIR file layout (little-endian, packed)::

    offset  size  field
    0       8     magic b"V2VCIR01"
    8       2     version (u16)
    10      8     num_snapshots (u64)
    18      4     num_delay_bins (u32)
    22      8     snapshot_interval (f64, s)
    30      8     delay_bin (f64, s)
    38      8     carrier_frequency (f64, Hz; 0 = unknown)
    46      8     bandwidth (f64, Hz; 0 = unknown)
    54      22    reserved, zero
    76      ...   samples, float32 (re, im) pairs, snapshot-major
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CirMatrix, MetricSeries, SamplingGrid

MAGIC = b"V2VCIR01"
VERSION = 1
HEADER = struct.Struct("<8sHQI4d22s")
HEADER_SIZE = HEADER.size  # 76

# CSV scale factors and column suffixes
_VALUE_UNITS = {
    "delay_spread": (1e9, "ns"),
    "doppler_spread": (1e-3, "kHz"),
    "duration": (1.0, "s"),
    "correlation": (1.0, "1"),
    "value": (1.0, "1"),
}
_AXIS_UNITS = {
    "time": (1.0, "s"),
    "delay": (1e9, "ns"),
    "doppler": (1e-3, "kHz"),
}


class CirFormatError(ValueError):
    pass


class BadMagicError(CirFormatError):
    pass


class VersionMismatchError(CirFormatError):
    pass


class TruncatedPayloadError(CirFormatError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"truncated payload: expected {expected} bytes, found {actual}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class CirFileHeader:
    version: int
    num_snapshots: int
    num_delay_bins: int
    snapshot_interval: float
    delay_bin: float
    carrier_frequency: float
    bandwidth: float

    def pack(self) -> bytes:
        return HEADER.pack(MAGIC, self.version, self.num_snapshots, self.num_delay_bins,
                           self.snapshot_interval, self.delay_bin, self.carrier_frequency,
                           self.bandwidth, bytes(22))

    @classmethod
    def unpack(cls, raw: bytes) -> "CirFileHeader":
        if len(raw) < HEADER_SIZE:
            raise TruncatedPayloadError(HEADER_SIZE, len(raw))
        magic, version, ns, nd, dt, db, fc, bw, _ = HEADER.unpack(raw[:HEADER_SIZE])
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise VersionMismatchError(f"unsupported version {version}, expected {VERSION}")
        if ns == 0 or nd == 0:
            raise CirFormatError("header declares an empty matrix")
        return cls(version, ns, nd, dt, db, fc, bw)

    @classmethod
    def from_grid(cls, grid: SamplingGrid) -> "CirFileHeader":
        return cls(VERSION, grid.num_snapshots, grid.num_delay_bins, grid.snapshot_interval,
                   grid.delay_bin, grid.carrier_frequency or 0.0, grid.bandwidth or 0.0)

    def grid(self) -> SamplingGrid:
        return SamplingGrid(self.snapshot_interval, self.delay_bin, self.num_snapshots,
                            self.num_delay_bins, self.carrier_frequency or None,
                            self.bandwidth or None)

    @property
    def payload_size(self) -> int:
        return self.num_snapshots * self.num_delay_bins * 8


def write_cir(path, h: CirMatrix) -> None:
    """Write ``h`` as header + float32 interleaved samples."""
    header = CirFileHeader.from_grid(h.grid)
    payload = np.empty(h.samples.shape + (2,), dtype="<f4")
    payload[..., 0] = h.samples.real
    payload[..., 1] = h.samples.imag
    with open(path, "wb") as fh:
        fh.write(header.pack())
        fh.write(payload.tobytes())


def read_header(path) -> CirFileHeader:
    with open(path, "rb") as fh:
        return CirFileHeader.unpack(fh.read(HEADER_SIZE))


def read_cir(path) -> CirMatrix:
    """Read and validate a CIR file written by :func:`write_cir`."""
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        header = CirFileHeader.unpack(fh.read(HEADER_SIZE))
        actual = size - HEADER_SIZE
        if actual != header.payload_size:
            raise TruncatedPayloadError(header.payload_size, actual)
        raw = np.fromfile(fh, dtype="<f4", count=header.payload_size // 4)
    pairs = raw.reshape(header.num_snapshots, header.num_delay_bins, 2).astype(np.float64)
    return CirMatrix(header.grid(), pairs[..., 0] + 1j * pairs[..., 1])


def column_name(series: MetricSeries) -> str:
    _, unit = _VALUE_UNITS[series.quantity]
    return f"{series.name}_{unit}"


def axis_name(series: MetricSeries) -> str:
    _, unit = _AXIS_UNITS[series.axis_kind]
    return f"{series.axis_kind}_{unit}"


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def export_metrics(series: Sequence[MetricSeries], path) -> None:
    """Write series sharing one axis to CSV; mean/std follow as ``#`` lines.

    Delay spreads are written in ns, Doppler spreads in kHz, delay axes in ns.
    """
    series = list(series)
    if not series:
        raise ValueError("export_metrics needs at least one series")
    first = series[0]
    for s in series[1:]:
        if s.axis_kind != first.axis_kind or not np.array_equal(s.axis, first.axis):
            raise ValueError(f"series {s.name!r} does not share the axis of {first.name!r}")
    axis_scale, _ = _AXIS_UNITS[first.axis_kind]
    scales = [_VALUE_UNITS[s.quantity][0] for s in series]
    lines = [",".join([axis_name(first)] + [column_name(s) for s in series])]
    columns = [s.values * k for s, k in zip(series, scales)]
    for i, x in enumerate(first.axis * axis_scale):
        lines.append(",".join([_fmt(x)] + [_fmt(c[i]) for c in columns]))
    for stat in ("mean", "std"):
        for s, k in zip(series, scales):
            lines.append(f"# {stat},{column_name(s)},{_fmt(getattr(s, stat) * k)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_metrics(path) -> tuple[list[str], np.ndarray, dict]:
    """Parse a file from :func:`export_metrics`: header, data rows, ``{(stat, column): value}``."""
    header, rows, summary = None, [], {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                stat, col, value = line[1:].strip().split(",")
                summary[(stat, col)] = float(value)
            elif header is None:
                header = line.split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    return header, np.array(rows, dtype=np.float64).reshape(-1, len(header)), summary
