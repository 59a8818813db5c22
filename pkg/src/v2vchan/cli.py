"""Command-line entry point: ``v2vchan synth | analyze | compare``.

Exit codes:
    0  success
    2  bad flags or configuration file
    3  scenario rejected because a path Doppler would alias
    4  unreadable or corrupt CIR input
    5  runs analyzed on different sampling grids
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .analysis import AnalysisParams, characterize
from .configfile import ConfigError, load_config
from .core import power_to_db
from .io import CirFormatError, export_metrics, read_cir, write_cir
from .reference import FIELD_TABLE, SUMMARY_ROWS
from .synth import AliasingError, simulate

EXIT_OK, EXIT_USAGE, EXIT_ALIASING, EXIT_INPUT, EXIT_GRID = 0, 2, 3, 4, 5
MAX_HEATMAP_COLUMNS = 2000

OUTPUT_FILES = (
    "pdp_heatmap.csv",
    "delay_spread.csv",
    "delay_doppler.csv",
    "doppler_spread_m1.csv",
    "doppler_spread_m2.csv",
    "stationarity.csv",
)

log = logging.getLogger("v2vchan")


class _Stopwatch:
    def __init__(self):
        self.timings = {}

    def __call__(self, stage):
        watch = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                watch.timings[stage] = round(time.perf_counter() - self.t0, 6)

        return _Ctx()


def _emit_manifest(manifest: dict) -> None:
    json.dump(manifest, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def decimate_max(power: np.ndarray, max_columns: int = MAX_HEATMAP_COLUMNS):
    """Max-hold decimation along axis 0 down to at most ``max_columns`` rows.

    Returns the decimated array and the index of the first source row of each group.
    """
    n = power.shape[0]
    group = max(1, math.ceil(n / max_columns))
    count = math.ceil(n / group)
    padded = np.zeros((count * group,) + power.shape[1:], dtype=power.dtype)
    padded[:n] = power
    return padded.reshape((count, group) + power.shape[1:]).max(axis=1), np.arange(count) * group


def _write_grid(path, row_label, row_axis, col_label, col_axis, values_db):
    fmt = "{:.6g}".format
    with open(path, "w", newline="") as fh:
        fh.write(f"{row_label}\\{col_label}," + ",".join(f"{c:.9g}" for c in col_axis) + "\n")
        for r, row in zip(row_axis, values_db.tolist()):
            fh.write(f"{r:.9g}," + ",".join(map(fmt, row)) + "\n")


def _summary_rows(result) -> list:
    rows = []
    for label, series, scale in (
        (SUMMARY_ROWS[0], result.delay_spread, 1e9),
        (SUMMARY_ROWS[1], result.doppler_m1, 1e-3),
        (SUMMARY_ROWS[2], result.doppler_m2, 1e-3),
    ):
        rows.append((label, "mean", series.mean * scale))
        rows.append((label, "std", series.std * scale))
    rows.append((SUMMARY_ROWS[3], "mean", result.stationarity.mean))
    rows.append((SUMMARY_ROWS[3], "std", result.stationarity.std))
    return rows


def write_summary(path, result) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("parameter,stat,value\n")
        for label, stat, value in _summary_rows(result):
            fh.write(f"{label},{stat},{value:.9g}\n")
        fh.write(f"# stationarity_resolution_ms,{result.stationarity.resolution * 1e3:.9g}\n")
        fh.write(f"# included_snapshots,{len(result.delay_spread)}\n")


def read_summary(path) -> dict:
    out = {}
    with open(path) as fh:
        next(fh)
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            label, stat, value = line.rstrip("\n").rsplit(",", 2)
            out[(label, stat)] = float(value)
    return out


def write_outputs(out_dir, result) -> None:
    os.makedirs(out_dir, exist_ok=True)
    grid = result.pdp.grid
    heat, first = decimate_max(result.pdp.power)
    _write_grid(os.path.join(out_dir, "pdp_heatmap.csv"), "delay_ns", grid.delay_axis() * 1e9,
                "time_s", first * grid.snapshot_interval, power_to_db(heat.T))
    export_metrics([result.delay_spread, result.delay_spread_trend],
                   os.path.join(out_dir, "delay_spread.csv"))
    spec, first = decimate_max(result.spectrum.power.T)
    _write_grid(os.path.join(out_dir, "delay_doppler.csv"), "delay_ns", grid.delay_axis() * 1e9,
                "doppler_khz", result.spectrum.doppler_axis[first] * 1e-3, power_to_db(spec.T))
    export_metrics([result.doppler_m1], os.path.join(out_dir, "doppler_spread_m1.csv"))
    export_metrics([result.doppler_m2, result.doppler_m2_trend],
                   os.path.join(out_dir, "doppler_spread_m2.csv"))
    st_path = os.path.join(out_dir, "stationarity.csv")
    export_metrics([result.stationarity.as_series()], st_path)
    with open(st_path, "a") as fh:
        fh.write(f"# resolution_ms,{result.stationarity.resolution * 1e3:.9g}\n")
        for w in result.stationarity.warnings:
            fh.write(f"# warning,{w}\n")
    write_summary(os.path.join(out_dir, "summary.csv"), result)


def _grid_dict(grid) -> dict:
    return {k: getattr(grid, k) for k in ("snapshot_interval", "delay_bin", "num_snapshots",
                                          "num_delay_bins", "carrier_frequency", "bandwidth")}


def cmd_synth(args) -> int:
    watch = _Stopwatch()
    try:
        with watch("load_config"):
            config = load_config(args.config)
            if args.seed is not None:
                config = replace(config, rng_seed=args.seed)
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with watch("simulate"):
            h = simulate(config, workers=args.workers)
    except AliasingError as exc:
        print(f"scenario rejected: {exc}", file=sys.stderr)
        return EXIT_ALIASING
    with watch("write"):
        write_cir(args.out, h)
    _emit_manifest({
        "command": "synth",
        "tool_version": __version__,
        "config": args.config,
        "output": args.out,
        "seed": config.rng_seed,
        "grid": _grid_dict(h.grid),
        "timings_s": watch.timings,
    })
    return EXIT_OK


def params_from_args(args) -> AnalysisParams:
    return AnalysisParams(
        noise_threshold=args.noise_threshold,
        align_los=not args.no_align,
        los_bin=args.los_bin,
        stft_window=args.stft_window,
        stft_step=args.stft_step,
        stft_taper=args.taper,
        stationarity_step=args.stationarity_step,
        stationarity_threshold=args.stationarity_threshold,
        trend_window=args.trend_window,
    )


def cmd_analyze(args) -> int:
    watch = _Stopwatch()
    try:
        params = params_from_args(args)
    except ValueError as exc:
        print(f"bad analysis flags: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with watch("read"):
            h = read_cir(args.cir)
    except (OSError, CirFormatError, ValueError) as exc:
        print(f"cannot read {args.cir}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        with watch("analyze"):
            result = characterize(h, params)
    except ValueError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    with watch("write"):
        write_outputs(args.out_dir, result)
        run = {"tool_version": __version__, "input": os.path.basename(args.cir),
               "grid": _grid_dict(h.grid), "params": asdict(params)}
        with open(os.path.join(args.out_dir, "run.json"), "w") as fh:
            json.dump(run, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit_manifest({
        "command": "analyze",
        "tool_version": __version__,
        "input": args.cir,
        "output_dir": args.out_dir,
        "params": asdict(params),
        "outputs": list(OUTPUT_FILES) + ["summary.csv", "run.json"],
        "stationarity_resolution_ms": result.stationarity.resolution * 1e3,
        "timings_s": watch.timings,
    })
    return EXIT_OK


def _load_run(run_dir):
    with open(os.path.join(run_dir, "run.json")) as fh:
        run = json.load(fh)
    return run, read_summary(os.path.join(run_dir, "summary.csv"))


def _ratio(a, b):
    return b / a if a else float("nan")


def cmd_compare(args) -> int:
    try:
        run_a, sum_a = _load_run(args.run_a)
        run_b, sum_b = _load_run(args.run_b)
    except (OSError, ValueError, StopIteration) as exc:
        print(f"cannot load runs: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ga, gb = run_a["grid"], run_b["grid"]
    keys = ("snapshot_interval", "delay_bin", "num_snapshots", "num_delay_bins")
    mismatch = [k for k in keys if ga[k] != gb[k]]
    if mismatch:
        print(f"grids differ in {', '.join(mismatch)}", file=sys.stderr)
        return EXIT_GRID

    fa, fb = ga.get("carrier_frequency"), gb.get("carrier_frequency")
    name_a = f"A ({fa / 1e9:g} GHz)" if fa else "A"
    name_b = f"B ({fb / 1e9:g} GHz)" if fb else "B"
    lines = [f"{'parameter':32s} {'stat':5s} {name_a:>14s} {name_b:>14s} {'B/A':>8s}"]
    for label in SUMMARY_ROWS:
        for stat in ("mean", "std"):
            a, b = sum_a[(label, stat)], sum_b[(label, stat)]
            lines.append(f"{label:32s} {stat:5s} {a:14.6g} {b:14.6g} {_ratio(a, b):8.4f}")
    m1_ratio = _ratio(sum_a[(SUMMARY_ROWS[1], "mean")], sum_b[(SUMMARY_ROWS[1], "mean")])
    if fa and fb:
        expected = fb / fa
        lines.append(f"Doppler scaling check: M1 mean ratio {m1_ratio:.4f}, "
                     f"carrier ratio {expected:.4f}, deviation {100 * (m1_ratio / expected - 1):+.1f}%")
    else:
        lines.append(f"Doppler scaling check: M1 mean ratio {m1_ratio:.4f} (carrier unknown)")
    if args.field_reference:
        lines.append("")
        lines.append("Published field measurements (reference only, non-binding):")
        for meas in (1, 2):
            lines.append(f"  measurement {meas}: {'parameter':30s} {'60 GHz mean/std':>18s} {'80 GHz mean/std':>18s}")
            for label in SUMMARY_ROWS:
                m60, s60 = FIELD_TABLE[(meas, 60)][label]
                m80, s80 = FIELD_TABLE[(meas, 80)][label]
                lines.append(f"  {'':15s}{label:30s} {m60:>9g}/{s60:<8g} {m80:>9g}/{s80:<8g}")
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2vchan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="simulate a scenario file into a CIR file")
    p.add_argument("config")
    p.add_argument("out")
    p.add_argument("--seed", type=int, default=None, help="override rng_seed (u64)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_synth)

    d = AnalysisParams()
    p = sub.add_parser("analyze", help="run the characterization chain on a CIR file")
    p.add_argument("cir")
    p.add_argument("out_dir")
    p.add_argument("--noise-threshold", type=float, default=d.noise_threshold, metavar="DBM")
    p.add_argument("--no-align", action="store_true")
    p.add_argument("--los-bin", type=int, default=d.los_bin)
    p.add_argument("--stft-window", type=int, default=d.stft_window)
    p.add_argument("--stft-step", type=int, default=d.stft_step)
    p.add_argument("--taper", choices=("rect", "hann"), default=d.stft_taper)
    p.add_argument("--stationarity-step", type=int, default=d.stationarity_step)
    p.add_argument("--stationarity-threshold", type=float, default=d.stationarity_threshold)
    p.add_argument("--trend-window", type=int, default=d.trend_window)
    p.add_argument("--seed", type=int, default=None, help="accepted for symmetry; analysis is deterministic")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="compare two analyze output directories")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.add_argument("--field-reference", action="store_true",
                   help="also print the published field values")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
