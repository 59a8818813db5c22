"""Flat ``key = value`` scenario files.

Example::

    # 60 GHz passing scenario
    tx_speed = 5.556            # m/s
    rx_speed = 8.333
    lane_offset = 3.0
    passing_time = 2.0
    duration = 4.0
    carrier_frequency = 60e9
    scatterer_layout = roadside # roadside | diffuse | none
    scatterer.0.x = 12.0
    scatterer.0.y = -4.0
    scatterer.0.z = 0.8
    scatterer.0.reflection_loss = 6

Scatterers given as indexed groups are appended to the layout preset.
"""
from __future__ import annotations

import re
from dataclasses import fields
from typing import Optional

from .synth import Scatterer, ScenarioConfig, diffuse_scatterers, roadside_scatterers

REQUIRED = ("tx_speed", "rx_speed", "lane_offset", "passing_time", "duration", "carrier_frequency")
_FLOATS = {"tx_speed", "rx_speed", "lane_offset", "passing_time", "duration", "carrier_frequency",
           "snapshot_interval", "bandwidth", "los_power_at_1m", "path_loss_exponent", "noise_floor",
           "tx_height", "rx_height"}
_INTS = {"num_delay_bins", "kernel_support", "rng_seed", "diffuse_count", "diffuse_seed"}
_SCATTERER_KEYS = {"x", "y", "z", "reflection_loss", "active_start", "active_end"}
_SCATTERER_RE = re.compile(r"^scatterer\.(\d+)\.(\w+)$")


class ConfigError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.key = key
        self.line = line


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> ScenarioConfig:
    values, lines = {}, {}
    groups: dict[int, dict] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", None, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})", key, lineno)
        lines[key] = lineno
        m = _SCATTERER_RE.match(key)
        try:
            if m:
                idx, attr = int(m.group(1)), m.group(2)
                if attr not in _SCATTERER_KEYS:
                    raise ConfigError(f"unknown scatterer attribute in {key!r}", key, lineno)
                groups.setdefault(idx, {})[attr] = (float(value), lineno)
            elif key in _FLOATS:
                values[key] = float(value)
            elif key in _INTS:
                values[key] = int(value)
            elif key == "add_noise":
                values[key] = _parse_bool(value)
            elif key == "antenna_beamwidth":
                values[key] = None if value.lower() in ("none", "isotropic") else float(value)
            elif key in ("delay_kernel", "scatterer_layout"):
                values[key] = value
            else:
                raise ConfigError(f"unknown key {key!r}", key, lineno)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key!r}: {value!r}", key, lineno) from None

    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}", key)

    layout = values.pop("scatterer_layout", "none")
    count = values.pop("diffuse_count", 600)
    seed = values.pop("diffuse_seed", 1)
    if layout == "roadside":
        scatterers = list(roadside_scatterers())
    elif layout == "diffuse":
        scatterers = list(diffuse_scatterers(count, seed))
    elif layout == "none":
        scatterers = []
    else:
        raise ConfigError(f"unknown scatterer_layout {layout!r}", "scatterer_layout",
                          lines.get("scatterer_layout"))
    for idx in sorted(groups):
        g = groups[idx]
        for attr in ("x", "y", "z"):
            if attr not in g:
                key = f"scatterer.{idx}.{attr}"
                raise ConfigError(f"missing required key {key!r}", key)
        interval = None
        if "active_start" in g or "active_end" in g:
            interval = (g.get("active_start", (0.0, 0))[0], g.get("active_end", (float("inf"), 0))[0])
        try:
            scatterers.append(Scatterer((g["x"][0], g["y"][0], g["z"][0]),
                                        g.get("reflection_loss", (10.0, 0))[0], interval))
        except ValueError as exc:
            raise ConfigError(str(exc), f"scatterer.{idx}", g["x"][1]) from None
    try:
        return ScenarioConfig(scatterers=tuple(scatterers), **values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(config: ScenarioConfig) -> str:
    """Serialize every scenario field; scatterers are written as indexed groups."""
    out = ["# v2vchan scenario"]
    for f in fields(ScenarioConfig):
        if f.name == "scatterers":
            continue
        value = getattr(config, f.name)
        if value is None:
            text = "none"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, str):
            text = value
        else:
            text = repr(value)
        out.append(f"{f.name} = {text}")
    out.append("scatterer_layout = none")
    for i, s in enumerate(config.scatterers):
        x, y, z = s.position
        out += [f"scatterer.{i}.x = {x!r}", f"scatterer.{i}.y = {y!r}", f"scatterer.{i}.z = {z!r}",
                f"scatterer.{i}.reflection_loss = {s.reflection_loss!r}"]
        if s.active_interval is not None:
            out += [f"scatterer.{i}.active_start = {s.active_interval[0]!r}",
                    f"scatterer.{i}.active_end = {s.active_interval[1]!r}"]
    return "\n".join(out) + "\n"
