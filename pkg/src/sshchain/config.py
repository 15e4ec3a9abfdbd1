"""Run configuration: INI file plus command-line flags (flags win).

Example file::

    [run]
    command = sweep
    workers = 4

    [chain]
    n_cells = 80
    w = 0.5
    z = 0.0

    [sweep]
    axes = v:0:1:200
    states = edge, psi1, psi20, psi50
    observables = K

    [output]
    path = fig2c.csv
    format = csv
    precision = 12
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .export import PRECISION_RANGE
from .lattice import Boundary, ChainParams
from .phasescan import Axis, SweepSpec, SweepSpecError, FAST_N_CELLS, FAST_POINTS, PRESETS

COMMANDS = ("spectrum", "polarization", "schmidt", "winding", "bands", "sweep", "diagram", "selftest")

DEFAULTS = {
    "n_cells": 40,
    "v": 0.3,
    "w": 0.5,
    "z": 0.0,
    "boundary": "open",
    "format": "csv",
    "precision": 12,
    "n_k": 1024,
    "bell_tol": 0.05,
}

# section -> key -> type
SCHEMA = {
    "run": {"command": str, "workers": int, "preset": str, "fast": bool, "timestamp": bool, "n_k": int},
    "chain": {"n_cells": int, "v": float, "w": float, "z": float, "boundary": str},
    "sweep": {"axes": str, "states": str, "observables": str, "bell_tol": float},
    "output": {"path": str, "format": str, "precision": int},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"
    precision: int = 12


@dataclass(frozen=True)
class RunConfig:
    command: str
    chain: ChainParams
    sweep: SweepSpec | None = None
    output: OutputSpec = field(default_factory=OutputSpec)
    workers: int | None = None
    timestamp: bool = True
    n_k: int = 1024
    states: tuple[str, ...] | None = None


def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def read_config_file(path: str) -> dict[str, object]:
    """Flatten an INI file into ``{key: typed value}``; unknown names are errors."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, default_section="\x00unused")
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"malformed config file {path}: {str(exc).splitlines()[0]}") from None
    out: dict[str, object] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            kind = SCHEMA[section][key]
            try:
                if kind is bool:
                    value = parser.getboolean(section, key)
                else:
                    value = kind(raw)
            except ValueError:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from None
            out[key] = value
    return out


def build_run_config(file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults < file < flags and validate.

    ``flag_values`` holds only flags the user actually passed.
    """
    explicit = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    merged = {**DEFAULTS, **explicit}

    command = merged.get("command")
    if file_values.get("command") and flag_values.get("command") and file_values["command"] != flag_values["command"]:
        raise ConfigError(
            f"conflicting commands: {flag_values['command']!r} on the command line, {file_values['command']!r} in file"
        )
    if command is None:
        raise ConfigError("no command given")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")

    fmt = merged["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    precision = merged["precision"]
    if not PRECISION_RANGE[0] <= precision <= PRECISION_RANGE[1]:
        raise ConfigError(f"precision must be in [{PRECISION_RANGE[0]}, {PRECISION_RANGE[1]}], got {precision}")
    if merged["boundary"] not in ("open", "periodic"):
        raise ConfigError(f"boundary must be open or periodic, got {merged['boundary']!r}")
    workers = merged.get("workers")
    if workers is not None and workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    if merged["n_k"] < 64:
        raise ConfigError(f"n_k must be >= 64, got {merged['n_k']}")
    fast = bool(merged.get("fast", False))

    sweep = None
    if command in ("sweep", "diagram"):
        sweep, chain = _sweep_spec(merged, explicit, fast)
    else:
        for key in ("axes", "preset"):
            if key in explicit:
                raise ConfigError(f"{key} only applies to sweep and diagram")
        n_cells = merged["n_cells"]
        if fast and "n_cells" not in explicit:
            n_cells = FAST_N_CELLS
        chain = _chain(merged, n_cells)

    states = None
    if command in ("polarization", "schmidt") and "states" in explicit:
        states = tuple(_split_list(explicit["states"]))

    return RunConfig(
        command=command,
        chain=chain,
        sweep=sweep,
        output=OutputSpec(merged.get("path"), fmt, precision),
        workers=workers,
        timestamp=bool(merged.get("timestamp", True)),
        n_k=merged["n_k"],
        states=states,
    )


def _chain(values: dict, n_cells: int) -> ChainParams:
    try:
        return ChainParams(n_cells, values["v"], values["w"], values["z"], Boundary(values["boundary"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _sweep_spec(merged: dict, explicit: dict, fast: bool) -> tuple[SweepSpec, ChainParams]:
    base: dict = {}
    if "preset" in merged:
        name = merged["preset"]
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
        base = dict(PRESETS[name])

    axis_texts = _split_list(explicit["axes"]) if "axes" in explicit else list(base.get("axes", []))
    if not axis_texts:
        raise ConfigError(f"{merged['command']} needs at least one --axis (or a preset)")
    try:
        axes = [Axis.parse(t) for t in axis_texts]
    except SweepSpecError as exc:
        raise ConfigError(str(exc)) from None

    axis_names = {a.name for a in axes}
    for name in ("v", "w", "z"):
        if name in explicit and (name in axis_names or (name != "v" and f"{name}/v" in axis_names)):
            clash = name if name in axis_names else f"{name}/v"
            raise ConfigError(f"conflicting fixed --{name} and sweep axis {clash}")

    chain_values = {k: base.get(k, DEFAULTS[k]) for k in ("n_cells", "v", "w", "z")}
    chain_values["boundary"] = merged["boundary"]
    chain_values.update({k: explicit[k] for k in ("n_cells", "v", "w", "z") if k in explicit})
    for a in axes:
        if a.name in ("v", "w", "z"):
            chain_values[a.name] = 0.0
    n_cells = chain_values["n_cells"]

    states = _split_list(explicit["states"]) if "states" in explicit else list(base.get("states", ["psi1"]))
    observables = (
        _split_list(explicit["observables"]) if "observables" in explicit else list(base.get("observables", ["K"]))
    )
    if fast:
        if "n_cells" not in explicit:
            n_cells = FAST_N_CELLS
        axes = [Axis(a.name, a.start, a.stop, FAST_POINTS) for a in axes]
        if "states" not in explicit:
            states = [s for s in states if not s.lstrip("-").startswith("psi") or int(s.lstrip("-")[3:]) < n_cells]
    chain = _chain(chain_values, n_cells)
    if merged["command"] == "diagram" and len(axes) != 2:
        raise ConfigError("diagram needs exactly 2 axes")
    try:
        spec = SweepSpec(chain, tuple(axes), tuple(states), tuple(observables), merged["n_k"], merged["bell_tol"])
    except SweepSpecError as exc:
        raise ConfigError(str(exc)) from None
    return spec, chain
