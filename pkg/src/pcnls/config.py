"""Experiment configuration: an INI file with fixed sections.

::

    [experiment]
    preset = free-oracle
    seed = 1234

    [grid]
    dim = 1
    points = 512
    half_width = 20.0

    [solver]
    lambda = 0.0
    dt = 0.001
    dealias = false

    [params]        ; preset-specific, see ``pcnls describe <preset>``
    [tolerances]    ; preset-specific
    [output]
    directory = out
    snapshots = false

Every key is typed by its preset default.  ``rho = (d+1)/2`` is always
derived and may not be set.
"""
from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

from .field import Grid
from .solver import SolverConfig

SECTIONS = ("experiment", "grid", "solver", "params", "tolerances", "output")


class ConfigError(ValueError):
    """Invalid configuration; ``str()`` carries the file, line and field."""


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    seed: int
    dim: int
    points: int
    half_width: float
    lam: float
    dt: float
    dealias: bool
    params: Mapping[str, Any] = field(default_factory=dict)
    tolerances: Mapping[str, float] = field(default_factory=dict)
    output_dir: str = "out"
    snapshots: bool = False

    @property
    def grid(self) -> Grid:
        return Grid(self.dim, self.points, self.half_width)

    @property
    def rho(self) -> float:
        return (self.dim + 1) / 2.0

    def solver(self, **changes) -> SolverConfig:
        base = SolverConfig(lam=self.lam, dt=self.dt, dealias=self.dealias)
        return base.with_(**changes) if changes else base

    def as_dict(self) -> dict:
        return {
            "experiment": {"preset": self.preset, "seed": self.seed},
            "grid": {"dim": self.dim, "points": self.points, "half_width": self.half_width},
            "solver": {"lambda": self.lam, "dt": self.dt, "dealias": self.dealias},
            "derived": {"rho": self.rho},
            "params": {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()},
            "tolerances": dict(self.tolerances),
            "output": {"directory": self.output_dir, "snapshots": self.snapshots},
        }


# -- value conversion -------------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(raw: str, default: Any) -> Any:
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        value = float(raw)
        if value != value:
            raise ValueError("NaN is not allowed")
        return value
    if isinstance(default, tuple):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if not items:
            raise ValueError("expected a non-empty comma-separated list")
        kind = type(default[0]) if default else float
        return tuple(kind(x) for x in items)
    return raw


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for no, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
            if key is None and current == section:
                return no
            continue
        if current == section and key is not None:
            m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
            if m and m.group(1).strip().lower() == key:
                return no
    return None


def _where(path: str, text: str, section: str, key: str | None = None) -> str:
    line = _line_of(text, section, key)
    loc = f"{path}:{line}" if line else path
    return f"{loc}: [{section}]" + (f" {key}" if key else "")


def parse_config(text: str, path: str = "<config>") -> ExperimentConfig:
    # deferred import: presets pull in the numerical modules
    from .presets import PRESETS

    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: malformed config: {exc}") from exc
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{_where(path, text, section)}: unknown section (allowed: {', '.join(SECTIONS)})")
    if not parser.has_option("experiment", "preset"):
        raise ConfigError(f"{path}: [experiment] preset is required")
    name = parser.get("experiment", "preset").strip()
    if name not in PRESETS:
        raise ConfigError(f"{_where(path, text, 'experiment', 'preset')}: unknown preset {name!r}")
    preset = PRESETS[name]
    defaults = preset.defaults()

    values: dict[str, dict[str, Any]] = {sec: dict(defaults[sec]) for sec in SECTIONS}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key == "rho":
                raise ConfigError(f"{_where(path, text, section, key)}: rho is derived as (d+1)/2 and cannot be set")
            if key not in defaults[section]:
                allowed = ", ".join(sorted(defaults[section])) or "none"
                raise ConfigError(f"{_where(path, text, section, key)}: unknown key (allowed: {allowed})")
            try:
                values[section][key] = _convert(raw, defaults[section][key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{_where(path, text, section, key)}: {exc}") from exc

    exp, grid, solver, out = values["experiment"], values["grid"], values["solver"], values["output"]
    cfg = ExperimentConfig(
        preset=name,
        seed=exp["seed"],
        dim=grid["dim"],
        points=grid["points"],
        half_width=grid["half_width"],
        lam=solver["lambda"],
        dt=solver["dt"],
        dealias=solver["dealias"],
        params=MappingProxyType(values["params"]),
        tolerances=MappingProxyType(values["tolerances"]),
        output_dir=out["directory"],
        snapshots=out["snapshots"],
    )
    for section, build in (("grid", lambda: cfg.grid), ("solver", cfg.solver)):
        try:
            build()
        except ValueError as exc:
            raise ConfigError(f"{_where(path, text, section)}: {exc}") from exc
    return cfg


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    return parse_config(text, path)


def render_config(preset_name: str, output_dir: str = "out") -> str:
    """A complete config file holding a preset's defaults."""
    from .presets import PRESETS

    defaults = PRESETS[preset_name].defaults()
    defaults["output"]["directory"] = output_dir
    lines = []
    for section in SECTIONS:
        lines.append(f"[{section}]")
        for key, value in defaults[section].items():
            lines.append(f"{key} = {format_value(value)}")
        lines.append("")
    return "\n".join(lines)
