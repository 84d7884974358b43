"""Run configuration: ``key = value`` text with ``[section]`` headers.

Keys given before the first section header are top-level; keys inside a
section are addressed as ``section.key``.  Every command has a fixed
schema; unknown keys, values of the wrong type and missing required keys
are errors.  Relative paths are resolved against the config file's
directory.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import ConfigError, MissingRequired, TypeMismatch, UnknownKey

REQUIRED = object()
_ROOT = "__root__"

COMMON = {
    "command": (str, REQUIRED),
    "output.dir": ("path", "out"),
    "output.stem": (str, None),
}

GRID = {
    "grid.u_min": (float, None),
    "grid.u_max": (float, None),
    "grid.v_min": (float, None),
    "grid.v_max": (float, None),
    "grid.h": (float, None),
    "grid.nu": (int, None),
    "grid.nv": (int, None),
}

SCHEMAS = {
    "fixture": {**GRID, "fixture.name": (str, REQUIRED), "fixture.oriented": (bool, False)},
    "analyze": {**GRID, "fixture.name": (str, None), "input.quadruple": ("path", None),
                "probe.tol": (float, 1e-6), "probe.min_samples": (int, 100),
                "probe.expect": (str, None)},
    "solve-pde": {**GRID, "case": (str, REQUIRED), "H": (float, None), "K": (float, None),
                  "boundary.file": ("path", None), "exact": (str, None),
                  "newton.tol": (float, 1e-11), "newton.residual_tol": (float, 1e-10),
                  "newton.max_iter": (int, 500),
                  "march.span": (float, 1.0), "march.cfl": (float, 1.0),
                  "march.v0": (float, 0.0), "march.initial": (str, "kink"),
                  "march.speed": (float, 0.5),
                  "convergence.levels": (int, 3),
                  "verdict.order_min": (float, 1.8), "verdict.order_max": (float, 2.2)},
    "reparam": {**GRID, "fixture.name": (str, "kuen-principal"), "pair": (str, "constK"),
                "K": (float, -1.0), "H": (float, None),
                "reparam.a": (float, None), "reparam.b": (float, None),
                "reparam.ubar0": (float, 0.0), "reparam.vbar0": (float, 0.0),
                "verdict.tol": (float, 1e-8)},
    "reconstruct": {**GRID, "fixture.name": (str, None), "input.quadruple": ("path", None),
                    "admissibility.tol": (float, None), "admissibility.check": (bool, True),
                    "verdict.rms_rel": (float, 1e-3)},
    "gamma": {"gamma.file": ("path", REQUIRED), "gamma.expect_rotational": (bool, True),
              "verdict.tol": (float, 1e-8)},
}

POSITIVE = {"newton.tol", "newton.residual_tol", "probe.tol", "verdict.tol", "verdict.rms_rel",
            "admissibility.tol", "grid.h", "march.span", "march.cfl"}


@dataclass
class RunConfig:
    command: str
    values: Dict[str, Any]
    base_dir: Path = field(default_factory=Path.cwd)
    given: Dict[str, str] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    @property
    def out_dir(self) -> Path:
        return Path(self.values["output.dir"])

    @property
    def stem(self) -> str:
        return self.values.get("output.stem") or self.command

    def echo(self):
        return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(self.values.items())}


def _convert(key, kind, text, base_dir):
    try:
        if kind is float:
            return float(text)
        if kind is int:
            return int(text)
        if kind is bool:
            low = text.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "path":
            p = Path(text.strip())
            return p if p.is_absolute() else (Path(base_dir) / p).resolve()
        return text.strip()
    except ValueError:
        name = kind if isinstance(kind, str) else kind.__name__
        raise TypeMismatch(f"{key} = {text!r} is not a valid {name}") from None


def _flatten(text):
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
                                   default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(f"[{_ROOT}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    flat = {}
    for sec in cp.sections():
        for k, v in cp.items(sec):
            flat[k if sec == _ROOT else f"{sec}.{k}"] = v
    return flat


def parse_config(text, base_dir=None) -> RunConfig:
    base_dir = Path.cwd() if base_dir is None else Path(base_dir)
    flat = _flatten(text)
    if "command" not in flat:
        raise MissingRequired("command")
    command = flat["command"].strip()
    if command not in SCHEMAS:
        raise TypeMismatch(f"unknown command {command!r}; expected one of {sorted(SCHEMAS)}")
    schema = {**COMMON, **SCHEMAS[command]}
    for key in flat:
        if key not in schema:
            raise UnknownKey(f"unknown key {key!r} for command {command!r}")
    values = {}
    for key, (kind, default) in schema.items():
        if key in flat:
            values[key] = _convert(key, kind, flat[key], base_dir)
        elif default is REQUIRED:
            raise MissingRequired(key)
        elif kind == "path" and default is not None:
            values[key] = _convert(key, kind, default, base_dir)
        else:
            values[key] = default
    for key in POSITIVE:
        if values.get(key) is not None and not values[key] > 0:
            raise TypeMismatch(f"{key} must be positive")
    return RunConfig(command, values, base_dir, dict(flat))


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), path.parent.resolve())


def serialize_config(cfg: RunConfig) -> str:
    """Text that parses back to an equal configuration."""
    root, sections = [], {}
    for key, value in sorted(cfg.values.items()):
        if value is None:
            continue
        text = repr(value) if isinstance(value, float) else str(value)
        if "." in key:
            sec, name = key.split(".", 1)
            sections.setdefault(sec, []).append(f"{name} = {text}")
        else:
            root.append(f"{key} = {text}")
    root.sort(key=lambda s: not s.startswith("command"))
    out = root[:]
    for sec in sorted(sections):
        out += ["", f"[{sec}]"] + sections[sec]
    return "\n".join(out) + "\n"


def grid_from_config(cfg: RunConfig, default=None):
    """``ParamGrid`` from the ``grid.*`` keys, or ``default`` when they are absent."""
    from .grid import ParamGrid
    keys = ("grid.u_min", "grid.u_max", "grid.v_min", "grid.v_max")
    vals = [cfg.get(k) for k in keys]
    if all(v is None for v in vals):
        if default is None:
            raise MissingRequired("grid.u_min/u_max/v_min/v_max")
        return default
    if any(v is None for v in vals):
        missing = [k for k, v in zip(keys, vals) if v is None]
        raise MissingRequired(", ".join(missing))
    u_range, v_range = (vals[0], vals[1]), (vals[2], vals[3])
    if cfg.get("grid.h") is not None:
        return ParamGrid.with_spacing(u_range, v_range, cfg["grid.h"])
    if cfg.get("grid.nu") is None or cfg.get("grid.nv") is None:
        raise MissingRequired("grid.h or grid.nu and grid.nv")
    return ParamGrid.from_bounds(u_range, v_range, cfg["grid.nu"], cfg["grid.nv"])
