"""Scenario configuration: flat key = value files with [section] headers.

Precedence is flags > config file > defaults.  Unknown sections or keys are
rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError
from .geometries import catalog_names
from .sphere_grids import DEFAULT_QUADRATURE, QUADRATURE_NAMES


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: str = "nil"
    initial_coeffs: tuple[float, float, float] = (1.0, 1.0, 1.0)
    seed: int = 0
    t_end: float = 1.0
    tol: float = 1e-10
    curvature_cap: float = 1e8
    coefficient_floor: float = 1e-12
    sample_count: int = 0          # 0: keep the integrator's own steps
    r_min: float = 0.5
    r_max: float = 8.0
    r_count: int = 16
    r_spacing: str = "linear"
    quadrature: str = DEFAULT_QUADRATURE
    ray_tol: float = 1e-9
    window_lo: float = 5.0
    window_hi: float = 8.0
    window_scaling: str = "metric"
    t_sequence: tuple[float, ...] = (0.0, 0.5, 1.0)
    horizon: float = 1e4
    audit_radii: tuple[float, ...] = (1.0, 2.0)
    lattice_lengths: tuple[float, float, float] = (1.0, 1.0, 1.0)
    out_dir: str = "out"
    threads: int = 1

    def r_grid(self) -> np.ndarray:
        if self.r_spacing == "linear":
            return np.linspace(self.r_min, self.r_max, self.r_count)
        return np.geomspace(self.r_min, self.r_max, self.r_count)


def _parse_float(s):
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"not a number: {s!r}") from None


def _parse_int(s):
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"not an integer: {s!r}") from None


def _parse_triple(s):
    parts = [p for p in s.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(f"expected three numbers, got {s!r}")
    return tuple(_parse_float(p) for p in parts)


def _parse_floats(s):
    parts = [p for p in s.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("expected at least one number")
    return tuple(_parse_float(p) for p in parts)


# (section, key) -> (field name, parser)
_SCHEMA = {
    ("scenario", "geometry"): ("geometry", str),
    ("scenario", "initial_coeffs"): ("initial_coeffs", _parse_triple),
    ("scenario", "seed"): ("seed", _parse_int),
    ("flow", "t_end"): ("t_end", _parse_float),
    ("flow", "tol"): ("tol", _parse_float),
    ("flow", "curvature_cap"): ("curvature_cap", _parse_float),
    ("flow", "coefficient_floor"): ("coefficient_floor", _parse_float),
    ("flow", "sample_count"): ("sample_count", _parse_int),
    ("flow", "horizon"): ("horizon", _parse_float),
    ("grid", "r_min"): ("r_min", _parse_float),
    ("grid", "r_max"): ("r_max", _parse_float),
    ("grid", "r_count"): ("r_count", _parse_int),
    ("grid", "spacing"): ("r_spacing", str),
    ("volume", "quadrature"): ("quadrature", str),
    ("volume", "ray_tol"): ("ray_tol", _parse_float),
    ("entropy", "window_lo"): ("window_lo", _parse_float),
    ("entropy", "window_hi"): ("window_hi", _parse_float),
    ("entropy", "window_scaling"): ("window_scaling", str),
    ("entropy", "t_sequence"): ("t_sequence", _parse_floats),
    ("entropy", "audit_radii"): ("audit_radii", _parse_floats),
    ("entropy", "lattice_lengths"): ("lattice_lengths", _parse_triple),
    ("output", "directory"): ("out_dir", str),
    ("output", "threads"): ("threads", _parse_int),
}


def load_config_file(path) -> dict:
    """Parse a config file into a dict of ScenarioConfig field overrides."""
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    overrides = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            try:
                name, parse = _SCHEMA[(section, key)]
            except KeyError:
                raise ConfigError(f"unknown config entry [{section}] {key}") from None
            overrides[name] = parse(value)
    return overrides


def build_config(file_overrides=None, flag_overrides=None) -> ScenarioConfig:
    cfg = ScenarioConfig()
    for overrides in (file_overrides or {}), (flag_overrides or {}):
        clean = {k: v for k, v in overrides.items() if v is not None}
        if clean:
            cfg = replace(cfg, **clean)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ScenarioConfig):
    if cfg.geometry not in catalog_names():
        raise ConfigError(f"unknown geometry {cfg.geometry!r}; "
                          f"valid: {', '.join(catalog_names())}")
    if any(c <= 0 for c in cfg.initial_coeffs):
        raise ConfigError("initial coefficients must be positive")
    if cfg.tol <= 0 or cfg.ray_tol <= 0:
        raise ConfigError("tolerances must be positive")
    if cfg.curvature_cap <= 0 or cfg.coefficient_floor <= 0:
        raise ConfigError("caps must be positive")
    if not (0 < cfg.r_min < cfg.r_max):
        raise ConfigError("need 0 < r_min < r_max")
    if cfg.r_count < 2:
        raise ConfigError("r_count must be at least 2")
    if cfg.r_spacing not in ("linear", "log"):
        raise ConfigError("spacing must be 'linear' or 'log'")
    if cfg.quadrature not in QUADRATURE_NAMES:
        raise ConfigError(f"unknown quadrature {cfg.quadrature!r}; "
                          f"valid: {', '.join(QUADRATURE_NAMES)}")
    if not (0 < cfg.window_lo < cfg.window_hi):
        raise ConfigError("need 0 < window_lo < window_hi")
    if cfg.window_scaling not in ("metric", "fixed"):
        raise ConfigError("window_scaling must be 'metric' or 'fixed'")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if any(L <= 0 for L in cfg.lattice_lengths):
        raise ConfigError("lattice lengths must be positive")


def config_lines(cfg: ScenarioConfig) -> list[str]:
    """Canonical flat rendering of the effective config (for manifests/hashing)."""
    lines = []
    for (section, key), (name, _) in sorted(_SCHEMA.items()):
        value = getattr(cfg, name)
        if isinstance(value, tuple):
            text = ",".join(f"{v:.17g}" for v in value)
        elif isinstance(value, float):
            text = f"{value:.17g}"
        else:
            text = str(value)
        lines.append(f"{section}.{key} = {text}")
    return lines


def config_hash(cfg: ScenarioConfig) -> str:
    blob = "\n".join(config_lines(cfg)).encode()
    return hashlib.sha256(blob).hexdigest()
