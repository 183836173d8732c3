"""Scenario configuration: flat key=value files, named presets, validation.

A scenario file is UTF-8 text with one ``key = value`` per line and ``#``
comments.  Geometry, source and initial-ion fields are named presets with
numeric parameters rather than parsed expressions.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .params import InvalidParams, ModelParams

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "parse_scenario",
    "read_scenario",
    "scenario_text",
    "geometry_profiles",
    "source_profile",
    "initial_ion",
    "calibrated_flux",
]

GEOMETRIES = ("nwave", "layered")
SOURCES = ("none", "bump_source", "bump")  # "bump" = shorthand alias
MODELS = ("pf", "sharp", "both")
PRESSURE_MODES = ("auto", "flux", "dirichlet")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    model: str = "pf"
    nx: int = 200
    ny: int = 256
    dt: float = 0.0              # 0 -> from the CFL bound with safety 0.8
    t_end: float = 0.3
    snapshots: tuple = ()        # empty -> just t_end
    outdir: str = "runs/out"
    workers: int = 1
    periodic: bool = True

    pressure_mode: str = "auto"  # auto: flux calibrated to unit mean velocity
    q_f: float = 0.0
    p_in: float = 0.0
    p_out: float = 0.0

    geometry: str = "nwave"
    total_width: float = 0.7
    d1_base: float = 0.4
    d1_amp: float = 0.15
    d1: float = 0.4
    d2: float = 0.3

    c0: float = 0.5
    c_in: float = 0.5
    source: str = "none"
    source_amp: float = 62.5
    source_on: float = 0.1
    source_off: float = 0.3

    params: ModelParams = field(default_factory=ModelParams)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"geometry must be one of {GEOMETRIES}")
        if self.source not in SOURCES:
            raise ConfigError(f"source must be one of {SOURCES}")
        if self.pressure_mode not in PRESSURE_MODES:
            raise ConfigError(f"pressure_mode must be one of {PRESSURE_MODES}")
        if self.nx < 1 or self.ny < 16:
            raise ConfigError("grid sizes out of range (nx >= 1, ny >= 16)")
        if self.t_end <= 0.0 or self.dt < 0.0:
            raise ConfigError("need t_end > 0 and dt >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        snaps = tuple(sorted(float(s) for s in self.snapshots)) or (self.t_end,)
        bad = [s for s in snaps if s < 0.0 or s > self.t_end + 1e-12]
        if bad:
            raise ConfigError(f"snapshot times outside [0, t_end]: {bad}")
        object.__setattr__(self, "snapshots", snaps)


# scenario keys that live on ModelParams rather than ScenarioConfig; tuples
# are split into indexed scalar keys (sigma1..3, gamma1..3)
_TUPLE_KEYS = {"sigma": 3, "gamma": 3}


def _param_keys():
    keys = {}
    for f in dataclasses.fields(ModelParams):
        if f.name in _TUPLE_KEYS:
            for i in range(_TUPLE_KEYS[f.name]):
                keys[f"{f.name}{i + 1}"] = (f.name, i)
        else:
            keys[f.name] = (f.name, None)
    return keys


def _scenario_keys():
    return {f.name: f.type for f in dataclasses.fields(ScenarioConfig)
            if f.name != "params"}


def _parse_bool(raw, key):
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def parse_scenario(text: str) -> ScenarioConfig:
    """Build a validated config from flat ``key = value`` text."""
    scen_fields = _scenario_keys()
    par_fields = _param_keys()
    scen_raw: dict = {}
    par_raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key in scen_fields:
            scen_raw[key] = raw
        elif key in par_fields:
            par_raw[key] = raw
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    kwargs = {}
    for key, raw in scen_raw.items():
        ftype = scen_fields[key]
        try:
            if ftype in ("int", int):
                kwargs[key] = int(raw)
            elif ftype in ("float", float):
                kwargs[key] = float(raw)
            elif ftype in ("bool", bool):
                kwargs[key] = _parse_bool(raw, key)
            elif ftype in ("tuple", tuple):
                kwargs[key] = tuple(float(tok) for tok in raw.split(",") if tok.strip())
            else:
                kwargs[key] = raw
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc

    if par_raw:
        base = {f.name: getattr(ModelParams(), f.name)
                for f in dataclasses.fields(ModelParams)}
        for key, raw in par_raw.items():
            name, idx = par_fields[key]
            try:
                val = float(raw)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from exc
            if idx is None:
                base[name] = val
            else:
                t = list(base[name])
                t[idx] = val
                base[name] = tuple(t)
        try:
            kwargs["params"] = ModelParams(**base)
        except InvalidParams as exc:
            raise ConfigError(str(exc)) from exc

    try:
        return ScenarioConfig(**kwargs)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from exc


def read_scenario(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def scenario_text(cfg: ScenarioConfig) -> str:
    """Serialize a config back to the flat format (parse round-trips)."""
    lines = []
    for f in dataclasses.fields(ScenarioConfig):
        if f.name == "params":
            continue
        val = getattr(cfg, f.name)
        if isinstance(val, bool):
            val = "true" if val else "false"
        elif isinstance(val, tuple):
            val = ", ".join(f"{v:.17g}" for v in val)
        elif isinstance(val, float):
            val = f"{val:.17g}"
        lines.append(f"{f.name} = {val}")
    for f in dataclasses.fields(ModelParams):
        val = getattr(cfg.params, f.name)
        if f.name in _TUPLE_KEYS:
            for i, v in enumerate(val):
                lines.append(f"{f.name}{i + 1} = {v:.17g}")
        else:
            lines.append(f"{f.name} = {val:.17g}")
    return "\n".join(lines) + "\n"


def geometry_profiles(cfg: ScenarioConfig, x: np.ndarray):
    """Initial layer widths (d1(x), d2(x)) from the named preset."""
    if cfg.geometry == "nwave":
        d1 = cfg.d1_base + cfg.d1_amp * np.sin(2.0 * np.pi * x)
        d2 = cfg.total_width - d1
    else:
        d1 = np.full_like(x, cfg.d1)
        d2 = np.full_like(x, cfg.d2)
    half = 0.5 * cfg.params.ell_omega
    if np.any(d1 <= 0.0) or np.any(d2 <= 0.0) or np.any(d1 + d2 >= half):
        raise ConfigError("geometry preset leaves no room for all three layers")
    return d1, d2


def source_profile(cfg: ScenarioConfig, x: np.ndarray) -> np.ndarray:
    if cfg.source == "none":
        return np.zeros_like(x)
    bump = cfg.source_amp * (x - cfg.source_on) * (cfg.source_off - x)
    return np.maximum(0.0, bump)


def initial_ion(cfg: ScenarioConfig, x: np.ndarray) -> np.ndarray:
    return np.full_like(x, cfg.c0)


def calibrated_flux(cfg: ScenarioConfig, d1: np.ndarray, d2: np.ndarray) -> float:
    """Total flux giving unit mean velocity through the initial fluid layers."""
    return 1.0 / float(np.mean(1.0 / (2.0 * (d1 + d2))))
