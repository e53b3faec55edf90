"""Scenario configuration: TOML in, validated dataclasses out.

A scenario names a preset, overrides any of its physical fields, and picks
one kind of computation. Lists in ``geometry.a_over_lambda`` and
``environment.temperature_T`` are swept, one output curve per value.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from ..errors import ConfigValidation
from ..params import PRESETS

KINDS = ("couplings", "bands", "spectrum", "dynamics", "correlations", "bath-probe")


@dataclass
class Geometry:
    n_qubits: Optional[int] = None
    a_over_lambda: list[float] = field(default_factory=list)
    standoff_d: Optional[float] = None  # cm; preset value when unset


@dataclass
class EnvironmentSection:
    temperature_T: list[float] = field(default_factory=lambda: [0.0])
    detuning: Optional[float] = None  # rad/s
    applied_field_B0: Optional[float] = None  # G


@dataclass
class Disorder:
    xi: float = 0.0
    n_realizations: int = 1
    master_seed: int = 0


@dataclass
class Solver:
    method: str = "dense"
    n_traj: int = 2000
    rtol: float = 1e-8
    atol: float = 1e-10
    t_max: float = 5.0
    n_points: int = 200
    j_mode: str = "asymptotic"
    snapshot_times: list[float] = field(default_factory=list)


@dataclass
class CouplingsScan:
    rho_min: float = 0.05
    rho_max: float = 5.0
    n_rho: int = 100
    full: bool = True
    include_jz: bool = True


@dataclass
class BandsScan:
    n_k: int = 200
    n_max: int = 100_000


@dataclass
class Probe:
    susceptibility: str = "minus_plus"
    omega_min: float = 0.5  # in units of omega_qi
    omega_max: float = 1.5
    n_omega: int = 21
    k_max: float = 3.0  # in units of 1/lambda
    n_k: int = 61


@dataclass
class Output:
    directory: str = "coopmag-out"


@dataclass
class ScenarioConfig:
    kind: str
    preset: str = "yig-nv"
    seed: int = 0
    bath: dict = field(default_factory=dict)
    qubits: dict = field(default_factory=dict)
    longitudinal: dict = field(default_factory=dict)
    geometry: Geometry = field(default_factory=Geometry)
    environment: EnvironmentSection = field(default_factory=EnvironmentSection)
    disorder: Disorder = field(default_factory=Disorder)
    solver: Solver = field(default_factory=Solver)
    couplings: CouplingsScan = field(default_factory=CouplingsScan)
    bands: BandsScan = field(default_factory=BandsScan)
    probe: Probe = field(default_factory=Probe)
    output: Output = field(default_factory=Output)

    def to_dict(self) -> dict:
        return _strip_none(dataclasses.asdict(self))

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())


_SECTIONS = {
    "geometry": Geometry,
    "environment": EnvironmentSection,
    "disorder": Disorder,
    "solver": Solver,
    "couplings": CouplingsScan,
    "bands": BandsScan,
    "probe": Probe,
    "output": Output,
}
_FREE_SECTIONS = ("bath", "qubits", "longitudinal")
_LIST_FIELDS = {("geometry", "a_over_lambda"), ("environment", "temperature_T"),
                ("solver", "snapshot_times")}


def _strip_none(d):
    if isinstance(d, dict):
        return {k: _strip_none(v) for k, v in d.items() if v is not None}
    return d


def _coerce(section: str, name: str, value: Any, ftype: Any, errors: dict) -> Any:
    path = f"{section}.{name}"
    if (section, name) in _LIST_FIELDS and not isinstance(value, list):
        value = [value]
    t = str(ftype)
    try:
        if "list[float]" in t:
            return [float(v) for v in value]
        if "bool" in t:
            if not isinstance(value, bool):
                raise TypeError("expected true or false")
            return value
        if "int" in t and "float" not in t:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError("expected an integer")
            return int(value)
        if "float" in t:
            if isinstance(value, bool):
                raise TypeError("expected a number")
            return float(value)
        if "str" in t:
            if not isinstance(value, str):
                raise TypeError("expected a string")
            return value
    except (TypeError, ValueError) as exc:
        errors[path] = str(exc) if str(exc) else f"cannot interpret {value!r}"
        return None
    return value


def from_dict(raw: dict) -> ScenarioConfig:
    """Build and validate a :class:`ScenarioConfig` from parsed TOML."""
    errors: dict[str, str] = {}
    raw = dict(raw)
    kind = raw.pop("kind", None)
    if kind not in KINDS:
        errors["kind"] = f"expected one of {', '.join(KINDS)}, got {kind!r}"
    kwargs: dict[str, Any] = {"kind": kind}
    for key in ("preset", "seed"):
        if key in raw:
            kwargs[key] = raw.pop(key)
    for name in _FREE_SECTIONS:
        if name in raw:
            val = raw.pop(name)
            if not isinstance(val, dict):
                errors[name] = "expected a table"
            else:
                kwargs[name] = dict(val)
    for name, cls in _SECTIONS.items():
        if name not in raw:
            continue
        val = raw.pop(name)
        if not isinstance(val, dict):
            errors[name] = "expected a table"
            continue
        known = {f.name: f.type for f in fields(cls)}
        sect = {}
        for k, v in val.items():
            if k not in known:
                errors[f"{name}.{k}"] = "unknown key"
                continue
            sect[k] = _coerce(name, k, v, known[k], errors)
        if not any(e.startswith(name + ".") for e in errors):
            kwargs[name] = cls(**sect)
    for k in raw:
        errors[k] = "unknown key"
    if errors:
        raise ConfigValidation(errors)
    cfg = ScenarioConfig(**kwargs)
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    e: dict[str, str] = {}
    if cfg.preset not in PRESETS:
        e["preset"] = f"unknown preset {cfg.preset!r}; available: {', '.join(sorted(PRESETS))}"
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        e["seed"] = "expected an unsigned 64-bit integer"
    g = cfg.geometry
    if g.n_qubits is not None and g.n_qubits < 1:
        e["geometry.n_qubits"] = "must be >= 1"
    if any(not (a > 0 and math.isfinite(a)) for a in g.a_over_lambda):
        e["geometry.a_over_lambda"] = "values must be finite and > 0"
    if g.standoff_d is not None and not g.standoff_d > 0:
        e["geometry.standoff_d"] = "must be > 0"
    env = cfg.environment
    if not env.temperature_T or any(not (t >= 0 and math.isfinite(t)) for t in env.temperature_T):
        e["environment.temperature_T"] = "values must be finite and >= 0"
    if env.detuning is not None and env.applied_field_B0 is not None:
        e["environment.detuning"] = "give either detuning or applied_field_B0, not both"
    d = cfg.disorder
    if not (d.xi >= 0 and math.isfinite(d.xi)):
        e["disorder.xi"] = "must be finite and >= 0"
    if d.n_realizations < 1:
        e["disorder.n_realizations"] = "must be >= 1"
    if not 0 <= d.master_seed < 2**64:
        e["disorder.master_seed"] = "expected an unsigned 64-bit integer"
    s = cfg.solver
    if s.method not in ("dense", "trajectories"):
        e["solver.method"] = "expected 'dense' or 'trajectories'"
    if s.n_traj < 1:
        e["solver.n_traj"] = "must be >= 1"
    if not (s.rtol > 0 and s.atol > 0):
        e["solver.rtol"] = "tolerances must be > 0"
    if not s.t_max > 0.5:
        e["solver.t_max"] = "must exceed 0.5 (end of the logarithmic part of the grid)"
    if s.n_points < 60:
        e["solver.n_points"] = "must be >= 60"
    if s.j_mode not in ("asymptotic", "full"):
        e["solver.j_mode"] = "expected 'asymptotic' or 'full'"
    if any(t < 0 for t in s.snapshot_times):
        e["solver.snapshot_times"] = "must be >= 0"
    c = cfg.couplings
    if not 0 < c.rho_min < c.rho_max:
        e["couplings.rho_min"] = "need 0 < rho_min < rho_max"
    if c.n_rho < 2:
        e["couplings.n_rho"] = "must be >= 2"
    if cfg.bands.n_k < 2 or cfg.bands.n_max < 1:
        e["bands.n_k"] = "need n_k >= 2 and n_max >= 1"
    p = cfg.probe
    if p.susceptibility not in ("minus_plus", "plus_minus", "zz"):
        e["probe.susceptibility"] = "expected minus_plus, plus_minus or zz"
    if e:
        raise ConfigValidation(e)


def loads(text: str) -> ScenarioConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigValidation({"<file>": f"TOML syntax error: {exc}"}) from None
    return from_dict(raw)


def load(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigValidation({"<file>": f"cannot read {path}: {exc.strerror}"}) from None
    return loads(text)


def apply_override(raw: dict, assignment: str) -> None:
    """Apply ``section.key=value`` (value in TOML syntax) to a raw config dict."""
    if "=" not in assignment:
        raise ConfigValidation({"--set": f"expected section.key=value, got {assignment!r}"})
    path, value = assignment.split("=", 1)
    try:
        parsed = tomllib.loads(f"v = {value.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value.strip()
    keys = path.strip().split(".")
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigValidation({path: "cannot override inside a non-table value"})
    node[keys[-1]] = parsed
