"""Run configuration documents and the named reference presets.

A configuration is a JSON object::

    {
      "model":        {"m": 1, "D": 1, "K": 6, "Omega1": 0},
      "grid":         {"target_d_t": 0.02, "T": 10, "d_omega": 0.2, "G_omega": 4,
                       "d_Omega": 0},
      "distribution": {"kind": "point", "at": 0},
      "initial":      {"preset": "paper-default"},
      "output":       {"series": "series.csv", "snapshot_every": 0,
                       "snapshot_prefix": null},
      "mode":         {"deterministic": true, "unsafe_grid": false},
      "langevin":     {"N": 5000, "seed": 0, "dt": null},
      "sweep":        {"param": "K", "values": [1, 2, 4, 6]},
      "label":        "run"
    }

Only ``model`` and ``grid`` (with ``target_d_t`` and ``T``) are required.
``d_omega``/``G_omega`` set to null ask for a reconstructed grid
(`model.reconstruct_grid`). A document may instead name ``"preset"``; its
remaining keys override the preset.
"""
from __future__ import annotations

import copy
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from .kernel import GaussianDatum
from .model import (ModelParams, StabilityError, ValidationError, build_frequency_distribution,
                    build_grid, reconstruct_grid, validate_stability)
from .solver import INITIAL_PRESETS

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridConfig:
    target_d_t: float
    T: float
    d_omega: float | None = None
    G_omega: float | None = None
    d_Omega: float = 0.0

    @property
    def reconstructed(self) -> bool:
        return self.d_omega is None


@dataclass(frozen=True)
class OutputConfig:
    series: str | None = None
    snapshot_every: int = 0
    snapshot_prefix: str | None = None


@dataclass(frozen=True)
class LangevinConfig:
    N: int = 5000
    seed: int = 0
    dt: float | None = None


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    grid: GridConfig
    distribution: dict = field(default_factory=lambda: {"kind": "point", "at": 0.0})
    initial: dict = field(default_factory=lambda: {"preset": "paper-default"})
    output: OutputConfig = field(default_factory=OutputConfig)
    deterministic: bool = True
    unsafe_grid: bool = False
    langevin: LangevinConfig = field(default_factory=LangevinConfig)
    sweep: dict | None = None
    label: str = "run"

    @property
    def snapshot_every(self) -> int:
        return self.output.snapshot_every

    def to_dict(self) -> dict:
        return {
            "model": asdict(self.model),
            "grid": asdict(self.grid),
            "distribution": copy.deepcopy(self.distribution),
            "initial": copy.deepcopy(self.initial),
            "output": asdict(self.output),
            "mode": {"deterministic": self.deterministic, "unsafe_grid": self.unsafe_grid},
            "langevin": asdict(self.langevin),
            "sweep": copy.deepcopy(self.sweep),
            "label": self.label,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def expand(self) -> list["RunConfig"]:
        """One concrete config per sweep value (or ``[self]`` without a sweep)."""
        if not self.sweep:
            return [self]
        param, values = self.sweep["param"], self.sweep["values"]
        out = []
        for v in values:
            if param in ("m", "D", "K", "Omega1"):
                cfg = replace(self, model=replace(self.model, **{param: float(v)}))
            elif param == "initial":
                cfg = replace(self, initial={"preset": v} if isinstance(v, str) else dict(v))
            else:
                raise ValidationError(f"cannot sweep over {param!r}")
            label = f"{self.label}_{param}={v if isinstance(v, str) else format(v, 'g')}"
            out.append(replace(cfg, sweep=None, label=label))
        return out


# ---------------------------------------------------------------------------
# parsing

_SCHEMA = {
    "model": {"m", "D", "K", "Omega1"},
    "grid": {"target_d_t", "T", "d_omega", "G_omega", "d_Omega"},
    "output": {"series", "snapshot_every", "snapshot_prefix"},
    "mode": {"deterministic", "unsafe_grid"},
    "langevin": {"N", "seed", "dt"},
    "distribution": None,
    "initial": None,
    "sweep": {"param", "values"},
    "label": None,
    "preset": None,
}


def _number(section, key, value, *, optional=False, integer=False):
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{section}.{key} must be a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ValidationError(f"{section}.{key} must be an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ValidationError(f"{section}.{key} must be finite")
    return float(value)


def _flag(section, key, value):
    if not isinstance(value, bool):
        raise ValidationError(f"{section}.{key} must be true or false, got {value!r}")
    return value


def _check_keys(doc: dict, lenient: bool):
    for key, value in doc.items():
        if key not in _SCHEMA:
            _unknown(key, lenient)
            continue
        allowed = _SCHEMA[key]
        if allowed is None or value is None:
            continue
        if not isinstance(value, dict):
            raise ValidationError(f"{key} must be an object")
        for sub in value:
            if sub not in allowed:
                _unknown(f"{key}.{sub}", lenient)


def _unknown(key, lenient):
    if lenient:
        log.warning("ignoring unknown configuration key %r", key)
    else:
        raise ValidationError(f"unknown configuration key {key!r}")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("distribution", "initial"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def config_from_dict(doc: dict, lenient: bool = False) -> RunConfig:
    if not isinstance(doc, dict):
        raise ValidationError("configuration must be a JSON object")
    doc = copy.deepcopy(doc)
    if "preset" in doc:
        name = doc.pop("preset")
        doc = _merge(preset_document(name), doc)
    _check_keys(doc, lenient)
    for req in ("model", "grid"):
        if req not in doc:
            raise ValidationError(f"missing required key {req!r}")

    m = doc["model"]
    model = ModelParams(
        m=_number("model", "m", m.get("m", 1.0)),
        D=_number("model", "D", m.get("D", 1.0)),
        K=_number("model", "K", m.get("K", 0.0)),
        Omega1=_number("model", "Omega1", m.get("Omega1", 0.0)),
    )
    g = doc["grid"]
    for req in ("target_d_t", "T"):
        if req not in g:
            raise ValidationError(f"missing required key 'grid.{req}'")
    grid = GridConfig(
        target_d_t=_number("grid", "target_d_t", g["target_d_t"]),
        T=_number("grid", "T", g["T"]),
        d_omega=_number("grid", "d_omega", g.get("d_omega"), optional=True),
        G_omega=_number("grid", "G_omega", g.get("G_omega"), optional=True),
        d_Omega=_number("grid", "d_Omega", g.get("d_Omega", 0.0)),
    )
    if grid.target_d_t <= 0 or grid.T <= 0 or grid.d_Omega < 0:
        raise ValidationError("grid.target_d_t and grid.T must be positive")
    if grid.d_omega is not None and grid.d_omega <= 0:
        raise ValidationError("grid.d_omega must be positive")
    if grid.G_omega is not None and grid.G_omega <= 0:
        raise ValidationError("grid.G_omega must be positive")
    if (grid.d_omega is None) != (grid.G_omega is None) and grid.d_omega is not None:
        raise ValidationError("grid.d_omega needs grid.G_omega")

    o = doc.get("output") or {}
    output = OutputConfig(
        series=o.get("series"),
        snapshot_every=_number("output", "snapshot_every", o.get("snapshot_every", 0), integer=True),
        snapshot_prefix=o.get("snapshot_prefix"),
    )
    if output.snapshot_every < 0:
        raise ValidationError("output.snapshot_every must be nonnegative")
    mode = doc.get("mode") or {}
    lg = doc.get("langevin") or {}
    langevin = LangevinConfig(
        N=_number("langevin", "N", lg.get("N", 5000), integer=True),
        seed=_number("langevin", "seed", lg.get("seed", 0), integer=True),
        dt=_number("langevin", "dt", lg.get("dt"), optional=True),
    )
    if langevin.N < 1:
        raise ValidationError("langevin.N must be at least 1")

    distribution = doc.get("distribution") or {"kind": "point", "at": 0.0}
    initial = doc.get("initial") or {"preset": "paper-default"}
    if not isinstance(distribution, dict) or not isinstance(initial, dict):
        raise ValidationError("distribution and initial must be objects")
    preset = initial.get("preset")
    if preset != "gaussian" and preset not in INITIAL_PRESETS:
        raise ValidationError(f"unknown initial preset {preset!r}; available: "
                              f"{sorted(INITIAL_PRESETS) + ['gaussian']}")

    sweep = doc.get("sweep")
    if sweep is not None:
        if "param" not in sweep or "values" not in sweep or not isinstance(sweep["values"], list):
            raise ValidationError("sweep needs 'param' and a list of 'values'")

    cfg = RunConfig(
        model=model, grid=grid, distribution=distribution, initial=initial, output=output,
        deterministic=_flag("mode", "deterministic", mode.get("deterministic", True)),
        unsafe_grid=_flag("mode", "unsafe_grid", mode.get("unsafe_grid", False)),
        langevin=langevin, sweep=sweep, label=str(doc.get("label", "run")),
    )
    for concrete in cfg.expand():
        if not concrete.unsafe_grid and not concrete.grid.reconstructed:
            report = validate_stability(concrete.model, _grid_for(concrete))
            if not report.overall_ok:
                raise StabilityError(f"{concrete.label}: grid violates the stability "
                                     "conditions:\n" + report.describe())
    return cfg


def parse_config(text: str, lenient: bool = False) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"configuration is not valid JSON: {exc}") from exc
    return config_from_dict(doc, lenient=lenient)


def _grid_for(config: RunConfig, unsafe: bool = True):
    gc = config.grid
    if gc.reconstructed:
        return reconstruct_grid(config.model, gc.target_d_t, gc.T,
                                G_pref=gc.G_omega or 4.0, d_Omega=gc.d_Omega)
    return build_grid(config.model, gc.d_omega, gc.target_d_t, gc.G_omega, gc.T,
                      gc.d_Omega, unsafe=unsafe)


def initial_evaluator(initial: dict):
    preset = initial.get("preset", "paper-default")
    if preset == "gaussian":
        return GaussianDatum(tuple(initial["mean"]), tuple(map(tuple, initial["cov"])))
    return preset


def materialize(config: RunConfig):
    """Return ``(params, grid, distribution, initial)`` for a concrete config."""
    if config.sweep:
        raise ValidationError("expand the sweep before running a configuration")
    grid = _grid_for(config, unsafe=config.unsafe_grid)
    g = build_frequency_distribution(config.distribution, grid)
    return config.model, grid, g, initial_evaluator(config.initial)


# ---------------------------------------------------------------------------
# reference presets. Their m, D, K, T and d_t values are fixed; d_omega,
# G_omega and the sweep values are reconstructions and may be overridden.

def _preset(model, d_t, sweep, label, initial="paper-default"):
    return {
        "model": dict(model, Omega1=0.0),
        "grid": {"target_d_t": d_t, "T": 10.0, "d_omega": None, "G_omega": None, "d_Omega": 0.0},
        "distribution": {"kind": "point", "at": 0.0},
        "initial": {"preset": initial},
        "sweep": sweep,
        "label": label,
    }


PRESETS = {
    "fig1": _preset({"m": 1.0, "D": 1.0, "K": 1.0}, 0.0317,
                    {"param": "K", "values": [1.0, 2.0, 4.0, 6.0]}, "fig1"),
    "fig2": _preset({"m": 1.0, "D": 1.0, "K": 1.0}, 0.0317,
                    {"param": "K", "values": [1.0, 2.0, 4.0, 6.0]}, "fig2"),
    "fig3": _preset({"m": 1.0, "D": 1.0, "K": 6.0}, 0.0079,
                    {"param": "m", "values": [0.5, 1.0, 2.0]}, "fig3"),
    "fig4": _preset({"m": 1.0, "D": 1.0, "K": 6.0}, 0.0079,
                    {"param": "m", "values": [0.5, 1.0, 2.0]}, "fig4"),
    "fig5": _preset({"m": 1.0, "D": 1.0, "K": 6.0}, 0.0317,
                    {"param": "D", "values": [2.0, 1.0, 0.5]}, "fig5"),
    "fig6": _preset({"m": 1.0, "D": 1.0, "K": 6.0}, 0.0317,
                    {"param": "D", "values": [2.0, 1.0, 0.5]}, "fig6"),
    "fig78": _preset({"m": 1.0, "D": 1.0, "K": 4.0}, 0.053,
                     {"param": "initial", "values": ["paper-half-sine", "paper-default"]},
                     "fig78"),
}


def preset_document(name: str) -> dict:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return copy.deepcopy(PRESETS[name])


def apply_override(doc: dict, assignment: str) -> dict:
    """Apply ``section.key=value`` (value parsed as JSON when possible)."""
    if "=" not in assignment:
        raise ValidationError(f"override {assignment!r} is not of the form key=value")
    path, raw = assignment.split("=", 1)
    try:
        value: Any = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = path.strip().split(".")
    node = doc
    for k in keys[:-1]:
        if node.get(k) is None:
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value
    return doc


def run_preset(name: str, overrides: list[str] | tuple = ()) -> list[RunConfig]:
    """Expand a named preset into one concrete config per sweep value."""
    doc = preset_document(name)
    for o in overrides:
        apply_override(doc, o)
    return config_from_dict(doc).expand()
