"""Experiment configuration: one JSON document per experiment.

Example::

    {
      "n": 3,
      "m": 256,
      "shape": {"variant": "perturbed_sphere", "r": 1.0, "eps": 0.05, "l": 2},
      "flow": {"kind": "imcf", "t_end": 8.0, "cfl": 0.2, "record_every": 0.1},
      "tolerances": {"identity": 1e-7}
    }

Unknown keys are rejected at every level.
"""

import json
import os
from dataclasses import dataclass, field, replace
from typing import Optional

from .flows import FlowKind, FlowSpec
from .shapes import ShapeError, ShapeSpec


class ConfigError(ValueError):
    pass


DEFAULT_TOLERANCES = {
    # statics
    "identity": 1e-7,        # Minkowski residuals, relative to A (and A max H)
    "af": 1e-8,              # af_margin >= -af
    "equality": 1e-8,        # relative L error on centred spheres
    "hk": 1e-7,              # Heintze-Karcher deficit >= -hk A
    # flows
    "monotone": 1e-8,        # per-step audit slack
    "flow_hk": 1e-7,
    "area_law": 1e-6,
    "sphere_oracle": 1e-6,
    "extinction": 1e-4,
    "L_lower": 1e-3,
    # mass
    "horizon": 1e-12,
    "mass_formula": 1e-8,
    "mass_functional": 1e-6,
    "cross_oracle": 1e-3,
    "penrose": 1e-6,
    # convergence
    "roundoff": 1e-11,       # differences below this (relative) count as converged
}

# not scaled by --tolerance-scale: these are targets, not slacks
ORDER_KEYS = ("min_order",)
DEFAULT_ORDERS = {"min_order": 1.9}


def _reject_unknown(data, allowed, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class PenroseSpec:
    mass: float
    family: str = "adss"
    eps: float = 0.0
    gain: float = 0.0
    width: float = 1.0
    r_max: float = 60.0
    nodes: int = 400
    r_samples: tuple = (6.0, 8.0, 10.0, 12.0)

    FAMILIES = ("adss", "perturbed", "accretion")

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError(f"penrose.mass must be positive, got {self.mass}")
        if self.family not in self.FAMILIES:
            raise ConfigError(f"penrose.family must be one of {self.FAMILIES}")
        if self.nodes < 4:
            raise ConfigError("penrose.nodes must be >= 4")
        object.__setattr__(self, "r_samples", tuple(float(x) for x in self.r_samples))


@dataclass(frozen=True)
class ConvergenceSpec:
    experiment: str
    levels: int = 3

    def __post_init__(self):
        if self.experiment not in ("statics", "flow"):
            raise ConfigError("convergence.experiment must be 'statics' or 'flow'")
        if int(self.levels) != self.levels or self.levels < 3:
            raise ConfigError("convergence needs at least 3 resolution levels (m, 2m, 4m)")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    m: int
    shape: Optional[ShapeSpec] = None
    flow: Optional[FlowSpec] = None
    penrose: Optional[PenroseSpec] = None
    convergence: Optional[ConvergenceSpec] = None
    out: Optional[str] = None
    name: str = "experiment"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES, **DEFAULT_ORDERS))

    def scaled(self, factor: float) -> "ExperimentConfig":
        if not factor > 0:
            raise ConfigError("tolerance scale must be positive")
        tol = {k: (v if k in ORDER_KEYS else v * factor) for k, v in self.tolerances.items()}
        flow = self.flow
        if flow is not None:
            flow = replace(flow, tol_monotone=tol["monotone"], tol_hk=tol["flow_hk"])
        return replace(self, tolerances=tol, flow=flow)


_TOP = ("n", "m", "shape", "flow", "penrose", "convergence", "out", "name", "tolerances")
_FLOW = ("kind", "t_end", "cfl", "record_every", "max_halvings", "extinction_density")
_PENROSE = ("mass", "family", "eps", "gain", "width", "r_max", "nodes", "r_samples")
_CONV = ("experiment", "levels")


def parse_config(data: dict, name: str = "experiment") -> ExperimentConfig:
    _reject_unknown(data, _TOP, "config")
    try:
        n = int(data["n"])
    except KeyError:
        raise ConfigError("config needs the dimension 'n'") from None
    if n != data["n"] or n < 3:
        raise ConfigError(f"n must be an integer >= 3, got {data['n']!r}")
    m = data.get("m", 256)
    if int(m) != m or m < 16:
        raise ConfigError(f"m must be an integer >= 16, got {m!r}")

    tol = dict(DEFAULT_TOLERANCES, **DEFAULT_ORDERS)
    over = data.get("tolerances", {})
    _reject_unknown(over, tol, "tolerances")
    for k, v in over.items():
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerance {k} must be a positive number")
    tol.update({k: float(v) for k, v in over.items()})

    shape = None
    if "shape" in data:
        try:
            shape = ShapeSpec.from_dict(data["shape"])
        except (ShapeError, TypeError) as exc:
            raise ConfigError(f"invalid shape: {exc}") from None

    flow = None
    if "flow" in data:
        fd = data["flow"]
        _reject_unknown(fd, _FLOW, "flow")
        try:
            flow = FlowSpec(**dict(fd, kind=FlowKind(fd.get("kind"))),
                            tol_monotone=tol["monotone"], tol_hk=tol["flow_hk"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid flow: {exc}") from None

    penrose = None
    if "penrose" in data:
        _reject_unknown(data["penrose"], _PENROSE, "penrose")
        try:
            penrose = PenroseSpec(**data["penrose"])
        except TypeError as exc:
            raise ConfigError(f"invalid penrose section: {exc}") from None

    conv = None
    if "convergence" in data:
        _reject_unknown(data["convergence"], _CONV, "convergence")
        try:
            conv = ConvergenceSpec(**data["convergence"])
        except TypeError as exc:
            raise ConfigError(f"invalid convergence section: {exc}") from None

    return ExperimentConfig(n=n, m=int(m), shape=shape, flow=flow, penrose=penrose,
                            convergence=conv, out=data.get("out"),
                            name=str(data.get("name", name)), tolerances=tol)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    stem = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_config(data, name=stem)
