"""Run configuration: one JSON document per analysis run.

Example::

    {
      "potential": {"type": "homogeneous", "k": 1.0, "alpha": 4.0},
      "window": {"r_lo": 0.3, "r_hi": 3.0},
      "grids": {"window_validation": 256, "scan": 400,
                "actionmap_I1": [0.1, 0.5, 5], "actionmap_I2": [1.5, 2.5, 5]},
      "expand": {"I2": 2.0},
      "dynamics": {"perturbation": {"type": "linear"}, "epsilons": [1e-2, 1e-3],
                   "initial_actions": [0.3, 2.0], "periods": 1e4}
    }

Omitted blocks take their defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .dynamics import perturbation_from_record
from .errors import ConfigError
from .potentials import from_record


@dataclass(frozen=True)
class WindowConfig:
    r_lo: float
    r_hi: float


@dataclass(frozen=True)
class GridConfig:
    window_validation: int = 256
    scan: int = 400
    actionmap_I1: tuple = (0.1, 1.0, 10)
    actionmap_I2: tuple = (0.8, 1.5, 10)


@dataclass(frozen=True)
class ToleranceConfig:
    root: float = 1e-12
    quadrature: float = 1e-11
    residual: float = 1e-9
    quasiconvexity: float = 1e-7


@dataclass(frozen=True)
class ExpandConfig:
    I2: float | None = None
    cross_check: bool = True


@dataclass(frozen=True)
class DynamicsConfig:
    perturbation: dict = field(default_factory=lambda: {"type": "linear"})
    epsilons: tuple = (1e-2, 1e-3, 1e-4)
    initial_actions: tuple | None = None
    periods: float = 1e4
    steps_per_period: int = 200
    sample_stride: int = 1000
    rho: float = 0.05
    rotation_seed: int | None = None
    workers: int = 1
    write_trajectories: bool = False


@dataclass(frozen=True)
class RunConfig:
    potential: dict
    window: WindowConfig
    grids: GridConfig = GridConfig()
    tolerances: ToleranceConfig = ToleranceConfig()
    expand: ExpandConfig = ExpandConfig()
    dynamics: DynamicsConfig = DynamicsConfig()
    output_dir: str = "out"

    def build_potential(self):
        return from_record(self.potential)

    def build_perturbation(self):
        return perturbation_from_record(self.dynamics.perturbation)

    def to_dict(self):
        return _plain(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        _reject_unknown(cls, data, "config")
        if "potential" not in data or "window" not in data:
            raise ConfigError("config needs 'potential' and 'window'")
        cfg = cls(
            potential=dict(data["potential"]),
            window=_section(WindowConfig, data["window"], "window"),
            grids=_section(GridConfig, data.get("grids", {}), "grids"),
            tolerances=_section(ToleranceConfig, data.get("tolerances", {}), "tolerances"),
            expand=_section(ExpandConfig, data.get("expand", {}), "expand"),
            dynamics=_section(DynamicsConfig, data.get("dynamics", {}), "dynamics"),
            output_dir=str(data.get("output_dir", "out")),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def validate(self):
        self.build_potential()
        self.build_perturbation()
        w = self.window
        if not (0 < w.r_lo < w.r_hi and math.isfinite(w.r_hi)):
            raise ConfigError(f"window needs 0 < r_lo < r_hi, got ({w.r_lo}, {w.r_hi})")
        for name, value in asdict(self.tolerances).items():
            if not value > 0:
                raise ConfigError(f"tolerance {name!r} must be positive")
        g = self.grids
        if g.window_validation < 2 or g.scan < 2:
            raise ConfigError("grid sizes must be >= 2")
        for name in ("actionmap_I1", "actionmap_I2"):
            triple = getattr(g, name)
            if len(triple) != 3 or int(triple[2]) < 1 or triple[0] > triple[1]:
                raise ConfigError(f"grids.{name} must be [lo, hi, n] with lo <= hi, n >= 1")
        d = self.dynamics
        eps = list(d.epsilons)
        if any(not e > 0 for e in eps) or len(set(eps)) != len(eps):
            raise ConfigError("dynamics.epsilons must be positive and distinct")
        if d.initial_actions is not None and len(d.initial_actions) != 2:
            raise ConfigError("dynamics.initial_actions must be [I1, I2]")
        if not (d.periods > 0 and d.steps_per_period > 0 and d.sample_stride > 0 and d.rho >= 0):
            raise ConfigError("dynamics: periods, steps_per_period, sample_stride must be "
                              "positive and rho non-negative")


_TUPLE_FIELDS = {"actionmap_I1", "actionmap_I2", "epsilons", "initial_actions"}
_INT_FIELDS = {"window_validation", "scan", "steps_per_period", "sample_stride", "workers"}


def _reject_unknown(cls, data, where):
    names = {f.name for f in fields(cls)}
    extra = set(data) - names
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def _section(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    _reject_unknown(cls, data, where)
    kwargs = {}
    for key, value in data.items():
        if key in _TUPLE_FIELDS and value is not None:
            value = tuple(value)
        elif key in _INT_FIELDS:
            value = int(value)
        elif isinstance(value, int) and not isinstance(value, bool) and key not in {"rotation_seed"}:
            value = float(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj
