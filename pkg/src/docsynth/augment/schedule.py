"""Augmentation schedule: what fires, how often, and with which ranges."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, is_dataclass
from typing import Any


class ScheduleError(ValueError):
    pass


def _check_p(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ScheduleError(f"{name}.p must be in [0, 1], got {p}")


@dataclass
class BrightnessContrast:
    limit: float = 0.1
    p: float = 0.2


@dataclass
class Blur:
    limit: int = 3  # fixed 3x3 Gaussian kernel
    p: float = 0.1


@dataclass
class GaussNoise:
    p: float = 0.3
    sigma_range: tuple[float, float] = (5.0, 25.0)


@dataclass
class Phase1Config:
    brightness_contrast: BrightnessContrast = field(default_factory=BrightnessContrast)
    blur: Blur = field(default_factory=Blur)
    gauss_noise: GaussNoise = field(default_factory=GaussNoise)


@dataclass
class RotateSmall:
    deg: float = 10.0
    p: float = 0.2


@dataclass
class Rotate90:
    p: float = 0.01


@dataclass
class Scale:
    range: tuple[float, float] = (-0.5, 0.2)
    p: float = 0.7


@dataclass
class Crop:
    size: int = 448


@dataclass
class ShiftScaleRotate:
    rot: float = 10.0
    shift: float = 0.0625
    scale: float = 0.1
    p: float = 0.1


@dataclass
class GridWarp:
    grid: int = 4
    magnitude: float = 5.0
    p: float = 0.0


@dataclass
class Phase2Config:
    rotate_small: RotateSmall = field(default_factory=RotateSmall)
    rotate_plus90: Rotate90 = field(default_factory=Rotate90)
    rotate_minus90: Rotate90 = field(default_factory=Rotate90)
    scale: Scale = field(default_factory=Scale)
    crop: Crop = field(default_factory=Crop)
    shift_scale_rotate: ShiftScaleRotate = field(default_factory=ShiftScaleRotate)
    grid_warp: GridWarp = field(default_factory=GridWarp)


@dataclass
class EffectConfig:
    name: str
    p: float = 1.0
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class AugScheduleConfig:
    phase1: Phase1Config = field(default_factory=Phase1Config)
    phase2: Phase2Config = field(default_factory=Phase2Config)
    degrade: list[EffectConfig] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for group in (self.phase1, self.phase2):
            for f in fields(group):
                op = getattr(group, f.name)
                if hasattr(op, "p"):
                    _check_p(f.name, op.p)
        lo, hi = self.phase1.gauss_noise.sigma_range
        if not 0 <= lo <= hi:
            raise ScheduleError(f"gauss_noise.sigma_range must satisfy 0 <= lo <= hi, got {(lo, hi)}")
        lo, hi = self.phase2.scale.range
        if not -1 < lo <= hi:
            raise ScheduleError(f"scale.range must satisfy -1 < lo <= hi, got {(lo, hi)}")
        if self.phase2.crop.size <= 0:
            raise ScheduleError("crop.size must be positive")
        if self.phase2.grid_warp.grid < 2:
            raise ScheduleError("grid_warp.grid must be at least 2")
        from .degrade import EFFECTS

        for eff in self.degrade:
            _check_p(eff.name, eff.p)
            if eff.name not in EFFECTS:
                raise ScheduleError(f"unknown degradation effect {eff.name!r}; known: {sorted(EFFECTS)}")

    @classmethod
    def disabled(cls) -> "AugScheduleConfig":
        """Every probability set to zero; the crop still applies."""
        cfg = cls()
        for group in (cfg.phase1, cfg.phase2):
            for f in fields(group):
                op = getattr(group, f.name)
                if hasattr(op, "p"):
                    op.p = 0.0
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any] | None) -> "AugScheduleConfig":
        data = dict(data or {})
        unknown = set(data) - {"phase1", "phase2", "degrade"}
        if unknown:
            raise ScheduleError(f"unknown schedule keys {sorted(unknown)}")
        cfg = cls.__new__(cls)
        cfg.phase1 = _merge(Phase1Config(), data.get("phase1") or {}, "phase1")
        cfg.phase2 = _merge(Phase2Config(), data.get("phase2") or {}, "phase2")
        cfg.degrade = [
            EffectConfig(name=e["name"], p=float(e.get("p", 1.0)), params=dict(e.get("params") or {}))
            for e in (data.get("degrade") or [])
        ]
        cfg.validate()
        return cfg


def _merge(obj, overrides: dict[str, Any], path: str):
    names = {f.name: f for f in fields(obj)}
    for key, value in overrides.items():
        if key not in names:
            raise ScheduleError(f"unknown key {path}.{key}")
        current = getattr(obj, key)
        if is_dataclass(current):
            if not isinstance(value, dict):
                raise ScheduleError(f"{path}.{key} must be a mapping")
            _merge(current, value, f"{path}.{key}")
        elif isinstance(current, tuple):
            if len(value) != len(current):
                raise ScheduleError(f"{path}.{key} needs {len(current)} values")
            setattr(obj, key, tuple(float(v) for v in value))
        elif isinstance(current, int) and not isinstance(current, bool) and key in ("size", "grid", "limit"):
            setattr(obj, key, int(value))
        else:
            setattr(obj, key, float(value))
    return obj
