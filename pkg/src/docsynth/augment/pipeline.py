"""Two-phase augmentation with a replayable log.

Draw order is fixed per op: one uniform draw decides whether the op fires,
then (only if it fired) its parameters are drawn in the order listed in
each ``_sample_*`` helper. A log records every decision and parameter, so
:func:`replay` reproduces a run without touching the stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from ..raster import LabelStack, Raster
from ..rng import RngStream
from . import geometry as geo
from . import photometric as photo
from .degrade import get_effect
from .schedule import AugScheduleConfig, EffectConfig


@dataclass
class LogEntry:
    op: str
    fired: bool
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"op": self.op, "fired": self.fired, "params": self.params}


@dataclass
class AugmentationLog:
    entries: list[LogEntry] = field(default_factory=list)

    def add(self, op: str, fired: bool, params: dict[str, Any] | None = None) -> None:
        self.entries.append(LogEntry(op, fired, params or {}))

    def extend(self, other: "AugmentationLog") -> None:
        self.entries.extend(other.entries)

    def fired(self, op: str) -> bool:
        return any(e.fired for e in self.entries if e.op == op)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def to_list(self) -> list[dict[str, Any]]:
        return [e.to_dict() for e in self.entries]

    @classmethod
    def from_list(cls, items: Iterable[dict[str, Any]]) -> "AugmentationLog":
        return cls([LogEntry(i["op"], bool(i["fired"]), dict(i.get("params") or {})) for i in items])


# --- parameter application -------------------------------------------------
# Every op: (image array, label planes or None, params) -> (image, planes)


def _op_brightness_contrast(img, planes, p):
    return photo.brightness_contrast(img, p["alpha"], p["beta"]), planes


def _op_blur(img, planes, p):
    return photo.gaussian_blur3(img), planes


def _op_gauss_noise(img, planes, p):
    return photo.gauss_noise(img, p["sigma"], p["seed"]), planes


def _op_rotate_small(img, planes, p):
    return geo.rotate(img, planes, p["angle"])


def _op_rotate_plus90(img, planes, p):
    return geo.rotate90(img, planes, 1)


def _op_rotate_minus90(img, planes, p):
    return geo.rotate90(img, planes, -1)


def _op_scale(img, planes, p):
    return geo.scale(img, planes, p["factor"])


def _op_crop(img, planes, p):
    return geo.pad_crop(img, planes, p["size"], tuple(p["pad"]), p["x"], p["y"])


def _op_ssr(img, planes, p):
    return geo.shift_scale_rotate(img, planes, p["angle"], p["scale"], p["dx"], p["dy"])


def _op_grid_warp(img, planes, p):
    return geo.grid_warp(img, planes, p["grid"], np.asarray(p["offsets"]))


def _op_degrade(name):
    effect = get_effect(name)

    def apply(img, planes, p):
        return effect.apply(img, p), planes

    return apply


_OPS = {
    "brightness_contrast": _op_brightness_contrast,
    "blur": _op_blur,
    "gauss_noise": _op_gauss_noise,
    "rotate_small": _op_rotate_small,
    "rotate_plus90": _op_rotate_plus90,
    "rotate_minus90": _op_rotate_minus90,
    "scale": _op_scale,
    "crop": _op_crop,
    "shift_scale_rotate": _op_ssr,
    "grid_warp": _op_grid_warp,
}

PHASE1_OPS = ("brightness_contrast", "blur", "gauss_noise")
PHASE2_OPS = ("rotate_small", "rotate_plus90", "rotate_minus90", "scale", "crop", "shift_scale_rotate", "grid_warp")


def _lookup(op: str):
    if op in _OPS:
        return _OPS[op]
    if op.startswith("degrade:"):
        return _op_degrade(op.split(":", 1)[1])
    raise KeyError(f"unknown augmentation op {op!r}")


def _step(log: AugmentationLog, op: str, fired: bool, params, img, planes):
    log.add(op, fired, params if fired else None)
    if fired:
        return _lookup(op)(img, planes, params)
    return img, planes


# --- phases ------------------------------------------------------------------


def phase1(img: Raster, cfg: AugScheduleConfig, rng: RngStream) -> tuple[Raster, AugmentationLog]:
    """Photometric augmentations; labels are untouched by construction."""
    c = cfg.phase1
    log = AugmentationLog()
    arr = img.data

    fired = rng.fires(c.brightness_contrast.p)
    params = None
    if fired:
        lim = c.brightness_contrast.limit
        u = rng.uniform(-lim, lim)
        v = rng.uniform(-lim, lim)
        params = {"alpha": 1.0 + u, "beta": 255.0 * v}
    arr, _ = _step(log, "brightness_contrast", fired, params, arr, None)

    fired = rng.fires(c.blur.p)
    arr, _ = _step(log, "blur", fired, {"ksize": 3}, arr, None)

    fired = rng.fires(c.gauss_noise.p)
    params = None
    if fired:
        lo, hi = c.gauss_noise.sigma_range
        params = {"sigma": rng.uniform(lo, hi), "seed": rng.seed64()}
    arr, _ = _step(log, "gauss_noise", fired, params, arr, None)
    return Raster(arr), log


def phase2(
    img: Raster, labels: LabelStack, cfg: AugScheduleConfig, rng: RngStream
) -> tuple[Raster, LabelStack, AugmentationLog]:
    """Geometric augmentations applied with identical parameters to image and labels."""
    if img.shape != labels.shape:
        raise ValueError(f"image {img.shape} and labels {labels.shape} differ in size")
    c = cfg.phase2
    log = AugmentationLog()
    arr, planes = img.data, labels.planes

    fired = rng.fires(c.rotate_small.p)
    params = {"angle": rng.uniform(-c.rotate_small.deg, c.rotate_small.deg)} if fired else None
    arr, planes = _step(log, "rotate_small", fired, params, arr, planes)

    arr, planes = _step(log, "rotate_plus90", rng.fires(c.rotate_plus90.p), {}, arr, planes)
    arr, planes = _step(log, "rotate_minus90", rng.fires(c.rotate_minus90.p), {}, arr, planes)

    fired = rng.fires(c.scale.p)
    params = {"factor": 1.0 + rng.uniform(*c.scale.range)} if fired else None
    arr, planes = _step(log, "scale", fired, params, arr, planes)

    size = c.crop.size
    h, w = arr.shape[:2]
    pad = geo.crop_padding(h, w, size)
    ph, pw = h + pad[0] + pad[1], w + pad[2] + pad[3]
    x0 = rng.integers(0, pw - size + 1)
    y0 = rng.integers(0, ph - size + 1)
    arr, planes = _step(log, "crop", True, {"size": size, "pad": list(pad), "x": x0, "y": y0}, arr, planes)

    s = c.shift_scale_rotate
    fired = rng.fires(s.p)
    params = None
    if fired:
        params = {
            "angle": rng.uniform(-s.rot, s.rot),
            "scale": 1.0 + rng.uniform(-s.scale, s.scale),
            "dx": rng.uniform(-s.shift, s.shift),
            "dy": rng.uniform(-s.shift, s.shift),
        }
    arr, planes = _step(log, "shift_scale_rotate", fired, params, arr, planes)

    g = c.grid_warp
    fired = rng.fires(g.p)
    params = None
    if fired:
        offsets = [[rng.uniform(-g.magnitude, g.magnitude), rng.uniform(-g.magnitude, g.magnitude)] for _ in range(g.grid**2)]
        params = {"grid": g.grid, "offsets": offsets}
    arr, planes = _step(log, "grid_warp", fired, params, arr, planes)

    return Raster(arr), LabelStack(labels.classes, planes), log


def degrade(
    img: Raster, effects: Iterable[EffectConfig], rng: RngStream
) -> tuple[Raster, AugmentationLog]:
    """Apply document degradation effects in the given order."""
    log = AugmentationLog()
    arr = img.data
    for eff in effects:
        effect = get_effect(eff.name)
        fired = rng.fires(eff.p)
        params = effect.sample(rng, arr.shape[:2], eff.params) if fired else None
        arr, _ = _step(log, f"degrade:{eff.name}", fired, params, arr, None)
    return Raster(arr), log


def augment(
    img: Raster, labels: LabelStack, cfg: AugScheduleConfig, rng: RngStream
) -> tuple[Raster, LabelStack, AugmentationLog]:
    """degrade, then phase 1, then phase 2, drawing from one stream."""
    log = AugmentationLog()
    img, part = degrade(img, cfg.degrade, rng)
    log.extend(part)
    img, part = phase1(img, cfg, rng)
    log.extend(part)
    img, labels, part = phase2(img, labels, cfg, rng)
    log.extend(part)
    return img, labels, log


def replay(
    log: AugmentationLog, img: Raster, labels: LabelStack | None = None
) -> tuple[Raster, LabelStack | None]:
    """Re-apply a recorded run; no randomness is consumed."""
    arr = img.data
    planes = None if labels is None else labels.planes
    for entry in log:
        if entry.fired:
            arr, planes = _lookup(entry.op)(arr, planes, entry.params)
    return Raster(arr), (None if labels is None else LabelStack(labels.classes, planes))


_POINT_MAPS = {
    "rotate_small": lambda pts, shape, p: geo.rotate_points(pts, shape, p["angle"]),
    "rotate_plus90": lambda pts, shape, p: geo.rotate90_points(pts, shape, 1),
    "rotate_minus90": lambda pts, shape, p: geo.rotate90_points(pts, shape, -1),
    "scale": lambda pts, shape, p: geo.scale_points(pts, shape, p["factor"]),
    "crop": lambda pts, shape, p: geo.pad_crop_points(pts, shape, p["size"], p["pad"], p["x"], p["y"]),
    "shift_scale_rotate": lambda pts, shape, p: geo.shift_scale_rotate_points(
        pts, shape, p["angle"], p["scale"], p["dx"], p["dy"]
    ),
}


def map_points(log: AugmentationLog, points, shape: tuple[int, int]) -> tuple[np.ndarray, tuple[int, int]]:
    """Carry (x, y) points through the geometric steps of a log.

    Returns the mapped points and the final (height, width). Grid warps have
    no closed-form forward map and are rejected.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    for entry in log:
        if not entry.fired or entry.op in PHASE1_OPS or entry.op.startswith("degrade:"):
            continue
        if entry.op not in _POINT_MAPS:
            raise NotImplementedError(f"no forward point map for {entry.op}")
        pts, shape = _POINT_MAPS[entry.op](pts, shape, entry.params)
    return pts, tuple(shape)
