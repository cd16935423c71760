"""Multiplicative layer compositing and threshold ground-truth extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import ndimage

from .raster import BACKGROUND, DEFAULT_CLASSES, LabelStack, Layer, Raster, RasterError, max_intensity

DEFAULT_TAU = 128


class CompositeError(ValueError):
    pass


@dataclass(frozen=True)
class CompositeConfig:
    tau: int = DEFAULT_TAU
    canvas: tuple[int, int] = (768, 768)  # (width, height)
    classes: tuple[str, ...] = DEFAULT_CLASSES

    def __post_init__(self):
        if not 0 <= self.tau <= 255:
            raise CompositeError(f"tau must be in [0, 255], got {self.tau}")
        if self.canvas[0] <= 0 or self.canvas[1] <= 0:
            raise CompositeError(f"canvas dimensions must be positive, got {self.canvas}")
        object.__setattr__(self, "classes", tuple(self.classes))


@dataclass(frozen=True)
class Sample:
    image: Raster
    labels: LabelStack
    manifest: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.image.shape != self.labels.shape:
            raise CompositeError(f"image {self.image.shape} and labels {self.labels.shape} differ in size")


def composite_layer(base: Raster, layer: Raster) -> Raster:
    """Darken ``base`` by ``layer`` normalised to [0, 1] by its own maximum."""
    if base.channels != 1 or layer.channels != 1:
        raise CompositeError("compositing works on single-channel rasters")
    if base.shape != layer.shape:
        raise CompositeError(f"base {base.shape} and layer {layer.shape} differ in size")
    peak = max_intensity(layer)
    if peak == 0:
        raise CompositeError("layer is entirely black; intensity normalisation is undefined")
    # exact integer form of round_half_up(base * layer / peak)
    num = base.data.astype(np.int64) * layer.data.astype(np.int64)
    out = (2 * num + peak) // (2 * peak)
    return Raster(out.astype(np.uint8))


def composite_layers(base: Raster, layers: Sequence[Raster]) -> Raster:
    """Composite several layers at once, rounding only at the end.

    Rounding after every layer would make the result depend on layer order;
    the exact product does not. With one layer this equals ``composite_layer``.
    """
    if not layers:
        return base
    if len(layers) == 1:
        return composite_layer(base, layers[0])
    if len(layers) > 6:
        # 255**7 is the largest product that stays inside int64
        head = composite_layers(base, layers[:6])
        return composite_layers(head, layers[6:])
    num = base.data.astype(np.int64)
    den = 1
    for layer in layers:
        if layer.channels != 1 or base.channels != 1:
            raise CompositeError("compositing works on single-channel rasters")
        if layer.shape != base.shape:
            raise CompositeError(f"base {base.shape} and layer {layer.shape} differ in size")
        peak = max_intensity(layer)
        if peak == 0:
            raise CompositeError("layer is entirely black; intensity normalisation is undefined")
        num = num * layer.data.astype(np.int64)
        den *= peak
    return Raster(((2 * num + den) // (2 * den)).astype(np.uint8))


def extract_label(layer: Raster, tau: int, region: np.ndarray | None = None) -> np.ndarray:
    """1 where the layer is strictly darker than ``tau`` and inside ``region``."""
    if not 0 <= tau <= 255:
        raise CompositeError(f"tau must be in [0, 255], got {tau}")
    plane = layer.data < tau
    if region is not None:
        region = np.asarray(region)
        if region.shape != layer.shape:
            raise CompositeError(f"region {region.shape} and layer {layer.shape} differ in size")
        plane &= region != 0
    return plane.astype(np.uint8)


def paste_at(canvas: Raster, patch: Raster, x: int, y: int) -> Raster:
    """Place ``patch`` with its top-left corner at (x, y); ink accumulates via pointwise min."""
    ph, pw = patch.shape
    ch, cw = canvas.shape
    if x < 0 or y < 0 or x + pw > cw or y + ph > ch:
        raise CompositeError(f"patch {pw}x{ph} at ({x}, {y}) falls outside canvas {cw}x{ch}")
    out = canvas.data.copy()
    np.minimum(out[y : y + ph, x : x + pw], patch.data, out=out[y : y + ph, x : x + pw])
    return Raster(out)


def document_region(bg: Raster, level: int = 60, smooth: int = 5) -> np.ndarray:
    """Heuristic page mask: bright pixels after median smoothing, largest component, holes filled."""
    gray = bg.data if bg.channels == 1 else bg.data.mean(axis=2).astype(np.uint8)
    bright = ndimage.median_filter(gray, size=smooth, mode="nearest") >= level
    labels, n = ndimage.label(bright, structure=np.ones((3, 3)))
    if n == 0:
        return np.zeros(gray.shape, dtype=np.uint8)
    sizes = np.bincount(labels.ravel())[1:]
    largest = labels == (int(np.argmax(sizes)) + 1)
    return ndimage.binary_fill_holes(largest).astype(np.uint8)


def assemble_sample(bg: Layer, layers: Sequence[Layer], cfg: CompositeConfig) -> Sample:
    """Fold every class layer onto the background and label each from its own ink."""
    if bg.cls != BACKGROUND:
        raise CompositeError(f"first layer must be background, got {bg.cls!r}")
    width, height = cfg.canvas
    if bg.image.shape != (height, width):
        raise CompositeError(f"background {bg.image.shape} does not match canvas {(height, width)}")
    seen = set()
    for layer in layers:
        if layer.cls in seen:
            raise CompositeError(f"duplicate {layer.cls!r} layer")
        if layer.cls not in cfg.classes:
            raise CompositeError(f"layer class {layer.cls!r} not in {cfg.classes}")
        if layer.image.shape != bg.image.shape:
            raise CompositeError(f"{layer.cls} layer {layer.image.shape} does not match canvas")
        seen.add(layer.cls)

    image = composite_layers(bg.image, [layer.image for layer in layers])

    planes = np.zeros((len(cfg.classes), height, width), dtype=np.uint8)
    for layer in layers:
        planes[cfg.classes.index(layer.cls)] = extract_label(layer.image, cfg.tau, bg.region)
    try:
        labels = LabelStack(cfg.classes, planes)
    except RasterError as exc:
        raise CompositeError(str(exc)) from exc
    return Sample(image, labels)
