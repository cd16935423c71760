"""Procedural layer generators: form grids, multiscale noise backgrounds, and
simple stroke/text stand-ins for bootstrapping a corpus without source imagery."""

from __future__ import annotations

import math
import string
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .raster import Raster
from .rng import RngStream, derived_generator


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    cell_w: int = 64
    cell_h: int = 48
    line_width: int = 1
    line_intensity: int = 0
    include_checkboxes: bool = False
    checkbox_size: int = 12
    baseline_only: bool = False
    checkbox_prob: float = 0.15
    jitter: bool = False

    def __post_init__(self):
        if self.line_width < 1:
            raise SpecError("line_width must be at least 1")
        if self.cell_w < 2 * self.line_width or self.cell_h < 2 * self.line_width:
            raise SpecError("cells must be at least twice the line width")
        if not 0 <= self.line_intensity < 255:
            raise SpecError("line_intensity must be in [0, 255)")
        if self.checkbox_size < 3:
            raise SpecError("checkbox_size must be at least 3")
        if not 0.0 <= self.checkbox_prob <= 1.0:
            raise SpecError("checkbox_prob must be a probability")


@dataclass(frozen=True)
class NoiseSpec:
    octaves: int = 4
    base_scale: float = 4.0
    amplitude_decay: float = 0.5
    bias: float = 215.0
    contrast: float = 0.5

    def __post_init__(self):
        if self.octaves < 1:
            raise SpecError("octaves must be at least 1")
        if self.base_scale <= 0:
            raise SpecError("base_scale must be positive")
        if not 0.0 < self.amplitude_decay <= 1.0:
            raise SpecError("amplitude_decay must be in (0, 1]")
        if not 0.0 <= self.bias <= 255.0:
            raise SpecError("bias must be in [0, 255]")
        if self.contrast <= 0:
            raise SpecError("contrast must be positive")


def rule_positions(extent: int, pitch: int, line_width: int) -> list[int]:
    """Start offsets of rules every ``pitch`` pixels plus a closing rule at the far edge."""
    closing = max(extent - line_width, 0)
    positions = [p for p in range(0, extent, pitch) if p <= closing]
    if positions[-1] < closing:
        positions.append(closing)
    return positions


def gen_grid(spec: GridSpec, w: int, h: int, rng: RngStream | None = None) -> Raster:
    """White canvas with ruled cells, or baselines only, and optional hollow checkboxes."""
    if w <= 0 or h <= 0:
        raise SpecError("grid dimensions must be positive")
    if (spec.jitter or spec.include_checkboxes) and rng is None:
        raise SpecError("jitter and checkboxes need an rng")
    canvas = np.full((h, w), 255, dtype=np.uint8)
    lw, ink = spec.line_width, spec.line_intensity

    rows = rule_positions(h, spec.cell_h, lw)
    cols = [] if spec.baseline_only else rule_positions(w, spec.cell_w, lw)
    if spec.jitter:
        rows = [min(max(r + rng.integers(-1, 2), 0), h - lw) for r in rows]
        cols = [min(max(c + rng.integers(-1, 2), 0), w - lw) for c in cols]
    for r in rows:
        canvas[r : r + lw, :] = ink
    for c in cols:
        canvas[:, c : c + lw] = ink

    if spec.include_checkboxes:
        gap = 2 * lw
        size = spec.checkbox_size
        xs = cols if cols else list(range(0, w, spec.cell_w))
        for r in rows:
            for c in xs:
                if not rng.fires(spec.checkbox_prob):
                    continue
                x0, y0 = c + lw + gap, r + lw + gap
                if x0 + size > w or y0 + size > h:
                    continue
                canvas[y0 : y0 + lw, x0 : x0 + size] = ink
                canvas[y0 + size - lw : y0 + size, x0 : x0 + size] = ink
                canvas[y0 : y0 + size, x0 : x0 + lw] = ink
                canvas[y0 : y0 + size, x0 + size - lw : x0 + size] = ink
    return Raster(canvas)


def _upsample_bilinear(grid: np.ndarray, h: int, w: int) -> np.ndarray:
    gh, gw = grid.shape
    ys = np.clip((np.arange(h) + 0.5) * gh / h - 0.5, 0, gh - 1)
    xs = np.clip((np.arange(w) + 0.5) * gw / w - 0.5, 0, gw - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, gh - 1)
    x1 = np.minimum(x0 + 1, gw - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = grid[y0][:, x0] * (1 - fx) + grid[y0][:, x1] * fx
    bottom = grid[y1][:, x0] * (1 - fx) + grid[y1][:, x1] * fx
    return top * (1 - fy) + bottom * fy


def gen_multiscale_noise(spec: NoiseSpec, w: int, h: int, rng: RngStream) -> Raster:
    """Sum of upsampled uniform noise octaves, centred on ``bias``.

    Octave k is drawn at (w, h) / (base_scale * 2**k) and weighted by
    amplitude_decay**k. The sum is shifted to mean ``bias`` and scaled so its
    extreme deviation is ``64 * contrast``, then clamped to [0, 255].
    """
    if w <= 0 or h <= 0:
        raise SpecError("noise dimensions must be positive")
    gen = derived_generator(rng.seed64())
    total = np.zeros((h, w), dtype=np.float64)
    for k in range(spec.octaves):
        div = spec.base_scale * 2**k
        gh = max(1, math.ceil(h / div))
        gw = max(1, math.ceil(w / div))
        total += spec.amplitude_decay**k * _upsample_bilinear(gen.random((gh, gw)), h, w)
    centred = total - total.mean()
    spread = np.abs(centred).max()
    if spread > 0:
        centred *= 64.0 * spec.contrast / spread
    out = np.floor(spec.bias + centred + 0.5)
    return Raster(np.clip(out, 0, 255).astype(np.uint8))


# --- corpus bootstrap stand-ins -------------------------------------------


def gen_strokes(w: int, h: int, rng: RngStream, lines: int | None = None) -> Raster:
    """Cursive-like pen strokes along random baselines; a stand-in for handwriting crops."""
    gen = derived_generator(rng.seed64())
    im = Image.new("L", (w, h), 255)
    draw = ImageDraw.Draw(im)
    n_lines = lines if lines is not None else int(gen.integers(2, 7))
    for _ in range(n_lines):
        y = gen.uniform(0.1, 0.9) * h
        x = gen.uniform(0.0, 0.3) * w
        x_end = gen.uniform(0.5, 1.0) * w
        width = int(gen.integers(2, 4))
        ink = int(gen.integers(0, 70))
        amp = gen.uniform(2.5, 6) * h / 256
        freq = gen.uniform(0.2, 0.4) * 256 / h
        while x < x_end:
            word = gen.uniform(30, 90) * w / 768
            t = np.linspace(0, word, max(int(word), 2))
            phase = gen.uniform(0, 2 * math.pi)
            ys = y + amp * np.sin(freq * t + phase) + 0.5 * amp * np.sin(2.3 * freq * t)
            pts = [(float(x + tt), float(yy)) for tt, yy in zip(t, ys)]
            draw.line(pts, fill=ink, width=width, joint="curve")
            x += word + gen.uniform(10, 25) * w / 768
    return Raster(np.asarray(im))


_WORD_CHARS = string.ascii_letters + string.digits


def gen_printed_text(w: int, h: int, rng: RngStream, font_size: int = 18) -> Raster:
    """Lines of random words in Pillow's built-in font; a stand-in for printed-text crops."""
    gen = derived_generator(rng.seed64())
    im = Image.new("L", (w, h), 255)
    draw = ImageDraw.Draw(im)
    try:
        font = ImageFont.load_default(size=font_size)
    except TypeError:  # Pillow without FreeType
        font = ImageFont.load_default()
    leading = int(font_size * 1.6)
    top = int(gen.integers(0, max(leading, 1)))
    ink = int(gen.integers(0, 50))
    for y in range(top, h - font_size, leading):
        if gen.random() < 0.25:
            continue
        words = []
        for _ in range(int(gen.integers(3, 14))):
            n = int(gen.integers(2, 10))
            words.append("".join(_WORD_CHARS[i] for i in gen.integers(0, len(_WORD_CHARS), n)))
        draw.text((int(gen.integers(4, max(w // 6, 5))), y), " ".join(words), fill=ink, font=font)
    return Raster(np.asarray(im))
