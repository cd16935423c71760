"""Pad documents to a multiple of the patch size, cut non-overlapping tiles, and stitch them back."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence, TypeVar

import numpy as np

from .raster import LabelStack, Raster

T = TypeVar("T", Raster, LabelStack)


class PatchError(ValueError):
    pass


@dataclass(frozen=True)
class PatchGrid:
    original_w: int
    original_h: int
    padded_w: int
    padded_h: int
    patch: int
    rows: int
    cols: int

    @property
    def count(self) -> int:
        return self.rows * self.cols

    @classmethod
    def for_size(cls, width: int, height: int, patch: int) -> "PatchGrid":
        if patch <= 0:
            raise PatchError(f"patch size must be positive, got {patch}")
        if width <= 0 or height <= 0:
            raise PatchError(f"image dimensions must be positive, got {width}x{height}")
        cols = -(-width // patch)
        rows = -(-height // patch)
        return cls(width, height, cols * patch, rows * patch, patch, rows, cols)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "PatchGrid":
        grid = cls(**{k: int(data[k]) for k in cls.__dataclass_fields__})
        expected = cls.for_size(grid.original_w, grid.original_h, grid.patch)
        if grid != expected:
            raise PatchError(f"inconsistent patch grid {grid}")
        return grid


def _size(x) -> tuple[int, int]:
    return (x.width, x.height)


def pad_to_multiple(x: T, m: int) -> tuple[T, PatchGrid]:
    """Pad right and bottom only: white for images, zero for labels."""
    grid = PatchGrid.for_size(*_size(x), m)
    dh, dw = grid.padded_h - grid.original_h, grid.padded_w - grid.original_w
    if isinstance(x, LabelStack):
        if dh or dw:
            x = LabelStack(x.classes, np.pad(x.planes, ((0, 0), (0, dh), (0, dw))))
        return x, grid
    if dh or dw:
        widths = ((0, dh), (0, dw)) + (((0, 0),) if x.channels == 3 else ())
        x = Raster(np.pad(x.data, widths, constant_values=255))
    return x, grid


def split_patches(padded: T, grid: PatchGrid) -> list[T]:
    """Row-major tiles of ``grid.patch`` x ``grid.patch``."""
    if _size(padded) != (grid.padded_w, grid.padded_h):
        raise PatchError(f"input {_size(padded)} does not match padded grid {(grid.padded_w, grid.padded_h)}")
    m = grid.patch
    tiles = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            ys, xs = slice(r * m, (r + 1) * m), slice(c * m, (c + 1) * m)
            if isinstance(padded, LabelStack):
                tiles.append(LabelStack(padded.classes, padded.planes[:, ys, xs]))
            else:
                tiles.append(Raster(padded.data[ys, xs]))
    return tiles


def join_patches(patches: Sequence[T], grid: PatchGrid) -> T:
    """Inverse of split: stitch row-major tiles and crop back to the original size."""
    if len(patches) != grid.count:
        raise PatchError(f"expected {grid.count} patches, got {len(patches)}")
    m = grid.patch
    for i, p in enumerate(patches):
        if _size(p) != (m, m):
            raise PatchError(f"patch {i} is {_size(p)}, expected {(m, m)}")
    if isinstance(patches[0], LabelStack):
        classes = patches[0].classes
        canvas = np.zeros((len(classes), grid.padded_h, grid.padded_w), dtype=np.uint8)
        for i, p in enumerate(patches):
            r, c = divmod(i, grid.cols)
            canvas[:, r * m : (r + 1) * m, c * m : (c + 1) * m] = p.planes
        return LabelStack(classes, canvas[:, : grid.original_h, : grid.original_w])
    first = patches[0].data
    canvas = np.empty((grid.padded_h, grid.padded_w) + first.shape[2:], dtype=np.uint8)
    for i, p in enumerate(patches):
        r, c = divmod(i, grid.cols)
        canvas[r * m : (r + 1) * m, c * m : (c + 1) * m] = p.data
    return Raster(canvas[: grid.original_h, : grid.original_w])


def patch_name(stem: str, row: int, col: int) -> str:
    return f"{stem}_r{row}_c{col}.png"


def sidecar_name(stem: str) -> str:
    return f"{stem}.grid.json"
