"""Image and label containers shared by every stage of the pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

BACKGROUND = "background"
HANDWRITING = "handwriting"
TEXT = "text"
FORM = "form"
DEFAULT_CLASSES = (HANDWRITING, TEXT, FORM)


class RasterError(ValueError):
    """Malformed image or label data."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    # copy anything the caller could still write to, so the value stays fixed
    if arr.flags.writeable or not arr.flags.c_contiguous:
        arr = np.array(arr, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Raster:
    """8-bit image, shape (H, W) for grayscale or (H, W, 3) for RGB.

    The pixel array is read-only once wrapped; build a new Raster to change it.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255 or not np.all(np.equal(np.mod(arr, 1), 0))):
                raise RasterError("raster samples must be integers in [0, 255]")
            arr = arr.astype(np.uint8)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if not (arr.ndim == 2 or (arr.ndim == 3 and arr.shape[2] == 3)):
            raise RasterError(f"unsupported raster shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise RasterError("raster dimensions must be positive")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @classmethod
    def full(cls, width: int, height: int, value: int = 255) -> "Raster":
        return cls(np.full((height, width), value, dtype=np.uint8))

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True)
class LabelStack:
    """Aligned binary planes, one per class, shape (C, H, W) with values in {0, 1}.

    Planes may overlap: a pixel can belong to several classes. Background is
    never stored; it is the absence of every plane.
    """

    classes: tuple[str, ...]
    planes: np.ndarray

    def __post_init__(self):
        classes = tuple(self.classes)
        if len(set(classes)) != len(classes):
            raise RasterError(f"duplicate classes in {classes}")
        if BACKGROUND in classes:
            raise RasterError("background is not a labelled plane")
        planes = np.asarray(self.planes)
        if planes.ndim != 3 or planes.shape[0] != len(classes):
            raise RasterError(f"planes shape {planes.shape} does not match {len(classes)} classes")
        if planes.shape[1] < 1 or planes.shape[2] < 1:
            raise RasterError("label dimensions must be positive")
        if planes.dtype == bool:
            planes = planes.astype(np.uint8)
        if planes.size and not np.isin(planes, (0, 1)).all():
            raise RasterError("label planes must be binary")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "planes", _frozen(planes.astype(np.uint8, copy=False)))

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1:]

    def plane(self, cls: str) -> np.ndarray:
        try:
            return self.planes[self.classes.index(cls)]
        except ValueError:
            raise KeyError(cls) from None

    @classmethod
    def empty(cls, classes: Sequence[str], width: int, height: int) -> "LabelStack":
        return cls(tuple(classes), np.zeros((len(classes), height, width), dtype=np.uint8))

    @classmethod
    def from_planes(cls, planes: dict[str, np.ndarray]) -> "LabelStack":
        names = tuple(planes)
        return cls(names, np.stack([np.asarray(planes[n], dtype=np.uint8) for n in names]))

    def __eq__(self, other):
        if not isinstance(other, LabelStack):
            return NotImplemented
        return (
            self.classes == other.classes
            and self.planes.shape == other.planes.shape
            and bool(np.array_equal(self.planes, other.planes))
        )

    __hash__ = None


@dataclass(frozen=True)
class Layer:
    """One compositing input: a class tag, a grayscale image, and an optional valid-region mask."""

    cls: str
    image: Raster
    region: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.image.channels != 1:
            raise RasterError(f"{self.cls} layer must be single-channel")
        if self.region is not None:
            region = np.asarray(self.region)
            if region.shape != self.image.shape:
                raise RasterError(
                    f"region shape {region.shape} does not match image shape {self.image.shape}"
                )
            object.__setattr__(self, "region", _frozen((region != 0).astype(np.uint8)))


def to_grayscale(img: Raster) -> Raster:
    """BT.601 luma, rounded half up. Grayscale input is returned as is."""
    if img.channels == 1:
        return img
    rgb = img.data.astype(np.float64)
    # integer weights keep the rounding exact: 0.299/0.587/0.114 scaled by 1000
    luma = rgb[..., 0] * 299 + rgb[..., 1] * 587 + rgb[..., 2] * 114
    return Raster(((luma.astype(np.int64) + 500) // 1000).astype(np.uint8))


def max_intensity(img: Raster) -> int:
    if img.data.size == 0:
        raise RasterError("max_intensity of an empty image")
    return int(img.data.max())


# --- PNG interchange -----------------------------------------------------


def read_raster(path: str | Path) -> Raster:
    with Image.open(path) as im:
        if im.mode in ("L", "RGB"):
            arr = np.asarray(im)
        elif im.mode in ("1", "P", "LA"):
            arr = np.asarray(im.convert("L" if im.mode != "P" else "RGB"))
        elif im.mode == "RGBA":
            arr = np.asarray(im.convert("RGB"))
        else:
            raise RasterError(f"{path}: unsupported image mode {im.mode}")
    return Raster(arr)


def write_raster(img: Raster, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img.data).save(path, format="PNG")


def write_plane(plane: np.ndarray, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray((np.asarray(plane, dtype=np.uint8) * 255)).save(path, format="PNG")


def read_plane(path: str | Path) -> np.ndarray:
    """Load a 0/255 label PNG as a {0,1} plane; any other value is an encoding error."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L") if im.mode != "L" else im)
    bad = (arr != 0) & (arr != 255)
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise RasterError(f"{path}: invalid label value {arr[y, x]} at ({x}, {y})")
    return (arr == 255).astype(np.uint8)


def write_label_stack(labels: LabelStack, directory: str | Path, stem: str) -> list[Path]:
    """Write ``<dir>/<class>/<stem>.png`` per plane plus ``<dir>/<stem>.classes.json``."""
    directory = Path(directory)
    paths = []
    for cls, plane in zip(labels.classes, labels.planes):
        p = directory / cls / f"{stem}.png"
        write_plane(plane, p)
        paths.append(p)
    sidecar = directory / f"{stem}.classes.json"
    sidecar.write_text(json.dumps({"classes": list(labels.classes)}, indent=2) + "\n")
    return paths


def read_label_stack(directory: str | Path, stem: str, classes: Iterable[str] | None = None) -> LabelStack:
    directory = Path(directory)
    if classes is None:
        classes = json.loads((directory / f"{stem}.classes.json").read_text())["classes"]
    planes = {}
    for cls in classes:
        p = directory / cls / f"{stem}.png"
        if not p.exists():
            raise FileNotFoundError(f"missing label plane for class {cls!r}: {p}")
        planes[cls] = read_plane(p)
    shapes = {v.shape for v in planes.values()}
    if len(shapes) > 1:
        raise RasterError(f"label planes for {stem} disagree in size: {sorted(shapes)}")
    return LabelStack.from_planes(planes)
