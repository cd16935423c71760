"""Source pools, form filtering, and the dataset synthesis driver."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import yaml

from .augment import AugmentationLog, AugScheduleConfig, augment, replay
from .augment.geometry import resize
from .compositor import CompositeConfig, Sample, assemble_sample, document_region
from .raster import (
    BACKGROUND,
    DEFAULT_CLASSES,
    FORM,
    HANDWRITING,
    TEXT,
    LabelStack,
    Layer,
    Raster,
    RasterError,
    read_plane,
    read_raster,
    to_grayscale,
    write_label_stack,
    write_raster,
)
from .rng import RngStream

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp"}
# optional page mask shipped next to a background: <stem>.region.png (0/255)
REGION_SUFFIX = ".region.png"
DEFAULT_INCLUDE = {HANDWRITING: 0.8, TEXT: 0.8, FORM: 0.6}


class DatasetError(RuntimeError):
    pass


def list_images(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetError(f"not a directory: {directory}")
    return sorted(
        p
        for p in directory.iterdir()
        if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file() and not p.name.endswith(REGION_SUFFIX)
    )


@dataclass(frozen=True)
class SourcePool:
    cls: str
    paths: tuple[Path, ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(Path(p) for p in self.paths))
        if not self.paths:
            raise DatasetError(f"{self.cls} source pool is empty")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(self.paths) or any(x <= 0 for x in w):
                raise DatasetError(f"{self.cls} pool weights must be positive, one per path")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_dir(cls, name: str, directory: str | Path) -> "SourcePool":
        return cls(name, tuple(list_images(directory)))

    def pick(self, rng: RngStream) -> Path:
        if self.weights is None:
            return self.paths[rng.choice(len(self.paths))]
        return self.paths[rng.weighted_choice(self.weights)]


# --- form filtering ------------------------------------------------------------


def find_dark_window(img: Raster, block: int = 10, nonwhite_threshold: int = 250) -> tuple[int, int] | None:
    """Top-left (x, y) of the first block x block window with no white pixel, in raster order.

    A summed-area table of the non-white indicator gives each window's count in O(1).
    """
    gray = to_grayscale(img).data
    h, w = gray.shape
    if h < block or w < block:
        return None
    dark = (gray < nonwhite_threshold).astype(np.int32)
    sat = np.zeros((h + 1, w + 1), dtype=np.int32)
    np.cumsum(np.cumsum(dark, axis=0), axis=1, out=sat[1:, 1:])
    counts = sat[block:, block:] - sat[:-block, block:] - sat[block:, :-block] + sat[:-block, :-block]
    hits = np.argwhere(counts == block * block)
    if len(hits) == 0:
        return None
    y, x = hits[0]
    return int(x), int(y)


@dataclass
class FormScan:
    kept: list[Path] = field(default_factory=list)
    rejected: list[tuple[Path, tuple[int, int]]] = field(default_factory=list)
    unreadable: list[tuple[Path, str]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kept": [str(p) for p in self.kept],
            "rejected": [{"path": str(p), "window": {"x": x, "y": y}} for p, (x, y) in self.rejected],
            "unreadable": [{"path": str(p), "error": e} for p, e in self.unreadable],
        }


def scan_forms(paths: Iterable[Path], block: int = 10, nonwhite_threshold: int = 250) -> FormScan:
    scan = FormScan()
    for path in paths:
        try:
            img = read_raster(path)
        except (OSError, RasterError, ValueError) as exc:
            scan.unreadable.append((Path(path), str(exc)))
            continue
        hit = find_dark_window(img, block, nonwhite_threshold)
        if hit is None:
            scan.kept.append(Path(path))
        else:
            scan.rejected.append((Path(path), hit))
    return scan


def filter_form_sources(pool: SourcePool, block: int = 10, nonwhite_threshold: int = 250) -> SourcePool:
    """Drop form images that contain a solid non-white block x block region."""
    if pool.cls != FORM:
        raise DatasetError(f"form filtering applies to the form pool, not {pool.cls!r}")
    scan = scan_forms(pool.paths, block, nonwhite_threshold)
    for path, (x, y) in scan.rejected:
        log.info("form source rejected: %s (solid %dx%d block at x=%d, y=%d)", path, block, block, x, y)
    for path, err in scan.unreadable:
        log.warning("form source unreadable: %s: %s", path, err)
    if not scan.kept:
        raise DatasetError("no form sources survived filtering")
    weights = None
    if pool.weights is not None:
        index = {p: w for p, w in zip(pool.paths, pool.weights)}
        weights = tuple(index[p] for p in scan.kept)
    return SourcePool(FORM, tuple(scan.kept), weights)


# --- synthesis plan ------------------------------------------------------------


@dataclass
class SynthesisPlan:
    count: int = 8000
    canvas: int = 768
    seed: int = 0
    tau: int = 128
    classes: tuple[str, ...] = DEFAULT_CLASSES
    include: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_INCLUDE))
    blank_probability: float = 0.05
    augmentation: AugScheduleConfig | None = field(default_factory=AugScheduleConfig)

    def __post_init__(self):
        self.classes = tuple(self.classes)
        if self.count < 1:
            raise DatasetError(f"count must be at least 1, got {self.count}")
        if self.canvas < 1:
            raise DatasetError(f"canvas must be positive, got {self.canvas}")
        if not 0 <= self.tau <= 255:
            raise DatasetError(f"tau must be in [0, 255], got {self.tau}")
        for cls, p in self.include.items():
            if cls not in self.classes:
                raise DatasetError(f"inclusion probability given for unknown class {cls!r}")
            if not 0.0 <= p <= 1.0:
                raise DatasetError(f"inclusion probability for {cls} must be in [0, 1], got {p}")
        if not 0.0 <= self.blank_probability <= 1.0:
            raise DatasetError("blank_probability must be in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": self.count,
            "canvas": self.canvas,
            "seed": self.seed,
            "tau": self.tau,
            "classes": list(self.classes),
            "include": dict(self.include),
            "blank_probability": self.blank_probability,
            "augmentation": None if self.augmentation is None else self.augmentation.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SynthesisPlan":
        known = {"count", "canvas", "seed", "tau", "classes", "include", "blank_probability", "augmentation"}
        unknown = set(data) - known
        if unknown:
            raise DatasetError(f"unknown plan keys {sorted(unknown)}")
        kwargs = {k: data[k] for k in ("count", "canvas", "seed", "tau", "blank_probability") if k in data}
        if "classes" in data:
            kwargs["classes"] = tuple(data["classes"])
        if "include" in data:
            kwargs["include"] = {k: float(v) for k, v in data["include"].items()}
        if "augmentation" in data:
            aug = data["augmentation"]
            kwargs["augmentation"] = None if aug is None or aug is False else AugScheduleConfig.from_dict(
                {} if aug is True else aug
            )
        return cls(**kwargs)


@dataclass
class SynthConfig:
    plan: SynthesisPlan
    pools: dict[str, SourcePool]
    filter_forms: bool = True


def load_config(path: str | Path) -> SynthConfig:
    """Read a YAML synthesis config; source paths are relative to the config file."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise DatasetError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DatasetError(f"{path}: top level must be a mapping")
    base = path.parent
    sources = data.pop("sources", None)
    if not sources:
        raise DatasetError(f"{path}: no sources given")
    filter_forms = bool(data.pop("filter_forms", True))
    plan = SynthesisPlan.from_dict(data)
    pools = {}
    for cls, spec in sources.items():
        if isinstance(spec, (str, os.PathLike)):
            pools[cls] = SourcePool.from_dir(cls, (base / spec).resolve())
        else:
            files = [(base / p).resolve() for p in spec]
            pools[cls] = SourcePool(cls, tuple(files))
    return SynthConfig(plan, pools, filter_forms)


# --- sample synthesis ----------------------------------------------------------


@lru_cache(maxsize=64)
def _load_gray(path: str) -> np.ndarray:
    return to_grayscale(read_raster(path)).data


@lru_cache(maxsize=64)
def _load_region(path: str) -> tuple[np.ndarray, str]:
    """Page mask for a background source: the shipped mask if present, else the heuristic."""
    mask_path = Path(path).with_name(Path(path).stem + REGION_SUFFIX)
    if mask_path.exists():
        mask = read_plane(mask_path)
        if mask.shape != _load_gray(path).shape:
            raise DatasetError(f"{mask_path}: mask size does not match its background")
        return mask, str(mask_path)
    return document_region(Raster(_load_gray(path))), "heuristic"


def fit_to_canvas(src: np.ndarray, size: int, x_frac: float, y_frac: float) -> tuple[np.ndarray, dict[str, int]]:
    """Scale to fit inside size x size, keep aspect, place on white at a fractional offset."""
    h, w = src.shape
    f = min(size / w, size / h)
    nh, nw = max(1, min(size, int(round(h * f)))), max(1, min(size, int(round(w * f))))
    scaled = src if (nh, nw) == (h, w) else resize(src, None, nh, nw)[0]
    x = int((size - nw) * x_frac)
    y = int((size - nh) * y_frac)
    out = np.full((size, size), 255, dtype=np.uint8)
    out[y : y + nh, x : x + nw] = scaled
    return out, {"x": x, "y": y, "w": nw, "h": nh}


def cover_canvas(src: np.ndarray, size: int, x_frac: float, y_frac: float, mask: np.ndarray | None = None):
    """Scale to cover size x size, keep aspect, crop at a fractional offset.

    ``mask`` follows the same geometry with nearest-neighbour sampling.
    Returns (image, mask or None, placement).
    """
    h, w = src.shape
    f = max(size / w, size / h)
    nh, nw = max(size, int(round(h * f))), max(size, int(round(w * f)))
    planes = None if mask is None else mask[None]
    if (nh, nw) != (h, w):
        src, planes = resize(src, planes, nh, nw)
    x = int((nw - size) * x_frac)
    y = int((nh - size) * y_frac)
    img = np.ascontiguousarray(src[y : y + size, x : x + size])
    cropped = None if planes is None else np.ascontiguousarray(planes[0, y : y + size, x : x + size])
    return img, cropped, {"x": x, "y": y, "w": nw, "h": nh}


def _place_fracs(rng: RngStream) -> tuple[float, float]:
    return rng.random(), rng.random()


def _compose(plan: SynthesisPlan, bg_path: str, bg_fracs, layers: dict[str, tuple[str, tuple[float, float]]]):
    canvas = plan.canvas
    source_region, region_origin = _load_region(bg_path)
    bg, region, bg_place = cover_canvas(_load_gray(bg_path), canvas, *bg_fracs, mask=source_region)
    placed = []
    placements = {BACKGROUND: bg_place}
    for cls in plan.classes:
        if cls not in layers:
            continue
        path, fracs = layers[cls]
        img, placements[cls] = fit_to_canvas(_load_gray(path), canvas, *fracs)
        # no ink outside the page
        img = np.where(region != 0, img, 255).astype(np.uint8)
        if img.max() == 0:
            raise DatasetError(f"{path}: layer is entirely black")
        placed.append(Layer(cls, Raster(img)))
    cfg = CompositeConfig(tau=plan.tau, canvas=(canvas, canvas), classes=plan.classes)
    sample = assemble_sample(Layer(BACKGROUND, Raster(bg), region), placed, cfg)
    return sample, placements, region_origin


def make_sample(plan: SynthesisPlan, pools: dict[str, SourcePool], index: int) -> Sample:
    """Build one sample from its own stream; nothing here depends on other samples."""
    rng = RngStream(plan.seed, index)
    bg_path = pools[BACKGROUND].pick(rng)
    bg_fracs = _place_fracs(rng)
    blank = rng.fires(plan.blank_probability)
    chosen: dict[str, tuple[str, tuple[float, float]]] = {}
    if not blank:
        for cls in plan.classes:
            if rng.fires(plan.include.get(cls, 0.0)):
                chosen[cls] = (str(pools[cls].pick(rng)), _place_fracs(rng))

    sample, placements, region_origin = _compose(plan, str(bg_path), bg_fracs, chosen)
    image, labels = sample.image, sample.labels
    aug_log = AugmentationLog()
    if plan.augmentation is not None:
        image, labels, aug_log = augment(image, labels, plan.augmentation, rng)

    sample_id = f"{index:06d}"
    manifest = {
        "sample_id": sample_id,
        "sample_index": index,
        "master_seed": plan.seed,
        "tau": plan.tau,
        "canvas": plan.canvas,
        "classes": list(plan.classes),
        "blank": blank,
        "background_source": {"path": str(bg_path), "fracs": list(bg_fracs)},
        "layer_sources": {
            cls: ({"path": chosen[cls][0], "fracs": list(chosen[cls][1])} if cls in chosen else None)
            for cls in plan.classes
        },
        "placements": placements,
        "region": region_origin,
        "order": "composite, degrade, phase1, phase2",
        "augmentation_log": aug_log.to_list(),
        "outputs": {
            "image": f"images/{sample_id}.png",
            "labels": {cls: f"labels/{cls}/{sample_id}.png" for cls in plan.classes},
        },
    }
    return Sample(image, labels, manifest)


def regenerate_sample(manifest: dict[str, Any]) -> Sample:
    """Rebuild a sample from its manifest alone: sources, placements, and the augmentation log."""
    plan = SynthesisPlan(
        count=1,
        canvas=manifest["canvas"],
        seed=manifest["master_seed"],
        tau=manifest["tau"],
        classes=tuple(manifest["classes"]),
        include={},
        augmentation=None,
    )
    bg = manifest["background_source"]
    layers = {
        cls: (src["path"], tuple(src["fracs"])) for cls, src in manifest["layer_sources"].items() if src is not None
    }
    sample, _, _ = _compose(plan, bg["path"], tuple(bg["fracs"]), layers)
    image, labels = replay(AugmentationLog.from_list(manifest["augmentation_log"]), sample.image, sample.labels)
    return Sample(image, labels, manifest)


def write_sample(sample: Sample, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    sid = sample.manifest["sample_id"]
    write_raster(sample.image, out_dir / sample.manifest["outputs"]["image"])
    write_label_stack(sample.labels, out_dir / "labels", sid)
    mpath = out_dir / "manifests" / f"{sid}.json"
    mpath.parent.mkdir(parents=True, exist_ok=True)
    mpath.write_text(json.dumps(sample.manifest, indent=2, sort_keys=True) + "\n")


def load_sample(manifest: str | Path | dict[str, Any], root: str | Path | None = None) -> Sample:
    """Read a written sample back; ``root`` defaults to the dataset directory holding the manifest."""
    if not isinstance(manifest, dict):
        mpath = Path(manifest)
        manifest = json.loads(mpath.read_text())
        root = root if root is not None else mpath.parent.parent
    if root is None:
        raise DatasetError("root directory required when passing a manifest dict")
    root = Path(root)
    outputs = manifest["outputs"]
    image = read_raster(root / outputs["image"])
    planes = {}
    for cls in manifest.get("classes") or list(outputs["labels"]):
        rel = outputs["labels"].get(cls)
        if rel is None:
            raise DatasetError(f"manifest lists no label plane for class {cls!r}")
        p = root / rel
        if not p.exists():
            raise DatasetError(f"missing label plane for class {cls!r}: {p}")
        planes[cls] = read_plane(p)
        if planes[cls].shape != image.shape:
            raise DatasetError(f"{cls} plane {planes[cls].shape} does not match image {image.shape}")
    return Sample(image, LabelStack.from_planes(planes), manifest)


_worker_state: dict[str, Any] = {}


def _init_worker(plan, pools, out_dir):
    _worker_state.update(plan=plan, pools=pools, out_dir=out_dir)


def _work(index: int) -> dict[str, Any]:
    s = _worker_state
    sample = make_sample(s["plan"], s["pools"], index)
    write_sample(sample, s["out_dir"])
    return sample.manifest


def synthesize_dataset(
    plan: SynthesisPlan,
    pools: Sequence[SourcePool] | dict[str, SourcePool],
    out_dir: str | Path,
    jobs: int = 1,
    progress=None,
) -> list[dict[str, Any]]:
    """Generate ``plan.count`` samples into ``out_dir``; returns manifests in index order."""
    if not isinstance(pools, dict):
        pools = {p.cls: p for p in pools}
    if BACKGROUND not in pools:
        raise DatasetError("a background source pool is required")
    for cls in plan.classes:
        if plan.include.get(cls, 0.0) > 0 and cls not in pools:
            raise DatasetError(f"class {cls!r} has inclusion probability > 0 but no source pool")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "plan.json").write_text(
            json.dumps(
                {
                    "plan": plan.to_dict(),
                    "pools": {c: [str(p) for p in pool.paths] for c, pool in sorted(pools.items())},
                },
                indent=2,
            )
            + "\n"
        )
    except OSError as exc:
        raise DatasetError(f"cannot write to {out_dir}: {exc}") from exc

    manifests = []
    indices = range(plan.count)
    if jobs <= 1:
        _init_worker(plan, pools, out_dir)
        for i in indices:
            manifests.append(_work(i))
            if progress:
                progress(i + 1, plan.count)
    else:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(plan, pools, out_dir)) as ex:
            for k, m in enumerate(ex.map(_work, indices, chunksize=max(1, plan.count // (jobs * 8)))):
                manifests.append(m)
                if progress:
                    progress(k + 1, plan.count)
    return manifests
