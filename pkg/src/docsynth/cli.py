"""docsynth command line: synth, eval, patch, filter-forms, gen.

Machine-readable summaries go to stdout as JSON; progress and diagnostics
go to stderr. Exit status is 0 on success, 1 on runtime failure, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dataset import DatasetError, filter_form_sources, list_images, load_config, scan_forms, synthesize_dataset
from .elements import GridSpec, NoiseSpec, gen_grid, gen_multiscale_noise, gen_printed_text, gen_strokes
from .metrics import METRIC_NAMES, MetricError, PredictionStack, evaluate_images
from .patchwork import PatchGrid, join_patches, pad_to_multiple, patch_name, sidecar_name, split_patches
from .raster import DEFAULT_CLASSES, LabelStack, Raster, RasterError, read_plane, read_raster, write_raster
from .rng import RngStream

log = logging.getLogger("docsynth")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_FAIL):
        super().__init__(message)
        self.code = code


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    sys.stdout.flush()


# --- synth -------------------------------------------------------------------


def cmd_synth(args) -> int:
    try:
        cfg = load_config(args.config)
    except FileNotFoundError as exc:
        raise CliError(f"config not found: {exc.filename}") from exc
    plan = cfg.plan
    if args.count is not None:
        plan.count = args.count
    if args.size is not None:
        plan.canvas = args.size
    if args.seed is not None:
        plan.seed = args.seed
    if args.no_augment:
        plan.augmentation = None
    plan.__post_init__()
    pools = dict(cfg.pools)
    if cfg.filter_forms and "form" in pools:
        pools["form"] = filter_form_sources(pools["form"])

    def progress(done, total):
        if done == total or done % max(1, total // 20) == 0:
            print(f"synth: {done}/{total}", file=sys.stderr)

    start = time.perf_counter()
    manifests = synthesize_dataset(plan, pools, args.out, jobs=args.jobs, progress=progress)
    elapsed = time.perf_counter() - start
    _emit({"command": "synth", "samples": len(manifests), "elapsed_s": round(elapsed, 3), "out": str(args.out)})
    return EXIT_OK


# --- eval --------------------------------------------------------------------


def _label_root(path: Path) -> Path:
    return path / "labels" if (path / "labels").is_dir() else path


def cmd_eval(args) -> int:
    classes = tuple(c.strip() for c in args.classes.split(",") if c.strip())
    if not classes:
        raise CliError("--classes is empty", EXIT_USAGE)
    gt_root, pred_root = _label_root(Path(args.gt)), _label_root(Path(args.pred))
    for root in (gt_root, pred_root):
        if not root.is_dir():
            raise CliError(f"not a directory: {root}")

    stems = sorted({p.stem for c in classes if (gt_root / c).is_dir() for p in list_images(gt_root / c)})
    if not stems:
        raise CliError(f"no ground-truth planes under {gt_root} for classes {', '.join(classes)}")

    preds, gts, ids, unmatched, failures = [], [], [], [], []
    for stem in stems:
        gt_planes, pred_planes = {}, {}
        try:
            for c in classes:
                gpath = gt_root / c / f"{stem}.png"
                ppath = pred_root / c / f"{stem}.png"
                if not gpath.exists():
                    raise CliError(f"{gpath}: missing ground-truth plane")
                if not ppath.exists():
                    unmatched.append(str(ppath))
                    raise LookupError
                gt_planes[c] = read_plane(gpath)
                pred_img = read_raster(ppath)
                if pred_img.channels != 1:
                    raise CliError(f"{ppath}: prediction must be single-channel")
                if pred_img.shape != gt_planes[c].shape:
                    raise CliError(
                        f"{ppath}: size {pred_img.shape[::-1]} does not match ground truth {gt_planes[c].shape[::-1]}"
                    )
                pred_planes[c] = pred_img.data.astype(np.float64) / 255.0
        except LookupError:
            continue
        except (CliError, RasterError, OSError) as exc:
            failures.append(str(exc))
            print(f"eval: {exc}", file=sys.stderr)
            continue
        gts.append(LabelStack.from_planes(gt_planes))
        preds.append(PredictionStack(classes, np.stack([pred_planes[c] for c in classes])))
        ids.append(stem)

    for path in unmatched:
        print(f"eval: no prediction for {path}", file=sys.stderr)
    if not gts:
        raise CliError("no readable prediction/ground-truth pairs")
    try:
        report = evaluate_images(preds, gts, ids)
    except MetricError as exc:
        raise CliError(str(exc)) from exc
    payload = report.to_dict()
    payload["_meta"] = {"images": len(ids), "unmatched": unmatched, "failures": failures}
    Path(args.report).parent.mkdir(parents=True, exist_ok=True)
    Path(args.report).write_text(json.dumps(payload, indent=2) + "\n")
    summary = report.summary()
    for c in classes:
        _emit({"class": c, **{k: summary[c][k] for k in (f"mean_{m}" for m in METRIC_NAMES)}})
    return EXIT_FAIL if failures else EXIT_OK


# --- patch -------------------------------------------------------------------


def cmd_patch(args) -> int:
    src, out = Path(args.input), Path(args.out)
    if args.join:
        sidecars = [src] if src.is_file() else sorted(src.glob("*.grid.json")) if src.is_dir() else []
        if not sidecars:
            raise CliError(f"no patch grid sidecar (*.grid.json) found at {src}")
        written = []
        for sc in sidecars:
            meta = json.loads(sc.read_text())
            grid = PatchGrid.from_dict(meta["grid"])
            tiles = [read_raster(sc.parent / name) for name in meta["tiles"]]
            image = join_patches(tiles, grid)
            target = out / f"{meta['stem']}.png"
            write_raster(image, target)
            written.append(str(target))
        _emit({"command": "patch", "mode": "join", "written": written})
        return EXIT_OK

    if args.size < 1:
        raise CliError(f"--size must be at least 1, got {args.size}", EXIT_USAGE)
    if not src.is_file():
        raise CliError(f"input not found: {src}")
    image = read_raster(src)
    padded, grid = pad_to_multiple(image, args.size)
    tiles = split_patches(padded, grid)
    names = [patch_name(src.stem, r, c) for r in range(grid.rows) for c in range(grid.cols)]
    out.mkdir(parents=True, exist_ok=True)
    for name, tile in zip(names, tiles):
        write_raster(tile, out / name)
    sidecar = out / sidecar_name(src.stem)
    sidecar.write_text(json.dumps({"stem": src.stem, "grid": json.loads(grid.to_json()), "tiles": names}, indent=2) + "\n")
    _emit({"command": "patch", "mode": "split", "patches": len(names), "rows": grid.rows, "cols": grid.cols, "sidecar": str(sidecar)})
    return EXIT_OK


# --- filter-forms ------------------------------------------------------------


def cmd_filter_forms(args) -> int:
    src = Path(args.input)
    if not src.is_dir():
        raise CliError(f"not a directory: {src}")
    scan = scan_forms(list_images(src), args.block, args.threshold)
    for path, err in scan.unreadable:
        print(f"filter-forms: unreadable {path}: {err}", file=sys.stderr)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(scan.to_dict(), indent=2) + "\n")
    _emit({"command": "filter-forms", "kept": len(scan.kept), "rejected": len(scan.rejected), "unreadable": len(scan.unreadable)})
    return EXIT_OK


# --- gen ---------------------------------------------------------------------

_GEN_KINDS = ("grid", "noise", "strokes", "text", "corpus")


def _gen_one(kind: str, size: int, rng: RngStream) -> Raster:
    if kind == "grid":
        spec = GridSpec(
            cell_w=rng.integers(40, 120),
            cell_h=rng.integers(24, 64),
            line_width=rng.integers(1, 3),
            line_intensity=rng.integers(0, 90),
            include_checkboxes=rng.fires(0.5),
            baseline_only=rng.fires(0.3),
        )
        return gen_grid(spec, size, size, rng)
    if kind == "noise":
        spec = NoiseSpec(octaves=4, base_scale=rng.uniform(2, 8), bias=rng.uniform(190, 235), contrast=rng.uniform(0.2, 0.6))
        return gen_multiscale_noise(spec, size, size, rng)
    if kind == "strokes":
        return gen_strokes(size, size, rng)
    if kind == "text":
        return gen_printed_text(size, size, rng, font_size=max(8, size // 40))
    raise ValueError(kind)


def cmd_gen(args) -> int:
    out = Path(args.out)
    if args.kind == "corpus":
        layout = {"background": "noise", "handwriting": "strokes", "text": "text", "form": "grid"}
        for k, (folder, kind) in enumerate(layout.items()):
            for i in range(args.count):
                img = _gen_one(kind, args.size, RngStream(args.seed, k * 1_000_003 + i))
                write_raster(img, out / folder / f"{kind}_{i:04d}.png")
        config = {
            "seed": args.seed,
            "count": 100,
            "canvas": args.size,
            "sources": {folder: folder for folder in layout},
        }
        (out / "synth.yaml").write_text(yaml.safe_dump(config, sort_keys=False))
        _emit({"command": "gen", "kind": "corpus", "per_class": args.count, "config": str(out / "synth.yaml")})
        return EXIT_OK
    for i in range(args.count):
        write_raster(_gen_one(args.kind, args.size, RngStream(args.seed, i)), out / f"{args.kind}_{i:04d}.png")
    _emit({"command": "gen", "kind": args.kind, "count": args.count, "out": str(out)})
    return EXIT_OK


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docsynth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a layered synthetic dataset")
    p.add_argument("--config", required=True, help="YAML synthesis config")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--count", type=_positive_int, help="number of samples (overrides config)")
    p.add_argument("--size", type=_positive_int, help="canvas size in pixels (overrides config)")
    p.add_argument("--seed", type=_nonneg_int, help="master seed (overrides config)")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes; output is identical for any value")
    p.add_argument("--no-augment", action="store_true", help="write composites without augmentation")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score predicted planes against ground truth")
    p.add_argument("--pred", required=True, help="prediction tree: <dir>/<class>/<stem>.png")
    p.add_argument("--gt", required=True, help="ground-truth tree, same layout (or a synth output dir)")
    p.add_argument("--classes", default=",".join(DEFAULT_CLASSES), help="comma-separated class names")
    p.add_argument("--report", required=True, help="JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("patch", help="split an image into padded tiles, or join them back")
    p.add_argument("--in", dest="input", required=True, help="image to split, or tile directory / sidecar to join")
    p.add_argument("--size", type=int, default=256, help="tile size in pixels")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--join", action="store_true", help="reassemble from a grid sidecar")
    p.set_defaults(func=cmd_patch)

    p = sub.add_parser("filter-forms", help="reject form images containing a solid non-white block")
    p.add_argument("--in", dest="input", required=True, help="directory of form images")
    p.add_argument("--out", required=True, help="JSON keep/reject manifest")
    p.add_argument("--block", type=_positive_int, default=10)
    p.add_argument("--threshold", type=int, default=250, help="intensities below this count as non-white")
    p.set_defaults(func=cmd_filter_forms)

    p = sub.add_parser("gen", help="procedural sources: grids, noise backgrounds, strokes, text, or a full corpus")
    p.add_argument("kind", choices=_GEN_KINDS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=_positive_int, default=8, help="images per kind")
    p.add_argument("--size", type=_positive_int, default=768)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"docsynth {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (DatasetError, RasterError, MetricError, ValueError, OSError) as exc:
        print(f"docsynth {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
