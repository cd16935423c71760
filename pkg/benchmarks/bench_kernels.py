"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 768]

Prints one row per kernel with the best-of-N time for each backend, the
speed-up, and whether both backends returned identical arrays.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np
from scipy import ndimage

from docsynth import kernels
from docsynth.kernels import _python
from docsynth.augment.geometry import grid_warp_maps, rotation_matrix


def _cases(size: int):
    r = np.random.default_rng(0)
    img = r.integers(0, 256, (size, size), dtype=np.uint8)
    inv = np.linalg.inv(rotation_matrix(7.5, size, size, 0.93, 11.0, -4.0))[:2]
    field = ndimage.gaussian_filter(r.random((size // 2, size // 2)), 2.5)
    strokes = (field > np.quantile(field, 0.7)).astype(np.uint8)
    mx, my = grid_warp_maps(size, size, 4, r.uniform(-5, 5, (16, 2)))
    return {
        "warp_affine bilinear": lambda k: k.warp_affine(img, inv, size, size, 255, False),
        "warp_affine nearest": lambda k: k.warp_affine(img, inv, size, size, 0, True),
        "remap bilinear": lambda k: k.remap(img, mx, my, 255, False),
        f"thin {size // 2}px": lambda k: k.thin(strokes),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", type=int, default=768)
    parser.add_argument("--json", action="store_true", help="emit JSON rows instead of a table")
    args = parser.parse_args(argv)

    if "native" not in kernels.available_backends():
        print("compiled kernels are not built; only the fallback can be timed", file=sys.stderr)
        native = None
    else:
        from docsynth.kernels import _native as native

    rows = []
    for name, call in _cases(args.size).items():
        py_t = min(timeit.repeat(lambda: call(_python), number=1, repeat=args.repeat))
        row = {"kernel": name, "python_s": py_t, "native_s": None, "speedup": None, "identical": None}
        if native is not None:
            nat_t = min(timeit.repeat(lambda: call(native), number=1, repeat=args.repeat))
            row.update(native_s=nat_t, speedup=py_t / nat_t, identical=bool(np.array_equal(call(native), call(_python))))
        rows.append(row)

    if args.json:
        for row in rows:
            print(json.dumps(row))
        return 0
    print(f"{'kernel':<24}{'python ms':>12}{'native ms':>12}{'speedup':>10}  identical")
    for row in rows:
        nat = "-" if row["native_s"] is None else f"{1000 * row['native_s']:.1f}"
        sp = "-" if row["speedup"] is None else f"{row['speedup']:.1f}x"
        print(f"{row['kernel']:<24}{1000 * row['python_s']:>12.1f}{nat:>12}{sp:>10}  {row['identical']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
