"""Pure numpy implementations of the hot kernels.

These are the reference path. The compiled module in ``_native.pyx`` must
produce bit-identical output for every input; both evaluate the same float
expressions in the same order.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def _neighbours(p: np.ndarray):
    # p is zero-padded by one pixel; returns P2..P9 clockwise from north
    c = p[1:-1, 1:-1]
    return (
        p[:-2, 1:-1],  # P2 north
        p[:-2, 2:],  # P3 north-east
        p[1:-1, 2:],  # P4 east
        p[2:, 2:],  # P5 south-east
        p[2:, 1:-1],  # P6 south
        p[2:, :-2],  # P7 south-west
        p[1:-1, :-2],  # P8 west
        p[:-2, :-2],  # P9 north-west
    ), c


def thin(plane: np.ndarray) -> np.ndarray:
    """Zhang-Suen thinning of a {0,1} uint8 plane, iterated to convergence."""
    padded = np.pad(np.asarray(plane, dtype=np.uint8) != 0, 1).astype(np.uint8)
    while True:
        changed = False
        for step in (0, 1):
            (p2, p3, p4, p5, p6, p7, p8, p9), c = _neighbours(padded)
            ring = (p2, p3, p4, p5, p6, p7, p8, p9, p2)
            b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9
            a = sum(((ring[k] == 0) & (ring[k + 1] == 1)).astype(np.uint8) for k in range(8))
            if step == 0:
                c1 = p2 * p4 * p6
                c2 = p4 * p6 * p8
            else:
                c1 = p2 * p4 * p8
                c2 = p2 * p6 * p8
            delete = (c == 1) & (b >= 2) & (b <= 6) & (a == 1) & (c1 == 0) & (c2 == 0)
            if delete.any():
                changed = True
                c[delete] = 0
        if not changed:
            break
    return padded[1:-1, 1:-1].copy()


def _sample(img: np.ndarray, x: np.ndarray, y: np.ndarray, fill: int, nearest: bool) -> np.ndarray:
    h, w = img.shape
    if nearest:
        xi = np.floor(x + 0.5).astype(np.int64)
        yi = np.floor(y + 0.5).astype(np.int64)
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        out = np.full(x.shape, fill, dtype=np.uint8)
        out[inside] = img[yi[inside], xi[inside]]
        return out

    x0f = np.floor(x)
    y0f = np.floor(y)
    fx = x - x0f
    fy = y - y0f
    x0 = x0f.astype(np.int64)
    y0 = y0f.astype(np.int64)

    def tap(yy, xx):
        ok = (xx >= 0) & (xx < w) & (yy >= 0) & (yy < h)
        v = np.full(x.shape, float(fill))
        v[ok] = img[yy[ok], xx[ok]]
        return v

    p00 = tap(y0, x0)
    p01 = tap(y0, x0 + 1)
    p10 = tap(y0 + 1, x0)
    p11 = tap(y0 + 1, x0 + 1)
    gx = 1.0 - fx
    gy = 1.0 - fy
    v = gy * (gx * p00 + fx * p01) + fy * (gx * p10 + fx * p11)
    v = np.floor(v + 0.5)
    return np.clip(v, 0, 255).astype(np.uint8)


def warp_affine(img: np.ndarray, inv: np.ndarray, out_h: int, out_w: int, fill: int, nearest: bool) -> np.ndarray:
    """Inverse-map an affine warp; ``inv`` maps output (x, y) to input (x, y)."""
    m = np.asarray(inv, dtype=np.float64).reshape(2, 3)
    xo = np.arange(out_w, dtype=np.float64)[None, :]
    yo = np.arange(out_h, dtype=np.float64)[:, None]
    x = m[0, 0] * xo + m[0, 1] * yo + m[0, 2]
    y = m[1, 0] * xo + m[1, 1] * yo + m[1, 2]
    return _sample(np.ascontiguousarray(img, dtype=np.uint8), x, y, fill, nearest)


def remap(img: np.ndarray, map_x: np.ndarray, map_y: np.ndarray, fill: int, nearest: bool) -> np.ndarray:
    """Sample ``img`` at dense coordinates (map_x, map_y)."""
    return _sample(
        np.ascontiguousarray(img, dtype=np.uint8),
        np.asarray(map_x, dtype=np.float64),
        np.asarray(map_y, dtype=np.float64),
        fill,
        nearest,
    )
