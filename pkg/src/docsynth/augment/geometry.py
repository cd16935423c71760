"""Geometric transforms applied identically to an image and its label planes.

Images are resampled bilinearly, labels by nearest neighbour, so planes stay
binary. Each transform has a matching ``*_points`` function that carries
coordinates forward; tests use it to check image/label alignment.
"""

from __future__ import annotations

import math

import numpy as np

from .. import kernels

IMAGE_FILL = 255
LABEL_FILL = 0


def _warp_all(img: np.ndarray, planes: np.ndarray | None, forward: np.ndarray, out_h: int, out_w: int):
    inv = np.linalg.inv(forward)[:2]
    if img.ndim == 3:
        out = np.stack(
            [kernels.warp_affine(img[..., c], inv, out_h, out_w, IMAGE_FILL) for c in range(img.shape[2])],
            axis=-1,
        )
    else:
        out = kernels.warp_affine(img, inv, out_h, out_w, IMAGE_FILL)
    if planes is None:
        return out, None
    warped = np.empty((planes.shape[0], out_h, out_w), dtype=np.uint8)
    for i, plane in enumerate(planes):
        warped[i] = kernels.warp_affine(plane, inv, out_h, out_w, LABEL_FILL, nearest=True)
    return out, warped


def _apply_forward(forward: np.ndarray, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return pts @ forward[:2, :2].T + forward[:2, 2]


def rotation_matrix(angle_deg: float, h: int, w: int, scale: float = 1.0, dx: float = 0.0, dy: float = 0.0) -> np.ndarray:
    """Forward map: rotate counter-clockwise (as displayed) and scale about the centre, then shift."""
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    t = math.radians(angle_deg)
    c, s = math.cos(t) * scale, math.sin(t) * scale
    return np.array(
        [
            [c, s, cx - c * cx - s * cy + dx],
            [-s, c, cy + s * cx - c * cy + dy],
            [0.0, 0.0, 1.0],
        ]
    )


def rotate(img, planes, angle_deg: float):
    h, w = img.shape[:2]
    return _warp_all(img, planes, rotation_matrix(angle_deg, h, w), h, w)


def rotate_points(points, shape, angle_deg: float):
    h, w = shape
    return _apply_forward(rotation_matrix(angle_deg, h, w), points), shape


def rotate90(img, planes, k: int):
    """Exact quarter turn: k=1 counter-clockwise, k=-1 clockwise."""
    out = np.ascontiguousarray(np.rot90(img, k, axes=(0, 1)))
    if planes is None:
        return out, None
    return out, np.ascontiguousarray(np.rot90(planes, k, axes=(1, 2)))


def rotate90_points(points, shape, k: int):
    h, w = shape
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    if k % 4 == 1:
        return np.stack([y, (w - 1) - x], axis=1), (w, h)
    if k % 4 == 3:
        return np.stack([(h - 1) - y, x], axis=1), (w, h)
    raise ValueError("only quarter turns of +1 or -1 are supported")


def scaled_size(h: int, w: int, factor: float) -> tuple[int, int]:
    return max(1, int(math.floor(h * factor + 0.5))), max(1, int(math.floor(w * factor + 0.5)))


def _scale_maps(h, w, out_h, out_w):
    sy, sx = out_h / h, out_w / w
    xs = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) / sx - 0.5, 0.0, w - 1.0)
    ys = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) / sy - 0.5, 0.0, h - 1.0)
    return np.broadcast_to(xs[None, :], (out_h, out_w)), np.broadcast_to(ys[:, None], (out_h, out_w))


def resize(img, planes, out_h: int, out_w: int):
    """Pixel-centre aligned resize with edge clamping (no fill bleeds in)."""
    h, w = img.shape[:2]
    mx, my = _scale_maps(h, w, out_h, out_w)
    if img.ndim == 3:
        out = np.stack([kernels.remap(img[..., c], mx, my, IMAGE_FILL) for c in range(img.shape[2])], axis=-1)
    else:
        out = kernels.remap(img, mx, my, IMAGE_FILL)
    if planes is None:
        return out, None
    res = np.empty((planes.shape[0], out_h, out_w), dtype=np.uint8)
    for i, plane in enumerate(planes):
        res[i] = kernels.remap(plane, mx, my, LABEL_FILL, nearest=True)
    return out, res


def scale(img, planes, factor: float):
    out_h, out_w = scaled_size(*img.shape[:2], factor)
    return resize(img, planes, out_h, out_w)


def scale_points(points, shape, factor: float):
    h, w = shape
    out_h, out_w = scaled_size(h, w, factor)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    sx, sy = out_w / w, out_h / h
    return np.stack([(pts[:, 0] + 0.5) * sx - 0.5, (pts[:, 1] + 0.5) * sy - 0.5], axis=1), (out_h, out_w)


def crop_padding(h: int, w: int, size: int) -> tuple[int, int, int, int]:
    """(top, bottom, left, right) padding needed to reach at least size x size, split evenly."""
    ph, pw = max(size - h, 0), max(size - w, 0)
    return ph // 2, ph - ph // 2, pw // 2, pw - pw // 2


def pad_crop(img, planes, size: int, pad: tuple[int, int, int, int], x0: int, y0: int):
    """Reflect-pad the image and zero-pad labels as given, then take a size x size window at (x0, y0)."""
    top, bottom, left, right = pad
    if any(pad):
        widths = ((top, bottom), (left, right)) + (((0, 0),) if img.ndim == 3 else ())
        img = np.pad(img, widths, mode="reflect" if min(img.shape[:2]) > 1 else "edge")
        if planes is not None:
            planes = np.pad(planes, ((0, 0), (top, bottom), (left, right)))
    img = np.ascontiguousarray(img[y0 : y0 + size, x0 : x0 + size])
    if planes is not None:
        planes = np.ascontiguousarray(planes[:, y0 : y0 + size, x0 : x0 + size])
    return img, planes


def pad_crop_points(points, shape, size: int, pad, x0: int, y0: int):
    top, _, left, _ = pad
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return pts + np.array([left - x0, top - y0], dtype=np.float64), (size, size)


def shift_scale_rotate(img, planes, angle_deg: float, scale_factor: float, dx: float, dy: float):
    h, w = img.shape[:2]
    m = rotation_matrix(angle_deg, h, w, scale_factor, dx * w, dy * h)
    return _warp_all(img, planes, m, h, w)


def shift_scale_rotate_points(points, shape, angle_deg, scale_factor, dx, dy):
    h, w = shape
    return _apply_forward(rotation_matrix(angle_deg, h, w, scale_factor, dx * w, dy * h), points), shape


def grid_warp_maps(h: int, w: int, grid: int, offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense sampling maps from per-node displacements on a grid x grid lattice.

    Displacements are interpolated with a thin-plate spline, so the warp is
    smooth and exact at the nodes.
    """
    from scipy.interpolate import RBFInterpolator

    gy, gx = np.meshgrid(np.linspace(0, h - 1, grid), np.linspace(0, w - 1, grid), indexing="ij")
    nodes = np.stack([gy.ravel(), gx.ravel()], axis=1)
    offsets = np.asarray(offsets, dtype=np.float64).reshape(grid * grid, 2)
    interp = RBFInterpolator(nodes, offsets, kernel="thin_plate_spline")
    # evaluate on a coarse lattice and upsample; exact TPS per pixel is needlessly slow
    step = 8
    cy = np.arange(0, h + step, step, dtype=np.float64)
    cx = np.arange(0, w + step, step, dtype=np.float64)
    cyy, cxx = np.meshgrid(cy, cx, indexing="ij")
    coarse = interp(np.stack([cyy.ravel(), cxx.ravel()], axis=1)).reshape(len(cy), len(cx), 2)
    ys = np.arange(h, dtype=np.float64) / step
    xs = np.arange(w, dtype=np.float64) / step
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    top = coarse[y0][:, x0] * (1 - fx) + coarse[y0][:, x0 + 1] * fx
    bottom = coarse[y0 + 1][:, x0] * (1 - fx) + coarse[y0 + 1][:, x0 + 1] * fx
    disp = top * (1 - fy) + bottom * fy
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    return xx + disp[..., 1], yy + disp[..., 0]


def grid_warp(img, planes, grid: int, offsets):
    h, w = img.shape[:2]
    mx, my = grid_warp_maps(h, w, grid, offsets)
    if img.ndim == 3:
        out = np.stack([kernels.remap(img[..., c], mx, my, IMAGE_FILL) for c in range(img.shape[2])], axis=-1)
    else:
        out = kernels.remap(img, mx, my, IMAGE_FILL)
    if planes is None:
        return out, None
    res = np.empty_like(planes)
    for i, plane in enumerate(planes):
        res[i] = kernels.remap(plane, mx, my, LABEL_FILL, nearest=True)
    return out, res
