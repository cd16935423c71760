"""Intensity-only operations. They never see label planes."""

from __future__ import annotations

import numpy as np

from ..rng import derived_generator


def _round_clip(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def brightness_contrast(img: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    return _round_clip(img.astype(np.float64) * alpha + beta)


def gaussian_blur3(img: np.ndarray) -> np.ndarray:
    """3x3 binomial Gaussian ([1,2,1] outer [1,2,1] / 16), mirrored borders, exact integer rounding."""
    widths = ((1, 1), (1, 1)) + (((0, 0),) if img.ndim == 3 else ())
    mode = "reflect" if min(img.shape[:2]) > 1 else "edge"
    p = np.pad(img.astype(np.int32), widths, mode=mode)
    rows = p[:-2] + 2 * p[1:-1] + p[2:]
    acc = rows[:, :-2] + 2 * rows[:, 1:-1] + rows[:, 2:]
    return ((acc + 8) // 16).astype(np.uint8)


def gauss_noise(img: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    noise = derived_generator(seed).normal(0.0, sigma, img.shape)
    return _round_clip(img.astype(np.float64) + noise)
