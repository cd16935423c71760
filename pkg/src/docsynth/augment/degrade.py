"""Document degradation effects.

An effect is a pair of functions: ``sample`` draws its parameters from the
sample's stream, ``apply`` is a pure function of image and parameters. New
effects register themselves with :func:`register_effect`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
from scipy import ndimage

from ..rng import RngStream, derived_generator


@dataclass(frozen=True)
class Effect:
    name: str
    sample: Callable[[RngStream, tuple[int, int], dict[str, Any]], dict[str, Any]]
    apply: Callable[[np.ndarray, dict[str, Any]], np.ndarray]


EFFECTS: dict[str, Effect] = {}


def register_effect(name: str, sample, apply) -> Effect:
    if name in EFFECTS:
        raise ValueError(f"effect {name!r} already registered")
    EFFECTS[name] = Effect(name, sample, apply)
    return EFFECTS[name]


def get_effect(name: str) -> Effect:
    try:
        return EFFECTS[name]
    except KeyError:
        raise KeyError(f"unknown degradation effect {name!r}; known: {sorted(EFFECTS)}") from None


def _range(cfg: dict, key: str, default: tuple[float, float], rng: RngStream) -> float:
    """A fixed value if ``key`` is given, otherwise a draw from ``key_range``."""
    if key in cfg:
        return float(cfg[key])
    lo, hi = cfg.get(f"{key}_range", default)
    return rng.uniform(lo, hi)


def _as_gray(img: np.ndarray) -> np.ndarray:
    return img if img.ndim == 2 else img.mean(axis=2)


# bleed-through: the page's mirror image shows faintly from the back


def _bleed_sample(rng, shape, cfg):
    return {"beta": _range(cfg, "beta", (0.1, 0.35), rng)}


def bleed_through(img: np.ndarray, params: dict[str, Any], donor: np.ndarray | None = None) -> np.ndarray:
    donor = img if donor is None else donor
    mirrored = np.ascontiguousarray(donor[:, ::-1]).astype(np.float64)
    ghost = np.floor(255.0 - params["beta"] * (255.0 - mirrored) + 0.5).astype(np.uint8)
    return np.minimum(img, ghost)


# shadow: multiply by a linear ramp along a random direction


def _shadow_sample(rng, shape, cfg):
    strength = _range(cfg, "strength", (0.2, 0.6), rng)
    return {"start": 1.0 - strength, "end": 1.0, "angle": rng.uniform(0.0, 2 * math.pi)}


def shadow_cast(img: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    h, w = img.shape[:2]
    ux, uy = math.cos(params["angle"]), math.sin(params["angle"])
    proj = np.arange(w)[None, :] * ux + np.arange(h)[:, None] * uy
    span = proj.max() - proj.min()
    t = (proj - proj.min()) / span if span > 0 else np.zeros_like(proj)
    ramp = params["start"] + (params["end"] - params["start"]) * t
    if img.ndim == 3:
        ramp = ramp[..., None]
    return np.clip(np.floor(img * ramp + 0.5), 0, 255).astype(np.uint8)


# salt and pepper: floor(rho * N) distinct pixels, alternately salt and pepper;
# a pixel already at its assigned extreme takes the other one, so every pick changes


def _sp_sample(rng, shape, cfg):
    return {"rho": _range(cfg, "rho", (0.001, 0.01), rng), "seed": rng.seed64()}


def salt_pepper(img: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    h, w = img.shape[:2]
    n = h * w
    k = int(math.floor(params["rho"] * n))
    out = img.copy()
    if k == 0:
        return out
    idx = derived_generator(params["seed"]).choice(n, size=k, replace=False)
    ys, xs = np.divmod(idx, w)
    target = np.where(np.arange(k) % 2 == 0, 255, 0).astype(np.uint8)
    current = _as_gray(img)[ys, xs]
    target = np.where(current == target, 255 - target, target).astype(np.uint8)
    if img.ndim == 3:
        out[ys, xs, :] = target[:, None]
    else:
        out[ys, xs] = target
    return out


# ink bleed: dark pixels spread into their 3x3 neighbourhood with probability q


def _ink_sample(rng, shape, cfg):
    return {"q": _range(cfg, "q", (0.2, 0.6), rng), "dark": int(cfg.get("dark", 128)), "seed": rng.seed64()}


def ink_bleed(img: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    gray = _as_gray(img)
    picked = derived_generator(params["seed"]).random(gray.shape) < params["q"]
    source = np.where((gray < params["dark"]) & picked, gray, 255).astype(np.uint8)
    spread = ndimage.minimum_filter(source, size=3, mode="constant", cval=255)
    if img.ndim == 3:
        spread = spread[..., None]
    return np.minimum(img, spread).astype(np.uint8)


register_effect("bleed_through", _bleed_sample, bleed_through)
register_effect("shadow_cast", _shadow_sample, shadow_cast)
register_effect("salt_pepper", _sp_sample, salt_pepper)
register_effect("ink_bleed", _ink_sample, ink_bleed)
