"""Zhang-Suen thinning that never erases a connected component.

Plain Zhang-Suen deletes some small shapes outright (a 2x2 block, certain
two-pixel diagonals) and can leave 2x2 clumps at junctions. Pseudo-recall
needs every ground-truth component to keep a skeleton, so any component
left empty gets back its most central pixel; clumps are then pruned one
pixel at a time, only where the deletion keeps the neighbourhood connected.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from . import kernels

EIGHT = np.ones((3, 3), dtype=bool)
# clockwise from north; bit k of a neighbourhood code is ring[k]
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def _removable_table() -> np.ndarray:
    """For each 8-neighbour code: removing the centre keeps its neighbours one 8-connected set."""
    table = np.zeros(256, dtype=bool)
    for code in range(256):
        m = np.zeros((3, 3), dtype=bool)
        for k, (dy, dx) in enumerate(_RING):
            m[dy + 1, dx + 1] = bool(code >> k & 1)
        if m.sum() >= 2:
            table[code] = ndimage.label(m, structure=EIGHT)[1] == 1
    return table


_REMOVABLE = _removable_table()


def components(plane: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected component labelling."""
    return ndimage.label(np.asarray(plane) != 0, structure=EIGHT)


def skeletonize(gt: np.ndarray) -> np.ndarray:
    plane = (np.asarray(gt) != 0).astype(np.uint8)
    if not plane.any():
        return np.zeros_like(plane)
    skel = kernels.thin(plane)
    labels, n = components(plane)
    surviving = np.zeros(n + 1, dtype=bool)
    surviving[np.unique(labels[skel != 0])] = True
    for comp in np.flatnonzero(~surviving[1:]) + 1:
        ys, xs = np.nonzero(labels == comp)
        cy, cx = ys.mean(), xs.mean()
        # nearest member to the centroid; raster order breaks ties
        k = int(np.argmin((ys - cy) ** 2 + (xs - cx) ** 2))
        skel[ys[k], xs[k]] = 1
    return _prune_clumps(skel)


def _code(p: np.ndarray, y: int, x: int) -> int:
    code = 0
    for k, (dy, dx) in enumerate(_RING):
        code |= int(p[y + dy, x + dx]) << k
    return code


def _prune_clumps(skel: np.ndarray) -> np.ndarray:
    p = np.pad(skel, 1)
    while True:
        b = p != 0
        blocks = np.argwhere(b[:-1, :-1] & b[1:, :-1] & b[:-1, 1:] & b[1:, 1:])
        removed = False
        for y, x in blocks:
            if not (p[y, x] and p[y + 1, x] and p[y, x + 1] and p[y + 1, x + 1]):
                continue  # broken up by an earlier deletion this sweep
            for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
                yy, xx = y + dy, x + dx
                if p[yy, xx] and _REMOVABLE[_code(p, yy, xx)]:
                    p[yy, xx] = 0
                    removed = True
                    break
        if not removed:
            return np.ascontiguousarray(p[1:-1, 1:-1])


def has_thick_block(plane: np.ndarray) -> bool:
    """Hit-or-miss test for a fully set 2x2 block, the signature of a stroke wider than one pixel."""
    p = np.asarray(plane) != 0
    return bool((p[:-1, :-1] & p[1:, :-1] & p[:-1, 1:] & p[1:, 1:]).any())
