"""Counter-based random streams keyed by (master seed, sample index).

Each sample owns an independent Philox stream, so results never depend on
how samples are distributed across workers or in what order they run.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _generator(key0: int, key1: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[key0 & _MASK64, key1 & _MASK64]))


class RngStream:
    """Deterministic draw sequence for one sample.

    ``draw_counter`` counts draw calls made so far; it is informational and
    makes the position in the stream visible in logs.
    """

    def __init__(self, master_seed: int, sample_index: int):
        if not (0 <= master_seed <= _MASK64 and 0 <= sample_index <= _MASK64):
            raise ValueError("seed and sample index must fit in 64 unsigned bits")
        self.master_seed = int(master_seed)
        self.sample_index = int(sample_index)
        self.draw_counter = 0
        self._gen = _generator(self.master_seed, self.sample_index)

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, sample_index={self.sample_index}, draws={self.draw_counter})"

    def random(self) -> float:
        self.draw_counter += 1
        return float(self._gen.random())

    def fires(self, p: float) -> bool:
        """One uniform draw; True with probability ``p``."""
        return self.random() < p

    def uniform(self, low: float, high: float) -> float:
        self.draw_counter += 1
        return float(self._gen.uniform(low, high))

    def integers(self, low: int, high: int) -> int:
        """Integer in [low, high)."""
        self.draw_counter += 1
        return int(self._gen.integers(low, high))

    def seed64(self) -> int:
        """Fresh 64-bit seed for a derived generator (noise fields and the like)."""
        self.draw_counter += 1
        return int(self._gen.integers(0, 1 << 63))

    def choice(self, n: int) -> int:
        return self.integers(0, n)

    def weighted_choice(self, weights) -> int:
        w = np.asarray(weights, dtype=np.float64)
        cdf = np.cumsum(w / w.sum())
        return int(min(np.searchsorted(cdf, self.random(), side="right"), len(w) - 1))


def derived_generator(seed: int, salt: int = 0) -> np.random.Generator:
    """numpy Generator for bulk draws, keyed by a seed taken from an ``RngStream``."""
    return _generator(seed, salt)
