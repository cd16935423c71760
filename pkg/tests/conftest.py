import numpy as np
import pytest

from docsynth import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run the test once per kernel backend."""
    with kernels.backend_override(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def zs_oracle(img) -> np.ndarray:
    """Reference Zhang-Suen thinning written pixel by pixel from the textbook rules."""
    p = [[int(v != 0) for v in row] for row in np.asarray(img)]
    h, w = len(p), len(p[0])

    def g(y, x):
        return p[y][x] if 0 <= y < h and 0 <= x < w else 0

    changed = True
    while changed:
        changed = False
        for step in (0, 1):
            kill = []
            for y in range(h):
                for x in range(w):
                    if not p[y][x]:
                        continue
                    n = [g(y - 1, x), g(y - 1, x + 1), g(y, x + 1), g(y + 1, x + 1),
                         g(y + 1, x), g(y + 1, x - 1), g(y, x - 1), g(y - 1, x - 1)]
                    b = sum(n)
                    a = sum(1 for k in range(8) if n[k] == 0 and n[(k + 1) % 8] == 1)
                    p2, _, p4, _, p6, _, p8, _ = n
                    if step == 0:
                        ok = p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0
                    else:
                        ok = p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0
                    if 2 <= b <= 6 and a == 1 and ok:
                        kill.append((y, x))
            for y, x in kill:
                p[y][x] = 0
            changed |= bool(kill)
    return np.array(p, dtype=np.uint8)


def random_blob(seed: int, size: int | None = None) -> np.ndarray:
    """Smooth random binary shapes: thresholded Gaussian-filtered noise."""
    from scipy import ndimage

    r = np.random.default_rng(seed)
    size = size or int(r.integers(16, 80))
    sigma = r.uniform(0.8, 4.0)
    field = ndimage.gaussian_filter(r.random((size, size)), sigma)
    return (field > np.quantile(field, r.uniform(0.4, 0.8))).astype(np.uint8)


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """A small generated source corpus with a synth.yaml at its root."""
    from docsynth.cli import main

    root = tmp_path_factory.mktemp("corpus")
    assert main(["gen", "corpus", "--out", str(root), "--count", "3", "--size", "192", "--seed", "1"]) == 0
    return root
