import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from docsynth import kernels
from docsynth.kernels import _python

from .conftest import random_blob, zs_oracle

native_only = pytest.mark.skipif("native" not in kernels.available_backends(), reason="extension not built")


def test_backend_switching():
    assert kernels.backend() in kernels.available_backends()
    with kernels.backend_override("python"):
        assert kernels.backend() == "python"
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@pytest.mark.parametrize("seed", range(12))
def test_thin_matches_oracle(backend, seed):
    blob = random_blob(seed, size=24)
    assert np.array_equal(kernels.thin(blob), zs_oracle(blob))


def test_thin_bar(backend):
    bar = np.zeros((7, 26), np.uint8)
    bar[2:5, 3:23] = 1
    out = kernels.thin(bar)
    assert np.array_equal(out, zs_oracle(bar))
    assert out.sum() == 17 and out[3, 4:21].all()


def test_warp_identity(backend, rng):
    img = rng.integers(0, 256, (13, 17), dtype=np.uint8)
    ident = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    assert np.array_equal(kernels.warp_affine(img, ident, 13, 17), img)
    assert np.array_equal(kernels.warp_affine(img, ident, 13, 17, nearest=True), img)


def test_warp_translation_and_fill(backend):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4) + 1
    shift = np.array([[1.0, 0, -1], [0, 1.0, 0]])  # output x samples input x-1
    out = kernels.warp_affine(img, shift, 3, 4, fill=200, nearest=True)
    assert (out[:, 0] == 200).all()
    assert np.array_equal(out[:, 1:], img[:, :3])


def test_bilinear_midpoint(backend):
    img = np.array([[0, 100]], np.uint8)
    half = np.array([[1.0, 0, 0.5], [0, 1.0, 0]])
    assert kernels.warp_affine(img, half, 1, 1)[0, 0] == 50


def test_remap_matches_warp(backend, rng):
    img = rng.integers(0, 256, (20, 20), dtype=np.uint8)
    inv = np.array([[0.9, 0.1, 1.3], [-0.1, 1.05, -0.7]])
    yy, xx = np.mgrid[0:20, 0:20].astype(np.float64)
    mx = inv[0, 0] * xx + inv[0, 1] * yy + inv[0, 2]
    my = inv[1, 0] * xx + inv[1, 1] * yy + inv[1, 2]
    assert np.array_equal(kernels.remap(img, mx, my, fill=7), kernels.warp_affine(img, inv, 20, 20, fill=7))


@native_only
@settings(max_examples=80, deadline=None)
@given(
    arrays(np.uint8, st.tuples(st.integers(1, 24), st.integers(1, 24))),
    arrays(np.float64, (2, 3), elements=st.floats(-3, 3)),
    st.booleans(),
)
def test_backends_agree_on_warp(img, inv, nearest):
    from docsynth.kernels import _native

    a = _native.warp_affine(img, inv, 19, 23, 255, nearest)
    b = _python.warp_affine(img, inv, 19, 23, 255, nearest)
    assert np.array_equal(a, b)


@native_only
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_backends_agree_on_thin(seed):
    from docsynth.kernels import _native

    blob = random_blob(seed)
    assert np.array_equal(_native.thin(blob), _python.thin(blob))
