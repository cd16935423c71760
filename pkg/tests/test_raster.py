import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from docsynth.raster import (
    LabelStack,
    Layer,
    Raster,
    RasterError,
    max_intensity,
    read_label_stack,
    read_plane,
    read_raster,
    to_grayscale,
    write_label_stack,
    write_raster,
)


def rgb(r, g, b):
    return Raster(np.array([[[r, g, b]]], dtype=np.uint8))


def test_grayscale_white_and_black():
    assert to_grayscale(rgb(255, 255, 255)).data[0, 0] == 255
    assert to_grayscale(rgb(0, 0, 0)).data[0, 0] == 0


def test_grayscale_luma_weights():
    # 0.299*100 + 0.587*200 + 0.114*50 = 29.9 + 117.4 + 5.7 = 153.0
    assert to_grayscale(rgb(100, 200, 50)).data[0, 0] == 153


def test_grayscale_rounds_half_up():
    # checked against exact rational arithmetic, not floats
    for r, g, b in [(1, 0, 0), (0, 1, 0), (3, 5, 7), (250, 3, 128)]:
        exact = (299 * r + 587 * g + 114 * b) / 1000
        assert to_grayscale(rgb(r, g, b)).data[0, 0] == int(np.floor(exact + 0.5))


@given(arrays(np.uint8, (5, 4, 3)))
def test_grayscale_between_channel_extremes(data):
    gray = to_grayscale(Raster(data)).data
    assert (gray >= data.min(axis=2)).all()
    assert (gray <= data.max(axis=2)).all()


@given(arrays(np.uint8, (6, 7)))
def test_grayscale_idempotent_on_single_channel(data):
    img = Raster(data)
    assert to_grayscale(img) is img
    assert to_grayscale(to_grayscale(img)) == img


def test_max_intensity_examples():
    assert max_intensity(Raster(np.zeros((4, 4), np.uint8))) == 0
    assert max_intensity(Raster(np.array([[10, 200], [30, 40]], np.uint8))) == 200
    assert max_intensity(Raster(np.full((2, 2), 255, np.uint8))) == 255


@given(arrays(np.uint8, st.tuples(st.integers(1, 8), st.integers(1, 8))))
def test_max_intensity_is_attained_upper_bound(data):
    m = max_intensity(Raster(data))
    assert (data <= m).all() and (data == m).any()


def test_raster_rejects_bad_input():
    with pytest.raises(RasterError):
        Raster(np.zeros((0, 3), np.uint8))
    with pytest.raises(RasterError):
        Raster(np.zeros((2, 2, 4), np.uint8))
    with pytest.raises(RasterError):
        Raster(np.array([[256]]))


def test_raster_is_immutable():
    img = Raster(np.zeros((2, 2), np.uint8))
    with pytest.raises(ValueError):
        img.data[0, 0] = 1


def test_label_stack_invariants():
    planes = np.zeros((2, 3, 3), np.uint8)
    planes[0, 1, 1] = planes[1, 1, 1] = 1  # overlapping classes are allowed
    stack = LabelStack(("handwriting", "text"), planes)
    assert stack.plane("text")[1, 1] == 1
    with pytest.raises(RasterError):
        LabelStack(("text", "text"), planes)
    with pytest.raises(RasterError):
        LabelStack(("handwriting", "text"), planes * 2)
    with pytest.raises(RasterError):
        LabelStack(("background", "text"), planes)


def test_layer_region_must_match():
    img = Raster(np.zeros((3, 3), np.uint8))
    with pytest.raises(RasterError):
        Layer("text", img, np.ones((2, 3)))
    with pytest.raises(RasterError):
        Layer("text", Raster(np.zeros((3, 3, 3), np.uint8)))


def test_png_round_trip(tmp_path, rng):
    gray = Raster(rng.integers(0, 256, (17, 9), dtype=np.uint8))
    color = Raster(rng.integers(0, 256, (5, 6, 3), dtype=np.uint8))
    write_raster(gray, tmp_path / "g.png")
    write_raster(color, tmp_path / "c.png")
    assert read_raster(tmp_path / "g.png") == gray
    assert read_raster(tmp_path / "c.png") == color


def test_label_stack_serialisation(tmp_path, rng):
    stack = LabelStack(("handwriting", "form"), rng.integers(0, 2, (2, 8, 5)).astype(np.uint8))
    paths = write_label_stack(stack, tmp_path, "s1")
    assert [p.relative_to(tmp_path).as_posix() for p in paths] == ["handwriting/s1.png", "form/s1.png"]
    assert json.loads((tmp_path / "s1.classes.json").read_text()) == {"classes": ["handwriting", "form"]}
    assert read_label_stack(tmp_path, "s1") == stack


def test_plane_with_grey_value_is_rejected(tmp_path):
    from PIL import Image

    arr = np.zeros((4, 4), np.uint8)
    arr[2, 1] = 128
    Image.fromarray(arr).save(tmp_path / "bad.png")
    with pytest.raises(RasterError, match="128"):
        read_plane(tmp_path / "bad.png")
