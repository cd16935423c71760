import json

import numpy as np
import pytest
import yaml
from PIL import Image

from docsynth.dataset import (
    DatasetError,
    SourcePool,
    SynthesisPlan,
    filter_form_sources,
    find_dark_window,
    fit_to_canvas,
    list_images,
    load_config,
    load_sample,
    make_sample,
    regenerate_sample,
    scan_forms,
    synthesize_dataset,
    write_sample,
)
from docsynth.raster import Raster, write_raster
from docsynth.rng import RngStream


def brute_window(gray, block=10, thr=250):
    h, w = gray.shape
    for y in range(h - block + 1):
        for x in range(w - block + 1):
            if (gray[y : y + block, x : x + block] < thr).all():
                return x, y
    return None


def adversarial(seed):
    """64x64 pages with dark rectangles sized near the 10x10 limit, some broken by one white pixel."""
    r = np.random.default_rng(seed)
    img = np.full((64, 64), 255, np.uint8)
    for _ in range(r.integers(1, 4)):
        bh, bw = (int(v) for v in r.integers(8, 12, 2))
        y, x = (int(v) for v in r.integers(0, 64 - 12, 2))
        img[y : y + bh, x : x + bw] = r.integers(0, 250)
        if r.random() < 0.4:
            img[y + r.integers(0, bh), x + r.integers(0, bw)] = 250  # exactly at the threshold counts as white
    return img


def test_window_scan_matches_brute_force():
    for seed in range(50):
        img = adversarial(seed)
        assert find_dark_window(Raster(img)) == brute_window(img), seed


def test_boundary_cases():
    img = np.full((40, 40), 255, np.uint8)
    assert find_dark_window(Raster(img)) is None
    img[5:14, 7:17] = 0  # 9 rows x 10 cols
    assert find_dark_window(Raster(img)) is None
    img[5:15, 7:17] = 0
    assert find_dark_window(Raster(img)) == (7, 5)
    assert find_dark_window(Raster(np.zeros((9, 50), np.uint8))) is None


def test_filter_form_sources(tmp_path):
    clean = np.full((32, 32), 255, np.uint8)
    solid = clean.copy()
    solid[3:13, 3:13] = 0
    write_raster(Raster(clean), tmp_path / "a.png")
    write_raster(Raster(solid), tmp_path / "b.png")
    (tmp_path / "c.png").write_bytes(b"not a png")
    pool = filter_form_sources(SourcePool("form", (tmp_path / "a.png", tmp_path / "b.png", tmp_path / "c.png")))
    assert pool.paths == (tmp_path / "a.png",)
    scan = scan_forms([tmp_path / "b.png", tmp_path / "c.png"])
    assert scan.rejected[0][1] == (3, 3) and len(scan.unreadable) == 1
    with pytest.raises(DatasetError):
        filter_form_sources(SourcePool("text", (tmp_path / "a.png",)))


def test_source_pool_validation(tmp_path):
    with pytest.raises(DatasetError):
        SourcePool("text", ())
    with pytest.raises(DatasetError):
        SourcePool("text", ("a.png",), (1.0, 2.0))
    with pytest.raises(DatasetError):
        list_images(tmp_path / "missing")
    pool = SourcePool("text", ("a.png", "b.png"), (1.0, 3.0))
    picks = [pool.pick(RngStream(0, i)).name for i in range(400)]
    assert 240 < picks.count("b.png") < 360


def test_plan_validation_and_round_trip():
    plan = SynthesisPlan(count=3, canvas=64, seed=9)
    assert SynthesisPlan.from_dict(plan.to_dict()).to_dict() == plan.to_dict()
    for bad in (dict(count=0), dict(include={"stamp": 0.5}), dict(include={"text": 1.5}), dict(blank_probability=-0.1), dict(tau=256)):
        with pytest.raises(DatasetError):
            SynthesisPlan(**bad)
    with pytest.raises(DatasetError):
        SynthesisPlan.from_dict({"colour": 1})


def test_fit_to_canvas_keeps_aspect():
    src = np.zeros((50, 100), np.uint8)
    out, place = fit_to_canvas(src, 200, 0.0, 1.0)
    assert place == {"x": 0, "y": 100, "w": 200, "h": 100}
    assert (out[100:] == 0).all() and (out[:100] == 255).all()


def _pools(corpus):
    return load_config(corpus / "synth.yaml").pools


def test_load_config(corpus, tmp_path):
    cfg = load_config(corpus / "synth.yaml")
    assert set(cfg.pools) == {"background", "handwriting", "text", "form"}
    assert all(len(p.paths) == 3 for p in cfg.pools.values())
    (tmp_path / "bad.yaml").write_text("count: 4\n")
    with pytest.raises(DatasetError, match="sources"):
        load_config(tmp_path / "bad.yaml")
    (tmp_path / "bad2.yaml").write_text(yaml.safe_dump({"sources": {"background": str(corpus / "background")}, "colour": 3}))
    with pytest.raises(DatasetError, match="colour"):
        load_config(tmp_path / "bad2.yaml")


def test_blank_sample(corpus):
    plan = SynthesisPlan(count=1, canvas=96, include={c: 0.0 for c in ("handwriting", "text", "form")}, blank_probability=1.0, augmentation=None)
    sample = make_sample(plan, _pools(corpus), 0)
    assert sample.manifest["blank"] and not sample.labels.planes.any()
    assert sample.image.shape == (96, 96)


def test_sample_invariants_and_determinism(corpus):
    plan = SynthesisPlan(count=6, canvas=160, seed=3)
    pools = _pools(corpus)
    for i in range(6):
        a = make_sample(plan, pools, i)
        b = make_sample(plan, pools, i)
        assert a.image == b.image and a.labels == b.labels and a.manifest == b.manifest
        assert a.image.shape == a.labels.shape == (448, 448)
        assert set(np.unique(a.labels.planes).tolist()) <= {0, 1}


def test_regenerate_from_manifest(corpus):
    plan = SynthesisPlan(count=4, canvas=160, seed=5)
    pools = _pools(corpus)
    for i in range(4):
        s = make_sample(plan, pools, i)
        manifest = json.loads(json.dumps(s.manifest))
        r = regenerate_sample(manifest)
        assert r.image == s.image and r.labels == s.labels


def test_handwriting_inclusion_rate(corpus):
    plan = SynthesisPlan(count=100, canvas=64, seed=21, include={"handwriting": 0.9, "text": 0.0, "form": 0.0}, blank_probability=0.0, augmentation=None)
    pools = _pools(corpus)
    n = sum(bool(make_sample(plan, pools, i).labels.plane("handwriting").any()) for i in range(100))
    assert abs(n - 90) <= 4 * 3


def test_write_load_round_trip(corpus, tmp_path):
    plan = SynthesisPlan(count=1, canvas=128, seed=2)
    sample = make_sample(plan, _pools(corpus), 0)
    write_sample(sample, tmp_path)
    loaded = load_sample(tmp_path / "manifests" / "000000.json")
    assert loaded.image == sample.image and loaded.labels == sample.labels

    plane = tmp_path / "labels" / "text" / "000000.png"
    arr = np.asarray(Image.open(plane)).copy()
    arr[0, 0] = 128
    Image.fromarray(arr).save(plane)
    with pytest.raises(Exception, match="128"):
        load_sample(tmp_path / "manifests" / "000000.json")
    plane.unlink()
    with pytest.raises(DatasetError, match="text"):
        load_sample(tmp_path / "manifests" / "000000.json")


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_synthesize_dataset_layout_and_jobs(corpus, tmp_path):
    plan = SynthesisPlan(count=5, canvas=128, seed=8)
    pools = _pools(corpus)
    m1 = synthesize_dataset(plan, pools, tmp_path / "a", jobs=1)
    m2 = synthesize_dataset(plan, pools, tmp_path / "b", jobs=2)
    assert [m["sample_id"] for m in m1] == [f"{i:06d}" for i in range(5)]
    assert _tree(tmp_path / "a") == _tree(tmp_path / "b")
    files = _tree(tmp_path / "a")
    assert "plan.json" in files and "images/000004.png" in files and "labels/form/000000.png" in files
    assert "manifests/000002.json" in files


def test_synthesize_requires_pools(corpus, tmp_path):
    pools = _pools(corpus)
    with pytest.raises(DatasetError, match="background"):
        synthesize_dataset(SynthesisPlan(count=1), {k: v for k, v in pools.items() if k != "background"}, tmp_path)
    with pytest.raises(DatasetError, match="text"):
        synthesize_dataset(SynthesisPlan(count=1), {k: v for k, v in pools.items() if k != "text"}, tmp_path)
