import json
import shutil
import subprocess
import sys

import numpy as np
import pytest
import yaml

from docsynth.cli import main
from docsynth.raster import Raster, read_raster, write_plane, write_raster


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_synth_usage_errors(capsys, corpus, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--out", str(tmp_path)])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--config", str(corpus / "synth.yaml"), "--out", str(tmp_path), "--count", "0"])
    assert exc.value.code == 2
    capsys.readouterr()
    code, _, err = run(capsys, "synth", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o"))
    assert code == 1 and "nope.yaml" in err


def test_synth_writes_tree(capsys, corpus, tmp_path):
    code, out, _ = run(capsys, "synth", "--config", str(corpus / "synth.yaml"), "--out", str(tmp_path / "ds"), "--count", "3", "--size", "128", "--seed", "4", "--no-augment")
    assert code == 0
    assert json.loads(out)["samples"] == 3
    img = read_raster(tmp_path / "ds" / "images" / "000002.png")
    assert img.shape == (128, 128)
    assert len(list((tmp_path / "ds" / "manifests").glob("*.json"))) == 3


def test_patch_split_and_join(capsys, tmp_path):
    img = Raster(np.random.default_rng(0).integers(0, 256, (768, 768), dtype=np.uint8))
    write_raster(img, tmp_path / "page.png")
    code, out, _ = run(capsys, "patch", "--in", str(tmp_path / "page.png"), "--size", "256", "--out", str(tmp_path / "tiles"))
    assert code == 0 and json.loads(out)["patches"] == 9
    assert len(list((tmp_path / "tiles").glob("page_r*_c*.png"))) == 9
    code, _, _ = run(capsys, "patch", "--in", str(tmp_path / "tiles"), "--out", str(tmp_path / "joined"), "--join")
    assert code == 0 and read_raster(tmp_path / "joined" / "page.png") == img


def test_patch_bad_size(capsys, tmp_path):
    write_raster(Raster.full(10, 10), tmp_path / "p.png")
    code, _, err = run(capsys, "patch", "--in", str(tmp_path / "p.png"), "--size", "0", "--out", str(tmp_path / "t"))
    assert code == 2 and "size" in err
    code, _, _ = run(capsys, "patch", "--in", str(tmp_path / "empty"), "--out", str(tmp_path / "t"), "--join")
    assert code == 1


def _gt_tree(root, seed=0, blank=False):
    r = np.random.default_rng(seed)
    for cls in ("handwriting", "text"):
        for stem in ("a", "b"):
            plane = np.zeros((20, 30), np.uint8) if blank else (r.random((20, 30)) < 0.3).astype(np.uint8)
            write_plane(plane, root / cls / f"{stem}.png")


def test_eval_copy_scores_one(capsys, tmp_path):
    _gt_tree(tmp_path / "gt")
    shutil.copytree(tmp_path / "gt", tmp_path / "pred")
    code, out, _ = run(capsys, "eval", "--pred", str(tmp_path / "pred"), "--gt", str(tmp_path / "gt"), "--classes", "handwriting,text", "--report", str(tmp_path / "r.json"))
    assert code == 0
    for line in out.strip().splitlines():
        row = json.loads(line)
        assert row["mean_f_measure"] == row["mean_pf_measure"] == row["mean_iou"] == row["mean_dice"] == 1.0
        assert row["mean_fp_percent"] is None
    report = json.loads((tmp_path / "r.json").read_text())
    assert len(report["text"]["per_image"]) == 2


def test_eval_blank_gt_fp_zero(capsys, tmp_path):
    _gt_tree(tmp_path / "gt", blank=True)
    shutil.copytree(tmp_path / "gt", tmp_path / "pred")
    code, out, _ = run(capsys, "eval", "--pred", str(tmp_path / "pred"), "--gt", str(tmp_path / "gt"), "--classes", "handwriting,text", "--report", str(tmp_path / "r.json"))
    assert code == 0
    row = json.loads(out.splitlines()[0])
    assert row["mean_fp_percent"] == 0.0 and row["mean_f_measure"] is None


def test_eval_dimension_mismatch_names_file(capsys, tmp_path):
    _gt_tree(tmp_path / "gt")
    shutil.copytree(tmp_path / "gt", tmp_path / "pred")
    write_plane(np.zeros((21, 30), np.uint8), tmp_path / "pred" / "text" / "b.png")
    code, _, err = run(capsys, "eval", "--pred", str(tmp_path / "pred"), "--gt", str(tmp_path / "gt"), "--classes", "handwriting,text", "--report", str(tmp_path / "r.json"))
    assert code != 0 and "b.png" in err


def test_filter_forms(capsys, tmp_path):
    clean = np.full((30, 30), 255, np.uint8)
    thin = clean.copy()
    thin[2:11, 2:12] = 0  # 9x10, retained
    solid = clean.copy()
    solid[2:12, 2:12] = 0
    for name, arr in (("clean", clean), ("thin", thin), ("solid", solid)):
        write_raster(Raster(arr), tmp_path / "forms" / f"{name}.png")
    code, out, _ = run(capsys, "filter-forms", "--in", str(tmp_path / "forms"), "--out", str(tmp_path / "keep.json"))
    assert code == 0 and json.loads(out) == {"command": "filter-forms", "kept": 2, "rejected": 1, "unreadable": 0}
    report = json.loads((tmp_path / "keep.json").read_text())
    assert report["rejected"][0]["path"].endswith("solid.png")
    code, _, _ = run(capsys, "filter-forms", "--in", str(tmp_path / "missing"), "--out", str(tmp_path / "k.json"))
    assert code == 1


@pytest.mark.parametrize("kind", ["grid", "noise", "strokes", "text"])
def test_gen_kinds(capsys, tmp_path, kind):
    code, out, _ = run(capsys, "gen", kind, "--out", str(tmp_path), "--count", "2", "--size", "64")
    assert code == 0 and len(list(tmp_path.glob(f"{kind}_*.png"))) == 2


def test_filter_forms_empty_dir(capsys, tmp_path):
    (tmp_path / "empty").mkdir()
    code, out, _ = run(capsys, "filter-forms", "--in", str(tmp_path / "empty"), "--out", str(tmp_path / "k.json"))
    assert code == 0 and json.loads(out)["kept"] == 0
    assert json.loads((tmp_path / "k.json").read_text()) == {"kept": [], "rejected": [], "unreadable": []}


def test_synth_repeat_is_identical(capsys, corpus, tmp_path):
    for run_dir in ("x", "y"):
        code, _, _ = run(capsys, "synth", "--config", str(corpus / "synth.yaml"), "--out", str(tmp_path / run_dir), "--count", "1", "--seed", "7", "--size", "128")
        assert code == 0
    tree = lambda root: {p.relative_to(root).as_posix(): p.read_bytes() for p in root.rglob("*") if p.is_file()}
    assert tree(tmp_path / "x") == tree(tmp_path / "y")


def test_gen_corpus_config(corpus):
    cfg = yaml.safe_load((corpus / "synth.yaml").read_text())
    assert set(cfg["sources"]) == {"background", "handwriting", "text", "form"}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "docsynth", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "docsynth" in res.stdout


@pytest.mark.skipif("native" not in __import__("docsynth.kernels").kernels.available_backends(), reason="extension not built")
def test_synth_identical_across_kernel_backends(corpus, tmp_path):
    trees = {}
    for name in ("native", "python"):
        args = ["synth", "--config", str(corpus / "synth.yaml"), "--out", str(tmp_path / name), "--count", "4", "--size", "160", "--seed", "3"]
        script = f"import sys; from docsynth import kernels; kernels.use_backend({name!r}); from docsynth.cli import main; sys.exit(main({args!r}))"
        subprocess.run([sys.executable, "-c", script], check=True, capture_output=True)
        root = tmp_path / name
        trees[name] = {p.relative_to(root).as_posix(): p.read_bytes() for p in root.rglob("*.png")}
    assert trees["native"] == trees["python"]
