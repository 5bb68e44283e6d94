import json
import shutil
from pathlib import Path

import pytest

from kramersplots import ArtifactError, build_figure, load_run
from kramersplots.cli import main

DATA = Path(__file__).parent / "data"
RUNS = ["relax", "slowcompare", "decohere", "linewidth"]


@pytest.mark.parametrize("name", RUNS)
def test_load_run_roundtrip(name):
    run = load_run(DATA / name)
    assert run["experiment"] == name
    assert run["manifest"]["schema"] == 1
    assert run["summary"] is not None


@pytest.mark.parametrize("name", RUNS)
def test_build_each_figure(name):
    fig, meta = build_figure(load_run(DATA / name))
    assert fig.axes
    import matplotlib.pyplot as plt

    plt.close(fig)


def test_cli_writes_all_figures(tmp_path):
    out = tmp_path / "img"
    assert main(["--in", str(DATA), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == sorted(f"{n}.png" for n in RUNS)


def test_cli_byte_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["--in", str(DATA), "--out", str(out1)]) == 0
    assert main(["--in", str(DATA), "--out", str(out2)]) == 0
    for name in RUNS:
        b1 = (out1 / f"{name}.png").read_bytes()
        b2 = (out2 / f"{name}.png").read_bytes()
        assert b1 == b2, f"{name}.png differs between runs"


def test_slope_annotations_echo_json_exactly():
    run_dir = DATA / "slowcompare"
    run = load_run(run_dir)
    manifest = json.loads((run_dir / "run_manifest.json").read_text())
    summary_file = [a["file"] for a in manifest["artifacts"] if a["kind"] == "json"][0]
    summary = json.loads((run_dir / summary_file).read_text())
    _, meta = build_figure(run)
    assert meta["order_h1"] == f"fitted order {summary['fitted_order_h1']}"
    assert meta["order_h0"] == f"fitted order {summary['fitted_order_h0']}"
    import matplotlib.pyplot as plt

    plt.close("all")


def test_empty_dir_nonzero_exit(tmp_path, capsys):
    empty = tmp_path / "nothing"
    empty.mkdir()
    assert main(["--in", str(empty), "--out", str(tmp_path / "img")]) == 2
    assert "no run manifests" in capsys.readouterr().err
    assert not (tmp_path / "img").exists() or not list((tmp_path / "img").iterdir())


def test_missing_column_named_error(tmp_path):
    src = DATA / "linewidth"
    dst = tmp_path / "linewidth"
    shutil.copytree(src, dst)
    manifest = json.loads((dst / "run_manifest.json").read_text())
    sweep = [a["file"] for a in manifest["artifacts"] if a["table"] == "sweep"][0]
    lines = (dst / sweep).read_text().split("\n")
    lines[0] = lines[0].replace("de_phys", "blurred")
    (dst / sweep).write_text("\n".join(lines))
    with pytest.raises(ArtifactError, match="de_phys"):
        build_figure(load_run(dst))


def test_wrong_schema_rejected(tmp_path):
    src = DATA / "relax"
    dst = tmp_path / "relax"
    shutil.copytree(src, dst)
    manifest = json.loads((dst / "run_manifest.json").read_text())
    manifest["schema"] = 99
    (dst / "run_manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(ArtifactError, match="schema"):
        load_run(dst)


def test_missing_referenced_file(tmp_path):
    src = DATA / "relax"
    dst = tmp_path / "relax"
    shutil.copytree(src, dst)
    manifest = json.loads((dst / "run_manifest.json").read_text())
    victim = manifest["artifacts"][0]["file"]
    (dst / victim).unlink()
    with pytest.raises(ArtifactError, match="missing file"):
        load_run(dst)


def test_scan_skips_unplottable_runs(tmp_path, capsys):
    # a directory mixing plottable runs with a verify-ops run (string-valued
    # checks table, no figure type) plots what it can and skips the rest
    for name in ("relax", "linewidth"):
        shutil.copytree(DATA / name, tmp_path / name)
    vdir = tmp_path / "verifyops"
    vdir.mkdir()
    (vdir / "checks.csv").write_text("name,defect,tolerance,status,detail\nfoo,1e-12,1e-8,pass,\n")
    manifest = {"schema": 1, "experiment": "verify-ops", "created": "x",
                "package_version": "0.1.0", "config": {},
                "artifacts": [{"kind": "csv", "table": "checks", "file": "checks.csv"}]}
    (vdir / "run_manifest.json").write_text(json.dumps(manifest))
    out = tmp_path / "img"
    assert main(["--in", str(tmp_path), "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "skipping verifyops" in captured.err
    assert sorted(p.name for p in out.iterdir()) == ["linewidth.png", "relax.png"]


def test_single_unplottable_run_errors(tmp_path, capsys):
    vdir = tmp_path
    (vdir / "checks.csv").write_text("name,defect\nfoo,1e-12\n")
    manifest = {"schema": 1, "experiment": "verify-ops", "created": "x",
                "package_version": "0.1.0", "config": {},
                "artifacts": [{"kind": "csv", "table": "checks", "file": "checks.csv"}]}
    (vdir / "run_manifest.json").write_text(json.dumps(manifest))
    assert main(["--in", str(vdir), "--out", str(tmp_path / "img")]) == 2
    assert "no figure builder" in capsys.readouterr().err
