import csv

import numpy as np
import pytest

from bttb_precond import cli, selftest, structured
from bttb_precond.pgm import read_image


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_gravity(tmp_path, capsys):
    code = cli.main(["run", "--problem", "gravity", "--n", "128", "--levels", "0.001",
                     "--seeds", "1..3", "--modes", "precond,noprecond", "--out", str(tmp_path)])
    assert code == 0
    rows = read_rows(tmp_path / "results.csv")
    assert list(rows[0]) == ["problem", "level", "seed", "mode", "p1", "p2", "q1", "q2", "k",
                             "rel_error", "residual_final", "wall_ms", "converged"]
    assert len(rows) == 6 and {r["mode"] for r in rows} == {"precond", "noprecond"}
    assert all(r["p1"] == "" for r in rows if r["mode"] == "noprecond")
    assert "0.1%" in (tmp_path / "summary.txt").read_text()


def test_run_blur_writes_images(tmp_path):
    code = cli.main(["run", "--problem", "blur", "--n", "32", "--levels", "0.01", "--seeds", "1",
                     "--modes", "precond", "--out", str(tmp_path), "--pretty"])
    assert code == 0
    assert read_image(tmp_path / "noisy_blur_L0.01_s1.pgm").shape == (32, 32)
    assert read_image(tmp_path / "restored_blur_L0.01_s1_precond.pgm").shape == (32, 32)


def test_run_image_from_file(tmp_path):
    from bttb_precond import portrait_image, write_image
    write_image(portrait_image(24), tmp_path / "in.pgm")
    code = cli.main(["run", "--problem", "image", "--image", str(tmp_path / "in.pgm"),
                     "--levels", "0.01", "--seeds", "1", "--modes", "precond,zerostart",
                     "--out", str(tmp_path / "o"), "--no-images"])
    assert code == 0
    assert len(read_rows(tmp_path / "o" / "results.csv")) == 2


def test_noise_free_tiny_gravity_does_not_crash(tmp_path, capsys):
    code = cli.main(["run", "--problem", "gravity", "--n", "16", "--levels", "0", "--seeds", "1",
                     "--out", str(tmp_path)])
    rows = read_rows(tmp_path / "results.csv")
    for r in rows:
        assert r["converged"] == "0" or float(r["residual_final"]) < 1e-8
    assert code in (0, 3)
    if code == 3:
        assert "NotConverged" in capsys.readouterr().err


def test_threads_env_gives_same_rows(tmp_path, monkeypatch):
    args = ["run", "--problem", "gravity", "--n", "64", "--levels", "0.001,0.0001", "--seeds", "1..4",
            "--modes", "precond,noprecond,zerostart"]
    cli.main(args + ["--out", str(tmp_path / "a")])
    monkeypatch.setenv("BTTB_PRECOND_THREADS", "4")
    cli.main(args + ["--out", str(tmp_path / "b")])
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]
    assert strip(read_rows(tmp_path / "a" / "results.csv")) == strip(read_rows(tmp_path / "b" / "results.csv"))


def test_bad_arguments(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["run", "--modes", "bogus"])
    assert cli.main(["run", "--gamma", "0.5", "--out", str(tmp_path)]) == 2


def test_selftest_passes(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "500/500" in out and "FAIL" not in out


def test_selftest_detects_corrupted_formula(monkeypatch, capsys):
    def wrong(T):
        return structured.Circulant(T.t)  # not the Frobenius-optimal circulant

    monkeypatch.setattr(structured, "closest_circulant", wrong)
    assert cli.main(["selftest"]) != 0
    assert "FAIL  closest circulant" in capsys.readouterr().out
