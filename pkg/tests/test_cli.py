import json

import numpy as np
import pytest

from cramerwold import GaussianMixture, GridSpec
from cramerwold.cli import main
from cramerwold.gridio import load_measure, read_grid, write_grid


def run(*argv):
    return main([str(a) for a in argv])


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [list(map(float, ln.split(","))) for ln in lines[1:]]


@pytest.fixture
def delta_file(tmp_path):
    path = tmp_path / "delta.csv"
    path.write_text("# weight,x,y,z\n1.0,0,0,0\n")
    return path


def test_forward_rows_and_values(tmp_path, delta_file):
    hs = tmp_path / "hs.csv"
    hs.write_text("omega1,omega2,omega3,p\n1,0,0,-1\n1,0,0,1\n0,1,0,0\n")
    out = tmp_path / "out.csv"
    assert run("forward", "--measure", delta_file, "--halfspaces", hs, "--out", out) == 0
    header, rows = read_rows(out)
    assert header == ["omega1", "omega2", "omega3", "p", "mass"]
    assert len(rows) == 3
    assert [r[-1] for r in rows] == [1.0, 0.0, 1.0]


def test_forward_gaussian_grid_file(tmp_path):
    grid = GaussianMixture.standard(3).to_grid(GridSpec.cell_centered([(-5, 5)] * 3, 0.1))
    head = write_grid(grid, tmp_path / "gauss")
    hs = tmp_path / "hs.csv"
    hs.write_text("1,0,0,0\n")
    out = tmp_path / "out.csv"
    assert run("forward", "--measure", head, "--halfspaces", hs, "--out", out) == 0
    assert read_rows(out)[1][0][-1] == pytest.approx(0.5, abs=5e-4)


def test_forward_random_halfspaces(tmp_path):
    out = tmp_path / "r.csv"
    assert run("forward", "--fixture", "two-point", "--dim", "2", "--random", "17", "--out", out) == 0
    assert len(read_rows(out)[1]) == 17


def test_grid_round_trip(tmp_path):
    g = GaussianMixture.standard(2).to_grid(GridSpec.centered(1.0, 0.5, 2))
    write_grid(g, tmp_path / "g.json")
    back = read_grid(tmp_path / "g.json")
    np.testing.assert_array_equal(back.values, g.values)
    np.testing.assert_array_equal(back.origin, g.origin)
    assert load_measure(tmp_path / "g.json").h == g.h


@pytest.mark.parametrize("argv,code", [
    (["reconstruct", "--fixture", "gaussian", "--dim", "2"], 2),            # even without --embed
    (["reconstruct", "--fixture", "gaussian", "--dim", "1", "--m", "2"], 2),
    (["reconstruct", "--fixture", "gaussian", "--dim", "3", "--embed"], 2),
    (["potential", "--dim", "3"], 2),                                       # no measure
    (["forward", "--measure", "missing.csv"], 3),
])
def test_exit_codes(tmp_path, argv, code):
    assert run(*argv, "--out", tmp_path / "o") == code


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run("bogus")
    assert exc.value.code == 2


def test_malformed_measure_is_io_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,0,0\n0.5,1\n")
    assert run("forward", "--measure", bad, "--out", tmp_path / "o.csv") == 3


def test_reconstruct_one_dimension(tmp_path):
    out = tmp_path / "r"
    assert run("reconstruct", "--fixture", "gaussian", "--dim", "1", "--bounds", "6", "--h", "0.05",
               "--out", out) == 0
    meta = json.loads((out / "reconstruction.meta.json").read_text())
    assert meta["errors"]["l1"] <= 0.02
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["command"] == "reconstruct" and cfg["bounds"] == [-6.0, 6.0] and cfg["h"] == 0.05
    assert (out / "reconstruction_slice_x.csv").exists()


def test_rerun_is_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run("potential", "--fixture", "two-point", "--dim", "3", "--bounds", "1.5", "--h", "0.5",
                   "--samples", "300", "--seed", "4", "--out", out) == 0
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert "config.json" in files and "potential_slice_xy.pgm" in files
    for name in files:
        a, b = (outs[0] / name).read_bytes(), (outs[1] / name).read_bytes()
        if name == "config.json":
            a, b = (json.loads(x) for x in (a, b))
            a.pop("out"), b.pop("out")
        assert a == b, name


def test_config_reproduces_run(tmp_path):
    out = tmp_path / "first"
    assert run("radon", "--fixture", "gaussian", "--dim", "3", "--bounds", "2", "--h", "0.5",
               "--samples", "40", "--out", out) == 0
    cfg = json.loads((out / "config.json").read_text())
    lo, hi = cfg["bounds"]
    argv = [cfg["command"], "--fixture", cfg["fixture"], "--dim", cfg["dim"], f"--bounds={lo},{hi}",
            "--h", cfg["h"], "--samples", cfg["samples"], "--seed", cfg["seed"],
            "--assignment", cfg["assignment"], "--out", tmp_path / "second"]
    assert run(*argv) == 0
    assert (out / "sinogram.txt").read_bytes() == (tmp_path / "second" / "sinogram.txt").read_bytes()


def test_pgm_header(tmp_path):
    out = tmp_path / "p"
    assert run("potential", "--fixture", "delta", "--dim", "3", "--bounds", "1", "--h", "0.5",
               "--samples", "50", "--out", out) == 0
    data = (out / "potential_slice_xy.pgm").read_bytes()
    assert data.startswith(b"P5\n5 5\n255\n") and len(data) == len(b"P5\n5 5\n255\n") + 25


def test_constants_table(capsys):
    assert run("constants", "--dim", "3") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,beta_n_minus_1,alpha_n,m,c_m"
    assert float(lines[3].split(",")[-1]) == pytest.approx(-8 * np.pi)


def test_verify_passes(tmp_path, capsys):
    assert run("verify", "--samples", "1000000", "--out", tmp_path / "v") == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text and text.count("PASS") == 6
    assert (tmp_path / "v" / "verify.csv").exists()


@pytest.mark.slow
def test_reconstruct_embedded_plane(tmp_path):
    out = tmp_path / "e"
    assert run("reconstruct", "--fixture", "gaussian", "--dim", "2", "--embed", "--out", out) == 0
    meta = json.loads((out / "reconstruction.meta.json").read_text())
    assert meta["errors"]["l1"] <= 0.20
    assert (out / "reconstruction_lifted.json").exists()


@pytest.mark.slow
def test_reconstruct_three_dimensions(tmp_path):
    out = tmp_path / "r3"
    assert run("reconstruct", "--fixture", "gaussian", "--dim", "3", "--out", out) == 0
    meta = json.loads((out / "reconstruction.meta.json").read_text())
    assert meta["errors"]["l1"] <= 0.15
