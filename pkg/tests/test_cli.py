import json

import numpy as np
import pytest

from hexmass.analysis import mass_exact
from hexmass.cli import main
from hexmass.hex8 import Hex8
from hexmass.mesh import GridSpec, Mesh, PerturbedSpec, dumps_mesh, generate, read_mesh

import inp_fixtures as fx


@pytest.fixture
def cube_json(tmp_path):
    p = tmp_path / "cube.json"
    p.write_text(dumps_mesh(generate(GridSpec())))
    return p


@pytest.fixture
def bad_json(tmp_path):
    m = generate(PerturbedSpec(GridSpec((3, 3, 3)), 0.3, seed=42))
    p = tmp_path / "bad.json"
    p.write_text(dumps_mesh(m))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_weights_csv(capsys):
    code, out, _ = run(capsys, "weights", "--rule", "cmd", "--format", "csv")
    rows = out.splitlines()
    assert code == 0
    assert len(rows) == 36
    assert rows[0] == "1,1,1,8,27"


def test_weights_json_to_file(capsys, tmp_path):
    path = tmp_path / "lmd.json"
    code, out, _ = run(capsys, "weights", "--rule", "lmd", "-o", path)
    assert code == 0 and out == ""
    data = json.loads(path.read_text())
    assert data["name"] == "lmd"
    assert data["weights"][1][0][0] == "-40/27"


def test_mass_matches_exact(capsys, cube_json):
    code, out, _ = run(capsys, "mass", "--mesh", cube_json, "--element", 0, "--rule", "lmd", "--density", "1")
    assert code == 0
    m = np.loadtxt(out.splitlines())
    exact = mass_exact(Hex8.box())
    assert np.abs(m - exact).max() / np.abs(exact).max() < 1e-13


def test_mass_exact_and_lump(capsys, cube_json):
    code, out, _ = run(capsys, "mass", "--mesh", cube_json, "--element", 0, "--rule", "exact", "--lump")
    m = np.loadtxt(out.splitlines())
    assert code == 0
    np.testing.assert_allclose(np.diag(m), 1 / 8, rtol=1e-14)


def test_mass_with_density_expression(capsys, cube_json):
    code, out, _ = run(capsys, "mass", "--mesh", cube_json, "--element", 0, "--rule", "tensor2",
                       "--density", "1 + 0.5*x")
    assert code == 0
    assert np.loadtxt(out.splitlines())[0, 0] == pytest.approx(2 / 9 / 8)


def test_mass_element_out_of_range(capsys, cube_json):
    code, _, err = run(capsys, "mass", "--mesh", cube_json, "--element", 3, "--rule", "g1")
    assert code == 1
    assert err.startswith("hexmass: error:")


def test_study_markdown(capsys, bad_json):
    code, out, _ = run(capsys, "study", "--mesh", bad_json, "--rules", "g1,g4,g6,cmd,lmd", "--format", "md")
    assert code == 0
    rows = [l for l in out.splitlines() if l.startswith("| ") and not l.startswith("| rule")]
    assert [r.split("|")[1].strip() for r in rows] == ["g1", "g4", "g6", "cmd", "lmd"]


def test_study_csv_deterministic(capsys, bad_json, tmp_path):
    args = ["study", "--mesh", bad_json, "--rules", "g1,lmd", "--format", "csv"]
    _, a, _ = run(capsys, *args, "--threads", 1)
    _, b, _ = run(capsys, *args, "--threads", 3)
    assert a == b
    assert a.splitlines()[0].startswith("label,rule")


def test_study_warns_on_negative_metric(capsys, tmp_path):
    m = generate(GridSpec((2, 1, 1)))
    conn = m.elements.copy()
    conn[1, [0, 1]] = conn[1, [1, 0]]
    p = tmp_path / "inv.json"
    p.write_text(dumps_mesh(Mesh(m.nodes, conn, "inv")))
    code, out, err = run(capsys, "study", "--mesh", p, "--rules", "g1")
    assert code == 0
    assert "warning" in err and "negative metric" in err
    code, out, _ = run(capsys, "study", "--mesh", p, "--rules", "g1", "--policy", "drop", "--format", "csv")
    assert out.splitlines()[1].split(",")[2] == "1"


@pytest.mark.parametrize(
    "argv",
    [
        ["study", "--mesh", "x.json", "--rules", "g1,g5"],
        ["mass", "--mesh", "x.json", "--element", "0", "--rule", "g1", "--density", "1 + w"],
        ["weights", "--rule", "g4"],
        ["bench"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_missing_file_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "study", "--mesh", tmp_path / "nope.json")
    assert code == 1 and "hexmass: error" in err


def test_mesh_gen_import_check(capsys, tmp_path):
    out_json = tmp_path / "p.json"
    code, _, _ = run(capsys, "mesh", "gen", "--kind", "perturbed", "--divisions", 3, 3, 3,
                     "--amplitude", 0.3, "--seed", 4, "-o", out_json)
    assert code == 0
    m = read_mesh(out_json)
    assert m.n_elements == 27 and m.meta["seed"] == 4

    code, out, _ = run(capsys, "mesh", "gen", "--kind", "annulus", "--divisions", 4, 4, 1)
    assert json.loads(out)["meta"]["generator"] == "annulus"

    inp = tmp_path / "deck.inp"
    inp.write_text(fx.MIXED)
    code, out, err = run(capsys, "mesh", "import", inp)
    assert code == 0
    assert len(json.loads(out)["elements"]) == 2
    assert "C3D4" in err

    code, out, _ = run(capsys, "mesh", "check", "--mesh", out_json)
    assert code == 0
    assert "elements: 27" in out
    assert "negative-metric elements: 0" in out


def test_mesh_gen_inp_output(capsys, tmp_path):
    p = tmp_path / "g.inp"
    code, _, _ = run(capsys, "mesh", "gen", "--kind", "grid", "--divisions", 2, 1, 1, "-o", p)
    assert code == 0
    assert read_mesh(p).n_elements == 2


def test_mesh_import_bad_reference(capsys, tmp_path):
    inp = tmp_path / "bad.inp"
    inp.write_text(fx.BAD_REFERENCE)
    code, _, err = run(capsys, "mesh", "import", inp)
    assert code == 1
    assert f"line {fx.BAD_REFERENCE_LINE}" in err


def test_bench(capsys, cube_json):
    code, out, _ = run(capsys, "bench", "--mesh", cube_json, "--rules", "g4,lmd", "--repeat", 2)
    assert code == 0
    assert "| g4 | 4 | 36 |" in out and "| lmd | 4 | 144 |" in out


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "hexmass", "weights", "--rule", "cmd", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "1,1,1,8,27"
