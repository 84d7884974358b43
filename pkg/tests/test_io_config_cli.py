import json

import numpy as np
import pytest

from invsurf.cli import main, run
from invsurf.config import (grid_from_config, load_config, parse_config, serialize_config)
from invsurf.errors import EmptyMesh, FormatError, MissingRequired, TypeMismatch, UnknownKey
from invsurf.fixtures import kuen
from invsurf.grid import ParamGrid, ScalarField
from invsurf.io import (dumps_report, export_obj, read_field, read_gamma, read_mask, read_obj,
                        read_quadruple, write_field, write_gamma, write_mask, write_quadruple)

FIXTURE_CFG = """
command = fixture

[fixture]
name = kuen-canonical

[grid]
u_min = 2.6
u_max = 3.4
v_min = 0.4
v_max = 1.2
nu = 9
nv = 11
"""


# formats ---------------------------------------------------------------------

def test_field_round_trip(tmp_path, unit_grid):
    f = ScalarField.from_function(unit_grid, lambda u, v: np.sin(u) * np.exp(v) / 3)
    write_field(tmp_path / "f.field", f)
    back = read_field(tmp_path / "f.field")
    assert back.grid == unit_grid and np.array_equal(back.values, f.values)
    lines = (tmp_path / "f.field").read_text().splitlines()
    assert lines[0] == "FIELD v1" and len(lines) == 2 + unit_grid.nv


def test_mask_round_trip(tmp_path, unit_grid):
    m = np.random.default_rng(0).random(unit_grid.shape) > 0.3
    write_mask(tmp_path / "m", unit_grid, m)
    g, back = read_mask(tmp_path / "m")
    assert np.array_equal(back, m)


def test_bad_header(tmp_path):
    (tmp_path / "x").write_text("FIELD v2\n3 3 0 0 1 1\n")
    with pytest.raises(FormatError):
        read_field(tmp_path / "x")


def test_quadruple_round_trip(tmp_path):
    g = ParamGrid.from_bounds((2.6, 3.4), (0.0, 0.4), 9, 9)
    q = kuen().quadruple(g, derivatives=False)
    write_quadruple(tmp_path / "k", q)
    back = read_quadruple(tmp_path / "k")
    for name in ("nu1", "nu2", "gamma1", "gamma2"):
        a, b = getattr(q, name).values, getattr(back, name).values
        assert np.array_equal(a, b, equal_nan=True)
    assert np.array_equal(back.valid, q.valid)


def test_obj_two_by_two(tmp_path):
    P = np.zeros((2, 2, 3))
    P[1, 0, 0] = P[1, 1, 0] = 1.0
    P[0, 1, 1] = P[1, 1, 1] = 1.0
    assert export_obj(tmp_path / "a.obj", P) == (4, 2)
    V, N, F = read_obj(tmp_path / "a.obj")
    assert V.shape == (4, 3) and F.shape == (2, 3) and N.size == 0


def test_obj_masked_node(tmp_path):
    U, V = np.meshgrid(np.arange(3.0), np.arange(3.0), indexing="ij")
    P = np.stack([U, V, 0 * U], -1)
    mask = np.ones((3, 3), bool)
    mask[0, 0] = False
    assert export_obj(tmp_path / "b.obj", P, mask=mask) == (8, 6)
    mask[:] = False
    with pytest.raises(EmptyMesh):
        export_obj(tmp_path / "c.obj", P, mask=mask)


def test_obj_reimport_curvatures(tmp_path):
    from invsurf.analysis import mesh_forms
    from invsurf.grid import VectorField3
    g = ParamGrid.with_spacing((2.6, 3.4), (0.4, 1.2), 0.01)
    pts = kuen().points(g)
    export_obj(tmp_path / "k.obj", pts.values)
    V, _, _ = read_obj(tmp_path / "k.obj")
    back = V.reshape(g.nv, g.nu, 3).transpose(1, 0, 2)
    a = mesh_forms(VectorField3(g, back)).quadruple
    assert np.max(np.abs(np.abs(a.nu1.values) - np.abs(kuen().field("nu1", g).values))) < 1e-3


def test_gamma_file(tmp_path):
    v = np.linspace(0, 1, 5)
    u = np.linspace(0, 2, 7)
    write_gamma(tmp_path / "g", v, np.full(5, 0.5), np.zeros(5), u, np.ones(7))
    vv, k, t, uu, k1 = read_gamma(tmp_path / "g")
    assert np.array_equal(vv, v) and np.array_equal(uu, u) and np.all(k1 == 1)
    (tmp_path / "bad").write_text("GAMMA v1\n0 1 0\n0.5 1 0\n2 1 0\nPROFILE\n0 1\n1 1\n2 1\n")
    with pytest.raises(FormatError):
        read_gamma(tmp_path / "bad")


def test_report_floats_full_precision():
    text = dumps_report({"x": 0.1, "y": [np.float64(1 / 3)], "n": 2, "nan": float("nan")})
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    assert '"n": 2' in text and "NaN" in text


# configuration -------------------------------------------------------------------

def test_minimal_config_parses():
    cfg = parse_config(FIXTURE_CFG)
    assert cfg.command == "fixture" and cfg["grid.nu"] == 9
    assert grid_from_config(cfg).shape == (9, 11)


def test_type_mismatch():
    with pytest.raises(TypeMismatch):
        parse_config("command = solve-pde\ncase = liouville\n[newton]\ntol = banana\n")


def test_unknown_and_missing_keys():
    with pytest.raises(UnknownKey):
        parse_config(FIXTURE_CFG + "\n[extra]\nfoo = 1\n")
    with pytest.raises(MissingRequired):
        parse_config("command = fixture\n")
    with pytest.raises(TypeMismatch):
        parse_config("command = solve-pde\ncase = liouville\n[newton]\ntol = -1\n")


@pytest.mark.parametrize("name", ["kuen_reconstruct.cfg", "liouville.cfg", "torus_gamma.cfg",
                                  "kuen_reparam.cfg", "sine_gordon_kuen.cfg"])
def test_config_round_trip(configs_dir, name):
    cfg = load_config(configs_dir / name)
    again = parse_config(serialize_config(cfg), cfg.base_dir)
    assert again.values == cfg.values


def test_relative_paths_resolved(configs_dir):
    cfg = load_config(configs_dir / "liouville.cfg")
    assert cfg["boundary.file"] == (configs_dir / "liouville_boundary.field").resolve()


# runs ---------------------------------------------------------------------------

def _report(out, stem):
    return json.loads((out / f"{stem}.report.json").read_text())


def test_run_fixture(tmp_path):
    rep, code = run(parse_config(FIXTURE_CFG), tmp_path)
    assert code == 0 and rep["verdict"] == "PASS"
    assert rep["mesh"] == {"vertices": 99, "triangles": 2 * 8 * 10}
    assert (tmp_path / "fixture.nu1").exists() and (tmp_path / "fixture.obj").exists()


def test_runs_are_deterministic(tmp_path):
    run(parse_config(FIXTURE_CFG), tmp_path / "a")
    run(parse_config(FIXTURE_CFG), tmp_path / "b")
    for suffix in (".nu1", ".nu2", ".g1", ".g2", ".mask", ".obj"):
        assert (tmp_path / "a" / f"fixture{suffix}").read_bytes() == \
            (tmp_path / "b" / f"fixture{suffix}").read_bytes()


def test_run_reconstruct(configs_dir, tmp_path):
    rep, code = run(load_config(configs_dir / "kuen_reconstruct.cfg"), tmp_path)
    assert code == 0 and rep["verdict"] == "PASS"
    assert rep["mesh"] == {"vertices": 161 * 161, "triangles": 2 * 160 * 160}
    assert _report(tmp_path, "reconstruct")["verdict"] == "PASS"


def test_run_liouville(configs_dir, tmp_path):
    rep, code = run(load_config(configs_dir / "liouville.cfg"), tmp_path)
    assert code == 0
    orders = [r["order"] for r in rep["convergence"] if r["order"] is not None]
    assert orders and all(1.8 <= o <= 2.2 for o in orders)


def test_run_gamma(configs_dir, tmp_path):
    rep, code = run(load_config(configs_dir / "torus_gamma.cfg"), tmp_path)
    assert code == 0 and rep["rotational_test"]["passed"]


@pytest.mark.parametrize("name", ["kuen_analyze.cfg", "kuen_reparam.cfg", "sine_gordon_kuen.cfg",
                                  "kuen_fixture.cfg"])
def test_shipped_configs_pass(configs_dir, tmp_path, name):
    rep, code = run(load_config(configs_dir / name), tmp_path)
    assert code == 0, rep.get("error") or rep.get("verdicts")


def test_failed_verdict_exit_code(configs_dir, tmp_path):
    text = (configs_dir / "torus_gamma.cfg").read_text().replace("expect_rotational = true",
                                                                "expect_rotational = false")
    cfg = parse_config(text, configs_dir)
    rep, code = run(cfg, tmp_path)
    assert code == 2 and rep["verdict"] == "FAIL"


def test_error_still_writes_report(tmp_path):
    cfg = parse_config("command = analyze\n")
    rep, code = run(cfg, tmp_path)
    assert code == 1 and _report(tmp_path, "analyze")["error"]["type"] == "MissingRequired"


def test_main_entry(tmp_path, capsys):
    cfgfile = tmp_path / "f.cfg"
    cfgfile.write_text(FIXTURE_CFG)
    assert main(["fixture", "--config", str(cfgfile), "--out", str(tmp_path / "o")]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["gamma", "--config", str(cfgfile), "--out", str(tmp_path / "o")]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("command = solve-pde\ncase = liouville\n[newton]\ntol = banana\n")
    assert main(["solve-pde", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1


def test_threads_recorded(tmp_path, monkeypatch):
    monkeypatch.setenv("THREADS", "3")
    rep, _ = run(parse_config(FIXTURE_CFG), tmp_path)
    assert rep["threads"] == "3"
