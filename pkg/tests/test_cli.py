import json

import numpy as np
import pytest

from billiards import (alpha_distance, load_table, multistart_search,
                       sample_unit_tangent_bundle, save_table, smooth_corners)
from billiards.cli import main


@pytest.fixture()
def table_files(square, circle, ellipse, tmp_path):
    paths = {}
    for name, tbl in (("square", square), ("circle", circle),
                      ("ellipse", ellipse)):
        p = tmp_path / f"{name}.json"
        save_table(tbl, p)
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_orbits_square(table_files, capsys, square):
    code, out = _run(capsys, "orbits", "--table", table_files["square"],
                     "--tau", "2", "--seeds", "20", "--rng", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["report"] == "orbits"
    assert len(rep["orbits"]) == 2
    assert all(o["length"] == pytest.approx(0.5, abs=1e-12)
               for o in rep["orbits"])
    # serialized parameters survive the JSON round trip bit for bit
    lib = multistart_search(square, 2, 20, rng_seed=1, tau_min=2)
    got = np.array([o["params"] for o in rep["orbits"]])
    want = np.array([o.params for o in lib])
    assert np.array_equal(got, want)


def test_orbits_deterministic(table_files, capsys):
    args = ("orbits", "--table", table_files["circle"], "--tau-max", "3",
            "--seeds", "6", "--rng", "7")
    code1, out1 = _run(capsys, *args)
    code2, out2 = _run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_map_command(table_files, capsys):
    code, out = _run(capsys, "map", "--table", table_files["square"],
                     "--start", "0.125", "--angle", "1.5707963267948966",
                     "--steps", "4")
    assert code == 0
    rep = json.loads(out)
    assert rep["report"] == "trajectory"
    assert rep["termination"] == "completed"
    assert rep["params"] == pytest.approx([0.125, 0.625] * 2 + [0.125],
                                          abs=1e-12)


def test_hessian_command(table_files, capsys):
    code, out = _run(capsys, "hessian", "--table", table_files["circle"],
                     "--params", "0.0,0.5")
    assert code == 0
    rep = json.loads(out)
    assert rep["nondegenerate"] is False
    assert abs(rep["balanced_det"]) < 1e-8


def test_hessian_not_critical_is_domain_error(table_files, capsys):
    code, _ = _run(capsys, "hessian", "--table", table_files["square"],
                   "--params", "0.1,0.55")
    assert code == 1


def test_density_command(table_files, capsys):
    code, out = _run(capsys, "density", "--table", table_files["square"],
                     "--grid", "5x5", "--tau-max", "20", "--budget", "300",
                     "--rng", "0")
    assert code == 0
    rep = json.loads(out)
    assert rep["coverage"] >= 0.9
    assert rep["grid"] == [5, 5]


def test_persist_command(table_files, capsys):
    code, out = _run(capsys, "persist", "--table", table_files["ellipse"],
                     "--params", "0.0,0.5", "--center", "0.512",
                     "--halfwidth", "0.03", "--amplitude", "1e-4")
    assert code == 0
    rep = json.loads(out)
    assert rep["survived"] is True
    assert 5e-4 <= rep["displacement"] <= 2.5e-3


def test_alpha_command_matches_library(table_files, capsys, square, circle):
    code, out = _run(capsys, "alpha", "--table", table_files["square"],
                     "--other", table_files["circle"], "--samples", "400")
    assert code == 0
    rep = json.loads(out)
    want = alpha_distance(sample_unit_tangent_bundle(square, 400),
                          sample_unit_tangent_bundle(circle, 400))
    assert rep["alpha"] == want
    assert rep["n_samples"][1] == 400  # circle is cornerless: no fan states


def test_smooth_output_is_loadable(table_files, capsys, square):
    out_path = table_files["dir"] / "smoothed.json"
    code, _ = _run(capsys, "smooth", "--table", table_files["square"],
                   "--radius", "1e-3", "--out", str(out_path))
    assert code == 0
    sm = load_table(out_path)
    assert len(sm.corners) == 0
    lib = smooth_corners(square, 1e-3)
    for s in np.linspace(0.05, 0.95, 7):
        assert np.allclose(sm.point(s), lib.point(s), atol=1e-12)


def test_approx_output_is_loadable(table_files, capsys):
    out_path = table_files["dir"] / "approx.json"
    code, _ = _run(capsys, "approx", "--table", table_files["circle"],
                   "--tol", "0.1", "--out", str(out_path))
    assert code == 0
    approx = load_table(out_path)
    assert approx.is_rational


def test_render_orbits(table_files, capsys):
    rep_path = table_files["dir"] / "orbits.json"
    code, _ = _run(capsys, "orbits", "--table", table_files["square"],
                   "--tau", "2", "--seeds", "20", "--rng", "1",
                   "--out", str(rep_path))
    assert code == 0
    code, svg = _run(capsys, "render", "--table", table_files["square"],
                     "--report", str(rep_path))
    assert code == 0
    assert svg.startswith("<?xml")
    assert "<svg" in svg
    assert svg.count("<line") == 4  # two 2-orbits
    assert svg.count('class="boundary"') == 1


def test_render_mismatched_table(table_files, capsys):
    rep_path = table_files["dir"] / "orbits.json"
    _run(capsys, "orbits", "--table", table_files["square"], "--tau", "2",
         "--seeds", "10", "--rng", "1", "--out", str(rep_path))
    code, _ = _run(capsys, "render", "--table", table_files["circle"],
                   "--report", str(rep_path))
    assert code == 1


def test_missing_table_file_is_usage_error(capsys, tmp_path):
    code, _ = _run(capsys, "orbits", "--table", str(tmp_path / "missing.json"),
                   "--tau", "2", "--seeds", "4", "--rng", "0")
    assert code == 2


def test_unparseable_table_is_domain_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = _run(capsys, "alpha", "--table", str(bad), "--other", str(bad))
    assert code == 1


def test_malformed_report_is_usage_error(table_files, capsys, tmp_path):
    rep = tmp_path / "report.json"
    rep.write_text("{broken")
    code, _ = _run(capsys, "render", "--table", table_files["square"],
                   "--report", str(rep))
    assert code == 2


def test_bad_arguments(capsys):
    assert main(["orbits", "--frobnicate"]) == 2
    assert main([]) == 2
    assert main(["--help"]) == 0
