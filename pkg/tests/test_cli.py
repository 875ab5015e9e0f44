import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hamred import __version__
from hamred.cli import main, parse_complex
from hamred.core import ValidationError
from hamred.trajectory import Trajectory


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_about(capsys):
    code, out, _ = run(["--about"], capsys)
    d = json.loads(out)
    assert code == 0 and d["version"] == __version__
    assert set(d["verbs"]) == {"orbit", "transform", "winding", "bracket-check", "reduce", "spectrum"}


def test_parse_complex():
    assert parse_complex("1,-2.5") == 1 - 2.5j
    assert parse_complex("3") == 3
    with pytest.raises(ValidationError):
        parse_complex("1,2,3")
    with pytest.raises(ValidationError):
        parse_complex("a,b")


def test_orbit_transform_winding_pipeline(tmp_path, capsys):
    osc, kep = tmp_path / "osc.csv", tmp_path / "kep.csv"
    code, _, _ = run(["orbit", "--system", "oscillator2d", "--omega", "1", "--z0", "1,0", "--pi0", "0,1",
                      "--dt", "0.001", "--t-end", "6.2832", "-o", str(osc)], capsys)
    assert code == 0
    tr = Trajectory.read_csv(osc)
    assert abs(len(tr) - 6283) <= 3
    assert tr.t[-1] == pytest.approx(6.2832)
    # t_end is 1.5e-5 past 2 pi, so the gap is that arc length
    assert abs(tr.position[-1] - tr.position[0]) < 2e-5
    code, _, _ = run(["transform", "--map", "bohlin", "--input", str(osc), "--reparametrize", "--output", str(kep)],
                     capsys)
    assert code == 0
    code, out, _ = run(["winding", "--input", str(kep), "--center", "0,0"], capsys)
    d = json.loads(out)
    assert code == 0 and d["turns"] == 2
    # z' = conj(pi) starts at -i here, a clockwise round
    assert d["winding"] == -2 and d["orientation"] == "clockwise"


def test_orbit_closes_on_exact_period(capsys):
    code, out, _ = run(["orbit", "--system", "oscillator2d", "--z0", "1,0", "--pi0", "0,-1", "--dt", "0.001",
                        "--t-end", repr(2 * math.pi), "--format", "json"], capsys)
    d = json.loads(out)
    assert code == 0 and d["closure"] < 1e-6
    assert d["config"]["options"]["system"] == "oscillator2d"


def test_winding_zhukovski(capsys):
    code, out, _ = run(["winding", "--zhukovski", "2", "--map", "bohlin"], capsys)
    assert json.loads(out)["winding"] == 2
    code, out, _ = run(["winding", "--zhukovski", "2", "--map", "zn", "--N", "3"], capsys)
    d = json.loads(out)
    assert d["winding"] == 3 and d["warnings"]


def test_bracket_check(capsys):
    code, out, _ = run(["bracket-check", "--algebra", "su2", "--points", "100", "--seed", "7"], capsys)
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["report"]["max_rel"] < 1e-8
    assert d["config"]["options"]["seed"] == 7


def test_bracket_check_failure_exit_3(capsys):
    code, out, err = run(["bracket-check", "--algebra", "coulomb", "--points", "5", "--fd", "--tol", "1e-30"], capsys)
    assert code == 3
    assert json.loads(err)["exit_code"] == 3
    assert json.loads(out)["passed"] is False


def test_reduce(capsys):
    code, out, _ = run(["reduce", "--space", "euclidean", "--m", "1", "--s", "0.5", "--samples", "20",
                        "--seed", "1", "--gauge", "mean"], capsys)
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert d["gauge"]["admissibility"]["admissible"]
    assert d["gauge"]["total_flux"] == pytest.approx(-2 * math.pi, rel=1e-3)
    code, out, _ = run(["reduce", "--space", "split", "--m", "-1", "--s", "0.3", "--samples", "10"], capsys)
    d = json.loads(out)
    assert code == 0 and d["gauge"]["admissibility"]["exchange_phase"] == pytest.approx(0.6 * math.pi)


def test_spectrum_csv(capsys):
    code, out, _ = run(["spectrum", "--sigma", "1/2", "--nr-max", "1", "--m-max", "1", "--oracle", "--csv"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "Nr,m_sigma,E_formula,E_oracle,rel_err"
    rows = [l.split(",") for l in lines[1:]]
    assert all(float(r[4]) < 5e-3 for r in rows)
    assert float(rows[0][2]) == pytest.approx(-0.5)


def test_spectrum_as_printed(capsys):
    code, out, _ = run(["spectrum", "--sigma", "0", "--nr-max", "0", "--m-max", "0", "--as-printed"], capsys)
    d = json.loads(out)
    assert d["levels"][0]["E_formula"] == pytest.approx(-4.0) and d["prefactor"] == 1.0


def test_config_merge_flags_win(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"alpha": 2.0, "mu": 3.0}, "options": {"nr_max": 0, "m_max": 0}}))
    code, out, _ = run(["spectrum", "--config", str(cfg), "--alpha", "1"], capsys)
    d = json.loads(out)
    assert code == 0
    assert d["config"]["params"]["alpha"] == 1.0 and d["config"]["params"]["mu"] == 3.0
    assert len(d["levels"]) == 1
    assert d["levels"][0]["E_formula"] == pytest.approx(-0.5 * 3.0 / 0.25)


@pytest.mark.parametrize("args,code", [
    (["orbit", "--system", "nope"], 2),
    (["orbit", "--system", "coulomb2d", "--w0", "0,0", "--p0", "1,0"], 2),
    (["orbit", "--system", "coulomb2d", "--w0", "1,0", "--p0", "0,0", "--t-end", "3"], 3),
    (["orbit", "--system", "oscillator2d"], 2),
    (["orbit", "--system", "oscillator2d", "--z0", "1,0", "--pi0", "0,1", "--dt", "-1"], 2),
    (["spectrum", "--sigma", "2"], 2),
    (["winding", "--input", "/nonexistent.csv"], 2),
    (["bogus"], 2),
    ([], 2),
    (["reduce", "--space", "split", "--m", "1"], 2),
    (["orbit", "--mu", "0"], 2),
])
def test_exit_codes(args, code, capsys):
    got, _, err = run(args, capsys)
    assert got == code
    e = json.loads(err)
    assert e["exit_code"] == code and e["message"]


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["spectrum", "--config", str(bad)], capsys)[0] == 2
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"verb": "orbit"}))
    assert run(["spectrum", "--config", str(other)], capsys)[0] == 2
    unknown = tmp_path / "u.json"
    unknown.write_text(json.dumps({"frobnicate": 1}))
    assert run(["spectrum", "--config", str(unknown)], capsys)[0] == 2


def test_transform_svg_and_kepler(tmp_path, capsys):
    svg = tmp_path / "z.svg"
    assert run(["transform", "--zhukovski", "2", "--format", "svg", "-o", str(svg)], capsys)[0] == 0
    text = svg.read_text()
    assert text.count("<polyline") == 2
    kep = tmp_path / "k.csv"
    assert run(["transform", "--zhukovski", "2", "--kepler", "--reparametrize", "-o", str(kep)], capsys)[0] == 0
    tr = Trajectory.read_csv(kep)
    assert np.all(np.diff(tr.t) > 0)


def test_dyon_and_sphere_orbits(capsys):
    code, out, _ = run(["orbit", "--system", "dyon3d", "--s", "1", "--q0", "2,0,0", "--p0", "0,0.5,0",
                        "--dt", "0.002", "--t-end", "2", "--format", "json"], capsys)
    d = json.loads(out)
    assert code == 0 and d["drift"]["H"]["relative"] < 1e-9
    code, out, _ = run(["orbit", "--system", "spheremonopole", "--m", "1", "--s", "0.5", "--p0", "1,0",
                        "--w0=-0.3,-0.3", "--dt", "3e-4", "--t-end", "0.3", "--format", "json"], capsys)
    d = json.loads(out)
    assert code == 0 and d["charts_visited"] == [0, 1]
    assert max(e["relative"] for e in d["drift"].values()) < 1e-7


def test_module_entry_point_deterministic(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        subprocess.run([sys.executable, "-m", "hamred", "bracket-check", "--algebra", "e3", "--points", "10",
                        "--seed", "3", "--fd", "--tol", "1e-7", "-o", "b.json"], check=True, cwd=d)
        outs.append((d / "b.json").read_bytes())
    assert outs[0] == outs[1]
