from __future__ import annotations

import csv
import json
import math

import pytest

from isocap import cli
from isocap.cli import EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, main


@pytest.fixture
def shape_file(tmp_path):
    def write(obj, name="shape.json"):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    return write


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_bounds_on_ball(tmp_path, shape_file, capsys):
    out = tmp_path / "out"
    code = main(["bounds", shape_file({"kind": "ball", "radius": 1.0}), "--out", str(out)])
    assert code == EXIT_OK
    rows = read_csv(out / "report.csv")
    slack = {r["bound"]: float(r["slack"]) for r in rows}
    assert slack["perimeter_integral"] == pytest.approx(1.0, rel=1e-8)
    assert slack["parallel_volume"] == pytest.approx(9 / 4, rel=1e-8)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "bounds" and man["seed"] == 0
    assert "ball(d=3,R=1)" in capsys.readouterr().out


def test_capacity_exact_ellipsoid(tmp_path, shape_file):
    out = tmp_path / "o"
    assert main(["capacity", shape_file({"kind": "ellipsoid", "semi_axes": [2, 1, 1]}), "--out", str(out)]) == 0
    row = read_csv(out / "report.csv")[0]
    assert float(row["capacity"]) == pytest.approx(16.527174043782797, rel=1e-10)
    assert row["method"] == "quadrature"


def test_segment_family_is_reported_as_capacity_zero(tmp_path, shape_file):
    out = tmp_path / "o"
    code = main(["bounds", shape_file({"kind": "segment_family", "alpha": 1.0}), "--out", str(out)])
    assert code == EXIT_OK
    rep = json.loads((out / "report.json").read_text())["reports"][0]
    assert rep["capacity_zero"]
    assert float(read_csv(out / "report.csv")[0]["reference"]) == 0.0


@pytest.mark.parametrize("argv", [
    ["bounds", "/nonexistent/shape.json"],
    ["sausage", "--d", "4", "--check-bounds"],
    ["sausage", "--dt", "1.0"],
    ["verify", "nosuchsuite"],
    ["functional", "SHAPE", "--kind", "J_alpha"],
    ["frobnicate"],
])
def test_input_errors_exit_1(argv, tmp_path, shape_file):
    argv = [a if a != "SHAPE" else shape_file({"kind": "ball", "radius": 1.0}) for a in argv]
    assert main(argv + ["--out", str(tmp_path)] if argv[0] != "frobnicate" else argv) == EXIT_INPUT


def test_malformed_shape_exits_1(tmp_path, shape_file):
    assert main(["capacity", shape_file({"kind": "ellipsoid"}), "--out", str(tmp_path)]) == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["capacity", str(bad), "--out", str(tmp_path)]) == EXIT_INPUT


def test_violation_exits_2(monkeypatch, tmp_path, shape_file):
    from isocap import bounds

    # a bound that undercuts the reference must be reported as a violation
    monkeypatch.setattr(bounds, "bound_p2_over_v", lambda shape, cfg=None: 1.0)
    code = main(["bounds", shape_file({"kind": "ellipsoid", "semi_axes": [2, 1, 1]}), "--out", str(tmp_path)])
    assert code == EXIT_VIOLATION


def test_config_file_sets_defaults_and_flags_override(tmp_path, shape_file):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nseed = 7\nsamples = 3000\n")
    shape = shape_file({"kind": "box", "half_widths": [0.5, 0.5, 0.5]})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["capacity", shape, "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["capacity", shape, "--config", str(cfg), "--seed", "8", "--out", str(b)]) == 0
    ma, mb = (json.loads((p / "manifest.json").read_text()) for p in (a, b))
    assert ma["seed"] == 7 and mb["seed"] == 8
    bad = tmp_path / "bad.cfg"
    bad.write_text("no equals sign here\n")
    assert main(["capacity", shape, "--config", str(bad), "--out", str(a)]) == EXIT_INPUT


def test_same_seed_gives_identical_csv(tmp_path, shape_file):
    shape = shape_file({"kind": "box", "half_widths": [0.5, 0.3, 0.2]})
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for o in outs:
        assert main(["torsion", shape, "--seed", "3", "--samples", "2000", "--out", str(o)]) == 0
    assert (outs[0] / "report.csv").read_bytes() == (outs[1] / "report.csv").read_bytes()


def test_sausage_command(tmp_path):
    code = main(["sausage", "--d", "5", "--eps", "1", "--t-max", "2", "--dt", "4e-3", "--paths", "6",
                 "--points", "1000", "--seed", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["capacity"] == pytest.approx(3 * 8 * math.pi**2 / 15 * 5)
    assert len(read_csv(tmp_path / "paths.csv")) == 6 * 5


def test_verify_theorem4(tmp_path, capsys):
    assert main(["verify", "theorem4", "--out", str(tmp_path)]) == EXIT_OK
    assert "theorem4: PASS" in capsys.readouterr().out
    rows = read_csv(tmp_path / "report.csv")
    assert rows and all(r["passed"] == "true" for r in rows)


def test_functional_and_asymmetry(tmp_path, shape_file):
    ball = shape_file({"kind": "ball", "radius": 2.0})
    assert main(["functional", ball, "--kind", "G", "--out", str(tmp_path / "f")]) == 0
    assert float(read_csv(tmp_path / "f" / "report.csv")[0]["value"]) == pytest.approx(0.2)
    ell = shape_file({"kind": "ellipsoid", "semi_axes": [2, 1, 1]}, "e.json")
    assert main(["asymmetry", ell, "--asym-samples", "5000", "--out", str(tmp_path / "a")]) == 0
    assert 0.4 < float(read_csv(tmp_path / "a" / "report.csv")[0]["asymmetry"]) < 0.65


def test_version(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser()[0].parse_args(["--version"])
    assert "0.1.0" in capsys.readouterr().out
