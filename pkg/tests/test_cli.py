import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from evodich import io
from evodich.cli import main

SPECS = Path(__file__).resolve().parent.parent / "specs"


def write_spec(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    return lines[0], [[float(x) for x in line.split(",")] for line in lines[1:]]


def test_analyze_saddle(tmp_path):
    assert main(["analyze", "--input", str(SPECS / "saddle.json"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "dichotomy.json").read_text())
    assert doc["verdict"] == "hyperbolic"
    assert doc["M"] == pytest.approx(1.0, abs=1e-10)
    assert doc["lambda"] == pytest.approx(1.0, abs=1e-10)
    assert (tmp_path / "projections.csv").exists()
    spec = json.loads((tmp_path / "spectrum.json").read_text())
    assert {"eigenvalues", "unit_circle_gap", "axis_gap", "pairing_distance"} <= spec.keys()


def test_analyze_oscillator_is_on_axis(tmp_path):
    assert main(["analyze", "--input", str(SPECS / "harmonic_oscillator.json"), "--out", str(tmp_path)]) == 2
    assert json.loads((tmp_path / "dichotomy.json").read_text())["verdict"] == "on-axis"


def test_analyze_vinograd_expands(tmp_path):
    assert main(["analyze", "--input", str(SPECS / "vinograd_1.5.json"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "dichotomy.json").read_text())
    assert doc["verdict"] == "hyperbolic"
    assert doc["summary"]["expansion"] is True
    assert doc["growth_rate"] == pytest.approx(0.5, abs=1e-3)


def test_analyze_sampled_records_periodization(tmp_path):
    doc = {
        "dimension": 1,
        "kind": "sampled",
        "samples": [{"t": 0.0, "matrix": [[-1.0]]}, {"t": 2.0, "matrix": [[-2.0]]}],
    }
    path = write_spec(tmp_path, doc)
    assert main(["analyze", "--input", str(path), "--out", str(tmp_path / "o"), "-N", "8"]) == 0
    spec = json.loads((tmp_path / "o" / "spectrum.json").read_text())
    assert spec["meta"]["periodized"] is True
    assert spec["meta"]["window"] == [0.0, 2.0]
    summary = json.loads((tmp_path / "o" / "dichotomy.json").read_text())["summary"]
    assert summary["periodized"] is True
    trend = summary["window_trend"]
    assert [row["N"] for row in trend] == [2, 4, 8]
    assert trend[-1]["window"] == [0.0, 2.0]
    # scalar system: the exponent gap is the window average of -A(t)
    assert trend[-1]["exponent_gap"] == pytest.approx(1.5, abs=1e-6)


def test_spectrum_saddle_rows(tmp_path):
    doc = {"dimension": 2, "kind": "constant", "matrix": [[-1, 0], [0, 2]]}
    path = write_spec(tmp_path, doc)
    assert main(["spectrum", "--input", str(path), "-N", "8", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "spectrum.csv")
    assert header == "re,im"
    assert len(rows) == 16
    mods = sorted(math.hypot(*r) for r in rows)
    np.testing.assert_allclose(mods[:8], math.exp(-math.pi / 4), rtol=1e-8)
    np.testing.assert_allclose(mods[8:], math.exp(math.pi / 2), rtol=1e-8)
    meta = json.loads((tmp_path / "spectrum_meta.json").read_text())
    assert meta["unit_circle_gap"] == pytest.approx(1 - math.exp(-math.pi / 4), abs=1e-12)


def test_spectrum_zero_generator(tmp_path):
    path = write_spec(tmp_path, {"dimension": 2, "kind": "constant", "matrix": [[0, 0], [0, 0]]})
    assert main(["spectrum", "--input", str(path), "-N", "4", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "spectrum.csv")
    z = np.array([complex(*r) for r in rows])
    for root in (1, 1j, -1, -1j):
        assert np.sum(np.abs(z - root) < 1e-12) == 2


def test_spectrum_to_stdout(tmp_path, capsys):
    path = write_spec(tmp_path, {"dimension": 1, "kind": "constant", "matrix": [[-1]]})
    assert main(["spectrum", "--input", str(path), "-N", "4"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("re,im\n")
    assert len(out.strip().split("\n")) == 5


def test_size_cap_refused(tmp_path, capsys):
    path = write_spec(tmp_path, {"dimension": 2, "kind": "constant", "matrix": [[0, 0], [0, 0]]})
    assert main(["spectrum", "--input", str(path), "-N", "2001"]) == 1
    assert "4000" in capsys.readouterr().err


@pytest.mark.parametrize("content", ["", "{", '{"dimension": 2, "kind": "constant", "matrix": [[1, 2], [3]]}'])
def test_bad_input_files_exit_1(tmp_path, content, capsys):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert main(["analyze", "--input", str(path)]) == 1
    assert "error" in capsys.readouterr().err


def test_malformed_json_message_has_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "dimension": 2,\n  "kind" "constant"\n}')
    assert main(["verify", "--input", str(path)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_corrupted_weights_exit_1(tmp_path):
    doc = json.loads((SPECS / "saddle.json").read_text())
    doc["matrix"][0][0] = "garbage"
    path = write_spec(tmp_path, doc)
    assert main(["verify", "--input", str(path)]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--input", "x.json", "--bogus"],
        ["frobnicate"],
        ["gallery", "-N", "1"],
        ["gallery", "--tol", "0"],
        ["analyze"],
        ["spectrum", "--input", "/nonexistent/spec.json"],
    ],
)
def test_usage_errors_exit_1(argv):
    assert main(argv) == 1


def test_verify_gallery_passes(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    tables = json.loads((tmp_path / "tables.json").read_text())
    assert all(t["status"] in ("pass", "degenerate") for t in tables)


def test_verify_single_spec_csv(tmp_path):
    out = tmp_path / "o"
    code = main(["verify", "--input", str(SPECS / "saddle.json"), "--out", str(out), "--format", "csv"])
    assert code == 0
    header = (out / "tables.csv").read_text().split("\n")[0]
    assert header == "system,theorem,condition,verdict,margin"


def test_verify_seed_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--seed", "7", "--out", str(a)]) == 0
    assert main(["verify", "--seed", "7", "--out", str(b)]) == 0
    assert (a / "tables.json").read_bytes() == (b / "tables.json").read_bytes()


def test_gallery_json(tmp_path):
    assert main(["gallery", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "gallery.json").read_text())
    assert doc["headline"]["holds"] is True
    assert doc["seed"] == 0x5EED
    assert len(doc["systems"]) >= 6


def test_inputs_not_mutated(tmp_path):
    path = tmp_path / "s.json"
    path.write_bytes((SPECS / "vinograd_1.5.json").read_bytes())
    before = path.read_bytes()
    main(["analyze", "--input", str(path), "--out", str(tmp_path / "o")])
    main(["verify", "--input", str(path), "--out", str(tmp_path / "o")])
    assert path.read_bytes() == before


def test_step_must_divide_period(tmp_path):
    path = SPECS / "vinograd_1.5.json"
    assert main(["spectrum", "--input", str(path), "--step", "0.3"]) == 1
    assert main(["spectrum", "--input", str(path), "--step", str(2 * math.pi / 16), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "spectrum.csv")
    assert len(rows) == 32


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert "analyze" in capsys.readouterr().out


def test_console_script_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "evodich.cli", "spectrum", "--input", str(SPECS / "sink.json"), "-N", "4"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout.startswith("re,im")


# -- serialization ---------------------------------------------------------------------


def test_dumps_round_trips_doubles():
    values = [0.1, 1 / 3, math.pi, 1e-300, -2.5e17, 5e-324]
    back = json.loads(io.dumps({"v": values}))
    assert back["v"] == values


def test_dumps_special_values():
    doc = json.loads(io.dumps({"a": math.inf, "b": np.float64(2.0), "c": 1 + 2j, "d": np.array([1, 2]), "e": True}))
    assert doc == {"a": None, "b": 2.0, "c": [1.0, 2.0], "d": [1, 2], "e": True}


def test_csv_cells_use_17_digits():
    text = io.to_csv(["x", "y"], [[1 / 3, "a,b"]])
    assert text == 'x,y\n0.33333333333333331,"a,b"\n'
