import csv
import json
from fractions import Fraction
from pathlib import Path

import pytest

from twistedlie.cli import COLUMNS, EXIT_OK, EXIT_SCHEMA, EXIT_UNSUPPORTED, EXIT_VERIFY, run, validate_output

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_info_a4_flip(tmp_path, capsys):
    assert run(["info", str(SCEN / "a4_flip_info.json"), "-o", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "info.json").read_text())
    assert doc["orbit_system"]["label"] == "C2"
    assert doc["table_one"] == {"listed": "C2", "matches": True}
    assert doc["twisted_weyl_order"] == doc["intersection_order"] * doc["wk_order"]
    validate_output("info", doc)


def test_dh_coeffs_a1_torus(tmp_path):
    assert run(["dh-coeffs", str(SCEN / "a1_torus.json"), "-o", str(tmp_path)]) == EXIT_OK
    with open(tmp_path / "dh_coeffs.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == COLUMNS["dh-coeffs"]
    for row in rows:
        n = int(row["lambda_coords"])
        assert float(row["coeff"]) == pytest.approx(1 / (n + 1), rel=1e-15)
        assert int(row["volg_power"]) == 2
    doc = json.loads((tmp_path / "dh_coeffs.json").read_text())
    assert [Fraction(e["rational"]) for e in doc["entries"]] == [Fraction(1, n + 1) for n in range(len(rows))]


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["density", str(SCEN / "a1_one_holed_torus.json"), "-o", str(out)]) == EXIT_OK
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()


@pytest.mark.parametrize("command,scenario,name", [
    ("twining", "a2_flip_fused_double.json", "twining"),
    ("class-volume", "d4_triality.json", "class_volume"),
    ("density", "a1_one_holed_torus.json", "density"),
])
def test_outputs_validate(tmp_path, command, scenario, name):
    assert run([command, str(SCEN / scenario), "-o", str(tmp_path)]) == EXIT_OK
    validate_output(name, json.loads((tmp_path / f"{name}.json").read_text()))


def test_reduced_volume_needs_gamma_order(tmp_path):
    with pytest.raises(SystemExit):
        run(["reduced-volume", str(SCEN / "a1_one_holed_torus.json"), "-o", str(tmp_path)])
    assert run(["reduced-volume", str(SCEN / "a1_one_holed_torus.json"), "-o", str(tmp_path),
                "--gamma-order", "0"]) == EXIT_SCHEMA
    assert run(["reduced-volume", str(SCEN / "a1_one_holed_torus.json"), "-o", str(tmp_path),
                "--gamma-order", "2"]) == EXIT_OK
    validate_output("reduced_volume", json.loads((tmp_path / "reduced_volume.json").read_text()))


def test_verify_failing_tolerance(tmp_path):
    assert run(["verify", str(SCEN / "a2_flip_bad_tolerance.json"), "-o", str(tmp_path)]) == EXIT_VERIFY
    doc = json.loads((tmp_path / "verify_report.json").read_text())
    assert doc["passed"] is False


def test_schema_errors_report_pointer(tmp_path, capsys):
    bad = write(tmp_path, {"group": {"series": "A", "rank": 1}, "surface": {"h": -1}})
    assert run(["info", bad, "-o", str(tmp_path)]) == EXIT_SCHEMA
    assert "/surface/h" in capsys.readouterr().err
    assert run(["info", str(tmp_path / "missing.json")]) == EXIT_SCHEMA


def test_unsupported_combinations(tmp_path):
    bad_twist = write(tmp_path, {"group": {"series": "B", "rank": 3}, "twist": "flip"})
    assert run(["info", bad_twist, "-o", str(tmp_path)]) == EXIT_UNSUPPORTED
    assert run(["mc-check", str(SCEN / "d4_triality.json"), "-o", str(tmp_path)]) == EXIT_UNSUPPORTED


def test_outputs_selection(tmp_path):
    only_csv = write(tmp_path, {"group": {"series": "A", "rank": 1}, "outputs": ["csv"],
                                "surface": {"h": 1, "handle_twists": [["identity", "identity"]]},
                                "numerics": {"level_cutoff": 3}})
    out = tmp_path / "out"
    assert run(["dh-coeffs", only_csv, "-o", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["dh_coeffs.csv"]


@pytest.mark.slow
def test_mc_check_columns(tmp_path):
    assert run(["mc-check", str(SCEN / "a1_torus.json"), "-o", str(tmp_path)]) == EXIT_OK
    header = (tmp_path / "mc_check.csv").read_text().splitlines()[0].split(",")
    assert header == COLUMNS["mc-check"]
    doc = json.loads((tmp_path / "mc_check.json").read_text())
    assert doc["fraction_within_3_sigma"] >= 0.9
