import csv
import io
import json

import numpy as np
import pytest

from grushin_drift.cli import EXIT_GATE, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_distance_example(capsys):
    code, out, err = run(capsys, "distance", "--n", "1", "--m", "1", "--x", "1,0", "--y", "1,1")
    assert code == EXIT_OK
    (r,) = rows(out)
    assert list(r) == ["x", "y", "d", "regime"]
    assert float(r["d"]) == pytest.approx(0.5, rel=1e-12)
    assert r["regime"] == "1"
    assert "distance:" in err


def test_ball_volume_example(capsys):
    code, out, _ = run(capsys, "ball-volume", "--a", "1", "--x", "0", "--r-sweep", "0.25,0.5,1,2,4,8",
                       "--samples", "100000", "--seed", "7")
    assert code == EXIT_OK
    table = rows(out)
    assert len(table) == 6
    assert {"mc", "asymptotic", "ratio"} <= set(table[0])
    assert all(1 / 50 <= float(r["ratio"]) <= 50 for r in table)


def test_ball_volume_seed_reproducible(capsys):
    argv = ("ball-volume", "--a", "1", "--x", "0.5", "--r-sweep", "1", "--samples", "20000", "--seed", "3")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_heat_kernel_deterministic(capsys):
    argv = ("heat-kernel", "--t", "1", "--x", "0,0", "--y", "0,0")
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    assert out == run(capsys, *argv)[1]
    (r,) = rows(out)
    assert float(r["value"]) == pytest.approx(0.172518887067888, rel=1e-8)


def test_json_records_carry_reference(capsys):
    code, out, _ = run(capsys, "distance", "--x", "0,0", "--y", "0,4", "--format", "json")
    assert code == EXIT_OK
    recs = json.loads(out)
    assert isinstance(recs, list) and len(recs) == 1
    assert recs[0]["d"] == pytest.approx(2.0)
    assert "paper_ref" in recs[0] and recs[0]["paper_ref"]


def test_output_file(capsys, tmp_path):
    path = tmp_path / "d.csv"
    code, out, _ = run(capsys, "distance", "--x", "1,0", "--y", "-1,0", "-o", str(path))
    assert code == EXIT_OK and out == ""
    assert float(rows(path.read_text())[0]["d"]) == pytest.approx(2.0)


def test_riesz_kernel_routes_agree(capsys):
    code, out, _ = run(capsys, "riesz-kernel", "--x", "0.4,0.3", "--y", "-0.5,-0.2", "--a", "0.8",
                       "--alpha-prime", "1")
    assert code == EXIT_OK
    (r,) = rows(out)
    assert float(r["rel_diff"]) < 1e-6
    assert r["k"] == "1"


def test_covariance_check(capsys):
    code, out, err = run(capsys, "covariance-check", "--pairs", "2", "--orders", "1", "--scales", "2")
    assert code == EXIT_OK
    table = rows(out)
    assert len(table) == 2
    assert all(float(r["rel_err"]) < 1e-4 for r in table)


def test_transference_check(capsys):
    code, out, _ = run(capsys, "transference-check", "--instances", "2", "--npts", "32")
    assert code == EXIT_OK
    table = rows(out)
    assert len(table) == 4
    assert all(float(r["ratio"]) <= 1.01 for r in table)


def test_gate_violation_exit_code(capsys):
    # a gate no estimate can meet
    code, _, err = run(capsys, "ball-volume", "--a", "1", "--x", "0", "--r-sweep", "0.5",
                       "--samples", "10000", "--C", "1.0000001")
    assert code == EXIT_GATE
    assert "gate violated" in err


@pytest.mark.parametrize("argv", [
    ("no-such-command",),
    ("distance", "--x", "1,2,3", "--y", "0,0"),
    ("distance", "--x", "a,b", "--y", "0,0"),
    ("ball-volume", "--x", "0"),
    ("ball-volume", "--x", "0", "--a", "0"),
    ("heat-kernel", "--t", "1", "--x", "0,0", "--y", "0,0", "--t-sub", "1,2"),
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_invalid_values_are_usage_errors(capsys):
    code, _, err = run(capsys, "heat-kernel", "--t", "-1", "--x", "0,0", "--y", "0,0")
    assert code == EXIT_USAGE
    assert "error" in err


def test_accuracy_failure_is_gate_failure(capsys):
    # a lam cut-off far below the Gaussian width at small t
    code, _, err = run(capsys, "heat-kernel", "--t", "0.01", "--x", "0,0", "--y", "0,0", "--lam-max", "1")
    assert code == EXIT_GATE
    assert "AccuracyNotMet" in err


def test_negative_coordinates(capsys):
    code, out, _ = run(capsys, "distance", "--x", "-1,-0.5", "--y", "-.5,2")
    assert code == EXIT_OK
    # |x''-y''|^{1/2} > |x'|+|y'|: second regime
    assert float(rows(out)[0]["d"]) == pytest.approx(0.5 + np.sqrt(2.5))


def test_help_and_version(capsys):
    assert run(capsys, "--version")[0] == EXIT_OK
    assert run(capsys, "distance", "--help")[0] == EXIT_OK
