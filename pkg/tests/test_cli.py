import csv
import io
import json
import math

import numpy as np
import pytest

from chandisc.cli import (
    EXIT_INPUT,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_VIOLATION,
    emit,
    format_cell,
    main,
)
from chandisc.interchange import encode_state
from chandisc.qmat.states import diagonal_state
from chandisc.statediv.hypothesis import hypothesis_testing_oracle
from chandisc.verify.base import CheckReport


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--out", "json")
    return code, json.loads(out) if out else None, err


def csv_tables(text):
    tables = {}
    for block in text.strip().split("\n\n"):
        title, *lines = block.splitlines()
        tables[title.removeprefix("# ")] = list(csv.DictReader(lines))
    return tables


@pytest.mark.parametrize(
    "value, expected",
    [
        (None, ""),
        (True, "true"),
        (np.bool_(False), "false"),
        (3, "3"),
        (0.5, "5.00000000000e-01"),
        (np.float64(-2.0), "-2.00000000000e+00"),
        (math.inf, "inf"),
        ("glt", "glt"),
    ],
)
def test_format_cell(value, expected):
    assert format_cell(value) == expected


def test_emit_json_writes_infinity_as_string():
    stream = io.StringIO()
    emit({"t": [{"value": math.inf, "ok": np.bool_(True)}]}, "json", stream)
    assert json.loads(stream.getvalue()) == {"t": [{"value": "inf", "ok": True}]}


def test_emit_csv_separates_tables():
    stream = io.StringIO()
    emit({"a": [{"x": 1}], "b": [{"y": 0.25, "z": None}]}, "csv", stream)
    assert stream.getvalue() == "# a\nx\n1\n\n# b\ny,z\n2.50000000000e-01,\n"


@pytest.mark.parametrize(
    "rho, sigma, kind, expected",
    [
        # identical states
        ("mixed", "mixed", "umegaki", 0.0),
        # pure state against the maximally mixed qubit
        ("zero", "mixed", "dmax", 1.0),
        ("zero", "mixed", "umegaki", 1.0),
    ],
)
def test_divergence(capsys, rho, sigma, kind, expected):
    code, out, _ = run_json(capsys, "divergence", rho, sigma, "--kind", kind)
    assert code == EXIT_OK
    (row,) = out["divergence"]
    assert row["value"] == pytest.approx(expected, abs=1e-10)
    assert row["support_ok"] is True


def test_divergence_support_violation_is_infinite(capsys):
    code, out, _ = run(capsys, "divergence", "zero", "one")
    assert code == EXIT_OK
    (row,) = csv_tables(out)["divergence"]
    assert row["value"] == "inf"
    assert row["support_ok"] == "false"


def test_divergence_hypothesis_testing_from_files(capsys, tmp_path):
    p, q = np.array([0.5, 0.3, 0.2]), np.array([0.1, 0.3, 0.6])
    for name, probs in (("rho", p), ("sigma", q)):
        (tmp_path / f"{name}.json").write_text(json.dumps(encode_state(diagonal_state(probs))))
    code, out, _ = run_json(
        capsys, "divergence", str(tmp_path / "rho.json"), str(tmp_path / "sigma.json"), "--kind", "hypothesis",
        "--epsilon", "0.1",
    )
    assert code == EXIT_OK
    assert out["divergence"][0]["value"] == pytest.approx(hypothesis_testing_oracle(p, q, 0.1), abs=1e-8)


@pytest.mark.parametrize(
    "argv",
    [
        # missing order
        ["divergence", "zero", "mixed", "--kind", "petz"],
        # neither a builtin nor a file
        ["divergence", "zero", "no-such-state.json"],
        ["chandiv", "identity", "depolarizing:7"],
        # negative seed
        ["divergence", "zero", "mixed", "--seed=-1"],
    ],
)
def test_bad_input_exits_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_INPUT
    assert out == ""
    assert "chandisc: " in err


def test_chandiv_identity_against_replacer(capsys):
    code, out, _ = run_json(capsys, "chandiv", "identity", "replacer", "--restarts", "4")
    assert code == EXIT_OK
    (row,) = out["chandiv"]
    assert row["copies"] == 1
    assert row["value"] == pytest.approx(2.0, abs=1e-4)
    assert len(row["witness"]) == 16


def test_chandiv_identical_channels(capsys):
    code, out, _ = run_json(capsys, "chandiv", "depolarizing:0.3", "depolarizing:0.3", "--nmax", "2", "--restarts", "2")
    assert code == EXIT_OK
    assert [row["copies"] for row in out["chandiv"]] == [1, 2]
    assert all(row["value"] == pytest.approx(0.0, abs=1e-9) for row in out["chandiv"])


def test_chandiv_is_deterministic(capsys):
    argv = ("chandiv", "amplitude-damping:0.3", "depolarizing:0.4", "--nmax", "2", "--restarts", "3", "--seed", "9")
    first = run(capsys, *argv)
    second = run(capsys, *argv, "--workers", "2")
    assert first[0] == EXIT_OK
    assert first[1] == second[1]


def test_chandiv_over_budget_exits_3(capsys):
    code, out, err = run(capsys, "chandiv", "identity", "replacer", "--nmax", "5")
    assert code == EXIT_RESOURCE
    assert out == ""
    assert "dense limit" in err


def test_chandiv_stein(capsys):
    code, out, _ = run_json(
        capsys, "chandiv", "replacer:zero", "replacer", "--stein", "PRO", "--epsilon", "0.1", "--nmax", "2",
        "--restarts", "2",
    )
    assert code == EXIT_OK
    rows = out["stein"]
    assert [row["copies"] for row in rows] == [1, 2]
    assert all(row["strategy"] == "PRO" for row in rows)


def test_chandiv_stein_needs_epsilon(capsys):
    code, _, _ = run(capsys, "chandiv", "identity", "replacer", "--stein", "COH")
    assert code == EXIT_INPUT


def test_exponents_for_identical_channels(capsys):
    code, out, _ = run_json(capsys, "exponents", "identity", "identity", "--rate", "0.5", "--restarts", "1")
    assert code == EXIT_OK
    rows = {row["exponent"]: row for row in out["exponents"]}
    assert rows["strong_converse"]["curve"] == "sandwiched"
    assert rows["strong_converse"]["value"] == pytest.approx(0.5, abs=1e-6)
    assert rows["error"]["value"] == pytest.approx(0.0, abs=1e-9)
    curves = out["curves"]
    assert {row["curve"] for row in curves} == {"sandwiched", "petz"}
    assert all(row["alpha"] > 0 for row in curves)
    assert all(row["value"] == pytest.approx(0.0, abs=1e-9) for row in curves)


def test_exponents_reject_bad_rate(capsys):
    assert run(capsys, "exponents", "identity", "identity", "--rate=-1")[0] == EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        main(["exponents", "identity", "identity", "--rate", "abc"])
    assert exc.value.code == 2


def test_verify_glt(capsys):
    code, out, _ = run(capsys, "verify", "glt")
    assert code == EXIT_OK
    tables = csv_tables(out)
    (check,) = tables["checks"]
    assert check["name"] == "glt"
    assert check["passed"] == "true"
    records = {int(row["d"]): row for row in tables["glt"]}
    assert records[4]["violated"] == "false"
    assert records[64]["violated"] == "true"
    assert records[54]["minimal"] == "true"


def test_verify_json_report(capsys):
    code, out, _ = run_json(capsys, "verify", "twomat", "--trials", "50", "--seed", "3")
    assert code == EXIT_OK
    (report,) = out["checks"]
    assert report["trials"] == 50
    assert report["violations"] == 0
    assert report["seed"] == 3
    assert "witness" in report


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "nope")
    assert code == EXIT_INPUT
    assert "unknown suite" in err


def test_verify_violation_exits_1(capsys, monkeypatch):
    monkeypatch.setattr("chandisc.cli.run_suite", lambda name, options: [CheckReport("x", 1, 1, 0.5, {}, 0)])
    code, out, _ = run(capsys, "verify", "x")
    assert code == EXIT_VIOLATION
    assert csv_tables(out)["checks"][0]["passed"] == "false"


def test_unexpected_error_exits_4(capsys, monkeypatch):
    def broken(name, options):
        raise RuntimeError("boom")

    monkeypatch.setattr("chandisc.cli.run_suite", broken)
    code, out, err = run(capsys, "verify", "twomat")
    assert code == EXIT_INTERNAL
    assert out == ""
    assert "internal error" in err
    assert "boom" in err
