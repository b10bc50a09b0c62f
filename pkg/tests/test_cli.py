import csv
import io
import json

import pytest

from holocrit.cli import emit_table, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cpm_exact_example(capsys):
    code, out, _ = run(capsys, "cpm-exact", "--dim", "2", "--index", "2")
    assert code == 0
    assert out.strip() == "3*(N-1)^3/(2*N-1)"


def test_cpm_exact_at(capsys):
    code, out, _ = run(capsys, "cpm-exact", "--dim", "1", "--index", "1", "--at", "5", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["exact"] == "4*(N-1)^2/(3*N-2)"
    assert obj["value"] == "64/13"
    assert obj["value_float"] == pytest.approx(64 / 13)


def test_chern_check_example(capsys):
    code, out, _ = run(capsys, "chern-check", "--dim", "3")
    assert code == 0
    assert out.strip() == "N^3-4*N^2+6*N-4  OK"


def test_b0_json_fields(capsys):
    code, out, _ = run(capsys, "b0", "--dim", "2", "--samples", "100000", "--seed", "7", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    for key in ("mean", "std_error", "n_samples", "n_rejected", "seed"):
        assert key in obj
    assert obj["seed"] == 7 and obj["n_samples"] == 100000
    assert abs(obj["mean"] - 0.44280) < 4 * obj["std_error"]


def test_morse_table_rows(capsys):
    code, out, _ = run(capsys, "morse-table", "--dim", "2", "--samples", "20000", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    qs = [r["q"] for r in rows if r["quantity"] == "n_q"]
    assert qs == ["2", "3", "4", "total"]
    assert all(r["seed"] == "0" for r in rows)


def test_series_and_curve_agree(capsys):
    _, a, _ = run(capsys, "series", "--dim", "1", "--index", "1")
    _, b, _ = run(capsys, "curve-expansion", "--index", "1")
    assert a == b
    assert "4/3*N - 16/9 + 4/27*N^-1" in a


def test_sample_cp1_dump(capsys, tmp_path):
    path = tmp_path / "pts.csv"
    code, out, _ = run(capsys, "sample-cp1", "--N", "3", "--trials", "10", "--seed", "1",
                       "--dump", str(path), "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [r["quantity"] for r in rows] == ["saddles", "maxima", "total"]
    assert all(r["seed"] == 1 and r["n_samples"] + r["n_rejected"] == 10 for r in rows)
    assert path.read_text().splitlines()[0] == "trial,chart,re,im,index,residual,log_norm"


@pytest.mark.parametrize(
    "argv",
    [
        ("b0",),
        ("b0", "--dim", "0"),
        ("cpm-exact", "--dim", "2", "--index", "9"),
        ("b0", "--dim", "1", "--samples", "-4"),
        ("density", "--dim", "1", "--N", "1"),
        ("iz-check", "--dim", "2", "--lambda", "1,1", "--xi", "1,2"),
        ("fit", "--dim", "1", "--ladder", "10,10,10", "--exact"),
        ("no-such-command",),
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "usage" in err or "error" in err


def test_numeric_hard_error(capsys):
    code, _, err = run(capsys, "series", "--expr", "N/(N-N)")
    assert code == 3
    assert "numerical error" in err


def test_verify_failure_exit_code(capsys):
    # the 1e-6 fit tolerance of the expansion criterion is not met by a 3-term fit
    code, out, _ = run(capsys, "verify", "--quick", "--criteria", "8")
    assert code == 1
    assert "[FAIL] criterion 8" in out


def test_verify_success_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--criteria", "3")
    assert code == 0
    assert "[PASS] criterion 3" in out


def test_emit_table_empty_is_header_only():
    assert emit_table([], "csv", ["mean", "std_error"]) == "mean,std_error\r\n"
    assert emit_table([], "csv") == "\r\n"


def test_emit_table_json_roundtrip():
    rows = [{"q": 1, "mean": 0.1 + 0.2, "std_error": 1e-17, "seed": 2**63 - 1},
            {"q": 2, "mean": -1.5e-300, "std_error": 0.0, "seed": 0}]
    assert json.loads(emit_table(rows, "json")) == rows
    assert json.loads(emit_table(rows[:1], "json")) == rows[0]


def test_emit_table_csv_full_precision():
    rows = [{"mean": 0.1 + 0.2}]
    parsed = list(csv.DictReader(io.StringIO(emit_table(rows, "csv"))))
    assert float(parsed[0]["mean"]) == 0.1 + 0.2


def test_determinism_across_workers(capsys):
    outs = []
    for w in ("1", "2", "8"):
        code, out, _ = run(capsys, "b0q", "--dim", "2", "--samples", "30000", "--seed", "3",
                           "--workers", w, "--format", "json")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]
