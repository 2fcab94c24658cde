import json
import subprocess
import sys

import pytest

from iwatool.cli import main
from iwatool.io import InputError, loads, matrix_from_doc, render, series_from_obj, series_to_obj
from iwatool.series import SeriesContext

CTX = SeriesContext()

MODULE = {"p": 3, "u": 4, "K_degree": 1, "phi": [[2, 0], [0, 6]], "N": [[0, 1], [0, 0]],
          "weights": [0, -2], "flags": {"no_pj_eigenvalue": True, "V_fixed_trivial": True}}


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=1))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def tsv(out):
    lines = out.strip("\n").split("\n")
    head = lines[0].split("\t")
    return [dict(zip(head, line.split("\t"))) for line in lines[1:]]


# -- io ------------------------------------------------------------------------------


def test_series_from_bare_list_is_exact():
    f = series_from_obj([1, "1/3", "2 + O(3^5)"], loads("[]"), CTX)
    assert f.exact and f.prec == 5 and f.shift == 1


def test_series_with_truncation_gets_integral_tail():
    f = series_from_obj({"coeffs": [1, 2], "x_trunc": 10}, loads("{}"), CTX)
    assert not f.exact and f.x_trunc == 10 and f.tail == (0.0, 0.0)


def test_series_round_trip():
    f = series_from_obj({"coeffs": [1, "1/3", 5], "x_trunc": 4, "tail": [1, 0]}, loads("{}"), CTX)
    g = series_from_obj(series_to_obj(f), loads("{}"), CTX)
    assert g.equals(f) and g.tail == f.tail


def test_line_addressed_diagnostics():
    text = '{"p": 3,\n "coeffs": [1,\n  "nonsense"]}'
    with pytest.raises(InputError) as exc:
        doc = loads(text, "f.json")
        series_from_obj(doc.data, doc, CTX)
    assert exc.value.line == 3 and str(exc.value).startswith("f.json:3:")


def test_invalid_json_reports_line():
    with pytest.raises(InputError) as exc:
        loads('{\n"a": 1,\n}', "g.json")
    assert exc.value.line == 3


def test_prime_mismatch():
    with pytest.raises(InputError):
        series_from_obj({"p": 5, "coeffs": [1]}, loads("{}"), CTX)


def test_matrix_modes():
    mode, rows = matrix_from_doc(loads('{"mode": "factored", "entries": [[{"pi:1:0": 1}, 0], [null, "ell:1^2"]]}'),
                                 CTX)
    assert mode == "factored" and rows[0][1] is None and rows[1][1]["ell:1"] == 2
    with pytest.raises(InputError):
        matrix_from_doc(loads('{"mode": "factored", "entries": [[1, 0], [0]]}'), CTX)
    with pytest.raises(InputError):
        matrix_from_doc(loads('{"mode": "factored", "entries": [["pi:x"]]}'), CTX)


def test_render_formats():
    recs = [{"a": 1, "b": True}, {"a": 2, "c": None}]
    assert render(recs, "tsv") == "a\tb\tc\n1\ttrue\t\n2\t\t\n"
    assert json.loads(render(recs, "json")) == [{"a": 1, "b": True}, {"a": 2, "c": None}]


# -- cli -----------------------------------------------------------------------------


def test_predict_example(tmp_path, capsys):
    code, out, _ = run(capsys, "predict", "--module-file", write(tmp_path, "D.json", MODULE))
    assert code == 0
    chain = [r for r in tsv(out) if r["section"] == "chain"]
    assert [r["element"] for r in chain] == ["ell:0*ell:1", "1"]
    assert all(r["element"] == "pass" for r in tsv(out) if r["section"] == "validation")


def test_predict_refuses_without_hypothesis(tmp_path, capsys):
    mod = dict(MODULE, flags={"V_fixed_trivial": True})
    code, _, err = run(capsys, "predict", "--module-file", write(tmp_path, "D.json", mod))
    assert code == 2 and "D^{phi=p^j} = 0" in err


def test_predict_failed_validation_exits_one(tmp_path, capsys):
    mod = dict(MODULE, phi=[[2, 0], [0, 2]])
    code, out, _ = run(capsys, "predict", "--module-file", write(tmp_path, "D.json", mod))
    assert code == 1 and "FAIL" in out


def test_verify_phi_psi_example(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "phi-psi", "--p", "3", "--samples", "100")
    assert code == 0 and all(r["status"] == "pass" for r in tsv(out))


def test_snf_identity(tmp_path, capsys):
    path = write(tmp_path, "identity.json", {"mode": "factored", "entries": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})
    code, out, _ = run(capsys, "snf", "--matrix-file", path)
    assert code == 0 and [r["element"] for r in tsv(out)] == ["1", "1", "1"]


def test_snf_numeric_with_factor_list(tmp_path, capsys):
    # diag(pi_{1,0}, 1): pi_{1,0} = x^2 + 3x + 3
    path = write(tmp_path, "A.json", {"mode": "numeric", "entries": [[[3, 3, 1], [0]], [[0], [1]]]})
    code, out, _ = run(capsys, "snf", "--matrix-file", path, "--factors", "pi:1:0,pi:1:1")
    assert code == 0
    rows = tsv(out)
    assert rows[0]["element"] == "pi:1:0" and rows[1]["element"] == "1"
    code, _, err = run(capsys, "snf", "--matrix-file", path, "--factors", "pi:one")
    assert code == 2 and "--factors" in err


def test_snf_auto_factors(tmp_path, capsys):
    path = write(tmp_path, "A.json", {"mode": "numeric", "entries": [[[3, 3, 1]]]})
    code, out, _ = run(capsys, "snf", "--matrix-file", path)
    assert code == 0 and tsv(out)[0]["element"] == "pi:1:0"


def test_psi_command(tmp_path, capsys):
    code, out, _ = run(capsys, "psi", "--input", write(tmp_path, "f.json", [0, 1]))
    rows = tsv(out)
    # psi(x) = -1
    assert code == 0 and len(rows) == 1 and rows[0]["valuation"] == "0"
    assert rows[0]["coefficient"] == f"{3 ** 30 - 1} + O(3^30)"


def test_psi_iterations(tmp_path, capsys):
    # (1+x)^9 -> (1+x)^3 -> 1+x
    coeffs = [1, 9, 36, 84, 126, 126, 84, 36, 9, 1]
    code, out, _ = run(capsys, "psi", "--input", write(tmp_path, "f.json", coeffs), "--iterations", "2")
    assert code == 0 and [r["valuation"] for r in tsv(out)] == ["0", "0"]


def test_series_radius_table(capsys):
    code, out, _ = run(capsys, "series", "--kind", "ell", "--j", "0", "--radius", "1/2", "--radius", "1/4")
    rows = tsv(out)
    assert code == 0 and [r["unit"] for r in rows] == ["false", "true"]


def test_series_newton(capsys):
    code, out, _ = run(capsys, "series", "--kind", "pi", "--n", "1", "--newton")
    assert code == 0 and [(r["x"], r["y"]) for r in tsv(out)] == [("0", "1"), ("2", "0")]


def test_theta_table(capsys):
    code, out, _ = run(capsys, "theta", "--k", "2", "--steps", "4")
    digits = [int(r["agreement_digits"]) for r in tsv(out)]
    assert code == 0 and all(b > a for a, b in zip(digits, digits[1:]))


def test_mellin_command(tmp_path, capsys):
    code, out, _ = run(capsys, "mellin", "--input", write(tmp_path, "g.json", {"level": 1, "coeffs": {"2": 1}}))
    rows = tsv(out)
    assert code == 0 and rows[-1]["coefficient"] == "zero"
    code, _, err = run(capsys, "mellin", "--input", write(tmp_path, "h.json", {"level": 1, "coeffs": {"3": 1}}))
    assert code == 2 and "not a unit" in err


def test_bad_scalar_has_line(tmp_path, capsys):
    path = write(tmp_path, "bad.json", '{"p":3,\n "coeffs": ["1/3", "x"]}')
    code, _, err = run(capsys, "psi", "--input", path)
    assert code == 2 and "bad.json:2:" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "psi", "--input", "/nonexistent/file.json")
    assert code == 2 and "cannot read" in err


def test_invalid_configuration(capsys):
    code, _, err = run(capsys, "theta", "--u", "10")
    assert code == 2 and "invalid configuration" in err


def test_suite_failure_names_invariant_and_reproducer(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "theta")
    rows = tsv(out)
    failing = [r for r in rows if r["status"] != "pass"]
    assert code == 1 and failing
    assert all(r["check"] and r["reproducer"] for r in failing)
    assert all(not r["reproducer"] for r in rows if r["status"] == "pass")


def test_json_mirrors_tsv(capsys):
    _, out_tsv, _ = run(capsys, "verify", "--suite", "growth")
    _, out_json, _ = run(capsys, "verify", "--suite", "growth", "--format", "json")
    recs = json.loads(out_json)
    rows = tsv(out_tsv)
    assert [r["check"] for r in recs] == [r["check"] for r in rows]


def test_out_flag(tmp_path, capsys):
    target = tmp_path / "o.tsv"
    code, out, _ = run(capsys, "series", "--kind", "omega", "--n", "1", "--out", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("index\t")


def test_byte_identical_repeated_runs():
    argv = [sys.executable, "-m", "iwatool.cli", "verify", "--suite", "snf", "--samples", "4", "--seed", "11"]
    a = subprocess.run(argv, capture_output=True, check=False)
    b = subprocess.run(argv, capture_output=True, check=False)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout and a.stdout
