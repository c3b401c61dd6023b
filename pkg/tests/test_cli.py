import csv
import io
import json
import subprocess
import sys
from importlib.resources import files

import jsonschema
import pytest

from qforms import cli, hankel, identities
from qforms.enclosure import Enclosure
from qforms.errors import PrecisionExhausted


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def schema(name):
    return json.loads(files("qforms").joinpath("schemas", f"{name}.json").read_text())


RUNS = {
    "eval": ["eval", "--fn", "ell", "--p", "2", "--x", "1", "--z", "1", "--eps", "1e-12"],
    "forms": ["forms", "--n", "5", "--p", "2", "--x", "1/2", "--z", "1/3"],
    "hankel": ["hankel", "--nmax", "8", "--p", "2", "--x", "1", "--z", "1"],
    "order-check": ["order-check", "--kind", "lemma1", "--n", "4", "--p", "2", "--x", "1/2", "--z", "1/3"],
    "vprime": ["vprime", "--n", "3", "--p", "2", "--x", "1/2", "--z", "1/3"],
    "certify": ["certify", "--p", "2", "--x", "1", "--z", "1", "--nmax", "10"],
    "identities": ["identities", "--only", "clausen,t_series,F_ell", "--points", "2", "--seed", "1"],
    "identities-list": ["identities", "--list"],
}


@pytest.mark.parametrize("name", sorted(RUNS))
def test_json_output_matches_schema(capsys, name):
    code, out, _ = run(capsys, *RUNS[name], "--threads", "1")
    assert code == 0
    jsonschema.validate(json.loads(out), schema(name))


@pytest.mark.parametrize("name", ["eval", "forms", "hankel", "certify", "identities"])
def test_output_is_byte_identical(capsys, name):
    _, first, _ = run(capsys, *RUNS[name], "--threads", "1")
    _, second, _ = run(capsys, *RUNS[name], "--threads", "1")
    _, threaded, _ = run(capsys, *RUNS[name], "--threads", "2")
    assert first == second == threaded


def test_eval_example(capsys):
    code, out, _ = run(capsys, "eval", "--fn", "ell", "--p", "2", "--x", "1", "--z", "1", "--eps", "1e-10")
    data = json.loads(out)
    assert code == 0 and data["decimal"].startswith("1.6066951524")
    assert {"value_mid", "value_rad", "decimal", "terms_used"} <= set(data)


def test_eval_pole_exit_3(capsys):
    code, out, err = run(capsys, "eval", "--fn", "ell", "--p", "2", "--x", "2", "--z", "1/2")
    assert code == 3 and out == ""
    assert "pole" in err and "x = p^1" in err


def test_order_check_hankel_example(capsys):
    code, out, _ = run(capsys, "order-check", "--kind", "hankel", "--n", "3", "--p", "2", "--x", "1/2", "--z", "1/3")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert data["results"][0]["bound"] == 5


def test_order_check_vprime(capsys):
    code, out, _ = run(capsys, "order-check", "--kind", "vprime", "--n", "3", "--p", "2", "--x", "1/2", "--z", "1/3")
    assert code == 0 and json.loads(out)["results"][0]["bound"] == 12


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["eval", "--fn", "ell", "--p", "2", "--x", "0.5", "--z", "1"],
        ["eval", "--fn", "nope", "--p", "2"],
        ["eval", "--fn", "ell", "--p", "2", "--x", "1", "--z", "1", "--eps", "-1"],
        ["forms", "--n", "-1", "--p", "2", "--x", "1", "--z", "1"],
        ["identities", "--only", "nope"],
        ["identities", "--all", "--list"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_domain_error_exit_3(capsys):
    code, _, err = run(capsys, "certify", "--p", "2", "--x", "2", "--z", "1", "--nmax", "3")
    assert code == 3 and "irrationality hypothesis" in err


def test_precision_exhausted_exit_4(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise PrecisionExhausted("no luck")

    monkeypatch.setattr(hankel, "certify", boom)
    code, _, err = run(capsys, "certify", "--p", "2", "--x", "1", "--z", "1", "--nmax", "3")
    assert code == 4 and "PrecisionExhausted" in err


def test_failed_check_exit_1(capsys, monkeypatch):
    bogus = identities.Identity(
        "bogus", "1 = 2", "anywhere", lambda rng: {}, lambda b: None,
        lambda b: [("one", lambda eps: Enclosure.exact(1)), ("two", lambda eps: Enclosure.exact(2))],
    )
    monkeypatch.setitem(identities.REGISTRY, "bogus", bogus)
    code, out, _ = run(capsys, "identities", "--only", "bogus", "--points", "1")
    assert code == 1 and json.loads(out)["cases"][0]["verdict"] == "fail"


def test_empty_identity_filter(capsys):
    code, out, _ = run(capsys, "identities", "--only", "", "--points", "5")
    assert code == 0 and json.loads(out)["cases"] == []


def test_forms_table(capsys):
    code, out, _ = run(capsys, *RUNS["forms"])
    data = json.loads(out)
    assert code == 0 and [r["n"] for r in data["forms"]] == list(range(6))
    assert all(r["integrality"]["passed"] for r in data["forms"])
    assert data["forms"][0]["A_tilde"] == "2"


def test_forms_csv(capsys):
    code, out, _ = run(capsys, *RUNS["forms"], "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][0] == "n" and len(rows) == 7


def test_hankel_plot_csv(capsys):
    code, out, _ = run(capsys, *RUNS["hankel"], "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["n", "log_abs_V", "fitted"]
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 9))
    assert all(r[2] for r in rows[1:])


def test_csv_rejected_where_unsupported(capsys):
    code, _, _ = run(capsys, *RUNS["eval"], "--format", "csv")
    assert code == 2


def test_out_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, *RUNS["eval"], "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["decimal"].startswith("1.6066951524")


def test_big_numbers_are_strings(capsys):
    _, out, _ = run(capsys, *RUNS["certify"])
    rec = json.loads(out)["records"][-1]
    assert isinstance(rec["V_mid"], str) and isinstance(rec["log_abs_V"], str)


def test_env_threads(capsys, monkeypatch):
    monkeypatch.setenv("QFORMS_THREADS", "2")
    _, with_env, _ = run(capsys, *RUNS["hankel"])
    monkeypatch.delenv("QFORMS_THREADS")
    _, plain, _ = run(capsys, *RUNS["hankel"], "--threads", "1")
    assert with_env == plain


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qforms", "eval", "--fn", "ell", "--p", "2", "--x", "1", "--z", "1", "--eps", "1e-10"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["decimal"].startswith("1.6066951524")
