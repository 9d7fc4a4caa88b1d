import csv
import io
import json
import subprocess
import sys

import pytest

from cuspidal.cli import main, parse_grid
from cuspidal.report import RECORD_FIELDS, REPORT_SCHEMA, fmt_real, validate


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_rank1(capsys):
    code, out, _ = run(capsys, "catalog", "--n", "5", "--rank", "1")
    doc = json.loads(out)
    validate(doc)
    rows = doc["records"]
    assert code == 0 and len(rows) == 10
    assert sum(r["h_compatible"] for r in rows) == 3


def test_catalog_rank0_even(capsys):
    code, out, _ = run(capsys, "catalog", "--n", "4", "--rank", "0")
    rows = json.loads(out)["records"]
    assert code == 0 and len(rows) == 4
    assert not any(r["h_compatible"] for r in rows)


def test_catalog_n3_schema(capsys):
    _, out, _ = run(capsys, "catalog", "--n", "3", "--rank", "1", "--format", "json")
    validate(json.loads(out))


def test_catalog_bad_n(capsys):
    code, _, err = run(capsys, "catalog", "--n", "2")
    assert code == 64 and "n must be" in err


def test_csv_column_order(capsys, tmp_path):
    code, _, _ = run(capsys, "catalog", "--n", "4", "--format", "csv", "--out-dir", str(tmp_path))
    text = (tmp_path / "catalog_catalog.csv").read_text()
    header = next(csv.reader(io.StringIO(text)))
    assert header == RECORD_FIELDS["catalog"]


@pytest.mark.parametrize("argv,verdict,prediction", [
    (["--n", "5", "--k", "3", "--l", "3", "--profile", "m=8"], "Convergent", "MustConverge"),
    (["--n", "5", "--k", "2", "--l", "2", "--profile", "nu=-1.25"], "Divergent", "MustDiverge"),
    (["--n", "5", "--k", "3", "--l", "3", "--profile", "nu=-1"], None, "Unknown"),
    (["--n", "3", "--k", "2", "--profile", "nu=-1"], "Convergent", "MustConverge"),
])
def test_convergence(capsys, argv, verdict, prediction):
    code, out, _ = run(capsys, "convergence", *argv)
    doc = json.loads(out)
    validate(doc)
    row = doc["records"][0]
    assert code == 0
    assert row["predicted"] == prediction
    if verdict:
        assert row["verdict"] == verdict
    assert len([r for r in doc["records"] if r["type"] == "schedule"]) == 64


def test_hc_odd(capsys):
    code, out, _ = run(capsys, "hc", "--n", "3", "--k", "2", "--profile", "nu=-1", "--s", "-6:8:1")
    doc = json.loads(out)
    validate(doc)
    lim = [r for r in doc["records"] if r["type"] == "hc_limit"][0]
    assert code == 0 and lim["matches"] and lim["rel_diff"] < 0.02
    assert len([r for r in doc["records"] if r["type"] == "hc_point"]) == 15


def test_hc_even(capsys):
    code, out, _ = run(capsys, "hc", "--n", "4", "--k", "3", "--profile", "m=10")
    doc = json.loads(out)
    assert code == 0
    assert {r["side"]: r["bounded"] for r in doc["records"] if r["type"] == "hc_decay"} == \
        {"negative": True, "positive": True}


def test_hc_incompatible(capsys):
    code, _, err = run(capsys, "hc", "--n", "4", "--k", "2")
    assert code == 64 and "not h-compatible" in err


def test_hc_divergent_exit_code(capsys):
    code, _, _ = run(capsys, "hc", "--n", "5", "--k", "3", "--profile", "nu=-1", "--s", "-1:1:1")
    assert code == 1


def test_verify_small(capsys):
    code, out, _ = run(capsys, "verify", "--n-max", "3")
    doc = json.loads(out)
    validate(doc)
    fams = {r["family"]: r["passed"] for r in doc["records"]}
    assert code == 0 and all(fams.values()) and "orbit_limit" in fams


def test_unknown_flag_is_usage_error():
    proc = subprocess.run([sys.executable, "-m", "cuspidal", "verify", "--bogus"], capture_output=True)
    assert proc.returncode == 64


def test_bad_profile_is_usage_error(capsys):
    code, _, _ = run(capsys, "convergence", "--n", "5", "--k", "3", "--l", "3", "--profile", "q=3")
    assert code == 64


def test_parse_grid():
    assert parse_grid("-6:8:1") == [float(s) for s in range(-6, 9)]
    assert parse_grid("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]


def test_real_formatting():
    assert fmt_real(1 / 3) == 0.333333333333
    assert fmt_real(float("inf")) == "inf"
    assert fmt_real(float("nan")) == "nan"


def test_timestamp_from_source_date_epoch(capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    _, out, _ = run(capsys, "catalog", "--n", "3")
    assert json.loads(out)["metadata"]["timestamp"] == "1970-01-01T00:00:00+00:00"


def test_schema_rejects_bad_records():
    import jsonschema
    bad = {"command": "catalog", "parameters": {}, "records": [{"type": "catalog", "n": 3}],
           "metadata": {"seed": 0, "tolerances": {}, "timestamp": None,
                        "versions": {k: "x" for k in ("cuspidal", "python", "numpy", "scipy", "mpmath")}}}
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, REPORT_SCHEMA)
