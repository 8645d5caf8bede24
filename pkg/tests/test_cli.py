import io
import json
import math
import subprocess
import sys

import pytest

from ivpquad import SolutionFunction, cli
from ivpquad.problems import double_range


def run(args):
    out = io.StringIO()
    code = cli.main(args, stdout=out)
    return code, out.getvalue()


def test_suite_csv_round_trip():
    code, text = run(["integrate", "--suite", "closed15", "--format", "csv"])
    assert code == 0
    reports = cli.parse_csv(text)
    assert [r.problem for r in reports] == [f"closed15#{i}" for i in range(1, 16)]
    again = io.StringIO()
    cli.emit(reports, "csv", again)
    assert again.getvalue() == text
    for r in reports:
        assert r.ok and r.n_evals > 0 and r.n_elements > 0


def test_json_mirrors_report_fields():
    code, text = run(["integrate", "--id", "14", "--format", "json"])
    assert code == 0
    (doc,) = json.loads(text)
    assert set(doc) == set(cli.RunReport.COLUMNS)
    assert doc["value"] == pytest.approx(0.5, abs=1e-15)
    assert doc["n_inner"] is None


def test_jobs_keeps_order():
    serial = cli.parse_csv(run(["integrate", "--suite", "closed15", "--format", "csv"])[1])
    par = cli.parse_csv(run(["integrate", "--suite", "closed15", "--format", "csv",
                             "--jobs", "3"])[1])
    assert [r.problem for r in par] == [r.problem for r in serial]
    assert [r.value for r in par] == [r.value for r in serial]


def test_defaults_echo():
    _, text = run(["integrate", "--id", "6", "--M", "13", "--q1", "0.25", "--format", "json"])
    _, plain = run(["integrate", "--id", "6", "--format", "json"])
    assert json.loads(text)[0]["config"] == json.loads(plain)[0]["config"]
    _, pinned = run(["integrate", "--id", "6", "--drel", "1e-3", "--paper-defaults",
                     "--format", "json"])
    assert json.loads(pinned)[0]["config"] == json.loads(plain)[0]["config"]


def test_trace_and_dump(tmp_path):
    trace, dump = tmp_path / "steps.csv", tmp_path / "sol.json"
    code, _ = run(["integrate", "--id", "6", "--trace", str(trace), "--dump", str(dump)])
    assert code == 0
    rows = trace.read_text().splitlines()
    assert rows[0].startswith("x_left,width,y_right,rel_err")
    widths = [float(r.split(",")[1]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(widths, widths[1:]))
    sol = SolutionFunction.load(dump)
    assert len(sol) == len(widths)
    code, text = run(["eval", "--load", str(dump), "0.5", "1.0", "--format", "json"])
    assert code == 0
    pts = json.loads(text)
    assert pts[0]["y"] == sol.eval(0.5)
    assert pts[1]["dydx"] == sol.eval_derivative(1.0)


def test_bender_smoke():
    code, text = run(["bender", "--y0", "1", "--xmax", "2", "--format", "json"])
    assert code == 0
    (doc,) = json.loads(text)
    assert math.isfinite(doc["value"]) and doc["reference"] is None


def test_bender_table_and_drift():
    code, text = run(["bender", "--y0", "1,10", "--drift", "3e-10", "--format", "csv"])
    assert code == 0
    reports = cli.parse_csv(text)
    assert len(reports) == 4
    assert reports[0].abs_err <= 1e-8 and reports[2].abs_err <= 1e-8
    assert reports[1].abs_err <= 5e-13 and reports[3].abs_err <= 5e-13


def test_double_dump_and_reuse(tmp_path):
    j = tmp_path / "J.json"
    code, text = run(["double", "--b1", "1.0", "--b2", "1.0", "--defaults-table3",
                      "--dump-j", str(j), "--format", "csv"])
    assert code == 0
    (first,) = cli.parse_csv(text)
    assert first.value == pytest.approx(6.06281000519787e18, rel=1e-14)
    assert first.n_inner > 0
    code, text = run(["double", "--b1", "1.0", "--b2", "1.0", "--defaults-table3",
                      "--load-j", str(j), "--format", "csv"])
    (second,) = cli.parse_csv(text)
    assert code == 0 and second.n_inner == 0 and second.value == first.value


def test_double_spec_file(tmp_path):
    spec = double_range.DoubleRangeSpec(0, 1, 2.0, 1.0, 0, 1, 1.0, 1.0)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_dict()))
    code, text = run(["double", "--spec", str(path), "--format", "json"])
    assert code == 0
    assert json.loads(text)[0]["value"] == pytest.approx(1 / 30, rel=1e-13)
    code, text = run(["double", "--l1", "0", "--m1", "1", "--a1", "2", "--b1", "1",
                      "--l2", "0", "--m2", "1", "--a2", "1", "--b2", "1", "--format", "json"])
    assert code == 0
    assert json.loads(text)[0]["value"] == pytest.approx(1 / 30, rel=1e-13)


@pytest.mark.parametrize("args", [
    ["integrate", "--id", "99"],
    ["integrate"],
    ["integrate", "--suite", "other"],
    ["integrate", "--suite", "closed15", "--trace", "x.csv"],
    ["integrate", "--suite", "closed15", "--jobs", "0"],
    ["bender", "--y0", "5..1"],
    ["bender", "--y0", "abc"],
    ["bender", "--xmax", "-1"],
    ["double"],
    ["double", "--defaults-table3", "--b1", "1"],
    ["double", "--a1", "1", "--b1", "2", "--l1", "0", "--m1", "0",
     "--l2", "0", "--m2", "0", "--a2", "1", "--b2", "1"],
    ["double", "--spec", "/nonexistent/spec.json"],
    ["integrate", "--id", "1", "--M", "3"],
    ["integrate", "--id", "1", "--drel", "-1"],
])
def test_usage_errors(args):
    code, _ = run(args)
    assert code == 2


def test_bad_config_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["integrate", "--id", "1", "--format", "xml"])
    assert info.value.code == 2


def test_engine_failure_exit_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "nope"}')
    code, _ = run(["eval", "--load", str(bad), "0.5"])
    assert code == 1
    code, _ = run(["integrate", "--id", "3", "--M", "70"])
    assert code == 2


def test_engine_error_exit_one(monkeypatch, capsys):
    from ivpquad.errors import StiffnessError

    def boom(*args, **kwargs):
        raise StiffnessError("no acceptable element", 0.5)

    monkeypatch.setattr(cli, "propagate", boom)
    code, _ = run(["integrate", "--id", "2"])
    assert code == 1
    assert "numerical failure" in capsys.readouterr().err


def test_tolerance_miss_exit_one():
    # far too loose to meet the smooth-row bound
    code, text = run(["integrate", "--id", "3", "--drel", "0.5", "--M", "4",
                      "--format", "json"])
    assert code == 1
    assert json.loads(text)[0]["ok"] is False


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "ivpquad.cli", "integrate", "--id", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "closed15#1" in proc.stdout
