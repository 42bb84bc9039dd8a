import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from usage_pricing.cli import EXIT_INFEASIBLE, EXIT_MISMATCH, EXIT_OK, EXIT_PARSE, run_command
from usage_pricing.scenario import CSV_COLUMNS, ResultRecord, ScenarioError, parse_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
FIVE_GROUP = str(SCENARIOS / "five_group.yaml")

TWO_GROUP = """\
supply: 4
groups:
  - {theta: 4, n: 1}
  - {theta: 1, n: 1}
options:
  j: 2
  sweep: {s_min: 0.5, s_max: 5, steps: 10}
"""


def _run(argv):
    buf = io.StringIO()
    code = run_command(argv, buf)
    return code, buf.getvalue()


@pytest.fixture
def two_group_file(tmp_path):
    p = tmp_path / "two.yaml"
    p.write_text(TWO_GROUP)
    return str(p)


def test_solve_commands(two_group_file):
    code, out = _run(["solve-cp", "--scenario", two_group_file])
    assert code == EXIT_OK
    rec = ResultRecord.from_json(out)
    assert rec.revenue == pytest.approx(3.5)
    assert rec.gain_vs_sp == pytest.approx(0.05)
    assert rec.flags["lambda_star"] == pytest.approx(0.25)

    code, out = _run(["solve-sp", "--scenario", two_group_file])
    assert ResultRecord.from_json(out).revenue == pytest.approx(10 / 3)

    code, out = _run(["solve-pp", "--scenario", two_group_file, "--j", "1"])
    rec = ResultRecord.from_json(out)
    assert rec.J == 1 and rec.revenue == pytest.approx(10 / 3)


def test_solve_pp_five_group():
    code, out = _run(["solve-pp", "--scenario", FIVE_GROUP])
    rec = ResultRecord.from_json(out)
    assert code == EXIT_OK and rec.J == 2
    assert rec.gain_vs_sp == pytest.approx(0.148, abs=0.003)
    assert rec.flags["j_used"] == 2


def test_solve_pp_needs_valid_j(two_group_file):
    assert _run(["solve-pp", "--scenario", two_group_file, "--j", "3"])[0] == EXIT_PARSE


def test_supply_override(two_group_file):
    code, out = _run(["solve-cp", "--scenario", two_group_file, "--supply", "1"])
    assert ResultRecord.from_json(out).k_eff == 1
    assert _run(["solve-cp", "--scenario", two_group_file, "--supply", "-1"])[0] == EXIT_PARSE


def test_csv_output(two_group_file):
    code, out = _run(["solve-cp", "--scenario", two_group_file, "--format", "csv"])
    lines = out.splitlines()
    assert lines[0] == "schema=1"
    assert lines[1] == ",".join(CSV_COLUMNS)
    assert lines[2] == "CP,4,2,3.5,0.05,2"


def test_record_roundtrip():
    rec = ResultRecord("PP", 4.0, 2, 3.5, 0.05, 2, (1.0, 0.5), (3.0, 1.0), {"j_used": 2})
    assert ResultRecord.from_json(rec.to_json()) == rec


def test_sweep_csv_deterministic(two_group_file, tmp_path):
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_command(["sweep", "--scenario", two_group_file, "--out", str(out_a)]) == EXIT_OK
    assert run_command(["sweep", "--scenario", two_group_file, "--out", str(out_b)]) == EXIT_OK
    assert out_a.read_bytes() == out_b.read_bytes()
    rows = out_a.read_text().splitlines()
    assert rows[0] == "schema=1" and len(rows) == 2 + 2 * 10
    assert rows[2].startswith("SP,0.5,1,")


def test_sweep_jsonl(two_group_file):
    code, out = _run(["sweep", "--scenario", two_group_file, "--format", "json-lines", "--j-values", "1", "2"])
    recs = [json.loads(line) for line in out.splitlines()]
    assert sum(r["type"] == "sample" for r in recs) == 20
    assert [r["J"] for r in recs if r["type"] == "separation"] == [1, 2]
    assert _run(["sweep", "--scenario", two_group_file, "--j-values", "7"])[0] == EXIT_PARSE


def test_design_menu(two_group_file):
    code, out = _run(["design-menu", "--scenario", two_group_file])
    menu, sel = (json.loads(line) for line in out.splitlines())
    assert code == EXIT_OK
    assert menu["prices"] == pytest.approx([1, 0.5]) and menu["thresholds"] == pytest.approx([1])
    assert sel["compatible"] and sel["revenue"] == pytest.approx(3.5)


def test_check_ic(two_group_file, capsys):
    code, out = _run(["check-ic", "--scenario", two_group_file])
    rec = json.loads(out)
    assert code == EXIT_OK and rec["feasible"]
    assert rec["t_thresholds"][0] == pytest.approx(1.75616176333004, abs=1e-9)
    code, _ = _run(["check-ic", "--scenario", str(SCENARIOS / "three_group_case1.yaml")])
    assert code == EXIT_INFEASIBLE


def test_design_menu_infeasible(tmp_path, capsys):
    p = tmp_path / "close.yaml"
    p.write_text("supply: 4\ngroups:\n  - {theta: 4, n: 1}\n  - {theta: 3.9, n: 1}\n")
    code, out = _run(["design-menu", "--scenario", str(p)])
    assert code == EXIT_INFEASIBLE and out == ""
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "infeasible" and err["q"] == 1 and err["margin"] < 0


def test_verify(two_group_file):
    code, out = _run(["verify", "--scenario", two_group_file, "--random-markets", "5", "--seed", "3"])
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == EXIT_OK
    assert recs[-1] == {"type": "summary", "checks": len(recs) - 1, "failed": 0, "seed": 3}


def test_verify_reports_mismatch(two_group_file, monkeypatch):
    from usage_pricing import cli

    monkeypatch.setattr(cli.oracle, "brute_lambda_bisection", lambda m: 123.0)
    code, _ = _run(["verify", "--scenario", two_group_file, "--random-markets", "0"])
    assert code == EXIT_MISMATCH


def test_missing_file(capsys):
    assert _run(["solve-cp", "--scenario", "/nonexistent.yaml"])[0] == EXIT_PARSE
    assert json.loads(capsys.readouterr().err)["kind"] == "parse"


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("supply: 4\ngroups:\n  - {theta: 4, n: 1}\n  - {theta: 4, n: 2}\n", "line 3"),
        ("supply: 4\ngroups:\n  - {theta: 4, n: 1}\n  - {theta: -1, n: 2}\n", "groups[1].theta"),
        ("supply: 4\ngroups:\n  - {theta: 4, n: 1.5}\n", "groups[0].n"),
        ("supply: 4\ngroups:\n  - {theta: 4, n: 1, colour: red}\n", "colour"),
        ("supply: -1\ngroups:\n  - {theta: 4, n: 1}\n", "supply"),
        ("groups:\n  - {theta: 4, n: 1}\n", "supply"),
        ("supply: 4\ngroups: []\n", "groups"),
        ("supply: 4\ngroups:\n  - {theta: 4, n: 1}\noptions: {j: 2}\n", "options.j"),
        ("supply: 4\ngroups:\n  - {theta: 4, n: 1}\noptions: {k_search: fast}\n", "k_search"),
        ("supply: [4\n", "malformed"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert fragment in str(info.value)


def test_duplicate_names_both_lines():
    text = "supply: 4\ngroups:\n  - {theta: 4, n: 1}\n  - {theta: 4, n: 2}\n"
    msg = str(pytest.raises(ScenarioError, parse_scenario, text).value)
    assert "line 3" in msg and "line 4" in msg


def test_bundled_scenarios_parse():
    for p in sorted(SCENARIOS.glob("*.yaml")):
        scn = parse_scenario(p)
        assert scn.market.size >= 3


def test_module_entry_point(two_group_file):
    res = subprocess.run(
        [sys.executable, "-m", "usage_pricing", "solve-cp", "--scenario", two_group_file],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert ResultRecord.from_json(res.stdout).k_eff == 2
