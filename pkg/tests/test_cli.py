import csv
import json
import subprocess
import sys

import pytest

from firoozbakht_verify.cli import main
from firoozbakht_verify.report import CSV_HEADER, Row, Summary
from firoozbakht_verify.runner import RunConfig, _finish


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_firoozbakht_small(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["firoozbakht", "--max-n", "1000", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 999 and {r["verdict"] for r in rows} == {"Holds"}
    assert [int(r["n"]) for r in rows] == list(range(1, 1000))
    summary = json.loads((tmp_path / "f.csv.summary.json").read_text())
    assert summary["totals"]["Holds"] == 999


def test_rosser_pn(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["rosser", "--what", "pn", "--from", "21", "--to", "10000",
                 "--out", str(out)]) == 0
    assert len(_rows(out)) == 2 * (10000 - 21 + 1)


def test_lemma1_counterexample_exit_1(tmp_path, capsys):
    out = tmp_path / "l.csv"
    assert main(["lemmas", "--id", "lemma1_step1", "--from", "2", "--to", "2",
                 "--out", str(out)]) == 1
    assert "counterexample" in capsys.readouterr().err
    assert _rows(out)[0]["verdict"] == "Fails"


def test_probes_do_not_fail_the_run(tmp_path):
    out = tmp_path / "p.csv"
    code = main(["inequalities", "--ids", "2.4", "--from", "3", "--to", "200",
                 "--assert-from", "89", "--out", str(out)])
    assert code == 0
    summary = json.loads((tmp_path / "p.csv.summary.json").read_text())
    assert summary["probes"]["Fails"] > 0 and summary["asserted"]["Fails"] == 0
    assert summary["onsets"]["ineq_2_4"] <= 89


def test_unresolved_exit_2(tmp_path):
    s = Summary("x")
    s.add([Row("x", 5, None, "Unresolved", "0.0", "1.0", "0.0", "1.0", 4096, True)])
    cfg = RunConfig(command="firoozbakht", out=str(tmp_path / "u.csv"))
    assert _finish(cfg, s, sys.stderr).exit_code == 2


def test_empty_range_header_only(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["firoozbakht", "--from", "5", "--to", "5", "--out", str(out)]) == 0
    assert out.read_text() == CSV_HEADER + "\n"
    summary = json.loads((tmp_path / "e.csv.summary.json").read_text())
    assert summary["totals"]["total"] == 0


def test_one_holds_record(tmp_path):
    out = tmp_path / "one.csv"
    assert main(["firoozbakht", "--from", "4", "--to", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("firoozbakht,4,5,Holds,")


@pytest.mark.parametrize("argv", [
    ["firoozbakht", "--format", "json", "--out", "{tmp}/x.csv"],
    ["firoozbakht", "--max-bits", "100"],
    ["firoozbakht", "--threads", "0"],
    ["firoozbakht", "--from", "10", "--to", "3"],
    ["rosser", "--what", "zeta"],
    ["nosuchcommand"],
    ["firoozbakht", "--resume"],
    ["gaps", "--b", "one"],
])
def test_usage_errors_exit_3(argv, tmp_path):
    argv = [a.replace("{tmp}", str(tmp_path)) for a in argv]
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 3


def test_unwritable_output_exit_3(tmp_path):
    assert main(["firoozbakht", "--to", "10", "--out", str(tmp_path / "no" / "x.csv")]) == 3


def test_json_lines_output(tmp_path):
    out = tmp_path / "f.jsonl"
    assert main(["firoozbakht", "--to", "20", "--format", "json", "--out", str(out)]) == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(recs) == 19 and recs[0]["inequality_id"] == "firoozbakht"


def _firoozbakht(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["firoozbakht", "--to", "30000", "--chunk", "1000", "--out", str(out), *extra])
    return code, out


def test_thread_count_does_not_change_output(tmp_path):
    c1, a = _firoozbakht(tmp_path, "t1.csv")
    c2, b = _firoozbakht(tmp_path, "t2.csv", "--threads", "2")
    assert c1 == c2 == 0 and a.read_bytes() == b.read_bytes()


def test_resume_matches_uninterrupted(tmp_path):
    _, whole = _firoozbakht(tmp_path, "whole.csv")
    ck = tmp_path / "ck.json"
    code, part = _firoozbakht(tmp_path, "part.csv", "--checkpoint", str(ck),
                              "--halt-after", "15000")
    assert code == 130
    state = json.loads(ck.read_text())
    assert state["last_completed_n"] == 15000 and not state["done"]
    code, part = _firoozbakht(tmp_path, "part.csv", "--checkpoint", str(ck), "--resume")
    assert code == 0 and part.read_bytes() == whole.read_bytes()
    # resuming a finished run is a no-op with the same exit status
    code, again = _firoozbakht(tmp_path, "part.csv", "--checkpoint", str(ck), "--resume")
    assert code == 0 and again.read_bytes() == whole.read_bytes()


def test_resume_with_other_config_exit_3(tmp_path):
    ck = tmp_path / "ck.json"
    code, _ = _firoozbakht(tmp_path, "a.csv", "--checkpoint", str(ck), "--halt-after", "2000")
    assert code == 130
    out = tmp_path / "a.csv"
    assert main(["firoozbakht", "--to", "40000", "--chunk", "1000", "--out", str(out),
                 "--checkpoint", str(ck), "--resume"]) == 3
    state = json.loads(ck.read_text())
    state["config_digest"] = "0" * 64
    ck.write_text(json.dumps(state))
    code, _ = _firoozbakht(tmp_path, "a.csv", "--checkpoint", str(ck), "--resume")
    assert code == 3


@pytest.mark.parametrize("argv", [
    ["lemmas", "--to", "300"],
    ["inequalities", "--ids", "2.6,3.6,3.11,z", "--from", "6", "--to", "40"],
    ["gaps", "--to", "2000", "--b", "1.17"],
    ["rosser", "--what", "pi,theta,psi", "--from", "2", "--to", "300"],
    ["thresholds", "--ids", "ineq_2_4,pn_bounds,kourbatov_b1", "--to", "500"],
])
def test_probe_ranges_exit_0(argv, tmp_path):
    out = tmp_path / "o.csv"
    assert main(argv + ["--assert-from", "100000000", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == CSV_HEADER


def test_gaps_summary_reports_onset_and_max_ratio(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gaps", "--to", "10000", "--assert-from", "10", "--out", str(out)]) == 0
    s = json.loads((tmp_path / "g.csv.summary.json").read_text())
    assert s["gaps"]["kourbatov_onset"] == 10 and s["gaps"]["failing_ks"] == [1, 2, 3, 4, 6, 9]
    assert s["max_cramer_ratio"]["n"] == 1


def test_all_small(tmp_path):
    out = tmp_path / "all.csv"
    assert main(["all", "--to", "600", "--out", str(out)]) == 0
    s = json.loads((tmp_path / "all.csv.summary.json").read_text())
    assert s["asserted"]["Fails"] == 0 and s["totals"]["total"] > 0


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "firoozbakht_verify", "firoozbakht", "--to", "50"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[0] == CSV_HEADER
    assert len(res.stdout.splitlines()) == 50
