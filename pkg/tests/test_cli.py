import json
import subprocess
import sys

import pytest

from twistcalc.cli import main
from twistcalc.verify import CATALOG


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("f, g, expected", [
    ("x1", "x2", "x1 x2 + 1/2 h"),
    ("x2", "x1", "x1 x2 - 1/2 h"),
    ("1", "x1^2 x2", "x1^2 x2"),
])
def test_star(capsys, f, g, expected):
    code, out, _ = run(capsys, "star", "moyal_r2.scn", f, g)
    assert code == 0 and out.strip() == expected


def test_star_with_vanishing_theta(capsys):
    assert run(capsys, "star", "moyal_theta0.scn", "x1", "x2")[1].strip() == "x1 x2"


def test_star_order_override(capsys):
    code, out, _ = run(capsys, "star", "jordanian_line.scn", "x1^2", "x1^3", "--order", "3")
    assert out.strip() == "x1^5 + 6 h x1^4 + 6 h^2 x1^3"


@pytest.mark.parametrize("name, flag, expected", [
    ("nablaV", None, "dx1∧dx2"),
    ("flat", None, "0"),
    ("flat", "--quantized", "-h dx1∧dx2"),
])
def test_curvature(capsys, name, flag, expected):
    argv = ["curvature", "moyal_r2.scn", name] + ([flag] if flag else [])
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip() == expected


def test_verify_machine_output(capsys):
    code, out, _ = run(capsys, "verify", "moyal_r2.scn", "--format", "machine",
                       "--checks", "twist.cocycle,star.unit")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["ok"]
    assert [c["id"] for c in doc["checks"]][-1] == "star.unit"


def test_verify_fails_on_a_broken_twist(capsys):
    code, out, _ = run(capsys, "verify", "moyal_faulty.scn", "--checks", "twist.cocycle")
    assert code == 1 and "twist.cocycle" in out


def test_human_output_has_one_row_per_check(capsys):
    code, out, _ = run(capsys, "verify", "jordanian_line.scn")
    ids = {c.id for c in CATALOG}
    rows = [l for l in out.splitlines() if l.split(" ", 1)[0] in ids]
    assert code == 0 and len(rows) == len(CATALOG)


def test_report_is_byte_stable(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path, jobs in ((a, "1"), (b, "2")):
        code, out, _ = run(capsys, "report", "jordanian_line.scn", str(path),
                           "--format", "machine", "--jobs", jobs)
        assert code == 0 and str(path) in out
    assert a.read_bytes() == b.read_bytes()


def test_checks_lists_the_catalog(capsys):
    code, out, _ = run(capsys, "checks")
    assert code == 0 and len(out.splitlines()) == len(CATALOG)


@pytest.mark.parametrize("argv, needle", [
    (["curvature", "moyal_r2.scn", "nope"], "unknown connection"),
    (["verify", "missing.scn"], "cannot read"),
    (["verify", "moyal_r2.scn", "--checks", "twist.magic"], "unknown check"),
    (["star", "moyal_r2.scn", "x1", "x9"], "cannot parse"),
    (["verify", "moyal_r2.scn", "--jobs", "0"], "--jobs"),
])
def test_bad_input_exits_with_usage_code(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 2 and needle in err


def test_malformed_scenario_reports_the_line(capsys, tmp_path):
    p = tmp_path / "bad.scn"
    p.write_text("[scenario]\norder = 2\ndimension = 1\n[lie]\ngenerator E = 1\n[twist]\nkind = ?\n")
    code, _, err = run(capsys, "verify", str(p))
    assert code == 2 and f"{p}:7:" in err


def test_argparse_errors_exit_2(capsys):
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twistcalc", "star", "moyal_r2.scn", "x1", "x2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "x1 x2 + 1/2 h"
