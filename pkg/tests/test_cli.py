import subprocess
import sys

import pytest

from quasiprob.boxes import pr_box
from quasiprob.cli import EXIT_INVALID, EXIT_OK, EXIT_SIGNALLING, run
from quasiprob.textio import format_behavior, parse_behavior, parse_jqpd


@pytest.fixture
def pr_file(tmp_path):
    path = tmp_path / "pr_box.beh"
    path.write_text(format_behavior(pr_box()))
    return path


def test_solve(pr_file, capsys):
    assert run(["solve", str(pr_file)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "M* = 2/1"
    witness = parse_jqpd(pr_file.with_suffix(".jqpd").read_text())
    assert witness.mass == 2


def test_solve_signalling_exits_3(tmp_path, capsys):
    text = format_behavior(pr_box()).replace(
        "settings=1,1 outcomes=0,1 p=1/2", "settings=1,1 outcomes=0,0 p=1/2"
    )
    path = tmp_path / "signalling.beh"
    path.write_text(text)
    assert run(["solve", str(path)]) == EXIT_SIGNALLING
    assert "discrepancy = 1/2" in capsys.readouterr().err


def test_malformed_file_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.beh"
    path.write_text("scenario: 2,2;2,2\nsettings=0,0 outcomes=0,0 p=oops\n")
    assert run(["solve", str(path)]) == EXIT_INVALID
    assert "line 2" in capsys.readouterr().err


def test_unknown_flag_exits_2():
    assert run(["scan", "--bogus"]) == EXIT_INVALID


def test_chsh(pr_file, capsys):
    assert run(["chsh", str(pr_file)]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 8 and out[0] == "S(m=0,n=0,+) = 4/1"


def test_make_box_then_inn22(tmp_path, capsys):
    path = tmp_path / "p4.beh"
    assert run(["make-box", "prn", "--n", "4", "-o", str(path)]) == EXIT_OK
    assert run(["inn22", str(path), "--n", "4"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "I_NN22 = 3/2"


def test_make_box_round_trips(tmp_path):
    path = tmp_path / "iso.beh"
    assert run(["make-box", "isotropic", "--x", "3/4", "-o", str(path)]) == EXIT_OK
    text = path.read_text()
    assert format_behavior(parse_behavior(text)) == text
    assert run(["make-box", "isotropic", "-o", str(path)]) == EXIT_INVALID


def test_scan_deterministic(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"scan{k}.csv"
        assert run(["scan", "--n", "3", "--mode", "sample", "--count", "30", "--seed", "7", "-o", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_scan_full_n3(capsys):
    assert run(["scan", "--n", "3", "--mode", "full"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "1,1,32" in out and "2,1,480" in out


def test_vertices(tmp_path, capsys):
    assert run(["vertices", "--scenario", "2222", "--outdir", str(tmp_path)]) == EXIT_OK
    csv_text = (tmp_path / "classification_2222.csv").read_text()
    assert "1,1,16" in csv_text and "2,1,8" in csv_text
    from quasiprob.textio import parse_behaviors

    assert len(parse_behaviors((tmp_path / "vertices_2222.beh").read_text())) == 24


def test_clone(capsys):
    assert run(["clone", "--x", "3/4"]) == EXIT_OK
    assert "min_observable_marginal = -1/16" in capsys.readouterr().out
    assert run(["clone", "--sweep"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 18
    assert run(["clone", "--x", "5/4"]) == EXIT_INVALID


def test_module_entry_point(pr_file):
    out = subprocess.run(
        [sys.executable, "-m", "quasiprob", "solve", str(pr_file)],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "M* = 2/1"
