import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from pushdim.cli import VERIFY_FAILED, main
from pushdim.errors import GamblerFormatError, ParameterError
from pushdim.fsg import FiniteStateGambler
from pushdim.gales import BINARY
from pushdim.io import gambler_from_json, gambler_to_json, read_trace_csv

HALF = Fraction(1, 2)
UNIFORM = FiniteStateGambler(("q",), BINARY, {("q", "0"): "q", ("q", "1"): "q"}, {"q": {"0": HALF, "1": HALF}}, "q")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_c_prime(capsys):
    assert run(capsys, "generate", "C_prime", "--d", "1/2", "--bits", "10")[:2] == (0, "0001111000\n")


def test_generate_champernowne(capsys):
    assert run(capsys, "generate", "champernowne", "--d", "1/2", "--bits", "4")[1] == "0001\n"


def test_generate_bad_d(capsys):
    code, _, err = run(capsys, "generate", "C_prime", "--d", "5/4", "--bits", "4")
    assert code == ParameterError.exit_code and "between 0 and 1" in err


def test_generate_marked_renders_marker_token(capsys):
    _, out, _ = run(capsys, "generate", "marked", "--view", "blocks", "-n", "9")
    assert out.split() == ["00", "m", "01", "00", "m", "00", "00", "01", "m"]


@pytest.mark.parametrize("seq", ["reversed", "C", "spliced"])
def test_generate_other_sequences(capsys, seq):
    code, out, _ = run(capsys, "generate", seq, "-n", "16")
    assert code == 0 and len(out.strip()) == 16 and set(out.strip()) <= {"0", "1"}


def test_run_builtin_p_first_stage(capsys):
    code, out, _ = run(
        capsys, "run", "--builtin", "P", "--d", "1/2", "--eps", "1/8", "--s", "9/10",
        "--s-prime", "7/10", "--seq", "C_prime", "--bits", "10", "--gale-s", "1",
    )
    assert code == 0
    rows = read_trace_csv(out)
    assert rows[-1]["cap_exact"] == Fraction(49, 2)


def test_run_boundaries_increase_under_half_gale(capsys):
    code, out, _ = run(
        capsys, "run", "--builtin", "P", "--eps", "1/8", "--s", "9/10", "--s-prime", "7/10",
        "--stages", "4", "--gale-s", "t", "--boundaries",
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    vals = [float(r["sgale_log2"]) for r in rows]
    assert len(vals) == 4 and all(b > a for a, b in zip(vals, vals[1:]))


def test_run_gambler_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(gambler_to_json(UNIFORM))
    code, out, _ = run(capsys, "run", "--gambler", str(path), "--seq", "C", "--bits", "12")
    assert code == 0
    assert all(r["cap_exact"] == 1 for r in read_trace_csv(out))


def test_run_malformed_gambler(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"states": ["q"], "alphabet": ["0","1"], "start": "q", "transitions": [["q"]], "bets": {}}')
    code, _, err = run(capsys, "run", "--gambler", str(path), "--bits", "4")
    assert code == GamblerFormatError.exit_code and "transitions[0]" in err


def test_run_rejects_float_parameters(capsys):
    code, _, err = run(capsys, "run", "--builtin", "P", "--eps", "0.1", "--bits", "4")
    assert code == ParameterError.exit_code


def test_entropy_csv(capsys):
    code, out, _ = run(capsys, "entropy", "--seq", "C_prime", "--d", "1/2", "--lmax", "8", "--bits", "200000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and abs(float(rows[0]["H_l"]) - 0.8113) < 0.01
    assert all(r["flagged"] == "0" for r in rows)


def test_entropy_flags_thin_rows(capsys):
    _, out, _ = run(capsys, "entropy", "--seq", "C", "--lmax", "6", "--bits", "1000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["flagged"]) for r in rows] == [int(1000 < 50 * 2**l) for l in range(1, 7)]


def test_entropy_blocks_view(capsys):
    code, out, _ = run(capsys, "entropy", "--seq", "champernowne", "--view", "blocks", "--lmax", "1", "--bits", "20000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["H_l"]) > 0.999


def test_transform_lift(tmp_path, capsys):
    src, dst = tmp_path / "u.json", tmp_path / "l.json"
    src.write_text(gambler_to_json(UNIFORM))
    assert run(capsys, "transform", "lift", "--in", str(src), "--out", str(dst), "--target", "0,1,m")[0] == 0
    g = gambler_from_json(dst.read_text())
    assert g.bets["q"]["m"] == 0


def test_transform_blocks2bits(tmp_path, capsys):
    from pushdim.sequences import choose_A

    A = choose_A("1/2")
    g = FiniteStateGambler(("q",), A.alphabet(), {("q", "00"): "q", ("q", "01"): "q"}, {"q": {"00": HALF, "01": HALF}}, "q")
    src, dst = tmp_path / "b.json", tmp_path / "bits.json"
    src.write_text(gambler_to_json(g))
    assert run(capsys, "transform", "blocks2bits", "--in", str(src), "--out", str(dst), "--d", "1/2")[0] == 0
    doc = json.loads(dst.read_text())
    assert doc["bets"]["q|λ"] == {"0": "1/1", "1": "0/1"}
    assert doc["bets"]["q|0"] == {"0": "1/2", "1": "1/2"}


def test_transform_restrict_to_non_subset(tmp_path, capsys):
    src = tmp_path / "u.json"
    src.write_text(gambler_to_json(UNIFORM))
    code, _, _ = run(capsys, "transform", "restrict", "--in", str(src), "--target", "0,1,m")
    assert code == ParameterError.exit_code


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0, out
    assert out.count("PASS") == len(out.splitlines())
    assert VERIFY_FAILED != 0


def test_commands_are_deterministic(capsys):
    argv = ["run", "--builtin", "P", "--stages", "2"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "pushdim", "generate", "C", "-n", "8"], capture_output=True, text=True, check=True
    )
    assert out.stdout == "00011000\n"
