import pathlib

import pytest

from lexsg.cli import EXIT_INPUT, EXIT_LIMIT, EXIT_OK, EXIT_USAGE, main

GAMES = pathlib.Path(__file__).resolve().parent.parent / "games"
FIG1 = str(GAMES / "fig1.sg")
FIG3 = str(GAMES / "fig3.sg")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_text_output(capsys):
    code, out, _ = run(capsys, "solve", FIG1, "--mode", "exact")
    assert code == EXIT_OK
    assert "r: (1/2, 1/4)" in out
    assert "stages explored: 1/3" in out
    assert "wall time" in out


def test_solve_lines_output(capsys):
    code, out, _ = run(capsys, "solve", FIG3, "--mode", "exact", "--format", "lines")
    assert code == EXIT_OK
    lines = [l for l in out.splitlines() if l]
    assert "value p 1 1" in lines
    assert all(l.startswith("value ") for l in lines)


def test_solve_lines_stable_across_runs(capsys):
    _, first, _ = run(capsys, "solve", FIG1, "--format", "lines")
    _, second, _ = run(capsys, "solve", FIG1, "--format", "lines")
    assert first == second


def test_solve_vi_nine_significant_digits(capsys):
    code, out, _ = run(capsys, "solve", FIG1, "--format", "lines")
    assert code == EXIT_OK
    row = next(l for l in out.splitlines() if l.startswith("value r "))
    first = row.split()[2]
    assert abs(float(first) - 0.5) < 1e-6
    assert len(first.replace("-", "").replace(".", "").lstrip("0")) <= 9


def test_solve_missing_file(capsys):
    code, _, err = run(capsys, "solve", "/no/such/file.sg")
    assert code == EXIT_INPUT
    assert "error" in err


def test_decide_true_false(capsys):
    code, out, _ = run(
        capsys, "decide", FIG1, "--mode", "exact", "--state", "r", "--threshold", "1/2,1/4"
    )
    assert code == EXIT_OK and out.startswith("true")
    code, out, _ = run(
        capsys, "decide", FIG1, "--mode", "exact", "--state", "r", "--threshold", "1/2,0.3"
    )
    assert code == EXIT_OK and out.startswith("false")


def test_decide_bad_threshold_arity(capsys):
    code, _, err = run(
        capsys, "decide", FIG1, "--mode", "exact", "--state", "r", "--threshold", "1/2"
    )
    assert code == EXIT_INPUT and "components" in err


def test_check_pass_and_fail(capsys, tmp_path):
    strat = tmp_path / "fig3.strat"
    code, _, _ = run(
        capsys, "solve", FIG3, "--mode", "exact", "--strategy-out", str(strat)
    )
    assert code == EXIT_OK and strat.exists()
    code, out, _ = run(capsys, "check", FIG3, "--mode", "exact", "--strategy", str(strat))
    assert code == EXIT_OK and "PASS" in out

    # claim (1,1) for the memoryless "always toward q" behavior: must FAIL
    lying = tmp_path / "lying.strat"
    lying.write_text(
        "stage none p toq\nstage 1 p toq\nstage 2 p toq\nstage none r top\n"
        "stage 1 r top\nstage 2 r top\nvalue p 1 1\n"
    )
    code, out, _ = run(capsys, "check", FIG3, "--mode", "exact", "--strategy", str(lying))
    assert code == EXIT_OK and "FAIL" in out and "p" in out


def test_check_rejects_malformed_strategy(capsys, tmp_path):
    bad = tmp_path / "bad.strat"
    bad.write_text("stage none p nosuch\n")
    code, _, err = run(capsys, "check", FIG3, "--mode", "exact", "--strategy", str(bad))
    assert code == EXIT_INPUT and "nosuch" in err


def test_gen_roundtrip(capsys, tmp_path):
    out_path = tmp_path / "g.sg"
    code, _, _ = run(capsys, "gen", "--kind", "random", "--seed", "1", "--out", str(out_path))
    assert code == EXIT_OK
    code, out, _ = run(capsys, "solve", str(out_path), "--mode", "exact")
    assert code == EXIT_OK


def test_gen_seed_env_override(capsys, monkeypatch, tmp_path):
    a = tmp_path / "a.sg"
    b = tmp_path / "b.sg"
    monkeypatch.setenv("LEXSG_SEED", "5")
    run(capsys, "gen", "--kind", "random", "--out", str(a))
    monkeypatch.delenv("LEXSG_SEED")
    run(capsys, "gen", "--kind", "random", "--seed", "5", "--out", str(b))
    assert a.read_text() == b.read_text()


def test_gen_to_stdout(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "dice")
    assert code == EXIT_OK and out.startswith("sg 1")


def test_oracle_reports_zero_discrepancy(capsys):
    code, out, _ = run(capsys, "oracle", FIG1, "--mode", "exact")
    assert code == EXIT_OK
    assert "max discrepancy: 0" in out


def test_oracle_limit_exit_code(capsys):
    code, _, err = run(capsys, "oracle", FIG1, "--pair-limit", "1")
    assert code == EXIT_LIMIT and "limit" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == EXIT_USAGE
