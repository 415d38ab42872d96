import math

import pandas as pd
import pytest

from cvsuperpose.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main


def test_eval_tmss_fidelity_at_zero(capsys):
    assert main(["eval", "fidelity", "--s", "0", "--strategy", "tmss"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "0,nan,tmss,fidelity,0.5"


def test_eval_tmss_epr(capsys):
    assert main(["eval", "epr", "--s", "0.5", "--strategy", "tmss"]) == EXIT_OK
    fields = capsys.readouterr().out.strip().split(",")
    assert fields[:4] == ["0.5", "nan", "tmss", "epr"]
    assert float(fields[4]) == pytest.approx(2 * math.exp(-1), abs=1e-11)


def test_eval_optimized(capsys):
    assert main(["eval", "epr", "--s", "0.06", "--optimize-r"]) == EXIT_OK
    fields = capsys.readouterr().out.strip().split(",")
    assert 0.0 < float(fields[1]) < 1.0
    assert float(fields[4]) == pytest.approx(1.30, abs=0.02)


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_OK


def test_unknown_metric_is_usage_error(capsys):
    assert main(["eval", "purity", "--s", "0.1"]) == EXIT_USAGE


def test_out_of_range_r_is_usage_error(capsys):
    assert main(["eval", "epr", "--s", "0.1", "--r", "1.5"]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("✗")


def test_truncation_overflow_is_numerical_error(tmp_path, capsys):
    path = tmp_path / "tight.cfg"
    path.write_text("auto_grow=false\nn_max=5\n")
    code = main(["eval", "entropy", "--s", "1", "--strategy", "tmss", "--config", str(path)])
    assert code == EXIT_NUMERICAL
    assert "TruncationOverflowError" in capsys.readouterr().err


def test_threshold(capsys):
    assert main(["threshold", "--metric", "epr", "--strategy", "tmss", "--target", "1",
                 "--bracket", "0.1", "0.6"]) == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(math.log(2) / 2, abs=1e-4)


def test_threshold_without_straddle(capsys):
    code = main(["threshold", "--metric", "epr", "--strategy", "tmss", "--target", "3",
                 "--bracket", "0.1", "0.6"])
    assert code == EXIT_NUMERICAL


def test_figure_surface(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["figure", "2", "--grid", "3x3", "--out-dir", str(out)]) == EXIT_OK
    frame = pd.read_csv(out / "fig2.csv")
    assert len(frame) == 9
    assert "✓" in capsys.readouterr().out


@pytest.mark.slow
def test_figure_pnes(tmp_path):
    assert main(["figure", "4", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "fig4_diagonal.csv").exists()
    assert (tmp_path / "fig4_ladder.csv").exists()


def test_state_dump(capsys):
    assert main(["state", "--strategy", "coherent_AB", "--s", "0.3", "--r", "0.5", "--frame"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n_A,n_B,re,im"
    assert len(lines) == 5


def test_state_needs_r(capsys):
    assert main(["state", "--strategy", "coherent_AB", "--s", "0.3"]) == EXIT_USAGE


@pytest.mark.slow
def test_validate(capsys):
    assert main(["validate", "--n-max", "40"]) == EXIT_OK
    assert "All" in capsys.readouterr().out
