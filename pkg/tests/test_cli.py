import math
import subprocess
import sys

import numpy as np
import pytest

from omdrift.cli import CASES, ConfigError, case_beta, main, parse_grid, parse_range
from omdrift.search import read_records_csv
from omdrift.simulate import read_trajectory_csv

SMALL_GRID = "0.1:0.1:0.2,0.05:0.05:0.1"


def test_named_cases():
    beta, eps = case_beta("I")
    assert eps == 0.8
    np.testing.assert_array_equal(beta, [0, 0.5, 0, -1.2, 0, 0, 1, 0, 0, 0])
    assert np.flatnonzero(case_beta("II")[0]).tolist() == [1, 3]
    assert np.flatnonzero(case_beta("III")[0]).tolist() == [7]
    assert set(CASES) == {"I", "II", "III"}
    with pytest.raises(ConfigError):
        case_beta("IV")


def test_parse_grid_ranges():
    cells = parse_grid("0:0.025:0.4,0.01:0.01:0.3")
    assert len(cells) == 510
    assert parse_grid("0.375/0.22;0/0.01") == [(0.375, 0.22), (0.0, 0.01)]
    for bad in ("0:1", "a:b:c,0:1:2", "0:0.1:1"):
        with pytest.raises(ConfigError):
            parse_grid(bad)
    assert parse_range("0:0.5:1") == (0.0, 0.5, 1.0)


def test_simulate_case_ii(tmp_path, capsys):
    assert main(["simulate", "--case", "II", "--out", str(tmp_path)]) == 0
    tr = read_trajectory_csv(tmp_path / "trajectory.csv")
    assert tr.z.size == 1001
    assert tr.z[0] == 0.0 and abs(tr.z[-1] - math.sqrt(2)) <= 1e-10
    assert "boundary residual" in capsys.readouterr().out


def test_simulate_zero_drift_constant(tmp_path):
    rc = main(["simulate", "--beta", ",".join(["0"] * 10), "--eps", "0.5",
               "--x0", "1", "--xT", "1", "--out", str(tmp_path)])
    assert rc == 0
    assert np.all(read_trajectory_csv(tmp_path / "trajectory.csv").z == 1.0)


def test_bad_dt_rejected(tmp_path, capsys):
    assert main(["simulate", "--case", "II", "--dt", "0.0007", "--out", str(tmp_path)]) == 2
    assert "does not divide" in capsys.readouterr().err


def test_missing_drift_rejected(tmp_path):
    assert main(["simulate", "--eps", "0.8", "--out", str(tmp_path)]) == 2


def test_fit_needs_input(tmp_path):
    assert main(["fit", "--out", str(tmp_path)]) == 2


def test_fit_constant_trajectory_gives_sentinel(tmp_path):
    main(["simulate", "--beta", ",".join(["0"] * 10), "--eps", "0.5",
          "--x0", "1", "--xT", "1", "--out", str(tmp_path)])
    out = tmp_path / "fit"
    rc = main(["fit", str(tmp_path / "trajectory.csv"), "--grid", SMALL_GRID, "--out", str(out)])
    assert rc != 0
    (final,), _ = read_records_csv(out / "final.csv")
    assert final.sentinel
    assert "no final model" in (out / "summary.txt").read_text()


def test_pipeline_outputs(tmp_path):
    rc = main(["pipeline", "--case", "III", "--grid", "0:0.025:0.05,0.01:0.01:0.03",
               "--trace", "0.025/0.01", "--out", str(tmp_path)])
    assert rc == 0
    grid, _ = read_records_csv(tmp_path / "grid.csv")
    assert len(grid) == 9
    (final,), _ = read_records_csv(tmp_path / "final.csv")
    assert final.support == (7,)
    rounds, extra = read_records_csv(tmp_path / "trace_0.025_0.01.csv")
    assert extra["round"] == list(range(1, len(rounds) + 1))
    assert set(extra["accepted"]) <= {0.0, 1.0}
    inner, extra = read_records_csv(tmp_path / "inner_0.025_0.01.csv")
    assert len(inner) <= 50


def test_multi_seed_layout(tmp_path):
    rc = main(["pipeline", "--case", "III", "--grid", "0.025/0.01", "--seeds", "2",
               "--seed", "4", "--out", str(tmp_path)])
    assert rc == 0
    for s in (4, 5):
        assert (tmp_path / f"seed_{s}" / "final.csv").exists()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[model]\ncase = II\ndt = 0.01\n[output]\nout = %s\n" % (tmp_path / "a"))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert read_trajectory_csv(tmp_path / "a" / "trajectory.csv").z.size == 101
    assert main(["simulate", "--config", str(cfg), "--dt", "0.02"]) == 0
    assert read_trajectory_csv(tmp_path / "a" / "trajectory.csv").z.size == 51


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[model]\ncolour = blue\n")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "omdrift.cli", "simulate", "--case", "III",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
