import csv

import numpy as np
import pytest

from ldirk3.cli import (EXIT_OK, EXIT_USAGE, OUTPUT_ENV, RunConfig, UsageError, main,
                        read_config_file)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_solution_and_report(tmp_path):
    code = main(["run", "--case", "sin4", "--integrator", "dirk3", "--n", "40",
                 "--t-final", "0.3", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _rows(tmp_path / "sin4_dirk3.csv")
    assert rows[0] == ["x", "u", "exact", "error"]
    assert len(rows) == 41
    assert float(rows[1][3]) == pytest.approx(float(rows[1][1]) - float(rows[1][2]))
    report = _rows(tmp_path / "report.csv")
    head = dict(zip(report[0], report[1]))
    assert head["case"] == "sin4" and float(head["t"]) == pytest.approx(0.3)
    assert float(head["l1"]) < 1e-3


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["run", "--case", "burgers", "--integrator", "ie", "--n", "30",
                 "--t-final", "0.1"]) == EXIT_OK
    assert (tmp_path / "env" / "burgers_ie.csv").exists()


def test_2d_output_has_diagonal(tmp_path):
    assert main(["run", "--case", "bl2d", "--integrator", "ssprk3", "--cfl", "0.5", "--n", "12",
                 "--t-final", "0.02", "--out", str(tmp_path)]) == EXIT_OK
    rows = _rows(tmp_path / "bl2d_ssprk3.csv")
    assert rows[0] == ["x", "y", "u"] and len(rows) == 145
    diag = _rows(tmp_path / "bl2d_ssprk3_diagonal.csv")
    assert diag[0] == ["s", "value"] and len(diag) == 13


def test_field_dump(tmp_path):
    assert main(["run", "--case", "sod", "--integrator", "ie", "--n", "40", "--t-final", "0.01",
                 "--format", "field-dump", "--out", str(tmp_path)]) == EXIT_OK
    data = np.load(tmp_path / "sod_ie.npz")
    assert data["u"].shape == (3, 40)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# experiment\ncase = burgers\nintegrator = ie\nn = 30\nt-final = 0.05\n")
    assert main(["run", "--config", str(cfg), "--n", "24", "--out", str(tmp_path)]) == EXIT_OK
    assert len(_rows(tmp_path / "burgers_ie.csv")) == 25
    assert read_config_file(cfg)["t_final"] == 0.05


@pytest.mark.parametrize("text", ["case burgers\n", "colour = red\n", "n = many\n"])
def test_bad_config_files(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    with pytest.raises(UsageError):
        read_config_file(cfg)


@pytest.mark.parametrize("argv", [
    ["run", "--case", "nope"],
    ["run", "--case", "sod", "--integrator", "dirk3", "--limiter", "legacy"],
    ["run", "--case", "sin4", "--ref", "density"],
    ["run", "--case", "sod", "--n", "-5"],
    ["run", "--case", "sod", "--integrator", "rk4"],
    ["run"],
    ["convergence", "--case", "sod", "--ns", "20,40"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_runconfig_validation():
    RunConfig("sod", ref="pressure").validate()
    with pytest.raises(UsageError):
        RunConfig("sod", ref="conservative:7").validate()


def test_convergence_command(tmp_path, capsys):
    assert main(["convergence", "--case", "sin4", "--integrator", "ssprk3", "--cfl", "0.3",
                 "--ns", "20,40", "--out", str(tmp_path)]) == EXIT_OK
    assert "rate" in capsys.readouterr().out
    rows = _rows(tmp_path / "convergence_sin4_ssprk3.csv")
    assert rows[0][:4] == ["n", "linf", "l1", "l2"] and len(rows) == 3


def test_sweep_command(tmp_path):
    code = main(["sweep", "--case", "burgers", "--n", "30", "--t-final", "0.1",
                 "--integrators", "ie,ldirk3", "--limiters", "new,legacy", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _rows(tmp_path / "sweep.csv")
    assert len(rows) == 4  # header, ie/new, ldirk3/new, ldirk3/legacy
    assert (tmp_path / "ldirk3-legacy" / "burgers_ldirk3.csv").exists()


def test_sweep_parallel_jobs(tmp_path):
    assert main(["sweep", "--case", "burgers", "--n", "24", "--t-final", "0.05",
                 "--integrators", "ie,dirk3", "--jobs", "2", "--out", str(tmp_path)]) == EXIT_OK
    assert len(_rows(tmp_path / "sweep.csv")) == 3


def test_cases_and_bench(capsys):
    assert main(["cases"]) == EXIT_OK
    assert "vortex" in capsys.readouterr().out
    assert main(["bench", "--n", "20", "--repeat", "1"]) == EXIT_OK
    assert "speedup" in capsys.readouterr().out
