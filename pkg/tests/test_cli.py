import json

import pytest

from btbsolve.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY, OUT_DIR_ENV, main

POSITIVE = {"w": 1, "B": 2, "c_L": 0.3, "c_H": 1.5, "phi0": 0.2, "phi1": 0.6}
NEGATIVE = {**POSITIVE, "phi0": 0.6, "phi1": 0.2}
FAST = {"n_samples": 100_000, "grid_n": 201}


@pytest.fixture
def write_config(tmp_path):
    def write(**sections):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(sections))
        return str(path)
    return write


def run(*argv):
    return main([*argv, "--quiet"])


def test_solve_mse(tmp_path, write_config):
    cfg = write_config(market=POSITIVE, p=0.8)
    assert run("solve", "--config", cfg, "--out", str(tmp_path / "o")) == EXIT_OK
    data = json.loads((tmp_path / "o" / "solve.json").read_text())
    assert data["selected"] == "MSE"
    eq = data["equilibria"][0]
    assert (eq["chi_star"], eq["eta_star"]) == pytest.approx((5 / 6, 0.75))
    assert eq["payoffs"]["employer"] == pytest.approx(0.4)
    text = (tmp_path / "o" / "solve.txt").read_text()
    assert "MSE" in text and "0.833333" in text


def test_solve_negative_uses_population_p1(tmp_path, write_config, capsys):
    cfg = write_config(market=NEGATIVE, population={"gamma": 0.5, "p1": 0.5, "p2": 0.3})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "equilibria (3)" in out and "Pareto-selected: FQE-aggressive" in out


def test_invalid_config_writes_nothing(tmp_path, write_config, capsys):
    cfg = write_config(market={**POSITIVE, "B": 0.9}, p=0.8)
    out = tmp_path / "o"
    assert run("solve", "--config", cfg, "--out", str(out)) == EXIT_VALIDATION
    assert "B ≤ w" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("population, scenario", [
    ({"gamma": 0.8, "p1": 0.8, "p2": 0.4}, "BtbParetoDominant"),
    ({"gamma": 0.5, "p1": 0.3, "p2": 0.2}, "NoEffect"),
])
def test_compare_positive(tmp_path, write_config, population, scenario):
    cfg = write_config(market=POSITIVE, population=population)
    assert run("compare", "--config", cfg, "--out", str(tmp_path)) == EXIT_OK
    assert json.loads((tmp_path / "compare.json").read_text())["scenario"] == scenario


def test_compare_negative_reports_interval(tmp_path, write_config):
    cfg = write_config(market=NEGATIVE, population={"gamma": 0.5, "p1": 0.5, "p2": 0.25})
    assert run("compare", "--config", cfg, "--out", str(tmp_path)) == EXIT_OK
    data = json.loads((tmp_path / "compare.json").read_text())
    assert data["scenario"] == "EmployerHurtWorkersHelped"
    assert data["employer_interval"] == pytest.approx([2 / 7, 1 / 3])


def test_compare_needs_population(tmp_path, write_config):
    cfg = write_config(market=POSITIVE, p=0.8)
    assert run("compare", "--config", cfg, "--out", str(tmp_path)) == EXIT_VALIDATION


def test_verify_passes_and_perturbation_fails(tmp_path, write_config, capsys):
    cfg = write_config(market=POSITIVE, population={"gamma": 0.8, "p1": 0.8, "p2": 0.4},
                       oracle=FAST)
    assert run("verify", "--config", cfg, "--out", str(tmp_path / "a")) == EXIT_OK
    data = json.loads((tmp_path / "a" / "verify.json").read_text())
    assert data["passed"] and len(data["checks"]) == 10
    assert run("verify", "--config", cfg, "--out", str(tmp_path / "b"),
               "--perturb", "0.05") == EXIT_VERIFY
    assert "verification failed: equilibrium MSE" in capsys.readouterr().err
    data = json.loads((tmp_path / "b" / "verify.json").read_text())
    assert data["first_failure"].startswith("equilibrium MSE")


def test_verify_seed_stability(tmp_path, write_config):
    cfg = write_config(market=NEGATIVE, population={"gamma": 0.5, "p1": 0.5, "p2": 0.3},
                       oracle={**FAST, "grid_n": 101})
    codes = {run("verify", "--config", cfg, "--out", str(tmp_path), "--seed", str(s))
             for s in range(10)}
    assert codes == {EXIT_OK}


def test_sweep_figure_one_style(tmp_path, write_config, capsys):
    cfg = write_config(market={**POSITIVE}, p=0.8, sweep={
        "mode": "SingleGroupRegions",
        "axes": [{"name": "phi0", "min": 0, "max": 1, "steps": 41},
                 {"name": "phi1", "min": 0, "max": 1, "steps": 41}]})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    labels = {line.split(",")[2] for line in (tmp_path / "sweep.csv").read_text().splitlines()[1:]}
    assert labels == {"ZQE", "MSE", "FQE-aggressive", "FQE-conservative"}
    assert "1681 cells" in out


def test_sweep_figure_two_style_json(tmp_path, write_config):
    cfg = write_config(market=NEGATIVE, population={"gamma": 0.5, "p1": 0.9, "p2": 0.1}, sweep={
        "mode": "BtbScenarios",
        "axes": [{"name": "gamma", "min": 0.05, "max": 0.95, "steps": 10},
                 {"name": "p2", "min": 0.02, "max": 0.9, "steps": 12}]})
    assert run("sweep", "--config", cfg, "--out", str(tmp_path), "--format", "json") == EXIT_OK
    rows = json.loads((tmp_path / "sweep.json").read_text())
    assert len(rows) == 120 and len({r["label"] for r in rows}) >= 3


def test_sweep_without_block(tmp_path, write_config):
    cfg = write_config(market=POSITIVE, p=0.8)
    assert run("sweep", "--config", cfg, "--out", str(tmp_path)) == EXIT_VALIDATION


def test_simulate(tmp_path, write_config):
    cfg = write_config(market=POSITIVE, p=0.8)
    assert run("simulate", "--config", cfg, "--out", str(tmp_path), "--n", "50000") == EXIT_OK
    data = json.loads((tmp_path / "simulate.json").read_text())
    assert data["chi"] == pytest.approx(5 / 6) and data["passed"]
    assert run("simulate", "--config", cfg, "--out", str(tmp_path), "--chi", "1", "--eta", "0.5",
               "--n", "50000") == EXIT_OK
    assert run("simulate", "--config", cfg, "--out", str(tmp_path), "--chi", "2") == EXIT_VALIDATION


def test_overrides_and_env_dir(tmp_path, write_config, monkeypatch):
    cfg = write_config(market={**POSITIVE, "B": 0.5}, p=0.8)
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env"))
    assert run("solve", "--config", cfg, "--set", "market.B=2") == EXIT_OK
    assert (tmp_path / "env" / "solve.json").exists()
    assert run("solve", "--set", "market.w=1", "--set", "market.B=2", "--set", "market.c_L=0.3",
               "--set", "market.c_H=1.5", "--set", "market.phi0=0.2", "--set", "market.phi1=0.6",
               "--p", "0.5") == EXIT_OK
    data = json.loads((tmp_path / "env" / "solve.json").read_text())
    assert data["selected"] == "FQE-conservative"


@pytest.mark.parametrize("argv", [
    ["solve", "--set", "market"],
    ["solve", "--set", "market.w=abc"],
    ["solve", "--eps", "0.5", "--set", "market.w=1"],
])
def test_bad_values_exit_one(tmp_path, argv, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(*argv) == EXIT_VALIDATION


@pytest.mark.parametrize("argv", [["nonsense"], ["solve", "--seed", "x"]])
def test_argument_errors_exit_one(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_VALIDATION


def test_bad_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("solve", "--config", str(bad)) == EXIT_VALIDATION
    assert run("solve", "--config", str(tmp_path / "absent.json")) == EXIT_IO


def test_unwritable_output_is_io_error(tmp_path, write_config):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    cfg = write_config(market=POSITIVE, p=0.8)
    assert run("solve", "--config", cfg, "--out", str(blocker / "sub")) == EXIT_IO
