import csv
import math
from pathlib import Path

import numpy as np
import pytest

from measure_rates.cli import EXIT_BOUND, EXIT_INVALID, EXIT_OK, main
from measure_rates.config import ConfigError, RunConfig, load_config, parse_config

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))


def cfg_path(name):
    return str(Path(__file__).parent.parent / "configs" / name)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_round_trip(path):
    cfg = load_config(path)
    again = parse_config(cfg.to_text())
    assert again == cfg
    assert again.to_text() == cfg.to_text()


@pytest.mark.parametrize("text,key", [
    ("interval.a = -1", "interval"),
    ("sim.dt = 0", "sim.dt"),
    ("sim.scheme = rk4", "sim.scheme"),
    ("initial.target = cauchy", "initial.target"),
    ("bogus.key = 1", "bogus.key"),
    ("sim.T = abc", "sim.T"),
    ("field.builtin = quadratic", "field.builtin"),
    ("field.d = 1\nfield.h1.knots = 0, 1\nfield.h1.values = 0, 1\nfield.h1.beta = -1", "field.h1.beta"),
    ("field.d = 2\nfield.h1.knots = 0, 1\nfield.h1.values = 0, 1\nfield.h1.beta = 1", "field.d"),
    ("sim.T = 1\nsim.T = 2", "sim.T"),
])
def test_rejections_name_key(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key and key in str(exc.value)


def test_initial_measure_checks():
    with pytest.raises(ConfigError):
        RunConfig(support_points=(0.0, 1.0), weights=(1.0,)).initial_measure()
    with pytest.raises(ConfigError):
        RunConfig(weights=(1.0,)).initial_measure()
    mu = RunConfig(support_n=4, weights=(0.25,) * 4).initial_measure()
    assert np.allclose(mu.points, [0.125, 0.375, 0.625, 0.875])
    mu = RunConfig(target="uniform", support_n=2).initial_measure()
    assert np.allclose(mu.points, [0.25, 0.75]) and np.allclose(mu.weights, [0.5, 0.5])


def test_flow_cli(tmp_path):
    assert main(["flow", "--config", cfg_path("two_atom.cfg"), "--t", "0.6931",
                 "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "flow.csv")
    assert rows[0] == ["time", "x_1", "x_2", "R"]
    last = [float(v) for v in rows[-1]]
    assert last[1] == pytest.approx(2 / 3, abs=1e-4) and last[2] == pytest.approx(1 / 3, abs=1e-4)
    assert (tmp_path / "flow.csv").read_bytes().count(b"\r\n") == len(rows)


def test_price_cli(tmp_path):
    assert main(["price", "--config", cfg_path("dirac.cfg"), "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "curve.csv")
    assert rows[0] == ["maturity", "price", "yield"]
    for r in rows[1:]:
        assert float(r[2]) == pytest.approx(0.03, abs=1e-15)
        assert float(r[1]) == pytest.approx(math.exp(-0.03 * float(r[0])), rel=1e-15)


def test_simulate_byte_identical(tmp_path):
    args = ["simulate", "--config", cfg_path("stochastic_two_atom.cfg"), "--seed", "7"]
    cfg = tmp_path / "small.cfg"
    cfg.write_text(Path(cfg_path("stochastic_two_atom.cfg")).read_text()
                   .replace("sim.n_paths = 20000", "sim.n_paths = 5")
                   .replace("sim.T = 2", "sim.T = 0.1")
                   .replace("check.maturities = 0.5, 1, 2", ""))
    args[2] = str(cfg)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert (a / "paths.csv").read_bytes() == (b / "paths.csv").read_bytes()
    rows = read_csv(a / "paths.csv")
    assert rows[0] == ["path", "time", "x_1", "x_2", "R"]
    assert len(rows) == 1 + 5 * 101
    # every value round-trips through its text form
    for r in rows[1:20]:
        assert all(repr(float(v)) == v for v in r[1:])


def test_check_cli(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(Path(cfg_path("stochastic_two_atom.cfg")).read_text()
                   .replace("sim.n_paths = 20000", "sim.n_paths = 2000")
                   .replace("sim.dt = 0.001", "sim.dt = 0.01"))
    assert main(["check", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    text = (tmp_path / "report.txt").read_text()
    assert sum(l.startswith("martingale T=") for l in text.splitlines()) == 3 and "bound=" in text
    assert text.rstrip().endswith("result: PASS")


def test_stability_cli(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(Path(cfg_path("stability.cfg")).read_text()
                   .replace("sim.n_paths = 1000", "sim.n_paths = 50")
                   .replace("sim.dt = 0.001", "sim.dt = 0.01"))
    assert main(["stability", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert "envelope" in (tmp_path / "report.txt").read_text()


def test_invalid_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sim.dt = -1\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_INVALID
    assert "sim.dt" in capsys.readouterr().err
    assert main(["nonsense"]) == EXIT_INVALID
    assert main(["stability", "--config", cfg_path("two_atom.cfg"), "--out", str(tmp_path)]) == EXIT_INVALID
    assert main(["flow", "--config", cfg_path("missing.cfg")]) == EXIT_INVALID


def test_failed_bound_exit_code(tmp_path, monkeypatch):
    import measure_rates.cli as cli
    from measure_rates.experiments import ExperimentReport

    def fake(cfg):
        return ExperimentReport("x", {}, [], False, "metric <= 0")
    monkeypatch.setattr(cli, "run_convergence_experiment", fake)
    assert main(["converge", "--config", cfg_path("converge.cfg"), "--out", str(tmp_path)]) == EXIT_BOUND
