import math

import numpy as np
import pytest

from measure_rates.measure_space import DomainError, Interval, new_atomic
from measure_rates.oracles import deterministic_flow
from measure_rates.sde_solver import (SimulationConfig, euler_predictor, euler_step, exp_step,
                                      path_normals, simulate_coupled, simulate_ensemble,
                                      simulate_path)
from measure_rates.volatility import builtin_fields, zero_field

I01 = Interval(0, 1)
SUP = np.array([0.0, 1.0])
LN2 = math.log(2)


def lin(iv=I01, beta=0.5):
    return builtin_fields(iv, beta)["linear"]


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(SUP, lin(), dt=0.0, T=1.0)
    with pytest.raises(ValueError):
        SimulationConfig(SUP, lin(), dt=0.1, T=1.0, scheme="milstein")
    with pytest.raises(ValueError):
        SimulationConfig([1.0, 0.0], lin(), dt=0.1, T=1.0)
    with pytest.raises(DomainError):
        SimulationConfig([0.0, 2.0], lin(), dt=0.1, T=1.0)
    with pytest.raises(ValueError):
        SimulationConfig(SUP, lin(), dt=2.0, T=1.0)


def test_time_grid_remainder():
    g = SimulationConfig(SUP, lin(), dt=0.3, T=1.0).time_grid()
    assert g[-1] == 1.0 and np.allclose(np.diff(g), [0.3, 0.3, 0.3, 0.1])
    g = SimulationConfig(SUP, lin(), dt=1e-3, T=LN2).time_grid()
    assert g[-1] == LN2 and len(g) == 695 and g[-2] == pytest.approx(0.693)


def test_step_examples():
    f = zero_field(I01)
    y = euler_predictor([0.5, 0.5], np.empty(0), 0.1, SUP, f)
    assert np.allclose(y, [0.525, 0.475], atol=1e-15)
    fl = lin()
    for step in (euler_step, exp_step):
        assert np.array_equal(step([1.0, 0.0], [0.7], 0.1, SUP, fl), [1.0, 0.0])
        assert np.array_equal(step([0.0, 1.0], [-2.0], 0.1, SUP, fl), [0.0, 1.0])
    assert np.array_equal(euler_step([1.0, 0.0], np.empty(0), 0.1, [0.3, 0.6],
                                     zero_field(I01)), [1.0, 0.0])
    with pytest.raises(ValueError):
        euler_step([0.5, 0.5], [0.1, 0.2], 0.1, SUP, fl)


def test_exp_step_matches_flow():
    f = zero_field(I01)
    mu0 = new_atomic(I01, SUP, [0.5, 0.5])
    errs = []
    for dt in (0.1, 0.05, 0.025):
        y = exp_step([0.5, 0.5], np.empty(0), dt, SUP, f)
        errs.append(np.max(np.abs(y - deterministic_flow(mu0, dt).weights)))
    # zero-field log-Euler is exact for this flow
    assert max(errs) <= 1e-15


def test_deterministic_limit():
    errs = []
    mu0 = new_atomic(I01, SUP, [0.5, 0.5])
    exact = deterministic_flow(mu0, LN2).weights
    assert np.allclose(exact, [2 / 3, 1 / 3], atol=1e-15)
    for dt in (2e-3, 1e-3):
        cfg = SimulationConfig(SUP, zero_field(I01), dt, LN2)
        p = simulate_path(cfg, [0.5, 0.5])
        errs.append(np.max(np.abs(p.states[-1] - exact)))
    assert errs[1] <= 10 * 1e-3
    order = math.log2(errs[0] / errs[1])
    assert order >= 0.9


def test_determinism_and_splitting():
    cfg = SimulationConfig(SUP, lin(), 0.01, 0.5, seed=3, n_paths=6)
    a = simulate_ensemble(cfg, [0.5, 0.5])
    b = simulate_ensemble(cfg, [0.5, 0.5], workers=3, chunk_size=2)
    assert np.array_equal(a.states, b.states)
    lo = simulate_ensemble(cfg.replace(n_paths=2), [0.5, 0.5])
    hi = simulate_ensemble(cfg.replace(n_paths=4), [0.5, 0.5], path_offset=2)
    assert np.array_equal(np.concatenate([lo.states, hi.states]), a.states)
    one = simulate_ensemble(cfg.replace(n_paths=1), [0.5, 0.5])
    p = simulate_path(cfg, [0.5, 0.5], 0)
    assert np.array_equal(one.states[0], p.states)
    assert np.array_equal(simulate_path(cfg, [0.5, 0.5], 4).states, a.states[4])


def test_zero_field_paths_identical():
    cfg = SimulationConfig(SUP, zero_field(I01), 0.01, 0.5, seed=1, n_paths=4)
    e = simulate_ensemble(cfg, [0.3, 0.7])
    assert np.all(e.states == e.states[0])


def test_noise_contract():
    z = path_normals(5, 2, 2, 10)
    assert z.shape == (2, 10)
    assert np.array_equal(z[0], path_normals(5, 2, 2, 10)[0])
    assert not np.array_equal(z, path_normals(5, 3, 2, 10))


@pytest.mark.parametrize("scheme", ["projected-euler", "exponential"])
@pytest.mark.parametrize("name", ["linear", "level-curvature"])
def test_invariants_along_paths(scheme, name):
    iv = Interval(1, 1)
    f = builtin_fields(iv, 1.0)[name]
    sup = np.array([-1.0, -0.2, 0.4, 1.0])
    cfg = SimulationConfig(sup, f, 0.01, 1.0, scheme, seed=11, n_paths=50)
    e = simulate_ensemble(cfg, [0.1, 0.4, 0.3, 0.2])
    assert np.max(np.abs(e.states.sum(-1) - 1)) <= 1e-12
    assert e.states.min() >= 0
    if scheme == "exponential":
        assert e.states.min() > 0
    z = simulate_ensemble(cfg, [0.5, 0.0, 0.5, 0.0])
    assert np.all(z.states[..., [1, 3]] == 0.0)
    d = simulate_ensemble(cfg, [0.0, 0.0, 1.0, 0.0])
    assert np.all(d.states == np.array([0.0, 0.0, 1.0, 0.0]))
    assert np.all(d.rates == 0.4)


def test_scheme_agreement_order():
    f = lin(beta=0.5)
    diffs = []
    for dt in (4e-3, 1e-3):
        cfgs = [SimulationConfig(SUP, f, dt, 1.0, s, seed=2, n_paths=200)
                for s in ("projected-euler", "exponential")]
        a, b = simulate_coupled(cfgs, [[0.5, 0.5]] * 2)
        diffs.append(np.mean(np.max(np.abs(a.states - b.states), axis=(1, 2))))
    assert diffs[1] < diffs[0]
    assert math.log(diffs[0] / diffs[1], 4) >= 0.4


def test_bad_start():
    cfg = SimulationConfig(SUP, lin(), 0.1, 1.0)
    with pytest.raises(DomainError):
        simulate_path(cfg, [0.7, 0.7])
    with pytest.raises(ValueError):
        simulate_path(cfg, [1.0])


def test_record_times():
    cfg = SimulationConfig(SUP, lin(), 0.01, 1.0, seed=0, n_paths=3)
    full = simulate_ensemble(cfg, [0.5, 0.5])
    part = simulate_ensemble(cfg, [0.5, 0.5], record_times=[0.5, 1.0])
    assert np.allclose(part.times, [0.0, 0.5, 1.0])
    assert np.array_equal(part.states[:, 2], full.states[:, -1])
    assert np.array_equal(part.integrated_rates[:, 1], full.integrated_rates[:, 50])
