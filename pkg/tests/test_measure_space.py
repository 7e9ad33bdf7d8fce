import math

import numpy as np
import pytest
from hypothesis import given, settings

from measure_rates.measure_space import (DomainError, Interval, PiecewiseLinearFn, dirac,
                                         hstar_distance, hstar_norm, is_probability,
                                         new_atomic, pair, riesz_function, total_mass,
                                         zero_measure)
from measure_rates.oracles import hstar_norm_quadrature

from conftest import INTERVALS, atomic_measures, random_atomic, random_probability

I11 = Interval(1, 1)
I01 = Interval(0, 1)


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(-1, 1)
    with pytest.raises(ValueError):
        Interval(0, 0)
    assert Interval(0, 1).contains([0, 0.5, 1])


def test_new_atomic_examples():
    mu = new_atomic(I11, [0], [1])
    assert list(mu.points) == [0] and list(mu.weights) == [1]
    mu = new_atomic(I01, [1, 0], [0.5, 0.5])
    assert list(mu.points) == [0, 1] and list(mu.weights) == [0.5, 0.5]
    mu = new_atomic(I01, [0.5, 0.5], [0.3, 0.2])
    assert list(mu.points) == [0.5] and mu.weights[0] == pytest.approx(0.5, abs=1e-15)


def test_new_atomic_errors():
    with pytest.raises(DomainError):
        new_atomic(I01, [1.5], [1])
    with pytest.raises(ValueError):
        new_atomic(I01, [0.1, 0.2], [1])


def test_total_mass_and_probability():
    assert total_mass(dirac(I11, 0)) == 1
    assert total_mass(new_atomic(I01, [0, 1], [0.5, 0.5])) == 1
    assert total_mass(new_atomic(I01, [0, 1], [0.25, -0.25])) == 0
    assert is_probability(new_atomic(I01, [0, 1], [0.5, 0.5]), 0)
    assert not is_probability(new_atomic(I01, [0, 1], [0.25, -0.25]), 0)
    assert is_probability(new_atomic(I01, [0], [1 + 1e-12]), 1e-9)


def test_hstar_norm_hand_cases():
    assert hstar_norm(dirac(I11, 0)) == pytest.approx(1.0, abs=1e-12)
    assert hstar_norm(dirac(I11, 1)) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert hstar_norm(new_atomic(I11, [-1, 1], [0.5, 0.5])) == pytest.approx(math.sqrt(1.5), abs=1e-12)


def test_hstar_distance_examples():
    assert hstar_distance(dirac(I11, 1), dirac(I11, 0)) == pytest.approx(1.0, abs=1e-12)
    mu = new_atomic(I01, [0, 1], [0.5, 0.5])
    assert hstar_distance(mu, mu) == 0
    nu = new_atomic(I01, [1, 0, 1], [0.25, 0.5, 0.25])
    assert hstar_distance(mu, nu) == 0
    with pytest.raises(ValueError):
        hstar_distance(mu, dirac(I11, 0))


def test_pair_examples():
    phi = PiecewiseLinearFn([0, 0.3, 1], [1.0, -2.0, 0.5])
    assert pair(dirac(I01, 0.3), phi) == pytest.approx(-2.0)
    assert pair(new_atomic(I01, [0, 1], [0.5, 0.5]), PiecewiseLinearFn.identity(I01)) == 0.5
    mu = new_atomic(I01, [0.2, 0.7], [0.4, -1.3])
    assert pair(mu, PiecewiseLinearFn.constant(1.0, I01)) == pytest.approx(total_mass(mu))


def test_riesz_examples():
    phi = riesz_function(dirac(I11, 0))
    assert np.allclose(phi(np.linspace(-1, 1, 11)), 1.0)
    phi = riesz_function(dirac(I01, 1))
    r = np.linspace(0, 1, 11)
    assert np.allclose(phi(r), 1 + r)
    phi = riesz_function(zero_measure(I01))
    assert np.allclose(phi(r), 0.0)


def test_h_norm_of_identity():
    for iv in INTERVALS:
        assert PiecewiseLinearFn.identity(iv).h_norm() == pytest.approx(math.sqrt(iv.length))


@settings(max_examples=300, deadline=None)
@given(atomic_measures())
def test_riesz_isometry(mu):
    n = hstar_norm(mu)
    assert riesz_function(mu).h_norm() == pytest.approx(n, rel=1e-10, abs=1e-14)


@settings(max_examples=300, deadline=None)
@given(atomic_measures())
def test_riesz_represents_pairing(mu):
    # <mu, phi> = (phi_mu, phi)_H for the inner product behind the H-norm
    iv = mu.interval
    phi = PiecewiseLinearFn([iv.left, 0.5 * (iv.left + iv.right), iv.right], [0.3, -1.0, 2.0])
    rep = riesz_function(mu)
    knots = np.union1d(rep.knots, phi.knots)
    # both are linear between consecutive union knots
    d_rep = np.diff(rep(knots))
    d_phi = np.diff(phi(knots))
    inner = rep(0.0) * phi(0.0) + np.sum(d_rep * d_phi / np.diff(knots))
    assert pair(mu, phi) == pytest.approx(inner, rel=1e-9, abs=1e-9)


def test_duality_bound_random():
    rng = np.random.default_rng(5)
    for iv in INTERVALS:
        for _ in range(200):
            mu = random_atomic(rng, iv)
            k = np.sort(rng.uniform(iv.left, iv.right, 6))
            phi = PiecewiseLinearFn(np.unique(k), rng.normal(size=len(np.unique(k))))
            assert abs(pair(mu, phi)) <= hstar_norm(mu) * phi.h_norm() * (1 + 1e-12) + 1e-12


def test_probability_norm_bound():
    rng = np.random.default_rng(6)
    for iv in INTERVALS:
        for _ in range(200):
            mu = random_probability(rng, iv)
            assert hstar_norm(mu) ** 2 <= 1 + iv.length + 1e-12


@settings(max_examples=200, deadline=None)
@given(atomic_measures(interval=I11), atomic_measures(interval=I11), atomic_measures(interval=I11))
def test_triangle_and_homogeneity(mu, nu, la):
    assert hstar_distance(mu, la) <= hstar_distance(mu, nu) + hstar_distance(nu, la) + 1e-12
    for c in (-2.0, 0.5, 3.0):
        assert hstar_norm(mu.scale(c)) == pytest.approx(abs(c) * hstar_norm(mu), rel=1e-12, abs=1e-15)


def test_quadrature_oracle_agreement():
    rng = np.random.default_rng(7)
    for iv in INTERVALS:
        for _ in range(10):
            mu = random_atomic(rng, iv)
            assert abs(hstar_norm_quadrature(mu, 10**5) - hstar_norm(mu) ** 2) <= 1e-3


def test_norm_atom_on_zero_and_endpoints():
    # atoms at break points: 0 and the interval ends
    iv = Interval(2, 3)
    mu = new_atomic(iv, [-2, 0, 3], [0.2, 0.5, 0.3])
    exact = 1.0 + 0.2 ** 2 * 2 + 0.3 ** 2 * 3
    assert hstar_norm(mu) ** 2 == pytest.approx(exact, rel=1e-14)
