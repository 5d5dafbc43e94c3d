"""
Tests for the Gamma function, GridFunction and the discrete Caputo derivative
"""
import math

import numpy as np
import pytest
from scipy import integrate

from fracbvp.errors import DomainError
from fracbvp.fraccalc import (
    GridFunction,
    caputo_grid,
    caputo_grid_all,
    caputo_power_exact,
    gamma,
)


@pytest.mark.parametrize("x, expected", [
    (1.0, 1.0),
    (1.5, math.sqrt(math.pi) / 2),
    (2.5, 0.75 * math.sqrt(math.pi)),
    (5.0, 24.0),
])
def test_gamma_known_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-13)


def test_gamma_recursion(rng):
    x = rng.uniform(0.5, 9.0, size=100)
    np.testing.assert_allclose(gamma(x + 1.0), x * gamma(x), rtol=1e-12)


def test_gamma_reflection(rng):
    x = rng.uniform(0.05, 0.95, size=50)
    np.testing.assert_allclose(
        gamma(x) * gamma(1.0 - x), np.pi / np.sin(np.pi * x), rtol=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan")])
def test_gamma_rejects_non_positive(x):
    with pytest.raises(DomainError):
        gamma(x)


def test_grid_function_validates_mesh():
    with pytest.raises(DomainError):
        GridFunction(nodes=[0.0], values=[1.0])
    with pytest.raises(DomainError):
        GridFunction(nodes=[0.0, 0.5], values=[1.0, 2.0])
    with pytest.raises(DomainError):
        GridFunction(nodes=[0.0, 0.6, 0.4, 1.0], values=[0.0] * 4)
    with pytest.raises(DomainError):
        GridFunction(nodes=[0.0, 1.0], values=[0.0, 1.0, 2.0])


def test_grid_function_is_read_only():
    u = GridFunction.uniform(5, lambda t: t ** 2)
    with pytest.raises(ValueError):
        u.values[0] = 1.0


def test_grid_function_interpolates():
    u = GridFunction.uniform(3, lambda t: 2.0 * t)
    assert u(0.25) == pytest.approx(0.5)
    assert isinstance(u(0.25), float)
    np.testing.assert_allclose(u(np.array([0.0, 0.75, 1.0])), [0.0, 1.5, 2.0])
    assert u.step == pytest.approx(0.5)
    assert u.is_uniform()
    assert u.sup_norm() == pytest.approx(2.0)


@pytest.mark.parametrize("mu", [1.1, 1.5, 1.9, 2.0])
def test_caputo_of_affine_vanishes(mu):
    u = GridFunction.uniform(129, lambda t: 3.0 - 2.0 * t)
    derivative = caputo_grid_all(u, mu)
    np.testing.assert_allclose(derivative[1:], 0.0, atol=1e-9)


def test_caputo_of_linear_at_first_order():
    # D^mu t = t^(1 - mu)/Gamma(2 - mu), reproduced exactly by the L1 scheme
    u = GridFunction.uniform(65, lambda t: t)
    for index in (1, 10, 64):
        t = u.nodes[index]
        assert caputo_grid(u, 0.5, index) == pytest.approx(
            caputo_power_exact(1.0, 0.5, t), rel=1e-12)


def test_caputo_quadratic_is_exact_for_second_order():
    u = GridFunction.uniform(257, lambda t: t ** 2)
    assert caputo_grid(u, 1.5, -1) == pytest.approx(2.0 / gamma(1.5), rel=1e-10)


def test_caputo_grid_matches_grid_all():
    u = GridFunction.uniform(101, lambda t: np.exp(t))
    everywhere = caputo_grid_all(u, 1.3)
    for index in (1, 7, 50, 100):
        assert caputo_grid(u, 1.3, index) == pytest.approx(everywhere[index], rel=1e-12)


def test_caputo_errors():
    u = GridFunction.uniform(33, lambda t: t ** 2)
    with pytest.raises(DomainError):
        caputo_grid(u, 1.5, 0)
    assert caputo_grid(u, 0.5, 0) == 0.0
    with pytest.raises(DomainError):
        caputo_grid(u, 2.0, 0)
    assert caputo_grid(u, 2.0, 16) == pytest.approx(2.0)
    assert np.isnan(caputo_grid_all(u, 1.5)[0])
    assert np.isnan(caputo_grid_all(u, 2.0)[0])
    with pytest.raises(DomainError):
        caputo_grid(u, 2.5, 3)
    with pytest.raises(DomainError):
        caputo_grid(u, 0.0, 3)
    with pytest.raises(DomainError):
        caputo_grid(u, 1.5, 33)
    graded = GridFunction(nodes=np.linspace(0.0, 1.0, 33) ** 2, values=np.zeros(33))
    with pytest.raises(DomainError):
        caputo_grid(graded, 1.5, 3)


@pytest.mark.parametrize("p, mu", [(1.5, 1.5), (2.0, 1.5), (1.5, 0.5), (2.0, 0.5)])
def test_caputo_converges_to_power_oracle(p, mu):
    exact = caputo_power_exact(p, mu, 1.0)
    errors = []
    for intervals in (256, 512, 1024, 2048, 4096):
        u = GridFunction.uniform(intervals + 1, lambda t: np.power(t, p))
        errors.append(abs(caputo_grid(u, mu, -1) - exact))
    for previous, following in zip(errors, errors[1:]):
        assert following <= 1.1 * previous + 1e-10
    assert errors[-1] <= 1e-2


def test_caputo_of_t_to_alpha_at_one():
    u = GridFunction.uniform(4097, lambda t: np.power(t, 1.5))
    assert caputo_grid(u, 1.5, -1) == pytest.approx(gamma(2.5), abs=1e-2)


@pytest.mark.parametrize("p, mu, t, expected", [
    (1.0, 1.5, 0.7, 0.0),
    (0.0, 0.5, 0.3, 0.0),
    (1.5, 1.5, 1.0, 1.329340388179137),
    (2.0, 1.5, 1.0, 2.0 / 0.886226925452758),
    (2.0, 1.0, 0.5, 1.0),
])
def test_caputo_power_exact(p, mu, t, expected):
    assert caputo_power_exact(p, mu, t) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_caputo_power_exact_matches_quadrature():
    p, mu, t = 1.7, 1.4, 0.8
    # D^mu t^p = 1/Gamma(2 - mu) int_0^t p (p - 1) s^(p - 2) (t - s)^(1 - mu) ds
    value, _ = integrate.quad(
        lambda s: p * (p - 1.0), 0.0, t, weight="alg", wvar=(p - 2.0, 1.0 - mu))
    assert caputo_power_exact(p, mu, t) == pytest.approx(value / gamma(2.0 - mu), rel=1e-10)


def test_caputo_power_exact_rejects():
    with pytest.raises(DomainError):
        caputo_power_exact(0.5, 1.5, 0.5)
    with pytest.raises(DomainError):
        caputo_power_exact(2.0, 1.5, 0.0)
    with pytest.raises(DomainError):
        caputo_power_exact(2.0, 1.5, 1.5)
