"""
Tests for the Hammerstein operator, Picard iteration, the constant-source oracle and verify
"""
import numpy as np
import pytest

from fracbvp.errors import ConditionError, DomainError
from fracbvp.fraccalc import GridFunction
from fracbvp.kernel import gamma_weight, green_apply, row_integral
from fracbvp.model import Nonlinearity, StieltjesFunctional, constant, linear, piecewise_linear
from fracbvp.solver import (
    HammersteinOperator,
    hammerstein_apply,
    linear_constant_oracle,
    picard_solve,
    verify,
)

SATURATING = "1 + u/(1 + u)"
MILD = "1 + 0.1*u/(1 + u)"


def test_oracle_values(example_params, example_functional):
    u = linear_constant_oracle(example_params, example_functional, 1.0, np.linspace(0, 1, 129))
    assert u(0.25) == pytest.approx(3.99992, abs=1e-4)
    assert u(0.0) == pytest.approx(4.59395, abs=1e-4)
    assert u(1.0) == pytest.approx(1.84173, abs=1e-4)
    scaled = linear_constant_oracle(example_params, example_functional, 0.1, u.nodes)
    np.testing.assert_allclose(scaled.values, 0.1 * u.values, rtol=1e-13)


def test_oracle_with_constant_term(example_params):
    L = StieltjesFunctional(lambda0=0.2, atoms=[(0.25, 0.5)])
    u = linear_constant_oracle(example_params, L, 0.0, np.linspace(0, 1, 65))
    # lambda[u] = 0.2 + 0.5 u(xi) and u = gamma lambda[u]
    lambda_u = 0.2 / (1.0 - 0.5 * gamma_weight(example_params, 0.25))
    np.testing.assert_allclose(u.values, gamma_weight(example_params, u.nodes) * lambda_u)


def test_oracle_errors(example_params, example_functional):
    nodes = np.linspace(0, 1, 17)
    with pytest.raises(DomainError):
        linear_constant_oracle(example_params, StieltjesFunctional(), 1.0, nodes)
    with pytest.raises(DomainError):
        linear_constant_oracle(
            example_params, StieltjesFunctional.distributed(np.ones_like), 1.0, nodes)
    with pytest.raises(DomainError):
        linear_constant_oracle(example_params, example_functional, -1.0, nodes)
    with pytest.raises(ConditionError):
        linear_constant_oracle(
            example_params, StieltjesFunctional(atoms=[(0.25, 1.0)]), 1.0, nodes)


@pytest.mark.parametrize("n_nodes", [129, 257, 513, 1025])
def test_picard_reproduces_oracle(example_params, example_functional, n_nodes):
    u0 = GridFunction.uniform(n_nodes)
    report = picard_solve(example_params, example_functional, constant(1.0), u0)
    oracle = linear_constant_oracle(example_params, example_functional, 1.0, u0.nodes)
    assert report.converged and not report.diverged
    assert report.clamp_events == 0
    assert report.residual_fixed_point <= report.tol
    np.testing.assert_allclose(report.solution.values, oracle.values, rtol=0, atol=1e-8)


def test_verify_accepts_oracle(example_params, example_functional, example_constants):
    oracle = linear_constant_oracle(
        example_params, example_functional, 1.0, np.linspace(0, 1, 1025))
    report = verify(example_params, example_functional, constant(1.0), oracle,
                    example_constants.c)
    assert report.ode_residual <= 1e-6
    assert report.bc0_residual <= 1e-6
    assert report.bc1_residual <= 1e-6
    assert report.cone_margin > 0
    assert report.nonneg and report.in_cone


def test_verify_flags_wrong_source(example_params, example_functional, example_constants):
    oracle = linear_constant_oracle(
        example_params, example_functional, 1.0, np.linspace(0, 1, 257))
    report = verify(example_params, example_functional, constant(2.0), oracle,
                    example_constants.c, source_at_zero=1.0)
    assert report.ode_residual == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("values, margin, nonneg", [
    (lambda t: np.full_like(t, 3.0), lambda c: (1.0 - c) * 3.0, True),
    (lambda t: t, lambda c: -c, True),
    (lambda t: t - 0.5, lambda c: -0.5 - 0.5 * c, False),
])
def test_verify_cone_margin(example_params, example_functional, values, margin, nonneg):
    u = GridFunction.uniform(65, values)
    report = verify(example_params, example_functional, constant(0.0), u, 0.132)
    assert report.cone_margin == pytest.approx(margin(0.132))
    assert report.nonneg == nonneg
    assert not report.in_cone or margin(0.132) >= 0


def test_verify_errors(example_params, example_functional):
    with pytest.raises(DomainError):
        verify(example_params, example_functional, constant(1.0), GridFunction.uniform(33), 0.1)
    graded = GridFunction(nodes=np.linspace(0, 1, 129) ** 2, values=np.ones(129))
    with pytest.raises(DomainError):
        verify(example_params, example_functional, constant(1.0), graded, 0.1)


def test_operator_maps_into_cone(example_params, example_functional, example_constants, rng):
    f = Nonlinearity.from_expression(SATURATING)
    zero = GridFunction.uniform(129)
    operator = HammersteinOperator.build(example_params, example_functional, f, zero.nodes)
    for _ in range(100):
        u = zero.with_values(rng.uniform(0.0, 10.0) * rng.random(zero.size))
        image = operator(u)
        assert np.min(image.values) >= example_constants.c * image.sup_norm() * (1 - 1e-12)


def test_operator_is_monotone(example_params, example_functional, rng):
    f = Nonlinearity.from_expression(SATURATING)
    zero = GridFunction.uniform(129)
    for _ in range(20):
        u = zero.with_values(rng.uniform(0.0, 5.0, zero.size))
        v = u.with_values(u.values + rng.uniform(0.0, 1.0, zero.size))
        lower = hammerstein_apply(example_params, example_functional, f, u)
        upper = hammerstein_apply(example_params, example_functional, f, v)
        assert np.all(lower.values <= upper.values + 1e-13)


def test_operator_at_zero_is_green_apply(example_params):
    L = StieltjesFunctional(lambda0=0.3, atoms=[(0.25, 0.5)])
    f = Nonlinearity.from_expression("1 + t")
    zero = GridFunction.uniform(257)
    image = hammerstein_apply(example_params, L, f, zero)
    source = zero.with_values(f(zero.nodes, zero.values))
    expected = green_apply(example_params, StieltjesFunctional(), source)
    np.testing.assert_allclose(
        image.values - gamma_weight(example_params, zero.nodes) * 0.3,
        expected.values, rtol=0, atol=1e-13)


def test_operator_rejects_bad_input(example_params, example_functional):
    operator = HammersteinOperator.build(
        example_params, example_functional, constant(1.0), np.linspace(0, 1, 33))
    with pytest.raises(DomainError):
        operator(GridFunction.uniform(65))
    with pytest.raises(DomainError):
        operator(GridFunction.uniform(33, lambda t: t - 0.5))


def test_nonlinear_fixed_point(example_params, example_functional, example_constants):
    f = Nonlinearity.from_expression(MILD)
    report = picard_solve(example_params, example_functional, f, GridFunction.uniform(1025),
                          tol=1e-8, max_iter=2000)
    assert report.converged
    u = report.solution
    source = u.with_values(f(u.nodes, u.values))
    np.testing.assert_allclose(
        green_apply(example_params, example_functional, source).values, u.values,
        rtol=0, atol=1e-6)
    residuals = verify(example_params, example_functional, f, u, example_constants.c)
    assert residuals.ode_residual <= 0.05
    assert residuals.bc0_residual <= 1e-3
    assert residuals.bc1_residual <= 1e-3
    assert residuals.in_cone


def test_picard_finds_small_cone_solution(example_params, example_functional, example_constants):
    # f = 0.1 below u = 1, 3 between 2 and 16: the small solution sits below the first shell
    f = piecewise_linear([(0.0, 0.1), (1.0, 0.1), (2.0, 3.0), (16.0, 3.0)])
    report = picard_solve(example_params, example_functional, f, GridFunction.uniform(1025))
    assert report.converged and not report.diverged
    u = report.solution
    assert u.sup_norm() == pytest.approx(0.459395, abs=1e-5)
    residuals = verify(example_params, example_functional, f, u, example_constants.c)
    assert residuals.ode_residual <= 1e-6
    assert residuals.bc0_residual <= 1e-6
    assert residuals.bc1_residual <= 1e-6
    assert residuals.nonneg and residuals.in_cone
    assert residuals.cone_margin > 0.1


def test_picard_reports_divergence(example_params, example_functional):
    u0 = GridFunction.uniform(129, lambda t: np.ones_like(t))
    report = picard_solve(example_params, example_functional, linear(100.0), u0)
    assert report.diverged
    assert not report.converged
    assert report.iterations < 20


def test_picard_stops_at_max_iter(example_params, example_functional):
    report = picard_solve(example_params, example_functional, constant(1.0),
                          GridFunction.uniform(129), max_iter=3)
    assert not report.converged and not report.diverged
    assert report.iterations == 3


def test_zero_source_is_immediately_fixed(example_params, example_functional):
    report = picard_solve(example_params, example_functional, constant(0.0),
                          GridFunction.uniform(65))
    assert report.converged
    assert report.iterations == 0
    assert report.residual_fixed_point == 0.0


def test_picard_errors(example_params, example_functional):
    with pytest.raises(DomainError):
        picard_solve(example_params, example_functional, constant(1.0),
                     GridFunction.uniform(65), tol=0.0)
    with pytest.raises(DomainError):
        picard_solve(example_params, example_functional, constant(1.0),
                     GridFunction.uniform(65, lambda t: t - 0.5))


def test_constant_source_without_functional_is_row_integral(example_params):
    zero = GridFunction.uniform(129)
    u = zero.with_values(np.linspace(0.0, 2.0, 129))
    image = hammerstein_apply(example_params, StieltjesFunctional(), constant(0.7), u)
    np.testing.assert_allclose(image.values, 0.7 * row_integral(example_params, u.nodes),
                               rtol=0, atol=1e-12)
    assert np.all(hammerstein_apply(
        example_params, StieltjesFunctional(), constant(0.0), u).values == 0.0)


def test_oracle_without_source_is_zero(example_params, example_functional):
    u = linear_constant_oracle(example_params, example_functional, 0.0, np.linspace(0, 1, 9))
    assert np.all(u.values == 0.0)


def test_larger_source_gives_larger_image(example_params, example_functional, rng):
    small = Nonlinearity.from_expression("1 + u/(1 + u)")
    large = Nonlinearity.from_expression("1.5 + u/(1 + u) + 0.1*t")
    zero = GridFunction.uniform(129)
    for _ in range(20):
        u = zero.with_values(rng.uniform(0.0, 4.0, zero.size))
        lower = hammerstein_apply(example_params, example_functional, small, u)
        upper = hammerstein_apply(example_params, example_functional, large, u)
        assert np.all(upper.values > lower.values)
