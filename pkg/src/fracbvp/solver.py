"""
Nystrom solver for the perturbed Hammerstein equation

    u(t) = gamma(t) lambda[u] + int_0^1 k(t, s) f(s, u(s)) ds := Tu(t)

by Picard iteration on a uniform mesh, a closed-form solution for constant
f and a single atom, and residual checks of a candidate solution against the
fractional ODE, the boundary conditions and the cone.
"""
import logging
from typing import Optional

import attr
import numpy as np

from fracbvp.constants import (
    DEFAULT_DIVERGENCE_BOUND,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    MIN_VERIFY_NODES,
)
from fracbvp.errors import ConditionError, DomainError, NumericError
from fracbvp.fraccalc import (
    GridFunction,
    caputo_grid,
    caputo_grid_all,
    caputo_power_exact,
    gamma,
)
from fracbvp.kernel import KernelQuadrature, gamma_weight, row_integral
from fracbvp.model import (
    Nonlinearity,
    ProblemParams,
    StieltjesFunctional,
    apply_functional,
)
from utils.logutils import setup_logger

LOGGER = setup_logger(__name__, log_level=logging.INFO)


@attr.s(kw_only=True, slots=True, frozen=True, eq=False)
class HammersteinOperator:
    """T on a fixed uniform mesh; the product-integration weights are built once."""
    params: ProblemParams = attr.ib()
    functional: StieltjesFunctional = attr.ib()
    f: Nonlinearity = attr.ib()
    quadrature: KernelQuadrature = attr.ib()
    gamma_values: np.ndarray = attr.ib()

    @classmethod
    def build(
        cls,
        p: ProblemParams,
        L: StieltjesFunctional,
        f: Nonlinearity,
        nodes: np.ndarray,
    ) -> "HammersteinOperator":
        """Precompute weights for the mesh `nodes`."""
        return cls(
            params=p,
            functional=L,
            f=f,
            quadrature=KernelQuadrature.build(p, nodes),
            gamma_values=np.asarray(gamma_weight(p, np.asarray(nodes, dtype=float))),
        )

    def __call__(self, u: GridFunction) -> GridFunction:
        """Tu on the mesh of `u`."""
        if u.size != self.quadrature.nodes.size:
            raise DomainError("u lives on a different mesh than the operator")
        if np.any(u.values < 0):
            raise DomainError("T is only defined for non-negative u")
        source = self.f(u.nodes, u.values)
        integral = self.quadrature.apply(source)
        return u.with_values(
            self.gamma_values * apply_functional(self.functional, u) + integral)


def hammerstein_apply(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    u: GridFunction,
) -> GridFunction:
    """Tu = gamma lambda[u] + int k(., s) f(s, u(s)) ds on the mesh of `u`.

    f(s, u(s)) is taken piecewise linear between nodes and the power terms of
    the kernel are integrated exactly against it.
    """
    return HammersteinOperator.build(p, L, f, u.nodes)(u)


@attr.s(kw_only=True, slots=True, frozen=True)
class SolveReport:
    """Outcome of a Picard run."""
    solution: GridFunction = attr.ib()
    iterations: int = attr.ib()
    residual_fixed_point: float = attr.ib()
    converged: bool = attr.ib()
    tol: float = attr.ib()
    clamp_events: int = attr.ib(default=0)
    diverged: bool = attr.ib(default=False)


def picard_solve(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    u0: GridFunction,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
) -> SolveReport:
    """Iterate u <- max(Tu, 0) until ||u - Tu|| <= tol.

    Non-convergence and divergence (sup-norm above `divergence_bound`) are
    reported, not raised.

    Args:
        u0 (:class:`GridFunction`): non-negative start on a uniform mesh
        tol (float): sup-norm tolerance on u - Tu (default: 1e-10)
        max_iter (int): maximum number of applications of T (default: 500)
        divergence_bound (float): give up once ||u|| exceeds this
            (default: 1e12)

    Raises:
        NumericError: if an iterate stops being finite.
    """
    if not tol > 0:
        raise DomainError("tol must be > 0, got {}".format(tol))
    if np.any(u0.values < 0):
        raise DomainError("the starting guess must be non-negative")
    operator = HammersteinOperator.build(p, L, f, u0.nodes)
    u = u0
    clamp_events = 0
    residual = np.inf
    iterations = 0
    diverged = False
    while True:
        image = operator(u)
        if not np.all(np.isfinite(image.values)):
            raise NumericError("Tu is not finite after {} iterations".format(iterations))
        residual = float(np.max(np.abs(u.values - image.values)))
        LOGGER.debug("iteration %d: ||u - Tu|| = %.3e", iterations, residual)
        if residual <= tol:
            break
        if iterations >= max_iter:
            break
        if image.sup_norm() > divergence_bound:
            diverged = True
            break
        if np.any(image.values < 0):
            clamp_events += 1
            LOGGER.warning("iteration %d: clamped %d negative values of Tu",
                           iterations, int(np.sum(image.values < 0)))
            image = image.with_values(np.maximum(image.values, 0.0))
        u = image
        iterations += 1
    converged = residual <= tol
    if not converged:
        LOGGER.warning("Picard iteration stopped after %d iterations with "
                       "||u - Tu|| = %.3e (diverged=%s)", iterations, residual, diverged)
    return SolveReport(
        solution=u,
        iterations=iterations,
        residual_fixed_point=residual,
        converged=converged,
        tol=tol,
        clamp_events=clamp_events,
        diverged=diverged,
    )


def linear_constant_oracle(
    p: ProblemParams,
    L: StieltjesFunctional,
    sigma: float,
    nodes: np.ndarray,
) -> GridFunction:
    """Exact solution for f = sigma and a single-atom functional.

    u(t) = gamma(t) lambda[u] + sigma R(t) with R the row integral,
    lambda[u] = lambda0 + weight u(xi) and
    u(xi) = (gamma(xi) lambda0 + sigma R(xi)) / (1 - weight gamma(xi)).

    Raises:
        DomainError: unless L is a single atom without density.
        ConditionError: if weight gamma(xi) >= 1.
    """
    if not L.is_single_atom:
        raise DomainError("the linear oracle needs a single-atom functional")
    if sigma < 0:
        raise DomainError("sigma must be >= 0, got {}".format(sigma))
    atom = L.atoms[0]
    gamma_xi = gamma_weight(p, atom.xi)
    if atom.weight * gamma_xi >= 1.0:
        raise ConditionError(
            "weight * gamma(xi) = {} >= 1".format(atom.weight * gamma_xi))
    u_xi = (gamma_xi * L.lambda0 + sigma * row_integral(p, atom.xi)) / (
        1.0 - atom.weight * gamma_xi)
    lambda_u = L.lambda0 + atom.weight * u_xi
    nodes = np.asarray(nodes, dtype=float)
    return GridFunction(
        nodes=nodes,
        values=gamma_weight(p, nodes) * lambda_u + sigma * row_integral(p, nodes))


@attr.s(kw_only=True, slots=True, frozen=True)
class ResidualReport:
    """How well a grid function solves the BVP and whether it lies in the cone."""
    ode_residual: float = attr.ib()
    bc0_residual: float = attr.ib()
    bc1_residual: float = attr.ib()
    cone_margin: float = attr.ib()
    nonneg: bool = attr.ib()

    @property
    def in_cone(self) -> bool:
        """Non-negative with min u >= c ||u||."""
        return self.nonneg and self.cone_margin >= 0


def verify(
    p: ProblemParams,
    L: StieltjesFunctional,
    f: Nonlinearity,
    u: GridFunction,
    c: float,
    source_at_zero: Optional[float] = None,
) -> ResidualReport:
    """Residuals of `u` in the ODE and both boundary conditions, and its cone margin.

    A solution behaves like A + Bt - f(0, u(0)) t^alpha / Gamma(alpha + 1)
    near 0, whose second derivative blows up. That leading term is
    subtracted before differencing and its Caputo derivatives are added back
    exactly, so the scheme only sees the smooth remainder.

    Args:
        c (float): cone constant
        source_at_zero (float): value used for f(0, u(0)) in the subtracted
            term (default: None, evaluate f)
    """
    if not u.is_uniform():
        raise DomainError("verify requires a uniform mesh")
    if u.size < MIN_VERIFY_NODES:
        raise DomainError(
            "verify needs at least {} nodes, got {}".format(MIN_VERIFY_NODES, u.size))
    alpha = p.alpha
    if source_at_zero is None:
        source_at_zero = float(f(0.0, max(u.values[0], 0.0)))
    scale = -source_at_zero / gamma(alpha + 1.0)
    singular = scale * np.power(u.nodes, alpha)
    remainder = u.with_values(u.values - singular)

    interior = slice(1, u.size - 1)
    caputo_alpha = caputo_grid_all(remainder, alpha)[interior] - source_at_zero
    forcing = f(u.nodes[interior], np.maximum(u.values[interior], 0.0))
    ode_residual = float(np.max(np.abs(caputo_alpha + forcing)))

    step = u.step
    w = remainder.values
    # singular term has zero slope at 0 since alpha > 1
    slope_at_zero = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * step)
    bc0_residual = abs(slope_at_zero + apply_functional(L, u))

    caputo_lower = (caputo_grid(remainder, alpha - 1.0, -1)
                    + scale * caputo_power_exact(alpha, alpha - 1.0, 1.0))
    bc1_residual = abs(p.beta * caputo_lower + u(p.eta))

    minimum = float(np.min(u.values))
    report = ResidualReport(
        ode_residual=ode_residual,
        bc0_residual=float(bc0_residual),
        bc1_residual=float(bc1_residual),
        cone_margin=minimum - c * float(np.max(u.values)),
        nonneg=bool(minimum >= 0),
    )
    LOGGER.debug("residuals: %s", report)
    return report
