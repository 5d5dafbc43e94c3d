"""
Problem data

The parameters (alpha, beta, eta) of the boundary value problem, the affine
functional lambda[u] = Lambda0 + int u dLambda of the nonlocal condition and
the nonlinearity f(t, u).
"""
import logging
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import attr
import numpy as np
from scipy import integrate

from fracbvp import expr
from fracbvp.errors import DomainError, NonlinearityError
from fracbvp.fraccalc import GridFunction, gamma
from utils.logutils import setup_logger

LOGGER = setup_logger(__name__, log_level=logging.INFO)

# (t_lo, t_hi, u_lo, u_hi) -> extremum of f over the box
BoxExtremum = Callable[[float, float, float, float], float]


def _in_range(lo, hi, lo_open=False, hi_open=False):
    """attrs validator for a float inside [lo, hi] (ends optionally open)."""
    def _validate(_instance, attribute, value):
        ok_lo = value > lo if lo_open else value >= lo
        ok_hi = value < hi if hi_open else value <= hi
        if not (ok_lo and ok_hi):
            raise DomainError("{}={} outside {}{}, {}{}".format(
                attribute.name, value, "(" if lo_open else "[", lo, hi,
                ")" if hi_open else "]"))
    return _validate


@attr.s(kw_only=True, slots=True, frozen=True)
class ProblemParams:
    """Order alpha, weight beta and sensor point eta of the BVP."""
    alpha: float = attr.ib(converter=float, validator=_in_range(1.0, 2.0, lo_open=True))
    beta: float = attr.ib(converter=float, validator=_in_range(0.0, np.inf, lo_open=True))
    eta: float = attr.ib(converter=float, validator=_in_range(0.0, 1.0))


@attr.s(kw_only=True, slots=True, frozen=True)
class RegimeReport:
    """Margins of the parameter inequalities of the positivity regime.

    `kernel_margin` is beta Gamma(alpha) - (1 - eta)^(alpha - 1),
    `weight_margin` is beta - (1 - eta) Gamma(3 - alpha) and
    `inv_M_margin` is beta Gamma(alpha + 1) + eta^alpha - 1; each must be
    strictly positive.
    """
    kernel_margin: float = attr.ib()
    weight_margin: float = attr.ib()
    inv_M_margin: float = attr.ib()

    @property
    def holds(self) -> bool:
        """Both regime inequalities hold strictly."""
        return self.kernel_margin > 0 and self.weight_margin > 0

    @property
    def inv_M_positive(self) -> bool:
        """1/M > 0, needed by the index-0 condition."""
        return self.inv_M_margin > 0


def validate_regime(p: ProblemParams) -> RegimeReport:
    """Evaluate the regime inequalities for `p` (never raises)."""
    report = RegimeReport(
        kernel_margin=p.beta * gamma(p.alpha) - (1.0 - p.eta) ** (p.alpha - 1.0),
        weight_margin=p.beta - (1.0 - p.eta) * gamma(3.0 - p.alpha),
        inv_M_margin=p.beta * gamma(p.alpha + 1.0) + p.eta ** p.alpha - 1.0,
    )
    LOGGER.debug("regime for %s: %s", p, report)
    return report


@attr.s(kw_only=True, slots=True, frozen=True)
class Atom:
    """Dirac mass of positive `weight` at `xi`."""
    xi: float = attr.ib(converter=float, validator=_in_range(0.0, 1.0))
    weight: float = attr.ib(converter=float, validator=_in_range(0.0, np.inf, lo_open=True))


def _to_atoms(atoms) -> Tuple[Atom, ...]:
    converted = []
    for atom in atoms:
        if isinstance(atom, Atom):
            converted.append(atom)
        elif isinstance(atom, dict):
            converted.append(Atom(**atom))
        else:
            xi, weight = atom
            converted.append(Atom(xi=xi, weight=weight))
    return tuple(converted)


def _check_density(_instance, _attribute, density):
    if density is None:
        return
    if not isinstance(density, GridFunction):
        raise DomainError("density must be a GridFunction table")
    if not np.all(np.isfinite(density.values)) or np.any(density.values < 0):
        raise DomainError("density must be finite and non-negative")


@attr.s(kw_only=True, slots=True, frozen=True)
class StieltjesFunctional:
    """lambda[u] = lambda0 + sum weight_i u(xi_i) + int_0^1 w(s) u(s) ds."""
    lambda0: float = attr.ib(default=0.0, converter=float,
                             validator=_in_range(0.0, np.inf))
    atoms: Tuple[Atom, ...] = attr.ib(factory=tuple, converter=_to_atoms)
    density: Optional[GridFunction] = attr.ib(default=None, validator=_check_density)

    @classmethod
    def m_point(
        cls,
        points: Sequence[Tuple[float, float]],
        lambda0: float = 0.0,
    ) -> "StieltjesFunctional":
        """Multi-point functional sum_i lambda_i u(xi_i) from (xi, lambda) pairs."""
        return cls(lambda0=lambda0, atoms=points)

    @classmethod
    def distributed(
        cls,
        density: Union[GridFunction, Callable[[np.ndarray], np.ndarray]],
        n_nodes: int = 1025,
        lambda0: float = 0.0,
    ) -> "StieltjesFunctional":
        """Continuously distributed functional int_0^1 w(s) u(s) ds.

        Args:
            density: a tabulated :class:`GridFunction` or a callable w(s)
                that is tabulated on a uniform mesh of `n_nodes` nodes
            n_nodes (int): table size when `density` is a callable
            lambda0 (float): constant term (default: 0)
        """
        if not isinstance(density, GridFunction):
            density = GridFunction.uniform(n_nodes, density)
        return cls(lambda0=lambda0, density=density)

    @property
    def is_single_atom(self) -> bool:
        """Exactly one atom and no density (the worked-example shape)."""
        return len(self.atoms) == 1 and self.density is None

    def integrate(self, func: Callable[[np.ndarray], np.ndarray]) -> float:
        """int_0^1 func dLambda (the measure part only, no lambda0).

        Atoms evaluate `func` exactly; the density part is the composite
        trapezoid rule on the density table nodes.
        """
        total = 0.0
        for atom in self.atoms:
            total += atom.weight * float(func(np.asarray(atom.xi)))
        if self.density is not None:
            nodes = self.density.nodes
            total += float(integrate.trapezoid(
                self.density.values * func(nodes), nodes))
        return total


def apply_functional(L: StieltjesFunctional, u: GridFunction) -> float:
    """lambda[u], with atoms read off by linear interpolation of `u`."""
    return L.lambda0 + L.integrate(u)


def total_variation(L: StieltjesFunctional) -> float:
    """Lambda_1 = total mass of the measure."""
    return L.integrate(np.ones_like)


@attr.s(kw_only=True, slots=True, frozen=True)
class Nonlinearity:
    """f(t, u) on [0, 1] x [0, inf) with optional analytic box extrema.

    `func` is evaluated with numpy broadcasting. Every evaluation is checked:
    negative or non-finite values raise :class:`NonlinearityError`.
    """
    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = attr.ib()
    name: str = attr.ib(default="f")
    inf_hint: Optional[BoxExtremum] = attr.ib(default=None)
    sup_hint: Optional[BoxExtremum] = attr.ib(default=None)

    def __call__(self, t, u) -> np.ndarray:
        t_arr, u_arr = np.broadcast_arrays(
            np.asarray(t, dtype=float), np.asarray(u, dtype=float))
        with np.errstate(all="ignore"):
            values = np.asarray(self.func(t_arr, u_arr), dtype=float)
        values = np.broadcast_to(values, t_arr.shape)
        if not np.all(np.isfinite(values)):
            bad = np.flatnonzero(~np.isfinite(values.ravel()))[0]
            raise NonlinearityError(
                "{} is not finite at t={}, u={}".format(
                    self.name, t_arr.ravel()[bad], u_arr.ravel()[bad]))
        if np.any(values < 0):
            bad = int(np.argmin(values.ravel()))
            raise NonlinearityError(
                "{} is negative ({}) at t={}, u={}".format(
                    self.name, values.ravel()[bad], t_arr.ravel()[bad],
                    u_arr.ravel()[bad]))
        return values

    @classmethod
    def from_expression(cls, source: str) -> "Nonlinearity":
        """Nonlinearity from an expression in t and u (see :mod:`fracbvp.expr`)."""
        ast = expr.parse(source)
        return cls(
            func=lambda t, u: expr.evaluate(ast, t, u),
            name="f(t,u)={}".format(expr.to_source(ast)),
        )


def constant(kappa: float) -> Nonlinearity:
    """f = kappa, with exact box extrema."""
    kappa = float(kappa)
    if kappa < 0:
        raise DomainError("constant nonlinearity must be >= 0, got {}".format(kappa))
    return Nonlinearity(
        func=lambda t, u: np.full(np.shape(u), kappa),
        name="constant({})".format(kappa),
        inf_hint=lambda t_lo, t_hi, u_lo, u_hi: kappa,
        sup_hint=lambda t_lo, t_hi, u_lo, u_hi: kappa,
    )


def linear(kappa: float) -> Nonlinearity:
    """f = kappa u, with exact box extrema (kappa >= 0, u >= 0)."""
    kappa = float(kappa)
    if kappa < 0:
        raise DomainError("linear nonlinearity needs kappa >= 0, got {}".format(kappa))
    return Nonlinearity(
        func=lambda t, u: kappa * u,
        name="linear({})".format(kappa),
        inf_hint=lambda t_lo, t_hi, u_lo, u_hi: kappa * u_lo,
        sup_hint=lambda t_lo, t_hi, u_lo, u_hi: kappa * u_hi,
    )


def piecewise_linear(knots: Sequence[Tuple[float, float]]) -> Nonlinearity:
    """f(t, u) = interpolation of the (u, value) `knots`, constant outside.

    Box extrema are exact: they are attained at the box ends or at a knot.
    """
    pairs = sorted((float(u_k), float(v_k)) for u_k, v_k in knots)
    if not pairs:
        raise DomainError("piecewise_linear needs at least one knot")
    u_knots = np.array([pair[0] for pair in pairs])
    v_knots = np.array([pair[1] for pair in pairs])
    if np.any(np.diff(u_knots) <= 0):
        raise DomainError("piecewise_linear knots must have distinct u values")
    if np.any(v_knots < 0):
        raise DomainError("piecewise_linear values must be >= 0")

    def _candidates(u_lo, u_hi):
        inside = v_knots[(u_knots > u_lo) & (u_knots < u_hi)]
        ends = np.interp([u_lo, u_hi], u_knots, v_knots)
        return np.concatenate([ends, inside])

    return Nonlinearity(
        func=lambda t, u: np.interp(u, u_knots, v_knots),
        name="piecewise_linear({})".format(
            " ".join("{}:{}".format(u_k, v_k) for u_k, v_k in pairs)),
        inf_hint=lambda t_lo, t_hi, u_lo, u_hi: float(np.min(_candidates(u_lo, u_hi))),
        sup_hint=lambda t_lo, t_hi, u_lo, u_hi: float(np.max(_candidates(u_lo, u_hi))),
    )


BUILTINS: Dict[str, Callable[..., Nonlinearity]] = {
    "constant": constant,
    "linear": linear,
    "piecewise_linear": piecewise_linear,
}
