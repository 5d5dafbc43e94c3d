"""
Closed-form objects of the nonlocal BVP

The weight gamma(t), the kernel k(t, s), the cone constants and the
product-integration rule that applies int_0^1 k(t, s) y(s) ds to
piecewise-linear y. Solving D^alpha u + y = 0 with

    u'(0) + lambda[u] = 0,   beta D^(alpha-1) u(1) + u(eta) = 0

gives u(t) = gamma(t) lambda[u] + int_0^1 k(t, s) y(s) ds with

    gamma(t) = beta/Gamma(3 - alpha) + eta - t,
    k(t, s) = beta + (eta - s)_+^(alpha-1)/Gamma(alpha)
                   - (t - s)_+^(alpha-1)/Gamma(alpha).
"""
import logging
import math
from typing import Optional, Tuple, Union

import attr
import numpy as np
from scipy import integrate

from fracbvp.constants import C_NOTE, INV_M_NOTE, POWER_MOMENT_GAUSS_POINTS, PRINTED_C
from fracbvp.errors import ConditionError, DomainError, RegimeError
from fracbvp.fraccalc import GridFunction, gamma
from fracbvp.model import ProblemParams, StieltjesFunctional, validate_regime
from utils.logutils import setup_logger
from utils.miscutils import is_uniform

LOGGER = setup_logger(__name__, log_level=logging.INFO)

RealOrArray = Union[float, np.ndarray]

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(POWER_MOMENT_GAUSS_POINTS)
# mapped to [0, 1]
_GAUSS_X = 0.5 * (_GAUSS_X + 1.0)
_GAUSS_W = 0.5 * _GAUSS_W


def _scalar_or_array(value: np.ndarray) -> RealOrArray:
    return float(value) if np.ndim(value) == 0 else value


def gamma_weight(p: ProblemParams, t: RealOrArray) -> RealOrArray:
    """gamma(t) = beta/Gamma(3 - alpha) + eta - t."""
    t_arr = np.asarray(t, dtype=float)
    return _scalar_or_array(p.beta / gamma(3.0 - p.alpha) + p.eta - t_arr)


def kernel_k(p: ProblemParams, t: RealOrArray, s: RealOrArray) -> RealOrArray:
    """k(t, s); broadcasts over `t` and `s`."""
    t_arr, s_arr = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    power = p.alpha - 1.0
    eta_term = np.where(s_arr <= p.eta, np.power(np.maximum(p.eta - s_arr, 0.0), power), 0.0)
    t_term = np.where(s_arr <= t_arr, np.power(np.maximum(t_arr - s_arr, 0.0), power), 0.0)
    return _scalar_or_array(p.beta + (eta_term - t_term) / gamma(p.alpha))


def row_integral(p: ProblemParams, t: RealOrArray) -> RealOrArray:
    """int_0^1 k(t, s) ds = beta + (eta^alpha - t^alpha)/Gamma(alpha + 1)."""
    t_arr = np.asarray(t, dtype=float)
    return _scalar_or_array(
        p.beta + (p.eta ** p.alpha - np.power(t_arr, p.alpha)) / gamma(p.alpha + 1.0))


def script_K(p: ProblemParams, L: StieltjesFunctional, s: RealOrArray) -> RealOrArray:
    """K(s) = int_0^1 k(t, s) dLambda(t)."""
    s_arr = np.asarray(s, dtype=float)
    total = np.zeros_like(s_arr)
    for atom in L.atoms:
        total = total + atom.weight * np.asarray(kernel_k(p, atom.xi, s_arr))
    if L.density is not None:
        nodes = L.density.nodes.reshape((-1,) + (1,) * s_arr.ndim)
        weights = L.density.values.reshape(nodes.shape)
        total = total + integrate.trapezoid(
            weights * kernel_k(p, nodes, s_arr[np.newaxis, ...]),
            L.density.nodes, axis=0)
    return _scalar_or_array(total)


@attr.s(kw_only=True, slots=True, frozen=True)
class ConeConstants:
    """Constants of the cone K = {u >= 0 : min u >= c ||u||} and of the index conditions."""
    phi: float = attr.ib()
    c1: float = attr.ib()
    c2: float = attr.ib()
    c: float = attr.ib()
    norm_gamma: float = attr.ib()
    m: float = attr.ib()
    inv_m: float = attr.ib()
    inv_M: float = attr.ib()
    printed_inv_M: float = attr.ib()
    tilde_lambda_gamma: float = attr.ib()
    int_script_K: float = attr.ib()
    inv_M_note: str = attr.ib(default=INV_M_NOTE)
    printed_c: float = attr.ib(default=PRINTED_C)
    c_note: str = attr.ib(default=C_NOTE)

    @property
    def M(self) -> float:  # pylint: disable=invalid-name
        """M = 1/inv_M."""
        return 1.0 / self.inv_M

    @property
    def c_matches_printed(self) -> bool:
        """Whether c truncated to three decimals equals the printed c."""
        return math.floor(self.c * 1000.0) / 1000.0 == self.printed_c


def cone_constants(p: ProblemParams, L: StieltjesFunctional) -> ConeConstants:
    """All constants for `p` and the functional `L`.

    Raises:
        RegimeError: if the regime inequalities fail or 1/M <= 0.
    """
    regime = validate_regime(p)
    if not regime.holds:
        raise RegimeError(
            "parameters {} outside the regime beta*Gamma(alpha) > (1-eta)^(alpha-1), "
            "beta > (1-eta)*Gamma(3-alpha): margins {}, {}".format(
                p, regime.kernel_margin, regime.weight_margin))
    if not regime.inv_M_positive:
        raise RegimeError(
            "1/M = {} is not positive for {}".format(
                regime.inv_M_margin / gamma(p.alpha + 1.0), p))
    gamma_alpha = gamma(p.alpha)
    gamma_3ma = gamma(3.0 - p.alpha)
    bound_scale = p.beta * gamma_alpha + p.eta ** (p.alpha - 1.0)
    c1 = (p.beta * gamma_alpha - (1.0 - p.eta) ** (p.alpha - 1.0)) / bound_scale
    c2 = (p.beta + (p.eta - 1.0) * gamma_3ma) / (p.beta + p.eta * gamma_3ma)
    inv_M = row_integral(p, 1.0)
    inv_m = row_integral(p, 0.0)
    constants = ConeConstants(
        phi=bound_scale / gamma_alpha,
        c1=c1,
        c2=c2,
        c=min(c1, c2),
        norm_gamma=p.eta + p.beta / gamma_3ma,
        m=1.0 / inv_m,
        inv_m=inv_m,
        inv_M=inv_M,
        printed_inv_M=1.0 / inv_M,
        tilde_lambda_gamma=L.integrate(lambda t: gamma_weight(p, t)),
        int_script_K=L.integrate(lambda t: row_integral(p, t)),
    )
    LOGGER.debug("cone constants for %s: %s", p, constants)
    return constants


def _linear_basis_moments(
    lo: np.ndarray,
    hi: np.ndarray,
    shift: np.ndarray,
    nu: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Elementwise int_lo^hi r^nu (r - shift) dr and int_lo^hi r^nu (hi - r) dr.

    Intervals far from r = 0 (lo >= hi - lo) use Gauss-Legendre on the
    integrand itself, which avoids the cancellation of the closed forms;
    the rest use the closed forms.
    """
    lo, hi, shift = np.broadcast_arrays(
        np.asarray(lo, dtype=float), np.asarray(hi, dtype=float),
        np.asarray(shift, dtype=float))
    left = np.empty(lo.shape)
    right = np.empty(lo.shape)
    far = lo >= hi - lo

    near = ~far
    m0 = (hi[near] ** (nu + 1.0) - lo[near] ** (nu + 1.0)) / (nu + 1.0)
    m1 = (hi[near] ** (nu + 2.0) - lo[near] ** (nu + 2.0)) / (nu + 2.0)
    left[near] = m1 - shift[near] * m0
    right[near] = hi[near] * m0 - m1

    width = (hi[far] - lo[far])[:, np.newaxis]
    r = lo[far][:, np.newaxis] + width * _GAUSS_X
    weighted = width * _GAUSS_W * np.power(r, nu)
    left[far] = np.sum(weighted * (r - shift[far][:, np.newaxis]), axis=1)
    right[far] = np.sum(weighted * (hi[far][:, np.newaxis] - r), axis=1)
    return left, right


def power_weights(nodes: np.ndarray, x: float, nu: float) -> np.ndarray:
    """Weights w with int_0^x (x - s)^nu y(s) ds = w . y for piecewise-linear y.

    Args:
        nodes (np.ndarray): increasing mesh of [0, 1]
        x (float): upper limit in [0, 1] (need not be a node)
        nu (float): exponent >= 0
    """
    nodes = np.asarray(nodes, dtype=float)
    weights = np.zeros(nodes.size)
    cells = np.flatnonzero(nodes[:-1] < x)
    if cells.size == 0:
        return weights
    cell_lo = nodes[cells]
    cell_hi = nodes[cells + 1]
    widths = cell_hi - cell_lo
    left, right = _linear_basis_moments(
        lo=x - np.minimum(cell_hi, x),
        hi=x - cell_lo,
        shift=x - cell_hi,
        nu=nu,
    )
    np.add.at(weights, cells, left / widths)
    np.add.at(weights, cells + 1, right / widths)
    return weights


@attr.s(kw_only=True, slots=True, frozen=True, eq=False)
class KernelQuadrature:
    """Product integration of int_0^1 k(t_j, s) y(s) ds at every node t_j.

    y is taken piecewise linear between nodes and the power terms of k are
    integrated exactly against it, so the rule is exact for y that are
    linear on each cell. Built once per (params, uniform mesh).
    """
    params: ProblemParams = attr.ib()
    nodes: np.ndarray = attr.ib()
    left_moments: np.ndarray = attr.ib()
    right_moments: np.ndarray = attr.ib()
    eta_weights: np.ndarray = attr.ib()

    @classmethod
    def build(cls, p: ProblemParams, nodes: np.ndarray) -> "KernelQuadrature":
        """Precompute the moments for the uniform mesh `nodes`."""
        nodes = np.asarray(nodes, dtype=float)
        if not is_uniform(nodes):
            raise DomainError("kernel quadrature requires a uniform mesh")
        nu = p.alpha - 1.0
        # cell k seen from node j spans r in [m - 1, m] step units, m = j - k
        m = np.arange(1, nodes.size, dtype=float)
        left, right = _linear_basis_moments(lo=m - 1.0, hi=m, shift=m - 1.0, nu=nu)
        return cls(
            params=p,
            nodes=nodes,
            left_moments=left,
            right_moments=right,
            eta_weights=power_weights(nodes, p.eta, nu),
        )

    @property
    def step(self) -> float:
        """Mesh spacing."""
        return float(self.nodes[1] - self.nodes[0])

    def volterra(self, y: np.ndarray) -> np.ndarray:
        """int_0^{t_j} (t_j - s)^(alpha-1) y(s) ds at every node."""
        size = self.nodes.size
        history = (np.convolve(y, self.left_moments)[:size - 1]
                   + np.convolve(y[1:], self.right_moments)[:size - 1])
        result = np.zeros(size)
        result[1:] = history * self.step ** self.params.alpha
        return result

    def apply(self, y: np.ndarray) -> np.ndarray:
        """int_0^1 k(t_j, s) y(s) ds at every node."""
        y = np.asarray(y, dtype=float)
        p = self.params
        fredholm = p.beta * integrate.trapezoid(y, self.nodes)
        eta_part = float(np.dot(self.eta_weights, y))
        return fredholm + (eta_part - self.volterra(y)) / gamma(p.alpha)


def green_apply(
    p: ProblemParams,
    L: StieltjesFunctional,
    y: GridFunction,
    quadrature: Optional[KernelQuadrature] = None,
) -> GridFunction:
    """Solve D^alpha u + y = 0 with the nonlocal boundary conditions.

    Computes v = int k(., s) y(s) ds by product integration, then resolves
    the coupling lambda[u] = (lambda0 + int v dLambda)/(1 - lambda~[gamma])
    and returns u = gamma lambda[u] + v on the mesh of `y`.

    Raises:
        ConditionError: if lambda~[gamma] >= 1.
    """
    tilde_lambda_gamma = L.integrate(lambda t: gamma_weight(p, t))
    if tilde_lambda_gamma >= 1.0:
        raise ConditionError(
            "lambda~[gamma] = {} >= 1: the nonlocal coupling is not "
            "invertible".format(tilde_lambda_gamma))
    if quadrature is None:
        quadrature = KernelQuadrature.build(p, y.nodes)
    v = y.with_values(quadrature.apply(y.values))
    lambda_u = (L.lambda0 + L.integrate(v)) / (1.0 - tilde_lambda_gamma)
    return y.with_values(gamma_weight(p, y.nodes) * lambda_u + v.values)
