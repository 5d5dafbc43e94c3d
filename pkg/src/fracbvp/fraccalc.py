"""
Special functions and discrete fractional calculus

Holds the `GridFunction` carrier used everywhere else, the Gamma function,
an L1/L2-type discretisation of the Caputo derivative on uniform meshes and
the analytic Caputo derivative of powers used to check it.
"""
import logging
import math
from typing import Callable, Optional, Union

import attr
import numpy as np
from scipy import special

from fracbvp.errors import DomainError
from utils.logutils import setup_logger
from utils.miscutils import is_uniform, uniform_nodes

LOGGER = setup_logger(__name__, log_level=logging.INFO)

RealOrArray = Union[float, np.ndarray]


def _as_readonly_array(values) -> np.ndarray:
    """Copy `values` into a float array that can no longer be written to."""
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@attr.s(kw_only=True, slots=True, frozen=True, eq=False)
class GridFunction:
    """Values of a function of t on a mesh of [0, 1]."""
    nodes: np.ndarray = attr.ib(converter=_as_readonly_array)
    values: np.ndarray = attr.ib(converter=_as_readonly_array)

    @nodes.validator
    def _check_nodes(self, _attribute, nodes):
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("a mesh needs at least 2 nodes")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise DomainError(
                "mesh must start at 0 and end at 1, got [{}, {}]".format(
                    nodes[0], nodes[-1]))
        if not np.all(np.diff(nodes) > 0):
            raise DomainError("mesh nodes must be strictly increasing")

    @values.validator
    def _check_values(self, _attribute, values):
        if values.shape != self.nodes.shape:
            raise DomainError(
                "got {} values for {} nodes".format(values.size, self.nodes.size))

    @classmethod
    def uniform(
        cls,
        n_nodes: int,
        func: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> "GridFunction":
        """Sample `func` (default: zero) on a uniform mesh of `n_nodes` nodes."""
        nodes = uniform_nodes(n_nodes)
        values = np.zeros_like(nodes) if func is None else func(nodes)
        return cls(nodes=nodes, values=np.broadcast_to(values, nodes.shape))

    @property
    def size(self) -> int:
        """Number of mesh nodes."""
        return int(self.nodes.size)

    @property
    def step(self) -> float:
        """Spacing of a uniform mesh."""
        return float(self.nodes[1] - self.nodes[0])

    def is_uniform(self) -> bool:
        """Whether the mesh is uniform."""
        return is_uniform(self.nodes)

    def with_values(self, values) -> "GridFunction":
        """Same mesh, new values."""
        return GridFunction(nodes=self.nodes, values=values)

    def __call__(self, t: RealOrArray) -> RealOrArray:
        """Piecewise-linear interpolation of the values at `t`."""
        result = np.interp(t, self.nodes, self.values)
        return float(result) if np.ndim(result) == 0 else result

    def sup_norm(self) -> float:
        """Max of |values|."""
        return float(np.max(np.abs(self.values)))


def gamma(x: RealOrArray) -> RealOrArray:
    """Gamma function for positive arguments.

    Args:
        x (float or np.ndarray): argument(s), all > 0

    Returns:
        (float or np.ndarray) Gamma(x), matching the shape of `x`.
    """
    x_arr = np.asarray(x, dtype=float)
    if not np.all(x_arr > 0):  # also rejects nan
        raise DomainError("gamma is only used for x > 0, got {}".format(x))
    result = special.gamma(x_arr)
    return float(result) if result.ndim == 0 else result


def caputo_order(mu: float) -> int:
    """Integer n with n - 1 < mu <= n, for mu in (0, 2]."""
    if not 0.0 < mu <= 2.0:
        raise DomainError("Caputo order must lie in (0, 2], got {}".format(mu))
    return int(math.ceil(mu))


def _check_caputo_mesh(u: GridFunction, n: int):
    if not u.is_uniform():
        raise DomainError("caputo_grid requires a uniform mesh")
    if n == 2 and u.size < 3:
        raise DomainError("second differences need at least 3 nodes")


def _highest_derivative_per_cell(u: GridFunction, n: int) -> np.ndarray:
    """Piecewise-constant n-th derivative, one value per mesh cell."""
    step = u.step
    if n == 1:
        return np.diff(u.values) / step
    slope = np.gradient(u.values, step, edge_order=2)
    return np.diff(slope) / step


def _power_increments(nu: float, count: int) -> np.ndarray:
    """b_m = (m + 1)^nu - m^nu for m = 0 .. count - 1."""
    m = np.arange(count, dtype=float)
    return np.power(m + 1.0, nu) - np.power(m, nu)


def _classical_derivative(u: GridFunction, n: int) -> np.ndarray:
    slope = np.gradient(u.values, u.step, edge_order=2)
    if n == 1:
        return slope
    return np.gradient(slope, u.step, edge_order=2)


def caputo_grid_all(u: GridFunction, mu: float) -> np.ndarray:
    """Discrete Caputo derivative of order `mu` at every node.

    The n-th derivative (n = ceil(mu)) is taken piecewise constant on each
    cell and the weight (t - s)^(n - 1 - mu) is integrated exactly per cell.
    For n = 1 the cell value is the first divided difference (L1 scheme);
    for n = 2 it is the difference of second order nodal slopes, which is
    exact on quadratics.

    Returns:
        (np.ndarray) derivative per node; node 0 is 0 for n = 1 (empty
        history) and nan for n = 2.
    """
    n = caputo_order(mu)
    _check_caputo_mesh(u, n)
    if mu == n:
        result = _classical_derivative(u, n)
        if n == 2:
            result[0] = np.nan
        return result
    nu = n - mu
    cells = _highest_derivative_per_cell(u, n)
    increments = _power_increments(nu, cells.size)
    history = np.convolve(cells, increments)[:cells.size]
    result = np.empty(u.size)
    result[0] = 0.0 if n == 1 else np.nan
    result[1:] = history * u.step ** nu / gamma(nu + 1.0)
    return result


def caputo_grid(u: GridFunction, mu: float, t: int) -> float:
    """Discrete Caputo derivative of order `mu` at node index `t`.

    Args:
        u (:class:`GridFunction`): function on a uniform mesh
        mu (float): order in (0, 2]
        t (int): node index; negative values count from the end

    Returns:
        (float) the scheme of :func:`caputo_grid_all` at one node.
    """
    n = caputo_order(mu)
    _check_caputo_mesh(u, n)
    index = int(t)
    if index < 0:
        index += u.size
    if not 0 <= index < u.size:
        raise DomainError("node index {} outside the mesh".format(t))
    if index == 0 and n == 2:
        raise DomainError(
            "Caputo derivative of order {} is undefined at node 0 "
            "(empty derivative history)".format(mu))
    if mu == n:
        return float(_classical_derivative(u, n)[index])
    if index == 0:
        return 0.0
    nu = n - mu
    cells = _highest_derivative_per_cell(u, n)[:index]
    increments = _power_increments(nu, index)[::-1]
    return float(np.dot(cells, increments) * u.step ** nu / gamma(nu + 1.0))


def caputo_power_exact(p: float, mu: float, t: RealOrArray) -> RealOrArray:
    """Caputo derivative of order `mu` of t^p, evaluated at `t`.

    Non-negative integer powers below n = ceil(mu) are annihilated. For
    p > n - 1 the result is Gamma(p + 1)/Gamma(p + 1 - mu) t^(p - mu).
    Fractional powers below n - 1 are rejected.
    """
    n = caputo_order(mu)
    t_arr = np.asarray(t, dtype=float)
    if not np.all((t_arr > 0.0) & (t_arr <= 1.0)):
        raise DomainError("t must lie in (0, 1], got {}".format(t))
    if p >= 0 and float(p).is_integer() and p < n:
        result = np.zeros_like(t_arr)
    elif p > n - 1:
        result = gamma(p + 1.0) / gamma(p + 1.0 - mu) * np.power(t_arr, p - mu)
    else:
        raise DomainError(
            "power {} is not admissible for Caputo order {}".format(p, mu))
    return float(result) if result.ndim == 0 else result
