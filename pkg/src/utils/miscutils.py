"""
Miscellaneous Utilities

Small numeric helpers shared by the solver, the report writers and the
config layer.
"""
from typing import Sequence

import numpy as np


def try_(func, *args, **kwargs):
    """Try to call a function and return `_default` if it fails.

    Note: the fallback must be given as the keyword argument `_default`.
    Anything else is passed through to the wrapped function.
    """
    _default_val = kwargs.pop("_default", None)
    try:
        return func(*args, **kwargs)
    except Exception:  # pylint: disable=broad-except
        return _default_val


def uniform_nodes(n_nodes: int) -> np.ndarray:
    """Uniform mesh of [0, 1] with `n_nodes` nodes (both ends included)."""
    if n_nodes < 2:
        raise ValueError("a mesh needs at least 2 nodes, got {}".format(n_nodes))
    return np.linspace(0.0, 1.0, n_nodes)


def is_uniform(nodes: Sequence[float], rtol: float = 1e-9) -> bool:
    """Whether consecutive node spacings agree to relative tolerance `rtol`."""
    steps = np.diff(np.asarray(nodes, dtype=float))
    if steps.size == 0:
        return False
    return bool(np.all(np.abs(steps - steps[0]) <= rtol * abs(steps[0])))


def log_spaced(lo: float, hi: float, num: int) -> np.ndarray:
    """`num` log-spaced values from `lo` to `hi` inclusive."""
    return np.geomspace(lo, hi, num)


def format_float(value: float) -> str:
    """17 significant digit decimal representation (round-trips doubles)."""
    return "%.17g" % value
