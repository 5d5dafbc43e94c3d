"""
fracbvp: constants, multiplicity certificates and Nystrom solutions of the
nonlocal Caputo boundary value problem

    D^alpha u(t) + f(t, u(t)) = 0,  t in (0, 1),
    u'(0) + lambda[u] = 0,  beta D^(alpha-1) u(1) + u(eta) = 0.
"""
from fracbvp.constants import VERSION

__version__ = VERSION
