"""
All constants should go in this file
"""
from fractions import Fraction

VERSION = "0.3.0"
REPORT_SCHEMA_VERSION = 1

# mesh and solver defaults
DEFAULT_N_NODES = 1025
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
DEFAULT_DIVERGENCE_BOUND = 1e12
MIN_VERIFY_NODES = 64

# extremum sampling of f: base grid and number of refinement levels
SAMPLE_GRID_SIZE = 33
SAMPLE_LEVELS = 3
REFINE_HALF_WIDTH_STEPS = 2

# Gauss-Legendre points for the cell moments of the power weight
POWER_MOMENT_GAUSS_POINTS = 12

# values printed with the worked example; compared, never trusted
PRINTED_C = 0.132
PRINTED_INDEX0_THRESHOLD = 0.218
PRINTED_INDEX1_THRESHOLD = 1.255
PRINTED_PAIR_TOL = 2e-3

INV_M_NOTE = (
    "1/M is the infimum over t of the row integral of k(t, s), attained at "
    "t = 1: (beta*Gamma(alpha+1) + eta^alpha - 1)/Gamma(alpha+1). The worked "
    "example prints the reciprocal of this value as 1/M; the printed fraction "
    "is reported as printed_inv_M and equals M.")

C_NOTE = (
    "c = min(c1, c2) is computed in full precision; the worked example prints "
    "it truncated to three decimals as printed_c. c_matches_printed checks "
    "that truncation.")

THRESHOLD_NOTE = (
    "Direct evaluation gives the index-0 threshold (f_{rho,rho/c} must "
    "exceed it) near 1.256 and the index-1 threshold (f^{0,rho} must stay "
    "below it) near 0.218. The worked example prints 0.218 for the index-0 "
    "condition and 1.255 for the index-1 condition.")

SAMPLED_CAVEAT = (
    "Extrema of f marked 'sampled' are grid estimates, not bounds; a "
    "certificate is rigorous only when every check it uses relies on "
    "analytic hints.")

PRESETS = {
    "example": {
        "problem": {
            "alpha": float(Fraction(3, 2)),
            "beta": float(Fraction(4, 5)),
            "eta": float(Fraction(3, 4)),
        },
        "functional": {
            "lambda0": 0.0,
            "atoms": ((float(Fraction(1, 4)), float(Fraction(1, 2))),),
        },
    },
    # the alpha = 2 heated bar with a thermostat, u'(0) = 0
    "thermostat": {
        "problem": {"alpha": 2.0, "beta": 1.0, "eta": 0.5},
        "functional": {"lambda0": 0.0, "atoms": ()},
    },
}
