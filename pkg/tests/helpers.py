"""Shared test data and oracle helpers."""

import numpy as np

from rothe1d import Gaussian1D, LCGState, UniformGrid

# Reference 4-Gaussian expansion of the soft-core ground state.  The width
# entries are the square roots of the Gaussian1D `a` parameters; coefficients
# are real.
REFERENCE_FIT_WIDTH_ROOTS = np.array([0.37745, 2.0681, 0.61766, 1.0688])
REFERENCE_FIT_COEFFS = np.array([0.08719, 0.061077, 0.29305, 0.23122])
REFERENCE_FIT_RESIDUAL_SQ = 4.3485e-7


def reference_state(coeffs=None, time_label=0.0):
    """LCG(4) state with the reference widths; coeffs default to the
    reference coefficients."""
    funcs = tuple(Gaussian1D(a=float(r**2)) for r in REFERENCE_FIT_WIDTH_ROOTS)
    if coeffs is None:
        coeffs = REFERENCE_FIT_COEFFS
    return LCGState(funcs, np.asarray(coeffs, dtype=complex), time_label)


def next_pow2(value):
    n = 2
    while n < value:
        n *= 2
    return n


def resolving_grid(g, points_per_sigma=8, n_sigmas=12, max_n=1 << 22):
    """Grid that resolves Gaussian g in position and momentum.

    Spacing covers both the position width (points_per_sigma per standard
    deviation) and the Fourier content |p| + 8 sigma_p; the box covers
    n_sigmas standard deviations on both sides of the center.
    """
    sigma_x = np.sqrt(1.0 / (2.0 * g.a))
    sigma_p = np.sqrt((g.a**2 + g.b**2) / (2.0 * g.a))
    half_length = abs(g.q) + n_sigmas * sigma_x
    dx_position = sigma_x / points_per_sigma
    dx_momentum = np.pi / (abs(g.p) + 8.0 * sigma_p)
    dx = min(dx_position, dx_momentum)
    n = next_pow2(int(np.ceil(2.0 * half_length / dx)))
    if n > max_n:
        raise ValueError(f"grid for {g} would need n={n}")
    return UniformGrid(half_length, n)


def l2_difference(f, g):
    """Quadrature L2 distance between two wavefunctions on the same grid."""
    return float(np.sqrt(f.grid.dx * np.sum(np.abs(f.values - g.values) ** 2)))
