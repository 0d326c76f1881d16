"""Complex 1D Gaussian primitives.

A Gaussian with complex width C = a + i b, center q, and momentum p is

    g(x) = exp(-1/2 (a + i b)(x - q)^2 + i p (x - q)),

so g(q) = 1 exactly and |g(x)| = exp(-a/2 (x - q)^2) requires a > 0.
Gaussians are deliberately unnormalized; linear coefficients absorb norms.
"""

from dataclasses import dataclass

import numpy as np

from .grid import spectral_derivative
from .validation import check_finite

__all__ = [
    "Gaussian1D",
    "MomentSet",
    "InfeasibleMomentsError",
    "DegenerateResidualError",
    "evaluate",
    "parameter_derivatives",
    "overlap",
    "analytic_moments",
    "moments_of",
    "gaussian_from_moments",
]


class InfeasibleMomentsError(ValueError):
    """No Gaussian matches the requested moments (uncertainty bound violated)."""


class DegenerateResidualError(ValueError):
    """Moments requested for a (numerically) zero function."""


@dataclass(frozen=True)
class Gaussian1D:
    """Width a + i b (a > 0), center q, momentum p; all in atomic units."""

    a: float
    b: float = 0.0
    q: float = 0.0
    p: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "q", "p"):
            check_finite(name, getattr(self, name))
        if self.a <= 0.0:
            raise ValueError(f"width real part a must be > 0, got {self.a!r}")

    @property
    def width(self):
        return complex(self.a, self.b)


def evaluate(g, xs):
    """Pointwise values of g on xs."""
    u = np.asarray(xs, dtype=float) - g.q
    return np.exp(-0.5 * g.width * u * u + 1j * g.p * u)


def parameter_derivatives(g, xs):
    """Analytic derivatives (dg/da, dg/db, dg/dq, dg/dp) on xs.

    Each is a polynomial in (x - q) times g; finite differences are used only
    as test oracles.
    """
    u = np.asarray(xs, dtype=float) - g.q
    vals = np.exp(-0.5 * g.width * u * u + 1j * g.p * u)
    u2 = u * u
    dg_da = -0.5 * u2 * vals
    dg_db = -0.5j * u2 * vals
    dg_dq = (g.width * u - 1j * g.p) * vals
    dg_dp = 1j * u * vals
    return dg_da, dg_db, dg_dq, dg_dp


def overlap(g1, g2):
    """Closed-form overlap <g1|g2> = integral of conj(g1) g2 over the line.

    Evaluated in coordinates centered between the two Gaussians (an exact
    translation) so the exponent depends on the separation only; otherwise
    two terms of order width * center^2 would cancel catastrophically.
    """
    mid = 0.5 * (g1.q + g2.q)
    q1, q2 = g1.q - mid, g2.q - mid
    c1 = 0.5 * np.conj(complex(g1.a, g1.b))
    c2 = 0.5 * complex(g2.a, g2.b)
    aa = c1 + c2
    bb = 2.0 * c1 * q1 + 2.0 * c2 * q2 - 1j * g1.p + 1j * g2.p
    cc = -c1 * q1**2 - c2 * q2**2 + 1j * g1.p * q1 - 1j * g2.p * q2
    return complex(np.sqrt(np.pi / aa) * np.exp(bb * bb / (4.0 * aa) + cc))


@dataclass(frozen=True)
class MomentSet:
    """Squared norm plus centered phase-space moments of a wave function."""

    norm_sq: float
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float


def analytic_moments(g):
    """Exact MomentSet of a single Gaussian."""
    var_x = 1.0 / (2.0 * g.a)
    return MomentSet(
        norm_sq=float(np.sqrt(np.pi / g.a)),
        mean_x=g.q,
        mean_p=g.p,
        var_x=var_x,
        var_p=(g.a**2 + g.b**2) / (2.0 * g.a),
        cov_xp=-g.b / (2.0 * g.a),
    )


def moments_of(values, grid):
    """Phase-space moments of grid samples, with spectral momentum operators.

    mean_p is Im<f|f'> / |f|^2; the variances are centered second moments and
    cov_xp is the symmetrized position-momentum covariance
    Re<f|(x - mean_x)(p - mean_p)|f> / |f|^2.
    """
    f = np.asarray(values, dtype=complex)
    dx = grid.dx
    norm_sq = dx * np.vdot(f, f).real
    if norm_sq <= 0.0 or not np.isfinite(norm_sq):
        raise DegenerateResidualError("moments of a zero-norm function are undefined")
    density = np.abs(f) ** 2
    mean_x = dx * np.sum(grid.x * density) / norm_sq
    u = grid.x - mean_x
    var_x = dx * np.sum(u * u * density) / norm_sq

    df = spectral_derivative(f, grid)
    mean_p = dx * np.vdot(f, df).imag / norm_sq
    pf_centered = -1j * df - mean_p * f  # (p - mean_p) f
    var_p = dx * np.vdot(pf_centered, pf_centered).real / norm_sq
    cov_xp = dx * np.vdot(f, u * pf_centered).real / norm_sq
    return MomentSet(norm_sq, float(mean_x), float(mean_p), float(var_x), float(var_p), float(cov_xp))


def gaussian_from_moments(moments, feasibility_slack=1e-9):
    """Gaussian whose center, momentum, position variance, and covariance
    match the given moments.

    The four parameters come from (mean_x, mean_p, var_x, cov_xp); var_p then
    equals 1/(4 var_x) + cov_xp^2 / var_x automatically, so the requested
    var_p only enters the feasibility check var_p >= 1/(4 var_x).
    """
    if moments.var_x <= 0.0:
        raise InfeasibleMomentsError(f"position variance must be > 0, got {moments.var_x!r}")
    bound = 1.0 / (4.0 * moments.var_x)
    if moments.var_p < bound * (1.0 - feasibility_slack):
        raise InfeasibleMomentsError(
            f"moments violate the uncertainty bound: var_x * var_p = "
            f"{moments.var_x * moments.var_p:.6g} < 1/4"
        )
    a = 1.0 / (2.0 * moments.var_x)
    b = -2.0 * a * moments.cov_xp
    return Gaussian1D(a=a, b=b, q=moments.mean_x, p=moments.mean_p)
