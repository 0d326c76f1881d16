"""Linear combinations of Gaussians and least-squares fits to grid functions."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import gaussians
from .grid import GridWavefunction
from .validation import check_complex_vector, check_count, check_positive
from .varpro import GaussNewtonOptions, gauss_newton

__all__ = ["LCGState", "FitResult", "LCGFit", "synthesize", "fit_lcg", "ladder_state"]


@dataclass(frozen=True)
class LCGState:
    """K Gaussians with complex linear coefficients at one time layer."""

    gaussians: tuple
    coeffs: np.ndarray
    time_label: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gaussians", tuple(self.gaussians))
        if not self.gaussians:
            raise ValueError("an LCG state needs at least one Gaussian")
        coeffs = check_complex_vector("coeffs", self.coeffs, n=len(self.gaussians))
        object.__setattr__(self, "coeffs", coeffs)

    def __len__(self):
        return len(self.gaussians)

    def params_array(self):
        """Nonlinear parameters as a (K, 4) array of rows (a, b, q, p)."""
        return np.array([(g.a, g.b, g.q, g.p) for g in self.gaussians], dtype=float)

    def norm(self):
        """Analytic norm via the Gaussian overlap Gram matrix."""
        params = self.params_array()
        c1 = 0.5 * (params[:, 0] - 1j * params[:, 1])[:, None]
        c2 = 0.5 * (params[:, 0] + 1j * params[:, 1])[None, :]
        mid = 0.5 * (params[:, 2][:, None] + params[:, 2][None, :])
        q1 = params[:, 2][:, None] - mid
        q2 = params[:, 2][None, :] - mid
        p1 = params[:, 3][:, None]
        p2 = params[:, 3][None, :]
        aa = c1 + c2
        bb = 2.0 * c1 * q1 + 2.0 * c2 * q2 - 1j * p1 + 1j * p2
        cc = -c1 * q1**2 - c2 * q2**2 + 1j * p1 * q1 - 1j * p2 * q2
        gram = np.sqrt(np.pi / aa) * np.exp(bb * bb / (4.0 * aa) + cc)
        return float(np.sqrt(max(np.vdot(self.coeffs, gram @ self.coeffs).real, 0.0)))


def state_from_params(params, coeffs, time_label=0.0):
    funcs = tuple(gaussians.Gaussian1D(*row) for row in np.asarray(params, dtype=float))
    return LCGState(funcs, coeffs, time_label)


#: support radius factor: exp(-a u^2 / 2) and its u^2-weighted derivatives are
#: below double precision once |u| > 10 / sqrt(a)
_SUPPORT_FACTOR = 10.0


def support_slice(a, q, xs):
    """Index slice of xs where a Gaussian of width a centered at q is
    numerically nonzero (assumes xs ascending and uniform)."""
    radius = _SUPPORT_FACTOR / np.sqrt(a)
    lo = np.searchsorted(xs, q - radius, side="left")
    hi = np.searchsorted(xs, q + radius, side="right")
    return slice(int(lo), int(hi))


def basis_columns(params, xs, derivs=False):
    """Evaluate K Gaussians (rows of params) on xs as an (n, K) column matrix.

    With derivs=True also return the (n, K, 4) parameter derivatives.  Each
    Gaussian is evaluated on its numerical support only.
    """
    params = np.asarray(params, dtype=float)
    xs = np.asarray(xs, dtype=float)
    n, n_gauss = xs.shape[0], params.shape[0]
    cols = np.zeros((n, n_gauss), dtype=complex)
    dcols = np.zeros((n, n_gauss, 4), dtype=complex) if derivs else None
    for k, (a, b, q, p) in enumerate(params):
        sl = support_slice(a, q, xs)
        u = xs[sl] - q
        g = np.exp(-0.5 * complex(a, b) * u * u + 1j * p * u)
        cols[sl, k] = g
        if derivs:
            u2 = u * u
            dcols[sl, k, 0] = -0.5 * u2 * g
            dcols[sl, k, 1] = -0.5j * u2 * g
            dcols[sl, k, 2] = (complex(a, b) * u - 1j * p) * g
            dcols[sl, k, 3] = 1j * u * g
    if not derivs:
        return cols
    return cols, dcols


def synthesize(state, grid):
    """Sample sum_k c_k g_k on the grid."""
    values = basis_columns(state.params_array(), grid.x) @ state.coeffs
    return GridWavefunction(grid, values)


def ladder_state(n_gaussians, a_lo=0.1, a_hi=4.0, time_label=0.0):
    """Even-tempered initial guess: widths on a geometric ladder, b = p = q = 0,
    unit coefficients (the linear solve replaces them immediately)."""
    check_count("n_gaussians", n_gaussians)
    if n_gaussians == 1:
        widths = [float(np.sqrt(a_lo * a_hi))]
    else:
        widths = np.geomspace(a_lo, a_hi, n_gaussians)
    funcs = tuple(gaussians.Gaussian1D(a=float(a)) for a in widths)
    return LCGState(funcs, np.ones(n_gaussians, dtype=complex), time_label)


@dataclass
class FitResult:
    state: LCGState
    residual_sq: float
    converged: bool
    iterations: int
    stop_reason: str


def _is_symmetric_real(values, grid, tol=1e-10):
    scale = np.max(np.abs(values))
    if scale == 0.0:
        return False
    if np.max(np.abs(values.imag)) > tol * scale:
        return False
    mirrored = np.roll(values[::-1], 1)  # x -> -x on the periodic grid
    return bool(np.max(np.abs(values - mirrored)) <= 1e-8 * scale)


def fit_lcg(
    target,
    n_gaussians,
    init=None,
    tol=1e-12,
    symmetric=None,
    max_iterations=200,
    golub_pereyra=False,
    rcond=1e-12,
):
    """Variable-projection fit of an LCG(K) to a target grid function.

    Minimizes 1/2 ||target - sum_k c_k g_k||^2 with the shared Gauss-Newton
    engine and reports the squared residual ||target - fit||^2.  `tol` is the
    residual-squared goal; stagnating above it returns the best state found
    with converged=False.  For symmetric real targets (detected automatically
    unless `symmetric` is set) b, q, p stay frozen at zero and only the
    widths are optimized.
    """
    check_count("n_gaussians", n_gaussians)
    check_positive("tol", tol)
    if target.norm() == 0.0:
        raise ValueError("cannot fit a zero target")
    if init is None:
        init = ladder_state(n_gaussians)
    if len(init) != n_gaussians:
        raise ValueError(f"init has K={len(init)}, expected {n_gaussians}")
    if symmetric is None:
        symmetric = _is_symmetric_real(target.values, target.grid)
    params0 = init.params_array()
    free = np.ones_like(params0, dtype=bool)
    if symmetric:
        free[:, 1:] = False

    grid = target.grid

    def build(params, derivs=False):
        return basis_columns(params, grid.x, derivs=derivs)

    options = GaussNewtonOptions(
        target=0.5 * tol,
        max_iterations=max_iterations,
        golub_pereyra=golub_pereyra,
        rcond=rcond,
    )
    result = gauss_newton(build, target.values, grid.dx, params0, free=free, options=options)
    state = state_from_params(result.params, result.coeffs, time_label=init.time_label)
    return FitResult(
        state=state,
        residual_sq=2.0 * result.objective,
        converged=result.converged,
        iterations=result.iterations,
        stop_reason=result.stop_reason,
    )


class LCGFit(BaseEstimator):
    """Scikit-learn style wrapper around `fit_lcg`.

    fit(X) expects a GridWavefunction target and stores the fitted LCG state
    in `state_` together with `residual_sq_`, `converged_`, and `n_iter_`.
    """

    def __init__(
        self,
        n_gaussians=4,
        tol=1e-12,
        init=None,
        symmetric=None,
        max_iterations=200,
        golub_pereyra=False,
    ):
        self.n_gaussians = n_gaussians
        self.tol = tol
        self.init = init
        self.symmetric = symmetric
        self.max_iterations = max_iterations
        self.golub_pereyra = golub_pereyra

    def fit(self, X, y=None):
        if not isinstance(X, GridWavefunction):
            raise TypeError("X must be a GridWavefunction")
        result = fit_lcg(
            X,
            self.n_gaussians,
            init=self.init,
            tol=self.tol,
            symmetric=self.symmetric,
            max_iterations=self.max_iterations,
            golub_pereyra=self.golub_pereyra,
        )
        self.state_ = result.state
        self.residual_sq_ = result.residual_sq
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        return self

    def transform(self, X):
        """Synthesize the fitted state on the grid of X (or on X itself)."""
        grid = X.grid if isinstance(X, GridWavefunction) else X
        return synthesize(self.state_, grid)
