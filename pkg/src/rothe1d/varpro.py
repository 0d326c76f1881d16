"""Variable-projection Gauss-Newton engine for separable least squares.

Minimizes F(theta) = 1/2 * dx * || y - M(theta) c ||^2 over the nonlinear
parameters theta, with the linear coefficients c eliminated at every iterate
by a rank-revealing linear least-squares solve.  The search direction comes
from the Kaufman form of the variable-projection Jacobian,

    J_i = -(I - P) (dM/dtheta_i) c,      P = orthogonal projector onto col(M),

which yields the exact gradient of F (the omitted Golub-Pereyra term is
orthogonal to the residual) and an accurate Hessian model near small
residuals.  Step lengths are controlled by Armijo backtracking.

Parameters are matrices of shape (K, 4) holding one (a, b, q, p) row per
basis function; widths are optimized as log(a) so every iterate stays
feasible.  A boolean mask of the same shape freezes individual entries.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

__all__ = ["GaussNewtonOptions", "GaussNewtonResult", "solve_linear", "gauss_newton"]

_LOG_WIDTH_COLUMN = 0


@dataclass(frozen=True)
class GaussNewtonOptions:
    """Stopping and line-search constants for the Gauss-Newton loop."""

    target: float = 0.0  # stop as soon as F < target ...
    min_iterations: int = 0  # ... but only after this many accepted updates
    max_iterations: int = 50
    armijo_c1: float = 1e-4
    max_backtracks: int = 30
    step_tol: float = 1e-12
    stagnation_ratio: float = 1e-3  # relative decrease counting as progress
    stagnation_patience: int = 2
    rcond: float = 1e-12
    golub_pereyra: bool = False
    width_bounds: tuple = (0.0, np.inf)  # trial rejection outside (quadrature guard)


@dataclass
class LinearFit:
    """Result of the inner linear solve at fixed nonlinear parameters."""

    objective: float
    coeffs: np.ndarray
    residual: np.ndarray
    basis: np.ndarray  # orthonormal basis of the retained column span
    singular_values: np.ndarray
    rank: int
    _pinv_factors: tuple = dataclass_field(default=None, repr=False)


def solve_linear(columns, target, dx, rcond=1e-12):
    """Least-squares coefficients for min_c ||columns @ c - target||.

    Uses an SVD with singular-value cutoff rcond * sigma_max so duplicated
    (or nearly dependent) columns reduce the rank instead of blowing up the
    solution; the residual is unique either way.
    """
    u, s, vh = np.linalg.svd(columns, full_matrices=False)
    keep = s > rcond * s[0] if s.size and s[0] > 0 else np.zeros(s.shape, bool)
    u_r = u[:, keep]
    coeffs = (vh[keep].conj().T / s[keep]) @ (u_r.conj().T @ target)
    residual = target - columns @ coeffs
    objective = 0.5 * dx * np.vdot(residual, residual).real
    return LinearFit(
        objective=float(objective),
        coeffs=coeffs,
        residual=residual,
        basis=u_r,
        singular_values=s,
        rank=int(np.count_nonzero(keep)),
        _pinv_factors=(vh[keep], s[keep]),
    )


def _project_out(basis, block):
    return block - basis @ (basis.conj().T @ block)


def _jacobian(fit, dcolumns, params, free, golub_pereyra):
    """Variable-projection Jacobian columns for the free parameters.

    dcolumns has shape (n, K, 4) with derivatives w.r.t. the physical
    parameters; the log-width chain rule multiplies the a-column by a.
    """
    n, n_gauss, _ = dcolumns.shape
    idx = np.argwhere(free)
    scaled = dcolumns * fit.coeffs[None, :, None]
    scaled[:, :, _LOG_WIDTH_COLUMN] *= params[:, _LOG_WIDTH_COLUMN][None, :]
    jac = -_project_out(fit.basis, scaled.reshape(n, 4 * n_gauss)[:, free.ravel()])
    if golub_pereyra:
        # exact Golub-Pereyra correction: -(M^+)^H (dM_i)^H r per column
        vh_r, s_r = fit._pinv_factors
        pinv_h = fit.basis @ (vh_r / s_r[:, None])  # (M^+)^H = U_r S^-1 V_r^H
        inner = np.einsum("nkj,n->kj", dcolumns.conj(), fit.residual)
        inner[:, _LOG_WIDTH_COLUMN] *= params[:, _LOG_WIDTH_COLUMN]
        k_idx = idx[:, 0]
        jac = jac - pinv_h[:, k_idx] * inner.ravel()[free.ravel()][None, :]
    return jac, idx


def _normal_direction(jac, residual, cutoff=1e-13):
    """Gauss-Newton search direction min_d ||jac d + residual|| for real d.

    Solved through the (small) real normal matrix Re(J^H J) with an
    eigenvalue pseudo-inverse, so coalescing basis functions degrade the
    direction gracefully instead of blowing it up.  Also returns Re(J^H r),
    the gradient of the half-squared residual up to the dx factor.
    """
    gram = (jac.conj().T @ jac).real
    grad = (jac.conj().T @ residual).real
    eigvals, eigvecs = np.linalg.eigh(gram)
    keep = eigvals > cutoff * max(eigvals[-1], 0.0)
    if not np.any(keep):
        return np.zeros(jac.shape[1]), grad
    inv = (eigvecs[:, keep] / eigvals[keep]) @ eigvecs[:, keep].T
    return -(inv @ grad), grad


def _pack(params):
    packed = params.copy()
    packed[:, _LOG_WIDTH_COLUMN] = np.log(packed[:, _LOG_WIDTH_COLUMN])
    return packed


def _unpack(packed):
    params = packed.copy()
    params[:, _LOG_WIDTH_COLUMN] = np.exp(params[:, _LOG_WIDTH_COLUMN])
    return params


@dataclass
class GaussNewtonResult:
    params: np.ndarray
    coeffs: np.ndarray
    objective: float
    residual: np.ndarray
    iterations: int
    backtracks: int
    converged: bool
    stop_reason: str
    objective_history: list


def gauss_newton(build_columns, target, dx, params0, free=None, options=GaussNewtonOptions()):
    """Run the variable-projection Gauss-Newton loop.

    build_columns(params) returns the (n, K) column matrix; with derivs=True
    it returns (columns, dcolumns) where dcolumns has shape (n, K, 4).

    With min_iterations > 0 the loop keeps polishing even when the target is
    already met at entry (a warm start inside the tolerance still drifts if
    the parameters are never updated).

    Stop reasons: "target" (F < target), "step" (step norm below step_tol),
    "stationary" (zero directional derivative), "stagnation" (insufficient
    relative decrease for `stagnation_patience` consecutive iterations),
    "backtracking" (line search exhausted), "max_iterations".
    """
    params = np.array(params0, dtype=float)
    n_gauss = params.shape[0]
    if free is None:
        free = np.ones_like(params, dtype=bool)
    fit = solve_linear(build_columns(params), target, dx, options.rcond)
    history = [fit.objective]
    iterations = 0
    backtracks_total = 0
    stagnant = 0
    stop = "max_iterations"
    a_lo, a_hi = options.width_bounds
    for _ in range(options.max_iterations):
        if fit.objective < options.target and iterations >= options.min_iterations:
            stop = "target"
            break
        columns, dcolumns = build_columns(params, derivs=True)
        jac, _ = _jacobian(fit, dcolumns, params, free, options.golub_pereyra)
        direction, grad = _normal_direction(jac, fit.residual)
        slope = dx * np.dot(grad, direction)  # dF/dlambda at 0
        if slope >= 0.0:
            stop = "stationary"
            break
        step = np.zeros_like(params)
        step[free] = direction
        step_norm = np.linalg.norm(direction)
        if step_norm < options.step_tol:
            stop = "step"
            break
        packed = _pack(params)
        scale = 1.0
        accepted = None
        for _bt in range(options.max_backtracks + 1):
            trial = _unpack(packed + scale * step)
            widths = trial[:, _LOG_WIDTH_COLUMN]
            if np.all(widths >= a_lo) and np.all(widths <= a_hi):
                trial_fit = solve_linear(build_columns(trial), target, dx, options.rcond)
                if trial_fit.objective <= fit.objective + options.armijo_c1 * scale * slope:
                    accepted = (trial, trial_fit)
                    break
            scale *= 0.5
            backtracks_total += 1
        if accepted is None:
            stop = "backtracking"
            break
        previous = fit.objective
        params, fit = accepted
        iterations += 1
        history.append(fit.objective)
        if fit.objective >= options.target:
            decrease = (previous - fit.objective) / previous if previous > 0 else 0.0
            stagnant = stagnant + 1 if decrease < options.stagnation_ratio else 0
            if stagnant >= options.stagnation_patience:
                stop = "stagnation"
                break
    else:
        stop = "max_iterations"
    if fit.objective < options.target:
        stop = "target"
    return GaussNewtonResult(
        params=params,
        coeffs=fit.coeffs,
        objective=fit.objective,
        residual=fit.residual,
        iterations=iterations,
        backtracks=backtracks_total,
        converged=stop == "target",
        stop_reason=stop,
        objective_history=history,
    )
