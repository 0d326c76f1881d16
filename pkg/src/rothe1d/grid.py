"""Uniform periodic grid: spectral Hamiltonian, quadrature, Crank-Nicolson
reference propagation, and the inverse-iteration ground-state solver.

The grid doubles as the quadrature rule for all Gaussian matrix elements:
the periodic trapezoid rule is spectrally accurate for smooth decaying
integrands, so inner products of resolved wave packets are nearly exact.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.fft as sfft
from sklearn.base import BaseEstimator

from .model import DEFAULT_MODEL, effective_potential, potential
from .validation import check_count, check_positive

__all__ = [
    "UniformGrid",
    "GridWavefunction",
    "GridTrajectory",
    "CrankNicolson",
    "LinearSolveError",
    "EigensolverError",
    "DEFAULT_GRID",
    "inner",
    "norm",
    "spectral_derivative",
    "apply_hamiltonian",
    "ground_state",
    "cn_step",
    "propagate_reference",
]


class LinearSolveError(RuntimeError):
    """An inner Krylov solve failed to reach its tolerance."""

    def __init__(self, message, iterations):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class EigensolverError(RuntimeError):
    """Inverse iteration failed to converge; carries the residual history."""

    def __init__(self, message, residual_history):
        super().__init__(message)
        self.residual_history = list(residual_history)


@dataclass(frozen=True)
class UniformGrid:
    """n equidistant points on [-half_length, half_length) with periodic wrap."""

    half_length: float = 500.0
    n: int = 4096
    x: np.ndarray = dataclass_field(init=False, repr=False, compare=False)
    k: np.ndarray = dataclass_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        check_positive("grid half_length", self.half_length)
        check_count("grid n", self.n, minimum=2)
        if self.n & (self.n - 1):
            raise ValueError(f"grid n must be a power of two, got {self.n}")
        dx = 2.0 * self.half_length / self.n
        object.__setattr__(self, "x", -self.half_length + dx * np.arange(self.n))
        object.__setattr__(self, "k", 2.0 * np.pi * sfft.fftfreq(self.n, d=dx))

    @property
    def dx(self):
        return 2.0 * self.half_length / self.n


DEFAULT_GRID = UniformGrid()


@dataclass
class GridWavefunction:
    """Complex values sampled on a UniformGrid."""

    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"values must have shape ({self.grid.n},), got {self.values.shape}"
            )

    def norm(self):
        return float(np.sqrt(self.grid.dx * np.vdot(self.values, self.values).real))

    def copy(self):
        return GridWavefunction(self.grid, self.values.copy())


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise ValueError(
            f"grid mismatch: (l={f.grid.half_length}, n={f.grid.n}) vs "
            f"(l={g.grid.half_length}, n={g.grid.n})"
        )


def inner(f, g):
    """Quadrature inner product dx * sum(conj(f) g); conjugate-linear in f."""
    _check_same_grid(f, g)
    return complex(f.grid.dx * np.vdot(f.values, g.values))


def norm(f):
    return f.norm()


def spectral_derivative(values, grid, order=1):
    """FFT derivative d^order/dx^order of periodic grid values."""
    return sfft.ifft((1j * grid.k) ** order * sfft.fft(values))


def _apply_h_values(values, v_eff, grid):
    kinetic = sfft.ifft(0.5 * grid.k**2 * sfft.fft(values))
    return kinetic + v_eff * values


def apply_hamiltonian(psi, t, model=DEFAULT_MODEL):
    """H(t) psi with FFT kinetic energy and pointwise potential + dipole term."""
    v_eff = effective_potential(psi.grid.x, t, model)
    return GridWavefunction(psi.grid, _apply_h_values(psi.values, v_eff, psi.grid))


def _cg(apply_op, b, x0, rtol, maxiter):
    """Conjugate gradients for a Hermitian positive-definite operator."""
    x = x0.copy()
    r = b - apply_op(x)
    p = r.copy()
    rs = np.vdot(r, r).real
    stop = (rtol * np.linalg.norm(b)) ** 2
    if rs <= stop:
        return x, 0
    for it in range(1, maxiter + 1):
        ap = apply_op(p)
        alpha = rs / np.vdot(p, ap).real
        x += alpha * p
        r -= alpha * ap
        rs_new = np.vdot(r, r).real
        if rs_new <= stop:
            return x, it
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise LinearSolveError("conjugate-gradient solve did not converge", maxiter)


def ground_state(
    model=DEFAULT_MODEL,
    grid=DEFAULT_GRID,
    tol=1e-12,
    shift=-1.0,
    max_iterations=500,
    solver_rtol=1e-13,
    potential_values=None,
    full_output=False,
):
    """Lowest eigenpair of the field-free Hamiltonian by inverse iteration.

    Each iteration solves (H - shift) v = psi with conjugate gradients (the
    shifted operator is positive definite for shift below the spectrum) and
    renormalizes.  Stops once the Rayleigh-quotient residual |H psi - E psi|
    drops below tol.  `potential_values` overrides V(x) on the grid (test
    hook for potentials with known spectra).

    Returns (psi, energy); with full_output=True also a dict with the energy
    and residual histories.
    """
    check_positive("tol", tol)
    v_pot = potential(grid.x, model) if potential_values is None else np.asarray(potential_values, dtype=float)

    def apply_h(values):
        return _apply_h_values(values, v_pot, grid)

    def apply_shifted(values):
        return apply_h(values) - shift * values

    psi = np.exp(-0.5 * grid.x**2).astype(complex)
    psi /= np.sqrt(grid.dx) * np.linalg.norm(psi)
    energies, residuals = [], []
    for _ in range(max_iterations):
        v, _ = _cg(apply_shifted, psi, psi, rtol=solver_rtol, maxiter=10 * grid.n)
        psi = v / (np.sqrt(grid.dx) * np.linalg.norm(v))
        h_psi = apply_h(psi)
        energy = grid.dx * np.vdot(psi, h_psi).real
        residual = np.sqrt(grid.dx) * np.linalg.norm(h_psi - energy * psi)
        energies.append(energy)
        residuals.append(residual)
        if residual <= tol:
            break
    else:
        raise EigensolverError(
            f"inverse iteration stalled at residual {residuals[-1]:.3e} "
            f"(tol {tol:.3e}) after {max_iterations} iterations",
            residuals,
        )
    # fix the global phase: largest-magnitude component real and positive
    peak = np.argmax(np.abs(psi))
    psi = psi * np.exp(-1j * np.angle(psi[peak]))
    state = GridWavefunction(grid, psi)
    if full_output:
        return state, energy, {"energies": energies, "residuals": residuals}
    return state, energy


def cn_step(psi, t_prev, h, model=DEFAULT_MODEL, solver_rtol=1e-12, solver_maxiter=500):
    """One implicit trapezoidal step from t_prev to t_prev + h:

        (I + i h/2 H(t_prev + h)) psi_new = (I - i h/2 H(t_prev)) psi.

    The implicit operator A = I + i lam H is normal, so the solve runs
    conjugate gradients on A^H A = I + lam^2 H^2, which stays extremely well
    conditioned for lam * max|H| below one.
    """
    check_positive("h", h)
    grid = psi.grid
    lam = 0.5 * h
    v_old = effective_potential(grid.x, t_prev, model)
    v_new = effective_potential(grid.x, t_prev + h, model)

    rhs = psi.values - 1j * lam * _apply_h_values(psi.values, v_old, grid)

    def apply_h_new(values):
        return _apply_h_values(values, v_new, grid)

    def apply_normal(values):
        return values + lam**2 * apply_h_new(apply_h_new(values))

    b = rhs - 1j * lam * apply_h_new(rhs)  # A^H rhs
    solution, _ = _cg(apply_normal, b, rhs, rtol=solver_rtol, maxiter=solver_maxiter)
    return GridWavefunction(grid, solution)


@dataclass
class GridTrajectory:
    """Snapshots of a grid propagation, including the initial state."""

    times: np.ndarray
    snapshots: list
    norms: np.ndarray

    @property
    def final(self):
        return self.snapshots[-1]


def propagate_reference(
    model=DEFAULT_MODEL,
    grid=DEFAULT_GRID,
    h=1e-3,
    t_end=100.0,
    snapshot_every=1000,
    t_start=0.0,
    psi0=None,
    solver_rtol=1e-12,
    gs_tol=1e-12,
):
    """Crank-Nicolson propagation from the ground state (or psi0) to t_end.

    Snapshots are stored every `snapshot_every` steps plus the final state.
    """
    check_positive("h", h)
    check_count("snapshot_every", snapshot_every, minimum=1)
    if t_end < t_start:
        raise ValueError(f"t_end must be >= t_start, got {t_end} < {t_start}")
    if psi0 is None:
        psi0, _ = ground_state(model, grid, tol=gs_tol)
    psi = psi0.copy()
    n_steps = int(round((t_end - t_start) / h))
    times = [t_start]
    snapshots = [psi.copy()]
    norms = [psi.norm()]
    for n in range(1, n_steps + 1):
        t_prev = t_start + (n - 1) * h
        psi = cn_step(psi, t_prev, h, model, solver_rtol=solver_rtol)
        if n % snapshot_every == 0 or n == n_steps:
            times.append(t_start + n * h)
            snapshots.append(psi.copy())
            norms.append(psi.norm())
    return GridTrajectory(np.asarray(times), snapshots, np.asarray(norms))


class CrankNicolson(BaseEstimator):
    """Grid reference propagator with a scikit-learn style interface.

    Parameters mirror `propagate_reference`; `fit(psi0)` runs the propagation
    from the given GridWavefunction and stores the trajectory.
    """

    def __init__(
        self,
        model=DEFAULT_MODEL,
        h=1e-3,
        t_end=100.0,
        snapshot_every=1000,
        t_start=0.0,
        solver_rtol=1e-12,
    ):
        self.model = model
        self.h = h
        self.t_end = t_end
        self.snapshot_every = snapshot_every
        self.t_start = t_start
        self.solver_rtol = solver_rtol

    def fit(self, X, y=None):
        """Propagate the initial state X (a GridWavefunction)."""
        if not isinstance(X, GridWavefunction):
            raise TypeError("X must be a GridWavefunction")
        trajectory = propagate_reference(
            model=self.model,
            grid=X.grid,
            h=self.h,
            t_end=self.t_end,
            snapshot_every=self.snapshot_every,
            t_start=self.t_start,
            psi0=X,
            solver_rtol=self.solver_rtol,
        )
        self.trajectory_ = trajectory
        self.times_ = trajectory.times
        self.final_state_ = trajectory.final
        self.norm_drift_ = float(np.max(np.abs(trajectory.norms - trajectory.norms[0])))
        return self
