"""Physical model: soft-core potential, laser pulse, and strong-field diagnostics.

Atomic units throughout.  The Hamiltonian is

    H(t) = -1/2 d^2/dx^2 + V(x) + x * E(t),
    V(x) = -coulomb_strength / sqrt(x^2 + softening),

with a sin^2-envelope pulse E(t) that is identically zero outside (t0, t1).
"""

from dataclasses import dataclass

import numpy as np

from .validation import check_finite, check_positive


@dataclass(frozen=True)
class PulseConfig:
    """Laser pulse: peak field e0, carrier frequency omega, support (t0, t1)."""

    e0: float = 0.225
    omega: float = 0.25
    t0: float = 20.0
    t1: float = 80.0

    def __post_init__(self):
        check_positive("pulse e0", self.e0, strict=False)
        check_positive("pulse omega", self.omega)
        check_finite("pulse t0", self.t0)
        check_finite("pulse t1", self.t1)
        if self.t1 <= self.t0:
            raise ValueError(f"pulse requires t1 > t0, got ({self.t0}, {self.t1})")

    @property
    def center(self):
        return 0.5 * (self.t0 + self.t1)


@dataclass(frozen=True)
class ModelConfig:
    """Soft-core atom in a dipole-coupled laser field."""

    pulse: PulseConfig = PulseConfig()
    softening: float = 0.25
    coulomb_strength: float = 0.5

    def __post_init__(self):
        check_positive("softening", self.softening)
        check_finite("coulomb_strength", self.coulomb_strength)


#: Canonical parameter set shared by every executable path.
DEFAULT_MODEL = ModelConfig()


def potential(x, model=DEFAULT_MODEL):
    """Static potential V(x) = -coulomb_strength / sqrt(x^2 + softening)."""
    return -model.coulomb_strength / np.sqrt(np.asarray(x, dtype=float) ** 2 + model.softening)


def field(t, pulse=DEFAULT_MODEL.pulse):
    """Electric field at time t; zero outside the open interval (t0, t1)."""
    t = np.asarray(t, dtype=float)
    inside = (t > pulse.t0) & (t < pulse.t1)
    phase = np.where(inside, np.pi * (t - pulse.t0) / (pulse.t1 - pulse.t0), 0.0)
    value = pulse.e0 * np.sin(phase) ** 2 * np.cos(pulse.omega * (t - pulse.center))
    value = np.where(inside, value, 0.0)
    return value if value.ndim else float(value)


def effective_potential(x, t, model=DEFAULT_MODEL):
    """Instantaneous potential V(x) + x * E(t) seen by the electron."""
    return potential(x, model) + np.asarray(x, dtype=float) * field(t, model.pulse)


def diagnostics(pulse, ionization_potential=0.5):
    """Ponderomotive energy U_p = e0^2/(4 omega^2) and Keldysh parameter
    gamma = omega * sqrt(2 I_p) / e0 for the given pulse."""
    check_positive("ionization_potential", ionization_potential)
    if pulse.e0 <= 0.0:
        raise ValueError("diagnostics require a nonzero peak field")
    up = pulse.e0**2 / (4.0 * pulse.omega**2)
    gamma = pulse.omega * np.sqrt(2.0 * ionization_potential) / pulse.e0
    return {"ponderomotive": up, "keldysh": gamma}


def field_extrema(pulse, t_from=None, t_to=None, samples_per_unit=200):
    """Times of local maxima of |E(t)| in [t_from, t_to], refined by bisection
    on the derivative.  Defaults to the first half of the pulse."""
    if t_from is None:
        t_from = pulse.t0
    if t_to is None:
        t_to = pulse.center
    ts = np.linspace(t_from, t_to, max(8, int((t_to - t_from) * samples_per_unit)))
    mags = np.abs(field(ts, pulse))
    peaks = np.flatnonzero((mags[1:-1] > mags[:-2]) & (mags[1:-1] >= mags[2:])) + 1
    out = []
    for j in peaks:
        lo, hi = ts[j - 1], ts[j + 1]
        for _ in range(60):  # bisect d|E|/dt sign change
            mid = 0.5 * (lo + hi)
            d = np.abs(field(mid + 1e-7, pulse)) - np.abs(field(mid - 1e-7, pulse))
            if d > 0:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    # the pulse center is an extremum whenever the carrier peaks there
    if mags[-1] >= mags[-2] and (not out or abs(out[-1] - ts[-1]) > 1e-6):
        out.append(float(ts[-1]))
    return np.asarray(out)
