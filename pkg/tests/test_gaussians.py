import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from rothe1d import (
    DegenerateResidualError,
    Gaussian1D,
    InfeasibleMomentsError,
    MomentSet,
    UniformGrid,
    analytic_moments,
    evaluate,
    gaussian_from_moments,
    moments_of,
    overlap,
    parameter_derivatives,
)
from helpers import resolving_grid


def test_value_at_center_is_one():
    g = Gaussian1D(a=1.0)
    assert evaluate(g, np.array([0.0]))[0] == pytest.approx(1.0 + 0.0j, abs=1e-15)


def test_value_closed_form():
    g = Gaussian1D(a=1.0)
    assert evaluate(g, np.array([1.0]))[0] == pytest.approx(np.exp(-0.5), abs=1e-15)
    narrow = Gaussian1D(a=0.37745)
    assert evaluate(narrow, np.array([2.0]))[0] == pytest.approx(np.exp(-0.7549), abs=1e-15)


def test_magnitude_bounded_by_width_envelope():
    g = Gaussian1D(a=0.7, b=-2.0, q=1.5, p=3.0)
    xs = np.linspace(-20, 20, 4001)
    assert np.allclose(np.abs(evaluate(g, xs)), np.exp(-0.35 * (xs - 1.5) ** 2))


def test_invalid_width_rejected():
    with pytest.raises(ValueError):
        Gaussian1D(a=0.0)
    with pytest.raises(ValueError):
        Gaussian1D(a=-1.0)


def test_derivatives_vanish_at_center():
    g = Gaussian1D(a=2.0, b=0.5, q=-1.0, p=0.7)
    da, _, _, dp = parameter_derivatives(g, np.array([g.q]))
    assert abs(da[0]) < 1e-15
    assert abs(dp[0]) < 1e-15


def test_center_derivative_closed_form():
    g = Gaussian1D(a=1.0)
    dq = parameter_derivatives(g, np.array([1.0]))[2]
    assert dq[0] == pytest.approx(np.exp(-0.5), abs=1e-15)


def _fd_derivatives(g, xs, step=1e-6):
    out = []
    for name in ("a", "b", "q", "p"):
        fields = {k: getattr(g, k) for k in ("a", "b", "q", "p")}
        plus, minus = dict(fields), dict(fields)
        plus[name] += step
        minus[name] -= step
        out.append((evaluate(Gaussian1D(**plus), xs) - evaluate(Gaussian1D(**minus), xs)) / (2 * step))
    return out


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(7)
    xs = np.linspace(-8.0, 8.0, 201)
    for _ in range(10):
        g = Gaussian1D(
            a=float(rng.uniform(0.05, 4.0)),
            b=float(rng.uniform(-2.0, 2.0)),
            q=float(rng.uniform(-3.0, 3.0)),
            p=float(rng.uniform(-2.0, 2.0)),
        )
        analytic = parameter_derivatives(g, xs)
        numeric = _fd_derivatives(g, xs)
        for got, want in zip(analytic, numeric):
            assert np.linalg.norm(got - want) <= 1e-6 * max(np.linalg.norm(want), 1e-12)


def test_self_overlap_closed_form():
    for a in (0.05, 0.37745, 1.0, 4.0):
        g = Gaussian1D(a=a, b=1.3, q=-2.0, p=0.4)
        assert overlap(g, g) == pytest.approx(np.sqrt(np.pi / a), rel=1e-14)


def test_overlap_against_quadrature():
    grid = UniformGrid(60.0, 4096)
    g1 = Gaussian1D(a=0.8, b=0.6, q=-1.0, p=1.2)
    g2 = Gaussian1D(a=1.7, b=-0.9, q=2.5, p=-0.3)
    quad = grid.dx * np.vdot(evaluate(g1, grid.x), evaluate(g2, grid.x))
    assert quad == pytest.approx(overlap(g1, g2), rel=1e-13)


def test_moments_of_gaussian_match_analytic():
    g = Gaussian1D(a=0.9, b=-1.4, q=2.0, p=-0.8)
    grid = resolving_grid(g)
    m = moments_of(evaluate(g, grid.x), grid)
    want = analytic_moments(g)
    assert m.norm_sq == pytest.approx(want.norm_sq, rel=1e-12)
    assert m.mean_x == pytest.approx(want.mean_x, rel=1e-10, abs=1e-12)
    assert m.mean_p == pytest.approx(want.mean_p, rel=1e-10, abs=1e-12)
    assert m.var_x == pytest.approx(want.var_x, rel=1e-10)
    assert m.var_p == pytest.approx(want.var_p, rel=1e-10)
    assert m.cov_xp == pytest.approx(want.cov_xp, rel=1e-10, abs=1e-12)


def test_moments_real_symmetric_function_has_zero_momentum():
    grid = UniformGrid(40.0, 2048)
    values = np.exp(-0.5 * grid.x**2).astype(complex)
    m = moments_of(values, grid)
    assert abs(m.mean_p) < 1e-12
    assert abs(m.cov_xp) < 1e-12


def test_moments_translation_covariance():
    grid = UniformGrid(60.0, 4096)
    base = np.exp(-0.4 * grid.x**2) * np.exp(0.3j * grid.x)
    shifted = np.exp(-0.4 * (grid.x - 5.0) ** 2) * np.exp(0.3j * (grid.x - 5.0))
    m0 = moments_of(base, grid)
    m1 = moments_of(shifted, grid)
    assert m1.mean_x - m0.mean_x == pytest.approx(5.0, abs=1e-10)
    assert m1.var_x == pytest.approx(m0.var_x, rel=1e-10)


def test_moments_zero_function_rejected():
    grid = UniformGrid(10.0, 256)
    with pytest.raises(DegenerateResidualError):
        moments_of(np.zeros(grid.n, dtype=complex), grid)


def test_gaussian_from_moments_fixed_point():
    g = gaussian_from_moments(analytic_moments(Gaussian1D(a=1.0)))
    assert (g.a, g.b, g.q, g.p) == pytest.approx((1.0, 0.0, 0.0, 0.0), abs=1e-15)


def test_gaussian_from_moments_infeasible():
    with pytest.raises(InfeasibleMomentsError):
        gaussian_from_moments(
            MomentSet(norm_sq=1.0, mean_x=0.0, mean_p=0.0, var_x=1.0, var_p=0.1, cov_xp=0.0)
        )


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(1e-3, 1e2),
    b=st.floats(-1e2, 1e2),
    q=st.floats(-5.0, 5.0),
    p=st.floats(-3.0, 3.0),
)
@example(a=2.0, b=-1.0, q=0.5, p=3.0)
@example(a=1e-3, b=1e2, q=0.0, p=0.0)
@example(a=1e2, b=-1e2, q=-5.0, p=3.0)
def test_moment_round_trip(a, b, q, p):
    g = Gaussian1D(a=a, b=b, q=q, p=p)
    grid = resolving_grid(g)
    recovered = gaussian_from_moments(moments_of(evaluate(g, grid.x), grid))
    for got, want in zip(
        (recovered.a, recovered.b, recovered.q, recovered.p), (a, b, q, p)
    ):
        assert got == pytest.approx(want, rel=1e-8, abs=1e-8)
