from fractions import Fraction

import numpy as np
import pytest

from curvlab.errors import DomainError
from curvlab.geometry import WeightModel, q_density, principal_curvatures_arrays
from curvlab.grid import GridCalculus
from curvlab.reduction import qtilde_inv
from curvlab.unduloid import (
    UnduloidParams,
    UnduloidShape,
    critical_radius_cmc,
    default_s_grid,
    eta_curve,
    g_s,
    mean_curvature,
    multi_period_profile,
    profile,
    rho0,
    turning_points,
)

# frozen before the build from a 40-digit independent quadrature
RHO0_N2_S05 = 0.1703621383971016210107029
RHO0_N3_S03 = 0.3186370248418912847087129
ETA_N2_S05_B0 = 2.60646521261262571458506


# --- integrand algebra ------------------------------------------------------

def test_g_midpoint_value():
    # ratio = 8/7 at x = 2, so g = 1/sqrt((8/7)^2 - 1) = 7/sqrt(15)
    assert g_s(2.0, UnduloidParams(2, 1.0, 0.5)) == pytest.approx(
        7.0 / np.sqrt(15.0), rel=1e-14
    )


def test_g_domain_errors_and_divergence():
    p = UnduloidParams(2, 1.0, 0.5)
    with pytest.raises(DomainError):
        g_s(1.0, p)
    with pytest.raises(DomainError):
        g_s(3.0, p)  # upper endpoint (1+s)/(1-s) = 3
    with pytest.raises(DomainError):
        g_s(4.0, p)
    assert g_s(1.0 + 1e-12, p) > 1e5
    assert g_s(3.0 - 1e-12, p) > 1e5


@pytest.mark.parametrize("n", [2, 3, 5, 8, 12])
@pytest.mark.parametrize("s", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
def test_deflation_identities_exact_rational(n, s):
    # denominator at x = 1 equals alpha, and the deflated factorisation of
    # num - den is exact
    alpha = (1 + s) ** n - (1 - s) ** n
    beta = (1 + s) ** (n - 1) - (1 - s) ** (n - 1)
    den_const = 2 * s * (1 + s) ** (n - 1)
    den_lead = beta * (1 - s)
    assert den_const + den_lead == alpha  # den(1) == num(1)
    X = (1 + s) / (1 - s)
    t_coeffs = [
        (1 - s) * (1 + s) ** (n - 1) - (1 - s) ** n * X**k
        for k in range(n - 1)
    ]
    assert all(t > 0 for t in t_coeffs)
    for x in (Fraction(1), Fraction(3, 2), X, (1 + X) / 2):
        p_val = -den_lead * x**n + alpha * x ** (n - 1) - den_const
        t_val = sum(t * x ** (n - 2 - k) for k, t in enumerate(t_coeffs))
        assert p_val == -(x - 1) * (x - X) * t_val


def test_g_has_unique_interior_minimum():
    for n, s in [(2, 0.3), (4, 0.6), (9, 0.2)]:
        shape = UnduloidShape(n, s)
        xs = np.linspace(1 + 1e-6, shape.X - 1e-6, 4001)
        vals = shape.g(xs)
        d = np.diff(vals)
        sign_changes = int(np.sum(np.diff(np.sign(d)) != 0))
        assert sign_changes == 1  # falls to a single dip, then rises


def test_log_derivative_matches_complex_step():
    shape = UnduloidShape(3, 0.4)
    xs = np.array([1.05, 1.4, 2.0, shape.X - 0.05])
    g0, logd = shape.g_and_log_deriv(xs)
    h = 1e-20
    gc = shape.g(xs + 1j * h, dl=xs - 1.0 + 1j * h, dr=shape.X - xs - 1j * h)
    complex_step = np.imag(gc) / h
    assert np.max(np.abs(g0 * logd - complex_step) / np.abs(complex_step)) < 1e-12


# --- neck radius and mean curvature ----------------------------------------

def test_rho0_against_frozen_oracle():
    v1, err1 = rho0(UnduloidParams(2, 1.0, 0.5))
    assert v1 == pytest.approx(RHO0_N2_S05, rel=1e-10)
    assert abs(v1 - RHO0_N2_S05) <= max(10 * err1, 1e-13)
    v2, _ = rho0(UnduloidParams(3, 1.0, 0.3))
    assert v2 == pytest.approx(RHO0_N3_S03, rel=1e-10)


def test_rho0_scales_with_slab_width():
    a, _ = rho0(UnduloidParams(3, 1.0, 0.4))
    b, _ = rho0(UnduloidParams(3, 2.5, 0.4))
    assert b == pytest.approx(2.5 * a, rel=1e-11)


@pytest.mark.parametrize("n", [2, 3, 7, 11])
def test_family_limits_to_critical_cylinder(n):
    # rho0(s) -> R_crit as s -> 0; the deviation is -s R_crit + O(s^2)
    s = 1e-3
    r, _ = rho0(UnduloidParams(n, 1.0, s))
    rc = critical_radius_cmc(n, 1.0)
    assert abs(r / rc - 1.0) < 1.05e-3  # ~ s itself
    assert r / (rc * (1 - s)) == pytest.approx(1.0, abs=2e-5)
    h = mean_curvature(UnduloidParams(n, 1.0, s))
    assert h == pytest.approx((n - 1) / rc, rel=1e-3)


def test_bulge_exceeds_neck_and_H_positive():
    for s in (0.1, 0.5, 0.9):
        p = UnduloidParams(3, 1.0, s)
        r0, _ = rho0(p)
        assert r0 * (1 + s) / (1 - s) > r0
        assert mean_curvature(p) > 0


# --- profile reconstruction -------------------------------------------------

def test_profile_endpoints_and_orthogonality():
    p = UnduloidParams(2, 1.0, 0.3)
    prof = profile(p, 128)
    r0, _ = rho0(p)
    assert prof.values[0] == pytest.approx(r0, abs=1e-9)
    assert prof.values[-1] == pytest.approx(r0 * 1.3 / 0.7, abs=1e-9)
    g = GridCalculus(128, 1.0)
    d1 = g.deriv1(prof.values)
    assert abs(d1[0]) < 1e-6
    assert abs(d1[-1]) < 1e-6
    assert np.all(np.diff(prof.values) > 0)  # monotone neck to bulge


def test_profile_mean_curvature_constant():
    p = UnduloidParams(3, 1.0, 0.3)
    prof = profile(p, 192)
    g = GridCalculus(192, 1.0)
    k1, kn = principal_curvatures_arrays(prof, g)
    h_grid = (3 - 1) * k1 + kn
    assert np.max(np.abs(h_grid - mean_curvature(p))) < 1e-6


def test_multi_period_profile_reflects():
    p = UnduloidParams(2, 1.0, 0.35)
    two = multi_period_profile(p, 129, 2)
    # even about the midplane
    assert np.max(np.abs(two.values - two.values[::-1])) < 1e-10
    # first half matches the half-slab construction
    half = profile(UnduloidParams(2, 0.5, 0.35), 65)
    assert np.max(np.abs(two.values[:65] - half.values)) < 1e-9


# --- bifurcation curve -------------------------------------------------------

def test_eta_curve_against_frozen_oracle():
    sm = eta_curve(UnduloidParams(2, 1.0, 0.5), 0)
    assert sm.eta == pytest.approx(ETA_N2_S05_B0, rel=1e-10)


def test_eta_curve_limits_to_one():
    for n, b in [(2, 0), (3, 1), (5, 2)]:
        sm = eta_curve(UnduloidParams(n, 1.0, 0.01), b)
        assert abs(sm.eta_bar - 1.0) < 1e-3


@pytest.mark.parametrize("n,b,s", [
    (2, 0, 0.1), (2, 1, 0.3), (3, 0, 0.6), (3, 1, 0.1), (3, 2, 0.3),
    (4, 0, 0.3), (4, 1, 0.6), (4, 2, 0.1),
])
def test_eta_curve_cross_checked_against_weighted_volume(n, b, s):
    # the identity behind the construction: the conserved integral of the
    # reconstructed profile inverts back to the same eta
    g = GridCalculus(256, 1.0)
    prof = profile(UnduloidParams(n, 1.0, s), 256)
    w = WeightModel.mixed_volume(b, n)
    qbar = g.mean_circle(q_density(prof, w, g))
    eta_grid = qtilde_inv(qbar, w, n, eta_hint=(n - 1) / float(np.mean(prof.values)))
    eta_quad = eta_curve(UnduloidParams(n, 1.0, s), b).eta
    assert eta_quad == pytest.approx(eta_grid, rel=1e-6)


def test_eta_curve_is_even_in_s():
    # fitted linear coefficient below 1e-3 of the quadratic one
    from curvlab.unduloid import flatness_fit

    for n in (2, 5):
        c1, c2 = flatness_fit(n, 0)
        assert abs(c1) < 1e-3 * abs(c2)


def test_eta_curve_validates_b():
    with pytest.raises(DomainError):
        eta_curve(UnduloidParams(3, 1.0, 0.2), 3)


# --- turning points ----------------------------------------------------------

def test_turning_point_census_n8():
    pts = turning_points(8, 0, np.linspace(0.02, 0.95, 200))
    assert len(pts) == 2
    kinds = [k for _, k in pts]
    assert kinds == ["min", "max"]


def test_turning_points_validation():
    with pytest.raises(DomainError):
        turning_points(8, 0, np.linspace(0.02, 0.95, 50))
    with pytest.raises(DomainError):
        turning_points(8, 0, np.linspace(-0.1, 0.95, 200))


def test_default_s_grid_shape():
    grid = default_s_grid(200)
    assert grid.size == 200
    assert grid[0] == pytest.approx(0.01)
    assert grid[-1] == pytest.approx(0.97)
    # log-spaced near zero: early spacing much finer than late
    assert (grid[1] - grid[0]) < 0.2 * (grid[-1] - grid[-2])


def test_params_validation():
    with pytest.raises(DomainError):
        UnduloidParams(1, 1.0, 0.5)
    with pytest.raises(DomainError):
        UnduloidParams(2, 1.0, 0.0)
    with pytest.raises(DomainError):
        UnduloidParams(2, 1.0, 1.0)
    with pytest.raises(DomainError):
        UnduloidParams(2, -1.0, 0.5)
