"""Geometric construction of the bifurcating stationary family.

Axially symmetric constant-mean-curvature profiles meeting both slab
walls orthogonally are parametrised by the neck-bulge asymmetry
s = (rho(d) - rho(0)) / (rho(d) + rho(0)) in (0, 1).  Everything reduces
to singular quadratures of

    g_s(x) = 1 / sqrt(ratio(x)^2 - 1),   1 < x < (1+s)/(1-s),

with inverse-square-root blowup at both endpoints.  The key numerical
point: ratio^2 - 1 vanishes linearly at both ends, so it is evaluated in
deflated form with the roots factored out exactly, which keeps g_s fully
accurate arbitrarily close to the singularities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .geometry import RadialProfile
from .quadrature import tanh_sinh


@dataclass(frozen=True)
class UnduloidParams:
    n_dim: int
    d: float
    s: float

    def __post_init__(self):
        if self.n_dim < 2:
            raise DomainError(f"dimension must be >= 2, got {self.n_dim}")
        if self.d <= 0:
            raise DomainError(f"slab width must be positive, got {self.d}")
        if not 0.0 < self.s < 1.0:
            raise DomainError(f"asymmetry must lie in (0, 1), got {self.s}")


@dataclass
class BifurcationSample:
    """One point of the stationary family."""

    s: float
    eta: float
    eta_bar: float
    rho0: float
    H: float
    quadrature_error_estimate: float


class UnduloidShape:
    """Cached algebra of g_s for one (n, s) pair.

    With alpha = (1+s)^n - (1-s)^n, beta = (1+s)^{n-1} - (1-s)^{n-1} and
    X = (1+s)/(1-s), the ratio inside g_s is num/den with
    num = alpha x^{n-1} and den = 2s(1+s)^{n-1} + beta (1-s) x^n.
    num - den vanishes at x = 1 and x = X; deflating those roots exactly
    gives

        ratio^2 - 1 = (x-1)(X-x) * T(x) * (num+den) / den^2,

    where T has the closed-form coefficients
    t_k = (1-s)(1+s)^{n-1} - (1-s)^n X^k on x^{n-2-k}, all positive, so
    the evaluation is cancellation-free on the whole interval.
    """

    def __init__(self, n: int, s: float):
        if n < 2:
            raise DomainError(f"dimension must be >= 2, got {n}")
        if not 0.0 < s < 1.0:
            raise DomainError(f"asymmetry must lie in (0, 1), got {s}")
        self.n = int(n)
        self.s = float(s)
        self.alpha = (1 + s) ** n - (1 - s) ** n
        self.beta = (1 + s) ** (n - 1) - (1 - s) ** (n - 1)
        self.X = (1 + s) / (1 - s)
        self.den_const = 2 * s * (1 + s) ** (n - 1)
        self.den_lead = self.beta * (1 - s)
        self.t_coeffs = np.array([
            (1 - s) * (1 + s) ** (n - 1) - (1 - s) ** n * self.X**k
            for k in range(n - 1)
        ])

    def _den(self, x):
        return self.den_const + self.den_lead * x**self.n

    def _num(self, x):
        return self.alpha * x ** (self.n - 1)

    def _t(self, x):
        return np.polyval(self.t_coeffs, x)

    def g(self, x, dl=None, dr=None):
        """g_s(x); dl = x - 1 and dr = X - x may be passed in
        endpoint-exact form (as the quadrature does)."""
        if dl is None:
            dl = x - 1.0
        if dr is None:
            dr = self.X - x
        den = self._den(x)
        rad = dl * dr * self._t(x) * (self._num(x) + den)
        return den / np.sqrt(rad)

    def g_and_log_deriv(self, x, dl=None, dr=None):
        """(g, g'/g): the logarithmic derivative of the deflated product
        form, exact up to rounding even near the endpoints."""
        if dl is None:
            dl = x - 1.0
        if dr is None:
            dr = self.X - x
        den = self._den(x)
        num = self._num(x)
        t = self._t(x)
        tp = np.polyval(np.polyder(self.t_coeffs), x)
        den_p = self.n * self.den_lead * x ** (self.n - 1)
        num_p = (self.n - 1) * self.alpha * x ** (self.n - 2)
        g = den / np.sqrt(dl * dr * t * (num + den))
        logd = den_p / den - 0.5 * (
            1.0 / dl - 1.0 / dr + tp / t + (num_p + den_p) / (num + den)
        )
        return g, logd

    def ratio(self, x):
        return self._num(x) / self._den(x)


def g_s(x: float, p: UnduloidParams) -> float:
    """Value of the profile integrand at a single interior point."""
    shape = UnduloidShape(p.n_dim, p.s)
    if not 1.0 < x < shape.X:
        raise DomainError(
            f"argument must lie strictly inside (1, {shape.X}), got {x}"
        )
    return float(shape.g(np.asarray(x, dtype=float)))


def _profile_integral(shape: UnduloidShape, rel_tol=1e-12):
    return tanh_sinh(lambda x, dl, dr: shape.g(x, dl, dr), 1.0, shape.X,
                     rel_tol=rel_tol)


def rho0(p: UnduloidParams, rel_tol: float = 1e-11):
    """Neck radius: d divided by the full singular integral of g_s.

    Returns (value, error_estimate)."""
    shape = UnduloidShape(p.n_dim, p.s)
    quad = _profile_integral(shape, rel_tol=rel_tol)
    value = p.d / quad.value
    return value, value * quad.error / quad.value


def mean_curvature(p: UnduloidParams) -> float:
    """Closed-form mean curvature of the profile."""
    s, n = p.s, p.n_dim
    r0, _ = rho0(p)
    pref = ((1 + s) ** (n - 1) - (1 - s) ** (n - 1)) / ((1 + s) ** n - (1 - s) ** n)
    return pref * n * (1 - s) / r0


def critical_radius_cmc(n: int, d: float) -> float:
    """Radius of the critical cylinder for the mean-curvature speed."""
    return d * np.sqrt(n - 1) / np.pi


def eta_curve(p: UnduloidParams, b: int, rel_tol: float = 1e-11) -> BifurcationSample:
    """One sample of the bifurcation curve eta(s) for the (n+1-b)-th
    mixed-volume preserving mean curvature flow (b = 0 is the
    volume-preserving case).

    eta_bar is eta normalised by the critical value pi sqrt(n-1)/d.
    """
    n, d, s = p.n_dim, p.d, p.s
    if not 0 <= b <= n - 1:
        raise DomainError(f"weight index must satisfy 0 <= b <= n-1, got {b}")
    shape = UnduloidShape(n, s)
    qg = _profile_integral(shape, rel_tol=rel_tol)

    if b == 0:
        def integrand(x, dl, dr):
            return x**n * shape.g(x, dl, dr)
    else:
        def integrand(x, dl, dr):
            g, logd = shape.g_and_log_deriv(x, dl, dr)
            core = 1.0 + 1.0 / (g * g)
            first = x ** (n - b) * g / core ** ((b - 2) / 2.0)
            # g'/g^2 = logd / g stays finite at the endpoints where g blows up
            second = (
                (b - 1) * x ** (n + 1 - b) * (logd / g)
                / ((n + 1 - b) * core ** (b / 2.0))
            )
            return first + second

    qd = tanh_sinh(integrand, 1.0, shape.X, rel_tol=rel_tol)
    eta = ((n - 1) / d) * (qg.value ** (n + 1 - b) / qd.value) ** (1.0 / (n - b))
    eta0 = np.pi * np.sqrt(n - 1) / d
    rel_err = (
        abs(qd.error / qd.value) + (n + 1 - b) * abs(qg.error / qg.value)
    ) / (n - b)
    r0 = d / qg.value
    pref = ((1 + s) ** (n - 1) - (1 - s) ** (n - 1)) / ((1 + s) ** n - (1 - s) ** n)
    return BifurcationSample(
        s=s,
        eta=eta,
        eta_bar=eta / eta0,
        rho0=r0,
        H=pref * n * (1 - s) / r0,
        quadrature_error_estimate=eta * rel_err,
    )


def _invert_profile_map(shape: UnduloidShape, r0: float, half_width: float,
                        z_targets: np.ndarray, rel_tol: float) -> np.ndarray:
    """Solve z(x) = rho0 * int_1^x g_s = z_j for each target by bracketed
    root-finding on the cumulative singular quadrature."""

    def z_of(x):
        if x <= 1.0:
            return 0.0
        if x >= shape.X:
            return half_width
        gap = shape.X - x
        # the quadrature's dr is the distance to x; g needs distance to X
        q = tanh_sinh(lambda t, dl, dr: shape.g(t, dl, gap + dr), 1.0, x,
                      rel_tol=rel_tol)
        return r0 * q.value

    order = np.argsort(z_targets)
    xs = np.empty_like(z_targets)
    lo = 1.0
    eps = 1e-15 * half_width
    prev_target = None
    prev_x = None
    for idx in order:
        target = z_targets[idx]
        if target <= eps:
            xs[idx] = 1.0
        elif target >= half_width - eps:
            xs[idx] = shape.X
        elif prev_target is not None and abs(target - prev_target) <= eps:
            xs[idx] = prev_x
        else:
            xs[idx] = brentq(lambda x: z_of(x) - target, lo, shape.X,
                             xtol=1e-14 * shape.X, rtol=8.9e-16)
            # the root may sit a hair past the true value; back the next
            # bracket off so repeated nearby targets stay enclosed
            lo = max(1.0, xs[idx] - 1e-12 * shape.X)
            prev_target, prev_x = target, xs[idx]
    return xs


def profile(p: UnduloidParams, n_points: int, rel_tol: float = 1e-12) -> RadialProfile:
    """Profile samples on the uniform grid over [0, d], by inverting the
    monotone map z(x) = rho0 * int_1^x g_s via bracketed root-finding on
    the cumulative singular quadrature."""
    n, d = p.n_dim, p.d
    shape = UnduloidShape(n, p.s)
    qg = _profile_integral(shape, rel_tol=rel_tol)
    r0 = d / qg.value
    zs = np.linspace(0.0, d, n_points)
    xs = _invert_profile_map(shape, r0, d, zs, rel_tol)
    return RadialProfile(n, d, r0 * xs)


def multi_period_profile(p: UnduloidParams, n_points: int, periods: int,
                         rel_tol: float = 1e-12) -> RadialProfile:
    """Profile with several half-periods by reflection concatenation:
    the half-period shape is built on a slab of width d/periods and
    reflected across its walls.  Exposed for experimentation; only the
    half-period family is validated."""
    if periods < 1:
        raise DomainError(f"periods must be >= 1, got {periods}")
    n, d = p.n_dim, p.d
    width = d / periods
    shape = UnduloidShape(n, p.s)
    qg = _profile_integral(shape, rel_tol=rel_tol)
    r0 = width / qg.value
    zs = np.linspace(0.0, d, n_points)
    cell = np.floor(zs / width).astype(int)
    local = zs - cell * width
    odd = cell % 2 == 1
    local[odd] = width - local[odd]
    xs = _invert_profile_map(shape, r0, width, local, rel_tol)
    return RadialProfile(n, d, r0 * xs)


def turning_points(n: int, b: int, s_grid) -> list:
    """Interior turning points of the normalised bifurcation curve.

    Sign changes of the centered-difference derivative of eta_bar on the
    grid, classified as "max" (rising to falling) or "min".  Returns a
    list of (s_location, kind).
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.size < 100:
        raise DomainError("turning-point census needs at least 100 samples")
    if np.any(s_grid <= 0) or np.any(s_grid >= 1) or np.any(np.diff(s_grid) <= 0):
        raise DomainError("s grid must be strictly increasing inside (0, 1)")
    vals = np.array([
        eta_curve(UnduloidParams(n, 1.0, s), b).eta_bar for s in s_grid
    ])
    deriv = np.gradient(vals, s_grid)
    points = []
    for i in range(1, len(s_grid) - 2):
        a, c = deriv[i], deriv[i + 1]
        if a == 0.0 or a * c >= 0:
            continue
        # linear interpolation of the derivative zero
        frac = a / (a - c)
        loc = s_grid[i] + frac * (s_grid[i + 1] - s_grid[i])
        points.append((float(loc), "max" if a > 0 else "min"))
    return points


def default_s_grid(n_samples: int = 200, lo: float = 0.01, hi: float = 0.97):
    """Log-spaced-near-zero sample grid on [lo, hi]."""
    return lo + (hi - lo) * (np.geomspace(1.0, 21.0, n_samples) - 1.0) / 20.0


def flatness_fit(n: int, b: int, d: float = 1.0,
                 s_points=None) -> tuple:
    """Linear and quadratic coefficients of the bifurcation curve at
    s = 0, from a least-squares fit of 1 + c1 s + c2 s^2 + c4 s^4.

    The quartic term must be in the model: the curve is even in s, and
    projecting its s^4 content onto a plain quadratic biases the linear
    coefficient far above the flatness scale.  Returns (c1, c2).
    """
    if s_points is None:
        s_points = np.linspace(0.005, 0.025, 9)
    s_points = np.asarray(s_points, dtype=float)
    vals = np.array([
        eta_curve(UnduloidParams(n, d, s), b).eta_bar for s in s_points
    ])
    design = np.vstack([np.ones_like(s_points), s_points, s_points**2,
                        s_points**4]).T
    coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
    return float(coef[1]), float(coef[2])
