"""Speed functions F(kappa) restricted to axisymmetric arguments.

A speed model evaluates F and its first partials at points
(kappa1, ..., kappa1, kappan), and supplies the cylinder-path data used by
the stability analysis: with eta = (n-1)/R,

    F1(eta), Fn(eta)   -- dF/dkappa_1, dF/dkappa_n at kappa_{(n-1)/eta}
    F1p, Fnp, F1pp, Fnpp -- their eta-derivatives
    Fnn(eta), Fnnp(eta), Fnnn(eta) -- pure kappa_n derivatives of order 2, 3

Built-in presets carry analytic derivatives; arbitrary callables fall back
to Richardson-extrapolated finite differences of the same quantities.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import binom

_ETA_FIELDS = ("F1", "Fn", "F1p", "Fnp", "F1pp", "Fnpp", "Fnn", "Fnnp", "Fnnn")


@dataclass(frozen=True)
class EtaProfile:
    """Speed data along the cylinder path kappa = kappa_{(n-1)/eta}."""

    F1: float
    Fn: float
    F1p: float
    Fnp: float
    F1pp: float
    Fnpp: float
    Fnn: float
    Fnnp: float
    Fnnn: float

    def as_dict(self):
        return {k: getattr(self, k) for k in _ETA_FIELDS}


class SpeedModel:
    """Base class; subclasses implement value / d_kappa1 / d_kappan and
    eta_profile.  ``homogeneity_degree`` is None for non-homogeneous speeds;
    ``eta_range`` is the interval of valid cylinder parameters (None means
    all of (0, inf)).
    """

    name = "speed"
    homogeneity_degree = None
    eta_range = None

    def __init__(self, n_dim: int):
        if n_dim < 2:
            raise DomainError(f"speed needs ambient dimension >= 2, got {n_dim}")
        self.n_dim = int(n_dim)

    def value(self, kappa1, kappan):
        raise NotImplementedError

    def d_kappa1(self, kappa1, kappan):
        raise NotImplementedError

    def d_kappan(self, kappa1, kappan):
        raise NotImplementedError

    def eta_profile(self, eta: float) -> EtaProfile:
        raise NotImplementedError

    def supports_flow(self) -> bool:
        """Whether pointwise evaluation at general curvatures is available."""
        return True


class MeanCurvatureSpeed(SpeedModel):
    """F = sum of principal curvatures; homogeneous of degree 1."""

    name = "mean-curvature"
    homogeneity_degree = 1.0

    def value(self, kappa1, kappan):
        return (self.n_dim - 1) * kappa1 + kappan

    def d_kappa1(self, kappa1, kappan):
        return np.ones_like(np.asarray(kappa1, dtype=float))

    def d_kappan(self, kappa1, kappan):
        return np.ones_like(np.asarray(kappa1, dtype=float))

    def eta_profile(self, eta):
        return EtaProfile(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class ElementarySpeed(SpeedModel):
    """F = E_r(kappa); homogeneous of degree r, valid for 1 <= r <= n-1."""

    def __init__(self, n_dim: int, r: int):
        super().__init__(n_dim)
        if not 1 <= r <= n_dim - 1:
            raise DomainError(
                f"elementary speed needs 1 <= r <= n-1, got r={r}, n={n_dim}"
            )
        self.r = int(r)
        self.name = f"elementary:{r}"
        self.homogeneity_degree = float(r)

    def value(self, kappa1, kappan):
        n, r = self.n_dim, self.r
        out = binom(n - 1, r) * kappa1**r
        if binom(n - 1, r - 1):
            out = out + binom(n - 1, r - 1) * kappa1 ** (r - 1) * kappan
        return out

    def d_kappa1(self, kappa1, kappan):
        # E_{r-1} of the remaining slots: n-2 copies of kappa1 and kappan
        n, r = self.n_dim, self.r
        out = binom(n - 2, r - 1) * kappa1 ** (r - 1)
        if binom(n - 2, r - 2):
            out = out + binom(n - 2, r - 2) * kappa1 ** (r - 2) * kappan
        return out

    def d_kappan(self, kappa1, kappan):
        n, r = self.n_dim, self.r
        return binom(n - 1, r - 1) * kappa1 ** (r - 1) + 0.0 * kappan

    def eta_profile(self, eta):
        n, r = self.n_dim, self.r
        x = eta / (n - 1)
        f1 = binom(n - 2, r - 1) * x ** (r - 1)
        fn = binom(n - 1, r - 1) * x ** (r - 1)
        scale = (r - 1) / (n - 1)
        f1p = binom(n - 2, r - 1) * scale * x ** (r - 2) if r >= 2 else 0.0
        fnp = binom(n - 1, r - 1) * scale * x ** (r - 2) if r >= 2 else 0.0
        scale2 = (r - 1) * (r - 2) / (n - 1) ** 2
        f1pp = binom(n - 2, r - 1) * scale2 * x ** (r - 3) if r >= 3 else 0.0
        fnpp = binom(n - 1, r - 1) * scale2 * x ** (r - 3) if r >= 3 else 0.0
        # E_r is multilinear: all pure kappa_n derivatives beyond first vanish
        return EtaProfile(f1, fn, f1p, fnp, f1pp, fnpp, 0.0, 0.0, 0.0)


class MeanCurvaturePowerSpeed(SpeedModel):
    """F = (sum kappa_a)^k for k > 0; homogeneous of degree k.

    Requires positive mean curvature for non-integer k.
    """

    def __init__(self, n_dim: int, k: float):
        super().__init__(n_dim)
        if k <= 0:
            raise DomainError(f"power speed needs k > 0, got {k}")
        self.k = float(k)
        self.name = f"mean-curvature-pow:{k:g}"
        self.homogeneity_degree = float(k)

    def _h(self, kappa1, kappan):
        return (self.n_dim - 1) * kappa1 + kappan

    def value(self, kappa1, kappan):
        return self._h(kappa1, kappan) ** self.k

    def d_kappa1(self, kappa1, kappan):
        return self.k * self._h(kappa1, kappan) ** (self.k - 1)

    def d_kappan(self, kappa1, kappan):
        return self.k * self._h(kappa1, kappan) ** (self.k - 1)

    def eta_profile(self, eta):
        # on the cylinder path the mean curvature equals eta
        k = self.k
        f1 = k * eta ** (k - 1)
        f1p = k * (k - 1) * eta ** (k - 2)
        f1pp = k * (k - 1) * (k - 2) * eta ** (k - 3)
        fnn = k * (k - 1) * eta ** (k - 2)
        fnnp = k * (k - 1) * (k - 2) * eta ** (k - 3)
        fnnn = k * (k - 1) * (k - 2) * eta ** (k - 3)
        return EtaProfile(f1, f1, f1p, f1p, f1pp, f1pp, fnn, fnnp, fnnn)


class RemarkPolynomialSpeed(SpeedModel):
    """Non-homogeneous n=4 speed E_4 + c2 * sum kappa^2 + c3 * sum kappa^3.

    With c2 = pi^2/(12 d^2), c3 = pi^2/(18 d^2) the critical radius is 1
    for every d; raising c2 to pi^2/(6 d^2) destroys the sign change and
    no critical radius exists.
    """

    def __init__(self, c2: float, c3: float, name: str):
        super().__init__(4)
        self.c2 = float(c2)
        self.c3 = float(c3)
        self.name = name

    def value(self, kappa1, kappan):
        p2 = 3 * kappa1**2 + kappan**2
        p3 = 3 * kappa1**3 + kappan**3
        return kappa1**3 * kappan + self.c2 * p2 + self.c3 * p3

    def d_kappa1(self, kappa1, kappan):
        return kappa1**2 * kappan + 2 * self.c2 * kappa1 + 3 * self.c3 * kappa1**2

    def d_kappan(self, kappa1, kappan):
        return kappa1**3 + 2 * self.c2 * kappan + 3 * self.c3 * kappan**2

    def eta_profile(self, eta):
        c2, c3 = self.c2, self.c3
        x = eta / 3.0
        f1 = 2 * c2 * x + 3 * c3 * x**2
        fn = x**3
        f1p = (2 * c2 + 6 * c3 * x) / 3.0
        fnp = x**2
        f1pp = 2 * c3 / 3.0
        fnpp = 2 * x / 3.0
        return EtaProfile(f1, fn, f1p, fnp, f1pp, fnpp, 2 * c2, 0.0, 6 * c3)


def remark_example(which: int, d: float) -> RemarkPolynomialSpeed:
    """The two n=4 example speeds; ``which`` is 1 or 2."""
    if which == 1:
        return RemarkPolynomialSpeed(
            np.pi**2 / (12 * d * d), np.pi**2 / (18 * d * d), "remark-example-1"
        )
    if which == 2:
        return RemarkPolynomialSpeed(
            np.pi**2 / (6 * d * d), np.pi**2 / (18 * d * d), "remark-example-2"
        )
    raise DomainError(f"remark example must be 1 or 2, got {which}")


class CallableSpeed(SpeedModel):
    """Wraps an arbitrary symmetric speed given as f(kappa1, kappan, n).

    eta_profile is built by Richardson-extrapolated central differences of
    the supplied partials (or of f itself when partials are missing).
    """

    def __init__(self, n_dim, func, d1=None, dn=None, name="custom",
                 homogeneity_degree=None):
        super().__init__(n_dim)
        self._f = func
        self._d1 = d1
        self._dn = dn
        self.name = name
        self.homogeneity_degree = homogeneity_degree

    def value(self, kappa1, kappan):
        return self._f(kappa1, kappan, self.n_dim)

    def _fd(self, f, x, h):
        # 4th-order Richardson of the central difference
        c1 = (f(x + h) - f(x - h)) / (2 * h)
        c2 = (f(x + h / 2) - f(x - h / 2)) / h
        return (4 * c2 - c1) / 3.0

    def d_kappa1(self, kappa1, kappan):
        if self._d1 is not None:
            return self._d1(kappa1, kappan, self.n_dim)
        # perturbing the shared axisymmetric argument moves all n-1 equal
        # slots at once; divide out their multiplicity
        h = 1e-5 * max(1.0, abs(kappa1))
        fd = self._fd(lambda t: self._f(t, kappan, self.n_dim), kappa1, h)
        return fd / (self.n_dim - 1)

    def d_kappan(self, kappa1, kappan):
        if self._dn is not None:
            return self._dn(kappa1, kappan, self.n_dim)
        h = 1e-5 * max(1.0, abs(kappan), abs(kappa1))
        return self._fd(lambda t: self._f(kappa1, t, self.n_dim), kappan, h)

    def eta_profile(self, eta):
        n = self.n_dim
        x0 = eta / (n - 1)

        def f1_of(eta_):
            return float(self.d_kappa1(eta_ / (n - 1), 0.0))

        def fn_of(eta_):
            return float(self.d_kappan(eta_ / (n - 1), 0.0))

        h = 1e-4 * max(1.0, abs(eta))
        f1 = f1_of(eta)
        fn = fn_of(eta)
        f1p = self._fd(f1_of, eta, h)
        fnp = self._fd(fn_of, eta, h)
        f1pp = (f1_of(eta + h) - 2 * f1 + f1_of(eta - h)) / h**2
        fnpp = (fn_of(eta + h) - 2 * fn + fn_of(eta - h)) / h**2

        hk = 1e-3 * max(1.0, abs(x0))

        def fval(kn):
            return float(self._f(x0, kn, n))

        fnn = (fval(hk) - 2 * fval(0.0) + fval(-hk)) / hk**2
        fnnn = (fval(2 * hk) - 2 * fval(hk) + 2 * fval(-hk) - fval(-2 * hk)) / (
            2 * hk**3
        )

        def fnn_of(eta_):
            x = eta_ / (n - 1)
            return (
                self._f(x, hk, n) - 2 * self._f(x, 0.0, n) + self._f(x, -hk, n)
            ) / hk**2

        fnnp = self._fd(fnn_of, eta, h)
        return EtaProfile(f1, fn, f1p, fnp, f1pp, fnpp, fnn, fnnp, fnnn)


class TabulatedSpeed(SpeedModel):
    """Speed known only along the cylinder path, from a table with columns
    eta, F1, Fn, F1p, Fnp, F1pp, Fnpp, Fnn, Fnnp, Fnnn.

    Interpolates each column with a cubic spline; usable by the stability
    analysis but not by the flow integrator.
    """

    def __init__(self, n_dim: int, etas, columns: dict, name="tabulated"):
        super().__init__(n_dim)
        from scipy.interpolate import CubicSpline

        etas = np.asarray(etas, dtype=float)
        if etas.size < 4 or np.any(np.diff(etas) <= 0):
            raise DomainError("tabulated speed needs >= 4 strictly increasing eta values")
        missing = [k for k in _ETA_FIELDS if k not in columns]
        if missing:
            raise DomainError(f"tabulated speed missing columns {missing}")
        self.eta_range = (float(etas[0]), float(etas[-1]))
        self._splines = {
            k: CubicSpline(etas, np.asarray(columns[k], dtype=float))
            for k in _ETA_FIELDS
        }
        self.name = name

    @classmethod
    def from_csv(cls, path, n_dim: int):
        rows = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append(row)
        if not rows:
            raise DomainError(f"empty speed table {path}")
        etas = [float(r["eta"]) for r in rows]
        cols = {k: [float(r[k]) for r in rows] for k in _ETA_FIELDS}
        return cls(n_dim, etas, cols, name=f"tabulated:{path}")

    def supports_flow(self):
        return False

    def value(self, kappa1, kappan):
        raise DomainError(
            "tabulated speeds only carry cylinder-path data; "
            "the flow integrator needs a preset or callable speed"
        )

    d_kappa1 = value
    d_kappan = value

    def eta_profile(self, eta):
        lo, hi = self.eta_range
        if not lo <= eta <= hi:
            raise DomainError(f"eta={eta} outside tabulated range [{lo}, {hi}]")
        vals = {k: float(s(eta)) for k, s in self._splines.items()}
        return EtaProfile(**vals)


def speed_from_name(name: str, n_dim: int, d: float) -> SpeedModel:
    """Resolve a preset name like "mean-curvature", "elementary:2",
    "mean-curvature-pow:1.5", "remark-example-1" or "tabulated:PATH"."""
    if name == "mean-curvature":
        return MeanCurvatureSpeed(n_dim)
    if name.startswith("elementary:"):
        return ElementarySpeed(n_dim, int(name.split(":", 1)[1]))
    if name.startswith("mean-curvature-pow:"):
        return MeanCurvaturePowerSpeed(n_dim, float(name.split(":", 1)[1]))
    if name == "remark-example-1":
        if n_dim != 4:
            raise DomainError("remark-example-1 is defined for n = 4")
        return remark_example(1, d)
    if name == "remark-example-2":
        if n_dim != 4:
            raise DomainError("remark-example-2 is defined for n = 4")
        return remark_example(2, d)
    if name.startswith("tabulated:"):
        return TabulatedSpeed.from_csv(name.split(":", 1)[1], n_dim)
    raise DomainError(f"unknown speed {name!r}")
