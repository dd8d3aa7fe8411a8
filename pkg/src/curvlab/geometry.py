"""Geometric primitives for axially symmetric hypersurfaces.

An axially symmetric graph over a cylinder in R^{n+1} is described by its
radial profile rho on [0, d].  Its principal curvatures are the rotational
curvature 1/(u sqrt(1+u'^2)) with multiplicity n-1 and the profile
curvature -u''/(1+u'^2)^{3/2}.  This module provides curvatures,
elementary symmetric functions, weight evaluation, the conserved density
Q, weighted volume, mixed volumes and the mean-zero projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .grid import GridCalculus


def binom(n: int, k: int) -> int:
    """Binomial coefficient with the out-of-range-zero convention."""
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit n-ball, pi^{n/2} / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def sphere_area(n_minus_1: int) -> float:
    """Surface area of the unit (n-1)-sphere in R^n."""
    n = n_minus_1 + 1
    return n * unit_ball_volume(n)


@dataclass(frozen=True)
class CurvaturePair:
    """Principal curvatures at an axisymmetric point: kappa1 with
    multiplicity n-1 and the profile curvature kappan."""

    kappa1: float
    kappan: float


@dataclass
class RadialProfile:
    """Samples of a positive profile rho on the uniform grid over [0, d].

    The even extension to the circle of circumference 2d is implicit: the
    endpoint derivatives vanish by construction, they are not stored.
    """

    n_dim: int
    d: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.n_dim < 2:
            raise DomainError(f"ambient dimension must be >= 2, got {self.n_dim}")
        if self.d <= 0:
            raise DomainError(f"slab width must be positive, got {self.d}")
        if self.values.ndim != 1 or self.values.size < 16:
            raise DomainError("profile needs a 1-d array of at least 16 samples")
        if not np.all(self.values > 0):
            raise DomainError("profile values must be strictly positive")

    @property
    def N(self) -> int:
        return self.values.size

    @classmethod
    def cylinder(cls, n_dim: int, d: float, radius: float, n_points: int):
        return cls(n_dim, d, np.full(n_points, float(radius)))


@dataclass(frozen=True)
class WeightModel:
    """Weight function Xi = sum_a c_a E_a given by its coefficient vector."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not any(c != 0.0 for c in self.coeffs):
            raise DomainError("weight coefficients must not all vanish")

    @classmethod
    def mixed_volume(cls, b: int, n: int) -> "WeightModel":
        """Preset c_a = delta_{ab}; b = n is excluded (the weight would
        vanish on every cylinder)."""
        if not 0 <= b <= n - 1:
            raise DomainError(f"mixed-volume weight needs 0 <= b <= n-1, got b={b}, n={n}")
        c = [0.0] * (n + 1)
        c[b] = 1.0
        return cls(tuple(c))

    @classmethod
    def vpmcf(cls, n: int) -> "WeightModel":
        return cls.mixed_volume(0, n)

    def xi_cylinder(self, radius: float, n: int) -> float:
        """Xi(kappa_R) = sum_a c_a C(n-1,a) R^{-a}."""
        return sum(
            c * binom(n - 1, a) * radius ** (-a)
            for a, c in enumerate(self.coeffs)
            if c != 0.0
        )

    def label(self) -> str:
        nz = [a for a, c in enumerate(self.coeffs) if c != 0.0]
        if len(nz) == 1 and self.coeffs[nz[0]] == 1.0:
            return f"mixed-volume:{nz[0]}"
        return "coeffs:" + ",".join(f"{c:g}" for c in self.coeffs)


def _derivatives(p: RadialProfile, g: GridCalculus):
    if not g.compatible_with(p.values):
        raise DomainError(
            f"grid has {g.n_points} points but profile has {p.N}"
        )
    if abs(g.d - p.d) > 1e-14 * max(1.0, p.d):
        raise DomainError("grid and profile slab widths differ")
    return g.derivs(p.values)


def principal_curvatures_arrays(p: RadialProfile, g: GridCalculus):
    """Pointwise (kappa1, kappan) as arrays; the vectorised workhorse."""
    if not np.all(p.values > 0):
        raise DomainError("profile must stay strictly positive")
    up, upp = _derivatives(p, g)
    slope = np.sqrt(1.0 + up * up)
    kappa1 = 1.0 / (p.values * slope)
    kappan = -upp / slope**3
    return kappa1, kappan


def principal_curvatures(p: RadialProfile, g: GridCalculus):
    """Pointwise principal curvatures as a list of CurvaturePair."""
    k1, kn = principal_curvatures_arrays(p, g)
    return [CurvaturePair(a, b) for a, b in zip(k1, kn)]


def elementary_symmetric(a: int, c: CurvaturePair, n: int) -> float:
    """E_a at the axisymmetric argument (kappa1 repeated n-1 times, kappan).

    E_a = C(n-1,a) kappa1^a + C(n-1,a-1) kappa1^{a-1} kappan, with the
    out-of-range binomials equal to zero.
    """
    if not 0 <= a <= n:
        raise DomainError(f"elementary symmetric index must be in [0, {n}], got {a}")
    return _esym(a, c.kappa1, c.kappan, n)


def _esym(a: int, kappa1, kappan, n: int):
    """Vectorised E_a; kappa1/kappan may be scalars or arrays."""
    first = binom(n - 1, a)
    second = binom(n - 1, a - 1)
    total = first * kappa1**a if first else 0.0 * kappa1
    if second:
        total = total + second * kappa1 ** (a - 1) * kappan
    return total


def weight_eval(w: WeightModel, c: CurvaturePair, n: int) -> float:
    """Xi(kappa) = sum_a c_a E_a(kappa) at an axisymmetric argument."""
    return float(sum(
        ca * _esym(a, c.kappa1, c.kappan, n)
        for a, ca in enumerate(w.coeffs)
        if ca != 0.0
    ))


def _xi_arrays(w: WeightModel, kappa1, kappan, n: int):
    total = np.zeros_like(kappa1)
    for a, ca in enumerate(w.coeffs):
        if ca != 0.0:
            total = total + ca * _esym(a, kappa1, kappan, n)
    return total


def _q_density_core(u, up, upp, n: int, coeffs) -> np.ndarray:
    """Q(u) from precomputed derivative arrays."""
    slope = np.sqrt(1.0 + up * up)
    kappa1 = 1.0 / (u * slope)
    kappan = -upp / slope**3
    out = np.zeros_like(u)
    if len(coeffs) > 0 and coeffs[0] != 0.0:
        out = out + coeffs[0] * u**n
    acc = np.zeros_like(u)
    for a in range(1, min(len(coeffs), n + 1)):
        if coeffs[a] != 0.0:
            acc = acc + (n * coeffs[a] / a) * _esym(a - 1, kappa1, kappan, n)
    out = out + acc * u ** (n - 1) * slope
    return out


def q_density(p: RadialProfile, w: WeightModel, g: GridCalculus) -> np.ndarray:
    """Pointwise conserved density
    Q(u) = c0 u^n + (sum_{a>=1} (n c_a / a) E_{a-1}(kappa)) u^{n-1} sqrt(1+u'^2).
    Integrated over the even circle it gives the weighted volume.
    """
    up, upp = _derivatives(p, g)
    return _q_density_core(p.values, up, upp, p.n_dim, w.coeffs)


def weighted_volume(p: RadialProfile, w: WeightModel, g: GridCalculus) -> float:
    """WVol(u): circle integral of Q(u) (twice the slab integral)."""
    return g.integrate_circle(q_density(p, w, g))


def area_measure(p: RadialProfile, g: GridCalculus) -> np.ndarray:
    """Density of the surface measure per unit z, without the factor
    |S^{n-1}|: u^{n-1} sqrt(1+u'^2)."""
    up, _ = _derivatives(p, g)
    return p.values ** (p.n_dim - 1) * np.sqrt(1.0 + up * up)


def mixed_volume(b: int, p: RadialProfile, g: GridCalculus) -> float:
    """Mixed volume V_b of the hypersurface.

    For b <= n this is the curvature integral
    V_b = (1/((n+1) C(n, n-b))) * integral of E_{n-b}(kappa) over the full
    hypersurface (slab integral times the unit-sphere area n*omega_n);
    V_{n+1} is the enclosed volume omega_n * integral of rho^n.
    """
    n = p.n_dim
    if not 1 <= b <= n + 1:
        raise DomainError(f"mixed volume index must be in [1, {n + 1}], got {b}")
    omega = unit_ball_volume(n)
    if b == n + 1:
        return omega * g.integrate_slab(p.values**n)
    kappa1, kappan = principal_curvatures_arrays(p, g)
    dmu = area_measure(p, g)
    integrand = _esym(n - b, kappa1, kappan, n) * dmu
    surface_integral = n * omega * g.integrate_slab(integrand)
    return surface_integral / ((n + 1) * binom(n, n - b))


def project_meanzero(v: np.ndarray, g: GridCalculus) -> np.ndarray:
    """P0[v] = v minus its circle average; idempotent and linear."""
    return v - g.mean_circle(v)
