"""Constraint reduction of the weighted-volume-preserving flow.

The conserved quantity splits a profile u into its mean-zero part
ubar = P0[u] and the scalar parameter eta with Qtilde(eta) equal to the
circle average of Q(u).  The map psi reconstructs u from (ubar, eta) by a
constant offset, since the mean-zero part pins everything but the average.
This module provides Qtilde and its inverse, the psi solve, and the full
and reduced evolution right-hand sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DegeneracyError, DomainError, RangeError
from .geometry import (
    RadialProfile,
    WeightModel,
    _q_density_core,
    _xi_arrays,
    binom,
    project_meanzero,
)
from .grid import GridCalculus
from .speeds import SpeedModel


@dataclass
class ReducedState:
    """Mean-zero even perturbation plus the conserved-volume parameter."""

    ubar: np.ndarray
    eta: float

    def __post_init__(self):
        self.ubar = np.asarray(self.ubar, dtype=float)
        if self.eta <= 0:
            raise DomainError(f"eta must be positive, got {self.eta}")


def qtilde(eta: float, w: WeightModel, n: int) -> float:
    """Qtilde(eta) = Q((n-1)/eta) = sum_a c_a (n-1)^{n-a} C(n,a) eta^{a-n}."""
    if eta <= 0:
        raise DomainError(f"eta must be positive, got {eta}")
    total = 0.0
    for a, c in enumerate(w.coeffs):
        if a > n:
            break
        if c != 0.0:
            total += c * (n - 1) ** (n - a) * binom(n, a) * eta ** (a - n)
    return total


def qtilde_prime(eta: float, w: WeightModel, n: int) -> float:
    """d/d eta of Qtilde; equals -(n (n-1)^n / eta^{n+1}) Xi(kappa_{(n-1)/eta})."""
    total = 0.0
    for a, c in enumerate(w.coeffs):
        if a > n or c == 0.0 or a == n:
            continue
        total += c * (n - 1) ** (n - a) * binom(n, a) * (a - n) * eta ** (a - n - 1)
    return total


def qtilde_inv(x: float, w: WeightModel, n: int, bracket=None,
               eta_hint: float | None = None) -> float:
    """Invert Qtilde on a bracket where it is strictly monotone.

    When no bracket is given one is grown geometrically around eta_hint
    (default [hint/10, 10*hint], widened up to 4 times).
    """
    if bracket is None:
        if eta_hint is None or eta_hint <= 0:
            raise DomainError("qtilde_inv needs a bracket or a positive eta_hint")
        lo, hi = eta_hint / 10.0, eta_hint * 10.0
        for _ in range(5):
            qlo, qhi = qtilde(lo, w, n), qtilde(hi, w, n)
            if min(qlo, qhi) <= x <= max(qlo, qhi):
                break
            lo, hi = lo / 10.0, hi * 10.0
        else:
            raise RangeError(
                f"target {x} not bracketed by Qtilde on [{lo}, {hi}]"
            )
        bracket = (lo, hi)
    lo, hi = bracket
    if not 0 < lo < hi:
        raise DomainError(f"invalid bracket {bracket}")
    probes = np.geomspace(lo, hi, 9)
    slopes = np.sign([qtilde_prime(e, w, n) for e in probes])
    nz = slopes[slopes != 0]
    if nz.size and not (np.all(nz > 0) or np.all(nz < 0)):
        raise DomainError(f"Qtilde is not monotone on [{lo}, {hi}]")
    qlo, qhi = qtilde(lo, w, n), qtilde(hi, w, n)
    if not min(qlo, qhi) <= x <= max(qlo, qhi):
        raise RangeError(
            f"target {x} outside Qtilde range [{min(qlo, qhi)}, {max(qlo, qhi)}] "
            f"on bracket [{lo}, {hi}]"
        )
    eta = brentq(lambda e: qtilde(e, w, n) - x, lo, hi, xtol=1e-300, rtol=8.9e-16)
    # polish with one Newton step; brentq already leaves ~1 ulp
    dq = qtilde_prime(eta, w, n)
    if dq != 0.0:
        eta -= (qtilde(eta, w, n) - x) / dq
    resid = abs(qtilde(eta, w, n) - x)
    if resid > 1e-12 * max(1.0, abs(x)):
        raise ConvergenceError(
            "qtilde_inv residual above tolerance", residual=resid, eta=eta
        )
    return float(eta)


def _q_mean_and_slope(ubar: np.ndarray, c: float, n: int, w: WeightModel,
                      g: GridCalculus):
    """Circle mean of Q(ubar + c) and its derivative in c."""
    u = ubar + c
    up, upp = g.derivs(u)
    qmean = g.mean_circle(_q_density_core(u, up, upp, n, w.coeffs))
    # d/dc of the mean is n * mean(Xi(kappa_u) u^{n-1}) by the Q identity
    fac = np.sqrt(1.0 + up * up)
    k1 = 1.0 / (u * fac)
    kn = -upp / fac**3
    xi = _xi_arrays(w, k1, kn, n)
    slope = n * g.mean_circle(xi * u ** (n - 1))
    return qmean, slope, xi


def psi_solve(s: ReducedState, w: WeightModel, g: GridCalculus, n: int,
              c_init: float | None = None, tol: float = 1e-12) -> RadialProfile:
    """Reconstruct the profile u = ubar + c* with circle-mean Q equal to
    Qtilde(eta): a safeguarded scalar Newton iteration on the offset c.

    The correction is a constant because the mean-zero part of u is pinned
    to ubar.  Raises ConvergenceError when the weight degenerates along
    the Newton path.
    """
    target = qtilde(s.eta, w, n)
    mean_bar = g.mean_circle(s.ubar)
    c = c_init if c_init is not None else (n - 1) / s.eta - mean_bar
    floor = -np.min(s.ubar)  # positivity of ubar + c requires c > floor
    if c <= floor:
        c = floor + 0.1 * max(1.0, abs(floor))
    lo, hi = None, None  # bisection safeguard brackets
    value = None
    for _ in range(80):
        qmean, slope, xi = _q_mean_and_slope(s.ubar, c, n, w, g)
        value = qmean - target
        if abs(value) <= tol * max(1.0, abs(target)):
            profile = RadialProfile(n, g.d, s.ubar + c)
            if np.any(xi <= 0):
                raise ConvergenceError(
                    "weight density not positive at the reconstructed profile",
                    c=c, eta=s.eta,
                )
            return profile
        if value > 0:
            hi = c if hi is None else min(hi, c)
        else:
            lo = c if lo is None else max(lo, c)
        if slope == 0.0:
            raise ConvergenceError(
                "degenerate weight: zero slope in the psi solve", c=c, eta=s.eta
            )
        step = -value / slope
        c_new = c + step
        if c_new <= floor or (lo is not None and hi is not None
                              and not lo < c_new < hi):
            if lo is not None and hi is not None:
                c_new = 0.5 * (lo + hi)
            else:
                c_new = 0.5 * (c + max(c + step, floor + 1e-12 * max(1.0, abs(floor))))
        c = c_new
    raise ConvergenceError(
        "psi solve did not converge", eta=s.eta, last_offset=c, residual=value
    )


def full_rhs(p: RadialProfile, speed: SpeedModel, w: WeightModel,
             g: GridCalculus) -> np.ndarray:
    """Right-hand side of the weighted-volume-preserving flow on the circle:
    sqrt(1+u'^2) * (weighted average of F minus F) pointwise.
    """
    n = p.n_dim
    u = p.values
    up, upp = g.derivs(u)
    slope = np.sqrt(1.0 + up * up)
    kappa1 = 1.0 / (u * slope)
    kappan = -upp / slope**3
    f_vals = speed.value(kappa1, kappan)
    xi = _xi_arrays(w, kappa1, kappan, n)
    dmu = u ** (n - 1) * slope
    denom = g.integrate_slab(xi * dmu)
    if denom <= 0 or not np.isfinite(denom):
        raise DegeneracyError(
            f"Xi-weighted area is not positive ({denom}); outside the "
            "validity region of the flow"
        )
    avg = g.integrate_slab(f_vals * xi * dmu) / denom
    return slope * (avg - f_vals)


def reduced_rhs(s: ReducedState, speed: SpeedModel, w: WeightModel,
                g: GridCalculus, n: int, c_init: float | None = None) -> np.ndarray:
    """Right-hand side of the reduced flow: P0[G(psi(ubar, eta))]."""
    profile = psi_solve(s, w, g, n, c_init=c_init)
    return project_meanzero(full_rhs(profile, speed, w, g), g)
