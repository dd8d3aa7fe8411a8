"""Closed-form stability analysis at and near critical cylinders.

Linear spectrum of the reduced flow at a cylinder, critical-radius
search, the transversality (bifurcation) condition, the sign of the
curvature of the bifurcation curve eta(s) and of the critical eigenvalue
lambda(s) at s = 0, plus the homogeneous and mixed-volume specialisations
of the stability criterion (the latter in exact rational arithmetic).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import AmbiguityError, DegeneracyError, DomainError
from .geometry import WeightModel, binom, project_meanzero
from .grid import GridCalculus
from .reduction import ReducedState, reduced_rhs
from .speeds import SpeedModel


def linear_eigenvalue(m: int, eta: float, speed: SpeedModel, n: int,
                      d: float) -> float:
    """Eigenvalue of the reduced linearisation at the cylinder with
    parameter eta, on the mode cos(m pi z / d):

        lambda_m = -Fn(eta) (m pi / d)^2 + eta^2 F1(eta) / (n - 1).
    """
    prof = speed.eta_profile(eta)
    return -prof.Fn * (m * np.pi / d) ** 2 + eta**2 * prof.F1 / (n - 1)


def crossing_function(eta: float, speed: SpeedModel, n: int, d: float) -> float:
    """f(eta) = eta^2 F1(eta)/(n-1) - (pi/d)^2 Fn(eta); its sign change
    locates the critical radius and it equals lambda_1 identically."""
    return linear_eigenvalue(1, eta, speed, n, d)


def r_crit_find(speed: SpeedModel, n: int, d: float,
                bracket=(1e-2, 1e2), scan_points: int = 400):
    """Critical radius R_crit = (n-1)/eta* where lambda_1 changes sign.

    Returns None when f has no sign change in the bracket; raises
    AmbiguityError (listing all roots) when it has several.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise DomainError(f"invalid eta bracket {bracket}")
    etas = np.geomspace(lo, hi, scan_points)
    vals = np.array([crossing_function(e, speed, n, d) for e in etas])
    roots = []
    for i in range(len(etas) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(etas[i])
        elif a * b < 0:
            roots.append(
                brentq(lambda e: crossing_function(e, speed, n, d),
                       etas[i], etas[i + 1], xtol=1e-300, rtol=8.9e-16)
            )
    if vals[-1] == 0.0:
        roots.append(etas[-1])
    if not roots:
        return None
    if len(roots) > 1:
        raise AmbiguityError(
            f"{len(roots)} sign changes of the critical-eigenvalue function "
            f"in eta bracket {bracket}", candidates=roots,
        )
    eta_star = roots[0]
    scale = max(abs(eta_star**2 * speed.eta_profile(eta_star).F1 / (n - 1)),
                (np.pi / d) ** 2 * abs(speed.eta_profile(eta_star).Fn), 1.0)
    resid = abs(crossing_function(eta_star, speed, n, d))
    if resid > 1e-12 * scale:
        raise DegeneracyError(
            f"critical-eta root residual {resid:g} above tolerance"
        )
    return (n - 1) / eta_star


def bif_condition(eta: float, speed: SpeedModel, n: int) -> float:
    """Transversality value 2 F1 + eta (F1' - F1 Fn'/Fn) at eta; must be
    nonzero for the bifurcation machinery to apply."""
    p = speed.eta_profile(eta)
    if p.Fn == 0.0:
        raise DegeneracyError("Fn(eta) = 0: transversality undefined")
    return 2 * p.F1 + eta * (p.F1p - p.F1 * p.Fnp / p.Fn)


@dataclass(frozen=True)
class BifShapeCoefficients:
    """Speed data at the bifurcation point plus the composite
    coefficients entering the curvature of the bifurcation curve."""

    eta0: float
    F1: float
    Fn: float
    F1p: float
    Fnp: float
    F1pp: float
    Fnpp: float
    Fnn: float
    Fnnp: float
    Fnnn: float
    script_F: float = field(init=False)
    script_F1: float = field(init=False)
    script_F2: float = field(init=False)
    script_F3: float = field(init=False)
    script_F4: float = field(init=False)
    n_dim: int = 2

    def __post_init__(self):
        e = self.eta0
        m = self.n_dim - 1
        F1, Fn = self.F1, self.Fn
        F1p, Fnp = self.F1p, self.Fnp
        F1pp, Fnpp = self.F1pp, self.Fnpp
        Fnn, Fnnp, Fnnn = self.Fnn, self.Fnnp, self.Fnnn
        if F1 == 0.0 or Fn == 0.0:
            raise DegeneracyError("F1(eta0) and Fn(eta0) must be nonzero")
        sf = (
            3 * e**2 * F1pp / m**2
            - 9 * e**2 * F1 * Fnpp / (m**2 * Fn)
            + 9 * e**2 * F1**2 * Fnnp / (m**2 * Fn**2)
            - 3 * e**2 * F1**3 * Fnnn / (m**2 * Fn**3)
            + e**2 * F1p**2 / (m**2 * F1)
            - 7 * e**2 * F1p * Fnp / (m**2 * Fn)
            + 5 * e**2 * F1 * F1p * Fnn / (m**2 * Fn**2)
            + 10 * e**2 * F1 * Fnp**2 / (m**2 * Fn**2)
            - 13 * e**2 * F1**2 * Fnp * Fnn / (m**2 * Fn**3)
            + 4 * e**2 * F1**3 * Fnn**2 / (m**2 * Fn**4)
            + 2 * (3 * self.n_dim + 8) * e * F1p / m**2
            - 4 * e * F1 * F1p / (m * Fn)
            - 2 * (3 * self.n_dim + 13) * e * F1 * Fnp / (m**2 * Fn)
            + 2 * e * F1**2 * Fnp / (m * Fn**2)
            + 10 * e * F1**2 * Fnn / (m**2 * Fn**2)
            + 2 * e * F1**3 * Fnn / (m * Fn**3)
            + 2 * (6 * self.n_dim + 5) * F1 / m**2
            + 4 * F1**2 / (m * Fn)
            - 2 * F1**3 / Fn**2
        )
        object.__setattr__(self, "script_F", sf)
        object.__setattr__(
            self, "script_F1",
            e * F1p / m - 2 * e * F1 * Fnp / (m * Fn)
            + e * F1**2 * Fnn / (m * Fn**2) + 2 * F1 / m,
        )
        object.__setattr__(
            self, "script_F2",
            e * F1p / m - 5 * e * F1 * Fnp / (m * Fn)
            + 4 * e * F1**2 * Fnn / (m * Fn**2) + 2 * F1 / m,
        )
        object.__setattr__(
            self, "script_F3",
            e**2 * F1pp / m - 3 * e**2 * F1 * Fnpp / (m * Fn)
            + 3 * e**2 * F1**2 * Fnnp / (m * Fn**2)
            - e**2 * F1**3 * Fnnn / (m * Fn**3)
            + 6 * e * F1p / m - 6 * e * F1 * Fnp / (m * Fn) + 6 * F1 / m,
        )
        object.__setattr__(
            self, "script_F4",
            -e * F1 * F1p / Fn + e * F1**2 * Fnp / Fn**2 + 2 * F1**2 / Fn,
        )

    @classmethod
    def from_speed(cls, speed: SpeedModel, eta0: float, n: int):
        p = speed.eta_profile(eta0)
        return cls(eta0=eta0, n_dim=n, **p.as_dict())

    def transversality(self) -> float:
        return (2 * self.F1 + self.eta0 * self.F1p
                - self.eta0 * self.F1 * self.Fnp / self.Fn)


def weight_sums(coeffs: BifShapeCoefficients, w: WeightModel, n: int):
    """The two weight sums entering the curvature formulas, evaluated at
    eta0: sum0 = Xi(kappa_{(n-1)/eta0}) and the mixed sum sum1."""
    e = coeffs.eta0
    ratio = coeffs.F1 / coeffs.Fn
    x = e / (n - 1)
    s0 = 0.0
    s1 = 0.0
    for a, c in enumerate(w.coeffs):
        if c == 0.0 or a > n:
            continue
        s0 += c * x**a * binom(n - 1, a)
        if a >= 1:
            s1 += c * x**a * (binom(n - 2, a - 1) - ratio * binom(n - 1, a - 1))
    return s0, s1


def eta_dd_analytic(coeffs: BifShapeCoefficients, w: WeightModel, n: int) -> float:
    """Normalisation-free bracket of the second derivative of the
    bifurcation curve at s = 0:

        bracket = script_F / transversality - 6 sum1 / ((n-1) sum0).

    eta''(0) equals this bracket times the negative factor
    -eta0^3 A^2 / 12, so sign(eta''(0)) = -sign(bracket).  The mode
    normalisation A is deliberately not computed.
    """
    s0, s1 = weight_sums(coeffs, w, n)
    b1 = coeffs.transversality()
    if b1 == 0.0:
        raise DegeneracyError("transversality value vanishes")
    if s0 == 0.0:
        raise DegeneracyError("weight sum vanishes at the bifurcation point")
    return coeffs.script_F / b1 - 6 * s1 / ((n - 1) * s0)


def lambda_dd_bracket(coeffs: BifShapeCoefficients, w: WeightModel, n: int) -> float:
    """Bracket whose sign is the sign of the second derivative of the
    critical eigenvalue along the bifurcation curve (the prefactor
    eta0^4 A^3/(6 (n-1) B) is positive)."""
    s0, s1 = weight_sums(coeffs, w, n)
    if s0 == 0.0:
        raise DegeneracyError("weight sum vanishes at the bifurcation point")
    return coeffs.script_F - 6 * s1 * coeffs.transversality() / ((n - 1) * s0)


def lambda_dd_sign(coeffs: BifShapeCoefficients, w: WeightModel, n: int) -> int:
    """Sign of lambda''(0); the nearby stationary solutions are stable
    under weighted-volume-preserving perturbations iff this is -1."""
    return int(np.sign(lambda_dd_bracket(coeffs, w, n)))


def eta_dd_sign(coeffs: BifShapeCoefficients, w: WeightModel, n: int) -> int:
    """Sign of eta''(0)."""
    return -int(np.sign(eta_dd_analytic(coeffs, w, n)))


def homog_condition(n: int, k: float, F1: float, Fn: float, Fnn: float,
                    Fnnn: float, w: WeightModel, d: float) -> float:
    """Left side of the homogeneous stability criterion; negative means
    the bifurcating stationary solutions are stable.

    Uses the constants F1 = F1(1) etc. of a speed homogeneous of degree
    k.  The pure kappa_n second-derivative term carries Fn^2 in its
    denominator, which is what the general composite reduces to.
    """
    if F1 == 0.0 or Fn == 0.0:
        raise DegeneracyError("homogeneous condition needs F1, Fn nonzero")
    base = np.pi / d * np.sqrt(Fn / ((n - 1) * F1))
    s0 = 0.0
    s1 = 0.0
    for a, c in enumerate(w.coeffs):
        if c == 0.0 or a > n:
            continue
        s0 += c * base**a * binom(n - 1, a)
        if a >= 1:
            s1 += c * base**a * (binom(n - 2, a - 1) - (F1 / Fn) * binom(n - 1, a - 1))
    if s0 == 0.0:
        raise DegeneracyError("weight sum vanishes")
    return (
        -6 * (n - 1) * s1 / s0
        - k**2 + 6 * n + 6
        - 3 * F1**2 * Fnnn / (2 * Fn**3)
        + 2 * F1**2 * Fnn**2 / Fn**4
        + k * F1 * Fnn / (2 * Fn**2)
        + (n - 1) * F1**2 * Fnn / Fn**3
        - (n - 1) ** 2 * F1**2 / Fn**2
        - (n - 1) * (k - 3) * F1 / Fn
    )


def mixed_volume_condition(n: int, b: int) -> Fraction:
    """Exact left side of the mixed-volume stability criterion

        -(n^3 - (b+10) n^2 + 2 (5b-1) n - 2 b (3b-4)) / (n - b);

    negative means the unduloids are stable under the (n+1-b)-th
    mixed-volume preserving mean curvature flow."""
    if not 0 <= b <= n - 1:
        raise DomainError(f"mixed-volume condition needs 0 <= b <= n-1, got b={b}")
    num = n**3 - (b + 10) * n**2 + 2 * (5 * b - 1) * n - 2 * b * (3 * b - 4)
    return Fraction(-num, n - b)


def stability_cubic(b: int):
    """Coefficients of n^3 - (b+10) n^2 + 2(5b-1) n - 2b(3b-4)."""
    return (1, -(b + 10), 2 * (5 * b - 1), -2 * b * (3 * b - 4))


def gamma_root(b: int) -> float:
    """Unique real root of the mixed-volume stability cubic for b >= 2,
    found by bracketed root-finding; the closed-form radical expression
    is available separately as a cross-check."""
    if b < 2:
        raise DomainError(f"gamma root defined for b >= 2, got {b}")
    c3, c2, c1, c0 = stability_cubic(b)

    def p(x):
        return ((c3 * x + c2) * x + c1) * x + c0

    lo, hi = 1.0, float(b + 20)
    while p(hi) <= 0:
        hi *= 2
    while p(lo) >= 0:
        lo *= 0.5
    root = brentq(p, lo, hi, xtol=1e-300, rtol=8.9e-16)
    # one Newton polish
    dp = (3 * c3 * root + 2 * c2) * root + c1
    if dp != 0:
        root -= p(root) / dp
    scale = max(abs(root) ** 3, 1.0)
    if abs(p(root)) > 1e-10 * scale:
        raise DegeneracyError(f"cubic residual {p(root):g} above tolerance")
    return float(root)


def gamma_root_radical(b: int) -> float:
    """Closed-form radical for the real root of the stability cubic."""
    if b < 2:
        raise DomainError(f"gamma root defined for b >= 2, got {b}")
    disc = 2 * b**5 + 40 * b**4 - 288 * b**3 + 1733 * b**2 - 2540 * b - 36
    if disc < 0:
        raise DomainError(f"radical discriminant negative for b={b}")
    inner = b**3 + 66 * b**2 - 249 * b + 1090 + 9 * np.sqrt(disc)
    u = inner ** (1.0 / 3.0)
    return (b + 10 + (b**2 - 10 * b + 106) / u + u) / 3.0


@dataclass
class StabilityTableRow:
    n: int
    b: int
    condition: Fraction
    stable: bool


def stability_table(n_max: int, b_max: int):
    """Verdict table for the mixed-volume preserving mean curvature
    flows: stable iff the exact condition value is negative.  Rows with
    b >= n are absent (the weight degenerates there)."""
    if n_max < 12:
        raise DomainError(f"table needs n_max >= 12, got {n_max}")
    rows = []
    for n in range(2, n_max + 1):
        for b in range(0, min(b_max, n - 1) + 1):
            cond = mixed_volume_condition(n, b)
            rows.append(StabilityTableRow(n, b, cond, cond < 0))
    return rows


def jacobian_fd(eta: float, speed: SpeedModel, w: WeightModel,
                g: GridCalculus, modes, n: int | None = None) -> list:
    """Rayleigh coefficients of the reduced-flow linearisation at the
    cylinder, by Richardson-extrapolated central differences along the
    cosine modes.  Independent oracle for linear_eigenvalue."""
    if n is None:
        n = speed.n_dim
    radius = (n - 1) / eta
    coeffs = []
    for m in modes:
        v = np.cos(m * np.pi * g.z / g.d)
        v = project_meanzero(v, g)
        norm2 = g.mean_circle(v * v)
        scale = 1e-4 * radius

        def directional(eps):
            up = reduced_rhs(ReducedState(eps * v, eta), speed, w, g, n)
            um = reduced_rhs(ReducedState(-eps * v, eta), speed, w, g, n)
            return (up - um) / (2 * eps)

        d1 = directional(scale)
        d2 = directional(scale / 2)
        deriv = (4.0 * d2 - d1) / 3.0
        coeffs.append(g.mean_circle(deriv * v) / norm2)
    return coeffs


_VERDICTS = {-1: "stable", 1: "unstable", 0: "degenerate"}


@dataclass
class StabilityReport:
    """Everything the analysis says about one speed/weight pair, with the
    provenance of each number."""

    n_dim: int
    weight: str
    speed: str
    d: float
    R_crit: float
    eta0: float
    lambdas: dict
    bif_cond_value: float
    eta_dd_bracket: float
    eta_dd_sign: int
    lambda_dd_sign: int
    verdict: str
    provenance: dict

    def as_dict(self):
        out = {
            "n_dim": self.n_dim,
            "weight": self.weight,
            "speed": self.speed,
            "d": self.d,
            "R_crit": self.R_crit,
            "eta0": self.eta0,
            "lambdas": {str(k): v for k, v in self.lambdas.items()},
            "bif_cond_value": self.bif_cond_value,
            "eta_dd_bracket": self.eta_dd_bracket,
            "eta_dd_sign": self.eta_dd_sign,
            "lambda_dd_sign": self.lambda_dd_sign,
            "verdict": self.verdict,
            "provenance": self.provenance,
        }
        return out


def build_report(speed: SpeedModel, w: WeightModel, n: int, d: float,
                 bracket=(1e-2, 1e2), modes=(1, 2, 3, 4, 5)) -> StabilityReport:
    """Assemble the stability report at the critical cylinder."""
    if speed.eta_range is not None:
        pad = 1e-9 * (speed.eta_range[1] - speed.eta_range[0])
        bracket = (max(bracket[0], speed.eta_range[0] + pad),
                   min(bracket[1], speed.eta_range[1] - pad))
    r_crit = r_crit_find(speed, n, d, bracket)
    if r_crit is None:
        raise DegeneracyError(
            "no critical radius in the bracket: the cylinder eigenvalue "
            "never changes sign, nothing bifurcates"
        )
    eta0 = (n - 1) / r_crit
    coeffs = BifShapeCoefficients.from_speed(speed, eta0, n)
    lambdas = {m: linear_eigenvalue(m, eta0, speed, n, d) for m in modes}
    bif_val = bif_condition(eta0, speed, n)
    bracket_eta = eta_dd_analytic(coeffs, w, n)
    sign_eta = -int(np.sign(bracket_eta))
    sign_lambda = lambda_dd_sign(coeffs, w, n)
    return StabilityReport(
        n_dim=n,
        weight=w.label(),
        speed=speed.name,
        d=d,
        R_crit=r_crit,
        eta0=eta0,
        lambdas=lambdas,
        bif_cond_value=bif_val,
        eta_dd_bracket=bracket_eta,
        eta_dd_sign=sign_eta,
        lambda_dd_sign=sign_lambda,
        verdict=_VERDICTS[sign_lambda],
        provenance={
            "R_crit": "root of the critical-eigenvalue function via bracketed "
                      "Brent iteration, residual <= 1e-12 relative",
            "eta0": "(n-1)/R_crit",
            "lambdas": "closed-form cylinder spectrum "
                       "-Fn(eta)(m pi/d)^2 + eta^2 F1(eta)/(n-1)",
            "bif_cond_value": "transversality value 2F1 + eta(F1' - F1 Fn'/Fn)",
            "eta_dd_bracket": "normalisation-free bracket of eta''(0); "
                              "sign only is contractual",
            "lambda_dd_sign": "sign of the eigenvalue-curvature bracket; "
                              "stable iff negative",
        },
    )
