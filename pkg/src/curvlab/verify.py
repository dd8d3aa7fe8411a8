"""Named verification suites runnable from the CLI.

Each criterion returns a dict with the measured numbers, its tolerance
and a pass flag; the CLI serialises the lot and exits nonzero if any
criterion fails.  The suites are fast subsets of the full acceptance
battery (which lives in the test suite).
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .flow import FlowConfig, InitialCondition, conservation_drift, integrate
from .geometry import RadialProfile, WeightModel, q_density
from .grid import GridCalculus
from .speeds import MeanCurvatureSpeed, remark_example
from .stability import (
    BifShapeCoefficients,
    eta_dd_analytic,
    gamma_root,
    gamma_root_radical,
    jacobian_fd,
    lambda_dd_sign,
    linear_eigenvalue,
    homog_condition,
    mixed_volume_condition,
    r_crit_find,
    stability_table,
)
from .unduloid import flatness_fit


def _criterion(cid, description, passed, measured, tolerance):
    return {
        "id": cid,
        "description": description,
        "passed": bool(passed),
        "measured": measured,
        "tolerance": tolerance,
    }


def _table_bullets_ok(rows):
    expected = {}
    for r in rows:
        if r.b <= 3:
            expected_stable = r.n >= 11
        elif r.b in (4, 5):
            expected_stable = r.n >= 12
        elif r.b in (6, 7, 8):
            expected_stable = r.n >= r.b + 7
        else:
            expected_stable = r.n >= r.b + 6
        expected[(r.n, r.b)] = expected_stable
    mismatches = [(r.n, r.b) for r in rows if r.stable != expected[(r.n, r.b)]]
    return mismatches


def suite_paper_tables(seed=0):
    out = []
    rows = stability_table(30, 12)
    mism = _table_bullets_ok(rows)
    out.append(_criterion(
        "stability-table-bullets",
        "verdict table (n<=30, b<=12) matches the four stability bullets",
        not mism, {"mismatches": mism}, "exact",
    ))
    flips = {}
    for b in (0, 1):
        flips[b] = (mixed_volume_condition(10, b) > 0
                    and mixed_volume_condition(11, b) < 0)
    out.append(_criterion(
        "vpmcf-threshold",
        "condition sign flips between n=10 (unstable) and n=11 (stable) "
        "for b=0 and b=1",
        all(flips.values()),
        {str(b): bool(v) for b, v in flips.items()}, "exact",
    ))
    bracket_ok = all(b + 5 < gamma_root(b) < b + 6 for b in range(9, 51))
    radical_dev = max(abs(gamma_root(b) - gamma_root_radical(b))
                      for b in range(2, 13))
    out.append(_criterion(
        "gamma-brackets",
        "b+5 < gamma(b) < b+6 for b=9..50 and radical agreement for b=2..12",
        bracket_ok and radical_dev <= 1e-8,
        {"bracket_ok": bracket_ok, "radical_max_dev": radical_dev}, 1e-8,
    ))
    worst = 0.0
    for n in range(2, 14):
        for d in (0.5, 1.0, 2.0):
            rc = r_crit_find(MeanCurvatureSpeed(n), n, d)
            worst = max(worst, abs(rc / (d * np.sqrt(n - 1) / np.pi) - 1.0))
    r1 = r_crit_find(remark_example(1, 1.0), 4, 1.0, bracket=(0.1, 100.0))
    r2 = r_crit_find(remark_example(2, 1.0), 4, 1.0, bracket=(0.1, 100.0))
    out.append(_criterion(
        "critical-radius",
        "closed-form critical radii: d sqrt(n-1)/pi family and the two "
        "polynomial example speeds",
        worst <= 1e-12 and abs(r1 - 1.0) <= 1e-10 and r2 is None,
        {"vpmcf_worst_rel": worst, "example1": r1, "example2": r2},
        1e-12,
    ))
    return out


def suite_conservation(seed=0):
    out = []
    n, d = 2, 1.0
    base = dict(
        n_dim=n, d=d, n_points=128, speed=MeanCurvatureSpeed(n),
        weight=WeightModel.vpmcf(n), t_end=1.0, rtol=1e-10, atol=1e-10,
        record_every=0.02,
    )
    traj = integrate(FlowConfig(
        initial=InitialCondition("cylinder-cosine",
                                 {"radius_factor": 1.2, "modes": [(1, 0.05)]}),
        **base,
    ))
    drift = conservation_drift(traj)
    out.append(_criterion(
        "wvol-drift-standard",
        "relative weighted-volume drift of the standard damped run",
        drift <= 1e-6, drift, 1e-6,
    ))
    cyl = integrate(FlowConfig(
        initial=InitialCondition("cylinder-cosine", {"radius": 0.5}),
        **{**base, "t_end": 0.2},
    ))
    out.append(_criterion(
        "wvol-drift-cylinder",
        "equilibrium cylinder trajectory keeps its weighted volume",
        conservation_drift(cyl) <= 1e-10, conservation_drift(cyl), 1e-10,
    ))
    return out


def suite_cross_validation(seed=0):
    out = []
    worst = 0.0
    cases = [(2, 0), (3, 0), (3, 1)]
    for n, b in cases:
        speed = MeanCurvatureSpeed(n)
        w = WeightModel.mixed_volume(b, n)
        g = GridCalculus(64, 1.0)
        eta0 = np.pi * np.sqrt(n - 1)
        for fac in (0.8, 1.0, 1.2):
            eta = fac * eta0
            fd = jacobian_fd(eta, speed, w, g, [1, 2, 3, 4, 5], n=n)
            for m, val in zip([1, 2, 3, 4, 5], fd):
                ref = linear_eigenvalue(m, eta, speed, n, 1.0)
                scale = max(abs(ref), (m * np.pi) ** 2)
                worst = max(worst, abs(val - ref) / scale)
    out.append(_criterion(
        "linearisation-oracle",
        "finite-difference Jacobian matches the closed-form cylinder "
        "spectrum for m=1..5",
        worst <= 1e-6, worst, 1e-6,
    ))

    sign_fail = []
    for b in (0, 1):
        for n in range(2, 14):
            _, c2 = flatness_fit(n, b)
            quad_sign = int(np.sign(c2))
            co = BifShapeCoefficients.from_speed(
                MeanCurvatureSpeed(n), np.pi * np.sqrt(n - 1), n)
            analytic = -int(np.sign(eta_dd_analytic(
                co, WeightModel.mixed_volume(b, n), n)))
            if quad_sign != analytic:
                sign_fail.append((n, b))
    out.append(_criterion(
        "bifurcation-curvature-signs",
        "sign of the quadrature curvature of the bifurcation curve at "
        "s -> 0 matches the analytic bracket for b in {0,1}, n = 2..13",
        not sign_fail, {"disagreements": sign_fail}, "sign",
    ))

    chain_fail = []
    for n in range(2, 31):
        for b in range(0, min(13, n)):
            if b > n - 1:
                continue
            co = BifShapeCoefficients.from_speed(
                MeanCurvatureSpeed(n), np.pi * np.sqrt(n - 1), n)
            w = WeightModel.mixed_volume(b, n)
            s_f = lambda_dd_sign(co, w, n)
            s_h = int(np.sign(homog_condition(n, 1, 1, 1, 0, 0, w, 1.0)))
            s_mv = int(np.sign(mixed_volume_condition(n, b)))
            if not s_f == s_h == s_mv:
                chain_fail.append((n, b))
    out.append(_criterion(
        "condition-chain",
        "general, homogeneous and mixed-volume stability criteria give "
        "identical verdicts for n=2..30",
        not chain_fail, {"disagreements": chain_fail}, "exact",
    ))

    rng = np.random.default_rng(seed)
    g = GridCalculus(96, 1.0)
    worst_q = 0.0
    for n, coeffs in ((2, (1.0, 0.0, 0.0)), (3, (0.0, 1.0, 0.0, 0.0)),
                      (3, (1.0, 1.0, 0.0, 0.0))):
        w = WeightModel(coeffs)
        for _ in range(7):
            u = 1.5 + sum(
                0.2 * rng.uniform(-1, 1) / (m * m) * np.cos(m * np.pi * g.z)
                for m in range(1, 6)
            )
            v = sum(
                rng.uniform(-1, 1) / (m + 1) * np.cos(m * np.pi * g.z)
                for m in range(0, 5)
            )
            worst_q = max(worst_q, _q_identity_error(u, v, n, w, g))
    out.append(_criterion(
        "q-identity",
        "finite-difference Gateaux derivative of the conserved integral "
        "matches n * integral of v Xi u^{n-1}",
        worst_q <= 1e-7, worst_q, 1e-7,
    ))
    return out


def _q_identity_error(u, v, n, w, g):
    from .geometry import _xi_arrays

    def wvol_of(vec):
        p = RadialProfile(n, g.d, vec)
        return g.integrate_circle(q_density(p, w, g))

    scale = float(np.max(np.abs(u)))
    eps = 1e-4 * scale
    fd1 = (wvol_of(u + eps * v) - wvol_of(u - eps * v)) / (2 * eps)
    fd2 = (wvol_of(u + eps / 2 * v) - wvol_of(u - eps / 2 * v)) / eps
    best = (4 * fd2 - fd1) / 3.0  # Richardson on the h^2 error
    up = g.deriv1(u)
    upp = g.deriv2(u)
    slope = np.sqrt(1 + up * up)
    k1 = 1.0 / (u * slope)
    kn = -upp / slope**3
    xi = _xi_arrays(w, k1, kn, n)
    exact = n * g.integrate_circle(v * xi * u ** (n - 1))
    return abs(best - exact) / max(1.0, abs(exact))


SUITES = {
    "paper-tables": suite_paper_tables,
    "conservation": suite_conservation,
    "cross-validation": suite_cross_validation,
}


def run_suite(suite_id: str, seed: int = 0):
    if suite_id not in SUITES:
        raise DomainError(
            f"unknown suite {suite_id!r}; available: {sorted(SUITES)}"
        )
    return SUITES[suite_id](seed=seed)
