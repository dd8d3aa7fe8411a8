"""Time integration of the full and reduced curvature flows.

The workhorse is an embedded adaptive Dormand-Prince 5(4) pair with FSAL
and a PI step controller; an optional semi-implicit stepper treats the
stiff constant-coefficient second-derivative part implicitly for large
grids.  The integrator records weighted volume and sup-deviation
histories, counts accepted/rejected steps, and stops early (with a
reason) when the profile approaches the axis or the weight density loses
positivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import (
    ConvergenceError,
    DegeneracyError,
    DomainError,
    InsufficientDataError,
    IntegrationError,
    RangeError,
)
from .geometry import (
    RadialProfile,
    WeightModel,
    _q_density_core,
    _xi_arrays,
    project_meanzero,
)
from .grid import GridCalculus
from .reduction import ReducedState, full_rhs, psi_solve, qtilde_inv
from .speeds import SpeedModel
from .stability import r_crit_find
from . import unduloid as _unduloid

MIN_RHO = 1e-6

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_ERR = _B5 - _B4


@dataclass
class InitialCondition:
    """Closed-form initial profile family.

    family "cylinder-cosine": params radius (absolute) or radius_factor
    (times the critical radius of the configured speed), modes = list of
    (m, relative amplitude).
    family "unduloid-cosine": params s (neck-bulge asymmetry), modes as
    above, amplitudes relative to the stationary profile.
    """

    family: str
    params: dict = field(default_factory=dict)

    def build(self, n: int, d: float, g: GridCalculus,
              speed: SpeedModel) -> RadialProfile:
        modes = self.params.get("modes", [])
        envelope = np.ones(g.n_points)
        for m, amp in modes:
            envelope += amp * np.cos(m * np.pi * g.z / d)
        if self.family == "cylinder-cosine":
            if "radius" in self.params:
                radius = float(self.params["radius"])
            elif "radius_factor" in self.params:
                r_crit = r_crit_find(speed, n, d)
                if r_crit is None:
                    raise DomainError(
                        "radius_factor needs a speed with a critical radius"
                    )
                radius = float(self.params["radius_factor"]) * r_crit
            else:
                raise DomainError(
                    "cylinder-cosine initial condition needs radius or "
                    "radius_factor"
                )
            return RadialProfile(n, d, radius * envelope)
        if self.family == "unduloid-cosine":
            s = float(self.params["s"])
            base = _unduloid.profile(
                _unduloid.UnduloidParams(n, d, s), g.n_points
            )
            return RadialProfile(n, d, base.values * envelope)
        raise DomainError(f"unknown initial-condition family {self.family!r}")


@dataclass
class FlowConfig:
    n_dim: int
    d: float
    n_points: int
    speed: SpeedModel
    weight: WeightModel
    initial: InitialCondition
    t_end: float
    rtol: float = 1e-8
    atol: float = 1e-8
    mode: str = "full"
    record_every: float = 0.01
    stepper: str = "erk54"
    dt: float | None = None  # fixed step for the semi-implicit stepper
    grid_mode: str = "spectral-cosine"

    def __post_init__(self):
        if self.t_end <= 0:
            raise DomainError(f"t_end must be positive, got {self.t_end}")
        for name, tol in (("rtol", self.rtol), ("atol", self.atol)):
            if not 1e-14 < tol < 1e-2:
                raise DomainError(
                    f"{name} must lie in (1e-14, 1e-2), got {tol}"
                )
        if self.mode not in ("full", "reduced"):
            raise DomainError(f"mode must be full or reduced, got {self.mode!r}")
        if self.stepper not in ("erk54", "imex-euler"):
            raise DomainError(f"unknown stepper {self.stepper!r}")
        if self.record_every <= 0:
            raise DomainError("record_every must be positive")

    def grid(self) -> GridCalculus:
        return GridCalculus(self.n_points, self.d, self.grid_mode)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    wvol: np.ndarray
    sup_dev: np.ndarray
    step_stats: dict
    termination_reason: str | None
    eta: float

    def final_profile(self, n_dim: int, d: float) -> RadialProfile:
        return RadialProfile(n_dim, d, self.states[-1])


def _admissibility(u, g: GridCalculus, w: WeightModel, n: int):
    """(min rho, min Xi) of the current state."""
    up, upp = g.derivs(u)
    slope = np.sqrt(1.0 + up * up)
    k1 = 1.0 / (u * slope)
    kn = -upp / slope**3
    xi = _xi_arrays(w, k1, kn, n)
    return float(np.min(u)), float(np.min(xi))


def integrate(cfg: FlowConfig) -> Trajectory:
    """Run the flow and record (time, profile, WVol, sup-deviation).

    Raises IntegrationError (carrying the last valid state) on step-size
    underflow; returns early with a termination reason when the profile
    approaches the axis ("min-rho") or the weight density loses
    positivity ("xi-sign").
    """
    g = cfg.grid()
    n = cfg.n_dim
    w = cfg.weight
    speed = cfg.speed
    u0 = cfg.initial.build(n, cfg.d, g, speed).values
    rho_min, xi_min = _admissibility(u0, g, w, n)
    if rho_min <= MIN_RHO:
        raise DomainError("initial profile touches the axis guard")
    if xi_min <= 0:
        raise DomainError("initial profile leaves the weight-positivity region")

    up0, upp0 = g.derivs(u0)
    qbar0 = g.mean_circle(_q_density_core(u0, up0, upp0, n, w.coeffs))
    eta_hint = (n - 1) / float(np.mean(u0))
    try:
        eta = qtilde_inv(qbar0, w, n, eta_hint=eta_hint)
    except (DomainError, RangeError):
        try:
            eta = qtilde_inv(qbar0, w, n, bracket=(eta_hint / 2, 2 * eta_hint))
        except (DomainError, RangeError):
            if cfg.mode == "reduced":
                raise
            # the conserved-volume chart is not invertible around the
            # working point; the full flow does not need it
            eta = eta_hint

    if cfg.mode == "full":
        y0 = u0.copy()

        def rhs(y):
            return full_rhs(RadialProfile(n, cfg.d, y), speed, w, g)

        def to_profile(y):
            return y
    else:
        y0 = project_meanzero(u0, g)
        warm = {"c": float(np.mean(u0))}

        def to_profile(y):
            prof = psi_solve(ReducedState(y, eta), w, g, n, c_init=warm["c"])
            warm["c"] = float(prof.values[0] - y[0])
            return prof.values

        def rhs(y):
            u = to_profile(y)
            return project_meanzero(full_rhs(RadialProfile(n, cfg.d, u),
                                             speed, w, g), g)

    record_times = np.arange(0.0, cfg.t_end + 1e-12 * cfg.t_end,
                             cfg.record_every)
    if record_times[-1] < cfg.t_end - 1e-12 * cfg.t_end:
        record_times = np.append(record_times, cfg.t_end)

    times, states, wvols, sups = [], [], [], []

    def record(t, y):
        if times and abs(times[-1] - t) <= 1e-14 * max(1.0, cfg.t_end):
            return
        u = np.asarray(to_profile(y))
        times.append(t)
        states.append(np.array(u))
        up, upp = g.derivs(u)
        q = _q_density_core(u, up, upp, n, w.coeffs)
        wvols.append(g.integrate_circle(q))
        sups.append(float(np.max(np.abs(project_meanzero(u, g)))))

    stats = {"accepted": 0, "rejected": 0, "rhs_evals": 0}
    reason = None

    if cfg.stepper == "imex-euler":
        _integrate_imex(cfg, g, y0, rhs, to_profile, record, record_times,
                        stats, eta)
        # events are handled inside; reason propagated via stats
        reason = stats.pop("_reason", None)
    else:
        reason = _integrate_erk54(cfg, g, y0, rhs, to_profile, record,
                                  record_times, stats, w, n)

    return Trajectory(
        times=np.array(times),
        states=states,
        wvol=np.array(wvols),
        sup_dev=np.array(sups),
        step_stats=stats,
        termination_reason=reason,
        eta=eta,
    )


def _integrate_erk54(cfg, g, y0, rhs, to_profile, record, record_times,
                     stats, w, n):
    t = 0.0
    y = y0
    f0 = rhs(y)
    stats["rhs_evals"] += 1
    scale = cfg.atol + cfg.rtol * np.max(np.abs(y))
    rate = np.max(np.abs(f0)) / scale
    dt = min(0.5 * cfg.record_every, 0.1 / max(rate, 1e-8), cfg.t_end)
    dt_min = 1e-14 * max(cfg.t_end, 1.0)
    next_rec = 0
    record(t, y)
    next_rec = 1
    reason = None
    err_prev = 1.0
    k = [np.zeros_like(y) for _ in range(7)]
    k[0] = f0
    while t < cfg.t_end - 1e-14 * cfg.t_end:
        if next_rec < len(record_times):
            dt = min(dt, record_times[next_rec] - t)
        dt = min(dt, cfg.t_end - t)
        if dt < dt_min:
            raise IntegrationError(
                f"step size underflow at t={t:.6g}",
                last_time=t, last_state=np.array(to_profile(y)),
            )
        bad = False
        for i in range(1, 7):
            yi = y + dt * sum(a * k[j] for j, a in enumerate(_A[i]))
            if not np.all(np.isfinite(yi)):
                bad = True
                break
            if cfg.mode == "full" and np.any(yi <= 0):
                bad = True
                break
            try:
                k[i] = rhs(yi)
            except (DomainError, DegeneracyError, ConvergenceError,
                    FloatingPointError):
                bad = True
                break
            stats["rhs_evals"] += 1
        if not bad:
            y_new = yi  # stage 7 abscissa is 1 and row equals b5 (FSAL)
            err_vec = dt * sum(e * k[j] for j, e in enumerate(_ERR) if e != 0.0)
            tol = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / tol) ** 2)))
            bad = not np.isfinite(err)
        if bad:
            stats["rejected"] += 1
            dt *= 0.2
            continue
        if err <= 1.0:
            t += dt
            y = y_new
            k[0] = k[6]  # FSAL
            stats["accepted"] += 1
            # PI controller (Gustafsson)
            fac = 0.9 * err ** -0.14 * err_prev ** 0.08 if err > 0 else 5.0
            err_prev = max(err, 1e-10)
            dt *= min(5.0, max(0.2, fac))
            u = to_profile(y)
            rho_min, xi_min = _admissibility(np.asarray(u), g, w, n)
            if rho_min <= MIN_RHO:
                reason = "min-rho"
            elif xi_min <= 0.0:
                reason = "xi-sign"
            while (next_rec < len(record_times)
                   and t >= record_times[next_rec] - 1e-12 * max(1.0, cfg.t_end)):
                record(t, y)
                next_rec += 1
            if reason is not None:
                record(t, y)
                return reason
        else:
            stats["rejected"] += 1
            dt *= min(1.0, max(0.2, 0.9 * err**-0.2))
    return reason


def _integrate_imex(cfg, g, y0, rhs, to_profile, record, record_times, stats,
                    eta):
    """First-order IMEX Euler with the constant-coefficient flat part
    Fn(eta0) d^2/dz^2 treated implicitly.  Fixed step from cfg.dt."""
    if cfg.dt is None or cfg.dt <= 0:
        raise DomainError("imex-euler stepper needs an explicit positive dt")
    prof = cfg.speed.eta_profile(eta)
    fn0 = prof.Fn
    d2 = g.second_derivative_matrix()
    lu = lu_factor(np.eye(g.n_points) - cfg.dt * fn0 * d2)
    t = 0.0
    y = y0.copy()
    record(t, y)
    next_rec = 1
    n_steps = int(np.ceil(cfg.t_end / cfg.dt))
    for _ in range(n_steps):
        dt = min(cfg.dt, cfg.t_end - t)
        f = rhs(y)
        stats["rhs_evals"] += 1
        y = lu_solve(lu, y + dt * (f - fn0 * (d2 @ y)))
        t += dt
        stats["accepted"] += 1
        u = np.asarray(to_profile(y))
        rho_min, xi_min = _admissibility(u, g, cfg.weight, cfg.n_dim)
        if rho_min <= MIN_RHO or xi_min <= 0:
            stats["_reason"] = "min-rho" if rho_min <= MIN_RHO else "xi-sign"
            record(t, y)
            return
        while (next_rec < len(record_times)
               and t >= record_times[next_rec] - 1e-12 * max(1.0, cfg.t_end)):
            record(t, y)
            next_rec += 1


def conservation_drift(traj: Trajectory) -> float:
    """Largest relative deviation of the weighted volume from its initial
    value over the recorded trajectory."""
    if traj.wvol.size == 0:
        raise DomainError("empty trajectory")
    w0 = traj.wvol[0]
    return float(np.max(np.abs(traj.wvol - w0)) / abs(w0))


def log_linear_fit(times, values):
    """Least-squares fit of log(values) = a + rate * t.

    Returns (rate, intercept, rms_residual)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        raise InsufficientDataError("deviation history is not strictly positive")
    logs = np.log(values)
    A = np.vstack([times, np.ones_like(times)]).T
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    resid = logs - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def decay_rate_fit(traj: Trajectory, window) -> float:
    """Exponential rate of the sup-deviation over a time window, by a
    least-squares line through log(sup_dev).

    Raises InsufficientDataError with fewer than 5 samples in the window
    or when the deviation vanishes there."""
    t_lo, t_hi = window
    mask = (traj.times >= t_lo) & (traj.times <= t_hi)
    if int(np.sum(mask)) < 5:
        raise InsufficientDataError(
            f"only {int(np.sum(mask))} samples in window [{t_lo}, {t_hi}]"
        )
    rate, _, _ = log_linear_fit(traj.times[mask], traj.sup_dev[mask])
    return rate


def equivalence_check(cfg: FlowConfig) -> float:
    """Integrate the same initial data through the full flow and through
    the reduced flow, and return the largest sup-norm discrepancy between
    the full profile and the reconstruction from the reduced state over
    the shared record times."""
    full_cfg = FlowConfig(**{**cfg.__dict__, "mode": "full"})
    red_cfg = FlowConfig(**{**cfg.__dict__, "mode": "reduced"})
    t_full = integrate(full_cfg)
    t_red = integrate(red_cfg)
    n_rec = min(len(t_full.states), len(t_red.states))
    sup = 0.0
    for i in range(n_rec):
        sup = max(sup, float(np.max(np.abs(t_full.states[i] - t_red.states[i]))))
    return sup
