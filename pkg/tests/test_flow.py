import numpy as np
import pytest

from curvlab.errors import DomainError, InsufficientDataError
from curvlab.flow import (
    FlowConfig,
    InitialCondition,
    Trajectory,
    conservation_drift,
    decay_rate_fit,
    equivalence_check,
    integrate,
    log_linear_fit,
)
from curvlab.geometry import WeightModel
from curvlab.speeds import MeanCurvatureSpeed


def make_config(**overrides):
    n = overrides.pop("n_dim", 2)
    base = dict(
        n_dim=n,
        d=1.0,
        n_points=48,
        speed=MeanCurvatureSpeed(n),
        weight=WeightModel.vpmcf(n),
        initial=InitialCondition(
            "cylinder-cosine", {"radius_factor": 1.2, "modes": [(1, 0.05)]}
        ),
        t_end=0.2,
        rtol=1e-8,
        atol=1e-8,
        record_every=0.02,
    )
    base.update(overrides)
    return FlowConfig(**base)


def test_config_validation():
    with pytest.raises(DomainError):
        make_config(t_end=-1.0)
    with pytest.raises(DomainError):
        make_config(rtol=1.0)
    with pytest.raises(DomainError):
        make_config(atol=1e-15)
    with pytest.raises(DomainError):
        make_config(mode="sideways")
    with pytest.raises(DomainError):
        make_config(stepper="leapfrog")


def test_cylinder_is_equilibrium():
    cfg = make_config(
        initial=InitialCondition("cylinder-cosine", {"radius": 0.8})
    )
    traj = integrate(cfg)
    assert traj.termination_reason is None
    assert np.max(traj.sup_dev) < 1e-9
    assert conservation_drift(traj) < 1e-11
    assert np.max(np.abs(traj.states[-1] - traj.states[0])) < 1e-9


def test_record_grid_and_stats():
    cfg = make_config(t_end=0.1, record_every=0.025)
    traj = integrate(cfg)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(0.1, abs=1e-12)
    assert np.all(np.diff(traj.times) > 0)
    assert len(traj.states) == traj.times.size == traj.wvol.size
    assert traj.step_stats["accepted"] > 0
    assert traj.step_stats["rhs_evals"] >= 6 * traj.step_stats["accepted"]


def test_decay_rate_fit_on_synthetic_exponential():
    times = np.linspace(0.0, 2.0, 41)
    traj = Trajectory(
        times=times,
        states=[np.ones(4)] * 41,
        wvol=np.ones(41),
        sup_dev=np.exp(-2.0 * times),
        step_stats={},
        termination_reason=None,
        eta=1.0,
    )
    rate = decay_rate_fit(traj, (0.0, 2.0))
    assert rate == pytest.approx(-2.0, abs=1e-10)
    with pytest.raises(InsufficientDataError):
        decay_rate_fit(traj, (1.99, 2.0))  # fewer than 5 samples


def test_decay_rate_fit_rejects_vanishing_deviation():
    times = np.linspace(0.0, 1.0, 11)
    traj = Trajectory(
        times=times,
        states=[np.ones(4)] * 11,
        wvol=np.ones(11),
        sup_dev=np.zeros(11),
        step_stats={},
        termination_reason=None,
        eta=1.0,
    )
    with pytest.raises(InsufficientDataError):
        decay_rate_fit(traj, (0.0, 1.0))


def test_log_linear_fit_residual():
    t = np.linspace(0, 1, 20)
    rate, intercept, resid = log_linear_fit(t, 3.0 * np.exp(0.7 * t))
    assert rate == pytest.approx(0.7, abs=1e-12)
    assert intercept == pytest.approx(np.log(3.0), abs=1e-12)
    assert resid < 1e-13


def test_even_symmetry_is_structural():
    # embedding the state into the full circle produces no sine content
    cfg = make_config(t_end=0.05)
    traj = integrate(cfg)
    u = traj.states[-1]
    full_circle = np.concatenate([u, u[-2:0:-1]])  # even extension
    spectrum = np.fft.rfft(full_circle)
    assert np.max(np.abs(spectrum.imag)) < 1e-12 * np.max(np.abs(spectrum.real))


def test_drift_decreases_with_tolerance():
    coarse = integrate(make_config(rtol=1e-3, atol=1e-3, t_end=0.3))
    fine = integrate(make_config(rtol=1e-9, atol=1e-9, t_end=0.3))
    assert conservation_drift(fine) < conservation_drift(coarse)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_drift_tolerance_scaling(seed):
    # halving rtol never worsens the drift by more than a factor two
    rng = np.random.default_rng(seed)
    modes = [(m, 0.03 * rng.uniform(-1, 1) / m**2) for m in (1, 2, 3)]
    init = InitialCondition("cylinder-cosine",
                            {"radius_factor": 1.3, "modes": modes})
    drift1 = conservation_drift(integrate(make_config(
        initial=init, rtol=1e-5, atol=1e-5, t_end=0.25)))
    drift2 = conservation_drift(integrate(make_config(
        initial=init, rtol=5e-6, atol=5e-6, t_end=0.25)))
    assert drift2 <= 2.0 * drift1 + 1e-14


def test_stable_side_eventually_decreasing_unstable_initially_growing():
    stable = integrate(make_config(t_end=0.4))
    tail = stable.sup_dev[stable.times > 0.1]
    assert np.all(np.diff(tail) < 0)
    unstable = integrate(make_config(
        initial=InitialCondition(
            "cylinder-cosine", {"radius_factor": 0.8, "modes": [(1, 1e-3)]}
        ),
        t_end=0.2,
    ))
    head = unstable.sup_dev[unstable.times < 0.1]
    assert np.all(np.diff(head) > 0)


def test_equivalence_check_cylinder_is_tight():
    cfg = make_config(
        initial=InitialCondition("cylinder-cosine", {"radius": 0.8}),
        t_end=0.1,
    )
    assert equivalence_check(cfg) < 1e-9


def test_min_rho_termination():
    cfg = make_config(
        initial=InitialCondition(
            "cylinder-cosine", {"radius_factor": 0.5, "modes": [(1, -0.5)]}
        ),
        rtol=1e-6,
        atol=1e-8,
        t_end=5.0,
        record_every=0.002,
    )
    traj = integrate(cfg)
    assert traj.termination_reason == "min-rho"
    assert traj.times[-1] < 5.0
    assert np.min(traj.states[-1]) <= 1e-5


def test_xi_sign_termination():
    # a weight whose density crosses zero at a finite neck radius: the
    # run must stop for weight degeneracy, not for the axis guard
    cfg = make_config(
        weight=WeightModel((1.0, -0.05, 0.0)),
        initial=InitialCondition(
            "cylinder-cosine", {"radius_factor": 0.5, "modes": [(1, -0.5)]}
        ),
        n_points=64,
        rtol=1e-6,
        atol=1e-9,
        t_end=2.0,
        record_every=0.001,
    )
    traj = integrate(cfg)
    assert traj.termination_reason == "xi-sign"
    assert np.min(traj.states[-1]) > 1e-3  # nowhere near the axis


def test_imex_stepper_tracks_erk():
    ref = integrate(make_config(rtol=1e-10, atol=1e-10, t_end=0.05))
    imex = integrate(make_config(stepper="imex-euler", dt=2e-5, t_end=0.05))
    assert np.max(np.abs(ref.states[-1] - imex.states[-1])) < 1e-3
    with pytest.raises(DomainError):
        integrate(make_config(stepper="imex-euler"))  # dt required


def test_unduloid_initial_condition_family():
    cfg = make_config(
        n_dim=2,
        initial=InitialCondition("unduloid-cosine", {"s": 0.2, "modes": []}),
        n_points=64,
        t_end=0.02,
        rtol=1e-9,
        atol=1e-9,
    )
    traj = integrate(cfg)
    # stationary: barely moves even over the short window
    assert np.max(np.abs(traj.states[-1] - traj.states[0])) < 1e-6
