import math

import numpy as np
import pytest

from torusbreak.pendulum import pendulum_bvp, action_profile
from torusbreak.dynamics import (free_system, pendulum_system,
                                 drift_field_system, shear_channel_system,
                                 rotation_vector, pendulum_rotation_period)
from torusbreak.minimize import (minimize_path, discrete_action,
                                 discrete_gradient, pure_pendulum_model,
                                 integrable_model, lagrangian_from,
                                 LagrangianModel)
from torusbreak.errors import DomainError, BvpError, MinimizationError, \
    IntegrationError

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# pendulum boundary-value problems

def test_bvp_free_motion():
    p = pendulum_bvp(0.0, 0.0, TWO_PI, 0.0, 5.0)
    assert p.action == pytest.approx(2 * math.pi ** 2 / 5.0, rel=1e-14)


def test_bvp_separatrix_action():
    # oracle: int_0^{2 pi} 2 sin(q/2) dq = 8
    p = pendulum_bvp(1.0, 0.0, TWO_PI, 0.0, 40.0)
    assert abs(p.action - 8.0) <= 1e-4 * 8.0
    assert abs(p.action_quadrature - 8.0) <= 1e-6 * 8.0


def test_bvp_energy_conservation():
    p = pendulum_bvp(1.0, 0.0, TWO_PI, 0.0, 12.0)
    assert p.energy_residual(1.0) < 1e-8


def test_bvp_time_translation_invariance():
    a = pendulum_bvp(1.0, 0.0, TWO_PI, 0.0, 17.0).action
    b = pendulum_bvp(1.0, 0.0, TWO_PI, 4.0, 21.0).action
    assert a == b


def test_bvp_preconditions_and_errors():
    with pytest.raises(DomainError):
        pendulum_bvp(1.0, 0.0, 3 * TWO_PI, 0.0, 10.0)
    with pytest.raises(DomainError):
        pendulum_bvp(1.0, 0.0, TWO_PI, 5.0, 5.0)
    with pytest.raises(DomainError):
        pendulum_bvp(1.0, 1.0, 1.0, 0.0, 5.0)
    with pytest.raises(BvpError):
        # beyond the longest flight time representable in energy space
        pendulum_bvp(1.0, 0.0, TWO_PI, 0.0, 1e200)


def test_action_profile_symmetry_and_midpoint():
    grid = np.linspace(0.0, 20.0, 43)[1:-1]
    prof = action_profile(1.0, 0.0, 20.0, grid)
    assert prof.unimodal
    assert prof.argmin_index == 20
    assert np.max(np.abs(prof.actions - prof.actions[::-1])) < 1e-8


def test_action_profile_flattens_at_lower_speed():
    # near-midpoint increments shrink as the traversal slows down
    gaps = []
    for T in (12.0, 18.0, 26.0):
        s = np.array([T / 2 - 0.5, T / 2, T / 2 + 0.5])
        prof = action_profile(1.0, 0.0, T, s)
        gaps.append(prof.actions[0] - prof.actions[1])
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_action_profile_rejects_bad_grid():
    with pytest.raises(DomainError):
        action_profile(1.0, 0.0, 10.0, [0.0, 5.0])


# ---------------------------------------------------------------------------
# integrators and fixtures

def test_linear_flow_exact():
    sys0 = free_system(2)
    z0 = np.array([0.1, 0.2, 1.0, 0.618])
    tr = sys0.integrate(z0, 10.0, 0.01)
    est, err = rotation_vector(tr)
    assert np.max(np.abs(est - np.array([1.0, 0.618]))) < 1e-12
    assert tr.energy_drift == 0.0


def test_pendulum_energy_drift():
    tr = pendulum_system(1.0).integrate(np.array([0.5, 2.5]), 100.0, 1e-3)
    assert tr.energy_drift < 1e-6


def test_rotation_vector_against_period_oracle():
    tr = pendulum_system(1.0).integrate(np.array([0.0, 2.4]), 80.0, 1e-3)
    est, err = rotation_vector(tr)
    mean_speed = TWO_PI / pendulum_rotation_period(1.0, tr.energies[0])
    assert abs(est[0] - mean_speed) <= err
    assert abs(est[0] - mean_speed) <= 2.0 / 80.0 * np.max(
        np.abs(tr.momenta))


def test_rotation_error_bar_halves_with_horizon():
    sys1 = pendulum_system(1.0)
    tr1 = sys1.integrate(np.array([0.0, 2.4]), 40.0, 1e-2)
    tr2 = sys1.integrate(np.array([0.0, 2.4]), 80.0, 1e-2)
    _, e1 = rotation_vector(tr1)
    _, e2 = rotation_vector(tr2)
    assert e2 == pytest.approx(e1 / 2.0, rel=0.05)


def test_drift_field_zero_section_machine_precision():
    sysm = drift_field_system((1.0, 0.618033988749895))
    z0 = np.array([1.3, 2.1, 0.0, 0.0])
    tr = sysm.integrate(z0, 100.0, 0.01)
    assert np.max(np.abs(tr.momenta)) == 0.0


def test_shear_channel_torus_preserved():
    sysc = shear_channel_system()
    psi = lambda t: 0.5 + 0.25 * math.sin(t)
    for th2 in (0.3, 1.7, 4.0):
        z0 = np.array([0.4, th2, psi(th2), 0.0])
        tr = sysc.integrate(z0, 100.0, 0.01)
        res1 = np.abs(tr.momenta[:, 0]
                      - (0.5 + 0.25 * np.sin(tr.positions[:, 1])))
        assert np.max(res1) < 1e-8
        assert np.max(np.abs(tr.momenta[:, 1])) < 1e-8


def test_implicit_midpoint_divergence_reported():
    sysm = drift_field_system((1.0, 0.618))
    sysm.fp_max_iter = 1
    with pytest.raises(IntegrationError):
        sysm.integrate(np.array([0.3, 0.4, 0.5, 0.1]), 1.0, 0.5)


# ---------------------------------------------------------------------------
# discrete minimization

def test_minimize_free_straight_line():
    m = integrable_model(2)
    p = minimize_path(m, (0.0, 0.0), (1.0, 2.0), 0.0, 5.0, 64)
    assert abs(p.action - 5.0 / 10.0) < 1e-8
    assert p.grad_norm < 1e-10
    assert np.max(np.abs(p.rotation_estimate
                         - np.array([0.2, 0.4]))) < 1e-12


def test_minimize_gradient_vs_finite_differences(rng):
    m = pure_pendulum_model(0.7)
    K = 48
    times = np.linspace(0, 6, K + 1)
    pts = np.linspace(0, TWO_PI, K + 1)[:, None] \
        + 0.1 * rng.standard_normal((K + 1, 1))
    g = discrete_gradient(m, times, pts)
    eps = 1e-7
    gfd = np.zeros_like(g)
    for j in range(1, K):
        pp = pts.copy()
        pp[j, 0] += eps
        pm = pts.copy()
        pm[j, 0] -= eps
        gfd[j - 1, 0] = (discrete_action(m, times, pp)
                         - discrete_action(m, times, pm)) / (2 * eps)
    rel = np.max(np.abs(g - gfd)) / np.max(np.abs(g))
    assert rel < 1e-5


def test_minimize_pendulum_cross_validation():
    p = minimize_path(pure_pendulum_model(1.0), (0.0,), (TWO_PI,),
                      0.0, 10.0, 8192)
    bvp = pendulum_bvp(1.0, 0.0, TWO_PI, 0.0, 10.0)
    rel = abs(p.action - bvp.action_quadrature) / bvp.action_quadrature
    assert rel < 1e-6
    assert p.action >= bvp.action_quadrature - 1e-6


def test_minimize_translation_invariances(golden_spec):
    model = lagrangian_from(golden_spec)
    times = np.linspace(0.0, 7.0, 33)
    rng = np.random.default_rng(5)
    pts = np.cumsum(0.1 * rng.standard_normal((33, 2)), axis=0)
    a0 = discrete_action(model, times, pts)
    a_time = discrete_action(model, times + 11.0, pts)
    a_latt = discrete_action(model, times, pts + TWO_PI * np.array([2, -1]))
    assert a_time == a0
    assert abs(a_latt - a0) < 1e-12 * max(1.0, abs(a0))


def test_minimize_preconditions():
    m = integrable_model(2)
    with pytest.raises(DomainError):
        minimize_path(m, (0, 0), (1, 1), 0.0, 1.0, 8)
    with pytest.raises(DomainError):
        minimize_path(m, (0, 0), (1, 1), 1.0, 0.5, 32)
    with pytest.raises(DomainError):
        minimize_path(m, (0, 0, 0), (1, 1, 1), 0.0, 1.0, 32)


def test_minimize_nonconvergence_error():
    m = pure_pendulum_model(1.0)
    with pytest.raises(MinimizationError) as err:
        minimize_path(m, (0.0,), (TWO_PI,), 0.0, 10.0, 64,
                      max_newton=0, max_gradient=0)
    assert err.value.residual_history


def test_legendre_duality(golden_spec, rng):
    model = lagrangian_from(golden_spec)
    q = rng.uniform(0, TWO_PI, size=(100, 2))
    qdot = rng.standard_normal((100, 2))
    p = model.momentum(qdot)
    resid = model.hamiltonian(q, p) + model.lagrangian(q, qdot) \
        - np.sum(p * qdot, axis=1)
    assert np.max(np.abs(resid)) < 1e-10


def test_lagrangian_zero_at_origin(golden_spec):
    model = lagrangian_from(golden_spec)
    val = model.lagrangian(np.zeros((1, 2)), np.zeros((1, 2)))[0]
    assert abs(val) < 1e-14


def test_change_of_variables_action_oracle(golden_spec):
    # action of a sampled curve under |xdot|^2/2 + P_N equals the action
    # of its K-image under the resonant-coordinate Lagrangian
    spec = golden_spec
    model = lagrangian_from(spec)
    Kmat = spec.frame.matrix().astype(float)
    ts = np.linspace(0.0, 3.0, 2001)
    x = np.stack([0.3 * np.sin(ts) + 0.05 * ts,
                  0.2 * np.cos(2 * ts)], axis=1)
    h = ts[1] - ts[0]
    mids_x = 0.5 * (x[1:] + x[:-1])
    vel_x = np.diff(x, axis=0) / h
    lag_x = 0.5 * np.sum(vel_x ** 2, axis=1) + spec.pn_value(mids_x)
    action_x = float(np.sum(lag_x) * h)
    q = x @ Kmat.T
    action_q = discrete_action(model, ts, q)
    assert action_x == pytest.approx(action_q, rel=1e-10)


def test_lagrangian_split_matches_sum(golden_spec, rng):
    # L = scale * (A + B) pointwise, both via the accessors and directly
    model = lagrangian_from(golden_spec)
    p = golden_spec.params
    q = rng.uniform(0, TWO_PI, size=(50, 2))
    qd = rng.standard_normal((50, 2))
    A = 0.5 * qd[:, 0] ** 2 \
        + p.pendulum_strength * (1.0 - np.cos(q[:, 0]))
    w2 = model.kinetic_weights[1]
    v = golden_spec.v_factors.value(q[:, 0], q[:, 1])
    B = 0.5 * w2 * qd[:, 1] ** 2 + v
    expect = model.overall_scale * (A + B)
    got = model.lagrangian(q, qd)
    assert np.max(np.abs(got - expect)) < 1e-12
    acc = model.overall_scale * (model.pendulum_part(q[:, 0], qd[:, 0])
                                 + model.transverse_part(q, qd))
    assert np.max(np.abs(acc - expect)) < 1e-12


def test_discrete_path_invariants(golden_spec):
    from torusbreak.destruction import _minimize_warm
    model = lagrangian_from(golden_spec)
    start = np.array([0.0, 0.3])
    end = np.array([TWO_PI, 0.3 + 10 * TWO_PI])
    path = _minimize_warm(model, start, end, 0.0, 9.0, 64)
    # the stored action is the midpoint-rule sum of the stored points
    recomputed = discrete_action(model, path.times, path.points)
    assert recomputed == pytest.approx(path.action, rel=1e-14)
    assert path.grad_norm < 1e-10
    expect_rot = (path.points[-1] - path.points[0]) / 9.0
    assert np.max(np.abs(path.rotation_estimate - expect_rot)) < 1e-14
