"""Acceptance suite.

One test per criterion, each printing a PASS/FAIL line (run with -s to
see them live).  Criteria are asserted at their stated tolerances; the
known-red desk-scale destruction criterion is asserted faithfully and
documents its measured margins on failure.
"""

import math
import time

import numpy as np
import pytest

from torusbreak.diophantine import FrequencyVector, preset, \
    find_resonances, small_denominator
from torusbreak.frames import (orthogonal_partner, complete_frame,
                               symplectic_lift)
from torusbreak.errors import PartnerQualityError
from torusbreak.trigpoly import bump, jackson, bernstein_verify
from torusbreak.perturbation import norm_scaling_report
from torusbreak.pendulum import pendulum_bvp, action_profile
from torusbreak.dynamics import drift_field_system, shear_channel_system
from torusbreak.minimize import (minimize_path, discrete_action,
                                 discrete_gradient, integrable_model,
                                 pure_pendulum_model)
from torusbreak.destruction import destruction_test, integrable_twin

TWO_PI = 2 * math.pi
GOLDEN_SEQ = [(-3, 5), (5, -8), (-8, 13), (13, -21)]


def report(n, ok, detail):
    print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="module")
def scaling(golden_omega):
    return norm_scaling_report(golden_omega, 0.0, 0.1, [0, 2],
                               GOLDEN_SEQ, keep_specs=True)


@pytest.fixture(scope="module")
def jackson_results():
    f = bump(1.0)
    grid = TWO_PI * np.arange(10_000) / 10_000
    fx = f.value(grid)
    out = {}
    for kappa in (2, 4):
        rows = []
        for M in (16, 32, 64, 128):
            poly, bound = jackson(f, M, kappa)
            err = float(np.max(np.abs(
                poly.evaluate(grid.reshape(-1, 1)) - fx)))
            rows.append((M, poly, err, bound))
        out[kappa] = rows
    return out


def test_criterion_1_symplectic_exactness(rng):
    t0 = time.time()
    made = 0
    checked = []
    attempts = 0
    while made < 50 and attempts < 500:
        attempts += 1
        d = (2, 3, 4)[made % 3]
        k = tuple(int(v) for v in rng.integers(-5, 6, size=d))
        if all(v == 0 for v in k):
            continue
        om = preset("spread-d", d=d)
        try:
            if d == 2:
                kp = orthogonal_partner(k, om)
            else:
                kp = orthogonal_partner(k, om, search_radius=1.5)
            frame = complete_frame(k, kp)
        except PartnerQualityError:
            continue
        lift = symplectic_lift(frame)
        checked.append(lift.symplectic_check())
        made += 1
    elapsed = time.time() - t0
    ok = made == 50 and all(checked) and elapsed < 10.0
    assert report(1, ok, f"{made} frames, all exact={all(checked)}, "
                         f"{elapsed:.1f}s"), "symplectic exactness"


def test_criterion_2_dirichlet_property():
    t0 = time.time()
    rng = np.random.default_rng(42)
    count_ok = 0
    for _ in range(100):
        om = FrequencyVector(tuple(rng.uniform(0.5, 1.5, size=2)))
        hits = find_resonances(om, 1000, C=math.sqrt(2.0))
        if not hits:
            break
        om2 = om.with_precision(2 * om.precision)
        for h in hits:
            v = small_denominator(om2, h.k)
            if not abs(v) < math.sqrt(2.0) / h.norm:
                break
        else:
            count_ok += 1
            continue
        break
    elapsed = time.time() - t0
    ok = count_ok == 100 and elapsed < 60.0
    assert report(2, ok, f"{count_ok}/100 omegas verified at doubled "
                         f"precision, {elapsed:.1f}s"), "Dirichlet"


def test_criterion_3_jackson_rate(jackson_results):
    details = []
    ok = True
    for kappa, rows in jackson_results.items():
        errs = [r[2] for r in rows]
        Ms = [r[0] for r in rows]
        slope = float(np.polyfit(np.log(Ms), np.log(errs), 1)[0])
        within = abs(slope - (-kappa)) <= 0.25 * kappa
        bounded = all(err <= bound for _, _, err, bound in rows)
        ok &= within and bounded
        details.append(f"kappa={kappa}: slope={slope:.3f} "
                       f"(target -{kappa}), bounds hold={bounded}")
    assert report(3, ok, "; ".join(details)), "Jackson rate"


def test_criterion_4_bernstein(jackson_results, scaling):
    polys = [r[1] for rows in jackson_results.values() for r in rows]
    for spec in scaling.specs:
        polys.append(spec.v_factors.C)
        polys.append(spec.v_factors.B)
    results = [bernstein_verify(p, 2)["pass"] for p in polys
               if p.n_terms > 0]
    ok = all(results)
    assert report(4, ok, f"{len(results)} polynomials checked"), "Bernstein"


def test_criterion_5_norm_scaling(scaling):
    s0 = scaling.slopes[0]
    s2 = scaling.slopes[2]
    ok0 = abs(s0 - (-3.9)) <= 0.10 * 3.9
    ok2 = abs(s2 - (-1.9)) <= 0.15 * 1.9
    ok = ok0 and ok2
    assert report(5, ok, f"C^0 slope {s0:.4f} (target -3.9), "
                         f"C^2 slope {s2:.4f} (target -1.9)"), "scaling"


def test_criterion_6_degree_budget(scaling, golden_spec):
    rows_ok = all(row.N_measured <= row.N_budget * (1 + 1e-12)
                  for row in scaling.rows)
    spec_ok = golden_spec.params.N_measured \
        <= golden_spec.params.N_budget * (1 + 1e-12)
    flat_ok = True
    if golden_spec.P_N is not None:
        flat_ok = golden_spec.P_N.degree_euclid \
            <= golden_spec.params.N_budget * (1 + 1e-12)
    ok = rows_ok and spec_ok and flat_ok
    assert report(6, ok, f"{len(scaling.rows) + 1} builds within "
                         f"(2M+1)|k|"), "degree budget"


def test_criterion_7_pendulum_separatrix():
    t0 = time.time()
    path = pendulum_bvp(1.0, 0.0, TWO_PI, 0.0, 40.0)
    rel = abs(path.action - 8.0) / 8.0
    elapsed = time.time() - t0
    ok = rel <= 1e-4 and elapsed < 5.0
    assert report(7, ok, f"action={path.action:.8f}, rel gap {rel:.2e}, "
                         f"{elapsed:.1f}s"), "separatrix action"


def test_criterion_8_action_profile():
    grid = np.linspace(0.0, 20.0, 43)[1:-1]
    prof = action_profile(1.0, 0.0, 20.0, grid)
    sym = float(np.max(np.abs(prof.actions - prof.actions[::-1])))
    mid = len(grid) // 2
    ok = prof.unimodal and abs(prof.argmin_index - mid) <= 1 and sym < 1e-8
    assert report(8, ok, f"unimodal={prof.unimodal}, argmin at "
                         f"{prof.argmin_index} (mid {mid}), symmetry "
                         f"residual {sym:.2e}"), "action profile"


def test_criterion_9_variational_correctness(rng):
    # V = 0 minimizer
    p = minimize_path(integrable_model(2), (0.0, 0.0), (2.0, -1.0),
                      0.0, 4.0, 128)
    free_ok = abs(p.action - 5.0 / 8.0) < 1e-8

    # gradient against central finite differences
    m = pure_pendulum_model(0.8)
    K = 64
    times = np.linspace(0, 7, K + 1)
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
    grad_rel = float(np.max(np.abs(g - gfd)) / np.max(np.abs(g)))

    # shooting cross-validation
    mp = minimize_path(pure_pendulum_model(1.0), (0.0,), (TWO_PI,),
                       0.0, 10.0, 8192)
    bvp = pendulum_bvp(1.0, 0.0, TWO_PI, 0.0, 10.0)
    cross_rel = abs(mp.action - bvp.action_quadrature) \
        / bvp.action_quadrature

    ok = free_ok and grad_rel < 1e-5 and cross_rel < 1e-6
    assert report(9, ok, f"free ok={free_ok}, grad fd rel {grad_rel:.2e},"
                         f" cross-validation rel {cross_rel:.2e}"), \
        "variational correctness"


def test_criterion_10_destruction_evidence(golden_spec, golden_push):
    """Desk-scale S0-avoidance criterion, asserted as specified.

    Known red: at every parameter choice passing the construction's own
    quality gates, the coupling reward (~1e-18 in action) sits far
    below both the solver tolerance and the pendulum retiming cost, so
    measured minimizers cross S0 and the forced-path gap is not
    negative with margin.  The negative control (integrable fixture
    must report "enters") passes.
    """
    t0 = time.time()
    rep = destruction_test(golden_spec, golden_push.omega_new,
                           trials=32, K=512, seed=0)
    elapsed = time.time() - t0
    tol = 10.0 * rep.solver_tolerance
    clears = not any(r.entered for r in rep.per_trial)
    gaps_ok = all(r.action_gap < -tol for r in rep.per_trial)
    speed_ok = rep.speed_deviation <= 10.0 * rep.speed_bound
    twin = destruction_test(golden_spec, golden_push.omega_new,
                            trials=8, K=256,
                            model=integrable_twin(golden_spec), seed=0)
    control_ok = twin.verdict == "enters"
    ok = (rep.verdict == "avoids" and clears and gaps_ok and speed_ok
          and control_ok and elapsed < 1800.0)
    report(10, ok,
           f"verdict={rep.verdict} (need avoids), clears={clears}, "
           f"worst gap={rep.action_gap:.3e} (need < {-tol:.1e}), "
           f"speed dev {rep.speed_deviation:.2e} <= "
           f"{10 * rep.speed_bound:.2e}={speed_ok}, integrable control="
           f"{twin.verdict}, {elapsed:.0f}s, mechanism_resolvable="
           f"{rep.mechanism_resolvable}")
    assert speed_ok and control_ok, "speed bound or integrable control"
    assert rep.verdict == "avoids" and clears and gaps_ok, (
        "desk-scale destruction evidence (known red: coupling reward "
        "~1e-18 action units is below solver resolution; minimizers "
        "cross S0 and the through/detour gap cannot reach the "
        "required margin)")


def test_criterion_11_invariant_torus_fixtures():
    sysm = drift_field_system((1.0, 0.618033988749895))
    tr = sysm.integrate(np.array([1.3, 2.1, 0.0, 0.0]), 100.0, 0.01)
    mane_res = float(np.max(np.abs(tr.momenta)))

    sysc = shear_channel_system()
    psi = lambda t: 0.5 + 0.25 * math.sin(t)
    worst = 0.0
    for th2 in (0.25, 1.9, 3.8, 5.5):
        z0 = np.array([0.4, th2, psi(th2), 0.0])
        tr = sysc.integrate(z0, 100.0, 0.01)
        res = np.abs(tr.momenta[:, 0]
                     - (0.5 + 0.25 * np.sin(tr.positions[:, 1])))
        worst = max(worst, float(res.max()),
                    float(np.max(np.abs(tr.momenta[:, 1]))))
    ok = mane_res <= 1e-14 and worst < 1e-8
    assert report(11, ok, f"drift-field zero-section residual "
                          f"{mane_res:.1e} (machine), shear-channel "
                          f"torus residual {worst:.1e}"), "fixtures"
