import math

import numpy as np
import pytest

from torusbreak.trigpoly import (PeriodicFn, TrigPoly, bump, cosine,
                                 constant, jackson, holder_norm,
                                 bernstein_verify, mul_1d)
from torusbreak.errors import DomainError, ApproximationQualityError

TWO_PI = 2 * math.pi
GRID4 = TWO_PI * np.arange(10_000) / 10_000


def fd_second(f, x, h=1e-4):
    return (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2


# ---------------------------------------------------------------------------
# bump

def test_bump_peak_and_support():
    b = bump(0.5)
    assert abs(b.value(0.0) - math.sqrt(2.0)) < 1e-12
    vals = b.value(np.array([0.5, -0.5, 1.0, -2.0, math.pi]))
    assert np.all(vals == 0.0)
    # periodicity by construction
    assert abs(b.value(0.3) - b.value(0.3 + TWO_PI)) < 1e-15


def test_bump_rejects_bad_radius():
    with pytest.raises(DomainError):
        bump(0.0)
    with pytest.raises(DomainError):
        bump(4.0)


def test_bump_c2_scaling_via_finite_differences():
    # independent oracle: centered finite differences on a fine grid
    def c2_estimate(R):
        x = np.linspace(-R * 0.999, R * 0.999, 4001)
        f = bump(R)
        h = R * 1e-4
        d1 = (f.value(x + h) - f.value(x - h)) / (2 * h)
        d2 = (f.value(x + h) - 2 * f.value(x) + f.value(x - h)) / h ** 2
        return (np.max(np.abs(f.value(x))) + np.max(np.abs(d1))
                + np.max(np.abs(d2)))

    ratio = c2_estimate(0.25) / c2_estimate(0.5)
    assert abs(ratio - 4.0) < 0.3 * 4.0


def test_bump_derivatives_match_finite_differences():
    b = bump(0.7)
    x = np.linspace(-0.6, 0.6, 13)
    h = 1e-5
    fd1 = (b.value(x + h) - b.value(x - h)) / (2 * h)
    assert np.max(np.abs(fd1 - b.deriv_values(x, 1))) < 1e-6
    fd2 = (b.value(x + h) - 2 * b.value(x) + b.value(x - h)) / h ** 2
    assert np.max(np.abs(fd2 - b.deriv_values(x, 2))) < 1e-4


def test_bump_high_derivative_against_sympy():
    import sympy as sp
    u = sp.symbols("u")
    expr = sp.sqrt(2) * sp.exp(1 - 1 / (1 - u ** 2))
    R = 0.8
    for order in (5, 12):
        d = sp.diff(expr, u, order)
        fn = sp.lambdify(u, d, "numpy")
        xs = np.array([0.1, 0.3, -0.45])
        expected = fn(xs / R) / R ** order
        got = bump(R).deriv_values(xs, order)
        assert np.max(np.abs(got - expected)) < 1e-6 * np.max(
            np.abs(expected))


def test_periodicfn_combination():
    f = bump(0.5) * 2.0 + cosine() * (-0.5)
    x = np.array([0.1, 1.0])
    expect = 2.0 * bump(0.5).value(x) - 0.5 * np.cos(x)
    assert np.max(np.abs(f.value(x) - expect)) < 1e-14


# ---------------------------------------------------------------------------
# jackson

def test_jackson_constant_exact():
    poly, bound = jackson(constant(3.0), 16, 2)
    assert poly.n_terms == 1
    assert poly.cos_coeffs[0] == 3.0
    assert bound == 0.0
    err = np.max(np.abs(poly.evaluate(GRID4.reshape(-1, 1)) - 3.0))
    assert err < 1e-13


def test_jackson_cos_within_bound():
    poly, bound = jackson(cosine(), 8, 2)
    err = np.max(np.abs(poly.evaluate(GRID4.reshape(-1, 1))
                        - np.cos(GRID4)))
    assert err <= bound
    assert poly.degree <= 8


def test_jackson_rate_bump_kappa2():
    f = bump(1.0)
    fx = f.value(GRID4)
    errs = []
    for M in (16, 32, 64):
        g, bound = jackson(f, M, 2)
        e = np.max(np.abs(g.evaluate(GRID4.reshape(-1, 1)) - fx))
        assert e <= bound
        assert g.degree <= M
        errs.append(e)
    slope = np.polyfit(np.log([16, 32, 64]), np.log(errs), 1)[0]
    assert abs(slope - (-2.0)) < 0.25 * 2.0


def test_jackson_linearity():
    f1, f2 = bump(1.0), bump(0.7)
    combo = f1 * 2.0 + f2 * (-0.5)
    ga, _ = jackson(combo, 32, 2)
    g1, _ = jackson(f1, 32, 2)
    g2, _ = jackson(f2, 32, 2)
    x = GRID4[:512].reshape(-1, 1)
    lhs = ga.evaluate(x)
    rhs = 2.0 * g1.evaluate(x) - 0.5 * g2.evaluate(x)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_jackson_preconditions():
    with pytest.raises(DomainError):
        jackson(bump(1.0), 0, 2)
    with pytest.raises(DomainError):
        jackson(bump(1.0), 8, 1)
    rough = PeriodicFn(lambda order: (lambda x: np.cos(x)), 1)
    with pytest.raises(DomainError):
        jackson(rough, 8, 2)


# ---------------------------------------------------------------------------
# holder_norm

def test_holder_norm_cos_integers():
    assert abs(holder_norm(cosine(), 0).value - 1.0) < 1e-12
    assert abs(holder_norm(cosine(), 1).value - 2.0) < 1e-12
    tp = TrigPoly.from_terms(1, [[1]], [1.0], [0.0])
    assert abs(holder_norm(tp, 0).value - 1.0) < 1e-12
    assert abs(holder_norm(tp, 1).value - 2.0) < 1e-12


def test_holder_norm_cos_fractional():
    # oracle: seminorm sup of 2 sin(h/2)/sqrt(h); the stationary point
    # solves h = tan(h/2), h ~ 2.331, value ~ 1.20367
    h = np.linspace(1e-6, math.pi, 2_000_001)
    semi = np.max(2.0 * np.sin(h / 2.0) / np.sqrt(h))
    target = 2.0 + semi
    got = holder_norm(cosine(), 1.5).value
    assert abs(got - target) < 0.01 * target
    assert abs(got - 3.2037) < 0.01 * 3.2037


def test_holder_norm_monotone_in_r():
    f = bump(1.0)
    vals = [holder_norm(f, r).value for r in (0, 1, 2, 3)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_holder_norm_matches_grid_sup():
    tp, _ = jackson(bump(1.0), 16, 2)
    n0 = holder_norm(tp, 0).value
    sup = np.max(np.abs(tp.evaluate(GRID4.reshape(-1, 1))))
    assert n0 >= sup - 1e-12
    assert abs(n0 - sup) < 1e-6


def test_holder_norm_grid_refinement_monotone():
    f = bump(0.9)
    v1 = holder_norm(f, 0, grid=256).value
    v2 = holder_norm(f, 0, grid=512).value
    v3 = holder_norm(f, 0, grid=1024).value
    assert v1 <= v2 + 1e-15 <= v3 + 2e-15


def test_holder_norm_preconditions():
    with pytest.raises(DomainError):
        holder_norm(cosine(), 1, grid=32)
    rough = PeriodicFn(lambda order: (lambda x: np.cos(x)), 1)
    with pytest.raises(DomainError):
        holder_norm(rough, 2)


# ---------------------------------------------------------------------------
# bernstein

def test_bernstein_extremal_equality():
    tp = TrigPoly.from_terms(1, [[8]], [1.0], [0.0])
    rep = bernstein_verify(tp, 1)
    assert rep["pass"]
    assert abs(rep["lhs"] - 8.0) < 1e-9
    assert abs(rep["rhs"] - 8.0) < 1e-9


def test_bernstein_constant():
    rep = bernstein_verify(TrigPoly.const(1, 5.0), 1)
    assert rep["pass"]
    assert rep["lhs"] == 0.0


def test_bernstein_jackson_output():
    g, _ = jackson(bump(1.0), 32, 2)
    assert bernstein_verify(g, 2)["pass"]


def test_bernstein_rejects_zero():
    with pytest.raises(DomainError):
        bernstein_verify(TrigPoly.zero(1), 1)


# ---------------------------------------------------------------------------
# TrigPoly algebra

def test_trigpoly_derivative_exact_vs_fd():
    tp = TrigPoly.from_terms(1, [[3], [7]], [0.5, -0.2], [0.1, 0.3])
    d = tp.derivative((1,))
    x = np.linspace(0.0, TWO_PI, 37).reshape(-1, 1)
    errs = []
    for h in (1e-3, 5e-4):
        fd = (tp.evaluate(x + h) - tp.evaluate(x - h)) / (2 * h)
        errs.append(np.max(np.abs(fd - d.evaluate(x))))
    # central differences converge at second order to the exact derivative
    assert errs[1] < errs[0] * 0.3
    assert errs[0] < 1e-4


def test_trigpoly_mul_identity():
    c = TrigPoly.from_terms(1, [[1]], [1.0], [0.0])
    prod = mul_1d(c, c)
    terms = {tuple(f): (a, b) for f, a, b in
             zip(prod.freqs, prod.cos_coeffs, prod.sin_coeffs)}
    assert abs(terms[(0,)][0] - 0.5) < 1e-15
    assert abs(terms[(2,)][0] - 0.5) < 1e-15


def test_trigpoly_canonicalize_merges_and_signs():
    tp = TrigPoly.from_terms(1, [[2], [-2]], [1.0, 1.0], [0.5, 0.5])
    # -2 flips to +2 with negated sine part: sines cancel, cosines add
    assert tp.n_terms == 1
    assert tp.freqs[0, 0] == 2
    assert abs(tp.cos_coeffs[0] - 2.0) < 1e-15
    assert abs(tp.sin_coeffs[0]) < 1e-15


def test_trigpoly_degree_euclidean():
    tp = TrigPoly.from_terms(2, [[3, 4], [1, 0]], [1.0, 1.0], [0.0, 0.0])
    assert tp.degree == 5
    assert abs(tp.degree_euclid - 5.0) < 1e-12


def test_trigpoly_text_roundtrip_bitstable():
    g, _ = jackson(bump(1.0), 24, 2)
    text = g.to_text()
    back = TrigPoly.from_text(text)
    assert back.to_text() == text
    x = GRID4[:256].reshape(-1, 1)
    assert np.max(np.abs(back.evaluate(x) - g.evaluate(x))) == 0.0


def test_trigpoly_grid_values_match_evaluate():
    tp = TrigPoly.from_terms(1, [[0], [3]], [0.3, -1.1], [0.0, 0.7])
    n = 256
    grid_vals = tp.grid_values_1d(n)
    x = TWO_PI * np.arange(n) / n
    direct = tp.evaluate(x.reshape(-1, 1))
    assert np.max(np.abs(grid_vals - direct)) < 1e-12

    tp2 = TrigPoly.from_terms(2, [[1, 2], [0, 1]], [1.0, 0.5], [0.2, 0.0])
    vals = tp2.grid_values_2d(64)
    xg = TWO_PI * np.arange(64) / 64
    X, Y = np.meshgrid(xg, xg, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    direct = tp2.evaluate(pts).reshape(64, 64)
    assert np.max(np.abs(vals - direct)) < 1e-12


def test_jackson_odd_kappa():
    f = bump(1.0)
    fx = f.value(GRID4)
    errs = []
    for M in (16, 32, 64):
        g, bound = jackson(f, M, 3)
        e = np.max(np.abs(g.evaluate(GRID4.reshape(-1, 1)) - fx))
        assert e <= bound
        errs.append(e)
    slope = np.polyfit(np.log([16, 32, 64]), np.log(errs), 1)[0]
    # the odd-order iterate lands between the adjacent even rates
    assert -4.5 < slope < -1.5


def test_holder_norm_2d_product():
    tp = TrigPoly.from_terms(2, [[1, 1], [1, -1]], [0.5, 0.5], [0.0, 0.0])
    # cos q1 cos q2: each first partial has sup 1
    assert abs(holder_norm(tp, 0).value - 1.0) < 1e-10
    assert abs(holder_norm(tp, 1).value - 3.0) < 1e-9


def test_holder_norm_2d_analytic_fallback():
    tp = TrigPoly.from_terms(2, [[4100, 0], [0, 1]], [0.25, 1.0],
                             [0.0, 0.0])
    rep = holder_norm(tp, 0)
    assert rep.method == "analytic"
    assert rep.value >= 1.24
