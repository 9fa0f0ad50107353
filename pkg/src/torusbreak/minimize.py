"""Discrete action minimization for the resonant-coordinate Lagrangian.

The Lagrangian is quadratic-kinetic with a position-only potential

    L(q, qdot) = scale * ( sum_i w_i qdot_i^2 / 2
                           + g_p (1 - cos q1) + v(q1, q2) ),

so the midpoint-rule discrete action has an exact gradient and a block
tridiagonal Hessian with no velocity-position coupling.  Minimization
runs gradient descent with backtracking first, then damped Newton on
the sparse system, and accepts only when the discrete Euler-Lagrange
residual is at solver tolerance.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, MinimizationError

RESIDUAL_TOL = 1e-10


def _stacked_deriv_coeffs(poly):
    """Coefficient stacks evaluating (f, f', f'') with shared phases.

    Column j of the result of cos(phase) @ A + sin(phase) @ B is the
    j-th derivative.
    """
    nu = poly.freqs[:, 0].astype(float)
    a = poly.cos_coeffs
    b = poly.sin_coeffs
    A = np.stack([a, b * nu, -a * nu * nu], axis=1)
    B = np.stack([b, -a * nu, -b * nu * nu], axis=1)
    return nu, A, B


class LagrangianModel:
    """Kinetic weights, pendulum strength, coupling factors, scale."""

    def __init__(self, kinetic_weights, pendulum_strength=0.0,
                 v_factors=None, overall_scale=1.0):
        self.kinetic_weights = np.asarray(kinetic_weights, dtype=float)
        if np.any(self.kinetic_weights <= 0):
            raise DomainError("kinetic weights must be positive")
        self.d = len(self.kinetic_weights)
        self.pendulum_strength = float(pendulum_strength)
        self.v_factors = v_factors
        self.overall_scale = float(overall_scale)
        if v_factors is not None:
            self._vs = v_factors.scale
            self._nu1, self._A1, self._B1 = _stacked_deriv_coeffs(
                v_factors.C)
            self._nu2, self._A2, self._B2 = _stacked_deriv_coeffs(
                v_factors.B)

    # ---- pointwise pieces -------------------------------------------

    def _factor_values(self, q, nu, Acoef, Bcoef):
        """(f, f', f'') of a 1-d factor, sharing one cos/sin pass."""
        phase = np.asarray(q, dtype=float)[:, None] * nu[None, :]
        return np.cos(phase) @ Acoef + np.sin(phase) @ Bcoef

    def _v_parts(self, q1, q2, order):
        """(v, v_1, v_2[, v_11, v_12, v_22]) on arrays q1, q2."""
        if self.v_factors is None:
            z = np.zeros_like(q1)
            return (z, z, z) if order == 1 else (z, z, z, z, z, z)
        Cv = self._factor_values(q1, self._nu1, self._A1, self._B1)
        Bv = self._factor_values(q2, self._nu2, self._A2, self._B2)
        s = self._vs
        if order == 1:
            return (s * Cv[:, 0] * Bv[:, 0], s * Cv[:, 1] * Bv[:, 0],
                    s * Cv[:, 0] * Bv[:, 1])
        return (s * Cv[:, 0] * Bv[:, 0], s * Cv[:, 1] * Bv[:, 0],
                s * Cv[:, 0] * Bv[:, 1], s * Cv[:, 2] * Bv[:, 0],
                s * Cv[:, 1] * Bv[:, 1], s * Cv[:, 0] * Bv[:, 2])

    def potential(self, q):
        """scale * (g_p (1 - cos q1) + v(q1, q2)) on points (n, d)."""
        q = np.atleast_2d(q)
        out = self.pendulum_strength * (1.0 - np.cos(q[:, 0]))
        if self.v_factors is not None:
            v, _, _ = self._v_parts(q[:, 0], q[:, 1], 1)
            out = out + v
        return self.overall_scale * out

    def potential_grad(self, q):
        q = np.atleast_2d(q)
        n = len(q)
        grad = np.zeros((n, self.d))
        grad[:, 0] = self.pendulum_strength * np.sin(q[:, 0])
        if self.v_factors is not None:
            _, v1, v2 = self._v_parts(q[:, 0], q[:, 1], 1)
            grad[:, 0] += v1
            grad[:, 1] += v2
        return self.overall_scale * grad

    def potential_hess(self, q):
        """(n, d, d) Hessians of the potential."""
        q = np.atleast_2d(q)
        n = len(q)
        H = np.zeros((n, self.d, self.d))
        H[:, 0, 0] = self.pendulum_strength * np.cos(q[:, 0])
        if self.v_factors is not None:
            _, _, _, v11, v12, v22 = self._v_parts(q[:, 0], q[:, 1], 2)
            H[:, 0, 0] += v11
            H[:, 0, 1] += v12
            H[:, 1, 0] += v12
            H[:, 1, 1] += v22
        return self.overall_scale * H

    def pendulum_part(self, q1, q1dot):
        """A(q1, q1dot) = q1dot^2/2 + g_p (1 - cos q1), unscaled."""
        q1 = np.asarray(q1, dtype=float)
        q1dot = np.asarray(q1dot, dtype=float)
        return 0.5 * q1dot ** 2 \
            + self.pendulum_strength * (1.0 - np.cos(q1))

    def transverse_part(self, q, qdot):
        """B(q, qdot): transverse kinetic terms plus the coupling."""
        q = np.atleast_2d(q)
        qdot = np.atleast_2d(qdot)
        out = 0.5 * (qdot[:, 1:] ** 2 @ self.kinetic_weights[1:])
        if self.v_factors is not None:
            v, _, _ = self._v_parts(q[:, 0], q[:, 1], 1)
            out = out + v
        return out

    def lagrangian(self, q, qdot):
        q = np.atleast_2d(q)
        qdot = np.atleast_2d(qdot)
        kin = 0.5 * (qdot ** 2 @ self.kinetic_weights)
        return self.overall_scale * kin + self.potential(q)

    def hamiltonian(self, q, p):
        """Legendre dual: H(q, p) = sum p^2/(2 scale w) - potential."""
        q = np.atleast_2d(q)
        p = np.atleast_2d(p)
        kin = 0.5 * (p ** 2 @ (1.0 / (self.overall_scale
                                      * self.kinetic_weights)))
        return kin - self.potential(q)

    def momentum(self, qdot):
        return self.overall_scale * self.kinetic_weights \
            * np.atleast_2d(qdot)


def pure_pendulum_model(g):
    """One degree of freedom, B identically zero."""
    return LagrangianModel([1.0], pendulum_strength=g)


def integrable_model(d, overall_scale=1.0, weights=None):
    w = np.ones(d) if weights is None else np.asarray(weights, float)
    return LagrangianModel(w, 0.0, None, overall_scale)


def lagrangian_from(spec):
    """Model with weights (1, |k|^2/|k'|^2, |k|^2/|l_i|^2, ...)."""
    frame = spec.frame
    norms = frame.row_norms()
    k2 = norms[0] ** 2
    weights = [1.0] + [k2 / norms[i] ** 2 for i in range(1, frame.d)]
    return LagrangianModel(weights,
                           pendulum_strength=spec.params.pendulum_strength,
                           v_factors=spec.v_factors,
                           overall_scale=spec.params.k_norm ** (-2))


# ---------------------------------------------------------------------------
# discrete path

@dataclass
class DiscretePath:
    times: np.ndarray
    points: np.ndarray          # (K+1, d) lifted positions
    action: float
    grad_norm: float
    rotation_estimate: np.ndarray

    def midpoint_velocities(self):
        dt = np.diff(self.times)[:, None]
        return np.diff(self.points, axis=0) / dt


def discrete_action(model, times, points):
    h = np.diff(times)
    mids = 0.5 * (points[1:] + points[:-1])
    vels = np.diff(points, axis=0) / h[:, None]
    lag = model.lagrangian(mids, vels)
    return float(h @ lag)


def discrete_gradient(model, times, points):
    """Exact gradient of the discrete action w.r.t. interior points."""
    h = np.diff(times)
    mids = 0.5 * (points[1:] + points[:-1])
    vels = np.diff(points, axis=0) / h[:, None]
    Vq = model.potential_grad(mids)
    pmom = model.momentum(vels)
    seg = 0.5 * h[:, None] * Vq          # dS/dq through the midpoint
    grad = seg[1:] + seg[:-1] + pmom[:-1] - pmom[1:]
    return grad                          # (K-1, d)


def _hessian_blocks(model, times, points):
    h = np.diff(times)
    mids = 0.5 * (points[1:] + points[:-1])
    Vqq = model.potential_hess(mids)
    d = model.d
    W = np.diag(model.overall_scale * model.kinetic_weights)
    diag_blocks = []
    off_blocks = []
    K = len(times) - 1
    for j in range(1, K):
        Dj = 0.25 * (h[j - 1] * Vqq[j - 1] + h[j] * Vqq[j]) \
            + (1.0 / h[j - 1] + 1.0 / h[j]) * W
        diag_blocks.append(Dj)
        if j < K - 1:
            Oj = 0.25 * h[j] * Vqq[j] - (1.0 / h[j]) * W
            off_blocks.append(Oj)
    return diag_blocks, off_blocks


def _solve_newton_step(diag_blocks, off_blocks, grad, shift=0.0):
    d = grad.shape[1]
    n = len(diag_blocks)
    rows, cols, vals = [], [], []
    eye = np.eye(d)
    for j, D in enumerate(diag_blocks):
        B = D + shift * eye
        for a in range(d):
            for b in range(d):
                if B[a, b] != 0:
                    rows.append(j * d + a)
                    cols.append(j * d + b)
                    vals.append(B[a, b])
    for j, O in enumerate(off_blocks):
        for a in range(d):
            for b in range(d):
                if O[a, b] != 0:
                    rows.append(j * d + a)
                    cols.append((j + 1) * d + b)
                    vals.append(O[a, b])
                    rows.append((j + 1) * d + b)
                    cols.append(j * d + a)
                    vals.append(O[a, b])
    H = sp.csr_matrix((vals, (rows, cols)), shape=(n * d, n * d))
    try:
        step = spla.spsolve(H, grad.ravel())
    except Exception:
        return None
    if not np.all(np.isfinite(step)):
        return None
    return step.reshape(n, d)


def minimize_path(model, lift_start, lift_end, t_a, t_b, K,
                  max_newton=200, max_gradient=400, initial=None,
                  residual_tol=RESIDUAL_TOL):
    """Minimize the midpoint-rule discrete action between endpoint lifts.

    Endpoint lifts encode the homotopy class.  Descent starts from the
    straight line (or ``initial``), runs backtracking gradient descent,
    then damped Newton; the accepted path has discrete Euler-Lagrange
    residual below ``residual_tol`` in sup norm.
    """
    if K < 16:
        raise DomainError("grid size K must be >= 16")
    if t_b <= t_a:
        raise DomainError("need t_b > t_a")
    start = np.asarray(lift_start, dtype=float)
    end = np.asarray(lift_end, dtype=float)
    if start.shape != (model.d,) or end.shape != (model.d,):
        raise DomainError("endpoint dimension mismatch")
    times = np.linspace(t_a, t_b, K + 1)
    if initial is not None:
        points = np.array(initial, dtype=float)
        if points.shape != (K + 1, model.d):
            raise DomainError("initial path shape mismatch")
        points[0], points[-1] = start, end
    else:
        frac = np.linspace(0.0, 1.0, K + 1)[:, None]
        points = start[None, :] * (1 - frac) + end[None, :] * frac
    history = []

    def residual(grad):
        return float(np.max(np.abs(grad))) if grad.size else 0.0

    action = discrete_action(model, times, points)
    grad = discrete_gradient(model, times, points)
    res = residual(grad)
    history.append(res)

    def gradient_steps(points, action, grad, res, n_steps, step_scale):
        for _ in range(n_steps):
            if res < residual_tol:
                break
            t = step_scale
            for _ in range(25):
                cand = points.copy()
                cand[1:-1] -= t * grad
                a_new = discrete_action(model, times, cand)
                if a_new < action - 1e-14 * abs(action):
                    break
                t *= 0.5
            else:
                break
            points, action = cand, a_new
            step_scale = min(t * 2.0, 1e6)
            grad = discrete_gradient(model, times, points)
            res = residual(grad)
            history.append(res)
        return points, action, grad, res, step_scale

    # a few descent steps to leave badly non-convex starts, then Newton
    points, action, grad, res, step_scale = gradient_steps(
        points, action, grad, res, min(8, max_gradient), 1.0)

    shift = 0.0
    stalls = 0
    for _ in range(max_newton):
        if res < residual_tol:
            break
        diag_blocks, off_blocks = _hessian_blocks(model, times, points)
        step = _solve_newton_step(diag_blocks, off_blocks, grad, shift)
        if step is None:
            shift = max(10 * shift, 1e-8)
            continue
        t = 1.0
        improved = False
        g_new = None
        for halving in range(40):
            cand = points.copy()
            cand[1:-1] -= t * step
            a_new = discrete_action(model, times, cand)
            if a_new < action - 1e-15 * abs(action):
                improved = True
                break
            if halving == 0:
                # endgame: action stagnates at roundoff while the
                # residual still contracts quadratically
                g_new = discrete_gradient(model, times, cand)
                if residual(g_new) < res:
                    improved = True
                    a_new = a_new if np.isfinite(a_new) else action
                    break
                g_new = None
            t *= 0.5
        if not improved:
            shift = max(10 * shift, 1e-8)
            stalls += 1
            if stalls % 4 == 0:
                points, action, grad, res, step_scale = gradient_steps(
                    points, action, grad, res, 20, step_scale)
            if shift > 1e8:
                break
            continue
        points = cand
        grad = discrete_gradient(model, times, points) \
            if g_new is None else g_new
        res = residual(grad)
        action = a_new
        history.append(res)
        if t == 1.0:
            shift = 0.0
    if res >= residual_tol:
        raise MinimizationError(
            f"no convergence: residual {res:.3e} after "
            f"{len(history)} iterations", residual_history=history)
    rotation = (points[-1] - points[0]) / (t_b - t_a)
    return DiscretePath(times=times, points=points, action=action,
                        grad_norm=res, rotation_estimate=rotation)
