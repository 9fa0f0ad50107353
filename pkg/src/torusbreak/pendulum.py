"""Pendulum boundary-value problems and two-leg action profiles.

The model is L = q'^2/2 + g(1-cos q), so minimizers solve
q'' = g sin q and conserve E = q'^2/2 - g(1-cos q).  Boundary solves
use shooting with bisection on the initial speed, with each shot
evaluated by energy-form quadrature in q rather than time stepping:
near-separatrix legs are exponentially ill-conditioned under forward
integration but perfectly tame in energy variables.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import BvpError, DomainError

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class PendulumPath:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    energy: float
    action: float
    action_quadrature: float
    v0: float

    def energy_residual(self, g):
        e = 0.5 * self.velocities ** 2 \
            - g * (1.0 - np.cos(self.positions))
        return float(np.max(np.abs(e - self.energy)))


def _leg_nodes(qa, qb, q_star, n_base=2048):
    """Monotone q-grid refined geometrically toward the slow point."""
    span = qb - qa
    base = qa + span * np.linspace(0.0, 1.0, n_base + 1)
    extra = []
    if q_star is not None and qa - 1e-12 <= q_star <= qb + 1e-12:
        for side in (-1.0, 1.0):
            scales = span * 10.0 ** np.linspace(-14, -0.5, 60)
            pts = q_star + side * scales
            extra.append(pts[(pts > qa) & (pts < qb)])
    if extra:
        nodes = np.unique(np.concatenate([base, *extra]))
    else:
        nodes = base
    return nodes


def _speed(q, E, g):
    return np.sqrt(np.maximum(2.0 * E + 2.0 * g * (1.0 - np.cos(q)), 0.0))


def _leg_times(nodes, E, g):
    """Cumulative time over the node intervals by Gauss quadrature."""
    a = nodes[:-1]
    b = nodes[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    qs = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    integrand = 1.0 / _speed(qs, E, g)
    dt = half * (integrand @ _GAUSS_WEIGHTS)
    return np.concatenate([[0.0], np.cumsum(dt)])


def _leg_action_quad(nodes, E, g, T):
    """E*T + 2g int (1-cos q)/speed dq, by the same quadrature."""
    a = nodes[:-1]
    b = nodes[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    qs = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    integrand = 2.0 * g * (1.0 - np.cos(qs)) / _speed(qs, E, g)
    val = float(np.sum(half * (integrand @ _GAUSS_WEIGHTS)))
    return E * T + val


def _slow_point(qa, qb, g):
    """Interior/endpoint q minimizing 1-cos q (the slow region)."""
    if g == 0:
        return None
    cands = [qa, qb]
    k0 = math.ceil(qa / (2 * math.pi))
    while 2 * math.pi * k0 <= qb:
        cands.append(2 * math.pi * k0)
        k0 += 1
    vals = [1.0 - math.cos(q) for q in cands]
    return cands[int(np.argmin(vals))]


def pendulum_bvp(g, q_a, q_b, t_a, t_b, samples=4097):
    """Solve q'' = g sin q with q(t_a) = q_a, q(t_b) = q_b.

    Monotone solutions only (|q_b - q_a| <= 2 pi); the flight time is a
    strictly decreasing function of the initial speed, so bisection in
    the energy offset converges unconditionally.  Returns a PendulumPath
    sampled on a uniform time grid with the action from composite
    Simpson quadrature (``samples`` odd), cross-checked internally
    against the energy-form quadrature.
    """
    if g < 0:
        raise DomainError("pendulum strength must be nonnegative")
    if t_b <= t_a:
        raise DomainError("need t_b > t_a")
    if abs(q_b - q_a) > 2 * math.pi + 1e-12:
        raise DomainError("|q_b - q_a| must be <= 2 pi")
    T = t_b - t_a
    flip = q_b < q_a
    qa, qb = (-q_a, -q_b) if flip else (q_a, q_b)
    if qb == qa:
        raise DomainError("degenerate leg (q_a == q_b) is unsupported")

    if g == 0:
        return _free_path(q_a, q_b, t_a, t_b, samples)

    q_star = _slow_point(qa, qb, g)
    nodes = _leg_nodes(qa, qb, q_star)
    E_crit = -g * min(1.0 - math.cos(q) for q in
                      ([q_star] if q_star is not None else [qa, qb]))

    def flight(log_off):
        E = E_crit + math.exp(log_off)
        return float(_leg_times(nodes, E, g)[-1])

    lo, hi = -700.0, math.log(max(1.0, 100 * g * T ** -2 + 10.0))
    scan = []
    while flight(hi) > T and hi < 700:
        scan.append((hi, flight(hi)))
        hi += 5.0
    if flight(hi) > T:
        raise BvpError("no bracket: flight time stays above target",
                       scan=scan)
    if flight(lo) < T:
        raise BvpError("no bracket: leg too slow even at minimal energy",
                       scan=[(lo, flight(lo))])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if flight(mid) > T:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * max(1.0, abs(lo)):
            break
    E = E_crit + math.exp(0.5 * (lo + hi))

    tq = _leg_times(nodes, E, g)
    tq *= T / tq[-1]           # absorb residual bisection error
    action_quad = _leg_action_quad(nodes, E, g, T)

    n = samples if samples % 2 == 1 else samples + 1
    t_uniform = np.linspace(0.0, T, n)
    interp = PchipInterpolator(tq, nodes)
    q_uniform = interp(t_uniform)
    q_uniform[0], q_uniform[-1] = qa, qb
    v_uniform = _speed(q_uniform, E, g)
    lagr = 0.5 * v_uniform ** 2 + g * (1.0 - np.cos(q_uniform))
    h = T / (n - 1)
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    action_simpson = float(h / 3.0 * (w @ lagr))

    if flip:
        q_uniform = -q_uniform
        v_uniform = -v_uniform
    return PendulumPath(times=t_a + t_uniform, positions=q_uniform,
                        velocities=v_uniform, energy=E,
                        action=action_simpson,
                        action_quadrature=action_quad, v0=float(
                            v_uniform[0]))


def _free_path(q_a, q_b, t_a, t_b, samples):
    n = samples if samples % 2 == 1 else samples + 1
    t = np.linspace(t_a, t_b, n)
    v = (q_b - q_a) / (t_b - t_a)
    q = q_a + v * (t - t_a)
    action = 0.5 * v ** 2 * (t_b - t_a)
    return PendulumPath(times=t, positions=q, velocities=np.full(n, v),
                        energy=0.5 * v ** 2, action=action,
                        action_quadrature=action, v0=v)


@dataclass(frozen=True)
class ActionProfile:
    s_values: np.ndarray
    actions: np.ndarray
    unimodal: bool
    argmin_index: int


def action_profile(g, t0, t2, s_grid, samples=513):
    """Two-leg action s -> S(0 -> pi on (t0,s)) + S(pi -> 2pi on (s,t2)).

    Flags the profile unimodal when the finite differences change sign
    exactly once.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid <= t0) or np.any(s_grid >= t2):
        raise DomainError("s_grid must lie strictly inside (t0, t2)")
    vals = []
    for s in s_grid:
        leg1 = pendulum_bvp(g, 0.0, math.pi, t0, s, samples)
        leg2 = pendulum_bvp(g, math.pi, 2 * math.pi, s, t2, samples)
        vals.append(leg1.action_quadrature + leg2.action_quadrature)
    vals = np.array(vals)
    diffs = np.diff(vals)
    signs = np.sign(diffs[np.abs(diffs) > 0])
    changes = int(np.sum(signs[1:] != signs[:-1])) if len(signs) else 0
    return ActionProfile(s_values=s_grid, actions=vals,
                         unimodal=changes <= 1,
                         argmin_index=int(np.argmin(vals)))
