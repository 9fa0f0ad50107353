"""Hamiltonian flows: symplectic integrators and test fixtures.

Mechanical Hamiltonians H = ||y||^2/2 + V(x) integrate with the
explicit Stormer-Verlet scheme; non-separable fixtures (drift fields,
shear channels) use the implicit midpoint rule with fixed-point
iteration.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, IntegrationError


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray    # (n, d), lifted (no reduction mod 2 pi)
    momenta: np.ndarray      # (n, d)
    energies: np.ndarray

    @property
    def energy_drift(self):
        e0 = self.energies[0]
        scale = max(abs(e0), 1.0)
        return float(np.max(np.abs(self.energies - e0)) / scale)


class MechanicalSystem:
    """H = ||y||^2 / 2 + V(x)."""

    def __init__(self, V, gradV, d):
        self.V = V
        self.gradV = gradV
        self.d = d

    def energy(self, x, y):
        return 0.5 * float(y @ y) + float(self.V(x))

    def integrate(self, z0, T, dt):
        if dt <= 0 or T < dt:
            raise DomainError("need dt > 0 and T >= dt")
        x = np.array(z0[:self.d], dtype=float)
        y = np.array(z0[self.d:], dtype=float)
        n = int(round(T / dt))
        times = np.empty(n + 1)
        xs = np.empty((n + 1, self.d))
        ys = np.empty((n + 1, self.d))
        es = np.empty(n + 1)
        times[0], xs[0], ys[0], es[0] = 0.0, x, y, self.energy(x, y)
        g = np.asarray(self.gradV(x), dtype=float)
        for i in range(1, n + 1):
            y_half = y - 0.5 * dt * g
            x = x + dt * y_half
            g = np.asarray(self.gradV(x), dtype=float)
            y = y_half - 0.5 * dt * g
            times[i], xs[i], ys[i] = i * dt, x, y
            es[i] = self.energy(x, y)
        return Trajectory(times, xs, ys, es)


class HamiltonianSystem:
    """General H(x, y) integrated by the implicit midpoint rule."""

    def __init__(self, dH_dx, dH_dy, energy, d,
                 fp_tol=1e-13, fp_max_iter=200):
        self.dH_dx = dH_dx
        self.dH_dy = dH_dy
        self.energy_fn = energy
        self.d = d
        self.fp_tol = fp_tol
        self.fp_max_iter = fp_max_iter

    def _field(self, x, y):
        return (np.asarray(self.dH_dy(x, y), dtype=float),
                -np.asarray(self.dH_dx(x, y), dtype=float))

    def integrate(self, z0, T, dt):
        if dt <= 0 or T < dt:
            raise DomainError("need dt > 0 and T >= dt")
        d = self.d
        x = np.array(z0[:d], dtype=float)
        y = np.array(z0[d:], dtype=float)
        n = int(round(T / dt))
        times = np.empty(n + 1)
        xs = np.empty((n + 1, d))
        ys = np.empty((n + 1, d))
        es = np.empty(n + 1)
        times[0], xs[0], ys[0] = 0.0, x, y
        es[0] = self.energy_fn(x, y)
        for i in range(1, n + 1):
            xn, yn = x.copy(), y.copy()
            converged = False
            for _ in range(self.fp_max_iter):
                xm = 0.5 * (x + xn)
                ym = 0.5 * (y + yn)
                fx, fy = self._field(xm, ym)
                xn_new = x + dt * fx
                yn_new = y + dt * fy
                delta = max(float(np.max(np.abs(xn_new - xn))),
                            float(np.max(np.abs(yn_new - yn))))
                xn, yn = xn_new, yn_new
                if delta < self.fp_tol:
                    converged = True
                    break
            if not converged:
                raise IntegrationError(
                    f"implicit midpoint stalled at step {i} "
                    f"(last correction {delta:.3e})")
            x, y = xn, yn
            times[i], xs[i], ys[i] = i * dt, x, y
            es[i] = self.energy_fn(x, y)
        return Trajectory(times, xs, ys, es)


def free_system(d):
    return MechanicalSystem(lambda x: 0.0,
                            lambda x: np.zeros(d), d)


def pendulum_system(g):
    """H = y^2/2 - g(1 - cos q), matching L = q'^2/2 + g(1 - cos q)."""
    return MechanicalSystem(
        lambda x: -g * (1.0 - math.cos(x[0])),
        lambda x: np.array([-g * math.sin(x[0])]), 1)


def drift_field_system(alpha, d=2):
    """H = ||y||^2/2 + <y, chi(x)> with chi = alpha * Psi(x).

    Psi is smooth, vanishes only at x = 0, and 1/Psi is non-integrable
    there, so the zero section is invariant while carrying a single
    ergodic equilibrium.
    """
    alpha = np.asarray(alpha, dtype=float)
    if len(alpha) != d:
        raise DomainError("alpha dimension mismatch")

    def psi(x):
        return float(np.mean(np.sin(np.asarray(x) / 2.0) ** 2))

    def grad_psi(x):
        x = np.asarray(x, dtype=float)
        return np.sin(x / 2.0) * np.cos(x / 2.0) / len(x)

    def dH_dy(x, y):
        return y + alpha * psi(x)

    def dH_dx(x, y):
        return grad_psi(x) * float(alpha @ y)

    def energy(x, y):
        return 0.5 * float(y @ y) + float(alpha @ y) * psi(x)

    return HamiltonianSystem(dH_dx, dH_dy, energy, d)


def shear_channel_system(psi=None, dpsi=None):
    """H = (r1 - psi(th2))^2/2 + r2^2/2 on T^2 x R^2.

    The torus {r1 = psi(th2), r2 = 0} consists of equilibria; it is
    invariant but not Lagrangian for non-constant psi.
    """
    if psi is None:
        psi = lambda t: 0.5 + 0.25 * math.sin(t)
        dpsi = lambda t: 0.25 * math.cos(t)

    def dH_dx(x, y):
        return np.array([0.0, -(y[0] - psi(x[1])) * dpsi(x[1])])

    def dH_dy(x, y):
        return np.array([y[0] - psi(x[1]), y[1]])

    def energy(x, y):
        return 0.5 * (y[0] - psi(x[1])) ** 2 + 0.5 * y[1] ** 2

    return HamiltonianSystem(dH_dx, dH_dy, energy, 2)


def rotation_vector(traj):
    """Finite-horizon rotation estimate with its error bar.

    Returns ((x(T) - x(0)) / T, 2 * max_speed / T).
    """
    T = float(traj.times[-1] - traj.times[0])
    if T <= 0:
        raise DomainError("trajectory horizon must be positive")
    est = (traj.positions[-1] - traj.positions[0]) / T
    dt = np.diff(traj.times)[:, None]
    speeds = np.abs(np.diff(traj.positions, axis=0) / dt)
    err = 2.0 * float(speeds.max()) / T if len(speeds) else float("inf")
    return est, err


def pendulum_rotation_period(g, E):
    """Quadrature oracle: period of the rotating orbit at energy E > 0."""
    if E <= 0:
        raise DomainError("rotating orbits need E > 0")
    q = np.linspace(0.0, 2 * math.pi, 20001)
    v = np.sqrt(2 * E + 2 * g * (1.0 - np.cos(q)))
    return float(np.trapezoid(1.0 / v, q))
