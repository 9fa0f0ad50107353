"""Periodic function toolkit.

Smooth bumps with analytic derivatives of any order, real trigonometric
polynomials stored as frequency/coefficient pairs, a constructive
Jackson-type approximation operator with a certified error bound,
grid-estimated Holder norms, and Bernstein-inequality checks.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, ApproximationQualityError

_TWO_PI = 2.0 * math.pi


def _wrap(x):
    """Reduce to the fundamental domain (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    return x - _TWO_PI * np.round(x / _TWO_PI)


def _next_pow2(n):
    return 1 << max(6, int(math.ceil(math.log2(max(2, n)))))


# ---------------------------------------------------------------------------
# mollifier derivative machinery
#
# For f(x) = c * exp(1 - 1/(1-u^2)), u = x/R, the n-th x-derivative is
#   f^(n)(x) = c*e * A_n(u) * exp(-1/D - 2n*ln D) / R^n,   D = 1 - u^2,
# with integer-coefficient polynomials A_n given by
#   A_0 = 1,   A_{n+1} = D*(A_n' * D + 4n*u*A_n) - 2u*A_n.

_MOLL_CACHE = [[1]]


def _moll_poly(n):
    while len(_MOLL_CACHE) <= n:
        k = len(_MOLL_CACHE) - 1
        A = _MOLL_CACHE[-1]
        dA = [i * A[i] for i in range(1, len(A))]
        # D = 1 - u^2 as coefficient list [1, 0, -1]
        t1 = _poly_mul(dA if dA else [0], [1, 0, -1])
        t2 = [4 * k * c for c in _poly_shift(A)]
        inner = _poly_add(t1, t2)
        nxt = _poly_add(_poly_mul(inner, [1, 0, -1]),
                        [-2 * c for c in _poly_shift(A)])
        _MOLL_CACHE.append(nxt)
    return _MOLL_CACHE[n]


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
            for i in range(n)]


def _poly_shift(a):
    """Multiply by u."""
    return [0] + list(a)


def _moll_deriv_values(x, order, R, scale):
    """Values of the order-th derivative of scale*exp(1-1/(1-(x/R)^2))."""
    x = _wrap(x)
    u = np.asarray(x, dtype=np.longdouble) / np.longdouble(R)
    out = np.zeros_like(u, dtype=np.longdouble)
    mask = np.abs(u) < 1.0
    if not mask.any():
        return np.asarray(out, dtype=float)
    um = u[mask]
    D = 1.0 - um * um
    coeffs = _moll_poly(order)
    A = np.zeros_like(um)
    for c in reversed(coeffs):
        A = A * um + np.longdouble(c)
    expo = -1.0 / D - (2.0 * order) * np.log(D)
    vals = (np.longdouble(scale) * np.longdouble(math.e) * A *
            np.exp(expo) / np.longdouble(R) ** order)
    out[mask] = vals
    return np.asarray(out, dtype=float)


# ---------------------------------------------------------------------------
# periodic functions

class PeriodicFn:
    """A 2pi-periodic function with analytic derivatives.

    ``deriv(order)`` returns a vectorized evaluator for the order-th
    derivative; ``smoothness_order`` may be math.inf.  ``support`` is an
    interval inside (-pi, pi] outside which the function vanishes with
    all declared derivatives, or None.
    """

    def __init__(self, deriv_factory, smoothness_order, support=None,
                 label="periodic-fn"):
        self._deriv_factory = deriv_factory
        self.smoothness_order = smoothness_order
        self.support = support
        self.label = label

    def value(self, x):
        return self._deriv_factory(0)(x)

    def deriv(self, order):
        if order > self.smoothness_order:
            raise DomainError(
                f"{self.label} has smoothness {self.smoothness_order}, "
                f"order-{order} derivative unavailable")
        return self._deriv_factory(order)

    def deriv_values(self, x, order):
        return self.deriv(order)(x)

    def __add__(self, other):
        if not isinstance(other, PeriodicFn):
            return NotImplemented
        sm = min(self.smoothness_order, other.smoothness_order)

        def factory(order, a=self, b=other):
            fa, fb = a._deriv_factory(order), b._deriv_factory(order)
            return lambda x: fa(x) + fb(x)

        return PeriodicFn(factory, sm, None, f"({self.label}+{other.label})")

    def __mul__(self, c):
        c = float(c)

        def factory(order, a=self):
            fa = a._deriv_factory(order)
            return lambda x: c * fa(x)

        return PeriodicFn(factory, self.smoothness_order, self.support,
                          f"{c}*{self.label}")

    __rmul__ = __mul__


def bump(R):
    """C-infinity bump with peak sqrt(2) at 0, supported in [-R, R]."""
    if not (0 < R <= math.pi):
        raise DomainError("bump radius must lie in (0, pi]")
    R = float(R)

    def factory(order):
        return lambda x: _moll_deriv_values(x, order, R, math.sqrt(2.0))

    return PeriodicFn(factory, math.inf, (-R, R), f"bump({R:g})")


def cosine(freq=1, amplitude=1.0):
    """amplitude*cos(freq*x) as a PeriodicFn (all derivatives analytic)."""
    freq = int(freq)
    amplitude = float(amplitude)

    def factory(order):
        fac = amplitude * freq ** order
        phase = order % 4

        def f(x, fac=fac, phase=phase):
            x = np.asarray(x, dtype=float)
            if phase == 0:
                return fac * np.cos(freq * x)
            if phase == 1:
                return -fac * np.sin(freq * x)
            if phase == 2:
                return -fac * np.cos(freq * x)
            return fac * np.sin(freq * x)

        return f

    return PeriodicFn(factory, math.inf, None, f"cos({freq}x)")


def constant(c):
    c = float(c)

    def factory(order):
        if order == 0:
            return lambda x: np.full_like(np.asarray(x, dtype=float), c)
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))

    return PeriodicFn(factory, math.inf, None, f"const({c:g})")


# ---------------------------------------------------------------------------
# trigonometric polynomials

_MAX_TERMS = 6_000_000


@dataclass(frozen=True)
class TrigPoly:
    """Real trigonometric polynomial sum a_v cos<v,x> + b_v sin<v,x>.

    Frequencies are unique integer vectors, one representative per +-v
    pair (first nonzero entry positive); ``degree`` is the maximum
    Euclidean norm among stored frequencies.
    """

    dim: int
    freqs: np.ndarray       # (n, dim) int64
    cos_coeffs: np.ndarray  # (n,)
    sin_coeffs: np.ndarray  # (n,)

    @staticmethod
    def from_terms(dim, freqs, cos_coeffs, sin_coeffs, noise_floor=0.0):
        freqs = np.atleast_2d(np.asarray(freqs, dtype=np.int64))
        if freqs.size == 0:
            freqs = freqs.reshape(0, dim)
        cos_coeffs = np.asarray(cos_coeffs, dtype=float).ravel()
        sin_coeffs = np.asarray(sin_coeffs, dtype=float).ravel()
        freqs, cos_coeffs, sin_coeffs = _canonicalize(
            dim, freqs, cos_coeffs, sin_coeffs, noise_floor)
        return TrigPoly(dim, freqs, cos_coeffs, sin_coeffs)

    @staticmethod
    def zero(dim):
        return TrigPoly.from_terms(dim, np.zeros((0, dim)), [], [])

    @staticmethod
    def const(dim, c):
        return TrigPoly.from_terms(dim, np.zeros((1, dim)), [c], [0.0])

    @property
    def n_terms(self):
        return len(self.cos_coeffs)

    @property
    def degree(self):
        if self.n_terms == 0:
            return 0
        nsq = np.sum(self.freqs.astype(np.float64) ** 2, axis=1)
        return int(math.ceil(math.sqrt(nsq.max()) - 1e-9))

    @property
    def degree_euclid(self):
        if self.n_terms == 0:
            return 0.0
        nsq = np.sum(self.freqs.astype(np.float64) ** 2, axis=1)
        return float(math.sqrt(nsq.max()))

    def evaluate(self, points, chunk=200_000):
        """Evaluate at points of shape (m, dim), (dim,) or scalar (dim=1)."""
        pts = np.asarray(points, dtype=float)
        scalar = False
        if self.dim == 1:
            if pts.ndim == 0:
                pts, scalar = pts.reshape(1, 1), True
            elif pts.ndim == 1:
                pts = pts.reshape(-1, 1)
        else:
            if pts.ndim == 1:
                pts, scalar = pts.reshape(1, -1), True
        if pts.shape[1] != self.dim:
            raise DomainError("point dimension mismatch")
        if self.n_terms == 0:
            out = np.zeros(len(pts))
            return float(out[0]) if scalar else out
        out = np.zeros(len(pts))
        fT = self.freqs.T.astype(float)
        for lo in range(0, self.n_terms, chunk):
            sl = slice(lo, min(lo + chunk, self.n_terms))
            phase = pts @ fT[:, sl]
            out += np.cos(phase) @ self.cos_coeffs[sl]
            out += np.sin(phase) @ self.sin_coeffs[sl]
        return float(out[0]) if scalar else out

    def __call__(self, points):
        return self.evaluate(points)

    def derivative(self, alpha):
        """Exact term-by-term derivative for multi-index alpha."""
        if self.dim == 1 and np.isscalar(alpha):
            alpha = (int(alpha),)
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim:
            raise DomainError("multi-index dimension mismatch")
        if self.n_terms == 0:
            return self
        total = sum(alpha)
        if total == 0:
            return self
        factor = np.ones(self.n_terms)
        for j, a in enumerate(alpha):
            if a:
                factor = factor * self.freqs[:, j].astype(float) ** a
        c = (self.cos_coeffs - 1j * self.sin_coeffs) * (1j ** total) * factor
        return TrigPoly.from_terms(self.dim, self.freqs.copy(),
                                   c.real, -c.imag)

    def grid_values_1d(self, n):
        """Values on the uniform grid x_j = 2 pi j / n (dim 1 only)."""
        if self.dim != 1:
            raise DomainError("grid_values_1d needs a 1-d polynomial")
        if self.n_terms and int(np.abs(self.freqs).max()) >= n // 2:
            raise DomainError("grid too coarse for this degree")
        spec = np.zeros(n, dtype=complex)
        for (nu,), a, b in zip(self.freqs, self.cos_coeffs, self.sin_coeffs):
            c = 0.5 * (a - 1j * b)
            if nu == 0:
                spec[0] += a
            else:
                spec[nu % n] += c
                spec[-nu % n] += np.conj(c)
        return np.fft.ifft(spec).real * n

    def grid_values_2d(self, n1, n2=None):
        if self.dim != 2:
            raise DomainError("grid_values_2d needs a 2-d polynomial")
        n2 = n2 or n1
        if self.n_terms:
            m1 = int(np.abs(self.freqs[:, 0]).max())
            m2 = int(np.abs(self.freqs[:, 1]).max())
            if m1 >= n1 // 2 or m2 >= n2 // 2:
                raise DomainError("grid too coarse for this degree")
        spec = np.zeros((n1, n2), dtype=complex)
        for (u, v), a, b in zip(self.freqs, self.cos_coeffs,
                                self.sin_coeffs):
            c = 0.5 * (a - 1j * b)
            if u == 0 and v == 0:
                spec[0, 0] += a
            else:
                spec[u % n1, v % n2] += c
                spec[-u % n1, -v % n2] += np.conj(c)
        return np.fft.ifft2(spec).real * (n1 * n2)

    def coeff_bound(self, alpha=None):
        """Sum of |coefficients|, optionally of the alpha-derivative."""
        p = self if alpha is None else self.derivative(alpha)
        return float(np.sum(np.hypot(p.cos_coeffs, p.sin_coeffs)))

    # ---- serialization (structured text, 17 significant digits) ----

    def to_text(self):
        lines = [f"dim {self.dim}", f"degree {self.degree}",
                 f"terms {self.n_terms}"]
        order = np.lexsort(tuple(self.freqs[:, j]
                                 for j in range(self.dim - 1, -1, -1)))
        for i in order:
            fr = " ".join(str(int(v)) for v in self.freqs[i])
            lines.append(f"{fr} {self.cos_coeffs[i]:.17g} "
                         f"{self.sin_coeffs[i]:.17g}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        dim = int(lines[0].split()[1])
        nterms = int(lines[2].split()[1])
        freqs, cs, ss = [], [], []
        for ln in lines[3:3 + nterms]:
            parts = ln.split()
            freqs.append([int(v) for v in parts[:dim]])
            cs.append(float(parts[dim]))
            ss.append(float(parts[dim + 1]))
        return TrigPoly.from_terms(dim, np.array(freqs).reshape(-1, dim),
                                   cs, ss)


def _canonicalize(dim, freqs, cos_coeffs, sin_coeffs, noise_floor):
    if len(freqs) == 0:
        return (np.zeros((0, dim), dtype=np.int64), np.zeros(0), np.zeros(0))
    # normalize each frequency to its +-pair representative
    flip = np.zeros(len(freqs), dtype=bool)
    undecided = np.ones(len(freqs), dtype=bool)
    for j in range(dim):
        col = freqs[:, j]
        flip |= undecided & (col < 0)
        undecided &= col == 0
    freqs = np.where(flip[:, None], -freqs, freqs)
    sin_coeffs = np.where(flip, -sin_coeffs, sin_coeffs)
    # merge duplicates
    uniq, inv = np.unique(freqs, axis=0, return_inverse=True)
    cs = np.zeros(len(uniq))
    ss = np.zeros(len(uniq))
    np.add.at(cs, inv, cos_coeffs)
    np.add.at(ss, inv, sin_coeffs)
    mag = np.hypot(cs, ss)
    thr = noise_floor * mag.max() if (noise_floor and mag.size) else 0.0
    keep = mag > thr
    # sin part of the zero frequency is identically zero
    zero_rows = ~uniq.any(axis=1)
    ss[zero_rows] = 0.0
    keep |= zero_rows & (np.abs(cs) > thr)
    if keep.sum() > _MAX_TERMS:
        raise DomainError(f"term count {keep.sum()} exceeds cap {_MAX_TERMS}")
    return uniq[keep], cs[keep], ss[keep]


def mul_1d(p, q, noise_floor=0.0):
    """Termwise product of two 1-d polynomials via coefficient convolution.

    Direct convolution for small operands; FFT convolution (identical
    up to rounding at the noise floor) for large ones.
    """
    if p.dim != 1 or q.dim != 1:
        raise DomainError("mul_1d needs 1-d polynomials")
    if p.n_terms == 0 or q.n_terms == 0:
        return TrigPoly.zero(1)
    dp = int(np.abs(p.freqs).max())
    dq = int(np.abs(q.freqs).max())
    a = _complex_line(p, dp)
    b = _complex_line(q, dq)
    if len(a) * len(b) <= 1 << 22:
        c = np.convolve(a, b)
    else:
        n = _next_pow2(len(a) + len(b))
        c = np.fft.ifft(np.fft.fft(a, n) * np.fft.fft(b, n))[
            :len(a) + len(b) - 1]
    D = dp + dq
    nus = np.arange(-D, D + 1)
    return _from_complex_line(nus, c, noise_floor)


def _complex_line(p, D):
    line = np.zeros(2 * D + 1, dtype=complex)
    for (nu,), a, b in zip(p.freqs, p.cos_coeffs, p.sin_coeffs):
        c = 0.5 * (a - 1j * b)
        if nu == 0:
            line[D] += a
        else:
            line[D + nu] += c
            line[D - nu] += np.conj(c)
    return line


def _from_complex_line(nus, line, noise_floor=0.0):
    mask = nus >= 0
    nu_pos = nus[mask]
    cpos = line[mask]
    cos_c = np.where(nu_pos == 0, cpos.real, 2.0 * cpos.real)
    sin_c = np.where(nu_pos == 0, 0.0, -2.0 * cpos.imag)
    return TrigPoly.from_terms(1, nu_pos.reshape(-1, 1), cos_c, sin_c,
                               noise_floor=noise_floor)


# ---------------------------------------------------------------------------
# Jackson-type approximation
#
# The approximation operator is a Fourier multiplier supported on
# |nu| <= M.  Its symbol is mu = 1 - (1 - W)^s, the s-fold boolean-sum
# iterate of a smooth low-pass taper W(u) = exp(-a u^2/(1-u^2)),
# u = nu/(M+1), with s = ceil(kappa/2), so 1 - mu vanishes to order
# 2s >= kappa at nu = 0.  The taper steepness is fixed once and the
# resulting kernel moments are measured per call to certify the bound
#   ||f - Tf|| <= sum_{0<j<kappa, even} |m_j|/j! sup|f^(j)|
#                 + c_kappa sup|f^(kappa)|,
# where m_j are exact signed moments of the effective kernel (tiny by
# construction) and c_kappa = (1/2 pi kappa!) int |K| |t|^kappa dt.

_TAPER_A = 0.3


def _jackson_multiplier(M, kappa):
    nu = np.arange(M + 1)
    u = nu / (M + 1.0)
    with np.errstate(over="ignore", under="ignore"):
        W = np.exp(-_TAPER_A * u * u / np.maximum(1e-300, 1.0 - u * u))
    s = (kappa + 1) // 2
    return 1.0 - (1.0 - W) ** s


def _cos_moment_table(j, nus):
    """I_j(nu) = integral_0^pi t^j cos(nu t) dt, exactly, vectorized."""
    nus = np.asarray(nus, dtype=float)
    out = np.empty((j + 1, len(nus)))
    sign = np.where((np.asarray(nus, dtype=np.int64) % 2) == 0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv2 = 1.0 / nus ** 2
    out[0] = 0.0
    if j >= 1:
        # I_1 = (cos(nu pi) - 1)/nu^2
        out[1] = (sign - 1.0) * inv2
    for jj in range(2, j + 1):
        out[jj] = jj * sign * math.pi ** (jj - 1) * inv2 \
            - jj * (jj - 1) * inv2 * out[jj - 2]
    return out[j]


def _signed_moment(multiplier, j):
    """(1/2 pi) int K_eff(t) t^j dt for even j, spectrally exact."""
    mu0 = multiplier[0]
    base = mu0 * math.pi ** j / (j + 1)
    if len(multiplier) == 1:
        return base
    nus = np.arange(1, len(multiplier))
    Ij = _cos_moment_table(j, nus)
    return base + (2.0 / math.pi) * float(multiplier[1:] @ Ij)


def jackson(f, M, kappa):
    """Degree <= M trigonometric approximation with a certified bound.

    Linear in ``f``, reproduces constants exactly, and achieves the
    M^-kappa rate for C^kappa inputs.  Returns (TrigPoly, error_bound);
    the sup error measured on a 10^4-point grid is checked against the
    bound before returning.
    """
    M = int(M)
    kappa = int(kappa)
    if M < 1:
        raise DomainError("M must be >= 1")
    if kappa < 2:
        raise DomainError("kappa must be >= 2")
    if f.smoothness_order < kappa:
        raise DomainError("insufficient smoothness for requested kappa")

    p_density = (kappa + 3) // 2
    L = _next_pow2(max(8 * M * p_density, 4096))
    x = _TWO_PI * np.arange(L) / L
    fvals = f.value(x)
    fhat = np.fft.rfft(fvals) / L

    multiplier = _jackson_multiplier(M, kappa)
    ghat = multiplier * fhat[:M + 1]
    nu = np.arange(M + 1)
    cos_c = np.where(nu == 0, ghat.real, 2.0 * ghat.real)
    sin_c = np.where(nu == 0, 0.0, -2.0 * ghat.imag)
    poly = TrigPoly.from_terms(1, nu.reshape(-1, 1), cos_c, sin_c,
                               noise_floor=5e-14)

    # effective kernel samples for the absolute moment
    spec = np.zeros(L, dtype=complex)
    spec[0] = multiplier[0]
    spec[1:M + 1] = multiplier[1:]
    spec[L - M:] = multiplier[1:][::-1]
    ker = np.fft.ifft(spec).real * L
    tw = _wrap(x)
    c_kappa = float(np.mean(np.abs(ker) * np.abs(tw) ** kappa)) \
        / math.factorial(kappa)

    sup_d = {}
    xg = _TWO_PI * np.arange(4096) / 4096
    for j in list(range(2, kappa, 2)) + [kappa]:
        sup_d[j] = float(np.max(np.abs(f.deriv_values(xg, j))))
    error_bound = 1.05 * c_kappa * sup_d[kappa]
    for j in range(2, kappa, 2):
        mj = _signed_moment(multiplier, j)
        error_bound += (abs(mj) + 1e-15) / math.factorial(j) * sup_d[j]

    meas_x = _TWO_PI * np.arange(10_000) / 10_000
    measured = float(np.max(np.abs(poly.evaluate(meas_x.reshape(-1, 1))
                                   - f.value(meas_x))))
    if measured > error_bound + 1e-12 * (1.0 + sup_d[kappa]):
        raise ApproximationQualityError(
            f"measured error {measured:.3e} exceeds certified bound "
            f"{error_bound:.3e}")
    return poly, error_bound


# ---------------------------------------------------------------------------
# norms

@dataclass(frozen=True)
class NormReport:
    r: float
    value: float
    grid_size: int
    method: str


def _sup_grid_1d(obj, order, grid):
    if isinstance(obj, TrigPoly):
        d = obj.derivative((order,))
        n = max(grid, _next_pow2(4 * max(1, d.degree)))
        if n > 1 << 21:
            return obj.coeff_bound((order,)), "analytic"
        return float(np.max(np.abs(d.grid_values_1d(n)))), "grid"
    x = _TWO_PI * np.arange(grid) / grid
    return float(np.max(np.abs(obj.deriv_values(x, order)))), "grid"


def _holder_tail_1d(obj, order, theta, grid):
    n = min(grid, 4096)
    x = _TWO_PI * np.arange(n) / n
    if isinstance(obj, TrigPoly):
        vals = obj.derivative((order,)).grid_values_1d(
            max(n, _next_pow2(4 * max(1, obj.degree))))
        n = len(vals)
    else:
        vals = obj.deriv_values(x, order)
    best = 0.0
    for j in range(1, n // 2 + 1):
        h = _TWO_PI * j / n
        if h > math.pi + 1e-12:
            break
        diff = np.max(np.abs(np.roll(vals, -j) - vals))
        best = max(best, diff / h ** theta)
    return best


def _multi_indices(dim, total):
    if dim == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _multi_indices(dim - 1, total - head):
            yield (head,) + rest


def holder_norm(f, r, grid=4096):
    """Grid-estimated Holder C^r norm.

    Integer r: sum over |alpha| <= r of grid sup-norms of derivatives.
    Fractional r: adds the Holder-(r-[r]) seminorm of every order-[r]
    derivative, estimated over grid pairs with separation in
    [2pi/grid, pi].  Values are monotone under (nested, power-of-two)
    grid refinement.
    """
    r = float(r)
    if r < 0:
        raise DomainError("r must be nonnegative")
    if grid < 64:
        raise DomainError("grid must be >= 64")
    s = int(math.floor(r))
    theta = r - s
    is_poly = isinstance(f, TrigPoly)
    dim = f.dim if is_poly else 1
    if not is_poly and f.smoothness_order < s:
        raise DomainError("derivative order unavailable for this function")

    total = 0.0
    method = "grid"
    if dim == 1:
        for order in range(s + 1):
            v, meth = _sup_grid_1d(f, order, grid)
            total += v
            if meth == "analytic":
                method = "analytic"
        if theta > 0:
            total += _holder_tail_1d(f, s, theta, grid)
    else:
        total, method = _holder_nd(f, s, theta, grid)
    return NormReport(r, total, grid, method)


def _holder_nd(poly, s, theta, grid):
    method = "grid"
    deg = poly.degree
    if poly.dim == 2 and deg < 4000:
        n = max(min(grid, 4096), _next_pow2(3 * max(1, deg)))
        total = 0.0
        for order in range(s + 1):
            for alpha in _multi_indices(2, order):
                d = poly.derivative(alpha)
                total += float(np.max(np.abs(d.grid_values_2d(n))))
        if theta > 0:
            total += _holder_tail_nd(poly, s, theta)
        return total, method
    # large or high-dimensional: coefficient-sum bound per derivative
    method = "analytic"
    total = 0.0
    for order in range(s + 1):
        for alpha in _multi_indices(poly.dim, order):
            total += poly.coeff_bound(alpha)
    if theta > 0:
        # |D(x+h)-D(x)| <= min(2, |nu.h|) |c| <= 2^(1-theta)|nu h|^theta |c|
        for alpha in _multi_indices(poly.dim, s):
            d = poly.derivative(alpha)
            amp = np.hypot(d.cos_coeffs, d.sin_coeffs)
            nrm = np.sqrt(np.sum(d.freqs.astype(float) ** 2, axis=1))
            total += float(np.sum(2.0 ** (1 - theta) * nrm ** theta * amp))
    return total, method


def _holder_tail_nd(poly, s, theta, n=256):
    """Axis-aligned pair scan on a decimated grid (estimate)."""
    best = 0.0
    for alpha in _multi_indices(poly.dim, s):
        d = poly.derivative(alpha)
        vals = d.grid_values_2d(n)
        for axis in (0, 1):
            for j in range(1, n // 2 + 1):
                h = _TWO_PI * j / n
                if h > math.pi + 1e-12:
                    break
                diff = np.max(np.abs(np.roll(vals, -j, axis=axis) - vals))
                best = max(best, diff / h ** theta)
    return best


# ---------------------------------------------------------------------------
# Bernstein check

def bernstein_verify(T, s):
    """Check sup|d^s T| <= degree^s sup|T| on a Nyquist-safe grid.

    For multivariate polynomials the left side is the maximum over
    coordinate-axis derivatives, matching the 1-d convention.
    """
    s = int(s)
    if s < 1:
        raise DomainError("s must be a positive integer")
    if T.n_terms == 0:
        raise DomainError("polynomial is zero")
    deg = T.degree_euclid
    if T.dim == 1:
        n = max(4096, _next_pow2(4 * max(1, T.degree)))
        sup_T = float(np.max(np.abs(T.grid_values_1d(n))))
        lhs = float(np.max(np.abs(T.derivative((s,)).grid_values_1d(n))))
    elif T.dim == 2 and T.degree < 4000:
        n = max(1024, _next_pow2(3 * max(1, T.degree)))
        sup_T = float(np.max(np.abs(T.grid_values_2d(n))))
        lhs = 0.0
        for axis in range(2):
            alpha = [0, 0]
            alpha[axis] = s
            vals = T.derivative(tuple(alpha)).grid_values_2d(n)
            lhs = max(lhs, float(np.max(np.abs(vals))))
    else:
        raise DomainError("bernstein_verify supports dim 1 and small dim 2; "
                          "use factored forms for large builds")
    rhs = deg ** s * sup_T
    return {"lhs": lhs, "rhs": rhs, "pass": lhs <= rhs * (1 + 1e-9)}
