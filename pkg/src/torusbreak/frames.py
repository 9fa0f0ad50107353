"""Integer orthogonal frames and their exact symplectic lifts.

A frame stacks a resonance vector k, an orthogonal partner k' with a
large frequency component, and d-2 primitive integer fill rows spanning
the orthogonal complement.  The block map (x, y) -> (Kx, K^-T y) is
symplectic for any nonsingular K; here K^-T is kept as exact rationals
and the identity Phi^T J0 Phi = J0 is verified in exact arithmetic.
"""

from dataclasses import dataclass
from fractions import Fraction
import json
import math

import numpy as np

from .diophantine import FrequencyVector, _mpf_ctx
from .errors import DomainError, PartnerQualityError


# ---------------------------------------------------------------------------
# exact integer/rational helpers

def _gcd_vec(v):
    g = 0
    for x in v:
        g = math.gcd(g, abs(int(x)))
    return g


def _sign_normalize(v):
    for x in v:
        if x != 0:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def _primitive(v):
    g = _gcd_vec(v)
    if g == 0:
        return tuple(v)
    return _sign_normalize(tuple(int(x) // g for x in v))


def integer_kernel_basis(rows):
    """Basis of the integer kernel lattice of the matrix with given rows.

    Column-echelon reduction by unimodular column operations (extended
    gcd steps); the columns of the accumulated transform that map to
    zero columns form a saturated kernel basis.
    """
    m = len(rows)
    d = len(rows[0])
    A = [[int(rows[i][j]) for j in range(d)] for i in range(m)]
    U = [[1 if i == j else 0 for j in range(d)] for i in range(d)]

    def col_combine(j1, j2, a, b, c, e):
        # (col j1, col j2) <- (a*col j1 + b*col j2, c*col j1 + e*col j2)
        for i in range(m):
            x, y = A[i][j1], A[i][j2]
            A[i][j1], A[i][j2] = a * x + b * y, c * x + e * y
        for i in range(d):
            x, y = U[i][j1], U[i][j2]
            U[i][j1], U[i][j2] = a * x + b * y, c * x + e * y

    pivot_col = 0
    for i in range(m):
        if pivot_col >= d:
            break
        nz = [j for j in range(pivot_col, d) if A[i][j] != 0]
        if not nz:
            continue
        j0 = nz[0]
        if j0 != pivot_col:
            for r in range(m):
                A[r][pivot_col], A[r][j0] = A[r][j0], A[r][pivot_col]
            for r in range(d):
                U[r][pivot_col], U[r][j0] = U[r][j0], U[r][pivot_col]
        for j in range(pivot_col + 1, d):
            while A[i][j] != 0:
                a, b = A[i][pivot_col], A[i][j]
                g = math.gcd(a, b)
                # Bezout: s*a + t*b = g
                s, t = _bezout(a, b)
                col_combine(pivot_col, j, s, t, -b // g, a // g)
        pivot_col += 1
    kernel_cols = [j for j in range(d)
                   if all(A[i][j] == 0 for i in range(m))]
    return [tuple(U[i][j] for i in range(d)) for j in kernel_cols]


def _bezout(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_s, old_t


def _fraction_matrix(rows):
    return [[Fraction(int(v)) for v in row] for row in rows]


def _mat_det(M):
    n = len(M)
    A = [row[:] for row in M]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        inv = Fraction(1) / A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] * inv
            if f != 0:
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det


def _mat_inv(M):
    n = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            raise DomainError("singular matrix")
        A[c], A[piv] = A[piv], A[c]
        inv = Fraction(1) / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def _mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)]
            for i in range(n)]


def _transpose(A):
    return [list(col) for col in zip(*A)]


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class ResonanceFrame:
    """Rows (k, k', l_3 .. l_d), pairwise orthogonal, stored exactly."""

    k: tuple
    k_prime: tuple
    fill_rows: tuple
    det: int

    @property
    def d(self):
        return len(self.k)

    def rows(self):
        return [self.k, self.k_prime, *self.fill_rows]

    def matrix(self):
        return np.array(self.rows(), dtype=np.int64)

    def row_norms(self):
        return [math.sqrt(sum(int(v) ** 2 for v in r)) for r in self.rows()]

    @property
    def k_norm(self):
        return math.sqrt(sum(int(v) ** 2 for v in self.k))

    def to_record(self):
        lift = symplectic_lift(self)
        kinv_t = [[(f.numerator, f.denominator) for f in row]
                  for row in lift.K_inv_T]
        return json.dumps({
            "dimension": self.d,
            "rows": [list(r) for r in self.rows()],
            "det": self.det,
            "K_inv_T": kinv_t,
        }, indent=1)

    @staticmethod
    def from_record(text):
        data = json.loads(text)
        rows = [tuple(int(v) for v in r) for r in data["rows"]]
        return ResonanceFrame(rows[0], rows[1], tuple(rows[2:]),
                              int(data["det"]))


@dataclass(frozen=True)
class SymplecticLift:
    """Block map (x, y) -> (Kx, K^-T y) with exact rational K^-T."""

    K: tuple          # rows of Fractions
    K_inv_T: tuple    # rows of Fractions

    @property
    def d(self):
        return len(self.K)

    def apply(self, x, y):
        Kf = np.array([[float(v) for v in row] for row in self.K])
        KiTf = np.array([[float(v) for v in row] for row in self.K_inv_T])
        return Kf @ np.asarray(x), KiTf @ np.asarray(y)

    def symplectic_check(self):
        """Exact evaluation of Phi^T J0 Phi - J0; True iff identically 0."""
        d = self.d
        K = [list(r) for r in self.K]
        KiT = [list(r) for r in self.K_inv_T]
        z = [[Fraction(0)] * d for _ in range(d)]
        ident = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]

        def block(m11, m12, m21, m22):
            top = [m11[i] + m12[i] for i in range(d)]
            bot = [m21[i] + m22[i] for i in range(d)]
            return top + bot

        Phi = block(K, z, z, KiT)
        J = block(z, ident, [[-v for v in row] for row in ident], z)
        res = _mat_mul(_mat_mul(_transpose(Phi), J), Phi)
        return all(res[i][j] == J[i][j] for i in range(2 * d)
                   for j in range(2 * d))


@dataclass(frozen=True)
class PushforwardReport:
    omega_new: FrequencyVector
    bound1: float
    ratio2: float
    in_regime: bool


# ---------------------------------------------------------------------------
# operations

def orthogonal_partner(k, omega, search_radius=2.0):
    """Integer k' _|_ k with |k'| <= search_radius*|k| maximizing |<k',w>|/|k'|.

    For d = 2 this is the 90-degree rotation, sign-normalized.  In higher
    dimension the orthogonal sublattice is enumerated inside the box
    |k'|_inf <= ceil(search_radius*|k|) and filtered by the Euclidean
    radius; ties are broken lexicographically.
    """
    k = tuple(int(v) for v in k)
    d = len(k)
    if all(v == 0 for v in k):
        raise DomainError("k must be nonzero")
    if omega.d != d:
        raise DomainError("dimension mismatch")
    if d == 2:
        return _sign_normalize((-k[1], k[0]))

    knorm = math.sqrt(sum(v * v for v in k))
    bound = math.ceil(search_radius * knorm)
    axes = [np.arange(-bound, bound + 1, dtype=np.int64)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    karr = np.array(k, dtype=np.int64)
    grid = grid[grid @ karr == 0]
    nsq = np.sum(grid.astype(np.float64) ** 2, axis=1)
    keep = (nsq > 0) & (nsq <= (search_radius * knorm) ** 2 * (1 + 1e-12))
    grid = grid[keep]
    if len(grid) == 0:
        raise PartnerQualityError("orthogonal sublattice empty in search box")

    w = omega.as_floats()
    ratios = np.abs(grid @ w) / np.sqrt(np.sum(grid.astype(np.float64) ** 2,
                                               axis=1))
    best = ratios.max()
    near = grid[ratios >= best * (1 - 1e-12)]
    # exact re-ranking of the near-tied set, then lexicographic tie-break
    ctx = _mpf_ctx(omega.precision)
    scored = []
    for row in near:
        cand = _sign_normalize(tuple(int(v) for v in row))
        val = abs(ctx.fsum(wi * ci for wi, ci in zip(omega.entries, cand)))
        nrm = ctx.sqrt(sum(c * c for c in cand))
        scored.append((val / nrm, cand, val))
    top = max(s[0] for s in scored)
    tied = sorted(c for r, c, _ in scored if r >= top * (1 - ctx.mpf(1e-30)))
    choice = tied[0]
    value = abs(ctx.fsum(wi * ci for wi, ci in zip(omega.entries, choice)))
    if value < knorm / 8:
        raise PartnerQualityError(
            f"best partner frequency {float(value):.6g} below |k|/8",
            best_candidate=choice, best_value=float(value))
    return choice


def complete_frame(k, k_prime):
    """Fill rows 3..d spanning the integer orthogonal complement of (k, k').

    Integer kernel basis followed by exact rational Gram-Schmidt, with
    denominators cleared and content divided out, so every fill row is
    primitive and the frame rows are pairwise orthogonal.
    """
    k = tuple(int(v) for v in k)
    kp = tuple(int(v) for v in k_prime)
    d = len(k)
    if len(kp) != d:
        raise DomainError("dimension mismatch")
    if all(v == 0 for v in k) or all(v == 0 for v in kp):
        raise DomainError("frame rows must be nonzero")
    if sum(a * b for a, b in zip(k, kp)) != 0:
        raise DomainError("k and k' must be orthogonal")

    fill = []
    if d > 2:
        basis = integer_kernel_basis([k, kp])
        if len(basis) != d - 2:
            raise DomainError("inputs do not span a rank-2 sublattice")
        ortho = []
        for b in basis:
            v = [Fraction(x) for x in b]
            for prev in ortho:
                num = sum(a * b2 for a, b2 in zip(v, prev))
                den = sum(a * a for a in prev)
                coef = num / den
                v = [a - coef * b2 for a, b2 in zip(v, prev)]
            ortho.append(v)
        for v in ortho:
            lcm = 1
            for f in v:
                lcm = lcm * f.denominator // math.gcd(lcm, f.denominator)
            ints = [int(f * lcm) for f in v]
            fill.append(_primitive(ints))

    frame = ResonanceFrame(k, kp, tuple(fill), 0)
    det = _mat_det(_fraction_matrix(frame.rows()))
    if det == 0:
        raise DomainError("degenerate frame")
    frame = ResonanceFrame(k, kp, tuple(fill), int(det))
    _check_orthogonality(frame)
    return frame


def _check_orthogonality(frame):
    rows = frame.rows()
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if sum(int(a) * int(b) for a, b in zip(rows[i], rows[j])) != 0:
                raise DomainError(f"rows {i} and {j} are not orthogonal")


def cross_product(u, v):
    u, v = tuple(int(x) for x in u), tuple(int(x) for x in v)
    return (u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def symplectic_lift(frame):
    """Exact rational lift blockdiag(K, K^-T); identity checked exactly."""
    K = _fraction_matrix(frame.rows())
    if _mat_det(K) == 0:
        raise DomainError("singular frame matrix")
    KiT = _transpose(_mat_inv(K))
    lift = SymplecticLift(tuple(tuple(r) for r in K),
                          tuple(tuple(r) for r in KiT))
    if not lift.symplectic_check():
        raise DomainError("symplectic identity failed (internal error)")
    return lift


def pushforward(frame, omega, tau=0.0, bound1_max=10.0,
                ratio2_range=(0.1, 10.0)):
    """Push omega through the frame: omega' = K omega, with regime bounds.

    bound1 = |omega'_1| * |k|^(d+tau-1) tracks how deep the resonance
    is; ratio2 = |omega'_2| / |k| tracks the partner speed.
    """
    if omega.d != frame.d:
        raise DomainError("dimension mismatch")
    ctx = _mpf_ctx(omega.precision)
    new_entries = tuple(
        ctx.fsum(int(r) * w for r, w in zip(row, omega.entries))
        for row in frame.rows())
    omega_new = FrequencyVector(new_entries, omega.precision)
    knorm = frame.k_norm
    d = frame.d
    bound1 = float(abs(new_entries[0])) * knorm ** (d + tau - 1)
    ratio2 = float(abs(new_entries[1])) / knorm
    in_regime = bound1 <= bound1_max and \
        ratio2_range[0] <= ratio2 <= ratio2_range[1]
    return PushforwardReport(omega_new, bound1, ratio2, in_regime)
