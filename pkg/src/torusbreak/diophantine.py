"""Arithmetic of frequency vectors.

Continued fractions, small denominators ``<omega, k>``, exhaustive
Dirichlet resonance scans, and a finite-scale estimate of the
approximability exponent.  All frequency data is held in extended
precision (mpmath) so that near-resonances ``|<omega,k>| ~ |k|^-beta``
are resolved well beyond double precision.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np
import mpmath

from .errors import DomainError

DEFAULT_PRECISION_BITS = 128

# Largest lattice cell count the exhaustive scan will accept.
_MAX_SCAN_CELLS = 2 * 10**8


def _mpf_ctx(precision_bits):
    ctx = mpmath.mp.clone()
    ctx.prec = int(precision_bits)
    return ctx


@dataclass(frozen=True)
class FrequencyVector:
    """A d-vector of real frequencies with a declared working precision.

    ``entries`` are mpmath floats rounded to ``precision`` bits; all
    small-denominator evaluations run at that precision, so results are
    deterministic for a fixed precision.
    """

    entries: tuple
    precision: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        if len(self.entries) < 2:
            raise DomainError("frequency vector needs dimension d >= 2")
        ctx = _mpf_ctx(self.precision)
        vals = []
        for e in self.entries:
            if isinstance(e, (int, Fraction)):
                # exact rational entries support exact resonance zeros
                vals.append(Fraction(e))
                continue
            v = +ctx.convert(e)
            if not ctx.isfinite(v):
                raise DomainError("frequency entries must be finite")
            vals.append(v)
        if all(v == 0 for v in vals):
            raise DomainError("frequency vector must not be zero")
        object.__setattr__(self, "entries", tuple(vals))

    @property
    def d(self):
        return len(self.entries)

    @property
    def is_rational(self):
        return all(isinstance(v, Fraction) for v in self.entries)

    def as_floats(self):
        return np.array([float(v) for v in self.entries])

    def with_precision(self, precision_bits):
        return FrequencyVector(self.entries, precision_bits)


@dataclass(frozen=True)
class ResonanceHit:
    """One near-resonance: integer vector, its small denominator and size.

    ``tau_eff`` solves ``|value| = |k|^-(d-1+tau_eff)`` for hits with
    ``0 < |value| < 1`` and ``|k| > 1``.  Exact zeros carry ``+inf``;
    ``|value| >= 1`` is flagged as a non-hit with ``-inf``; unit-norm
    vectors make the defining equation degenerate and carry ``nan``.
    """

    k: tuple
    value: object          # mpmath.mpf at the vector's precision
    norm: float
    tau_eff: float
    d: int

    @property
    def is_hit(self):
        return self.tau_eff != float("-inf")

    @property
    def beta_eff(self):
        """Exponent with |value| = |k|^-beta_eff (d-1+tau_eff)."""
        return self.d - 1 + self.tau_eff


@dataclass(frozen=True)
class DiophantineProfile:
    beta_est: float
    hits: tuple
    scan_bound: int
    liouville_flag: bool
    resonant: bool = False
    subscan_betas: tuple = field(default=())
    subscan_bounds: tuple = field(default=())


def cf_expand(x, n_terms, precision=53):
    """First ``n_terms`` continued-fraction partial quotients of ``x``.

    Terminates early when the tail is an integer at working precision
    (rational input detected), so e.g. 3/10 expands to [0, 3, 3].
    """
    if n_terms < 1:
        raise DomainError("n_terms must be >= 1")
    if isinstance(x, Fraction):
        return _cf_expand_exact(x, n_terms)
    ctx = _mpf_ctx(max(precision, 53) + 16)
    v = ctx.mpf(x)
    if not ctx.isfinite(v):
        raise DomainError("cf_expand needs finite input")
    eps = ctx.mpf(2) ** (-(max(precision, 53) // 2))
    out = []
    for _ in range(n_terms):
        nearest = ctx.nint(v)
        if abs(v - nearest) < eps:
            out.append(int(nearest))
            break
        a = ctx.floor(v)
        out.append(int(a))
        v = 1 / (v - a)
    return out


def _cf_expand_exact(x, n_terms):
    out = []
    p, q = x.numerator, x.denominator
    for _ in range(n_terms):
        a, r = divmod(p, q)
        out.append(int(a))
        if r == 0:
            break
        p, q = q, r
    return out


def small_denominator(omega, k):
    """``<omega, k>`` at the vector's declared precision.

    Exact-rational frequency entries are combined in exact arithmetic,
    so true resonances return an exact zero.
    """
    k = tuple(int(v) for v in k)
    if len(k) != omega.d:
        raise DomainError("dimension mismatch")
    if all(v == 0 for v in k):
        raise DomainError("k must be nonzero")
    ctx = _mpf_ctx(omega.precision)
    if omega.is_rational:
        exact = sum(w * ki for w, ki in zip(omega.entries, k))
        return ctx.mpf(0) if exact == 0 else ctx.convert(exact)
    return ctx.fsum(ctx.convert(w) * ki
                    for w, ki in zip(omega.entries, k))


def _tau_eff(value_abs_ln, norm_sq, d, exact_zero):
    if exact_zero:
        return float("inf")
    if value_abs_ln >= 0:          # |value| >= 1
        return float("-inf")
    if norm_sq <= 1:
        return float("nan")
    ln_norm = 0.5 * math.log(norm_sq)
    return -value_abs_ln / ln_norm - (d - 1)


def _representatives(d, k_max):
    """All k with 0 < |k|_inf <= k_max, first nonzero entry positive."""
    cells = (2 * k_max + 1) ** d
    if cells > _MAX_SCAN_CELLS:
        raise DomainError(
            f"scan of {cells} lattice cells exceeds the desk-scale bound; "
            "reduce k_max or d")
    axes = [np.arange(-k_max, k_max + 1, dtype=np.int64)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = np.zeros(len(grid), dtype=bool)
    undecided = np.ones(len(grid), dtype=bool)
    for j in range(d):
        col = grid[:, j]
        keep |= undecided & (col > 0)
        undecided &= col == 0
    return grid[keep]


def find_resonances(omega, k_max, C=1.0, partitions=1):
    """Every representative k with ``|<omega,k>| < C / |k|^(d-1)``.

    One representative per +-k pair (first nonzero entry positive),
    sorted by Euclidean norm ascending, ties lexicographic.  Candidates
    are prefiltered in double precision with a safety margin and then
    verified at the vector's full precision, so output is independent
    of how the scan is partitioned.
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    if C <= 0:
        raise DomainError("C must be positive")
    d = omega.d
    reps = _representatives(d, k_max)
    chunks = np.array_split(reps, max(1, int(partitions)))
    cands = [c for chunk in chunks for c in _prefilter(omega, chunk, C)]
    hits = _verify_hits(omega, cands, C)
    hits.sort(key=lambda h: (_norm_sq(h.k), h.k))
    return hits


def _norm_sq(k):
    return sum(int(v) * int(v) for v in k)


def _prefilter(omega, reps, C):
    if len(reps) == 0:
        return []
    w = omega.as_floats()
    vals = np.abs(reps @ w)
    nsq = np.sum(reps.astype(np.float64) ** 2, axis=1)
    d = omega.d
    thr = C / nsq ** ((d - 1) / 2.0)
    # double-precision slack: dot-product rounding is far below 1e-9 here
    mask = vals < thr * (1 + 1e-9) + 1e-12
    return [tuple(int(v) for v in row) for row in reps[mask]]


def _verify_hits(omega, candidates, C):
    ctx = _mpf_ctx(omega.precision)
    d = omega.d
    Cm = ctx.mpf(C)
    rational = omega.is_rational
    out = []
    for k in candidates:
        if rational:
            exact = sum(w * ki for w, ki in zip(omega.entries, k))
            val = ctx.mpf(0) if exact == 0 else ctx.convert(exact)
        else:
            val = ctx.fsum(ctx.convert(w) * ki
                           for w, ki in zip(omega.entries, k))
        nsq = _norm_sq(k)
        bound = Cm / ctx.sqrt(nsq) ** (d - 1)
        if abs(val) < bound:
            exact_zero = val == 0
            vln = float("-inf") if exact_zero else float(ctx.log(abs(val)))
            out.append(ResonanceHit(
                k=k, value=val, norm=math.sqrt(nsq),
                tau_eff=_tau_eff(vln, nsq, d, exact_zero), d=d))
    return out


def _record_hits(hits):
    """Successive minima of |value| in norm order; exact zeros excluded."""
    records, best = [], None
    for h in hits:
        av = abs(h.value)
        if av == 0:
            continue
        if best is None or av < best:
            records.append(h)
            best = av
    return records


def _fit_beta(records, d):
    pts = [(0.5 * math.log(_norm_sq(r.k)), -float(mpmath.log(abs(r.value))))
           for r in records]
    if len(pts) < 2:
        return float(d - 1)
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    xc = xs - xs.mean()
    denom = float(xc @ xc)
    if denom == 0:
        return float(d - 1)
    slope = float(xc @ (ys - ys.mean())) / denom
    return max(float(d - 1), slope)


def classify(omega, k_max, C=1.0, growth_threshold=0.15):
    """Finite-scale approximability profile of ``omega``.

    beta_est is the least-squares slope of -ln|<omega,k>| against ln|k|
    over the record hits (successive small-denominator minima), clamped
    below by d-1.  The Liouvillean heuristic re-fits the slope at dyadic
    sub-bounds and flags monotone growth; it is a finite-scale signal,
    not a proof of type.
    """
    if k_max < 2:
        raise DomainError("k_max must be >= 2")
    d = omega.d
    hits = find_resonances(omega, k_max, C=C)
    resonant = any(h.value == 0 for h in hits)
    records = _record_hits(hits)
    beta_est = _fit_beta(records, d)

    bounds = []
    b = 4
    while b < k_max:
        bounds.append(b)
        b *= 2
    bounds.append(k_max)
    betas = []
    for b in bounds:
        sub = [r for r in records if max(abs(v) for v in r.k) <= b]
        betas.append(_fit_beta(sub, d))
    nondecreasing = all(b2 >= b1 - 1e-9 for b1, b2 in zip(betas, betas[1:]))
    grows = len(betas) >= 3 and nondecreasing and \
        (betas[-1] - betas[0]) > growth_threshold
    return DiophantineProfile(
        beta_est=beta_est,
        hits=tuple(hits),
        scan_bound=int(k_max),
        liouville_flag=bool(grows and not resonant),
        resonant=resonant,
        subscan_betas=tuple(betas),
        subscan_bounds=tuple(bounds),
    )


def preset(name, d=2, precision=DEFAULT_PRECISION_BITS):
    """Named frequency vectors used throughout the test suite and CLI."""
    ctx = _mpf_ctx(precision + 16)
    if name == "golden":
        gamma = (ctx.sqrt(5) - 1) / 2
        return FrequencyVector((ctx.mpf(1), gamma), precision)
    if name == "spread-d":
        ents = tuple(ctx.mpf(2) ** (ctx.mpf(j) / d) for j in range(d))
        return FrequencyVector(ents, precision)
    if name == "liouville-demo":
        # truncation of sum 10^(-j!); terms beyond 10^-24 are below any
        # desk-scale precision we run at
        ell = ctx.fsum(ctx.mpf(10) ** (-math.factorial(j)) for j in range(1, 5))
        return FrequencyVector((ctx.mpf(1), ell), precision)
    raise DomainError(f"unknown preset {name!r}")
