"""Statistical distances between density operators.

The workhorse is mu(s) = log Tr A^{1-s} B^s together with its first two
derivatives.  Everything is evaluated on the two-distribution reduction from
``core.ns_mapping``: there the derivatives are an exact mean and variance of
the log-likelihood ratio under the tilted distribution, which is both the
textbook definition and numerically benign.  Operator differentiation is
never used.

Infinite values (perfectly distinguishable pairs) are returned as float
infinities, never raised, except by the low-level ``mu``/``mu_derivatives``
which the distance wrappers guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import logsumexp1d

from .core import DensityOperator, fractional_power, ns_mapping
from .errors import DisjointSupports, ValidationError

# Grid and refinement used for the Chernoff minimization.
_S_GRID = np.linspace(0.01, 0.99, 99)
_GOLDEN_TOL = 1e-8
_MASS_FLOOR = 1e-15  # joint-distribution entries below this are structural zeros


@dataclass
class MuProfile:
    """mu and its derivatives sampled on a grid of s values (all in nats)."""

    s_grid: np.ndarray
    mu: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray


class _NsData:
    """Cached log-domain view of the reduced pair, restricted to common support."""

    def __init__(self, A: DensityOperator, B: DensityOperator):
        pair = ns_mapping(A, B)
        q0 = pair.Q0.ravel()
        q1 = pair.Q1.ravel()
        common = (q0 > _MASS_FLOOR) & (q1 > _MASS_FLOOR)
        self.disjoint = not bool(common.any())
        if self.disjoint:
            return
        self.l0 = np.log(q0[common])
        self.l1 = np.log(q1[common])
        # A-mass on supp(B) and B-mass on supp(A): the s -> 0 / s -> 1 limits.
        self.a_mass = float(q0[q1 > _MASS_FLOOR].sum())
        self.b_mass = float(q1[q0 > _MASS_FLOOR].sum())

    def mu(self, s: float) -> float:
        if s == 0.0:
            return float(np.log(self.a_mass))
        if s == 1.0:
            return float(np.log(self.b_mass))
        return float(logsumexp1d((1.0 - s) * self.l0 + s * self.l1))

    def derivatives(self, s: float) -> tuple[float, float]:
        logw = (1.0 - s) * self.l0 + s * self.l1
        logw -= logsumexp1d(logw)
        w = np.exp(logw)
        llr = self.l1 - self.l0
        m1 = float(w @ llr)
        m2 = float(w @ (llr - m1) ** 2)
        return m1, max(m2, 0.0)


def _ns_data(A: DensityOperator, B: DensityOperator) -> _NsData:
    # The cache entry keeps a strong reference to B so its id cannot be
    # recycled while the entry is alive.
    cached = A.__dict__.setdefault("_ns_cache", {})
    entry = cached.get(id(B))
    if entry is None or entry[0] is not B:
        entry = (B, _NsData(A, B))
        cached[id(B)] = entry
    return entry[1]


def mu(A: DensityOperator, B: DensityOperator, s: float) -> float:
    """log Tr A^{1-s} B^s for s in [0, 1], endpoints by their limits."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"s={s} outside [0, 1]")
    data = _ns_data(A, B)
    if data.disjoint:
        raise DisjointSupports("mu undefined: operators have disjoint supports")
    return data.mu(s)


def mu_derivatives(A: DensityOperator, B: DensityOperator, s: float) -> tuple[float, float]:
    """(mu', mu'') at interior s: mean and variance of the log-likelihood ratio."""
    if not 0.0 < s < 1.0:
        raise ValidationError(f"s={s} outside (0, 1)")
    data = _ns_data(A, B)
    if data.disjoint:
        raise DisjointSupports("mu undefined: operators have disjoint supports")
    return data.derivatives(s)


def mu_profile(A: DensityOperator, B: DensityOperator, s_grid=None) -> MuProfile:
    if s_grid is None:
        s_grid = _S_GRID
    s_grid = np.asarray(s_grid, dtype=float)
    data = _ns_data(A, B)
    if data.disjoint:
        raise DisjointSupports("mu undefined: operators have disjoint supports")
    mus = np.array([data.mu(s) for s in s_grid])
    pairs = [data.derivatives(s) if 0.0 < s < 1.0 else (np.nan, np.nan) for s in s_grid]
    m1 = np.array([p[0] for p in pairs])
    m2 = np.array([p[1] for p in pairs])
    return MuProfile(s_grid=s_grid, mu=mus, mu1=m1, mu2=m2)


def _golden_min(f, lo: float, hi: float, tol: float = _GOLDEN_TOL) -> tuple[float, float]:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    s = (a + b) / 2
    return s, f(s)


def chernoff_distance(A: DensityOperator, B: DensityOperator) -> tuple[float, float]:
    """-min_s mu(s) over [0, 1] and the minimizing s.

    Returns (inf, 0.5) for perfectly distinguishable pairs.  A flat mu
    profile (identical or pure-state pairs) reports s* = 0.5.
    """
    data = _ns_data(A, B)
    if data.disjoint:
        return float("inf"), 0.5
    vals = np.array([data.mu(s) for s in _S_GRID])
    if vals.max() - vals.min() < 1e-12:
        return -data.mu(0.5), 0.5
    candidates = [(data.mu(0.0), 0.0), (data.mu(1.0), 1.0)]
    i = int(np.argmin(vals))
    lo = _S_GRID[i - 1] if i > 0 else 0.0
    hi = _S_GRID[i + 1] if i < len(_S_GRID) - 1 else 1.0
    s_star, v = _golden_min(data.mu, lo, hi)
    candidates.append((v, s_star))
    v_best, s_best = min(candidates, key=lambda t: t[0])
    return -v_best, s_best


def bhattacharyya_distance(A: DensityOperator, B: DensityOperator) -> float:
    """-log Tr sqrt(A) sqrt(B); infinite on orthogonal supports."""
    data = _ns_data(A, B)
    if data.disjoint:
        return float("inf")
    return -data.mu(0.5)


def fidelity_distance(A: DensityOperator, B: DensityOperator) -> float:
    """-log Tr |sqrt(A) sqrt(B)|, computed from the singular values."""
    C = fractional_power(A, 0.5) @ fractional_power(B, 0.5)
    nuclear = float(np.linalg.svd(C, compute_uv=False).sum())
    if nuclear <= 0.0:
        return float("inf")
    return -float(np.log(nuclear))


def renyi_divergence(A: DensityOperator, B: DensityOperator, alpha: float) -> float:
    """Renyi divergence of order alpha: (1/(alpha-1)) log Tr A^alpha B^{1-alpha}.

    For alpha > 1 the value is infinite unless supp(A) is contained in
    supp(B).  alpha == 1 falls back to the Kullback-Leibler value of the
    reduced pair.
    """
    if alpha <= 0:
        raise ValidationError(f"alpha={alpha} must be positive")
    pair = ns_mapping(A, B)
    q0 = pair.Q0.ravel()
    q1 = pair.Q1.ravel()
    common = (q0 > _MASS_FLOOR) & (q1 > _MASS_FLOOR)
    if not common.any():
        return float("inf")
    a_outside = float(q0[~(q1 > _MASS_FLOOR)].sum())
    l0 = np.log(q0[common])
    l1 = np.log(q1[common])
    if abs(alpha - 1.0) < 1e-12:
        if a_outside > 1e-12:
            return float("inf")
        w = q0[common]
        return max(float(w @ (l0 - l1)), 0.0)
    if alpha > 1.0 and a_outside > 1e-12:
        return float("inf")
    val = float(logsumexp1d(alpha * l0 + (1.0 - alpha) * l1)) / (alpha - 1.0)
    return max(val, 0.0)
