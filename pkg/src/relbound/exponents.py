"""Error-exponent and rate functionals.

Rates and exponents are in nats.  Perfectly-distinguishable regimes are
reported as float('inf'), never raised.

The reliability-style quantities follow one template: an inner maximization
over the input simplex (through ``optim.simplex_minimize``) and an outer
scalar sup over the tilt parameter.  Inner solutions are cached per channel
and warm-started along parameter grids, which keeps curve sweeps cheap.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._util import logsumexp1d
from scipy.optimize import linprog

from . import divergence
from .core import (
    CQChannel,
    ClassicalChannel,
    DensityOperator,
    as_cq_channel,
    as_distribution,
    fractional_power,
    support_projector,
)
from .errors import CertificateFailure, NoConvergence, ValidationError
from .optim import SimplexResult, default_starts, minimize_lambda_max, simplex_minimize

RHO_LO = 1e-6
RHO_HI = 1e6
# sup_rho is declared divergent when the objective still climbs past this
# point by more than the slope floor; see esp().
RHO_TAIL = (1e4, 1e5, 1e6)
TAIL_EPS = 1e-6


@dataclass
class ExponentReport:
    """Value of an exponent functional plus the optimizers that certify it."""

    value: float
    optimizer_P: np.ndarray
    optimizer_rho_or_s: float
    certificate: dict | None = None


@dataclass
class BoundCurve:
    """Sampled (R, E) pairs of one named bound."""

    points: list
    bound_name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        R = np.array([r for r, _ in self.points], dtype=float)
        if R.size and np.any(np.diff(R) <= 0):
            raise ValidationError("curve R values must be strictly increasing")

    def rates(self) -> np.ndarray:
        return np.array([r for r, _ in self.points], dtype=float)

    def values(self) -> np.ndarray:
        return np.array([e for _, e in self.points], dtype=float)


class RadiusCertificate(NamedTuple):
    r_rho: float
    f_s: DensityOperator
    max_residual: float


class EspRinftyCheck(NamedTuple):
    esp_limit: float
    r_inf: float
    ok: bool


# ---------------------------------------------------------------------------
# E0 and its maximization
# ---------------------------------------------------------------------------

def _classical_e0_oracle(W: np.ndarray, rho: float):
    # log-domain evaluation: a**(1+rho) underflows for rho ~ 1e4 and beyond
    Wa = W ** (1.0 / (1.0 + rho))

    def oracle(p):
        a = p @ Wa
        pos = a > 0
        la = np.log(a[pos])
        logF = logsumexp1d((1.0 + rho) * la)
        weights = np.exp(rho * la - logF)  # a_y^rho / F on the support
        g = np.zeros_like(p)
        g = (1.0 + rho) * (Wa[:, pos] @ weights)
        return float(logF), g

    return oracle


def _quantum_e0_oracle(channel: CQChannel, rho: float):
    T = np.stack([fractional_power(s, 1.0 / (1.0 + rho)) for s in channel.states])

    def oracle(p):
        M = np.einsum("x,xij->ij", p, T)
        w, V = np.linalg.eigh(M)
        pos = w > 0
        lw = np.log(w[pos])
        logF = logsumexp1d((1.0 + rho) * lw)
        weights = np.exp(rho * lw - logF)
        Vp = V[:, pos]
        G = (Vp * weights) @ Vp.conj().T  # = M^rho / F on the support
        g = (1.0 + rho) * np.real(np.einsum("ij,xji->x", G, T))
        return float(logF), g

    return oracle


def _e0_oracle(channel, rho: float):
    """Oracle for minimizing -E0(rho, P) = log Tr (sum_x P(x) S_x^{1/(1+rho)})^{1+rho}."""
    if isinstance(channel, ClassicalChannel):
        return _classical_e0_oracle(channel.W, rho)
    return _quantum_e0_oracle(channel, rho)


def e0(channel, rho: float, P) -> float:
    """Gallager function E0(rho, P), >= 0."""
    if rho < 0:
        raise ValidationError(f"rho={rho} must be >= 0")
    n = channel.num_inputs
    p = as_distribution(P, n)
    if rho == 0.0:
        return 0.0
    val, _ = _e0_oracle(channel, rho)(p)
    return max(-val, 0.0)


def _num_inputs(channel) -> int:
    return channel.num_inputs


def e0_max(channel, rho: float, *, tol: float = 1e-9, warm=None,
           max_iter: int = 50_000) -> ExponentReport:
    """max_P E0(rho, P) with the first-order certificate of the optimum.

    The certificate records the stationarity residual of the condition
    Tr(S_x^{1-s} A_s^{s/(1-s)}) >= Tr(A_s^{1/(1-s)}) with s = rho/(1+rho),
    which holds with equality on the support of the optimizer.
    """
    if rho < 0:
        raise ValidationError(f"rho={rho} must be >= 0")
    n = _num_inputs(channel)
    uniform = np.full(n, 1.0 / n)
    if rho == 0.0:
        return ExponentReport(value=0.0, optimizer_P=uniform, optimizer_rho_or_s=0.0,
                              certificate={"lagr_residual": 0.0, "s": 0.0})
    oracle = _e0_oracle(channel, rho)
    if warm is not None:
        starts = [np.asarray(warm, dtype=float), uniform]
    elif isinstance(channel, ClassicalChannel):
        starts = [uniform]  # concavity in P is classical textbook material
    else:
        starts = default_starts(n)
    res = simplex_minimize(oracle, n, tol=tol, starts=starts, max_iter=max_iter)
    value = max(-res.value, 0.0)
    cert = _lagrange_certificate(channel, rho, res.p_star)
    return ExponentReport(value=value, optimizer_P=res.p_star,
                          optimizer_rho_or_s=rho, certificate=cert)


def _lagrange_certificate(channel, rho: float, p: np.ndarray) -> dict:
    s = rho / (1.0 + rho)
    cq = as_cq_channel(channel)
    T = np.stack([fractional_power(st, 1.0 / (1.0 + rho)) for st in cq.states])
    M = np.einsum("x,xij->ij", p, T)
    w, V = np.linalg.eigh(M)
    pos = w > 0
    lw = np.log(w[pos])
    logF = logsumexp1d((1.0 + rho) * lw)
    weights = np.exp(rho * lw - logF)
    Vp = V[:, pos]
    G = (Vp * weights) @ Vp.conj().T
    # ratio_x = Tr(S_x^{1-s} A_s^{s/(1-s)}) / Tr(A_s^{1/(1-s)}), stable at any rho
    ratio = np.real(np.einsum("ij,xji->x", G, T))
    rhs = float(np.exp(logF))
    lhs = ratio * rhs
    ineq = max(0.0, float(np.max(rhs - lhs)))
    loaded = p > 1e-8
    eq = float(np.max(np.abs(lhs[loaded] - rhs))) if loaded.any() else 0.0
    return {"lagr_residual": ineq + eq, "s": s,
            "lagr_ineq": ineq, "lagr_eq": eq,
            "ratio_residual": float(np.max(np.abs(ratio[loaded] - 1.0))) if loaded.any() else 0.0}


def _e0_cached(channel, rho: float, *, tol: float = 1e-9) -> ExponentReport:
    """Warm-started, memoized, best-effort E0(rho) maximization.

    This path feeds sup-over-rho computations, where the best iterate found
    is a valid lower bound, so a missed KKT tolerance is flagged in the
    certificate instead of raised.  Past rho ~ 1e3 the inner objective
    degenerates toward the non-smooth min-max eigenvalue program and
    the tolerance is relaxed outright.
    """
    cache = channel._cache.setdefault("e0", {})
    rep = cache.get(rho)
    if rep is None:
        warm = None
        if cache:
            nearest = min(cache, key=lambda r: abs(np.log(max(r, 1e-12)) - np.log(max(rho, 1e-12))))
            warm = cache[nearest].optimizer_P
        try:
            rep = e0_max(channel, rho, tol=(tol if rho <= 1e3 else 1e-6), warm=warm,
                         max_iter=4000)
        except NoConvergence as exc:
            res = exc.result
            rep = ExponentReport(value=max(-res.value, 0.0), optimizer_P=res.p_star,
                                 optimizer_rho_or_s=rho,
                                 certificate={"converged": False,
                                              "kkt_residual": res.kkt_residual})
        cache[rho] = rep
    return rep


def _sup_scalar(f, grid: np.ndarray, *, refine_tol: float = 1e-6) -> tuple[float, float]:
    """max of f over grid points plus golden-section refinement.

    The refinement assumes unimodality near the incumbent; when the grid
    profile shows several interior maxima it first rescans densely around
    the best one.  An interval tolerance of 1e-6 leaves the value accurate
    to ~1e-12 near a smooth maximum.
    """
    vals = np.array([f(x) for x in grid])
    i = int(np.argmax(vals))
    interior_maxima = 0
    for j in range(1, len(grid) - 1):
        if vals[j] >= vals[j - 1] and vals[j] >= vals[j + 1]:
            interior_maxima += 1
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if interior_maxima > 1:
        dense = np.linspace(lo, hi, 200)
        dvals = np.array([f(x) for x in dense])
        k = int(np.argmax(dvals))
        lo = dense[max(k - 1, 0)]
        hi = dense[min(k + 1, len(dense) - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > refine_tol * max(1.0, abs(a) + abs(b)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2
    fx = f(x)
    if fx >= vals[i]:
        return float(fx), float(x)
    return float(vals[i]), float(grid[i])


def _tail_divergent(g) -> bool:
    """True when g(rho) keeps climbing across the top decades of the rho range."""
    v = [g(r) for r in RHO_TAIL]
    return v[2] > v[1] > v[0] and (v[2] - v[0]) > TAIL_EPS


def esp(channel, R: float) -> float:
    """Sphere-packing exponent sup_{rho >= 0} [E0(rho) - rho R].

    Returns inf for rates below the divergence point, detected by the
    objective still climbing at the top of the log-uniform rho range.
    """
    if R <= 0:
        raise ValidationError(f"R={R} must be positive")
    return _esp_report(channel, R).value


def _esp_report(channel, R: float) -> ExponentReport:
    def g(rho):
        return _e0_cached(channel, rho).value - rho * R

    if _tail_divergent(g):
        return ExponentReport(value=float("inf"), optimizer_P=None,
                              optimizer_rho_or_s=float("inf"),
                              certificate={"divergent": True})
    # log-uniform coarse grid, then golden refinement in log(1+rho)
    grid = np.logspace(np.log10(RHO_LO), np.log10(RHO_HI), 49)

    def g_log(u):
        return g(np.expm1(u))

    val, u_star = _sup_scalar(g_log, np.log1p(grid))
    rho_star = float(np.expm1(u_star))
    val = max(val, 0.0)
    rep = _e0_cached(channel, rho_star)
    return ExponentReport(value=float(val), optimizer_P=rep.optimizer_P,
                          optimizer_rho_or_s=rho_star, certificate=rep.certificate)


def er(channel, R: float) -> float:
    """Random-coding exponent max_{0 <= rho <= 1} [E0(rho) - rho R]."""
    if R <= 0:
        raise ValidationError(f"R={R} must be positive")

    def g(rho):
        return _e0_cached(channel, rho).value - rho * R

    grid = np.linspace(0.0, 1.0, 21)
    val, _ = _sup_scalar(g, grid)
    return max(float(val), 0.0)


def r_rho(channel, rho: float) -> float:
    """Rate R_rho = E0(rho)/rho where the rho-line meets the R axis."""
    if rho <= 0:
        raise ValidationError(f"rho={rho} must be positive")
    return _e0_cached(channel, rho).value / rho


# ---------------------------------------------------------------------------
# expurgated exponent
# ---------------------------------------------------------------------------

def expurgated_affinity(channel) -> np.ndarray:
    """Pairwise affinities Tr sqrt(S_x) sqrt(S_x'); classically sum_y sqrt(W W')."""
    cache = channel._cache
    A = cache.get("affinity")
    if A is not None:
        return A
    if isinstance(channel, ClassicalChannel):
        sq = np.sqrt(channel.W)
        A = sq @ sq.T
    else:
        roots = [fractional_power(s, 0.5) for s in channel.states]
        n = channel.num_inputs
        A = np.empty((n, n))
        for x in range(n):
            for y in range(x, n):
                A[x, y] = A[y, x] = float(np.real(np.trace(roots[x] @ roots[y])))
    A = np.clip((A + A.T) / 2, 0.0, None)
    cache["affinity"] = A
    return A


def e_x(channel, rho: float, P) -> float:
    """Expurgated coefficient E_x(rho, P) = -rho log sum P P (affinity)^{1/rho}."""
    if rho < 1:
        raise ValidationError(f"rho={rho} must be >= 1")
    A = expurgated_affinity(channel)
    p = as_distribution(P, channel.num_inputs)
    return float(-rho * np.log(p @ (A ** (1.0 / rho)) @ p))


def e_x_max(channel, rho: float, *, tol: float = 1e-9) -> ExponentReport:
    """max_P E_x(rho, P).

    The Hadamard power of the affinity matrix need not stay positive
    semidefinite for rho > 1, so the quadratic is minimized from every
    default start.
    """
    if rho < 1:
        raise ValidationError(f"rho={rho} must be >= 1")
    cache = channel._cache.setdefault("ex", {})
    rep = cache.get(rho)
    if rep is not None:
        return rep
    A = expurgated_affinity(channel)
    K = A ** (1.0 / rho)
    n = channel.num_inputs

    def oracle(p):
        Kp = K @ p
        return float(p @ Kp), 2.0 * Kp

    res = simplex_minimize(oracle, n, tol=tol)
    value = float(-rho * np.log(res.value))
    rep = ExponentReport(value=value, optimizer_P=res.p_star, optimizer_rho_or_s=rho,
                         certificate={"kkt_residual": res.kkt_residual})
    cache[rho] = rep
    return rep


def eex(channel, R: float) -> float:
    """Expurgated exponent sup_{rho >= 1} [E_x(rho) - rho R].

    Infinite when the affinity matrix has a zero entry and the sup keeps
    climbing (zero-error regime).
    """
    if R <= 0:
        raise ValidationError(f"R={R} must be positive")

    def g(rho):
        return e_x_max(channel, rho).value - rho * R

    A = expurgated_affinity(channel)
    off = A[~np.eye(A.shape[0], dtype=bool)]
    if off.size and off.min() <= 0.0 and _tail_divergent(g):
        return float("inf")
    grid = np.logspace(0.0, np.log10(RHO_HI), 31)

    def g_log(u):
        return g(max(np.expm1(u), 1.0))

    val, _ = _sup_scalar(g_log, np.log1p(grid))
    return max(float(val), 0.0)


# ---------------------------------------------------------------------------
# information radii
# ---------------------------------------------------------------------------

def radius_certificate(channel, rho: float) -> RadiusCertificate:
    """R_rho as a min-max Renyi radius, certified by its dual center.

    Builds the center F_s = A_s^{1/(1-s)} / Tr A_s^{1/(1-s)} from the
    optimal input distribution at s = rho/(1+rho) and verifies
    max_x D_alpha(S_x || F_s) = R_rho with alpha = 1/(1+rho).
    """
    if rho <= 0:
        raise ValidationError(f"rho={rho} must be positive")
    cq = as_cq_channel(channel)
    residual, out = _radius_attempt(cq, rho, tol=1e-8)
    if residual > 1e-5:
        residual, out = _radius_attempt(cq, rho, tol=1e-10)
    if residual > 1e-5:
        raise CertificateFailure(
            f"information-radius residual {residual:.3e} > 1e-5 at rho={rho}")
    return out


def _radius_attempt(cq: CQChannel, rho: float, *, tol: float) -> tuple[float, RadiusCertificate]:
    rep = e0_max(cq, rho, tol=tol)
    value = rep.value / rho
    p = rep.optimizer_P
    T = np.stack([fractional_power(s, 1.0 / (1.0 + rho)) for s in cq.states])
    M = np.einsum("x,xij->ij", p, T)
    w, V = np.linalg.eigh(M)
    w = np.maximum(w, 0.0)
    F = (V * w ** (1.0 + rho)) @ V.conj().T
    F = F / np.trace(F).real
    f_s = DensityOperator(F)
    alpha = 1.0 / (1.0 + rho)
    radii = [divergence.renyi_divergence(s, f_s, alpha) for s in cq.states]
    residual = abs(max(radii) - value)
    return residual, RadiusCertificate(r_rho=value, f_s=f_s, max_residual=residual)


def r_infinity(channel) -> ExponentReport:
    """-log min_P lambda_max(sum_x P(x) S_x^0): the rate where E_sp diverges."""
    cq = as_cq_channel(channel)
    cached = cq._cache.get("r_infinity")
    if cached is not None:
        return cached
    ops = [support_projector(s) for s in cq.states]
    res: SimplexResult = minimize_lambda_max(ops)
    rep = ExponentReport(value=max(float(-np.log(res.value)), 0.0), optimizer_P=res.p_star,
                         optimizer_rho_or_s=float("inf"),
                         certificate={"gap": res.kkt_residual})
    cq._cache["r_infinity"] = rep
    return rep


def r_infinity_classical(W: ClassicalChannel) -> float:
    """max_P [-log max_y sum_{x: W_x(y)>0} P(x)], solved as a linear program.

    Kept deliberately independent of the eigenvalue route in r_infinity so
    the two can cross-check each other.
    """
    if not isinstance(W, ClassicalChannel):
        raise ValidationError("r_infinity_classical expects a ClassicalChannel")
    B = (W.W > 0).astype(float)
    nx, ny = B.shape
    c = np.zeros(nx + 1)
    c[-1] = 1.0
    A_ub = np.hstack([B.T, -np.ones((ny, 1))])
    A_eq = np.zeros((1, nx + 1))
    A_eq[0, :nx] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(ny), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * nx + [(None, None)], method="highs")
    if not res.success:
        raise ValidationError(f"LP for classical R_infinity failed: {res.message}")
    return max(float(-np.log(res.x[-1])), 0.0)


# ---------------------------------------------------------------------------
# zero-rate exponent and cutoff rate
# ---------------------------------------------------------------------------

def zero_rate(channel) -> ExponentReport:
    """Reliability at zero rate: max_P [-sum P P log Tr sqrt(S_x) sqrt(S_x')].

    The quadratic is indefinite; supports of size <= 3 are enumerated
    exactly and a multi-start ascent covers wider optima.  The result is a
    certified achievable value (the optimizer is returned); for more than 12
    inputs the report is flagged heuristic.
    """
    cq = as_cq_channel(channel)
    A = expurgated_affinity(cq)
    n = A.shape[0]
    mask = ~np.eye(n, dtype=bool)
    if n > 1 and A[mask].min() <= 0.0:
        x, y = np.argwhere((A <= 0.0) & mask)[0]
        return ExponentReport(value=float("inf"), optimizer_P=None,
                              optimizer_rho_or_s=float("inf"),
                              certificate={"orthogonal_pair": (int(x), int(y))})
    with np.errstate(divide="ignore"):
        L = -np.log(np.clip(A, 1e-300, None))
    np.fill_diagonal(L, 0.0)

    best_val, best_p = 0.0, None
    # exact enumeration over supports of size <= 3
    for x in range(n):
        for y in range(x + 1, n):
            v = L[x, y] / 2.0
            if v > best_val:
                p = np.zeros(n)
                p[x] = p[y] = 0.5
                best_val, best_p = v, p
            for z in range(y + 1, n):
                idx = (x, y, z)
                sub = L[np.ix_(idx, idx)]
                try:
                    q = np.linalg.solve(sub, np.ones(3))
                except np.linalg.LinAlgError:
                    continue
                if q.sum() <= 0:
                    continue
                q /= q.sum()
                if np.all(q > 0):
                    v = float(q @ sub @ q)
                    if v > best_val:
                        p = np.zeros(n)
                        p[list(idx)] = q
                        best_val, best_p = v, p
    # multi-start ascent for supports beyond size 3
    if n > 3:
        def oracle(p):
            Lp = L @ p
            return float(-(p @ Lp)), -2.0 * Lp

        try:
            res = simplex_minimize(oracle, n, tol=1e-9)
            if -res.value > best_val:
                best_val, best_p = -res.value, res.p_star
        except Exception:
            pass
    if best_p is None:
        best_p = np.full(n, 1.0 / n)
    return ExponentReport(value=float(best_val), optimizer_P=best_p,
                          optimizer_rho_or_s=float("inf"),
                          certificate={"certified_lower_bound": True,
                                       "heuristic": n > 12})


def cutoff_rate(W: ClassicalChannel) -> float:
    """-log min_P sum P P sum_y sqrt(W_x(y) W_x'(y))."""
    return cutoff_rate_report(W).value


def cutoff_rate_report(W: ClassicalChannel) -> ExponentReport:
    if not isinstance(W, ClassicalChannel):
        raise ValidationError("cutoff_rate expects a ClassicalChannel")
    cached = W._cache.get("cutoff")
    if cached is not None:
        return cached
    A = expurgated_affinity(W)
    n = W.num_inputs

    def oracle(p):
        Ap = A @ p
        return float(p @ Ap), 2.0 * Ap

    res = simplex_minimize(oracle, n, tol=1e-10)
    rep = ExponentReport(value=float(-np.log(res.value)), optimizer_P=res.p_star,
                         optimizer_rho_or_s=1.0,
                         certificate={"kkt_residual": res.kkt_residual})
    W._cache["cutoff"] = rep
    return rep


def esp_at_rinfty_check(channel, *, eps_grid=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4)) -> EspRinftyCheck:
    """Verify E_sp(R_infinity^+) <= R_infinity on a pure-state channel."""
    cq = as_cq_channel(channel)
    if not cq.is_pure:
        raise ValidationError("esp_at_rinfty_check requires a pure-state channel")
    r_inf = r_infinity(cq).value
    vals = [esp(cq, r_inf + e) for e in sorted(eps_grid, reverse=True)]
    esp_limit = vals[-1]
    return EspRinftyCheck(esp_limit=float(esp_limit), r_inf=float(r_inf),
                          ok=bool(esp_limit <= r_inf + 1e-4))


# ---------------------------------------------------------------------------
# curves and their CSV format
# ---------------------------------------------------------------------------

def _grid_curve(R_grid, rho_grid, e_of_rho, name: str, *, check_tail=True) -> BoundCurve:
    R_grid = np.asarray(R_grid, dtype=float)
    rho_grid = np.asarray(rho_grid, dtype=float)
    evals = np.array([e_of_rho(r) for r in rho_grid])
    tail_idx = [int(np.argmin(np.abs(rho_grid - r))) for r in RHO_TAIL]
    points = []
    for R in R_grid:
        vals = evals - rho_grid * R
        E = max(float(vals.max()), 0.0)
        if check_tail:
            t = [vals[i] for i in tail_idx]
            if t[2] > t[1] > t[0] and (t[2] - t[0]) > TAIL_EPS:
                E = float("inf")
        points.append((float(R), E))
    return BoundCurve(points=points, bound_name=name,
                      params={"rho_grid": [float(r) for r in rho_grid]})


def esp_curve(channel, R_grid, rho_grid=None) -> BoundCurve:
    if rho_grid is None:
        rho_grid = np.logspace(np.log10(RHO_LO), np.log10(RHO_HI), 121)
    return _grid_curve(R_grid, rho_grid,
                       lambda r: _e0_cached(channel, r).value, "esp")


def er_curve(channel, R_grid, rho_grid=None) -> BoundCurve:
    if rho_grid is None:
        rho_grid = np.linspace(0.0, 1.0, 101)
    return _grid_curve(R_grid, rho_grid,
                       lambda r: _e0_cached(channel, r).value if r > 0 else 0.0,
                       "er", check_tail=False)


def eex_curve(channel, R_grid, rho_grid=None) -> BoundCurve:
    if rho_grid is None:
        rho_grid = np.logspace(0.0, np.log10(RHO_HI), 61)
    return _grid_curve(R_grid, rho_grid,
                       lambda r: e_x_max(channel, r).value, "eex")


def write_curve_csv(curve: BoundCurve, path) -> None:
    """CSV with header R,E,bound,params_json; infinities as the literal inf."""
    import csv
    import io

    params = json.dumps(curve.params, sort_keys=True)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["R", "E", "bound", "params_json"])
    for R, E in curve.points:
        e_str = "inf" if np.isinf(E) else repr(float(E))
        writer.writerow([repr(float(R)), e_str, curve.bound_name, params])
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_curve_csv(path) -> BoundCurve:
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["R", "E", "bound", "params_json"]:
        raise ValidationError(f"{path}: not a bound-curve CSV")
    points = []
    name = ""
    params: dict = {}
    for row in rows[1:]:
        if not row:
            continue
        R, E, name, params_json = row
        points.append((float(R), float(E)))
        params = json.loads(params_json)
    return BoundCurve(points=points, bound_name=name, params=params)
