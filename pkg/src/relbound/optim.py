"""Numerical engines: simplex minimization, min-max eigenvalue programs,
and a dense SDP front end for the Gram-matrix programs.

``simplex_minimize`` is entropic mirror descent (exponentiated gradient)
with iterate averaging, an adaptive step, and a multi-start schedule of one
uniform start plus one smoothed start per vertex.

``minimize_lambda_max`` smooths the top eigenvalue by a log-sum-exp with an
annealed temperature to tame subgradient oscillation at eigenvalue
crossings, then polishes the iterate with eigenvector cutting planes until
the certified duality gap closes.

``solve_sdp`` hands dense symmetric programs to an interior-point backend
(Clarabel, falling back to CVXOPT) and reports duality-gap and
complementary-slackness residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import Infeasible, NoConvergence, NumericalFailure, ValidationError

SDP_ORDER_CAP = 64

_EG_TOL = 1e-7
_EG_MAX_ITER = 50_000
_LSE_TEMPERATURES = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)


@dataclass
class SimplexResult:
    """Outcome of a simplex program: optimizer, value, and KKT certificate."""

    p_star: np.ndarray
    value: float
    kkt_residual: float
    iterations: int


@dataclass
class SdpProgram:
    """max <C, X> over PSD symmetric X subject to linear trace constraints.

    ``eq`` entries are pairs (A, b) meaning <A, X> = b; ``ineq`` entries are
    pairs (B, c) meaning <B, X> <= c.
    """

    n: int
    objective: np.ndarray
    eq: list = field(default_factory=list)
    ineq: list = field(default_factory=list)

    def __post_init__(self):
        if self.n > SDP_ORDER_CAP:
            raise ValidationError(f"SDP order {self.n} exceeds cap {SDP_ORDER_CAP}")
        for name, mats in (("objective", [self.objective]),
                           ("eq", [m for m, _ in self.eq]),
                           ("ineq", [m for m, _ in self.ineq])):
            for M in mats:
                M = np.asarray(M)
                if M.shape != (self.n, self.n):
                    raise ValidationError(f"{name} matrix has shape {M.shape}, expected ({self.n}, {self.n})")
                if np.max(np.abs(M - M.T)) > 1e-12:
                    raise ValidationError(f"{name} constraint matrix is not symmetric")


@dataclass
class SdpResult:
    X: np.ndarray
    value: float
    duality_gap: float
    slack_residual: float
    solver: str


def _kkt_residual(p: np.ndarray, g: np.ndarray) -> float:
    """Residual of the simplex KKT system: g_x >= p.g with equality on the support.

    Normalized by the Lagrange-multiplier scale max(1, |p.g|) so the same
    tolerance works for objectives whose gradients grow with a tilt
    parameter.
    """
    lam = float(p @ g)
    dual_feas = max(0.0, float(np.max(lam - g)))
    comp = float(np.max(np.abs(p * (g - lam))))
    return (dual_feas + comp) / max(1.0, abs(lam))


def _eg_single_start(oracle, p0, tol, max_iter, stall_limit=200):
    p = p0.copy()
    fv, g = oracle(p)
    eta = 1.0 / (np.max(np.abs(g)) + 1e-12)
    best_p, best_f = p.copy(), fv
    avg = np.zeros_like(p)
    avg_weight = 0.0
    kkt = _kkt_residual(p, g)
    it = 0
    stall = 0
    while it < max_iter and kkt > tol and stall < stall_limit:
        it += 1
        z = -eta * (g - g.min())
        q = p * np.exp(np.clip(z, -700, 0))
        total = q.sum()
        if total <= 0 or not np.isfinite(total):
            eta *= 0.5
            continue
        q /= total
        fq, gq = oracle(q)
        if fq <= fv:
            # progress must be meaningful, not round-off churn
            stall = 0 if fq < fv - 1e-14 * max(1.0, abs(fv)) else stall + 1
            p, fv, g = q, fq, gq
            avg += eta * p
            avg_weight += eta
            eta = min(eta * 1.5, 1e9)
            if fv < best_f:
                best_f, best_p = fv, p.copy()
            kkt = _kkt_residual(p, g)
        else:
            eta *= 0.5
            stall += 1
            if eta < 1e-18:
                break
    if avg_weight > 0:
        pa = avg / avg_weight
        pa = np.maximum(pa, 0.0)
        pa /= pa.sum()
        fa, ga = oracle(pa)
        if fa < best_f:
            best_f, best_p = fa, pa
            kkt = _kkt_residual(pa, ga)
    return best_p, best_f, kkt, it


def _line_root(oracle, p, d, t_hi):
    """Largest step in [0, t_hi] with nonpositive directional derivative.

    h(t) = <g(p + t d), d> is nondecreasing for convex objectives; bisection
    to the root gives an exact line search using gradient signs only.
    """
    _, g_hi = oracle(p + t_hi * d)
    if float(g_hi @ d) <= 0:
        return t_hi, 1
    lo, hi = 0.0, t_hi
    evals = 1
    for _ in range(30):
        mid = (lo + hi) / 2
        _, g_mid = oracle(p + mid * d)
        evals += 1
        if float(g_mid @ d) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * t_hi:
            break
    return lo, evals


def _active_set_polish(oracle, p0, tol, max_rounds=100, eval_budget=600):
    """Projected-gradient rounds on the detected support.

    Mirror descent with monotone acceptance stalls near sqrt(machine-eps)
    KKT residuals; these exact-line-search rounds push the residual to the
    requested tolerance for smooth objectives.
    """
    p = p0.copy()
    fv, g = oracle(p)
    evals = 1
    best = (p.copy(), fv, _kkt_residual(p, g))
    no_progress = 0
    for _ in range(max_rounds):
        if evals >= eval_budget:
            break
        kkt = _kkt_residual(p, g)
        if kkt < best[2]:
            best = (p.copy(), fv, kkt)
            no_progress = 0
        else:
            no_progress += 1
            if no_progress >= 8:
                break
        if kkt <= tol:
            break
        lam = float(p @ g)
        support = p > 1e-14
        # dual violation: a zero coordinate wants mass
        entering = np.where(~support & (lam - g > tol))[0]
        if entering.size:
            x = int(entering[np.argmax(lam - g[entering])])
            d = -p.copy()
            d[x] += 1.0
            t_cap = 1.0
        else:
            d = np.zeros_like(p)
            gs = g[support]
            c = gs - gs.mean()
            c -= c.mean()  # second pass: cancellation when the spread is tiny
            d[support] = -c
            norm = np.linalg.norm(d)
            if norm <= 0:
                break
            d /= norm
            t_cap = np.inf
        if float(d @ g) >= 0:
            break
        neg = d < -1e-300
        t_max = float(np.min(-p[neg] / d[neg])) if neg.any() else t_cap
        t_max = min(t_max, t_cap)
        if not np.isfinite(t_max) or t_max <= 0:
            break
        t, used = _line_root(oracle, p, d, t_max)
        evals += used
        if t <= 0:
            break
        q = np.maximum(p + t * d, 0.0)
        q /= q.sum()
        fq, gq = oracle(q)
        evals += 1
        if fq > fv + 1e-13 * max(1.0, abs(fv)):
            break
        p, fv, g = q, fq, gq
    p, fv, kkt = best if best[2] < _kkt_residual(p, g) else (p, fv, _kkt_residual(p, g))
    return p, fv, kkt, evals


def default_starts(dim: int) -> list[np.ndarray]:
    """Uniform start followed by one smoothed start per vertex."""
    starts = [np.full(dim, 1.0 / dim)]
    eps = 0.05
    for k in range(dim):
        p = np.full(dim, eps / dim)
        p[k] += 1.0 - eps
        starts.append(p)
    return starts


def simplex_minimize(oracle, dim: int, *, tol: float = _EG_TOL,
                     max_iter: int = _EG_MAX_ITER, starts=None) -> SimplexResult:
    """Minimize a convex function over the probability simplex.

    ``oracle(p)`` must return ``(value, subgradient)``.  Runs every start to
    convergence and merges deterministically by (value, start index);
    equal-value ties therefore resolve to the uniform start.  Raises
    NoConvergence (carrying the best iterate) if no start reaches the KKT
    tolerance.
    """
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    if dim == 1:
        p = np.ones(1)
        fv, _ = oracle(p)
        return SimplexResult(p_star=p, value=float(fv), kkt_residual=0.0, iterations=0)
    if starts is None:
        starts = default_starts(dim)
    runs = []
    total_iters = 0
    for idx, p0 in enumerate(starts):
        p, fv, kkt, it = _eg_single_start(oracle, np.asarray(p0, dtype=float), tol, max_iter)
        total_iters += it
        if kkt > tol:
            p, fv, kkt, evals = _active_set_polish(oracle, p, tol)
            total_iters += evals
        runs.append((fv, idx, p, kkt))
    converged = [r for r in runs if r[3] <= tol]
    pool = converged if converged else runs
    fv, _, p, kkt = min(pool, key=lambda r: (r[0], r[1]))
    p = np.maximum(p, 0.0)
    p[p < 1e-15] = 0.0
    p /= p.sum()
    result = SimplexResult(p_star=p, value=float(fv), kkt_residual=float(kkt),
                           iterations=total_iters)
    if not converged:
        raise NoConvergence(
            f"mirror descent stopped at KKT residual {kkt:.3e} > {tol:.1e}", result)
    return result


# ---------------------------------------------------------------------------
# min-max eigenvalue program
# ---------------------------------------------------------------------------

def _mix(p: np.ndarray, H: np.ndarray) -> np.ndarray:
    return np.einsum("x,xij->ij", p, H)


def _lse_oracle(H: np.ndarray, T: float):
    n = H.shape[0]

    def oracle(p):
        w, V = np.linalg.eigh(_mix(p, H))
        wm = w[-1]
        e = np.exp((w - wm) / T)
        sw = e / e.sum()
        f = wm + T * np.log(e.sum())
        G = (V * sw) @ V.conj().T
        g = np.array([float(np.real(np.sum(G * H[x].T))) for x in range(n)])
        return f, g

    return oracle


def _cutting_plane_polish(H: np.ndarray, p0: np.ndarray, tol: float, max_rounds: int):
    """Kelley cutting planes: eigenvector cuts + an LP master problem.

    Returns (p, value, certified_gap, rounds).  The LP value is a true lower
    bound on min_p lambda_max, so the gap certifies optimality.
    """
    n = H.shape[0]
    cuts: list[list[float]] = []
    p = p0.copy()
    best_p, best_val = p.copy(), np.inf
    lower = -np.inf
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        w, V = np.linalg.eigh(_mix(p, H))
        val = float(w[-1])
        if val < best_val:
            best_val, best_p = val, p.copy()
        for i in range(len(w)):
            if w[i] >= w[-1] - 1e-7:
                v = V[:, i]
                cuts.append([float(np.real(v.conj() @ (H[x] @ v))) for x in range(n)])
        A = np.asarray(cuts)
        c = np.zeros(n + 1)
        c[-1] = 1.0
        A_ub = np.hstack([A, -np.ones((A.shape[0], 1))])
        A_eq = np.zeros((1, n + 1))
        A_eq[0, :n] = 1.0
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(A.shape[0]), A_eq=A_eq, b_eq=[1.0],
                      bounds=[(0, None)] * n + [(None, None)], method="highs")
        if not res.success:
            break
        lower = max(lower, float(res.x[-1]))
        p = np.maximum(res.x[:n], 0.0)
        p /= p.sum()
        if best_val - lower <= tol:
            break
    return best_p, best_val, best_val - lower, rounds


def minimize_lambda_max(ops, *, tol: float = 1e-9,
                        temperatures=_LSE_TEMPERATURES) -> SimplexResult:
    """Minimize lambda_max(sum_x p_x H_x) over the simplex.

    Hermitian PSD inputs.  The annealed smoothed descent supplies a good
    iterate; the cutting-plane polish certifies it.  ``value`` is the exact
    top eigenvalue at the returned point (a valid upper bound on the
    optimum) and ``kkt_residual`` is the certified optimality gap.
    """
    H = np.stack([np.asarray(M) for M in ops])
    if H.ndim != 3 or H.shape[1] != H.shape[2]:
        raise ValidationError("operators must be square matrices of equal dimension")
    n = H.shape[0]
    if n == 1:
        val = float(np.linalg.eigvalsh(H[0])[-1])
        return SimplexResult(p_star=np.ones(1), value=val, kkt_residual=0.0, iterations=0)
    p = np.full(n, 1.0 / n)
    total_iters = 0
    for T in temperatures:
        stage_tol = max(tol, T * 1e-2)
        p, _, _, it = _eg_single_start(_lse_oracle(H, T), p, stage_tol, 4000)
        total_iters += it
    p, val, gap, rounds = _cutting_plane_polish(H, p, tol, max_rounds=300)
    total_iters += rounds
    result = SimplexResult(p_star=p, value=val, kkt_residual=float(max(gap, 0.0)),
                           iterations=total_iters)
    if gap > max(1e-7, tol * 10):
        raise NoConvergence(f"eigenvalue program gap {gap:.3e} did not close", result)
    return result


# ---------------------------------------------------------------------------
# dense SDP
# ---------------------------------------------------------------------------

def solve_sdp(prog: SdpProgram) -> SdpResult:
    """Solve a dense symmetric SDP with an interior-point backend.

    The result carries the duality gap and the complementary-slackness
    residual computed from the returned dual variables, so callers can audit
    every solve.
    """
    import cvxpy as cp

    X = cp.Variable((prog.n, prog.n), symmetric=True)
    psd = X >> 0
    constraints = [psd]
    for A, b in prog.eq:
        constraints.append(cp.trace(cp.Constant(np.asarray(A, dtype=float)) @ X) == float(b))
    for B, c in prog.ineq:
        constraints.append(cp.trace(cp.Constant(np.asarray(B, dtype=float)) @ X) <= float(c))
    problem = cp.Problem(cp.Maximize(cp.trace(cp.Constant(np.asarray(prog.objective, dtype=float)) @ X)), constraints)

    last_error = None
    for solver in (cp.CLARABEL, cp.CVXOPT):
        try:
            problem.solve(solver=solver)
        except cp.error.SolverError as exc:
            last_error = exc
            continue
        if problem.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            break
    else:
        if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            raise Infeasible(f"SDP infeasible (status {problem.status})")
        raise NumericalFailure(f"SDP solver failed: status={problem.status!r} ({last_error})")
    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise Infeasible(f"SDP infeasible (status {problem.status})")
    if problem.status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        raise NumericalFailure("SDP unbounded")

    Xv = np.asarray(X.value, dtype=float)
    Xv = (Xv + Xv.T) / 2
    value = float(problem.value)

    # Complementarity audit: Tr(Z X) for the PSD cone plus lambda_j * slack_j
    # for the inequalities; both vanish at an exact primal-dual solution and
    # their sum equals the duality gap.
    slack_terms = [abs(float(np.trace(psd.dual_value @ Xv)))] if psd.dual_value is not None else []
    gap = slack_terms[0] if slack_terms else np.inf
    worst_slack = slack_terms[0] if slack_terms else np.inf
    for cons, (B, c) in zip(constraints[1 + len(prog.eq):], prog.ineq):
        lam = cons.dual_value
        if lam is None:
            continue
        term = abs(float(lam) * (float(c) - float(np.sum(np.asarray(B) * Xv))))
        gap += term
        worst_slack = max(worst_slack, term)
    status_note = problem.status
    result = SdpResult(X=Xv, value=value, duality_gap=float(gap),
                       slack_residual=float(worst_slack), solver=str(status_note))
    if gap > 1e-6 * (1.0 + abs(value)):
        raise NumericalFailure(
            f"SDP complementarity residual {gap:.3e} too large", gap=float(gap))
    return result
