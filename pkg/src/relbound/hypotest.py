"""Binary hypothesis-testing bounds.

The centerpiece is the threshold pair derived from mu(s) and its first two
derivatives: for any 0 < s < 1 at least one of the two error probabilities
of any binary test exceeds its threshold.  A brute-force Neyman-Pearson
oracle over deterministic likelihood-ratio tests supplies the ground truth
at desk scale for the commuting case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import divergence
from .core import SUPPORT_RTOL, DensityOperator, as_cq_channel, support_projector
from .errors import TooLarge, ValidationError

PRODUCT_OUTCOME_CAP = 1_000_000

# s-grid for the asymmetric-exponent sup; the s -> 1 endpoint is guarded.
_E_OF_R_S_GRID = np.linspace(0.0, 0.995, 199)


@dataclass
class JointComposition:
    """Pair frequencies P(x, x') between two codewords of block length n."""

    Pmm: np.ndarray
    n: int

    def __post_init__(self):
        P = np.asarray(self.Pmm, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValidationError("joint composition must be a square matrix")
        if np.any(P < 0):
            raise ValidationError("joint composition entries must be nonnegative")
        if abs(P.sum() - 1.0) > 1e-12:
            raise ValidationError(f"joint composition sums to {P.sum()!r}, expected 1")
        if self.n < 1:
            raise ValidationError("block length must be positive")
        self.Pmm = P


@dataclass
class SgbThresholds:
    """Lower-bound pair: any test exceeds at least one of the two."""

    bound_A: float
    bound_B: float
    s: float


def sgb_thresholds(A: DensityOperator, B: DensityOperator, s: float) -> SgbThresholds:
    """Threshold pair at parameter s in (0, 1).

    bound_A = (1/8) exp[mu - s mu' - s sqrt(2 mu'')],
    bound_B = (1/8) exp[mu + (1-s) mu' - (1-s) sqrt(2 mu'')].
    """
    if not 0.0 < s < 1.0:
        raise ValidationError(f"s={s} outside (0, 1)")
    m = divergence.mu(A, B, s)
    m1, m2 = divergence.mu_derivatives(A, B, s)
    root = np.sqrt(2.0 * m2)
    bound_a = np.exp(m - s * m1 - s * root) / 8.0
    bound_b = np.exp(m + (1.0 - s) * m1 - (1.0 - s) * root) / 8.0
    return SgbThresholds(bound_A=float(bound_a), bound_B=float(bound_b), s=s)


def best_sgb_thresholds(A: DensityOperator, B: DensityOperator, s_grid=None) -> SgbThresholds:
    """Grid search for the s maximizing the smaller of the two thresholds.

    Convenience only; no optimality claim is attached to the choice.
    """
    if s_grid is None:
        s_grid = np.linspace(0.05, 0.95, 19)
    best = None
    for s in s_grid:
        cand = sgb_thresholds(A, B, float(s))
        if best is None or min(cand.bound_A, cand.bound_B) > min(best.bound_A, best.bound_B):
            best = cand
    return best


def hoeffding_exponent(A: DensityOperator, B: DensityOperator, r: float) -> float:
    """Best type-I exponent e(r) given type-II exponent at least r.

    e(r) = sup_{0 <= s < 1} (-s r - mu(s)) / (1 - s) for r >= -log Tr(B A^0),
    and infinity below that threshold.
    """
    if r < 0:
        raise ValidationError(f"r={r} must be >= 0")
    xi = float(np.real(np.trace(B.M @ support_projector(A))))
    if xi <= 0:
        return float("inf")
    r_min = -np.log(xi)
    if r < r_min - 1e-12:
        return float("inf")

    def h(s):
        return (-s * r - divergence.mu(A, B, s)) / (1.0 - s)

    vals = np.array([h(s) for s in _E_OF_R_S_GRID])
    i = int(np.argmax(vals))
    lo = _E_OF_R_S_GRID[max(i - 1, 0)]
    hi = _E_OF_R_S_GRID[min(i + 1, len(_E_OF_R_S_GRID) - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = h(c), h(d)
    while b - a > 1e-10:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = h(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = h(d)
    return max(float(max(vals[i], h((a + b) / 2))), 0.0)


def codeword_chernoff(channel, comp: JointComposition) -> tuple[float, float]:
    """Chernoff distance between two codewords from their joint composition.

    A single s is shared across all symbol pairs:
    d_C = -min_s sum_{x,x'} P(x,x') mu_{x,x'}(s).  Infinite when a pair with
    mass is perfectly distinguishable.
    """
    cq = as_cq_channel(channel)
    n = cq.num_inputs
    P = comp.Pmm
    if P.shape[0] != n:
        raise ValidationError(f"composition is {P.shape[0]}x{P.shape[0]}, channel has {n} inputs")
    pairs = []
    for x in range(n):
        for y in range(n):
            if P[x, y] <= 0:
                continue
            if x == y:
                continue  # identical states contribute mu = 0
            data = divergence._ns_data(cq.states[x], cq.states[y])
            if data.disjoint:
                return float("inf"), 0.5
            pairs.append((P[x, y], data))

    if not pairs:
        return 0.0, 0.5

    def msum(s):
        return sum(w * d.mu(s) for w, d in pairs)

    grid = np.linspace(0.01, 0.99, 99)
    vals = np.array([msum(s) for s in grid])
    if vals.max() - vals.min() < 1e-12:
        return -msum(0.5), 0.5
    candidates = [(msum(0.0), 0.0), (msum(1.0), 1.0)]
    i = int(np.argmin(vals))
    lo = grid[i - 1] if i > 0 else 0.0
    hi = grid[i + 1] if i < len(grid) - 1 else 1.0
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = msum(c), msum(d)
    while b - a > 1e-8:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = msum(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = msum(d)
    s_mid = (a + b) / 2
    candidates.append((msum(s_mid), s_mid))
    v_best, s_best = min(candidates, key=lambda t: t[0])
    return -float(v_best), float(s_best)


def smallest_nonzero_eigenvalue(channel) -> float:
    cq = as_cq_channel(channel)
    lam = np.inf
    for s in cq.states:
        w, _ = s.eig
        nz = w[w > SUPPORT_RTOL * max(w[-1], 0.0)]
        lam = min(lam, float(nz.min()))
    return lam


def pairwise_bound(channel, comp: JointComposition) -> tuple[float, float]:
    """Lower-bound pair on the two codeword error probabilities.

    (1/8) exp[-n (d_C + sqrt(2/n) log(1/lambda_min))] for both messages,
    with lambda_min the smallest nonzero eigenvalue over all channel states.
    """
    lam_min = smallest_nonzero_eigenvalue(channel)
    d_c, _ = codeword_chernoff(channel, comp)
    if np.isinf(d_c):
        return 0.0, 0.0
    n = comp.n
    exponent = -n * (d_c + np.sqrt(2.0 / n) * np.log(1.0 / lam_min))
    b = float(np.exp(exponent) / 8.0)
    return b, b


# ---------------------------------------------------------------------------
# Neyman-Pearson oracle (classical, deterministic threshold tests)
# ---------------------------------------------------------------------------

def _check_distribution(U) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim != 1 or np.any(U < 0) or abs(U.sum() - 1.0) > 1e-9:
        raise ValidationError("oracle inputs must be 1-D probability vectors")
    return U


def np_frontier(U, V) -> np.ndarray:
    """Deterministic likelihood-ratio test frontier.

    Row k is (P_e|U, P_e|V) for the test that decides V on the k outcomes
    with the largest likelihood ratio V/U.
    """
    U = _check_distribution(U)
    V = _check_distribution(V)
    if U.size != V.size:
        raise ValidationError("distributions must share an alphabet")
    if U.size > PRODUCT_OUTCOME_CAP:
        raise TooLarge(f"{U.size} outcomes exceed the cap {PRODUCT_OUTCOME_CAP}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(U > 0, V / np.where(U > 0, U, 1.0), np.inf)
        ratio[(U == 0) & (V == 0)] = 1.0
    order = np.argsort(ratio, kind="stable")[::-1]
    u_sorted = U[order]
    v_sorted = V[order]
    # decide V on the first k outcomes of the sorted order
    pe_u = np.concatenate([[0.0], np.cumsum(u_sorted)])
    pe_v = 1.0 - np.concatenate([[0.0], np.cumsum(v_sorted)])
    return np.column_stack([pe_u, pe_v])


def np_oracle(U, V, eta0: float, eta1: float) -> float:
    """Minimal weighted error over deterministic threshold tests.

    Sweeps every likelihood-ratio threshold and returns
    min_k [eta0 P_e|U(k) + eta1 P_e|V(k)], which equals the Bayes error
    sum_z min(eta0 U(z), eta1 V(z)).
    """
    if eta0 <= 0 or eta1 <= 0:
        raise ValidationError("weights must be positive")
    frontier = np_frontier(U, V)
    return float(np.min(eta0 * frontier[:, 0] + eta1 * frontier[:, 1]))


def tensor_power(dist, n: int) -> np.ndarray:
    """n-fold product distribution, refused beyond the outcome cap."""
    dist = _check_distribution(dist)
    if dist.size ** n > PRODUCT_OUTCOME_CAP:
        raise TooLarge(
            f"{dist.size}^{n} outcomes exceed the cap {PRODUCT_OUTCOME_CAP}")
    out = np.array([1.0])
    for _ in range(n):
        out = np.kron(out, dist)
    return out
