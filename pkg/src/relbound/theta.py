"""Graph-side computations: confusability graphs, the Lovasz number in
logarithmic form, its degree-rho interpolation, representation values, and
the umbrella bounds built from them.

The degree-rho program is the (|X|+1)-order Gram semidefinite program

    max t   s.t.  G(x, |X|+1) >= t,  G(x, x) = 1,
                  |G(x, x')| <= g(x, x')^{1/rho},  G PSD,

whose optimum is t* = e^{-theta(rho)/2}.  Off-diagonal bounds are enforced
two-sided so that the spectral factorization of the optimal Gram matrix is
always an admissible representation (and orthogonality is exact when the
affinity vanishes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import divergence
from ._parallel import parallel_map
from .core import (
    CQChannel,
    ClassicalChannel,
    DensityOperator,
    as_cq_channel,
)
from .errors import NonNegativityViolated, ParseError, ValidationError
from .exponents import (
    RHO_TAIL,
    TAIL_EPS,
    BoundCurve,
    _e0_cached,
    expurgated_affinity,
    r_infinity,
)
from .optim import SdpProgram, simplex_minimize, solve_sdp

CONFUSABILITY_TOL = 1e-10
GRAM_RANK_TOL = 1e-9
DEFAULT_RHO_GRID_SIZE = 60
DEFAULT_RHO_MAX = 1e4


@dataclass(frozen=True)
class ConfusabilityGraph:
    """Vertices are input symbols; an edge joins confusable pairs."""

    n: int
    edges: frozenset

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) outside vertex range 0..{self.n - 1}")
            if u > v:
                raise ValidationError("edges must be stored as (min, max) pairs")

    @staticmethod
    def from_edges(n: int, edges) -> "ConfusabilityGraph":
        return ConfusabilityGraph(n=n, edges=frozenset(
            (min(u, v), max(u, v)) for u, v in edges))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def complement(self) -> "ConfusabilityGraph":
        comp = {(u, v) for u in range(self.n) for v in range(u + 1, self.n)
                if (u, v) not in self.edges}
        return ConfusabilityGraph(n=self.n, edges=frozenset(comp))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1.0
        return A


@dataclass
class Representation:
    """Unit vectors (rows) with a handle, forming a degree-rho representation."""

    vectors: np.ndarray
    handle: np.ndarray
    degree: float
    affinity: np.ndarray | None = None
    nonnegative_overlaps: bool | None = None

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T

    def handle_overlaps(self) -> np.ndarray:
        return self.vectors @ self.handle


def confusability_graph(channel) -> ConfusabilityGraph:
    """Edge iff the two inputs can produce a common output."""
    if isinstance(channel, ClassicalChannel):
        supp = channel.W > 0
        n = channel.num_inputs
        edges = {(x, y) for x in range(n) for y in range(x + 1, n)
                 if bool(np.any(supp[x] & supp[y]))}
        return ConfusabilityGraph(n=n, edges=frozenset(edges))
    cq = as_cq_channel(channel)
    n = cq.num_inputs
    edges = set()
    for x in range(n):
        for y in range(x + 1, n):
            overlap = float(np.real(np.trace(cq.states[x].M @ cq.states[y].M)))
            if overlap > CONFUSABILITY_TOL:
                edges.add((x, y))
    return ConfusabilityGraph(n=n, edges=frozenset(edges))


def representation_affinity(channel) -> np.ndarray:
    """Affinities bounding representation overlaps: Tr sqrt(S_x) sqrt(S_x').

    For classical channels this is the Bhattacharyya affinity of the rows;
    for pure-state channels it is the squared scalar product of the state
    vectors.  Using the same matrix that drives the expurgated coefficient
    keeps the degree-rho program and E_x(rho, P)/rho interpolating through
    identical constraint sets.
    """
    return expurgated_affinity(channel)


# ---------------------------------------------------------------------------
# Gram SDP
# ---------------------------------------------------------------------------

def _sym_unit(m: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((m, m))
    if i == j:
        E[i, i] = 1.0
    else:
        E[i, j] = E[j, i] = 0.5
    return E


def _factor_gram(G: np.ndarray) -> np.ndarray:
    """Row vectors reproducing the Gram matrix, rank-truncated."""
    G = (G + G.T) / 2
    w, V = np.linalg.eigh(G)
    keep = w > GRAM_RANK_TOL
    if not keep.any():
        keep = w > 0.5 * w[-1]
    R = V[:, keep] * np.sqrt(w[keep])
    norms = np.linalg.norm(R, axis=1)
    norms[norms == 0] = 1.0
    return R / norms[:, None]


def _solve_gram_program(bounds: np.ndarray, degree: float,
                        affinity: np.ndarray | None) -> tuple[float, Representation]:
    """Common core of lovasz_theta and theta_rho.

    ``bounds[x, x']`` caps |G(x, x')| for the vector block; the handle
    column is free and the scalar t rides in an extra diagonal slot.
    """
    n = bounds.shape[0]
    m = n + 2          # n vectors + handle + t slot
    h = n              # handle index
    t = n + 1          # t slot index
    C = _sym_unit(m, t, t)
    eq = [(_sym_unit(m, i, i), 1.0) for i in range(n + 1)]
    ineq = []
    for x in range(n):
        ineq.append((_sym_unit(m, t, t) - _sym_unit(m, x, h), 0.0))
    for x in range(n):
        for y in range(x + 1, n):
            b = float(bounds[x, y])
            E = _sym_unit(m, x, y)
            ineq.append((E, b))
            ineq.append((-E, b))
    res = solve_sdp(SdpProgram(n=m, objective=C, eq=eq, ineq=ineq))
    t_star = float(res.X[t, t])
    if t_star <= 0:
        raise ValidationError(f"Gram program returned nonpositive overlap t*={t_star!r}")
    value = -2.0 * float(np.log(t_star))
    G = res.X[: n + 1, : n + 1]
    R = _factor_gram(G)
    vectors = R[:n]
    handle = R[h]
    nonneg = bool((vectors @ vectors.T).min() >= -1e-9)
    rep = Representation(vectors=vectors, handle=handle, degree=degree,
                         affinity=affinity, nonnegative_overlaps=nonneg)
    return value, rep


def lovasz_theta(G: ConfusabilityGraph) -> tuple[float, Representation]:
    """Lovasz number of the confusability graph, in nats.

    Non-confusable pairs are forced orthogonal; confusable pairs are
    unconstrained.  Returns the log-form value and the representation with
    its rank-one handle recovered from the optimal Gram matrix.
    """
    bounds = G.adjacency()
    return _solve_gram_program(bounds, degree=float("inf"), affinity=bounds)


def theta_rho(channel, rho: float) -> tuple[float, Representation]:
    """Degree-rho interpolation between the cutoff rate and the Lovasz number.

    Overlaps are capped by the channel affinities raised to 1/rho, with
    0^{1/rho} := 0 so orthogonality survives the limit.
    """
    if rho < 1:
        raise ValidationError(f"rho={rho} must be >= 1")
    A = representation_affinity(channel)
    if np.isinf(rho):
        bounds = (A > CONFUSABILITY_TOL).astype(float)
    else:
        bounds = np.where(A > 0, A ** (1.0 / rho), 0.0)
    np.fill_diagonal(bounds, 1.0)
    return _solve_gram_program(bounds, degree=float(rho), affinity=A)


def representation_value(rep: Representation) -> float:
    """min over unit handles f of max_x -log |<psi_x | f>|^2.

    Computed as the Gram program with the vector block held fixed, which is
    exact for rank-one handles.
    """
    vectors = np.asarray(rep.vectors, dtype=float)
    k = vectors.shape[0]
    if k == 1:
        return 0.0
    Gfix = vectors @ vectors.T
    m = k + 2
    h, t = k, k + 1
    C = _sym_unit(m, t, t)
    eq = [(_sym_unit(m, h, h), 1.0)]
    for i in range(k):
        for j in range(i, k):
            eq.append((_sym_unit(m, i, j), float(Gfix[i, j])))
    ineq = [(_sym_unit(m, t, t) - _sym_unit(m, x, h), 0.0) for x in range(k)]
    res = solve_sdp(SdpProgram(n=m, objective=C, eq=eq, ineq=ineq))
    t_star = float(res.X[t, t])
    return -2.0 * float(np.log(t_star))


def quadratic_min_and_handle(rep_or_vectors) -> tuple[float, np.ndarray, np.ndarray]:
    """R_infinity of a nonnegative-overlap pure representation, with handle.

    Solves the convex program min_P sum P P <psi_x | psi_x'> and returns
    (-log optimum, P*, f) where f is the normalized P*-average of the
    vectors.  Every vector is checked to overlap the handle at least
    e^{-R_infinity}.
    """
    vectors = rep_or_vectors.vectors if isinstance(rep_or_vectors, Representation) else np.asarray(rep_or_vectors, dtype=float)
    G = vectors @ vectors.T
    if G.min() < -1e-10:
        raise NonNegativityViolated(
            f"pairwise inner products must be nonnegative (min {G.min():.3e})")
    n = G.shape[0]

    def oracle(p):
        Gp = G @ p
        return float(p @ Gp), 2.0 * Gp

    res = simplex_minimize(oracle, n, tol=1e-10)
    r_inf = -float(np.log(res.value))
    f = vectors.T @ res.p_star
    f = f / np.linalg.norm(f)
    overlaps = (vectors @ f) ** 2
    if overlaps.min() < np.exp(-r_inf) - 1e-8:
        raise ValidationError(
            f"handle overlap {overlaps.min():.6e} below e^-R_inf={np.exp(-r_inf):.6e}")
    return r_inf, res.p_star, f


# ---------------------------------------------------------------------------
# umbrella bounds
# ---------------------------------------------------------------------------

def is_pairwise_reversible(channel, *, s_tol: float = 1e-6) -> bool:
    """True when every input pair's mu(s) bottoms out at s = 1/2."""
    cq = as_cq_channel(channel)
    cached = cq._cache.get("pairwise_reversible")
    if cached is not None:
        return cached
    out = True
    for x in range(cq.num_inputs):
        for y in range(x + 1, cq.num_inputs):
            d, s_star = divergence.chernoff_distance(cq.states[x], cq.states[y])
            if np.isinf(d):
                continue
            if abs(s_star - 0.5) > s_tol:
                out = False
                break
        if not out:
            break
    cq._cache["pairwise_reversible"] = out
    return out


def hadamard_psd_crossover(A: np.ndarray, hi: float = DEFAULT_RHO_MAX) -> float | None:
    """Largest rho in [1, hi] with A^(Hadamard 1/rho) still PSD, or None."""
    def mineig(rho):
        B = np.where(A > 0, A ** (1.0 / rho), 0.0)
        np.fill_diagonal(B, 1.0)
        return float(np.linalg.eigvalsh(B)[0])

    if mineig(1.0) < -1e-12:
        return None
    if mineig(hi) >= -1e-12:
        return None  # PSD through the whole range
    lo_r, hi_r = 1.0, hi
    while hi_r / lo_r > 1.0 + 1e-9:
        mid = np.sqrt(lo_r * hi_r)
        if mineig(mid) >= -1e-12:
            lo_r = mid
        else:
            hi_r = mid
    return float(lo_r)


def default_rho_grid(channel=None) -> np.ndarray:
    grid = np.logspace(0.0, np.log10(DEFAULT_RHO_MAX), DEFAULT_RHO_GRID_SIZE)
    if channel is not None:
        crossover = hadamard_psd_crossover(representation_affinity(channel))
        if crossover is not None:
            grid = np.sort(np.unique(np.append(grid, crossover)))
    return grid


def theta_rho_table(channel, rho_grid) -> list[tuple[float, float, Representation]]:
    """(rho, theta(rho), representation) for every grid point."""
    rows = parallel_map(lambda r: theta_rho(channel, r), list(rho_grid))
    return [(float(r), v, rep) for r, (v, rep) in zip(rho_grid, rows)]


def umbrella_curve(channel, R_grid, *, rho_grid=None,
                   pairwise_reversible: bool | None = None) -> BoundCurve:
    """E(R) <= coef * rho * theta(rho) minimized over rho with theta(rho) < R.

    The coefficient is 2 in general and 1 for pairwise reversible channels
    (detected from the pairwise Chernoff minimizers unless overridden).
    """
    if rho_grid is None:
        rho_grid = default_rho_grid(channel)
    if pairwise_reversible is None:
        pairwise_reversible = is_pairwise_reversible(channel)
    coef = 1.0 if pairwise_reversible else 2.0
    table = theta_rho_table(channel, rho_grid)
    points = []
    for R in np.asarray(R_grid, dtype=float):
        feas = [coef * rho * th for rho, th, _ in table if th < R]
        points.append((float(R), min(feas) if feas else float("inf")))
    return BoundCurve(points=points, bound_name="umbrella",
                      params={"coefficient": coef,
                              "rho_grid": [float(r) for r in rho_grid]})


def _aux_channel(rep: Representation) -> CQChannel:
    """Pure-state channel read off a representation's vectors."""
    states = [DensityOperator(np.outer(v, v)) for v in rep.vectors]
    ch = CQChannel(states)
    ch._cache["vectors"] = rep.vectors.copy()
    return ch


def _esp_on_grid(aux: CQChannel, rho_grid: np.ndarray, R: float) -> float:
    evals = aux._cache.get("e0_grid")
    if evals is None:
        evals = np.array([_e0_cached(aux, r).value for r in rho_grid])
        aux._cache["e0_grid"] = evals
    vals = evals - rho_grid * R
    tail_idx = [int(np.argmin(np.abs(rho_grid - r))) for r in RHO_TAIL]
    t = [vals[i] for i in tail_idx]
    if t[2] > t[1] > t[0] and (t[2] - t[0]) > TAIL_EPS:
        return float("inf")
    return max(float(vals.max()), 0.0)


def sp_umbrella_curve(channel, R_grid, *, rho_grid=None) -> BoundCurve:
    """Sphere-packed umbrella bound min_rho rho (E_sp~(R) + R).

    The auxiliary channel per rho is the pure-state channel built from the
    theta(rho)-optimal Gram factorization, admissible by construction.  The
    raw pointwise bound is monotonized (the reliability function is
    non-increasing, so any upper bound at a smaller rate applies).
    """
    if rho_grid is None:
        rho_grid = default_rho_grid(channel)
    table = theta_rho_table(channel, rho_grid)
    # identical Gram optima (theta plateaus) share one auxiliary channel
    aux_by_key: dict = {}
    entries = []
    for rho, th, rep in table:
        key = np.round(rep.gram(), 8).tobytes()
        if key not in aux_by_key:
            aux_by_key[key] = _aux_channel(rep)
        entries.append((rho, aux_by_key[key]))
    inner_grid = np.logspace(-6.0, 6.0, 121)
    R_grid = np.asarray(R_grid, dtype=float)
    raw = []
    for R in R_grid:
        cands = []
        for rho, aux in entries:
            esp_val = _esp_on_grid(aux, inner_grid, float(R))
            if np.isfinite(esp_val):
                cands.append(rho * (esp_val + float(R)))
        raw.append(min(cands) if cands else float("inf"))
    running = float("inf")
    points = []
    for R, E in zip(R_grid, raw):
        running = min(running, E)
        points.append((float(R), running))
    return BoundCurve(points=points, bound_name="sp-umbrella",
                      params={"rho_grid": [float(r) for r in rho_grid]})


# ---------------------------------------------------------------------------
# random projector representations
# ---------------------------------------------------------------------------

def theta_sp_probe(G: ConfusabilityGraph, trials: int, seed: int) -> float:
    """Minimum R_infinity over random admissible projector representations.

    Vertices are assigned orthogonal blocks via a random proper coloring of
    the complement (so non-confusable pairs land in orthogonal blocks), then
    each vertex gets a random rotated subspace of its block.  The minimum
    over trials cannot drop below the Lovasz number of the graph.
    """
    if G.n > 8:
        raise ValidationError("probe supports graphs with at most 8 vertices")
    rng = np.random.default_rng(seed)
    H = G.complement()
    best = float("inf")
    for _ in range(trials):
        order = rng.permutation(G.n)
        colors = -np.ones(G.n, dtype=int)
        for v in order:
            taken = {colors[u] for u in range(G.n)
                     if colors[u] >= 0 and H.has_edge(u, v)}
            c = 0
            while c in taken:
                c += 1
            colors[v] = c
        num_colors = int(colors.max()) + 1
        block_dims = rng.integers(1, 4, size=num_colors)
        offsets = np.concatenate([[0], np.cumsum(block_dims)])
        total = int(offsets[-1])
        states = []
        for v in range(G.n):
            c = colors[v]
            k = int(block_dims[c])
            r = int(rng.integers(1, k + 1))
            Q, _ = np.linalg.qr(rng.normal(size=(k, k)))
            U = np.zeros((total, total))
            block = Q[:, :r] @ Q[:, :r].T
            U[offsets[c]:offsets[c] + k, offsets[c]:offsets[c] + k] = block
            states.append(DensityOperator(U / r))
        value = r_infinity(CQChannel(states)).value
        best = min(best, value)
    return best


# ---------------------------------------------------------------------------
# graph file format (line-oriented edge list)
# ---------------------------------------------------------------------------

def read_graph(path) -> ConfusabilityGraph:
    """First data line is the vertex count; each following line one edge."""
    n = None
    edges = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if n is None:
                if len(parts) != 1 or not parts[0].isdigit():
                    raise ParseError(f"{path}:{lineno}: expected the vertex count")
                n = int(parts[0])
                continue
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: vertex ids must be integers")
            edges.add((min(u, v), max(u, v)))
    if n is None:
        raise ParseError(f"{path}: empty graph file")
    try:
        return ConfusabilityGraph(n=n, edges=frozenset(edges))
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_graph(G: ConfusabilityGraph, path) -> None:
    lines = [str(G.n)] + [f"{u} {v}" for u, v in sorted(G.edges)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
