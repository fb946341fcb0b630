"""Channel and operator data model.

Holds the basic objects everything else is built on: row-stochastic
classical channels, density operators, classical-quantum channels, and the
maps between them (diagonal embedding, square-root pure-state lift, and the
two-distribution reduction of a pair of density operators).

All spectral work routes through a single complex Hermitian
eigendecomposition so there is one numerics choke point to test.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Sequence

import numpy as np

from .errors import (
    NegativePowerOfSingular,
    NotHermitian,
    NotPSD,
    ParseError,
    TraceNotOne,
    ValidationError,
)

# An eigenvalue counts as nonzero iff it exceeds SUPPORT_RTOL * lambda_max.
SUPPORT_RTOL = 1e-10

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10
ROW_SUM_ATOL = 1e-12


class ClassicalChannel:
    """Discrete memoryless channel given by its |X| x |Y| transition matrix."""

    def __init__(self, W):
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
            raise ValidationError("transition matrix must be 2-D and nonempty")
        neg = np.argwhere(W < 0)
        if neg.size:
            x, y = neg[0]
            raise ValidationError(
                f"negative transition probability at row {x}, column {y}: {W[x, y]!r}"
            )
        sums = W.sum(axis=1)
        bad = np.argwhere(np.abs(sums - 1.0) > ROW_SUM_ATOL)
        if bad.size:
            x = int(bad[0][0])
            raise ValidationError(f"row {x} sums to {sums[x]!r}, expected 1")
        self.W = W
        self._cache: dict = {}

    @property
    def num_inputs(self) -> int:
        return self.W.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.W.shape[1]

    def row(self, x: int) -> np.ndarray:
        return self.W[x]

    def __eq__(self, other):
        return isinstance(other, ClassicalChannel) and np.array_equal(self.W, other.W)

    def __repr__(self):
        return f"ClassicalChannel({self.num_inputs}x{self.num_outputs})"


class DensityOperator:
    """Unit-trace positive semidefinite Hermitian matrix."""

    def __init__(self, M):
        M = np.asarray(M)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValidationError("density operator must be a square matrix")
        M = M.astype(complex)
        herm_res = float(np.max(np.abs(M - M.conj().T)))
        if herm_res > HERMITIAN_ATOL:
            raise NotHermitian(herm_res)
        M = (M + M.conj().T) / 2
        tr = float(np.trace(M).real)
        if abs(tr - 1.0) > TRACE_ATOL:
            raise TraceNotOne(abs(tr - 1.0))
        w = np.linalg.eigvalsh(M)
        if w[0] < -PSD_ATOL:
            raise NotPSD(float(w[0]))
        self.M = M
        self.d = M.shape[0]
        self._eig = None

    @property
    def eig(self):
        """Cached ascending eigendecomposition (w, V)."""
        if self._eig is None:
            w, V = np.linalg.eigh(self.M)
            self._eig = (w, V)
        return self._eig

    def rank(self) -> int:
        w, _ = self.eig
        return int(np.count_nonzero(w > SUPPORT_RTOL * max(w[-1], 0.0)))

    def __repr__(self):
        return f"DensityOperator(d={self.d})"


class CQChannel:
    """Classical-quantum channel: one density operator per input symbol."""

    def __init__(self, states: Sequence[DensityOperator], pure_flag: bool | None = None):
        states = list(states)
        if not states:
            raise ValidationError("a channel needs at least one input state")
        d = states[0].d
        for i, s in enumerate(states):
            if not isinstance(s, DensityOperator):
                raise ValidationError(f"state {i} is not a DensityOperator")
            if s.d != d:
                raise ValidationError(f"state {i} has dimension {s.d}, expected {d}")
        computed_pure = all(s.rank() == 1 for s in states)
        if pure_flag is not None and pure_flag != computed_pure:
            raise ValidationError(
                f"pure_flag={pure_flag} inconsistent with numerical ranks (pure={computed_pure})"
            )
        self.states = states
        self.dim = d
        self.pure_flag = computed_pure
        self._cache: dict = {}

    @property
    def num_inputs(self) -> int:
        return len(self.states)

    @property
    def is_pure(self) -> bool:
        return self.pure_flag

    def stack(self) -> np.ndarray:
        return np.stack([s.M for s in self.states])

    def state_vectors(self) -> np.ndarray:
        """Unit vectors of a pure-state channel, one per row.

        Signs are fixed so that the largest-magnitude component is positive,
        which makes the result deterministic.
        """
        if not self.pure_flag:
            raise ValidationError("state_vectors requires a pure-state channel")
        if "vectors" in self._cache:
            return self._cache["vectors"]
        rows = []
        for s in self.states:
            w, V = s.eig
            v = V[:, -1]
            k = int(np.argmax(np.abs(v)))
            phase = v[k] / abs(v[k])
            rows.append(v / phase)
        out = np.stack(rows)
        if np.max(np.abs(out.imag)) < 1e-12:
            out = out.real.copy()
        self._cache["vectors"] = out
        return out

    def __repr__(self):
        kind = "pure" if self.pure_flag else "mixed"
        return f"CQChannel({self.num_inputs} inputs, d={self.dim}, {kind})"


class ProbabilityVector:
    """Point of the input simplex."""

    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValidationError("probability vector must be 1-D and nonempty")
        neg = np.argwhere(p < 0)
        if neg.size:
            i = int(neg[0][0])
            raise ValidationError(f"negative probability at entry {i}: {p[i]!r}")
        if abs(p.sum() - 1.0) > ROW_SUM_ATOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, expected 1")
        self.p = p

    def __len__(self):
        return self.p.size

    def __repr__(self):
        return f"ProbabilityVector({self.p!r})"


class ClassicalPair:
    """Two distributions over a common (i, j) index grid."""

    def __init__(self, Q0, Q1):
        Q0 = np.asarray(Q0, dtype=float)
        Q1 = np.asarray(Q1, dtype=float)
        if Q0.shape != Q1.shape:
            raise ValidationError("Q0 and Q1 must share an index set")
        for name, Q in (("Q0", Q0), ("Q1", Q1)):
            if abs(Q.sum() - 1.0) > TRACE_ATOL:
                raise ValidationError(f"{name} sums to {Q.sum()!r}, expected 1")
        self.Q0 = Q0
        self.Q1 = Q1

    def common_support(self) -> np.ndarray:
        return (self.Q0 > 0) & (self.Q1 > 0)


def as_distribution(p, n: int | None = None) -> np.ndarray:
    """Coerce an array-like or ProbabilityVector to a validated ndarray."""
    if isinstance(p, ProbabilityVector):
        arr = p.p
    else:
        arr = ProbabilityVector(p).p
    if n is not None and arr.size != n:
        raise ValidationError(f"probability vector has length {arr.size}, expected {n}")
    return arr


def validate_density(M) -> DensityOperator:
    """Symmetrize (M + M^dag)/2 and run all density-operator checks."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("density operator must be a square matrix")
    return DensityOperator(M)


def support_projector(S: DensityOperator) -> np.ndarray:
    """Projector onto the support of S."""
    w, V = S.eig
    mask = w > SUPPORT_RTOL * max(w[-1], 0.0)
    Vs = V[:, mask]
    P = Vs @ Vs.conj().T
    return (P + P.conj().T) / 2


def fractional_power(S: DensityOperator, a: float) -> np.ndarray:
    """S^a through the eigendecomposition, with 0^a := 0 on the null space.

    a = 0 reproduces the support projector.  Negative powers require full
    numerical rank.
    """
    w, V = S.eig
    mask = w > SUPPORT_RTOL * max(w[-1], 0.0)
    if a < 0 and not mask.all():
        raise NegativePowerOfSingular(
            f"power {a} of an operator with rank {int(mask.sum())} < {S.d}"
        )
    wpow = np.zeros_like(w)
    wpow[mask] = np.maximum(w[mask], 0.0) ** a
    out = (V * wpow) @ V.conj().T
    return (out + out.conj().T) / 2


def ns_mapping(A: DensityOperator, B: DensityOperator) -> ClassicalPair:
    """Two-distribution reduction of a pair of density operators.

    Q0(i,j) = alpha_i |<a_i|b_j>|^2 and Q1(i,j) = beta_j |<a_i|b_j>|^2 built
    from the eigen-pairs of A and B.  The reduction preserves
    Tr A^{1-s} B^s = sum Q0^{1-s} Q1^s for every s in (0, 1).
    """
    if A.d != B.d:
        raise ValidationError(f"dimension mismatch: {A.d} vs {B.d}")
    wA, VA = A.eig
    wB, VB = B.eig
    alpha = np.maximum(wA, 0.0)
    beta = np.maximum(wB, 0.0)
    O2 = np.abs(VA.conj().T @ VB) ** 2
    Q0 = alpha[:, None] * O2
    Q1 = beta[None, :] * O2
    return ClassicalPair(Q0, Q1)


def pure_state_lift(W: ClassicalChannel) -> CQChannel:
    """Pure-state channel whose vectors are the square roots of the rows of W.

    Scalar products of the lifted vectors equal the classical Bhattacharyya
    affinities sum_y sqrt(W_x(y) W_x'(y)).
    """
    vecs = np.sqrt(W.W)
    states = [DensityOperator(np.outer(v, v)) for v in vecs]
    ch = CQChannel(states)
    ch._cache["vectors"] = vecs.copy()
    return ch


def classical_embed(W: ClassicalChannel) -> CQChannel:
    """Commuting classical-quantum channel with W's rows on the diagonals."""
    return CQChannel([DensityOperator(np.diag(row)) for row in W.W])


def as_cq_channel(channel) -> CQChannel:
    """Accept either channel kind; classical channels are embedded diagonally."""
    if isinstance(channel, CQChannel):
        return channel
    if isinstance(channel, ClassicalChannel):
        cached = channel._cache.get("embed")
        if cached is None:
            cached = classical_embed(channel)
            channel._cache["embed"] = cached
        return cached
    raise ValidationError(f"not a channel: {channel!r}")


# ---------------------------------------------------------------------------
# Channel file format (JSON)
# ---------------------------------------------------------------------------

def channel_to_dict(channel) -> dict:
    if isinstance(channel, ClassicalChannel):
        return {"type": "classical", "W": channel.W.tolist()}
    if isinstance(channel, CQChannel):
        states = []
        for s in channel.states:
            entry = {"re": s.M.real.tolist()}
            if np.max(np.abs(s.M.imag)) > 0:
                entry["im"] = s.M.imag.tolist()
            states.append(entry)
        return {"type": "cq", "dim": channel.dim, "states": states}
    raise ValidationError(f"not a channel: {channel!r}")


def channel_from_dict(obj) -> ClassicalChannel | CQChannel:
    if not isinstance(obj, dict):
        raise ParseError("channel file must contain a JSON object")
    kind = obj.get("type")
    if kind == "classical":
        if "W" not in obj:
            raise ParseError("classical channel is missing field 'W'")
        return ClassicalChannel(obj["W"])
    if kind == "cq":
        if "states" not in obj:
            raise ParseError("cq channel is missing field 'states'")
        dim = obj.get("dim")
        states = []
        for i, entry in enumerate(obj["states"]):
            if not isinstance(entry, dict) or "re" not in entry:
                raise ParseError(f"state {i} must be an object with field 're'")
            re = np.asarray(entry["re"], dtype=float)
            im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise ParseError(f"state {i}: 're' and 'im' shapes differ")
            try:
                states.append(validate_density(re + 1j * im))
            except ValidationError as exc:
                raise ValidationError(f"state {i}: {exc}") from exc
        ch = CQChannel(states)
        if dim is not None and ch.dim != dim:
            raise ParseError(f"declared dim {dim} but states have dimension {ch.dim}")
        return ch
    raise ParseError(f"unknown channel type {kind!r}")


def load_channel(path) -> ClassicalChannel | CQChannel:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return channel_from_dict(obj)


def save_channel(channel, path) -> None:
    """Write atomically (temp file then rename)."""
    payload = json.dumps(channel_to_dict(channel))
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
