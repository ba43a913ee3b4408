"""Finite-dimensional value spaces and their norms.

Scalars, l^q coordinate spaces, operator spaces between them (induced
norm), and tensor-product spaces carrying the projective norm.  The
projective norm equals the nuclear norm (sum of singular values) when
both factors are Euclidean; otherwise it is NP-hard in general and is
reported as an (upper, lower) interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError


def _dual_exponent(q: float) -> float:
    if q == 1.0:
        return np.inf
    if np.isinf(q):
        return 1.0
    return q / (q - 1.0)


def vec_norm(x, q: float = 2.0) -> float:
    """l^q norm of a coordinate vector, q in [1, inf]."""
    x = np.asarray(x, dtype=float)
    if np.isinf(q):
        return float(np.max(np.abs(x))) if x.size else 0.0
    return float(np.sum(np.abs(x) ** q) ** (1.0 / q))


def _batch_vec_norm(x: np.ndarray, q: float, axis: int = -1) -> np.ndarray:
    if np.isinf(q):
        return np.max(np.abs(x), axis=axis)
    return np.sum(np.abs(x) ** q, axis=axis) ** (1.0 / q)


@dataclass(frozen=True)
class ValueSpace:
    """Declared value space of a step function.

    kind:
      scalar                    -- real numbers
      vector(n, q)              -- l^q_n
      operator(n_in, n_out, q_in, q_out)
                                -- linear maps l^{q_in}_{n_in} -> l^{q_out}_{n_out},
                                   values stored (n_out, n_in)
      tensor(n, m, q, r)        -- X (x) Y* with X = l^q_n, Y* = l^r_m,
                                   values stored (m, n) so that the trace
                                   pairing with an operator value is the
                                   plain elementwise sum
    """
    kind: str
    n: int = 1
    m: int = 1
    q: float = 2.0
    r: float = 2.0

    @staticmethod
    def scalar() -> "ValueSpace":
        return ValueSpace(kind="scalar")

    @staticmethod
    def vector(n: int, q: float = 2.0) -> "ValueSpace":
        return ValueSpace(kind="vector", n=n, q=q)

    @staticmethod
    def operator(n_in: int, n_out: int | None = None,
                 q_in: float = 2.0, q_out: float = 2.0) -> "ValueSpace":
        if n_out is None:
            n_out = n_in
        return ValueSpace(kind="operator", n=n_in, m=n_out, q=q_in, r=q_out)

    @staticmethod
    def tensor(n: int, m: int, q: float = 2.0, r: float = 2.0) -> "ValueSpace":
        return ValueSpace(kind="tensor", n=n, m=m, q=q, r=r)

    @property
    def value_shape(self) -> tuple[int, ...]:
        if self.kind == "scalar":
            return ()
        if self.kind == "vector":
            return (self.n,)
        if self.kind in ("operator", "tensor"):
            return (self.m, self.n)
        raise ConfigurationError(f"unknown value-space kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.value_shape, dtype=int)) if self.value_shape else 1

    def is_euclidean(self) -> bool:
        return self.kind == "scalar" or (self.q == 2.0 and self.r == 2.0)

    def norm(self, value) -> float:
        """Norm of a single value of this space."""
        return float(self.cellwise_norm(np.asarray(value, dtype=float)[None])[0])

    def cellwise_norm(self, values: np.ndarray) -> np.ndarray:
        """Vectorized norms over a leading batch axis.

        Operator values use the exactly-computable induced norms where they
        exist (Euclidean, q_in = 1 or q_out = inf) and a certified upper
        bound otherwise; tensor values use the nuclear norm and require
        Euclidean factors.
        """
        values = np.asarray(values, dtype=float)
        if self.kind == "scalar":
            return np.abs(values)
        if self.kind == "vector":
            return _batch_vec_norm(values, self.q)
        if self.kind == "operator":
            if self.q == 2.0 and self.r == 2.0:
                s = np.linalg.svd(values, compute_uv=False)
                return s[..., 0]
            if self.q == 1.0:
                return np.max(_batch_vec_norm(values, self.r, axis=-2), axis=-1)
            if np.isinf(self.r):
                qd = _dual_exponent(self.q)
                return np.max(_batch_vec_norm(values, qd, axis=-1), axis=-1)
            return np.array([op_norm_bounds(v, q_in=self.q, q_out=self.r)[1]
                             for v in values.reshape(-1, self.m, self.n)]
                            ).reshape(values.shape[:-2])
        if self.kind == "tensor":
            if not self.is_euclidean():
                raise ConfigurationError(
                    "cellwise tensor norms need Euclidean factors; use "
                    "projective_norm_bruteforce for point values")
            s = np.linalg.svd(values, compute_uv=False)
            return np.sum(s, axis=-1)
        raise ConfigurationError(f"unknown value-space kind {self.kind!r}")

    def to_config(self) -> dict:
        if self.kind == "scalar":
            return {"kind": "scalar"}
        if self.kind == "vector":
            return {"kind": "vector", "n": self.n, "q": _q_out(self.q)}
        if self.kind == "operator":
            return {"kind": "operator", "n_in": self.n, "n_out": self.m,
                    "q_in": _q_out(self.q), "q_out": _q_out(self.r)}
        return {"kind": "tensor", "n": self.n, "m": self.m,
                "q": _q_out(self.q), "r": _q_out(self.r)}


def _q_in(q) -> float:
    if isinstance(q, str):
        if q.lower() in ("inf", "infinity"):
            return np.inf
        raise ConfigurationError(f"bad exponent {q!r}")
    q = float(q)
    if q < 1.0:
        raise ConfigurationError(f"exponent must be >= 1, got {q}")
    return q


def _q_out(q: float):
    return "inf" if np.isinf(q) else q


def space_from_config(cfg: dict) -> ValueSpace:
    kind = cfg.get("kind")
    if kind == "scalar":
        unknown = set(cfg) - {"kind"}
    elif kind == "vector":
        unknown = set(cfg) - {"kind", "n", "q"}
    elif kind == "operator":
        unknown = set(cfg) - {"kind", "n_in", "n_out", "q_in", "q_out"}
    elif kind == "tensor":
        unknown = set(cfg) - {"kind", "n", "m", "q", "r"}
    else:
        raise ConfigurationError(f"unknown value-space kind {kind!r}")
    if unknown:
        raise ConfigurationError(f"unknown space config keys: {sorted(unknown)}")
    if kind == "scalar":
        return ValueSpace.scalar()
    if kind == "vector":
        return ValueSpace.vector(int(cfg["n"]), _q_in(cfg.get("q", 2)))
    if kind == "operator":
        return ValueSpace.operator(int(cfg["n_in"]),
                                   int(cfg.get("n_out", cfg["n_in"])),
                                   _q_in(cfg.get("q_in", 2)),
                                   _q_in(cfg.get("q_out", 2)))
    return ValueSpace.tensor(int(cfg["n"]), int(cfg["m"]),
                             _q_in(cfg.get("q", 2)), _q_in(cfg.get("r", 2)))


# ---------------------------------------------------------------------------
# induced operator norms  l^q_n -> l^r_m


def op_norm_bounds(A, q_in: float = 2.0, q_out: float = 2.0,
                   restarts: int = 8, seed: int = 0,
                   iters: int = 80) -> tuple[float, float]:
    """(lower, upper) bounds for the induced norm of A: l^q_in -> l^q_out.

    Exactly computable cases return lower == upper.  Otherwise the lower
    bound comes from multi-restart ascent over the unit ball and the upper
    bound from Hoelder embeddings of the exactly-known column/row norms.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if A.size == 0 or not np.any(A):
        return 0.0, 0.0
    if q_in == 2.0 and q_out == 2.0:
        s = float(np.linalg.svd(A, compute_uv=False)[0])
        return s, s
    if q_in == 1.0:
        v = float(np.max(_batch_vec_norm(A, q_out, axis=0)))
        return v, v
    if np.isinf(q_out):
        v = float(np.max(_batch_vec_norm(A, _dual_exponent(q_in), axis=1)))
        return v, v
    if np.isinf(q_in) and n <= 16:
        # maximizers sit at sign vectors; enumerate them
        signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * n))).reshape(n, -1)
        v = float(np.max(_batch_vec_norm(A @ signs, q_out, axis=0)))
        return v, v

    # certified upper bound
    ub_col = np.max(_batch_vec_norm(A, q_out, axis=0)) * n ** (1.0 - 1.0 / q_in)
    fac_r = 1.0 if np.isinf(q_out) else m ** (1.0 / q_out)
    ub_row = np.max(_batch_vec_norm(A, _dual_exponent(q_in), axis=1)) * fac_r
    sig = np.linalg.svd(A, compute_uv=False)[0]
    ub_sig = (sig * n ** max(0.0, 0.5 - 1.0 / q_in)
              * m ** max(0.0, (0.0 if np.isinf(q_out) else 1.0 / q_out) - 0.5))
    upper = float(min(ub_col, ub_row, ub_sig))

    lower = _ascend_op_norm(A, q_in, q_out, restarts, seed, iters)
    return min(lower, upper), upper


def op_norm_induced(A, q_in: float = 2.0, q_out: float = 2.0,
                    restarts: int = 8, seed: int = 0) -> float:
    """Induced norm of A; exact where exact bounds exist, else the ascent
    lower bound (see op_norm_bounds for the certified interval)."""
    lower, upper = op_norm_bounds(A, q_in, q_out, restarts=restarts, seed=seed)
    return lower if lower < upper else upper


def _dual_map(y: np.ndarray, p: float) -> np.ndarray:
    """Vector z with <z, y> = ||y||_p and ||z||_{p'} = 1 (a norming functional)."""
    y = np.asarray(y, dtype=float)
    if np.isinf(p):
        z = np.zeros_like(y)
        i = int(np.argmax(np.abs(y)))
        z[i] = np.sign(y[i]) if y[i] != 0 else 1.0
        return z
    if p == 1.0:
        return np.sign(y)
    npow = np.abs(y) ** (p - 1.0)
    denom = np.sum(np.abs(y) ** p) ** ((p - 1.0) / p)
    return np.sign(y) * npow / denom if denom > 0 else np.zeros_like(y)


def _normalize(x: np.ndarray, q: float) -> np.ndarray:
    nrm = vec_norm(x, q)
    return x / nrm if nrm > 0 else x


def _ascend_op_norm(A, q_in, q_out, restarts, seed, iters) -> float:
    """Power-type ascent for ||A||_{q_in -> q_out} (lower bound only)."""
    m, n = A.shape
    rng = np.random.default_rng([seed, 0x0B0]) if seed is not None else np.random.default_rng()
    qd = _dual_exponent(q_in)
    best = 0.0
    starts = [np.ones(n)] + [A[i] for i in range(min(m, 3))] \
        + [rng.standard_normal(n) for _ in range(restarts)]
    for x0 in starts:
        x = _normalize(np.asarray(x0, dtype=float), q_in)
        if not np.any(x):
            continue
        for _ in range(iters):
            y = A @ x
            val = vec_norm(y, q_out)
            best = max(best, val)
            if val == 0:
                break
            z = _dual_map(y, q_out)
            w = A.T @ z
            if np.isinf(q_in):
                x_new = np.sign(w)
                x_new[x_new == 0] = 1.0
            else:
                x_new = _normalize(np.sign(w) * np.abs(w) ** (qd - 1.0), q_in)
            if np.allclose(x_new, x, atol=1e-14):
                break
            x = x_new
        best = max(best, vec_norm(A @ x, q_out))
    return float(best)


# ---------------------------------------------------------------------------
# nuclear and projective tensor norms


def nuclear_norm(M) -> float:
    """Sum of singular values; the projective norm for Euclidean factors."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def trace_pair(B, v) -> float:
    """Bilinear pairing of an operator value B with a tensor value v.

    Both stored in the same (n_out, n_in) layout, so the pairing is the
    plain elementwise sum sum_ij B_ij v_ij.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if B.shape != v.shape:
        raise ConfigurationError(f"shape mismatch {B.shape} vs {v.shape}")
    return float(np.sum(B * v))


@dataclass(frozen=True)
class ProjectiveNormInterval:
    upper: float
    lower: float

    def width(self) -> float:
        return self.upper - self.lower


def projective_norm_bruteforce(v, space: ValueSpace | None = None,
                               rank_budget: int | None = None,
                               restarts: int = 12,
                               seed: int = 0) -> ProjectiveNormInterval:
    """Bracket the projective norm of a tensor value by decomposition search.

    Upper bound: minimize sum_k ||e_k||_q ||f_k||_r over rank_budget-term
    decompositions, parametrized as the GL(K) orbit of an SVD factorization
    (always exactly feasible).  Lower bound: sup over norming bilinear forms
    phi of |<phi, v>| / ub(||phi||), where ub is a certified upper bound on
    the form norm, so the quotient never overshoots.
    """
    W = np.atleast_2d(np.asarray(v, dtype=float))
    m, n = W.shape
    if space is None:
        space = ValueSpace.tensor(n, m)
    q, r = space.q, space.r
    if rank_budget is None:
        rank_budget = min(n, m)
    if rank_budget < min(n, m):
        raise ConfigurationError(
            f"rank_budget {rank_budget} below min dimension {min(n, m)}")
    if not np.any(W):
        return ProjectiveNormInterval(0.0, 0.0)

    U, s, Vt = np.linalg.svd(W)
    k = min(rank_budget, min(n, m))
    root = np.sqrt(s[:k])
    B0 = U[:, :k] * root          # (m, k): Y*-factor columns
    A0 = Vt[:k, :].T * root       # (n, k): X-factor columns

    def cost(gflat):
        G = gflat.reshape(k, k)
        try:
            Ginv = np.linalg.inv(G)
        except np.linalg.LinAlgError:
            return 1e6
        Acols = A0 @ G
        Bcols = B0 @ Ginv.T
        return float(np.sum(_batch_vec_norm(Acols, q, axis=0)
                            * _batch_vec_norm(Bcols, r, axis=0)))

    rng = np.random.default_rng([seed, 0xF0])
    upper = cost(np.eye(k).ravel())
    for t in range(restarts):
        g0 = np.eye(k).ravel() if t == 0 else \
            (np.eye(k) + 0.5 * rng.standard_normal((k, k))).ravel()
        res = minimize(cost, g0, method="Nelder-Mead",
                       options={"maxiter": 400 * k * k, "fatol": 1e-12,
                                "xatol": 1e-10})
        upper = min(upper, float(res.fun))

    lower = _projective_lower(W, q, r, restarts, seed)
    return ProjectiveNormInterval(upper=upper, lower=min(lower, upper))


def _projective_lower(W, q, r, restarts, seed) -> float:
    """Duality lower bound via norming forms with certified norm bounds."""
    m, n = W.shape
    rd = _dual_exponent(r)

    def score(phi):
        _, ub = op_norm_bounds(phi, q_in=q, q_out=rd, restarts=4, seed=seed)
        return abs(float(np.sum(phi * W))) / ub if ub > 0 else 0.0

    U, _, Vt = np.linalg.svd(W)
    cands = [U @ Vt if m <= n else (U @ Vt), np.sign(W) + (W == 0), W.copy()]
    # rank-one extreme candidates (exhaustive over sign vectors in low dim)
    if n <= 8 and m <= 8:
        for sv in np.ndindex(*(2,) * n):
            e = np.where(np.array(sv) > 0, 1.0, -1.0)
            f = W @ e
            if np.any(f):
                cands.append(np.outer(f, e))
    rng = np.random.default_rng([seed, 0xF1])
    for _ in range(restarts):
        cands.append(rng.standard_normal((m, n)))
    best = max(score(phi) for phi in cands)

    # projected gradient polish from the best candidate
    phi = max(cands, key=score).astype(float)
    step = 0.5
    for _ in range(60):
        trial = phi + step * W
        if score(trial) > score(phi):
            phi = trial
        else:
            step *= 0.5
            if step < 1e-6:
                break
    return max(best, score(phi))
