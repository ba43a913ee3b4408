"""Step functions on a dyadic grid and the martingale calculus on them.

Conventions: levels run 0..L with level 0 the whole torus.  The
difference operators are D_k = E_k - E_{k-1} for k >= 1 and D_0 = E_0,
so that E_k = E_{k-1} + D_k holds exactly and sum_k D_k is the identity.
The mean block D_0 is an artifact of the torus model (on the whole space
the mean vanishes in the limit); sign transforms sign it by default and
a flag can freeze it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grid import DyadicGrid, HaarFunction
from .spaces import ValueSpace, op_norm_bounds
from ._search import lp_block_norm, lp_lq_opnorm_ascent

SIGN_ENUM_GUARD = 20


@dataclass
class StepFunction:
    """A function constant on the finest-level cells of a grid.

    values has shape (ncells,) + space.value_shape, cells flattened in
    C order of their multi-indices.
    """
    grid: DyadicGrid
    space: ValueSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        want = (self.grid.ncells_finest,) + self.space.value_shape
        if self.values.shape != want:
            raise ConfigurationError(
                f"value array shape {self.values.shape} != {want}")

    @staticmethod
    def scalar(grid: DyadicGrid, values) -> "StepFunction":
        return StepFunction(grid, ValueSpace.scalar(), np.asarray(values, dtype=float))

    @staticmethod
    def constant(grid: DyadicGrid, space: ValueSpace, value) -> "StepFunction":
        tile = np.broadcast_to(np.asarray(value, dtype=float),
                               (grid.ncells_finest,) + space.value_shape)
        return StepFunction(grid, space, tile.copy())

    @staticmethod
    def from_haar(grid: DyadicGrid, h: HaarFunction) -> "StepFunction":
        return StepFunction.scalar(grid, h.cell_values())

    def copy(self) -> "StepFunction":
        return StepFunction(self.grid, self.space, self.values.copy())

    def cell_norms(self) -> np.ndarray:
        return self.space.cellwise_norm(self.values)

    def __add__(self, other):
        return StepFunction(self.grid, self.space, self.values + other.values)

    def __sub__(self, other):
        return StepFunction(self.grid, self.space, self.values - other.values)

    def __mul__(self, c: float):
        return StepFunction(self.grid, self.space, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return StepFunction(self.grid, self.space, -self.values)


def inner(f: StepFunction, g: StepFunction) -> float:
    """Measure-weighted L2 pairing: full contraction of the value entries."""
    if f.values.shape != g.values.shape:
        raise ConfigurationError("step functions have mismatched shapes")
    return float(f.grid.cell_weight * np.sum(f.values * g.values))


def _block_view(values: np.ndarray, grid: DyadicGrid, k: int):
    """Reshape the flat cell axis into per-axis (coarse, block) pairs."""
    d, L = grid.d, grid.L
    coarse, blk = 2 ** k, 2 ** (L - k)
    shape = ()
    for _ in range(d):
        shape += (coarse, blk)
    return values.reshape(shape + values.shape[1:]), tuple(2 * i + 1 for i in range(d))


def expect_array(values: np.ndarray, grid: DyadicGrid, k: int) -> np.ndarray:
    """E_k on a raw value array (leading axis = finest cells)."""
    if not 0 <= k <= grid.L:
        raise ConfigurationError(f"level {k} outside 0..{grid.L}")
    if k == grid.L:
        return values.copy()
    arr, block_axes = _block_view(values, grid, k)
    means = arr.mean(axis=block_axes, keepdims=True)
    return np.broadcast_to(means, arr.shape).reshape(values.shape).copy()


def expect(f: StepFunction, k: int) -> StepFunction:
    """Conditional expectation onto level-k cells (cell averages)."""
    return StepFunction(f.grid, f.space, expect_array(f.values, f.grid, k))


def diff(f: StepFunction, k: int) -> StepFunction:
    """Martingale difference D_k = E_k - E_{k-1} (k >= 1); D_0 = E_0."""
    if not 0 <= k <= f.grid.L:
        raise ConfigurationError(f"level {k} outside 0..{f.grid.L}")
    if k == 0:
        return expect(f, 0)
    return StepFunction(f.grid, f.space,
                        expect_array(f.values, f.grid, k)
                        - expect_array(f.values, f.grid, k - 1))


def maximal(f: StepFunction) -> StepFunction:
    """Cancellative maximal function: pointwise sup over k of ||E_k f||."""
    out = None
    for k in range(f.grid.L + 1):
        norms = f.space.cellwise_norm(expect_array(f.values, f.grid, k))
        out = norms if out is None else np.maximum(out, norms)
    return StepFunction.scalar(f.grid, out)


def sign_transform_array(values: np.ndarray, grid: DyadicGrid,
                         eps) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (grid.L + 1,):
        raise ConfigurationError(
            f"need {grid.L + 1} signs (index 0 signs the mean block), got {eps.shape}")
    prev = expect_array(values, grid, 0)
    out = eps[0] * prev
    for k in range(1, grid.L + 1):
        cur = expect_array(values, grid, k)
        out = out + eps[k] * (cur - prev)
        prev = cur
    return out


def sign_transform(f: StepFunction, eps) -> StepFunction:
    """sum_k eps_k D_k f for a +/-1 sign vector indexed by levels 0..L."""
    return StepFunction(f.grid, f.space,
                        sign_transform_array(f.values, f.grid, eps))


def sign_patterns(K: int) -> np.ndarray:
    """All 2^K sign vectors in {-1,+1}^K, one per row."""
    if K > SIGN_ENUM_GUARD:
        raise ConfigurationError(
            f"exact sign enumeration capped at K={SIGN_ENUM_GUARD}, got {K}")
    bits = (np.arange(2 ** K)[:, None] >> np.arange(K)) & 1
    return 2.0 * bits - 1.0


def sign_expectation(F, K: int, mode: str = "exact",
                     n_samples: int = 10_000, seed: int = 0):
    """E_eps F(eps) over independent unbiased signs eps in {-1,+1}^K.

    mode="exact" enumerates all 2^K patterns (K <= 20) and returns the
    mean; mode="monte_carlo" returns (mean, standard_error).
    """
    if mode == "exact":
        pats = sign_patterns(K)
        total = None
        for row in pats:
            val = np.asarray(F(row), dtype=float)
            total = val if total is None else total + val
        out = total / len(pats)
        return float(out) if out.ndim == 0 else out
    if mode == "monte_carlo":
        rng = np.random.default_rng([seed, 0x51])
        draws = rng.choice([-1.0, 1.0], size=(n_samples, K))
        vals = np.array([F(row) for row in draws], dtype=float)
        mean = vals.mean(axis=0)
        se = vals.std(axis=0, ddof=1) / np.sqrt(n_samples)
        if mean.ndim == 0:
            return float(mean), float(se)
        return mean, se
    raise ConfigurationError(f"unknown mode {mode!r}")


def transform_matrix(grid: DyadicGrid, eps) -> np.ndarray:
    """Cell-space matrix of the sign transform (it acts per value entry)."""
    ident = np.eye(grid.ncells_finest)
    return sign_transform_array(ident, grid, eps)


def umd_transform_norm(p: float, space: ValueSpace, grid: DyadicGrid,
                       mode: str = "exact", sign_mean: bool = True,
                       restarts: int = 6, seed: int = 0,
                       n_samples: int = 64) -> float:
    """Lower-bound estimate of the best constant in the sign-transform
    inequality ||sum eps_k D_k f||_p <= beta ||f||_p over this grid.

    Enumerates all sign patterns for L <= 12 (global sign flips are
    quotiented out); per pattern the L^p -> L^p norm is the exact largest
    singular value when p = 2 and the values are Euclidean, and a
    multi-restart ascent lower bound otherwise.
    """
    if p <= 1 or np.isinf(p):
        raise ConfigurationError("p must lie in (1, inf)")
    L = grid.L
    if mode == "exact":
        if L > 12:
            raise ConfigurationError("exact enumeration capped at L=12")
        tail = sign_patterns(L)
        pats = np.hstack([np.ones((len(tail), 1)), tail])  # eps_0 = +1 wlog
        if not sign_mean:
            pats[:, 0] = 1.0
    elif mode == "sampled":
        rng = np.random.default_rng([seed, 0x52])
        pats = rng.choice([-1.0, 1.0], size=(n_samples, L + 1))
        if not sign_mean:
            pats[:, 0] = 1.0
    else:
        raise ConfigurationError(f"unknown mode {mode!r}")

    euclid = space.kind == "scalar" or (space.kind == "vector" and space.q == 2.0)
    best = 0.0
    for eps in pats:
        M = transform_matrix(grid, eps)
        if p == 2.0 and euclid:
            val = float(np.linalg.svd(M, compute_uv=False)[0])
        elif space.kind == "scalar":
            val, _ = op_norm_bounds(M, q_in=p, q_out=p,
                                    restarts=restarts, seed=seed)
        else:
            n = space.value_shape[0]
            val = lp_lq_opnorm_ascent(
                lambda x, M=M: M @ x, lambda y, M=M: M.T @ y,
                grid.ncells_finest, n, p, space.q,
                restarts=restarts, seed=seed)
        best = max(best, val)
    return best


def doob_check(f: StepFunction, p: float):
    """Doob's maximal inequality probe: (lhs, rhs, lhs <= rhs) with
    lhs = ||M f||_p and rhs = p' ||f||_p."""
    if p <= 1 or np.isinf(p):
        raise ConfigurationError("p must lie in (1, inf)")
    w = f.grid.cell_weight
    lhs = lp_block_norm(maximal(f).values, w, p)
    rhs = p / (p - 1.0) * lp_block_norm(f.cell_norms(), w, p)
    return lhs, rhs, bool(lhs <= rhs)
