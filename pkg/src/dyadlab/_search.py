"""Internal numerical search helpers: norm ascents, power iteration,
seeded substreams and a deterministic parallel map."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def substream(seed: int, *labels: int) -> np.random.Generator:
    """Independent generator derived from (seed, labels); deterministic."""
    return np.random.default_rng([int(seed)] + [int(x) & 0xFFFFFFFF for x in labels])


def parallel_map(fn, items, threads: int = 1):
    """Order-preserving map; thread pool when threads > 1 (results are
    merged by index, so parallelism never changes the output)."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def lp_block_norm(cell_norms: np.ndarray, weight: float, p: float) -> float:
    """(sum_c weight * t_c^p)^(1/p) for nonnegative per-cell norms t_c."""
    t = np.asarray(cell_norms, dtype=float)
    if np.isinf(p):
        return float(np.max(t)) if t.size else 0.0
    return float((weight * np.sum(t ** p)) ** (1.0 / p))


def _vec_dual(y: np.ndarray, q: float) -> np.ndarray:
    """Norming vector for the l^q norm along the last axis (batched)."""
    if np.isinf(q):
        out = np.zeros_like(y)
        idx = np.argmax(np.abs(y), axis=-1)
        grid = np.indices(idx.shape)
        out[(*grid, idx)] = np.sign(np.take_along_axis(y, idx[..., None], -1))[..., 0]
        return out
    if q == 1.0:
        return np.sign(y)
    nrm = np.sum(np.abs(y) ** q, axis=-1, keepdims=True) ** ((q - 1.0) / q)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sign(y) * np.abs(y) ** (q - 1.0) / nrm
    return np.where(nrm > 0, out, 0.0)


def lp_lq_norm(x: np.ndarray, p: float, q: float, weight: float = 1.0) -> float:
    """L^p(l^q) norm of an (ncells, n) array with uniform cell weight."""
    cell = np.sum(np.abs(x) ** q, axis=-1) ** (1.0 / q) if not np.isinf(q) \
        else np.max(np.abs(x), axis=-1)
    return lp_block_norm(cell, weight, p)


def lp_lq_opnorm_ascent(matvec, rmatvec, ncells: int, n: int,
                        p: float, q: float, restarts: int = 6,
                        seed: int = 0, iters: int = 60) -> float:
    """Lower bound for the L^p(l^q) -> L^p(l^q) norm of a cellwise-linear
    operator given by matvec/rmatvec on (ncells, n) arrays.

    Power-type iteration: push the current iterate through the operator,
    replace it by the norming element of the dual norm, pull back.
    """
    pd = p / (p - 1.0)
    qd = np.inf if q == 1.0 else (1.0 if np.isinf(q) else q / (q - 1.0))
    rng = substream(seed, 0xA5)
    best = 0.0

    def dualize(y, pp, qq):
        # norming element of L^pp(l^qq) at y, unnormalized
        cn = np.sum(np.abs(y) ** qq, axis=-1) ** (1.0 / qq) if not np.isinf(qq) \
            else np.max(np.abs(y), axis=-1)
        z = _vec_dual(y, qq)
        if np.isinf(pp):
            w = np.zeros_like(cn)
            w[np.argmax(cn)] = 1.0
        else:
            w = cn ** (pp - 1.0)
        return z * w[:, None]

    starts = [np.ones((ncells, n))]
    for _ in range(restarts):
        starts.append(rng.standard_normal((ncells, n)))
    for x0 in starts:
        x = x0 / max(lp_lq_norm(x0, p, q), 1e-300)
        for _ in range(iters):
            y = matvec(x)
            val = lp_lq_norm(y, p, q) / max(lp_lq_norm(x, p, q), 1e-300)
            best = max(best, val)
            z = dualize(y, p, q)
            w = rmatvec(z)
            x_new = dualize(w, pd, qd)
            nrm = lp_lq_norm(x_new, p, q)
            if nrm == 0:
                break
            x_new /= nrm
            if np.max(np.abs(x_new - x)) < 1e-13:
                x = x_new
                break
            x = x_new
        y = matvec(x)
        best = max(best, lp_lq_norm(y, p, q) / max(lp_lq_norm(x, p, q), 1e-300))
    return float(best)


def implicit_sigma_max(matvec, rmatvec, dim_in: int, iters: int = 300,
                       seed: int = 0, tol: float = 1e-10) -> float:
    """Largest singular value of an implicitly given operator via power
    iteration on the normal operator; deterministic for a fixed seed."""
    rng = substream(seed, 0x515)
    x = rng.standard_normal(dim_in)
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(iters):
        y = matvec(x)
        z = rmatvec(y)
        nz = np.linalg.norm(z)
        if nz == 0:
            return 0.0
        x = z / nz
        cur = np.sqrt(nz)
        if abs(cur - prev) < tol * max(cur, 1.0):
            prev = cur
            break
        prev = cur
    return float(np.linalg.norm(matvec(x)))


def hill_climb(objective, x0: np.ndarray, rng: np.random.Generator,
               budget: int = 100, scale: float = 0.3):
    """Gaussian-perturbation hill climbing; returns (best_x, best_value).

    The step scale halves after repeated failures, so late iterations
    polish locally.
    """
    x = np.asarray(x0, dtype=float).copy()
    fx = objective(x)
    fails = 0
    for _ in range(budget):
        trial = x + scale * rng.standard_normal(x.shape)
        ft = objective(trial)
        if ft > fx:
            x, fx = trial, ft
            fails = 0
        else:
            fails += 1
            if fails >= 8:
                scale *= 0.5
                fails = 0
                if scale < 1e-4:
                    break
    return x, fx
