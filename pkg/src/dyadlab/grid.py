"""Finite dyadic geometry on the unit torus.

A grid is the nested family of dyadic partitions of [0,1)^d at levels
0..L, optionally rotated by a common shift vector (applied modulo 1, so
every level remains an exact partition).  Level k has 2^(dk) cells of
measure 2^(-dk); level 0 is the whole torus.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

MAX_DL = 16  # memory guard: at most 2^16 finest cells


@dataclass(frozen=True)
class DyadicGrid:
    d: int
    L: int
    shift: tuple[float, ...]

    @property
    def ncells_finest(self) -> int:
        return 1 << (self.d * self.L)

    def ncells(self, k: int) -> int:
        return 1 << (self.d * k)

    @property
    def cell_weight(self) -> float:
        """Measure of a finest-level cell."""
        return 2.0 ** (-self.d * self.L)

    def side(self, k: int) -> float:
        return 2.0 ** (-k)

    def locate(self, x, k: int):
        """Multi-index of the level-k cell containing the point x (torus)."""
        x = np.asarray(x, dtype=float)
        rel = np.mod(x - np.asarray(self.shift), 1.0)
        return tuple((rel * 2**k).astype(int))

    def to_config(self) -> dict:
        return {"d": self.d, "L": self.L, "shift": list(self.shift)}


@dataclass(frozen=True)
class Cell:
    level: int
    index: tuple[int, ...]
    lower: tuple[float, ...]  # lower corner, before wrap; live extent is mod 1
    side: float

    @property
    def measure(self) -> float:
        return self.side ** len(self.index)

    def intervals(self, axis: int) -> list[tuple[float, float]]:
        """The 1-2 disjoint intervals covering this cell on the given axis
        (two when the cell wraps around the torus seam)."""
        lo = self.lower[axis] % 1.0
        hi = lo + self.side
        if hi <= 1.0 + 1e-15:
            return [(lo, min(hi, 1.0))]
        return [(lo, 1.0), (0.0, hi - 1.0)]

    def wraps(self) -> bool:
        return any(len(self.intervals(a)) == 2 for a in range(len(self.index)))


def make_grid(d: int, L: int, shift=None) -> DyadicGrid:
    """Build a shifted dyadic grid; validates the memory guard d*L <= 16."""
    if d < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {d}")
    if L < 1 or d * L > MAX_DL:
        raise ConfigurationError(
            f"level L={L} out of range [1, {MAX_DL // d}] for d={d}")
    if shift is None:
        shift = (0.0,) * d
    shift = tuple(float(s) for s in np.atleast_1d(shift))
    if len(shift) != d:
        raise ConfigurationError(f"shift has {len(shift)} components, need {d}")
    if any(s < 0.0 or s >= 1.0 for s in shift):
        raise ConfigurationError(f"shift components must lie in [0,1): {shift}")
    return DyadicGrid(d=d, L=L, shift=shift)


def grid_from_config(cfg: dict) -> DyadicGrid:
    unknown = set(cfg) - {"d", "L", "shift"}
    if unknown:
        raise ConfigurationError(f"unknown grid config keys: {sorted(unknown)}")
    return make_grid(int(cfg["d"]), int(cfg["L"]), cfg.get("shift"))


def cells(grid: DyadicGrid, k: int) -> list[Cell]:
    """All level-k cells, in C order of their multi-indices."""
    if not 0 <= k <= grid.L:
        raise ConfigurationError(f"level {k} outside 0..{grid.L}")
    side = grid.side(k)
    out = []
    for index in itertools.product(range(2**k), repeat=grid.d):
        lower = tuple(m * side + s for m, s in zip(index, grid.shift))
        out.append(Cell(level=k, index=index, lower=lower, side=side))
    return out


def flat_index(grid: DyadicGrid, index: tuple[int, ...], k: int) -> int:
    """C-order position of a level-k multi-index."""
    n = 2**k
    pos = 0
    for m in index:
        pos = pos * n + m
    return pos


@dataclass(frozen=True)
class HaarFunction:
    """Haar function attached to a parent cell: one of the 2^d - 1 tensor
    sign patterns on the parent's children, +/-1 on the parent, 0 outside."""
    parent: Cell
    signature: tuple[int, ...]  # in {0,1}^d, not all zero
    grid: DyadicGrid = field(repr=False)

    @property
    def level(self) -> int:
        return self.parent.level

    def cell_values(self) -> np.ndarray:
        """Values on the finest-level cells, flattened in C order."""
        g = self.grid
        k, L = self.parent.level, g.L
        n_fine = 2**L
        per_axis = []
        for ax in range(g.d):
            col = np.zeros(n_fine)
            m = self.parent.index[ax]
            span = 2 ** (L - k)
            half = span // 2
            lo = m * span
            col[lo:lo + span] = 1.0
            if self.signature[ax]:
                col[lo + half:lo + span] = -1.0
            per_axis.append(col)
        vals = per_axis[0]
        for col in per_axis[1:]:
            vals = np.multiply.outer(vals, col)
        return vals.reshape(-1)

    @property
    def sq_norm(self) -> float:
        """L2 norm squared: the parent's measure (values are +/-1 on it)."""
        return self.parent.measure


def haar_basis(grid: DyadicGrid) -> list[HaarFunction]:
    """The full Haar family: parents at levels 0..L-1, all nonzero signatures.

    Together with the constant function it spans all level-L step functions;
    members are pairwise L2-orthogonal.
    """
    signatures = [s for s in itertools.product((0, 1), repeat=grid.d)
                  if any(s)]
    out = []
    for k in range(grid.L):
        for cell in cells(grid, k):
            for sig in signatures:
                out.append(HaarFunction(parent=cell, signature=sig, grid=grid))
    return out
