r"""Uniform grid and the upwind nonlocal stencil.

For a node with ``zeta(x_j) > 0`` the weights are

.. math::

    a_{j,j-k} = -\int_0^\infty \phi_k(s)\,\gamma(s, x_j)\,ds, \quad k \ge 1,
    \qquad a_{j,j} = -\sum_{k \ge 1} a_{j,j-k},

with ``phi_k`` the hat function centred at ``k h``. Nodes with
``zeta(x_j) == 0`` get the first-order backward difference ``(1/h, -1/h)``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from nonconv.kernel import HorizonField, ReferenceKernel
from nonconv.quadrature import composite_rule

GL_POINTS = 16


class TruncationWarning(UserWarning):
    """The stencil reaches left of the grid where the data is not negligible."""


@dataclass(frozen=True)
class Grid:
    x_left: float
    h: float
    n_nodes: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.n_nodes < 2:
            raise ValueError("grid needs at least two nodes")

    @classmethod
    def from_bounds(cls, x_left: float, x_right: float, h: float) -> "Grid":
        n = int(round((x_right - x_left) / h)) + 1
        return cls(x_left, h, n)

    def node(self, j):
        return self.x_left + np.asarray(j) * self.h

    @property
    def x(self) -> np.ndarray:
        return self.x_left + np.arange(self.n_nodes) * self.h

    @property
    def x_right(self) -> float:
        return float(self.node(self.n_nodes - 1))

    def offset(self, x: float) -> float:
        """Fractional node index of ``x``."""
        return (x - self.x_left) / self.h

    def index_of(self, x: float, tol: float = 1e-12) -> int:
        """Node index of ``x``; raises if ``x`` is not within ``tol*h`` of a node."""
        f = self.offset(x)
        j = int(round(f))
        # the index offset is itself rounded, so allow for its relative error
        slack = tol + 4 * np.finfo(float).eps * max(1.0, abs(f))
        if abs(f - j) > slack or not 0 <= j < self.n_nodes:
            raise ValueError(f"x = {x} is not a node of the grid "
                             f"(offset {f - j:+.3e} h)")
        return j


@dataclass(frozen=True)
class CoefficientRow:
    """Weights ``a_{j,j-k}`` for ``k = 0..bandwidth`` (``weights[0]`` is the
    diagonal)."""

    j: int
    weights: np.ndarray
    local: bool = False

    @property
    def bandwidth(self) -> int:
        return len(self.weights) - 1

    @property
    def diagonal(self) -> float:
        return float(self.weights[0])


def _kink_partition(zeta: float, h: float, s_max: float) -> np.ndarray:
    """Cell boundaries in ``y = s/zeta`` on ``[0, s_max]``: every hat kink
    ``m h / zeta`` plus a uniform partition."""
    n_uniform = max(16, math.ceil(s_max * zeta / h))
    uniform = np.linspace(0.0, s_max, n_uniform + 1)
    step = h / zeta
    m_max = math.floor(s_max / step) if step <= s_max else 0
    kinks = step * np.arange(1, m_max + 1)
    breaks = np.union1d(uniform, kinks[kinks < s_max])
    keep = np.concatenate(([True], np.diff(breaks) > 1e-13 * s_max))
    return breaks[keep]


def hat_integrals(kernel: ReferenceKernel, zeta: float, h: float) -> np.ndarray:
    """``I_k = int_0^inf phi_k(s) gamma(s) ds`` for ``k = 0..K`` at horizon
    ``zeta > 0``, where ``K = ceil(zeta * s_max / h) + 1``.

    Integration runs in ``y = s/zeta`` so the cost and accuracy do not depend
    on how ``zeta`` compares with ``h``.
    """
    s_max = kernel.s_max
    K = math.ceil(zeta * s_max / h) + 1
    breaks = _kink_partition(zeta, h, s_max)
    y, w = composite_rule(breaks, GL_POINTS)
    mids = 0.5 * (breaks[1:] + breaks[:-1])
    # hat interval of each cell, taken from its midpoint so kinks never split
    m = np.repeat(np.floor(mids * zeta / h).astype(np.int64), GL_POINTS)
    frac = y * zeta / h - m
    q = w * kernel(y) / zeta
    out = np.bincount(m, weights=q * (1.0 - frac), minlength=K + 1)
    out += np.bincount(m + 1, weights=q * frac, minlength=K + 1)
    return out[:K + 1]


def _row_weights(kernel: ReferenceKernel, zeta: float, h: float) -> np.ndarray:
    if zeta == 0.0:
        return np.array([1.0 / h, -1.0 / h])
    integrals = hat_integrals(kernel, zeta, h)
    weights = -integrals
    weights[0] = integrals[1:].sum()
    return weights


def assemble_row(grid: Grid, kernel: ReferenceKernel, horizon: HorizonField,
                 j: int) -> CoefficientRow:
    if not 0 <= j < grid.n_nodes:
        raise IndexError(f"node {j} outside grid of {grid.n_nodes} nodes")
    zeta = float(horizon(grid.node(j)))
    w = _row_weights(kernel, zeta, grid.h)
    w.setflags(write=False)
    return CoefficientRow(j, w, local=(zeta == 0.0))


class Stencil:
    """All rows of the discrete operator on one grid, plus a sparse matrix
    for fast application. Columns left of the grid are dropped, which is the
    zero left extension."""

    def __init__(self, grid: Grid, rows: Sequence[CoefficientRow]):
        self.grid = grid
        self.rows = list(rows)
        n = grid.n_nodes
        indptr = [0]
        cols, vals = [], []
        for row in self.rows:
            k = np.arange(row.bandwidth + 1)
            c = row.j - k
            ok = c >= 0
            cols.append(c[ok][::-1])
            vals.append(row.weights[ok][::-1])
            indptr.append(indptr[-1] + int(ok.sum()))
        self.matrix = sparse.csr_matrix(
            (np.concatenate(vals), np.concatenate(cols), np.array(indptr)),
            shape=(n, n))
        self.diagonal = np.array([r.diagonal for r in self.rows])
        self.bandwidths = np.array([r.bandwidth for r in self.rows])

    @property
    def max_diagonal(self) -> float:
        return float(self.diagonal.max())

    def reaches_left_edge(self) -> np.ndarray:
        return self.bandwidths > np.arange(len(self.rows))

    def to_csv(self, path) -> None:
        """Debug dump with columns ``j, x_j, k, a_jjk``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "x_j", "k", "a_jjk"])
            for row in self.rows:
                xj = float(self.grid.node(row.j))
                for k, a in enumerate(row.weights):
                    w.writerow([row.j, f"{xj:.12g}", k, f"{a:.17g}"])


def assemble(grid: Grid, kernel: ReferenceKernel, horizon: HorizonField) -> Stencil:
    """Assemble every row. Rows depend on the node only through
    ``zeta(x_j)``, so equal horizon values share one computation."""
    zetas = np.asarray(horizon(grid.x), dtype=float)
    cache: dict[float, np.ndarray] = {}
    rows = []
    for j, z in enumerate(zetas):
        z = float(z)
        if z not in cache:
            w = _row_weights(kernel, z, grid.h)
            w.setflags(write=False)
            cache[z] = w
        rows.append(CoefficientRow(j, cache[z], local=(z == 0.0)))
    return Stencil(grid, rows)


def apply_operator(stencil, U, left_extension: float = 0.0) -> np.ndarray:
    """``(D_h U)_j = sum_k a_{j,j-k} U_{j-k}``; indices left of the grid read
    ``left_extension``. ``stencil`` is a :class:`Stencil` or a row list on a
    common grid."""
    if not isinstance(stencil, Stencil):
        rows = list(stencil)
        n = len(rows)
        grid = Grid(0.0, 1.0, max(n, 2))
        stencil = Stencil(grid, rows)
    U = np.asarray(U, dtype=float)
    if U.shape != (len(stencil.rows),):
        raise ValueError(f"U has shape {U.shape}, expected ({len(stencil.rows)},)")
    out = stencil.matrix @ U
    if left_extension != 0.0:
        reach = stencil.reaches_left_edge()
        if np.any(reach):
            edge = int(stencil.bandwidths.max())
            if np.any(np.abs(U[:edge]) > 1e-8):
                warnings.warn("stencil reaches left of the grid next to nonzero data",
                              TruncationWarning, stacklevel=2)
            for j in np.flatnonzero(reach):
                w = stencil.rows[j].weights
                out[j] += left_extension * w[j + 1:].sum()
    return out
