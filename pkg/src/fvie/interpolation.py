"""Tensor-product Lagrange interpolation of fuzzy-valued grid data.

Two ways of combining fuzzy node values with the (sign-indefinite) Lagrange
coefficients are supported:

``"fuzzy"``
    Each term is ``L_i(x) L_j(y) (.) u_ij`` with the endpoint-swapping scalar
    product, summed with fuzzy addition.  The result is always a valid fuzzy
    number, but cut widths grow by ``sum |L_i L_j|``, so constants are not
    reproduced away from the nodes.

``"levelwise"``
    The lower and upper endpoint functions are interpolated separately as
    crisp data.  Fuzzy polynomials are reproduced exactly, but validity of the
    result must be checked by the caller.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError
from .fuzzy import FuzzyNumber, LevelGrid

log = logging.getLogger(__name__)

ARITHMETIC_MODES = ("fuzzy", "levelwise")


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """``w_i = 1 / prod_{k != i} (x_i - x_k)``."""
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


@dataclass(frozen=True, eq=False)
class LagrangeBasis:
    nodes: np.ndarray
    barycentric_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("nodes must be a non-empty 1-D array")
        if np.unique(nodes).size != nodes.size:
            raise ValueError("interpolation nodes must be pairwise distinct")
        nodes.setflags(write=False)
        w = barycentric_weights(nodes)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "barycentric_weights", w)

    @property
    def order(self) -> int:
        return self.nodes.size - 1

    def matrix(self, x) -> np.ndarray:
        """All basis values at ``x``: shape ``x.shape + (N+1,)``.

        Uses the second (true) barycentric form; points that coincide with a
        node get the exact Kronecker delta.
        """
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        diff = flat[:, None] - self.nodes[None, :]
        exact = diff == 0.0
        hit = exact.any(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = self.barycentric_weights / diff
            out = terms / terms.sum(axis=1, keepdims=True)
        if hit.any():
            out[hit] = exact[hit].astype(float)
        return out.reshape(x.shape + (self.nodes.size,))

    def __call__(self, x):
        return self.matrix(x)


def basis_eval(basis: LagrangeBasis, i: int, x: float) -> float:
    """Value of the i-th cardinal polynomial at ``x``."""
    if not 0 <= i <= basis.order:
        raise IndexError(f"basis index {i} outside 0..{basis.order}")
    return float(basis.matrix(np.array([x]))[0, i])


def basis_eval_product(nodes, i: int, x: float) -> float:
    """Reference product form ``prod_{k != i} (x - x_k) / (x_i - x_k)``."""
    nodes = np.asarray(nodes, dtype=float)
    out = 1.0
    for k, xk in enumerate(nodes):
        if k != i:
            out *= (x - xk) / (nodes[i] - xk)
    return out


@dataclass(frozen=True, eq=False)
class FuzzyGrid:
    """Fuzzy values on the tensor grid ``nodes_x x nodes_y``.

    ``lo`` and ``hi`` have shape ``(len(nodes_x), len(nodes_y), levels)``.
    """

    nodes_x: np.ndarray
    nodes_y: np.ndarray
    level_grid: LevelGrid
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)

    def __post_init__(self):
        arrays = {}
        for name in ("nodes_x", "nodes_y", "lo", "hi"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            arrays[name] = a
        shape = (arrays["nodes_x"].size, arrays["nodes_y"].size, len(self.level_grid))
        if arrays["lo"].shape != shape or arrays["hi"].shape != shape:
            raise GridMismatchError(
                f"grid values must have shape {shape}, got {arrays['lo'].shape}")
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @classmethod
    def from_function(cls, nodes_x, nodes_y, fn: Callable, level_grid: LevelGrid) -> "FuzzyGrid":
        """Sample ``fn(x, y, levels) -> (lo, hi)`` on the tensor grid."""
        nodes_x = np.asarray(nodes_x, dtype=float)
        nodes_y = np.asarray(nodes_y, dtype=float)
        lo, hi = fn(nodes_x[:, None], nodes_y[None, :], level_grid.array)
        shape = (nodes_x.size, nodes_y.size, len(level_grid))
        return cls(nodes_x, nodes_y, level_grid,
                   np.broadcast_to(lo, shape), np.broadcast_to(hi, shape))

    @classmethod
    def from_values(cls, nodes_x, nodes_y, values) -> "FuzzyGrid":
        """Build from a nested list ``values[i][j]`` of fuzzy numbers."""
        grid = values[0][0].level_grid
        lo = np.array([[v.lo for v in row] for row in values])
        hi = np.array([[v.hi for v in row] for row in values])
        for row in values:
            for v in row:
                if v.level_grid != grid:
                    raise GridMismatchError("grid values use different level grids")
        return cls(nodes_x, nodes_y, grid, lo, hi)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nodes_x.size, self.nodes_y.size

    def value(self, i: int, j: int) -> FuzzyNumber:
        return FuzzyNumber(self.level_grid, self.lo[i, j], self.hi[i, j])

    def values(self) -> list[list[FuzzyNumber]]:
        nx, ny = self.shape
        return [[self.value(i, j) for j in range(ny)] for i in range(nx)]

    def replace(self, lo, hi) -> "FuzzyGrid":
        return FuzzyGrid(self.nodes_x, self.nodes_y, self.level_grid, lo, hi)

    def same_points(self, other: "FuzzyGrid") -> bool:
        return (np.array_equal(self.nodes_x, other.nodes_x)
                and np.array_equal(self.nodes_y, other.nodes_y))

    def to_dict(self) -> dict:
        nx, ny = self.shape
        return {
            "levels": list(self.level_grid.levels),
            "nodes_x": self.nodes_x.tolist(),
            "nodes_y": self.nodes_y.tolist(),
            "values": [{"i": i, "j": j,
                        "x": float(self.nodes_x[i]), "y": float(self.nodes_y[j]),
                        "lo": self.lo[i, j].tolist(), "hi": self.hi[i, j].tolist()}
                       for i in range(nx) for j in range(ny)],
        }


def combine(bx: np.ndarray, by: np.ndarray, lo: np.ndarray, hi: np.ndarray,
            arithmetic: str = "fuzzy") -> tuple[np.ndarray, np.ndarray]:
    """Apply tensor coefficients ``bx[p, m] * by[q, n]`` to grid data.

    ``lo``/``hi`` have shape ``(m, n, levels)``; the result has shape
    ``(p, q, levels)``.
    """
    if arithmetic == "levelwise":
        return (np.einsum("pm,qn,mnl->pql", bx, by, lo, optimize=True),
                np.einsum("pm,qn,mnl->pql", bx, by, hi, optimize=True))
    if arithmetic != "fuzzy":
        raise ValueError(f"unknown arithmetic {arithmetic!r}; use one of {ARITHMETIC_MODES}")
    # sign of bx*by: (+,+) and (-,-) give positive coefficients, mixed give negative
    xp, xn = np.maximum(bx, 0.0), np.maximum(-bx, 0.0)
    yp, yn = np.maximum(by, 0.0), np.maximum(-by, 0.0)

    def apply(a, b, data):
        return np.einsum("pm,qn,mnl->pql", a, b, data, optimize=True)

    pos_lo = apply(xp, yp, lo) + apply(xn, yn, lo)
    pos_hi = apply(xp, yp, hi) + apply(xn, yn, hi)
    neg_lo = apply(xp, yn, lo) + apply(xn, yp, lo)
    neg_hi = apply(xp, yn, hi) + apply(xn, yp, hi)
    return pos_lo - neg_hi, pos_hi - neg_lo


def outside_hull(grid: FuzzyGrid, x: float, y: float) -> bool:
    return not (grid.nodes_x.min() <= x <= grid.nodes_x.max()
                and grid.nodes_y.min() <= y <= grid.nodes_y.max())


def interp_2d(grid: FuzzyGrid, x: float, y: float, arithmetic: str = "fuzzy") -> FuzzyNumber:
    """Evaluate the tensor Lagrange interpolant of ``grid`` at ``(x, y)``.

    At a tensor node the stored value is returned unchanged.
    """
    ix = np.nonzero(grid.nodes_x == x)[0]
    iy = np.nonzero(grid.nodes_y == y)[0]
    if ix.size and iy.size:
        return grid.value(int(ix[0]), int(iy[0]))
    if outside_hull(grid, x, y):
        log.debug("extrapolating grid data to (%g, %g)", x, y)
    bx = LagrangeBasis(grid.nodes_x).matrix(np.array([x]))
    by = LagrangeBasis(grid.nodes_y).matrix(np.array([y]))
    lo, hi = combine(bx, by, grid.lo, grid.hi, arithmetic)
    return FuzzyNumber(grid.level_grid, lo[0, 0], hi[0, 0])


def interp_2d_tensor(grid: FuzzyGrid, xs, ys, arithmetic: str = "fuzzy"):
    """Interpolant on the tensor grid ``xs x ys``; returns ``(lo, hi)`` arrays."""
    bx = LagrangeBasis(grid.nodes_x).matrix(np.asarray(xs, dtype=float).reshape(-1))
    by = LagrangeBasis(grid.nodes_y).matrix(np.asarray(ys, dtype=float).reshape(-1))
    return combine(bx, by, grid.lo, grid.hi, arithmetic)
