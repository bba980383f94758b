"""Fuzzy numbers in alpha-cut form.

A fuzzy number is stored as one closed interval ``[lo[i], hi[i]]`` per
membership level ``levels[i]`` of a shared :class:`LevelGrid`.  Addition and
multiplication by a crisp scalar act level by level, so they are exact on the
discretised representation.

Besides the scalar :class:`FuzzyNumber` API, the solvers work on stacked
endpoint arrays whose *last* axis indexes the level; :func:`cut_violations`
and :func:`enforce_valid` operate on that layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FuzzyValidityError, GridMismatchError

DEFAULT_LEVEL_COUNT = 11


@dataclass(frozen=True)
class LevelGrid:
    """Ordered membership levels ``0 = r_0 < r_1 < ... < r_M = 1``."""

    levels: tuple[float, ...]

    def __post_init__(self):
        levels = tuple(float(r) for r in self.levels)
        if len(levels) < 2:
            raise ValueError("a level grid needs at least the levels 0 and 1")
        if levels[0] != 0.0 or levels[-1] != 1.0:
            raise ValueError("level grid must start at 0 and end at 1")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly increasing")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def uniform(cls, count: int = DEFAULT_LEVEL_COUNT) -> "LevelGrid":
        if count < 2:
            raise ValueError("need at least 2 levels")
        levels = [i / (count - 1) for i in range(count)]
        return cls(tuple(levels))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)

    def __len__(self):
        return len(self.levels)


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FuzzyNumber:
    """A fuzzy real given by its alpha-cuts on ``level_grid``.

    Construction does not enforce the cut invariants; call :func:`validate`
    (or :meth:`is_valid`) to check them.
    """

    level_grid: LevelGrid
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)

    def __post_init__(self):
        lo = _readonly(self.lo)
        hi = _readonly(self.hi)
        n = len(self.level_grid)
        if lo.shape != (n,) or hi.shape != (n,):
            raise GridMismatchError(
                f"expected {n} cuts, got lo{lo.shape} and hi{hi.shape}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __repr__(self):
        return (f"FuzzyNumber(support=[{self.lo[0]:.6g}, {self.hi[0]:.6g}], "
                f"core=[{self.lo[-1]:.6g}, {self.hi[-1]:.6g}], "
                f"levels={len(self.level_grid)})")

    @property
    def levels(self) -> np.ndarray:
        return self.level_grid.array

    def cut(self, i: int) -> tuple[float, float]:
        return float(self.lo[i]), float(self.hi[i])

    def is_valid(self) -> bool:
        return validate(self).ok

    def __add__(self, other):
        if isinstance(other, FuzzyNumber):
            return fuzzy_add(self, other)
        return NotImplemented

    def __rmul__(self, c):
        if isinstance(c, (int, float, np.floating, np.integer)):
            return fuzzy_scale(float(c), self)
        return NotImplemented

    def to_dict(self) -> dict:
        return {"levels": list(self.level_grid.levels),
                "lo": [float(v) for v in self.lo],
                "hi": [float(v) for v in self.hi]}

    @classmethod
    def from_dict(cls, record: dict) -> "FuzzyNumber":
        return cls(LevelGrid(tuple(record["levels"])), record["lo"], record["hi"])


def crisp(value: float, level_grid: LevelGrid | None = None) -> FuzzyNumber:
    """Embed a real number as a fuzzy number with degenerate cuts."""
    grid = level_grid or LevelGrid.uniform()
    v = np.full(len(grid), float(value))
    return FuzzyNumber(grid, v, v)


def triangular(a: float, b: float, c: float,
               level_grid: LevelGrid | None = None) -> FuzzyNumber:
    """Triangular fuzzy number with support ``[a, c]`` and peak ``b``.

    The cut at level r is ``[a + r(b - a), c - r(c - b)]``.
    """
    if not a <= b <= c:
        raise ValueError(f"triangular number needs a <= b <= c, got {(a, b, c)}")
    grid = level_grid or LevelGrid.uniform()
    return FuzzyNumber(grid, *triangular_cuts(a, b, c, grid.array))


def triangular_cuts(a: float, b: float, c: float, levels) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint arrays of ``triangular(a, b, c)`` at the given levels."""
    r = np.asarray(levels, dtype=float)
    # clamp so rounding in a + r(b - a) never pushes a cut past the peak
    return np.minimum(a + r * (b - a), b), np.maximum(c - r * (c - b), b)


def _check_same_grid(u: FuzzyNumber, v: FuzzyNumber):
    if u.level_grid != v.level_grid:
        raise GridMismatchError("fuzzy operands use different level grids")


def fuzzy_add(u: FuzzyNumber, v: FuzzyNumber) -> FuzzyNumber:
    _check_same_grid(u, v)
    return FuzzyNumber(u.level_grid, u.lo + v.lo, u.hi + v.hi)


def fuzzy_scale(c: float, u: FuzzyNumber) -> FuzzyNumber:
    """Multiply by a crisp scalar; a negative factor swaps the endpoints."""
    c = float(c)
    if c >= 0:
        return FuzzyNumber(u.level_grid, c * u.lo, c * u.hi)
    return FuzzyNumber(u.level_grid, c * u.hi, c * u.lo)


def hausdorff_distance(u: FuzzyNumber, v: FuzzyNumber) -> float:
    """Sup over levels of the endpoint-wise distance between the cuts."""
    _check_same_grid(u, v)
    return float(max(np.max(np.abs(u.lo - v.lo)), np.max(np.abs(u.hi - v.hi))))


def fuzzy_equal(u: FuzzyNumber, v: FuzzyNumber) -> bool:
    return hausdorff_distance(u, v) == 0.0


@dataclass
class Violation:
    kind: str  # "crossed" | "nesting-lo" | "nesting-hi" | "non-finite"
    level_index: int
    level: float
    detail: str

    def __str__(self):
        return f"{self.kind} at r={self.level:g} (index {self.level_index}): {self.detail}"


@dataclass
class ValidityReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


def validate(u: FuzzyNumber) -> ValidityReport:
    """Report every broken cut invariant of ``u``; an empty report means valid."""
    levels = u.level_grid.levels
    out = []
    for i, r in enumerate(levels):
        lo, hi = u.lo[i], u.hi[i]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            out.append(Violation("non-finite", i, r, f"cut [{lo}, {hi}]"))
            continue
        if lo > hi:
            out.append(Violation("crossed", i, r, f"lo={lo!r} > hi={hi!r}"))
        if i > 0:
            if lo < u.lo[i - 1]:
                out.append(Violation("nesting-lo", i, r,
                                     f"lo decreases from {u.lo[i - 1]!r} to {lo!r}"))
            if hi > u.hi[i - 1]:
                out.append(Violation("nesting-hi", i, r,
                                     f"hi increases from {u.hi[i - 1]!r} to {hi!r}"))
    return ValidityReport(out)


# -- stacked endpoint arrays (last axis = level) ------------------------------

def cut_violations(lo: np.ndarray, hi: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Size of the worst invariant breach at every point of a stacked array.

    Returns an array shaped like ``lo[..., 0]``; entries are 0 where the
    cuts are valid (up to ``tol``), ``inf`` where values are non-finite.
    """
    crossed = np.max(lo - hi, axis=-1)
    nest_lo = np.max(lo[..., :-1] - lo[..., 1:], axis=-1, initial=0.0)
    nest_hi = np.max(hi[..., 1:] - hi[..., :-1], axis=-1, initial=0.0)
    worst = np.maximum(np.maximum(crossed, nest_lo), np.maximum(nest_hi, 0.0))
    finite = np.all(np.isfinite(lo), axis=-1) & np.all(np.isfinite(hi), axis=-1)
    worst = np.where(finite, worst, np.inf)
    return np.where(worst > tol, worst, 0.0)


def enforce_valid(lo: np.ndarray, hi: np.ndarray, tol: float, levels=None,
                  what: str = "value") -> tuple[np.ndarray, np.ndarray]:
    """Snap rounding-level invariant breaches, raise on anything larger.

    Breaches up to ``tol`` (scaled by ``1 + |value|``) are removed by
    restoring nesting with running max/min and collapsing crossed cuts to
    their midpoint; the result then satisfies the invariants exactly.
    """
    scale = 1.0 + max(float(np.max(np.abs(lo), initial=0.0)),
                      float(np.max(np.abs(hi), initial=0.0)))
    bad = cut_violations(lo, hi, tol * scale)
    if np.any(bad > 0):
        idx = np.unravel_index(int(np.argmax(bad)), bad.shape)
        lev = _worst_level(lo[idx], hi[idx])
        r = None if levels is None else float(np.asarray(levels)[lev])
        raise FuzzyValidityError(
            f"invalid fuzzy {what} at point {tuple(int(i) for i in idx)}, "
            f"level index {lev}" + ("" if r is None else f" (r={r:g})")
            + f": breach {float(bad[idx]):.3e}", level=r)
    lo = np.maximum.accumulate(lo, axis=-1)
    hi = np.minimum.accumulate(hi, axis=-1)
    crossed = lo > hi
    if np.any(crossed):
        shape = lo.shape
        lo = lo.reshape(-1, shape[-1]).copy()
        hi = hi.reshape(-1, shape[-1]).copy()
        crossed = crossed.reshape(lo.shape)
        # with nesting restored, crossed levels form a suffix of the level axis
        for p in np.nonzero(crossed.any(axis=1))[0]:
            first = int(np.argmax(crossed[p]))
            core = 0.5 * (lo[p, first:] + hi[p, first:]).mean()
            if first > 0:
                core = min(max(core, lo[p, first - 1]), hi[p, first - 1])
            lo[p, first:] = core
            hi[p, first:] = core
        lo, hi = lo.reshape(shape), hi.reshape(shape)
    return lo, hi


def _worst_level(lo: np.ndarray, hi: np.ndarray) -> int:
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return int(np.argmax(~np.isfinite(lo) | ~np.isfinite(hi)))
    score = lo - hi
    score[1:] = np.maximum(score[1:], np.maximum(lo[:-1] - lo[1:], hi[1:] - hi[:-1]))
    return int(np.argmax(score))


def stack(values: Sequence[FuzzyNumber]) -> tuple[np.ndarray, np.ndarray]:
    """Stack fuzzy numbers into ``(lo, hi)`` arrays of shape ``(n, levels)``."""
    if not values:
        raise ValueError("nothing to stack")
    grid = values[0].level_grid
    for v in values[1:]:
        if v.level_grid != grid:
            raise GridMismatchError("fuzzy values use different level grids")
    return np.stack([v.lo for v in values]), np.stack([v.hi for v in values])
