"""Chebyshev interpolation nodes and Gauss-Legendre quadrature rules."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import GridMismatchError, NumericFailureError
from .fuzzy import FuzzyNumber

NEWTON_MAX_ITERS = 100
NEWTON_STEP_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class ChebyshevNodes:
    order: int
    points: np.ndarray


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Gauss-Legendre rule with ``order + 1`` points on [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.order + 1

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def chebyshev_nodes(n: int) -> ChebyshevNodes:
    """First-kind Chebyshev points ``cos((2i+1) pi / (2n+2))``, i = 0..n.

    Points come out in decreasing order.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    i = np.arange(n + 1)
    pts = np.cos((2 * i + 1) * np.pi / (2 * n + 2))
    pts.setflags(write=False)
    return ChebyshevNodes(n, pts)


def legendre(n: int, x):
    """Values of P_n and P_n' at ``x`` via the three-term recurrence.

    The derivative uses ``(1 - x^2) P_n' = n (P_{n-1} - x P_n)`` and so is
    undefined at x = +-1; callers only evaluate it inside the interval.
    """
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    dp = n * (p_prev - x * p) / (1 - x * x)
    return p, dp


_rule_lock = threading.Lock()


def gauss_legendre(n: int) -> QuadRule:
    """Gauss-Legendre rule whose nodes are the n+1 roots of P_{n+1}.

    Roots are refined by Newton's method from the cosine guess; weights are
    ``2 / ((1 - s^2) P'_{n+1}(s)^2)``.  Rules are cached by order.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    with _rule_lock:
        return _gauss_legendre(n)


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> QuadRule:
    m = n + 1
    k = np.arange(m)
    x = np.cos(np.pi * (k + 0.75) / (m + 0.5))
    for _ in range(NEWTON_MAX_ITERS):
        p, dp = legendre(m, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= NEWTON_STEP_TOL:
            break
    else:
        raise NumericFailureError(
            f"Legendre root refinement for order {n} did not converge in "
            f"{NEWTON_MAX_ITERS} iterations (last step {np.max(np.abs(step)):.3e})")
    x = np.sort(x)
    # roots come in +- pairs; average the mirror images
    x = 0.5 * (x - x[::-1])
    _, dp = legendre(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadRule(n, x, w)


def fuzzy_quad_2d(rule: QuadRule, f: Callable[[float, float], FuzzyNumber]) -> FuzzyNumber:
    """Tensor Gauss-Legendre approximation of the fuzzy integral over [-1, 1]^2.

    ``f(s, t)`` must return fuzzy numbers on one level grid.  Weights are
    positive, so the sum of scaled valid values is again valid.
    """
    values = [f(float(s), float(t)) for s in rule.nodes for t in rule.nodes]
    grid = values[0].level_grid
    if any(v.level_grid != grid for v in values):
        raise GridMismatchError("integrand values use different level grids")
    w = np.outer(rule.weights, rule.weights).reshape(-1)
    lo = np.array([v.lo for v in values])
    hi = np.array([v.hi for v in values])
    return FuzzyNumber(grid, w @ lo, w @ hi)


def rule_table(n: int) -> str:
    """Plain-text dump of the order-n Chebyshev nodes and Gauss-Legendre rule."""
    cheb = chebyshev_nodes(n)
    rule = gauss_legendre(n)
    lines = [f"# order {n}",
             f"{'i':>4} {'chebyshev_x':>24} {'gl_node':>24} {'gl_weight':>24}"]
    for i in range(n + 1):
        lines.append(f"{i:>4} {cheb.points[i]:>24.17g} {rule.nodes[i]:>24.17g} "
                     f"{rule.weights[i]:>24.17g}")
    lines.append(f"# sum of weights {math.fsum(rule.weights):.17g}")
    return "\n".join(lines) + "\n"
