"""Discrete collocation solver.

Collocation points are first-kind Chebyshev nodes, the unknown is the
tensor Lagrange interpolant through them, and each segment integral is
evaluated by a mapped Gauss-Legendre rule.  The linear problem becomes the
dense system ``u_ij = f_ij (+) sum_mn a_{ij,mn} (.) u_mn``; the nonlinear one
is solved by fixed-point sweeps of the same discrete operator.

How a sign-indefinite coefficient acts on a fuzzy unknown is selected by
``CollocationConfig.arithmetic``:

``"levelwise"`` (default)
    The endpoint functions are discretised separately, giving one real
    system ``(I - A) x = f`` per endpoint and level.
``"fuzzy"``
    Endpoint-swapping scalar multiplication; with ``A = A+ - A-`` each level
    couples both endpoints in a system of size ``2 (N+1)^2``.
"""

from __future__ import annotations

import dataclasses
import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (AssemblyError, FVIEError, GridMismatchError, NonConvergenceError,
                     SingularSystemError)
from .fuzzy import FuzzyNumber, LevelGrid, enforce_valid
from .interpolation import ARITHMETIC_MODES, FuzzyGrid, interp_2d, interp_2d_tensor
from .problems import IntegralOperator, ProblemSpec, normalize_mode
from .quadrature import chebyshev_nodes

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CollocationConfig:
    N: int
    quad_N: Optional[int] = None
    segment_mode: str = "default"
    max_fixed_point_iters: int = 200
    fixed_point_tol: float = 1e-10
    linear_solve_pivot_tol: float = 1e-12
    arithmetic: str = "levelwise"
    validity_tol: float = 1e-9

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if self.quad_N is not None and self.quad_N < 0:
            raise ValueError(f"quad_N must be >= 0, got {self.quad_N}")
        if self.max_fixed_point_iters < 1:
            raise ValueError("max_fixed_point_iters must be >= 1")
        for name in ("fixed_point_tol", "linear_solve_pivot_tol", "validity_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.arithmetic not in ARITHMETIC_MODES:
            raise ValueError(f"arithmetic must be one of {ARITHMETIC_MODES}")
        object.__setattr__(self, "segment_mode", normalize_mode(self.segment_mode))

    @property
    def quadrature_order(self) -> int:
        return self.N if self.quad_N is None else self.quad_N

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["quad_N"] = self.quadrature_order
        return d


@dataclass
class AssembledSystem:
    """Coefficient matrix ``a[(i,j), (m,n)]`` and forcing at the collocation nodes."""

    coefficients: np.ndarray
    forcing_grid: FuzzyGrid
    config: CollocationConfig
    problem: str = ""

    @property
    def nodes(self) -> np.ndarray:
        return self.forcing_grid.nodes_x


@dataclass
class Solution:
    grid: FuzzyGrid
    config: CollocationConfig
    diagnostics: dict = field(default_factory=dict)
    problem: str = ""

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes_x


def _operator(spec: ProblemSpec, cfg: CollocationConfig) -> IntegralOperator:
    nodes = chebyshev_nodes(cfg.N).points
    return IntegralOperator(spec, nodes, nodes, cfg.quadrature_order, cfg.segment_mode,
                            source_nodes=(nodes, nodes), arithmetic=cfg.arithmetic)


def assemble_linear(spec: ProblemSpec, cfg: CollocationConfig) -> AssembledSystem:
    if spec.form != "linear":
        raise ValueError(f"problem {spec.name!r} is {spec.form}; use solve_nonlinear")
    op = _operator(spec, cfg)
    n = cfg.N + 1
    a = np.zeros((n, n, n, n))
    for sq, (bx, by) in zip(op.segments, op.bases):
        nq = sq.xi.shape[1]
        a += np.einsum("ikjl,ikm,jln->ijmn", sq.weights,
                       bx.reshape(n, nq, n), by.reshape(n, nq, n), optimize=True)
    if not np.all(np.isfinite(a)):
        idx = tuple(int(v) for v in np.argwhere(~np.isfinite(a))[0])
        raise AssemblyError(f"non-finite coefficient at (i, j, m, n) = {idx}", index=idx)
    nodes = op.xs
    forcing = FuzzyGrid(nodes, nodes, spec.level_grid, *op.forcing)
    return AssembledSystem(a.reshape(n * n, n * n), forcing, cfg, spec.name)


def _factor(matrix: np.ndarray, pivot_tol: float):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix)
    smallest = float(np.min(np.abs(np.diag(lu))))
    if not smallest >= pivot_tol:
        raise SingularSystemError(
            f"collocation matrix is singular to working tolerance "
            f"(smallest pivot {smallest:.3e} < {pivot_tol:.1e})")
    return lu, piv


def solve_linear(system: AssembledSystem, level_grid: LevelGrid | None = None) -> Solution:
    """Solve the collocation system at every level by LU with partial pivoting."""
    cfg = system.config
    f = system.forcing_grid
    if level_grid is not None and level_grid != f.level_grid:
        raise GridMismatchError("level grid differs from the assembled forcing")
    n2 = system.coefficients.shape[0]
    nl = len(f.level_grid)
    a = system.coefficients
    f_lo = f.lo.reshape(n2, nl)
    f_hi = f.hi.reshape(n2, nl)
    eye = np.eye(n2)
    if cfg.arithmetic == "levelwise":
        lu = _factor(eye - a, cfg.linear_solve_pivot_tol)
        x = scipy.linalg.lu_solve(lu, np.hstack([f_lo, f_hi]))
        lo, hi = x[:, :nl], x[:, nl:]
        r_lo = lo - f_lo - a @ lo
        r_hi = hi - f_hi - a @ hi
    else:
        ap, an = np.maximum(a, 0.0), np.maximum(-a, 0.0)
        big = np.block([[eye - ap, an], [an, eye - ap]])
        lu = _factor(big, cfg.linear_solve_pivot_tol)
        x = scipy.linalg.lu_solve(lu, np.vstack([f_lo, f_hi]))
        lo, hi = x[:n2], x[n2:]
        r_lo = lo - f_lo - (ap @ lo - an @ hi)
        r_hi = hi - f_hi - (ap @ hi - an @ lo)
    n = f.nodes_x.size
    lo = lo.reshape(n, n, nl)
    hi = hi.reshape(n, n, nl)
    lo, hi = enforce_valid(lo, hi, cfg.validity_tol, f.level_grid.levels, "solution value")
    diagnostics = {
        "method": "direct",
        "iterations": 0,
        "residual_lo": np.max(np.abs(r_lo), axis=0).tolist(),
        "residual_hi": np.max(np.abs(r_hi), axis=0).tolist(),
    }
    return Solution(f.replace(lo, hi), cfg, diagnostics, system.problem)


def solve_nonlinear(spec: ProblemSpec, cfg: CollocationConfig) -> Solution:
    """Fixed-point sweeps ``u <- f (+) sum_p Q_p[k_p (.) H(I_N u)]`` from ``u = f``."""
    op = _operator(spec, cfg)
    nodes = op.xs
    levels = spec.level_grid.levels
    u = FuzzyGrid(nodes, nodes, spec.level_grid, *op.forcing)
    history = []
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, cfg.max_fixed_point_iters + 1):
            lo, hi = op(u)
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise NonConvergenceError(
                    f"fixed-point iteration blew up after {it} sweeps", _ratio(history), it)
            step = float(max(np.max(np.abs(lo - u.lo)), np.max(np.abs(hi - u.hi))))
            history.append(step)
            lo, hi = enforce_valid(lo, hi, cfg.validity_tol, levels, "iterate")
            u = u.replace(lo, hi)
            log.debug("sweep %d: step %.3e", it, step)
            if step < cfg.fixed_point_tol:
                break
        else:
            ratio = _ratio(history)
            raise NonConvergenceError(
                f"no convergence in {cfg.max_fixed_point_iters} sweeps "
                f"(last step {history[-1]:.3e}, contraction ratio {ratio:.3g})",
                ratio, cfg.max_fixed_point_iters)
    r_lo, r_hi = op(u)
    diagnostics = {
        "method": "fixed-point",
        "iterations": len(history),
        "step_history": history,
        "contraction_ratios": [b / a if a > 0 else 0.0 for a, b in zip(history, history[1:])],
        "residual_lo": np.max(np.abs(r_lo - u.lo), axis=(0, 1)).tolist(),
        "residual_hi": np.max(np.abs(r_hi - u.hi), axis=(0, 1)).tolist(),
    }
    return Solution(u, cfg, diagnostics, spec.name)


def _ratio(history: Sequence[float]) -> float:
    if len(history) < 2 or history[-2] == 0:
        return float("nan")
    return history[-1] / history[-2]


def solve(spec: ProblemSpec, cfg: CollocationConfig) -> Solution:
    if spec.form == "linear":
        return solve_linear(assemble_linear(spec, cfg), spec.level_grid)
    return solve_nonlinear(spec, cfg)


def reconstruct(solution: Solution, x: float, y: float) -> FuzzyNumber:
    """Value of the interpolant ``U_N`` through the solution grid at ``(x, y)``."""
    cfg = solution.config
    u = interp_2d(solution.grid, x, y, cfg.arithmetic)
    lo, hi = enforce_valid(u.lo, u.hi, cfg.validity_tol, u.level_grid.levels,
                           "reconstructed value")
    return FuzzyNumber(u.level_grid, lo, hi)


def reconstruct_tensor(solution: Solution, xs, ys) -> FuzzyGrid:
    """Interpolant evaluated on the tensor grid ``xs x ys``."""
    cfg = solution.config
    lo, hi = interp_2d_tensor(solution.grid, xs, ys, cfg.arithmetic)
    lo, hi = enforce_valid(lo, hi, cfg.validity_tol, solution.grid.level_grid.levels,
                           "reconstructed value")
    return FuzzyGrid(xs, ys, solution.grid.level_grid, lo, hi)


def discrete_residual(spec: ProblemSpec, solution: Solution) -> np.ndarray:
    """Per-level max endpoint residual of the discrete equations at the solution.

    Returns an array of shape ``(2, levels)`` (lower, upper endpoint).
    """
    cfg = solution.config
    if spec.form == "linear":
        system = assemble_linear(spec, cfg)
        a = system.coefficients
        n2, nl = a.shape[0], len(spec.level_grid)
        lo = solution.grid.lo.reshape(n2, nl)
        hi = solution.grid.hi.reshape(n2, nl)
        f_lo = system.forcing_grid.lo.reshape(n2, nl)
        f_hi = system.forcing_grid.hi.reshape(n2, nl)
        if cfg.arithmetic == "levelwise":
            r_lo, r_hi = lo - f_lo - a @ lo, hi - f_hi - a @ hi
        else:
            ap, an = np.maximum(a, 0.0), np.maximum(-a, 0.0)
            r_lo = lo - f_lo - (ap @ lo - an @ hi)
            r_hi = hi - f_hi - (ap @ hi - an @ lo)
        return np.stack([np.max(np.abs(r_lo), axis=0), np.max(np.abs(r_hi), axis=0)])
    lo, hi = _operator(spec, cfg)(solution.grid)
    return np.stack([np.max(np.abs(lo - solution.grid.lo), axis=(0, 1)),
                     np.max(np.abs(hi - solution.grid.hi), axis=(0, 1))])


def node_error(spec: ProblemSpec, solution: Solution) -> float:
    """Max Hausdorff distance to the exact solution over the collocation nodes."""
    if spec.exact_solution is None:
        raise ValueError(f"problem {spec.name!r} has no exact solution")
    g = solution.grid
    e_lo, e_hi = spec.exact_solution(g.nodes_x[:, None], g.nodes_y[None, :],
                                     spec.level_grid.array)
    return float(max(np.max(np.abs(g.lo - e_lo)), np.max(np.abs(g.hi - e_hi))))


@dataclass
class ConvergenceRow:
    N: int
    error: float
    iterations: int
    runtime_ms: float
    status: str = "ok"


def convergence_study(spec: ProblemSpec, orders: Sequence[int],
                      base: CollocationConfig | None = None,
                      threads: int = 1) -> list[ConvergenceRow]:
    """Node error per order, against the exact solution or the highest order run.

    A row whose solve fails is kept with ``error = nan`` and the error message
    in ``status``.
    """
    orders = list(orders)
    if len(set(orders)) < 2:
        raise ValueError("a convergence study needs at least two distinct orders")
    base = base or CollocationConfig(N=orders[0])

    def run(order):
        cfg = dataclasses.replace(base, N=order, quad_N=base.quad_N)
        t0 = time.perf_counter()
        try:
            sol = solve(spec, cfg)
        except FVIEError as exc:
            return order, None, f"failed: {type(exc).__name__}: {exc}", \
                1000.0 * (time.perf_counter() - t0)
        return order, sol, "ok", 1000.0 * (time.perf_counter() - t0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, orders))
    else:
        results = [run(o) for o in orders]

    reference = None
    if spec.exact_solution is None:
        done = [(o, s) for o, s, _, _ in results if s is not None]
        if done:
            reference = max(done, key=lambda item: item[0])[1]

    rows = []
    for order, sol, status, ms in results:
        if sol is None:
            rows.append(ConvergenceRow(order, float("nan"), 0, ms, status))
            continue
        if spec.exact_solution is not None:
            err = node_error(spec, sol)
        elif reference is None:
            err = float("nan")
        else:
            ref = reconstruct_tensor(reference, sol.nodes, sol.nodes)
            err = float(max(np.max(np.abs(ref.lo - sol.grid.lo)),
                            np.max(np.abs(ref.hi - sol.grid.hi))))
        rows.append(ConvergenceRow(order, err, int(sol.diagnostics.get("iterations", 0)),
                                   ms, status))
    return rows
