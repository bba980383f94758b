"""Picard iteration on the original equation, plus the contraction diagnostics.

The iteration ``z_0 = g``, ``z_n = g (+) sum_p int int k_p (.) phi(z_{n-1})``
runs in the problem's own variables on ``[a1, a2]^2`` using its untransformed
kernels and breakpoints.  Iterates are stored on a fine Chebyshev grid and
interpolated level by level between sweeps.  Nothing here goes through the
collocation assembly, so the limit is an independent check on it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .errors import DomainError, GridMismatchError, NonConvergenceError
from .fuzzy import enforce_valid
from .interpolation import FuzzyGrid, LagrangeBasis, combine, interp_2d_tensor
from .problems import ProblemSpec, estimate_kernel_sup
from .quadrature import chebyshev_nodes, gauss_legendre


@dataclass(frozen=True)
class PicardConfig:
    quad_N: int = 24
    grid_N: int = 16
    max_iters: int = 100
    tol: float = 1e-10
    min_iters: int = 0
    validity_tol: float = 1e-9

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.grid_N < 0 or self.quad_N < 0:
            raise ValueError("grid_N and quad_N must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class PicardTrace:
    iterates: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    bound_values: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "D_measured", "bound_value", "margin"])
        for n, d in enumerate(self.distances):
            if n < len(self.bound_values):
                b = self.bound_values[n]
                w.writerow([n, f"{d:.17g}", f"{b:.17g}", f"{b - d:.17g}"])
            else:
                w.writerow([n, f"{d:.17g}", "", ""])
        return buf.getvalue()


@dataclass
class PicardResult:
    grid: FuzzyGrid
    trace: PicardTrace
    domain: tuple
    problem: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trace.distances)


class _PicardMap:
    """One Picard sweep on the Chebyshev grid of the original domain."""

    def __init__(self, spec: ProblemSpec, cfg: PicardConfig):
        orig = spec.view_as_original()
        self.orig = orig
        a1, a2 = orig.interval
        self.domain = (a1, a2)
        self.points = a1 + 0.5 * (a2 - a1) * (1.0 + chebyshev_nodes(cfg.grid_N).points)
        self.level_grid = orig.level_grid
        levels = self.level_grid.array
        pts = self.points
        n = pts.size
        shape = (n, n, levels.size)
        g_lo, g_hi = orig.forcing(pts[:, None], pts[None, :], levels)
        self.g = (np.array(np.broadcast_to(g_lo, shape)), np.array(np.broadcast_to(g_hi, shape)))
        rule = gauss_legendre(cfg.quad_N)
        basis = LagrangeBasis(pts)
        a_curves = orig.full_curves("x")
        b_curves = orig.full_curves("y")
        self.parts = []
        for p, kernel in enumerate(orig.kernels, start=1):
            s_lo = np.broadcast_to(np.asarray(a_curves[p - 1](pts), dtype=float), pts.shape)
            s_hi = np.broadcast_to(np.asarray(a_curves[p](pts), dtype=float), pts.shape)
            t_lo = np.broadcast_to(np.asarray(b_curves[p - 1](pts), dtype=float), pts.shape)
            t_hi = np.broadcast_to(np.asarray(b_curves[p](pts), dtype=float), pts.shape)
            hs = 0.5 * (s_hi - s_lo)
            ht = 0.5 * (t_hi - t_lo)
            if np.any(hs < 0) or np.any(ht < 0):
                from .errors import BreakpointOrderError
                raise BreakpointOrderError(f"segment {p} is inverted on the Picard grid")
            sigma = s_lo[:, None] + hs[:, None] * (1.0 + rule.nodes)
            tau = t_lo[:, None] + ht[:, None] * (1.0 + rule.nodes)
            k = np.broadcast_to(np.asarray(
                kernel(pts[:, None, None, None], pts[None, None, :, None],
                       sigma[:, :, None, None], tau[None, None, :, :]), dtype=float),
                (n, rule.nodes.size, n, rule.nodes.size))
            w = ((hs[:, None] * rule.weights)[:, :, None, None]
                 * (ht[:, None] * rule.weights)[None, None, :, :])
            self.parts.append((basis.matrix(sigma.reshape(-1)),
                               basis.matrix(tau.reshape(-1)), k * w))
        self.phi = orig.nonlinearity.cut_map

    def grid(self, lo, hi) -> FuzzyGrid:
        return FuzzyGrid(self.points, self.points, self.level_grid, lo, hi)

    def __call__(self, z: FuzzyGrid):
        out_lo, out_hi = self.g[0].copy(), self.g[1].copy()
        n, nl = self.points.size, len(self.level_grid)
        for bs, bt, w in self.parts:
            nq = w.shape[1]
            v_lo, v_hi = combine(bs, bt, z.lo, z.hi, "levelwise")
            h_lo, h_hi = self.phi(v_lo.reshape(n, nq, n, nq, nl), v_hi.reshape(n, nq, n, nq, nl))
            wp, wn = np.maximum(w, 0.0), np.maximum(-w, 0.0)
            out_lo += (np.einsum("ikjl,ikjlr->ijr", wp, h_lo, optimize=True)
                       - np.einsum("ikjl,ikjlr->ijr", wn, h_hi, optimize=True))
            out_hi += (np.einsum("ikjl,ikjlr->ijr", wp, h_hi, optimize=True)
                       - np.einsum("ikjl,ikjlr->ijr", wn, h_lo, optimize=True))
        return out_lo, out_hi


def sup_distance(u: FuzzyGrid, v: FuzzyGrid) -> float:
    """Max over sample points of the Hausdorff distance between two grids."""
    if not u.same_points(v):
        raise GridMismatchError("grids are sampled at different points")
    if u.level_grid != v.level_grid:
        raise GridMismatchError("grids use different level grids")
    return float(max(np.max(np.abs(u.lo - v.lo)), np.max(np.abs(u.hi - v.hi))))


def picard_solve(spec: ProblemSpec, cfg: PicardConfig | None = None,
                 z0=None) -> PicardResult:
    """Iterate the Picard map until successive iterates are ``tol`` apart.

    ``z0`` may be ``None`` (start from the forcing), ``"zero"``, a
    fuzzy-valued field in the problem's own variables, or a grid on the
    Picard sample points.
    """
    cfg = cfg or PicardConfig()
    step = _PicardMap(spec, cfg)
    pts = step.points
    levels = step.level_grid.array
    shape = (pts.size, pts.size, levels.size)
    if z0 is None:
        z = step.grid(*step.g)
    elif isinstance(z0, str) and z0 == "zero":
        z = step.grid(np.zeros(shape), np.zeros(shape))
    elif isinstance(z0, FuzzyGrid):
        z = z0
    else:
        lo, hi = z0(pts[:, None], pts[None, :], levels)
        z = step.grid(np.broadcast_to(lo, shape), np.broadcast_to(hi, shape))
    trace = PicardTrace(iterates=[z])
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, cfg.max_iters + 1):
            lo, hi = step(z)
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise NonConvergenceError(f"Picard iterates blew up at n={n}",
                                          _last_ratio(trace.distances), n)
            lo, hi = enforce_valid(lo, hi, cfg.validity_tol, step.level_grid.levels,
                                   "Picard iterate")
            z_new = step.grid(lo, hi)
            trace.distances.append(sup_distance(z, z_new))
            trace.iterates.append(z_new)
            z = z_new
            if trace.distances[-1] < cfg.tol and n >= cfg.min_iters:
                break
        else:
            ratio = _last_ratio(trace.distances)
            raise NonConvergenceError(
                f"Picard iteration did not reach tol {cfg.tol:.1e} in {cfg.max_iters} "
                f"steps (last distance {trace.distances[-1]:.3e}, ratio {ratio:.3g})",
                ratio, cfg.max_iters)
    return PicardResult(z, trace, step.domain, spec.name)


def _last_ratio(d: Sequence[float]) -> float:
    if len(d) < 2 or d[-2] == 0:
        return float("nan")
    return d[-1] / d[-2]


def limit_on_nodes(result: PicardResult, nodes) -> FuzzyGrid:
    """Picard limit at transformed abscissae ``nodes`` (tensor grid)."""
    a1, a2 = result.domain
    s = a1 + 0.5 * (a2 - a1) * (1.0 + np.asarray(nodes, dtype=float))
    lo, hi = interp_2d_tensor(result.grid, s, s, "levelwise")
    return FuzzyGrid(nodes, nodes, result.grid.level_grid, lo, hi)


def oracle_agreement(result: PicardResult, solution) -> float:
    """Sup distance between the Picard limit and a collocation solution grid."""
    return sup_distance(limit_on_nodes(result, solution.grid.nodes_x), solution.grid)


def uniqueness_gap(spec: ProblemSpec, cfg: PicardConfig | None = None) -> tuple[float, PicardResult, PicardResult]:
    """Run Picard from the forcing and from zero; return the gap between limits."""
    first = picard_solve(spec, cfg)
    second = picard_solve(spec, cfg, z0="zero")
    return sup_distance(first.grid, second.grid), first, second


# -- a-priori bounds ------------------------------------------------------------

def _check_nonneg(**values):
    for name, v in values.items():
        if isinstance(v, (list, tuple, np.ndarray)):
            if any(x < 0 for x in v):
                raise DomainError(f"{name} must be nonnegative")
        elif v < 0:
            raise DomainError(f"{name} must be nonnegative, got {v}")


def apriori_bound(M_list: Sequence[float], L: float, s: float, t: float, k: int,
                  D01: float) -> float:
    """``(sum_p M_p L s t)^k / (k!)^2 * D01``."""
    _check_nonneg(M_list=list(M_list), L=L, s=s, t=t, k=k, D01=D01)
    if k == 0:
        return float(D01)
    c = math.fsum(M_list) * L * s * t
    if D01 == 0 or c == 0:
        return 0.0
    if k <= 20:
        return c ** k / math.factorial(k) ** 2 * D01
    return math.exp(k * math.log(c) - 2.0 * math.lgamma(k + 1) + math.log(D01))


def tail_bound(M_list: Sequence[float], L: float, s: float, t: float, n: int, q: int,
               D01: float) -> float:
    """Bound on ``D(z_n, z_{n+q})``: the sum of a-priori bounds for k = n..n+q-1."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    return math.fsum(apriori_bound(M_list, L, s, t, k, D01) for k in range(n, n + q))


@dataclass
class ContractionRow:
    k: int
    measured: float
    bound: float
    margin: float


@dataclass
class ContractionReport:
    rows: list
    M_list: list
    lipschitz: float
    extent: tuple
    slack: float
    re_estimated: bool = False

    @property
    def ok(self) -> bool:
        return all(r.margin >= 0 for r in self.rows)

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r.margin < 0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "D_measured", "bound_value", "margin"])
        for r in self.rows:
            w.writerow([r.k, f"{r.measured:.17g}", f"{r.bound:.17g}", f"{r.margin:.17g}"])
        return buf.getvalue()


def verify_contraction(trace: PicardTrace, M_list: Sequence[float], L: float,
                       extent: tuple = (2.0, 2.0), slack: float = 1e-12,
                       max_k: int = 10, spec: ProblemSpec | None = None,
                       samples_per_axis: int = 9) -> ContractionReport:
    """Compare measured ``D*(z_k, z_{k+1})`` with the a-priori bound.

    ``M_list`` are kernel maxima of the transformed problem, so the bound is
    taken at the transformed corner where both extents equal 2.  A reported
    margin is ``bound + slack - measured``.  If ``spec`` is given and the
    check fails, the kernel maxima are re-estimated with four times as many
    samples before the failure is reported.
    """
    if len(trace.iterates) < 2:
        raise ValueError("trace needs at least two iterates")

    def rows_for(m):
        d01 = trace.distances[0]
        out = []
        for k, d in enumerate(trace.distances[: max_k + 1]):
            b = apriori_bound(m, L, extent[0], extent[1], k, d01)
            out.append(ContractionRow(k, d, b, b + slack - d))
        return out

    m = list(M_list)
    rows = rows_for(m)
    report = ContractionReport(rows, m, L, tuple(extent), slack)
    if not report.ok and spec is not None:
        m = estimate_kernel_sup(spec, 4 * samples_per_axis)
        report = ContractionReport(rows_for(m), m, L, tuple(extent), slack, re_estimated=True)
    trace.bound_values = [r.bound for r in report.rows]
    return report


def estimate_lipschitz(spec: ProblemSpec, trace: PicardTrace) -> float:
    """Lipschitz constant to use for the bound checks.

    For the squaring nonlinearity this is ``2 max |z|`` over all iterates,
    never less than the registered constant.
    """
    registered = spec.nonlinearity.lipschitz
    if spec.nonlinearity.kind == "square":
        sup = max(float(max(np.max(np.abs(z.lo)), np.max(np.abs(z.hi))))
                  for z in trace.iterates)
        return max(2.0 * sup, registered or 0.0)
    if registered is None:
        raise ValueError(f"problem {spec.name!r} has no Lipschitz constant")
    return registered


# -- two-dimensional Gronwall witness -----------------------------------------

@dataclass
class GronwallReport:
    hypothesis: np.ndarray
    conclusion: np.ndarray
    violations: list
    tol_hypothesis: float
    tol_conclusion: float

    @property
    def hypothesis_points(self) -> int:
        return int(self.hypothesis.sum())

    @property
    def vacuous(self) -> bool:
        return self.hypothesis_points == 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.vacuous:
            return "hypothesis holds nowhere on the sample grid; conclusion not tested"
        return (f"hypothesis holds at {self.hypothesis_points} of {self.hypothesis.size} "
                f"points; {len(self.violations)} violation(s)")


def _cumulative_2d(f, s, t, method):
    inner = method(f, x=t, axis=1, initial=0.0)
    return method(inner, x=s, axis=0, initial=0.0)


def gronwall_check(y_samples, k_samples, C: float, s=None, t=None,
                   tol: Optional[float] = None) -> GronwallReport:
    """Numeric witness of the two-dimensional Gronwall inequality.

    Wherever ``y <= C + int_0^s int_0^t k y`` holds on the grid, check
    ``y <= C exp(int_0^s int_0^t k)``.  Integrals use the cumulative
    trapezoid rule; the tolerance defaults to twice its gap to cumulative
    Simpson, plus rounding.
    """
    y = np.asarray(y_samples, dtype=float)
    k = np.asarray(k_samples, dtype=float)
    if y.ndim != 2 or y.shape != k.shape:
        raise ValueError("y and k must be 2-D arrays of the same shape")
    if C < 0:
        raise DomainError("C must be nonnegative")
    if np.any(y < 0) or np.any(k < 0):
        raise DomainError("y and k samples must be nonnegative")
    s = np.linspace(0.0, 1.0, y.shape[0]) if s is None else np.asarray(s, dtype=float)
    t = np.linspace(0.0, 1.0, y.shape[1]) if t is None else np.asarray(t, dtype=float)
    i_ky = _cumulative_2d(k * y, s, t, cumulative_trapezoid)
    i_k = _cumulative_2d(k, s, t, cumulative_trapezoid)
    if tol is None:
        if min(y.shape) >= 3:
            err_ky = np.max(np.abs(i_ky - _cumulative_2d(k * y, s, t, cumulative_simpson)))
            err_k = np.max(np.abs(i_k - _cumulative_2d(k, s, t, cumulative_simpson)))
        else:
            err_ky = err_k = 0.0
        tol_h = 2.0 * float(err_ky) + 1e-12 * (1.0 + C + float(np.max(y)))
        tol_c = 2.0 * float(err_k) + 1e-12
    else:
        tol_h = tol_c = float(tol)
    hypothesis = y <= C + i_ky + tol_h
    bound = C * np.exp(i_k)
    conclusion = y <= bound * (1.0 + tol_c) + 1e-12 * (1.0 + bound)
    bad = hypothesis & ~conclusion
    violations = [(int(i), int(j), float(s[i]), float(t[j]), float(y[i, j]), float(bound[i, j]))
                  for i, j in np.argwhere(bad)]
    return GronwallReport(hypothesis, conclusion, violations, tol_h, tol_c)


def sampled_gronwall(y: Callable, k: Callable, C: float, n: int = 50,
                     domain=(0.0, 1.0)) -> GronwallReport:
    """:func:`gronwall_check` on an ``n x n`` uniform grid over ``domain^2``."""
    s = np.linspace(domain[0], domain[1], n)
    S, T = np.meshgrid(s, s, indexing="ij")
    return gronwall_check(np.broadcast_to(y(S, T), S.shape),
                          np.broadcast_to(k(S, T), S.shape), C, s, s)
