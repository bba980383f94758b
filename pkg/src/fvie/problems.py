"""Problem model for 2-D fuzzy Volterra equations with piecewise kernels.

Problems are stated on a square ``[a1, a2]^2`` as

    z(s,t) = g(s,t) (+) sum_p  int_{a_{p-1}(s)}^{a_p(s)} int_{b_{p-1}(t)}^{b_p(t)}
                               k_p(s,t,sigma,tau) (.) phi(z(sigma,tau)) dtau dsigma

(:class:`OriginalProblem`) and mapped to ``[-1, 1]^2`` by
:func:`transform_problem`, which yields the :class:`ProblemSpec` the
collocation solver works on.

Function-valued fields follow numpy broadcasting conventions:

* kernels: ``k(x, y, xi, eta) -> array``
* breakpoint curves: ``a(x) -> array``
* fuzzy-valued fields (forcing, exact solution): ``f(x, y, levels) -> (lo, hi)``
  with the level axis appended last.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (BreakpointOrderError, DomainError, PositivityViolationError,
                     ProblemNotFoundError, UnsupportedDomainError)
from .fuzzy import FuzzyNumber, LevelGrid, triangular_cuts
from .interpolation import FuzzyGrid, LagrangeBasis, combine
from .quadrature import gauss_legendre

SEGMENT_MODES = ("default", "paper")
_MODE_ALIASES = {"default": "default", "paper": "paper", "paper-literal": "paper"}

FuzzyField = Callable[..., tuple]


def normalize_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown segment mode {mode!r}; use one of {SEGMENT_MODES}") from None


# -- fuzzy-valued field helpers -----------------------------------------------

def crisp_field(fn: Callable) -> FuzzyField:
    """Lift a real function ``fn(x, y)`` to a crisp fuzzy-valued field."""
    def field_(x, y, levels):
        v = np.asarray(fn(x, y), dtype=float)[..., None]
        shape = np.broadcast_shapes(v.shape, np.shape(levels))
        v = np.broadcast_to(v, shape)
        return v, v
    return field_


def scaled_field(tri: tuple[float, float, float], fn: Callable) -> FuzzyField:
    """The field ``fn(x, y) (.) c`` for a triangular number ``c = tri``."""
    def field_(x, y, levels):
        v = np.asarray(fn(x, y), dtype=float)[..., None]
        c_lo, c_hi = triangular_cuts(*tri, levels)
        lo = np.where(v >= 0, v * c_lo, v * c_hi)
        hi = np.where(v >= 0, v * c_hi, v * c_lo)
        return lo, hi
    return field_


def evaluate_field(fn: FuzzyField, x: float, y: float, level_grid: LevelGrid) -> FuzzyNumber:
    lo, hi = fn(np.float64(x), np.float64(y), level_grid.array)
    n = len(level_grid)
    return FuzzyNumber(level_grid, np.broadcast_to(lo, (n,)), np.broadcast_to(hi, (n,)))


def _curve(c, x):
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(np.asarray(c(x), dtype=float), x.shape)


# -- nonlinearity ---------------------------------------------------------------

@dataclass(frozen=True)
class Nonlinearity:
    """Action of the nonlinearity on alpha-cuts.

    ``cut_map(lo, hi) -> (lo, hi)`` acts on stacked endpoint arrays.
    ``lipschitz`` is the constant in ``D(phi(z), phi(v)) <= L D(z, v)`` when
    known.
    """

    cut_map: Callable
    lipschitz: Optional[float] = None
    kind: str = "custom"
    name: str = ""

    def __call__(self, u: FuzzyNumber) -> FuzzyNumber:
        lo, hi = self.cut_map(u.lo, u.hi)
        return FuzzyNumber(u.level_grid, lo, hi)

    @classmethod
    def identity(cls) -> "Nonlinearity":
        return cls(lambda lo, hi: (lo, hi), 1.0, "identity", "identity")

    @classmethod
    def monotone(cls, phi: Callable, lipschitz: Optional[float] = None,
                 name: str = "") -> "Nonlinearity":
        """Extension of a nondecreasing real function: apply it to both endpoints."""
        return cls(lambda lo, hi: (phi(lo), phi(hi)), lipschitz, "monotone-endpointwise", name)

    @classmethod
    def square(cls, lipschitz: Optional[float] = None) -> "Nonlinearity":
        """Interval extension of ``z -> z^2`` (endpoint squaring on nonnegative cuts)."""
        def cut_map(lo, hi):
            lo2, hi2 = lo * lo, hi * hi
            big = np.maximum(lo2, hi2)
            small = np.minimum(lo2, hi2)
            straddles = (lo < 0) & (hi > 0)
            return np.where(straddles, 0.0, small), big
        return cls(cut_map, lipschitz, "square", "square")


# -- breakpoints and kernels --------------------------------------------------

@dataclass(frozen=True)
class Breakpoints:
    """Curves ``a_0..a_m'`` and ``b_0..b_m'`` in transformed coordinates."""

    a: tuple
    b: tuple

    def __post_init__(self):
        if len(self.a) != len(self.b) or len(self.a) < 2:
            raise BreakpointOrderError("need m'+1 >= 2 curves on each axis")

    @property
    def m_prime(self) -> int:
        return len(self.a) - 1

    @classmethod
    def single(cls) -> "Breakpoints":
        lower = lambda x: -np.ones_like(x)  # noqa: E731
        upper = lambda x: x  # noqa: E731
        return cls((lower, upper), (lower, upper))

    def curves(self, axis: str) -> tuple:
        return self.a if axis == "x" else self.b

    def check(self, samples: int = 1000, tol: float = 1e-12):
        """Raise :class:`BreakpointOrderError` unless the ordering invariants hold."""
        x = np.linspace(-1.0, 1.0, samples + 1)
        for axis in ("x", "y"):
            curves = [_curve(c, x) for c in self.curves(axis)]
            if np.max(np.abs(curves[0] + 1.0)) > tol:
                raise BreakpointOrderError(f"first {axis}-curve is not identically -1")
            if np.max(np.abs(curves[-1] - x)) > tol:
                raise BreakpointOrderError(f"last {axis}-curve is not the identity")
            for p, c in enumerate(curves):
                if np.any(c < -1.0 - tol) or np.any(c > x + tol):
                    raise BreakpointOrderError(
                        f"{axis}-curve {p} leaves the admissible band [-1, x]")
            for p in range(1, len(curves)):
                gap = curves[p][1:] - curves[p - 1][1:]
                if np.any(gap <= 0):
                    k = int(np.argmin(gap)) + 1
                    raise BreakpointOrderError(
                        f"{axis}-curves {p - 1} and {p} are not strictly ordered "
                        f"at {x[k]:.6g}")


@dataclass(frozen=True)
class PiecewiseKernel:
    """One crisp kernel ``k_p(x, y, xi, eta)`` per segment (transformed form)."""

    parts: tuple

    def __len__(self):
        return len(self.parts)

    def __call__(self, p: int, x, y, xi, eta) -> np.ndarray:
        """Kernel of segment ``p`` (1-based)."""
        out = np.asarray(self.parts[p - 1](x, y, xi, eta), dtype=float)
        return np.broadcast_to(out, np.broadcast_shapes(
            np.shape(x), np.shape(y), np.shape(xi), np.shape(eta)))

    def scaled(self, c: float) -> "PiecewiseKernel":
        return PiecewiseKernel(tuple(
            (lambda k: (lambda x, y, xi, eta: c * np.asarray(k(x, y, xi, eta), dtype=float)))(k)
            for k in self.parts))


@dataclass(frozen=True)
class SegmentMap:
    """Affine map of theta in [-1, 1] onto ``[lower, upper]``."""

    lower: float
    upper: float

    @property
    def jacobian(self) -> float:
        return 0.5 * (self.upper - self.lower)

    def __call__(self, theta):
        return self.lower + self.jacobian * (1.0 + np.asarray(theta, dtype=float))


def segment_bounds(bp: Breakpoints, p: int, x, mode: str = "default", axis: str = "x"):
    """Integration limits of segment ``p`` at abscissae ``x``."""
    mode = normalize_mode(mode)
    if not 1 <= p <= bp.m_prime:
        raise IndexError(f"segment {p} outside 1..{bp.m_prime}")
    curves = bp.curves(axis)
    upper = _curve(curves[p], x)
    if mode == "default":
        lower = _curve(curves[p - 1], x)
    else:
        lower = -np.ones_like(upper)
    if np.any(upper < lower):
        k = int(np.argmin(upper - lower))
        xs = np.broadcast_to(np.asarray(x, dtype=float), upper.shape).reshape(-1)
        raise BreakpointOrderError(
            f"segment {p} is inverted at {axis}={xs[k]:.6g}: "
            f"upper {upper.reshape(-1)[k]:.6g} < lower {lower.reshape(-1)[k]:.6g}")
    return lower, upper


def segment_map(bp: Breakpoints, p: int, x_i: float, mode: str = "default",
                axis: str = "x") -> SegmentMap:
    lower, upper = segment_bounds(bp, p, np.float64(x_i), mode, axis)
    return SegmentMap(float(lower), float(upper))


# -- problems -----------------------------------------------------------------

@dataclass(frozen=True)
class OriginalProblem:
    """Problem stated on ``[a1, a2]^2`` in the original variables.

    ``a_curves``/``b_curves`` hold the interior breakpoints ``a_1..a_{m'-1}``
    only; ``a_0(s) = a1`` and ``a_{m'}(s) = s`` are implied.
    """

    name: str
    form: str
    domain: tuple
    kernels: tuple
    forcing: FuzzyField
    a_curves: tuple = ()
    b_curves: tuple = ()
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity.identity)
    exact_solution: Optional[FuzzyField] = None
    level_grid: LevelGrid = field(default_factory=LevelGrid.uniform)
    description: str = ""

    @property
    def m_prime(self) -> int:
        return len(self.kernels)

    @property
    def interval(self) -> tuple[float, float]:
        d = tuple(float(v) for v in self.domain)
        if len(d) == 4:
            if d[:2] != d[2:]:
                raise UnsupportedDomainError(f"domain {d} is not a square")
            d = d[:2]
        if len(d) != 2 or not d[0] < d[1]:
            raise UnsupportedDomainError(f"bad domain {self.domain}")
        return d

    def full_curves(self, axis: str) -> list:
        a1, _ = self.interval
        inner = self.a_curves if axis == "x" else self.b_curves
        return [lambda s: np.full_like(np.asarray(s, dtype=float), a1), *inner, lambda s: s]


@dataclass(frozen=True)
class ProblemSpec:
    """Transformed problem on ``[-1, 1]^2`` solved by the collocation method."""

    name: str
    form: str
    breakpoints: Breakpoints
    kernel: PiecewiseKernel
    forcing: FuzzyField
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity.identity)
    exact_solution: Optional[FuzzyField] = None
    level_grid: LevelGrid = field(default_factory=LevelGrid.uniform)
    original: Optional[OriginalProblem] = None
    description: str = ""

    def __post_init__(self):
        if self.form not in ("linear", "nonlinear"):
            raise ValueError(f"form must be 'linear' or 'nonlinear', got {self.form!r}")
        if self.form == "linear" and self.nonlinearity.kind != "identity":
            raise ValueError("a linear problem must use the identity nonlinearity")
        if len(self.kernel) != self.breakpoints.m_prime:
            raise ValueError(f"{len(self.kernel)} kernels for "
                             f"{self.breakpoints.m_prime} segments")

    @property
    def m_prime(self) -> int:
        return self.breakpoints.m_prime

    @property
    def domain(self) -> tuple[float, float]:
        return self.original.interval if self.original is not None else (-1.0, 1.0)

    def as_nonlinear(self, nonlinearity: Nonlinearity | None = None) -> "ProblemSpec":
        """Same problem routed through the nonlinear solver."""
        phi = nonlinearity or self.nonlinearity
        original = self.original
        if original is not None:
            # phi acts on values only, so the original statement carries over
            original = dataclasses.replace(original, form="nonlinear", nonlinearity=phi)
        return dataclasses.replace(self, form="nonlinear", nonlinearity=phi, original=original)

    def with_kernel(self, kernel: PiecewiseKernel) -> "ProblemSpec":
        """Replace the transformed kernel; the original-variable view is dropped."""
        return dataclasses.replace(self, kernel=kernel, original=None)

    def view_as_original(self) -> OriginalProblem:
        """This problem read as an equation on ``[-1, 1]^2`` in its own variables."""
        if self.original is not None:
            return self.original
        return OriginalProblem(
            name=self.name, form=self.form, domain=(-1.0, 1.0),
            kernels=self.kernel.parts, forcing=self.forcing,
            a_curves=tuple(self.breakpoints.a[1:-1]),
            b_curves=tuple(self.breakpoints.b[1:-1]),
            nonlinearity=self.nonlinearity, exact_solution=self.exact_solution,
            level_grid=self.level_grid, description=self.description)


def transform_problem(orig: OriginalProblem) -> ProblemSpec:
    """Map a problem on ``[a1, a2]^2`` to ``[-1, 1]^2``.

    With ``s = a1 + h (1 + x)`` and ``h = (a2 - a1) / 2`` the kernels pick up
    the area factor ``h^2`` and breakpoint curves become
    ``a_p(x) = (a_p(s(x)) - a1) / h - 1``.
    """
    a1, a2 = orig.interval
    h = 0.5 * (a2 - a1)

    def to_s(x):
        return a1 + h * (1.0 + np.asarray(x, dtype=float))

    def field_(fn):
        if fn is None:
            return None
        return lambda x, y, levels: fn(to_s(x), to_s(y), levels)

    def kernel(k):
        return lambda x, y, xi, eta: h * h * np.asarray(
            k(to_s(x), to_s(y), to_s(xi), to_s(eta)), dtype=float)

    def curve(c):
        return lambda x: (np.asarray(c(to_s(x)), dtype=float) - a1) / h - 1.0

    lower = lambda x: -np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    upper = lambda x: np.asarray(x, dtype=float)  # noqa: E731
    a = (lower, *(curve(c) for c in orig.a_curves), upper)
    b = (lower, *(curve(c) for c in orig.b_curves), upper)
    return ProblemSpec(
        name=orig.name, form=orig.form, breakpoints=Breakpoints(a, b),
        kernel=PiecewiseKernel(tuple(kernel(k) for k in orig.kernels)),
        forcing=field_(orig.forcing), nonlinearity=orig.nonlinearity,
        exact_solution=field_(orig.exact_solution), level_grid=orig.level_grid,
        original=orig, description=orig.description)


# -- quadrature geometry shared by the solvers ----------------------------------

@dataclass
class SegmentQuadrature:
    """Mapped quadrature points and weighted kernel for one segment.

    ``xi[i, k]`` / ``eta[j, l]`` are the mapped Gauss points for collocation
    abscissa ``i`` / ordinate ``j``; ``weights[i, k, j, l]`` is
    ``w_k w_l J_x(i) J_y(j) k_p(x_i, y_j, xi_ik, eta_jl)``.
    """

    p: int
    xi: np.ndarray
    eta: np.ndarray
    weights: np.ndarray


def segment_quadrature(spec: ProblemSpec, p: int, xs, ys, quad_n: int,
                       mode: str = "default") -> SegmentQuadrature:
    rule = gauss_legendre(quad_n)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    xl, xu = segment_bounds(spec.breakpoints, p, xs, mode, "x")
    yl, yu = segment_bounds(spec.breakpoints, p, ys, mode, "y")
    jx = 0.5 * (xu - xl)
    jy = 0.5 * (yu - yl)
    xi = xl[:, None] + jx[:, None] * (1.0 + rule.nodes[None, :])
    eta = yl[:, None] + jy[:, None] * (1.0 + rule.nodes[None, :])
    k = spec.kernel(p, xs[:, None, None, None], ys[None, None, :, None],
                    xi[:, :, None, None], eta[None, None, :, :])
    w = (rule.weights[None, :, None, None] * rule.weights[None, None, None, :]
         * jx[:, None, None, None] * jy[None, None, :, None])
    return SegmentQuadrature(p, xi, eta, w * k)


class IntegralOperator:
    """Right-hand side ``f (+) sum_p int int k_p (.) H(u)`` on a fixed target grid.

    Segment geometry, kernel weights and (when ``source_nodes`` is given) the
    Lagrange basis matrices at the mapped quadrature points are computed once,
    so repeated application inside an iteration is a few tensor contractions.
    """

    def __init__(self, spec: ProblemSpec, xs, ys, quad_n: int, mode: str = "default",
                 source_nodes=None, arithmetic: str = "levelwise"):
        self.spec = spec
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.quad_n = quad_n
        self.mode = normalize_mode(mode)
        self.arithmetic = arithmetic
        self.levels = spec.level_grid.array
        shape = (self.xs.size, self.ys.size, self.levels.size)
        f_lo, f_hi = spec.forcing(self.xs[:, None], self.ys[None, :], self.levels)
        self.forcing = (np.array(np.broadcast_to(f_lo, shape)),
                        np.array(np.broadcast_to(f_hi, shape)))
        self.segments = [segment_quadrature(spec, p, self.xs, self.ys, quad_n, self.mode)
                         for p in range(1, spec.m_prime + 1)]
        self.source_nodes = None
        self.bases = []
        if source_nodes is not None:
            sx, sy = (np.asarray(a, dtype=float) for a in source_nodes)
            self.source_nodes = (sx, sy)
            bx_basis, by_basis = LagrangeBasis(sx), LagrangeBasis(sy)
            self.bases = [(bx_basis.matrix(sq.xi.reshape(-1)), by_basis.matrix(sq.eta.reshape(-1)))
                          for sq in self.segments]

    def _values(self, idx: int, sq: SegmentQuadrature, u):
        nq = sq.xi.shape[1]
        full = (self.xs.size, nq, self.ys.size, nq, self.levels.size)
        if isinstance(u, FuzzyGrid):
            if self.bases:
                if not (np.array_equal(u.nodes_x, self.source_nodes[0])
                        and np.array_equal(u.nodes_y, self.source_nodes[1])):
                    raise ValueError("grid nodes differ from the operator's source nodes")
                bx, by = self.bases[idx]
            else:
                bx = LagrangeBasis(u.nodes_x).matrix(sq.xi.reshape(-1))
                by = LagrangeBasis(u.nodes_y).matrix(sq.eta.reshape(-1))
            v_lo, v_hi = combine(bx, by, u.lo, u.hi, self.arithmetic)
            return v_lo.reshape(full), v_hi.reshape(full)
        v_lo, v_hi = u(sq.xi[:, :, None, None], sq.eta[None, None, :, :], self.levels)
        return np.broadcast_to(v_lo, full), np.broadcast_to(v_hi, full)

    def __call__(self, u) -> tuple[np.ndarray, np.ndarray]:
        out_lo, out_hi = (a.copy() for a in self.forcing)
        for idx, sq in enumerate(self.segments):
            v_lo, v_hi = self._values(idx, sq, u)
            h_lo, h_hi = self.spec.nonlinearity.cut_map(v_lo, v_hi)
            wp = np.maximum(sq.weights, 0.0)
            wn = np.maximum(-sq.weights, 0.0)
            out_lo += (np.einsum("ikjl,ikjlr->ijr", wp, h_lo, optimize=True)
                       - np.einsum("ikjl,ikjlr->ijr", wn, h_hi, optimize=True))
            out_hi += (np.einsum("ikjl,ikjlr->ijr", wp, h_hi, optimize=True)
                       - np.einsum("ikjl,ikjlr->ijr", wn, h_lo, optimize=True))
        return out_lo, out_hi


def apply_operator(spec: ProblemSpec, u, xs, ys, quad_n: int, mode: str = "default",
                   arithmetic: str = "levelwise") -> tuple[np.ndarray, np.ndarray]:
    """One-shot :class:`IntegralOperator` evaluation.

    ``u`` is either a :class:`FuzzyGrid` (evaluated through its Lagrange
    interpolant with the given arithmetic) or a fuzzy-valued field.
    Returns ``(lo, hi)`` of shape ``(len(xs), len(ys), levels)``.
    """
    return IntegralOperator(spec, xs, ys, quad_n, mode, arithmetic=arithmetic)(u)


def manufactured_residual(spec: ProblemSpec, xs, ys, quad_n: int = 30,
                          mode: str = "default") -> float:
    """Max endpoint gap between the exact solution and the operator applied to it."""
    if spec.exact_solution is None:
        raise ValueError(f"problem {spec.name!r} has no exact solution")
    lo, hi = apply_operator(spec, spec.exact_solution, xs, ys, quad_n, mode)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    e_lo, e_hi = spec.exact_solution(xs[:, None], ys[None, :], spec.level_grid.array)
    return float(max(np.max(np.abs(lo - e_lo)), np.max(np.abs(hi - e_hi))))


def estimate_kernel_sup(spec: ProblemSpec, samples_per_axis: int = 9,
                        mode: str = "default") -> list[float]:
    """Sampled maximum of each segment kernel over its admissible region.

    Samples a uniform grid in ``(x, y)`` and, for each abscissa, a uniform
    grid across the segment's integration limits.  The result bounds the true
    supremum from below.  Any non-positive sample raises
    :class:`PositivityViolationError`.
    """
    if samples_per_axis < 2:
        raise ValueError("samples_per_axis must be >= 2")
    n = samples_per_axis
    x = np.linspace(-1.0, 1.0, n)
    t = np.linspace(0.0, 1.0, n)
    sups = []
    for p in range(1, spec.m_prime + 1):
        xl, xu = segment_bounds(spec.breakpoints, p, x, mode, "x")
        yl, yu = segment_bounds(spec.breakpoints, p, x, mode, "y")
        xi = xl[:, None] + (xu - xl)[:, None] * t[None, :]
        eta = yl[:, None] + (yu - yl)[:, None] * t[None, :]
        k = spec.kernel(p, x[:, None, None, None], x[None, None, :, None],
                        xi[:, :, None, None], eta[None, None, :, :])
        bad = ~np.isfinite(k) | (k <= 0)
        if np.any(bad):
            i, a, j, b = np.unravel_index(int(np.argmax(bad)), k.shape)
            raise PositivityViolationError(
                f"kernel of segment {p} is not positive: k={k[i, a, j, b]:.6g} at "
                f"(x, y, xi, eta)=({x[i]:.4g}, {x[j]:.4g}, {xi[i, a]:.4g}, {eta[j, b]:.4g})")
        sups.append(float(k.max()))
    return sups


# -- registry -----------------------------------------------------------------

_REGISTRY: dict[str, Callable[..., OriginalProblem]] = {}


def register(name: str):
    def deco(builder):
        _REGISTRY[name] = builder
        return builder
    return deco


def registry_names() -> list[str]:
    return sorted(_REGISTRY)


def registry_get(name: str, levels: int = 11, domain: Sequence[float] = (0.0, 1.0),
                 kernel_scale: float = 1.0) -> ProblemSpec:
    """Build a registered problem, transformed to ``[-1, 1]^2``."""
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise ProblemNotFoundError(
            f"unknown problem {name!r}; registered: {', '.join(registry_names())}") from None
    orig = builder(LevelGrid.uniform(levels), tuple(float(d) for d in domain))
    if kernel_scale != 1.0:
        c = float(kernel_scale)
        orig = dataclasses.replace(orig, kernels=tuple(
            (lambda k: (lambda *a: c * np.asarray(k(*a), dtype=float)))(k)
            for k in orig.kernels))
    return transform_problem(orig)


def _ones(*arrays):
    return np.ones(np.broadcast_shapes(*(np.shape(a) for a in arrays)))


# Manufactured problems.  Formulas use S = s - a1, T = t - a1 so any square
# domain [a1, a2]^2 keeps the same exact solution.

@register("crisp-unit-linear")
def _crisp_unit_linear(level_grid, domain):
    a1 = domain[0]
    return OriginalProblem(
        name="crisp-unit-linear", form="linear", domain=domain,
        kernels=(lambda s, t, sg, tau: _ones(s, t, sg, tau),),
        forcing=crisp_field(lambda s, t: 1.0 - (s - a1) * (t - a1)),
        exact_solution=crisp_field(lambda s, t: _ones(s, t)),
        level_grid=level_grid,
        description="k = 1, z = 1, g = 1 - ST")


@register("fuzzy-unit-linear")
def _fuzzy_unit_linear(level_grid, domain):
    a1, a2 = domain
    if a2 - a1 > 1.0:
        # 1 - ST changes sign and c (.) (1 - ST) (+) c (.) ST is no longer c (.) 1
        raise DomainError("fuzzy-unit-linear needs a domain of width <= 1")
    c = (1.0, 2.0, 3.0)
    return OriginalProblem(
        name="fuzzy-unit-linear", form="linear", domain=domain,
        kernels=(lambda s, t, sg, tau: _ones(s, t, sg, tau),),
        forcing=scaled_field(c, lambda s, t: 1.0 - (s - a1) * (t - a1)),
        exact_solution=scaled_field(c, lambda s, t: _ones(s, t)),
        level_grid=level_grid,
        description="k = 1, z = c (.) 1, g = c (.) (1 - ST), c = (1, 2, 3)")


@register("crisp-square-nonlinear")
def _crisp_square_nonlinear(level_grid, domain):
    a1, a2 = domain
    width = a2 - a1

    def g(s, t):
        st = (s - a1) * (t - a1)
        return 1.0 - st ** 2 / 2.0 - st ** 3 / 9.0

    return OriginalProblem(
        name="crisp-square-nonlinear", form="nonlinear", domain=domain,
        kernels=(lambda s, t, sg, tau: _ones(s, t, sg, tau),),
        forcing=crisp_field(g),
        nonlinearity=Nonlinearity.square(lipschitz=2.0 * (1.0 + width * width)),
        exact_solution=crisp_field(lambda s, t: 1.0 + (s - a1) * (t - a1)),
        level_grid=level_grid,
        description="phi(z) = z^2, k = 1, z = 1 + ST, g = 1 - (ST)^2/2 - (ST)^3/9")


@register("piecewise-two-segment")
def _piecewise_two_segment(level_grid, domain):
    a1 = domain[0]

    def g(s, t):
        st = (s - a1) * (t - a1)
        return 1.0 + st / 4.0 - 19.0 * st ** 2 / 64.0

    mid = lambda s: a1 + 0.5 * (np.asarray(s, dtype=float) - a1)  # noqa: E731
    return OriginalProblem(
        name="piecewise-two-segment", form="linear", domain=domain,
        kernels=(lambda s, t, sg, tau: _ones(s, t, sg, tau),
                 lambda s, t, sg, tau: 2.0 * _ones(s, t, sg, tau)),
        a_curves=(mid,), b_curves=(mid,),
        forcing=crisp_field(g),
        exact_solution=crisp_field(lambda s, t: 1.0 + (s - a1) * (t - a1)),
        level_grid=level_grid,
        description="m' = 2, midpoint breakpoints, k_1 = 1, k_2 = 2, z = 1 + ST")


@register("crisp-exp-linear")
def _crisp_exp_linear(level_grid, domain):
    a1 = domain[0]
    return OriginalProblem(
        name="crisp-exp-linear", form="linear", domain=domain,
        kernels=(lambda s, t, sg, tau: _ones(s, t, sg, tau),),
        forcing=crisp_field(lambda s, t: np.exp(s - a1) + np.exp(t - a1) - 1.0),
        exact_solution=crisp_field(lambda s, t: np.exp((s - a1) + (t - a1))),
        level_grid=level_grid,
        description="k = 1, z = exp(S + T), g = exp(S) + exp(T) - 1")


def kernel_bound_product(m_list: Sequence[float], lipschitz: float,
                         s: float, t: float) -> float:
    """``sum_p M_p * L * s * t`` as used by the contraction bounds."""
    return math.fsum(m_list) * lipschitz * s * t
