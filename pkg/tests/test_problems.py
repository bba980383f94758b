import numpy as np
import pytest

from fvie.errors import (BreakpointOrderError, DomainError, PositivityViolationError, ProblemNotFoundError,
                         UnsupportedDomainError)
from fvie.fuzzy import LevelGrid
from fvie.problems import (Breakpoints, Nonlinearity, OriginalProblem, PiecewiseKernel,
                           ProblemSpec, crisp_field, estimate_kernel_sup, manufactured_residual,
                           registry_get, registry_names, segment_bounds, segment_map,
                           transform_problem)
from fvie.quadrature import chebyshev_nodes

NAMES = registry_names()
G = LevelGrid.uniform()


def simple(kernel, lower=None):
    return ProblemSpec(name="t", form="linear", breakpoints=Breakpoints.single(),
                       kernel=PiecewiseKernel((kernel,)),
                       forcing=crisp_field(lambda x, y: np.ones_like(x * y)),
                       level_grid=G)


def test_registry():
    assert {"crisp-unit-linear", "fuzzy-unit-linear", "crisp-square-nonlinear",
            "piecewise-two-segment"} <= set(NAMES)
    with pytest.raises(ProblemNotFoundError):
        registry_get("unknown-name")


@pytest.mark.parametrize("name", NAMES)
def test_breakpoints_ordered(name):
    registry_get(name).breakpoints.check(samples=1000)


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("domain", [(0.0, 1.0), (-0.5, 0.4)])
def test_manufactured_consistency(name, domain):
    spec = registry_get(name, domain=domain)
    xs = np.linspace(-0.9, 0.95, 5)
    assert manufactured_residual(spec, xs, xs, quad_n=30) <= 1e-8


def test_unit_linear_forcing_by_substitution():
    # z = 1 on [0,1]^2: integral of 1 over [0,s]x[0,t] is st
    spec = registry_get("crisp-unit-linear").view_as_original()
    s, t = 0.3, 0.8
    lo, hi = spec.forcing(np.array(s), np.array(t), G.array)
    np.testing.assert_allclose(lo, 1 - s * t)


def test_fuzzy_unit_linear_levels():
    spec = registry_get("fuzzy-unit-linear").view_as_original()
    s, t = 0.5, 1.0
    lo, hi = spec.forcing(np.array(s), np.array(t), G.array)
    r = G.array
    np.testing.assert_allclose(lo, (1 + r) * (1 - s * t))
    np.testing.assert_allclose(hi, (3 - r) * (1 - s * t))
    assert np.all(lo <= hi)


def test_fuzzy_unit_linear_needs_unit_width():
    with pytest.raises(DomainError):
        registry_get("fuzzy-unit-linear", domain=(0.0, 1.5))


def test_transform_substitution():
    orig = OriginalProblem(name="st", form="linear", domain=(0.0, 1.0),
                           kernels=(lambda s, t, a, b: np.ones_like(s * t * a * b),),
                           forcing=crisp_field(lambda s, t: s * t), level_grid=G)
    spec = transform_problem(orig)
    x, y = np.array([-1.0, 0.2, 1.0]), np.array([0.5, -0.3, 1.0])
    lo, _ = spec.forcing(x, y, G.array[:1])
    np.testing.assert_allclose(lo[:, 0], (1 + x) * (1 + y) / 4, atol=1e-15)
    assert lo[-1, 0] == 1.0  # top corner


@pytest.mark.parametrize("domain", [(0.0, 1.0), (-2.0, 3.0), (1.5, 1.75)])
def test_transform_round_trip(domain):
    spec = registry_get("crisp-exp-linear", domain=domain)
    orig = spec.original
    a1, a2 = domain
    x = np.linspace(-1, 1, 9)
    s = a1 + (a2 - a1) / 2 * (1 + x)
    f, _ = spec.forcing(x[:, None], x[None, :], G.array[:1])
    g, _ = orig.forcing(s[:, None], s[None, :], G.array[:1])
    np.testing.assert_allclose(f, g, rtol=1e-14, atol=1e-14)


def test_non_square_domain():
    orig = OriginalProblem(name="r", form="linear", domain=(0.0, 1.0, 0.0, 2.0),
                           kernels=(lambda *a: 1.0,), forcing=crisp_field(lambda s, t: s),
                           level_grid=G)
    with pytest.raises(UnsupportedDomainError):
        transform_problem(orig)


def test_segment_map_examples():
    bp = Breakpoints.single()
    for mode in ("default", "paper"):
        m = segment_map(bp, 1, 1.0, mode)
        assert (m.lower, m.upper, m.jacobian) == (-1.0, 1.0, 1.0)
    mid = lambda x: (np.asarray(x) - 1) / 2  # noqa: E731
    one = lambda x: -np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    ident = lambda x: np.asarray(x, dtype=float)  # noqa: E731
    bp2 = Breakpoints((one, mid, ident), (one, mid, ident))
    m = segment_map(bp2, 2, 1.0)
    assert (m.lower, m.upper, m.jacobian) == (0.0, 1.0, 0.5)
    p = segment_map(bp2, 2, 1.0, "paper")
    assert (p.lower, p.upper, p.jacobian) == (-1.0, 1.0, 1.0)
    assert m(np.array([-1.0, 1.0])).tolist() == [0.0, 1.0]


def test_breakpoint_order_violation():
    one = lambda x: -np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    ident = lambda x: np.asarray(x, dtype=float)  # noqa: E731
    above = lambda x: np.minimum(np.asarray(x, dtype=float) + 0.5, 1.0)  # noqa: E731
    bp = Breakpoints((one, above, ident), (one, above, ident))
    with pytest.raises(BreakpointOrderError):
        bp.check()
    with pytest.raises(BreakpointOrderError):
        segment_bounds(bp, 2, np.array([0.0]))


def test_kernel_sup_examples():
    assert estimate_kernel_sup(simple(lambda x, y, a, b: 0.25 + 0 * (x * y * a * b))) == [0.25]
    k = lambda x, y, a, b: (2 + a * b) / 8 + 0 * (x * y)  # noqa: E731
    assert estimate_kernel_sup(simple(k), 21)[0] == pytest.approx(3 / 8)
    with pytest.raises(PositivityViolationError):
        estimate_kernel_sup(simple(lambda x, y, a, b: -1.0 + 0 * (x * y * a * b)))


def test_kernel_sup_is_lower_bound_of_dense():
    k = lambda x, y, a, b: 1 + 0.5 * np.sin(3 * a) * np.cos(2 * b) + 0 * (x * y)  # noqa: E731
    coarse = estimate_kernel_sup(simple(k), 5)[0]
    assert coarse <= 1.5 + 1e-15


def test_square_nonlinearity():
    sq = Nonlinearity.square(4.0)
    lo, hi = sq.cut_map(np.array([-1.0, 0.5, -3.0]), np.array([2.0, 1.0, -2.0]))
    assert lo.tolist() == [0.0, 0.25, 4.0]
    assert hi.tolist() == [4.0, 1.0, 9.0]


def test_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(name="bad", form="linear", breakpoints=Breakpoints.single(),
                    kernel=PiecewiseKernel((lambda *a: 1.0,)), forcing=crisp_field(lambda x, y: x),
                    nonlinearity=Nonlinearity.square(), level_grid=G)
    with pytest.raises(ValueError):
        ProblemSpec(name="bad", form="linear", breakpoints=Breakpoints.single(),
                    kernel=PiecewiseKernel((lambda *a: 1.0, lambda *a: 1.0)),
                    forcing=crisp_field(lambda x, y: x), level_grid=G)


def test_kernel_scale_and_levels():
    spec = registry_get("fuzzy-unit-linear", levels=5, kernel_scale=3.0)
    assert len(spec.level_grid) == 5
    assert estimate_kernel_sup(spec) == [pytest.approx(0.75)]


def test_chebyshev_nodes_inside_segments():
    spec = registry_get("piecewise-two-segment")
    x = chebyshev_nodes(10).points
    for p in (1, 2):
        lo, hi = segment_bounds(spec.breakpoints, p, x)
        assert np.all(lo <= hi)
