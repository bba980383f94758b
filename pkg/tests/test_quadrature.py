import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import Polynomial

from fvie.fuzzy import LevelGrid, crisp, fuzzy_scale, hausdorff_distance, triangular
from fvie.quadrature import chebyshev_nodes, fuzzy_quad_2d, gauss_legendre, legendre, rule_table

G = LevelGrid.uniform()


def exact_integral(coef):
    """Integral over [-1, 1] of sum_k coef[k] x^k from the antiderivative."""
    anti = Polynomial(coef).integ()
    return anti(1.0) - anti(-1.0)


def test_chebyshev_order_zero():
    assert chebyshev_nodes(0).points.tolist() == pytest.approx([0.0])


@pytest.mark.parametrize("n", range(0, 21))
def test_chebyshev_roots_and_symmetry(n):
    x = chebyshev_nodes(n).points
    assert np.all(np.diff(x) < 0)
    np.testing.assert_allclose(x, -x[::-1], atol=1e-13)
    # they are the roots of T_{n+1}
    np.testing.assert_allclose(np.cos((n + 1) * np.arccos(x)), 0.0, atol=1e-13)


def test_gl_closed_forms():
    r0 = gauss_legendre(0)
    assert r0.nodes.tolist() == [0.0] and r0.weights.tolist() == pytest.approx([2.0])
    r1 = gauss_legendre(1)
    np.testing.assert_allclose(r1.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(r1.weights, [1.0, 1.0], atol=1e-15)
    r2 = gauss_legendre(2)
    np.testing.assert_allclose(r2.nodes, [-math.sqrt(0.6), 0.0, math.sqrt(0.6)], atol=1e-15)
    np.testing.assert_allclose(r2.weights, [5 / 9, 8 / 9, 5 / 9], atol=1e-15)


@pytest.mark.parametrize("n", range(0, 41))
def test_gl_rule_properties(n):
    rule = gauss_legendre(n)
    assert len(rule) == n + 1
    assert np.all(rule.weights > 0)
    assert math.fsum(rule.weights) == pytest.approx(2.0, abs=1e-13)
    np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1], atol=1e-13)
    ref_x, ref_w = np.polynomial.legendre.leggauss(n + 1)
    np.testing.assert_allclose(rule.nodes, ref_x, atol=1e-14)
    np.testing.assert_allclose(rule.weights, ref_w, atol=1e-14)


def test_gl_cached():
    assert gauss_legendre(7) is gauss_legendre(7)


def test_legendre_recurrence_matches_numpy():
    x = np.linspace(-0.95, 0.95, 17)
    for n in range(1, 12):
        p, dp = legendre(n, x)
        ref = np.polynomial.Legendre.basis(n)
        np.testing.assert_allclose(p, ref(x), atol=1e-13)
        np.testing.assert_allclose(dp, ref.deriv()(x), atol=1e-11)


def test_negative_order():
    with pytest.raises(ValueError):
        gauss_legendre(-1)
    with pytest.raises(ValueError):
        chebyshev_nodes(-1)


@pytest.mark.parametrize("n", [0, 3, 9])
def test_fuzzy_quad_examples(n):
    rule = gauss_legendre(n)
    one = fuzzy_quad_2d(rule, lambda s, t: crisp(1.0, G))
    assert hausdorff_distance(one, crisp(4.0, G)) < 1e-13
    odd = fuzzy_quad_2d(rule, lambda s, t: crisp(s * t, G))
    assert hausdorff_distance(odd, crisp(0.0, G)) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 6])
def test_fuzzy_quad_scaled_triangular(n):
    c = triangular(1, 2, 3, G)
    got = fuzzy_quad_2d(gauss_legendre(n), lambda s, t: fuzzy_scale(s * s * t * t, c))
    assert hausdorff_distance(got, triangular(4 / 9, 8 / 9, 4 / 3, G)) < 1e-14


@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_fuzzy_quad_polynomial_exactness(n, seed):
    rng = np.random.default_rng(seed)
    d = 2 * n + 1
    cx, cy = rng.standard_normal(d + 1), rng.standard_normal(d + 1)
    px, py = Polynomial(cx), Polynomial(cy)
    got = fuzzy_quad_2d(gauss_legendre(n), lambda s, t: crisp(px(s) * py(t), G))
    exact = exact_integral(cx) * exact_integral(cy)
    scale = exact_integral(np.abs(cx)) * exact_integral(np.abs(cy))
    assert hausdorff_distance(got, crisp(exact, G)) <= 1e-12 * max(1.0, scale)


@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_fuzzy_quad_nonnegative_integrand(n, seed):
    # with a nonnegative integrand the fuzzy factor passes straight through
    rng = np.random.default_rng(seed)
    cx = rng.standard_normal(n + 1)
    sq = Polynomial(cx) ** 2            # degree 2n, nonnegative
    c = triangular(0.5, 1.0, 2.0, G)
    got = fuzzy_quad_2d(gauss_legendre(n), lambda s, t: fuzzy_scale(sq(s) * (1 + t), c))
    exact = exact_integral(sq.coef) * 2.0
    assert hausdorff_distance(got, fuzzy_scale(exact, c)) <= 1e-12 * max(1.0, 2 * exact)


def test_fuzzy_quad_not_exact_beyond_degree():
    # degree 2N+2 is the first monomial a rule of order N misses
    n = 2
    got = fuzzy_quad_2d(gauss_legendre(n), lambda s, t: crisp(s ** 6, G))
    assert abs(got.lo[0] - 2 * 2 / 7) > 1e-3


def test_rule_table():
    text = rule_table(2)
    assert text.startswith("# order 2")
    assert len(text.strip().splitlines()) == 2 + 3 + 1
    assert "0.88888888888888" in text
