"""Quadrature exactness and orthonormality of the modal bases."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from galbrunhdg.refelem import (
    quad_segment,
    quad_triangle,
    segment_basis,
    triangle_basis,
    triangle_dim,
)


def test_triangle_dim():
    assert [triangle_dim(k) for k in range(1, 5)] == [3, 6, 10, 15]


@pytest.mark.parametrize("deg", [1, 2, 5, 9])
def test_triangle_quadrature_exact_on_monomials(deg):
    rule = quad_triangle(deg)
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            # exact integral of x^i y^j over the unit reference triangle
            from math import factorial

            exact = (
                factorial(i) * factorial(j) / factorial(i + j + 2)
            )
            approx = np.sum(
                rule.weights * rule.points[:, 0] ** i * rule.points[:, 1] ** j
            )
            assert approx == pytest.approx(exact, rel=1e-13)


@pytest.mark.parametrize("deg", [1, 3, 8])
def test_segment_quadrature_exact(deg):
    rule = quad_segment(deg)
    for i in range(deg + 1):
        assert np.sum(rule.weights * rule.points**i) == pytest.approx(
            1.0 / (i + 1), rel=1e-13
        )


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_triangle_basis_orthonormal(k):
    rule = quad_triangle(2 * k + 2)
    V = triangle_basis(k).eval(rule.points)
    G = V @ (rule.weights[:, None] * V.T)
    assert np.max(np.abs(G - np.eye(len(G)))) < 1e-12


@pytest.mark.parametrize("k", [0, 1, 3])
def test_segment_basis_orthonormal(k):
    rule = quad_segment(2 * k + 2)
    S = segment_basis(k).eval(rule.points)
    G = S @ (rule.weights[:, None] * S.T)
    assert np.max(np.abs(G - np.eye(k + 1))) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_triangle_basis_gradient_finite_difference(k):
    pts = np.array([[0.2, 0.3], [0.5, 0.1], [0.1, 0.6]])
    tb = triangle_basis(k)
    gx, gy = tb.eval_grad(pts)
    h = 1e-6
    for d, g in ((np.array([h, 0.0]), gx), (np.array([0.0, h]), gy)):
        fd = (tb.eval(pts + d) - tb.eval(pts - d)) / (2 * h)
        assert np.max(np.abs(fd - g)) < 1e-6


@pytest.mark.parametrize("k", [1, 2, 3])
def test_basis_spans_polynomials(k):
    # any monomial of total degree <= k is reproduced by projection
    rule = quad_triangle(2 * k + 2)
    V = triangle_basis(k).eval(rule.points)
    x, y = rule.points[:, 0], rule.points[:, 1]
    for i in range(k + 1):
        for j in range(k + 1 - i):
            target = x**i * y**j
            coef = V @ (rule.weights * target)
            assert np.max(np.abs(coef @ V - target)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=9))
def test_quad_weights_positive_and_sum(deg):
    tri = quad_triangle(deg)
    seg = quad_segment(deg)
    assert np.all(tri.weights > 0) and np.all(seg.weights > 0)
    assert np.sum(tri.weights) == pytest.approx(0.5, rel=1e-13)
    assert np.sum(seg.weights) == pytest.approx(1.0, rel=1e-13)


def test_invalid_degree_rejected():
    with pytest.raises(ValueError):
        quad_triangle(-1)
    with pytest.raises(ValueError):
        quad_segment(-3)
