import numpy as np
import numpy.testing as npt
import pytest

from igabound.errors import InvalidArgument
from igabound.quadrature import gauss_rule, map_rule
from oracles import legendre_roots


def test_midpoint():
    r = gauss_rule(1)
    npt.assert_array_equal(r.points, [0.0])
    npt.assert_array_equal(r.weights, [2.0])


def test_two_point_rule_against_root_finder():
    r = gauss_rule(2)
    roots = legendre_roots(2)
    npt.assert_allclose(roots, [-0.5773502691896258, 0.5773502691896258], atol=1e-15)
    npt.assert_allclose(r.points, roots, atol=1e-15)
    npt.assert_allclose(r.weights, [1.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("n", [3, 8, 17, 40, 64])
def test_nodes_against_companion_roots(n):
    npt.assert_allclose(gauss_rule(n).points, legendre_roots(n), atol=1e-13)


def test_five_point_degree_eight():
    r = gauss_rule(5)
    assert abs(np.sum(r.weights * r.points ** 8) - 2 / 9) <= 1e-14


@pytest.mark.parametrize("n", range(1, 17))
def test_exactness(n):
    r = gauss_rule(n)
    for d in range(2 * n):
        exact = 0.0 if d % 2 else 2.0 / (d + 1)
        approx = np.sum(r.weights * r.points ** d)
        assert abs(approx - exact) <= 1e-13 * max(1.0, abs(exact))


@pytest.mark.parametrize("n", [1, 2, 5, 16, 33, 64])
def test_symmetry_and_weights(n):
    r = gauss_rule(n)
    npt.assert_allclose(r.points, -r.points[::-1], atol=1e-14)
    npt.assert_allclose(r.weights, r.weights[::-1], atol=1e-14)
    assert np.all(np.diff(r.points) > 0)
    assert np.all(r.weights > 0)
    assert abs(r.weights.sum() - 2.0) <= 1e-13


@pytest.mark.parametrize("n", [0, 65, -3])
def test_range(n):
    with pytest.raises(InvalidArgument):
        gauss_rule(n)


def test_map_rule():
    r = map_rule(gauss_rule(1), 0.0, 2.0)
    npt.assert_array_equal(r.points, [1.0])
    npt.assert_array_equal(r.weights, [2.0])
    r = map_rule(gauss_rule(7), -3.0, 4.5)
    assert abs(r.weights.sum() - 7.5) <= 1e-13
    r = map_rule(gauss_rule(3), 0.0, 1.0)
    assert abs(np.sum(r.weights * r.points ** 5) - 1 / 6) <= 1e-14
    with pytest.raises(InvalidArgument):
        map_rule(gauss_rule(3), 1.0, 1.0)
