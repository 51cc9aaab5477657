from fractions import Fraction

import numpy as np
import pytest

from igabound.errors import InvalidSpec
from igabound.model import (Kind, PotentialShape, ProblemSpec, attraction_sup, effective_gamma,
                            gamma_attractive, kappa_of, mass_coefficients, shape_eval, shift_of,
                            unshift)


def test_shapes():
    assert shape_eval(PotentialShape.GAUSSIAN, 0.0) == 1.0
    assert shape_eval("lorentzian-cubed", 1.0) == 0.125
    assert abs(PotentialShape.GAUSSIAN(1.0) - np.exp(-1)) < 1e-16
    np.testing.assert_array_equal(shape_eval("constant", [1.0, 7.0]), [1.0, 1.0])


def test_mass_coefficients_exact():
    ax, ay = mass_coefficients(20)
    assert (ax, ay) == (Fraction(41, 42), Fraction(2, 21))
    axf, ayf = mass_coefficients(20.0)
    assert abs(axf - 41 / 42) < 1e-16 and abs(ayf - 2 / 21) < 1e-16


def test_kappa():
    assert kappa_of(ProblemSpec("two-body", "gaussian", 1.0)) == 0.5
    kx, ky = kappa_of(ProblemSpec("three-body", "gaussian", 0.3, mass_ratio=20))
    assert abs(kx - 41 / 84) < 1e-16 and abs(ky - 1 / 21) < 1e-16
    s = ProblemSpec("three-body", "gaussian", 0.3, kappa_override=(0.5, 0.25))
    assert kappa_of(s) == (0.5, 0.25)


def test_three_body_potential():
    s = ProblemSpec("three-body", "gaussian", 2.0, mass_ratio=20)
    x, y = 0.3, 1.1
    expected = 2.0 * (np.exp(-(x + y / 2) ** 2) + np.exp(-(x - y / 2) ** 2))
    assert abs(gamma_attractive(s, x, y) - expected) < 1e-15
    assert attraction_sup(s) == 4.0
    assert shift_of(s) == 5.0


def test_effective_gamma_nonnegative():
    s = ProblemSpec(Kind.TWO_BODY, PotentialShape.LORENTZIAN_CUBED, 5.0)
    x = np.linspace(-20, 20, 1001)
    g = effective_gamma(s, x)
    assert g.min() >= 1.0 - 1e-15
    assert unshift(s, 6.0) == 0.0


@pytest.mark.parametrize("kw", [
    dict(kind="two-body", shape="gaussian", beta=0.0),
    dict(kind="two-body", shape="gaussian", beta=float("nan")),
    dict(kind="two-body", shape="cubic", beta=1.0),
    dict(kind="three-body", shape="gaussian", beta=1.0),
    dict(kind="two-body", shape="gaussian", beta=1.0, half_width=-1.0),
    dict(kind="two-body", shape="gaussian", beta=1.0, shift_override=1.0),
    dict(kind="two-body", shape="gaussian", beta=1.0, kappa_override=(1.0, 2.0)),
])
def test_invalid_specs(kw):
    with pytest.raises(InvalidSpec):
        ProblemSpec(**kw)


@pytest.mark.parametrize("shape", ["gaussian", "lorentzian-cubed"])
def test_potential_invariants_random_points(shape):
    rng = np.random.default_rng(11)
    two = ProblemSpec("two-body", shape, 5.0)
    three = ProblemSpec("three-body", shape, 0.34, mass_ratio=20)
    x, y = rng.uniform(-20, 20, (2, 10_000))
    assert effective_gamma(two, x).min() > 0
    assert effective_gamma(three, x, y).min() > 0
    np.testing.assert_array_equal(gamma_attractive(two, x), gamma_attractive(two, -x))
    np.testing.assert_array_equal(gamma_attractive(three, x, y), gamma_attractive(three, x, -y))


@pytest.mark.parametrize("t", [0.0, -0.47738997738, 1e-300, 123.25, -7.5])
def test_unshift_exact(t):
    s = ProblemSpec("two-body", "gaussian", 1.0)
    assert unshift(s, shift_of(s) + t) == (shift_of(s) + t) - shift_of(s)
    assert unshift(s, 2.0) == 0.0


@pytest.mark.parametrize("r,expected", [
    (1, (Fraction(3, 4), Fraction(1))),
    (20, (Fraction(41, 42), Fraction(2, 21))),
    (1000, (Fraction(2001, 2002), Fraction(2, 1001))),
])
def test_mass_coefficients_symbolic(r, expected):
    assert mass_coefficients(r) == expected
    assert all(k > 0 for k in kappa_of(ProblemSpec("three-body", "gaussian", 1.0, mass_ratio=r)))
