from fractions import Fraction

import numpy as np
import pytest

from k3satotate.laurent import LaurentPoly


def z(i, n=2, power=1):
    return LaurentPoly.variable(n, i, power)


def test_no_zero_coefficients():
    p = z(0) - z(0)
    assert len(p) == 0
    assert p == 0
    assert LaurentPoly(1, {(3,): 0}).terms == {}


def test_constant_term_of_product():
    # (z + 1/z)^2 = z^2 + 2 + z^-2
    s = z(0, 1) + z(0, 1, -1)
    assert (s * s).constant_term() == 2
    assert (s**4).constant_term() == 6


def test_exact_rationals():
    p = LaurentPoly.constant(1, Fraction(1, 3)) * 3
    assert p.constant_term() == 1
    assert isinstance((p * Fraction(1, 7)).constant_term(), Fraction)


def test_inverted_and_signs():
    p = z(0) * 2 + z(1, power=-3)
    assert p.inverted().coefficient((-1, 0)) == 2
    assert p.inverted().coefficient((0, 3)) == 1
    q = p.substitute_signs((-1, 1))
    assert q.coefficient((-1, 0)) == 2
    assert q.coefficient((0, -3)) == 1


def test_on_torus_is_real_part():
    p = (z(0) + z(0, power=-1)) * (z(1) + 1)
    theta = np.array([[0.3, 1.1], [2.0, -0.4]])
    expect = 2 * np.cos(theta[:, 0]) * (np.exp(1j * theta[:, 1]) + 1)
    assert np.allclose(p.on_torus(theta), expect.real)


def test_wrong_arity():
    with pytest.raises(ValueError):
        LaurentPoly(2, {(1,): 1})
