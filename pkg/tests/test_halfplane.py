import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wresidue.halfplane import (NotIntegrable, PoleError, contour_gamma_plus, partial_fractions,
                                pi_minus_complement, pi_plus, real_line_integral)
from wresidue.oracle import numeric_line_integral
from wresidue.scalar import Q, ScalarExpr, var
from wresidue.verify import random_integrable


def c(re, im=0):
    return ScalarExpr.const(Q(re, im))


def _num(e):
    return e.evaluate({})


def value(e):
    return 0j if e is None else e.evaluate({"pi": math.pi})


def test_basic_integral():
    assert real_line_integral(partial_fractions({0: c(1)}, 1, 1)) == var("pi")


def test_printed_example():
    r = partial_fractions({3: c(-2), 1: c(-2)}, 4, 2)
    assert real_line_integral(r) == var("pi") * c(0, Fraction(-1, 2))


def test_partial_fractions_reproduce_values():
    r = partial_fractions({2: c(1, 2), 0: c(3)}, 2, 1)
    for x in (0.3, -1.7, 4.0):
        direct = ((1 + 2j) * x ** 2 + 3) / ((x - 1j) ** 2 * (x + 1j))
        assert abs(r.evaluate(x, _num) - direct) < 1e-12


def test_projections_split_the_function():
    r = partial_fractions({4: c(1), 1: c(0, 1)}, 2, 2)
    assert pi_plus(r) + pi_minus_complement(r) == r
    assert pi_plus(pi_plus(r)) == pi_plus(r)


def test_not_integrable():
    with pytest.raises(NotIntegrable):
        real_line_integral(partial_fractions({1: c(1)}, 1, 1))
    with pytest.raises(PoleError):
        partial_fractions({0: c(1)}, -1, 1)


def test_lower_poles_only_integrate_to_zero():
    r = partial_fractions({0: c(1)}, 0, 3)
    assert real_line_integral(r) is None
    assert abs(numeric_line_integral(r, {}).value) < 1e-12


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60, deadline=None)
def test_residues_match_quadrature(seed):
    r = random_integrable(np.random.default_rng(seed))
    exact = value(real_line_integral(r))
    num = numeric_line_integral(r, {}).value
    assert abs(exact - num) <= 1e-10 * max(1.0, abs(exact))


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=40, deadline=None)
def test_derivative_matches_finite_difference(seed):
    r = random_integrable(np.random.default_rng(seed))
    d = r.derivative()
    x, h = 0.37, 1e-6
    fd = (r.evaluate(x + h, _num) - r.evaluate(x - h, _num)) / (2 * h)
    assert abs(d.evaluate(x, _num) - fd) < 1e-5 * max(1.0, abs(fd))


def test_contour_is_two_pi_i_residue():
    r = partial_fractions({0: c(1)}, 2, 0)
    assert contour_gamma_plus(r) is None or contour_gamma_plus(r).is_zero()
