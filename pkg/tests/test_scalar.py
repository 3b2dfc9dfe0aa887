from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wresidue.scalar import Q, ScalarExpr, declare, parse_scalar, substitute, var

declare("ta")
declare("tb")
declare("tc", "odd")

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)
gauss = st.builds(Q, fracs, fracs)
names = st.sampled_from(["ta", "tb", "tc"])


@st.composite
def exprs(draw):
    out = ScalarExpr.const(draw(gauss))
    for _ in range(draw(st.integers(0, 3))):
        term = ScalarExpr.const(draw(gauss))
        for _ in range(draw(st.integers(0, 3))):
            term = term * var(draw(names))
        out = out + term
    return out


def test_gaussian_rational_arithmetic():
    i = Q(0, 1)
    assert i * i == Q(-1)
    assert Q(1, 1) / Q(1, -1) == i
    assert Q(Fraction(1, 2)) + Q(Fraction(1, 2)) == Q(1)
    assert complex(Q(Fraction(3, 4), -2)) == complex(0.75, -2)


def test_integral_parts_stay_ints():
    q = Q(Fraction(4, 2), Fraction(6, 3))
    assert type(q.re) is int and type(q.im) is int


@given(exprs(), exprs(), exprs())
@settings(max_examples=150, deadline=None)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@given(exprs())
@settings(max_examples=150, deadline=None)
def test_render_parse_round_trip(a):
    assert parse_scalar(a.render()) == a


@given(exprs(), exprs())
@settings(max_examples=100, deadline=None)
def test_derivative_product_rule(a, b):
    assert (a * b).diff("ta") == a.diff("ta") * b + a * b.diff("ta")


def test_parity_split():
    e = var("tc") * var("ta") + var("tc", 2) + ScalarExpr.const(3)
    even, odd = e.parity_split()
    assert odd == var("tc") * var("ta")
    assert even == var("tc", 2) + ScalarExpr.const(3)


def test_substitute_and_evaluate():
    e = var("ta", 2) + var("tb")
    s = substitute(e, {"ta": var("tb") + ScalarExpr.const(1)})
    assert s == var("tb", 2) + var("tb").scale(3) + ScalarExpr.const(1)
    assert e.evaluate({"ta": 2, "tb": 1j}) == 4 + 1j


def test_unknown_name_is_rejected():
    with pytest.raises(KeyError):
        var("never_declared_name")
