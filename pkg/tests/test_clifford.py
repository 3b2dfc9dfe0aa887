from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wresidue.clifford import CliffordAlgebra, UndeclaredPairing, cliff_trace
from wresidue.geometry import BoundaryContext
from wresidue.oracle import NumericAssignment, build_gamma_rep, numeric_trace
from wresidue.scalar import ScalarExpr
from wresidue.verify import printed_trace_identities

NAMES = ["a", "b", "c"]
REP = build_gamma_rep(4)


def _algebra(vecs):
    pair = {(p, q): sum((x * y for x, y in zip(vecs[p], vecs[q])), Fraction(0)) for p in vecs for q in vecs}
    return CliffordAlgebra(list(vecs), lambda p, q: ScalarExpr.const(pair[(p, q)]))


small = st.fractions(min_value=-3, max_value=3, max_denominator=4)
vectors = st.fixed_dictionaries({k: st.lists(small, min_size=4, max_size=4) for k in NAMES})
words = st.lists(st.sampled_from(NAMES), max_size=6)


@pytest.mark.parametrize("label,expr,want", printed_trace_identities(BoundaryContext()),
                         ids=lambda v: v if isinstance(v, str) else "")
def test_printed_identity(label, expr, want):
    assert expr.trace() == want


def test_square_is_minus_norm():
    alg = _algebra({"a": [Fraction(1), Fraction(2), 0, 0]})
    assert alg.c("a") * alg.c("a") == alg.one(ScalarExpr.const(-5))


@given(vectors, words)
@settings(max_examples=200, deadline=None)
def test_wick_trace_matches_matrices(vecs, word):
    alg = _algebra(vecs)
    e = alg.one()
    for k in word:
        e = e * alg.c(k)
    a = NumericAssignment({k: [float(x) for x in v] for k, v in vecs.items()})
    assert abs(complex(cliff_trace(e).evaluate({})) - numeric_trace(e, a, REP)) <= 1e-10


@given(vectors, words, words)
@settings(max_examples=100, deadline=None)
def test_trace_is_cyclic(vecs, u, v):
    alg = _algebra(vecs)
    x = alg.one()
    y = alg.one()
    for k in u:
        x = x * alg.c(k)
    for k in v:
        y = y * alg.c(k)
    assert (x * y).trace() == (y * x).trace()


@given(vectors, words)
@settings(max_examples=100, deadline=None)
def test_odd_words_have_zero_trace(vecs, word):
    if len(word) % 2 == 0:
        word = word + ["a"]
    alg = _algebra(vecs)
    e = alg.one()
    for k in word:
        e = e * alg.c(k)
    assert e.trace().is_zero()


def test_normal_form_is_canonical():
    alg = _algebra({"a": [1, 0, 0, 0], "b": [0, 1, 0, 0]})
    ab = alg.c("a") * alg.c("b")
    assert alg.c("b") * alg.c("a") == -ab


def test_missing_pairing_raises():
    alg = CliffordAlgebra(["p", "q"], {("p", "p"): 1, ("q", "q"): 1})
    with pytest.raises(UndeclaredPairing):
        (alg.c("p") * alg.c("q") * alg.c("p")).trace()
