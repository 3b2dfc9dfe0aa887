import math

import numpy as np
import pytest

from wresidue import oracle
from wresidue.halfplane import NotIntegrable, partial_fractions
from wresidue.scalar import ScalarExpr


def test_gamma_relations():
    rep = oracle.build_gamma_rep(4)
    g = rep.matrices
    eye = np.eye(4)
    assert np.allclose(g[0] @ g[0], -eye, atol=1e-14)
    assert np.allclose(g[0] @ g[1] + g[1] @ g[0], 0, atol=1e-14)
    assert abs(np.trace(g[0] @ g[1] @ g[0] @ g[1]) + 4) < 1e-14
    assert rep.anticommutator_error() <= 1e-14
    with pytest.raises(ValueError):
        oracle.build_gamma_rep(6)


def test_boundary_trace_examples(bctx):
    a = oracle.boundary_assignment(np.random.default_rng(7), hprime=0.4)
    alg = bctx.alg
    xi, dxn, X = alg.c("xi'"), alg.c("dxn"), alg.c("X")
    assert abs(oracle.numeric_trace(xi * X * xi * dxn, a) + 4 * a.scalars["Xn"]) < 1e-12
    assert abs(oracle.numeric_trace(dxn * dxn, a) + 4) < 1e-12
    assert abs(oracle.numeric_trace(xi * X * dxn, a)) < 1e-12


def test_missing_covector(bctx):
    with pytest.raises(oracle.MissingAssignment):
        oracle.numeric_trace(bctx.alg.c("X"), oracle.NumericAssignment({}))


def test_moment_examples():
    m = oracle.mc_sphere_moment((2, 0, 0, 0), samples=200_000, seed=1)
    assert m.within(math.pi ** 2 / 2)
    assert oracle.mc_sphere_moment((1, 0, 0, 0), samples=200_000, seed=1).within(0.0)
    assert oracle.mc_sphere_moment((2, 2, 0, 0), samples=200_000, seed=1).within(math.pi ** 2 / 12)
    with pytest.raises(ValueError):
        oracle.mc_sphere_moment((2, 0, 0, 0), samples=100)


def test_moments_are_seeded():
    a = oracle.mc_sphere_moment((4, 0, 0, 0), samples=10_000, seed=3)
    b = oracle.mc_sphere_moment((4, 0, 0, 0), samples=10_000, seed=3)
    assert a == b


def test_line_integral_examples():
    one = ScalarExpr.const(1)
    got = oracle.numeric_line_integral(partial_fractions({0: one}, 1, 1), {})
    assert abs(got.value - math.pi) < 1e-10
    with pytest.raises(NotIntegrable):
        oracle.numeric_line_integral(partial_fractions({1: one}, 1, 1), {})


def test_block_oracle_small_run():
    est = oracle.mc_block_integral([(1.0, ("xi", "xi"))], {}, samples=20_000, seed=5)
    # tr[c(xi)^2] = -4 on the unit sphere, so the integral is -4 Vol(S^3) with no variance
    assert abs(est.estimate + 8 * math.pi ** 2) < 1e-9 and est.stderr < 1e-9
