from fractions import Fraction

import pytest

from wresidue.cosphere import (DISCREPANCY_SCHEMA, DensityExpr, integrate_cosphere, sphere_moment,
                               vol_substitution)
from wresidue.fixtures import PRINTED_THEOREMS
from wresidue.scalar import ScalarExpr, var

PI2 = var("pi", 2)


@pytest.mark.parametrize("alpha,coef", [((4,), Fraction(1, 4)), ((2, 2), Fraction(1, 12)),
                                         ((2,), Fraction(1, 2)), ((), 2), ((0, 0, 0, 6), Fraction(5, 32))])
def test_even_moments(alpha, coef):
    assert vol_substitution(sphere_moment(alpha)) == PI2.scale(coef)


@pytest.mark.parametrize("alpha", [(1,), (2, 1), (0, 0, 0, 3), (1, 1, 1, 1)])
def test_odd_moments_vanish(alpha):
    assert sphere_moment(alpha).is_zero()


def test_moment_rejects_bad_index():
    with pytest.raises(ValueError):
        sphere_moment((1, 0, 0, 0, 0))
    with pytest.raises(ValueError):
        sphere_moment((-2,))


def test_xi_norm_integrates_to_volume(ictx):
    xi = ictx.xi_sq()
    assert vol_substitution(integrate_cosphere(xi, ictx.xi_names)) == PI2.scale(2)


def test_operator_b_density(interior):
    res = interior["B"]
    assert res.perturbation == PRINTED_THEOREMS["B"][0]
    assert res.total.coefficient("s") == ScalarExpr.const(Fraction(1, 3))
    assert res.matches_paper


def test_operator_a_density(interior):
    res = interior["A"]
    assert res.total.coefficient("div(fX)") == PI2.scale(8)
    assert res.total.coefficient("X(df)") == PI2.scale(8)
    assert res.total.coefficient("|X||df|").is_zero()
    assert not res.matches_paper


def test_gravity_block_matches_printed_list(interior):
    assert interior["A"].gravity_block_match and interior["B"].gravity_block_match


def test_pieces_sum_to_generated(interior):
    for res in interior.values():
        total = DensityExpr({})
        for engine, _ in res.pieces.values():
            total = total + engine
        assert total == res.generated


def test_discrepancy_records_follow_schema(interior):
    required = set(DISCREPANCY_SCHEMA["required"])
    for res in interior.values():
        for d in res.discrepancies:
            js = d.to_json()
            assert required <= set(js) and all(isinstance(js[k], str) for k in required)


def test_printed_block_record_for_m8_m9(interior):
    ids = {d.term_id for d in interior["A"].discrepancies}
    assert "M8+M9" in ids and "theorem-A" in ids
    assert "theorem-B" not in {d.term_id for d in interior["B"].discrepancies}


def test_density_json_is_deterministic(interior):
    a = interior["A"].total.dumps()
    assert a == interior["A"].total.dumps()
    assert '"measure": "dVol_M"' in a
