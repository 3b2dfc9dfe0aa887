from fractions import Fraction

import pytest

from wresidue.boundary import (PRINTED_PHI, OddTermSurvived, check_intermediates, enumerate_cases,
                               sigma_minus2_split, split_total, trace_xi_prime)
from wresidue.halfplane import pi_plus
from wresidue.scalar import var
from wresidue.symbols import build_inverse_low_orders


def test_case_enumeration():
    got = [(c.case_id, c.r, c.l, c.k, c.j, c.alpha) for c in enumerate_cases(4)]
    assert got == [("I", -1, -1, 0, 0, 1), ("II", -1, -1, 0, 1, 0), ("III", -1, -1, 1, 0, 0),
                   ("IV", -2, -1, 0, 0, 0), ("V", -1, -2, 0, 0, 0)]


@pytest.mark.parametrize("kind", "AB")
def test_split_recombines(kind, bctx):
    s2 = build_inverse_low_orders(kind, bctx)[-2]
    assert split_total(kind, bctx) == pi_plus(s2.rational())


def test_blocks_per_kind(bctx):
    assert set(sigma_minus2_split("A", bctx)) == {"C1", "C2", "C3"}
    assert set(sigma_minus2_split("B", bctx)) == {"C1", "C2", "C3", "C4"}


@pytest.mark.parametrize("kind", "AB")
def test_case_values_match_print(kind, phi):
    for c in phi[kind].cases:
        assert c.density == PRINTED_PHI[kind][c.case.case_id][0], c.case.case_id
    assert phi[kind].vanishes


def test_operator_b_block_split(phi):
    pi_om = var("pi") * var("Omega3")
    iv = phi["B"].case("IV").blocks
    assert iv["C4"]["value"].coefficient("X_n") == pi_om.scale(Fraction(-1, 2))
    assert iv["C3"]["value"].coefficient("X_n") == pi_om
    v = phi["B"].case("V").blocks
    assert v["C4"]["value"].coefficient("X_n") == pi_om.scale(Fraction(1, 2))


def test_xi_prime_trace_drops_odd_terms(bctx):
    e = bctx.gXxi * bctx.Xn + bctx.hp
    assert trace_xi_prime(bctx, e) == bctx.hp * var("Omega3")
    with pytest.raises(OddTermSurvived):
        trace_xi_prime(bctx, bctx.gXxi * bctx.gXxi)


def test_intermediate_comparison_shape():
    rows = check_intermediates("A")
    ids = {r["term_id"] for r in rows}
    assert {"pi+sigma-1", "C1", "C3", "trC1"} <= ids
    mism = {r["term_id"] for r in rows if not r["match"]}
    assert "pi+sigma-1" not in mism and "C3" in mism


def test_report_json(phi):
    js = phi["B"].to_json()
    assert js["vanishes"] and [c["id"] for c in js["cases"]] == ["I", "II", "III", "IV", "V"]
    assert js["discrepancies"] == []
    assert phi["B"].dumps() == phi["B"].dumps()
