import pytest

from wresidue import fixtures
from wresidue.cosphere import _same_component


@pytest.mark.parametrize("kind", "AB")
def test_records_round_trip(kind, ictx):
    text = fixtures.dump_records(kind, ictx)
    parsed = fixtures.parse_records(text, ictx)
    base = fixtures.base_values(ictx)
    for term in fixtures.printed_terms(kind):
        sym = term.symbol(ictx, base)
        for block in (0, 1):
            assert _same_component(ictx, sym, parsed[term.term_id], -4, block), term.term_id


def test_term_catalogue():
    a = {t.term_id for t in fixtures.printed_terms("A")}
    b = {t.term_id for t in fixtures.printed_terms("B")}
    assert {f"M{k}" for k in range(1, 11)} <= a and {f"R{k}" for k in range(1, 9)} <= b
    assert {f"N{k}" for k in range(1, 11)} <= a & b


def test_piece_groups_cover_every_perturbation_term():
    for kind in "AB":
        grouped = sorted(i for ids in fixtures.PIECE_GROUPS[kind].values() for i in ids)
        listed = sorted(t.term_id for t in fixtures.printed_terms(kind, group="P"))
        assert grouped == listed


def test_render_is_deterministic(ictx):
    assert fixtures.dump_records("A", ictx) == fixtures.dump_records("A", ictx)
