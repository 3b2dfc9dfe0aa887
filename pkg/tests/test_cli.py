import json

import pytest

from wresidue.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_interior_b_json(capsys):
    code, out, _ = run(capsys, "interior", "--operator", "B", "--json")
    data = json.loads(out)
    assert code == EXIT_OK and data["matches_paper"] is True
    assert data["density"]["terms"] == {"div(X)": "12*pi^2", "s": "1/3", "|X|^2": "-16*pi^2"}


def test_interior_a_strict(capsys):
    assert run(capsys, "interior", "--operator", "A")[0] == EXIT_OK
    assert run(capsys, "interior", "--operator", "A", "--strict-paper")[0] == EXIT_FAIL


def test_boundary_text(capsys):
    code, out, _ = run(capsys, "boundary", "--operator", "A")
    assert code == EXIT_OK
    assert out.count("Phi_") == 5 and "total: 0 dx'" in out


def test_boundary_single_case(capsys):
    code, out, _ = run(capsys, "boundary", "--operator", "B", "--case", "IV", "--json")
    data = json.loads(out)
    assert code == EXIT_OK and [c["id"] for c in data["cases"]] == ["IV"]
    assert set(data["cases"][0]["blocks"]) == {"C1", "C2", "C3", "C4"}


def test_dump_symbol(capsys):
    code, out, _ = run(capsys, "dump-symbol", "--operator", "A", "--order", "-3")
    assert code == EXIT_OK
    assert "record sigma-3[printed] order=-3" in out and "record sigma-3[generated]" in out


@pytest.mark.parametrize("argv", [["bogus"], ["interior", "--operator", "C"], ["verify", "--suite", "nope"],
                                  ["verify", "--mc-samples", "0"], ["dump-symbol", "--order", "-7"], []])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_environment_prefix(capsys, monkeypatch):
    monkeypatch.setenv("WRESIDUE_OPERATOR", "B")
    monkeypatch.setenv("WRESIDUE_JSON", "1")
    code, out, _ = run(capsys, "interior")
    assert code == EXIT_OK and json.loads(out)["operator"] == "B"
    # flags win over the environment
    code, out, _ = run(capsys, "interior", "--operator", "A")
    assert json.loads(out)["operator"] == "A"
    monkeypatch.setenv("WRESIDUE_SEED", "x")
    assert run(capsys, "verify", "--suite", "halfplane")[0] == EXIT_USAGE


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--suite", "halfplane")
    second = run(capsys, "verify", "--suite", "halfplane")
    assert first == second and first[0] == EXIT_OK


def test_verify_reduced_precision_flag(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "moments", "--mc-samples", "10000", "--json")
    data = json.loads(out)
    assert code == EXIT_OK
    assert any(c.get("reduced_precision") for c in data["checks"])
