"""Acceptance criteria, one test and one summary line each.

Tolerances and sample counts are pinned here.  Every test records a
``CRITERION k: PASS|FAIL`` line; the lines are printed at the end of the
pytest session (see ``conftest.py``) and when the module is run directly.
"""

import subprocess
import sys
import time
from fractions import Fraction


from wresidue import fixtures, oracle
from wresidue.boundary import PRINTED_PHI, phi_total
from wresidue.cosphere import interior_density
from wresidue.geometry import BoundaryContext, InteriorContext
from wresidue.halfplane import pi_plus
from wresidue.scalar import ScalarExpr, var
from wresidue.symbols import build_inverse_low_orders
from wresidue.verify import (VerifyConfig, block_engine_value, case_integrand_errors, identity_check,
                             m8m9_oracle, moment_indices, printed_trace_identities, random_word_errors,
                             run_verify, sigma_checks, xn_block_quadrature, _moment_value)

WORD_TOL = 1e-10
CASE_TOL = 1e-9
BLOCK_REL_TOL = 1e-3
MC_SAMPLES = 10 ** 7
SEED = oracle.DEFAULT_SEED
CLIFFORD_SECONDS = 5
PARAMETRIX_SECONDS = 30
MOMENT_SECONDS = 60
VERIFY_SECONDS = 60

RESULTS: dict = {}
PI_OM = var("pi") * var("Omega3")
PI2 = var("pi", 2)


def record(k: int, parts: list) -> bool:
    """Store ``[(label, ok), ...]`` for criterion ``k`` and return the overall verdict."""
    ok = all(p for _, p in parts)
    failed = [label for label, p in parts if not p]
    measured = [label for label, _ in parts if any(k in label for k in ("(max", "(gap", "(outside", "runtime", "wall time"))]
    detail = "; ".join(measured) if ok else "failed: " + "; ".join(failed)
    if ok and not detail:
        detail = f"{len(parts)} sub-checks hold"
    RESULTS[k] = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} ({detail})"
    return ok


def test_criterion_1_clifford_traces():
    t0 = time.perf_counter()
    ctx = BoundaryContext()
    parts = [(f"identity {label}", expr.trace() == want) for label, expr, want in printed_trace_identities(ctx)]
    errs = random_word_errors(1000, SEED)
    parts.append((f"1000 random words within {WORD_TOL} (max {max(errs):.1e})", max(errs) <= WORD_TOL))
    elapsed = time.perf_counter() - t0
    parts.append((f"runtime {elapsed:.1f}s < {CLIFFORD_SECONDS}s", elapsed < CLIFFORD_SECONDS))
    assert record(1, parts)


def test_criterion_2_parametrix():
    t0 = time.perf_counter()
    ctx = InteriorContext()
    parts = []
    for kind in "AB":
        for order, ok in identity_check(kind, ctx).items():
            parts.append((f"{kind} composition identity in order {order}", ok))
        sig = sigma_checks(kind, ctx)
        parts.append((f"{kind} sigma-2 matches print", sig["sigma-2"]))
        parts.append((f"{kind} sigma-3 matches print", sig["sigma-3"]))
        parts.append((f"{kind} sigma-4 gravity words match the N list", sig["sigma-4 gravity"]))
        lists = "M" if kind == "A" else "R"
        parts.append((f"{kind} sigma-4 perturbation words match the printed {lists} list",
                      sig["sigma-4 perturbation"]))
    elapsed = time.perf_counter() - t0
    parts.append((f"runtime {elapsed:.1f}s < {PARAMETRIX_SECONDS}s", elapsed < PARAMETRIX_SECONDS))
    assert record(2, parts)


def test_criterion_3_half_plane():
    bctx = BoundaryContext()
    printed = {i.target: i.value for i in fixtures.boundary_intermediates("A", bctx)}["pi+sigma-1"]
    engine = pi_plus(build_inverse_low_orders("A", bctx)[-1].rational())
    errs = case_integrand_errors(SEED)
    worst = max(e for _, e in errs)
    parts = [("pi+ sigma_-1 equals the printed projection", engine == printed),
             (f"ten case integrals within {CASE_TOL} of quadrature (max {worst:.1e})",
              len(errs) == 10 and worst <= CASE_TOL)]
    assert record(3, parts)


def test_criterion_4_boundary_a():
    rep = phi_total("A")
    parts = [(f"Phi_{c.case.case_id}", c.density == PRINTED_PHI["A"][c.case.case_id][0]) for c in rep.cases]
    parts.append(("total is exactly 0", rep.vanishes))
    assert record(4, parts)


def test_criterion_5_boundary_b():
    pa, pb = phi_total("A"), phi_total("B")
    parts = [(f"case {cid} equals operator A", pb.case(cid).density == pa.case(cid).density)
             for cid in ("I", "II", "III")]
    h = PI_OM.scale(Fraction(9, 8))
    parts.append(("h' blocks are +-9/8 pi h' Omega3",
                  pb.case("IV").density.coefficient("h'") == h and pb.case("V").density.coefficient("h'") == -h))
    x4 = pb.case("IV").density.coefficient("X_n")
    x5 = pb.case("V").density.coefficient("X_n")
    parts.append(("X_n blocks are exact negatives", not x4.is_zero() and (x4 + x5).is_zero()))
    gap = xn_block_quadrature("B", SEED)
    parts.append((f"block values match quadrature within {CASE_TOL} (max {gap:.1e})", gap <= CASE_TOL))
    parts.append(("total is exactly 0", pb.vanishes))
    assert record(5, parts)


def test_criterion_6_interior_b():
    res = interior_density("B")
    theorem, _ = fixtures.PRINTED_THEOREMS["B"]
    parts = [("density equals 4(-4 pi^2 |X|^2 + 3 pi^2 div X) + s/3",
              res.perturbation == theorem and res.total.coefficient("s") == ScalarExpr.const(Fraction(1, 3)))]
    for term in fixtures.printed_terms("B", group="P"):
        parts.append((f"{term.term_id} reproduces the printed value", res.per_term[term.term_id] == term.paper_value))
    assert record(6, parts)


def test_criterion_7_interior_a():
    res = interior_density("A")
    engine = block_engine_value(res)
    est = m8m9_oracle(MC_SAMPLES, SEED)
    rel = abs(est.estimate - engine) / abs(engine)
    ids = {d.term_id for d in res.discrepancies}
    loose = run_verify("theorems", VerifyConfig(mc_samples=10 ** 5, seed=SEED))
    strict = run_verify("theorems", VerifyConfig(mc_samples=10 ** 5, seed=SEED, strict_paper=True))
    parts = [
        ("div(fX) coefficient is 8 pi^2", res.total.coefficient("div(fX)") == PI2.scale(8)),
        ("s coefficient is 1/3", res.total.coefficient("s") == ScalarExpr.const(Fraction(1, 3))),
        ("M3 + M10 cancel", (res.per_term["M3"] + res.per_term["M10"]).is_zero()),
        (f"M8+M9 within {BLOCK_REL_TOL} of Monte-Carlo at {MC_SAMPLES} samples (gap {rel:.1e})",
         rel <= BLOCK_REL_TOL),
        ("discrepancy record for the printed |X||df| combination", "M8+M9" in ids and "theorem-A" in ids),
        ("theorem suite passes by default and fails under --strict-paper", loose.ok and not strict.ok),
    ]
    assert record(7, parts)


def test_criterion_8_moments():
    t0 = time.perf_counter()
    alphas = moment_indices()
    ests = oracle.mc_sphere_moments(alphas, 4, MC_SAMPLES, SEED)
    outside = [a for a, e in zip(alphas, ests) if not e.within(_moment_value(a), 3.0)]
    elapsed = time.perf_counter() - t0
    parts = [(f"{len(alphas)} moments within 3 sigma at {MC_SAMPLES} samples (outside: {outside})", not outside),
             (f"runtime {elapsed:.1f}s < {MOMENT_SECONDS}s", elapsed < MOMENT_SECONDS)]
    assert record(8, parts)


def test_criterion_9_full_verify():
    cmd = [sys.executable, "-m", "wresidue", "verify", "--suite", "all"]
    t0 = time.perf_counter()
    first = subprocess.run(cmd, capture_output=True)
    elapsed = time.perf_counter() - t0
    second = subprocess.run(cmd, capture_output=True)
    parts = [("verify --suite all exits 0", first.returncode == 0),
             (f"wall time {elapsed:.1f}s < {VERIFY_SECONDS}s", elapsed < VERIFY_SECONDS),
             ("byte-identical output on a second run", first.stdout == second.stdout)]
    assert record(9, parts)


def summary_lines() -> list[str]:
    return [RESULTS[k] for k in sorted(RESULTS)]


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
