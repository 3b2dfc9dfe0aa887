"""Verification suites comparing the symbolic engine with the numeric oracle and printed values.

Each suite returns a list of :class:`Check`.  A check either passes, fails, or
is a discrepancy: an engine value that differs from a printed value while the
engine's own consistency checks hold.  Discrepancies fail a run only in
strict mode.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import fixtures, oracle
from .boundary import check_intermediates, enumerate_cases, phi_total, sigma_minus2_blocks
from .clifford import CliffordAlgebra
from .cosphere import DensityExpr, _same_component, interior_density, sphere_moment, vol_substitution
from .geometry import DXN, WCOV, XI_PRIME, XVEC, BoundaryContext, InteriorContext
from .halfplane import XiNRational, partial_fractions, pi_plus, real_line_integral
from .scalar import Q, ScalarExpr, var
from .symbols import build_inverse_low_orders, build_square_symbol, compose, parametrix

__all__ = ["Check", "VerifyConfig", "VerifyReport", "SUITES", "run_verify"]

FULL_MC_SAMPLES = 10 ** 7
BLOCK_REL_TOL = 1e-3
BLOCK_X = (1.0, 2.0, 0.0, -1.0)
BLOCK_DF = (1.0, 1.0, 1.0, -1.0)


@dataclass
class Check:
    suite: str
    name: str
    status: str                 # "pass", "fail" or "discrepancy"
    detail: str = ""
    reduced_precision: bool = False
    record: dict | None = None

    def to_json(self) -> dict:
        out = {"suite": self.suite, "name": self.name, "status": self.status, "detail": self.detail}
        if self.reduced_precision:
            out["reduced_precision"] = True
        if self.record is not None:
            out["record"] = self.record
        return out


@dataclass
class VerifyConfig:
    mc_samples: int = 10 ** 6
    seed: int = oracle.DEFAULT_SEED
    strict_paper: bool = False


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    strict_paper: bool = False

    def failures(self) -> list:
        bad = {"fail", "discrepancy"} if self.strict_paper else {"fail"}
        return [c for c in self.checks if c.status in bad]

    @property
    def ok(self) -> bool:
        return not self.failures()

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "discrepancy": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def render(self) -> str:
        lines = []
        for c in self.checks:
            flag = " [reduced precision]" if c.reduced_precision else ""
            tail = f": {c.detail}" if c.detail else ""
            lines.append(f"{c.status.upper():11s} {c.suite}/{c.name}{flag}{tail}")
        n = self.counts()
        lines.append(f"{n['pass']} passed, {n['fail']} failed, {n['discrepancy']} discrepancies"
                     + (" (strict)" if self.strict_paper else ""))
        lines.append("OK" if self.ok else "FAILED")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"ok": self.ok, "strict_paper": self.strict_paper, "counts": self.counts(),
                "checks": [c.to_json() for c in self.checks]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _check(suite, name, ok: bool, detail="", **kw) -> Check:
    return Check(suite, name, "pass" if ok else "fail", detail, **kw)


def _num(x: complex) -> str:
    x = complex(x)
    if abs(x.imag) < 1e-300:
        return f"{x.real:.12g}"
    return f"{x.real:.12g}{x.imag:+.12g}i"


# -- clifford ------------------------------------------------------------------------

def printed_trace_identities(ctx: BoundaryContext | None = None) -> list[tuple[str, object, ScalarExpr]]:
    """The nine printed trace identities as (label, expression, expected value)."""
    ctx = ctx or BoundaryContext()
    a = ctx.alg
    xi, dxn, X, w = (a.c(k) for k in (XI_PRIME, DXN, XVEC, WCOV))
    # d_xn c(xi') is c(w) with g(w, xi') = h'/2 and g(w, dx_n) = 0
    four = ScalarExpr.const(4)
    return [
        ("tr[id]", a.one(), four),
        ("tr[c(xi')c(dxn)]", xi * dxn, ScalarExpr.const(0)),
        ("tr[c(dxn)^2]", dxn * dxn, -four),
        ("tr[c(xi')^2]", xi * xi, -four),
        ("tr[d_xn c(xi') c(dxn)]", w * dxn, ScalarExpr.const(0)),
        ("tr[d_xn c(xi') c(xi')]", w * xi, ctx.hp.scale(-2)),
        ("tr[c(xi')c(X)c(xi')c(dxn)]", xi * X * xi * dxn, ctx.Xn.scale(-4)),
        ("tr[c(xi')c(X)c(xi')c(xi')]", xi * X * xi * xi, ctx.gXxi.scale(4)),
        ("tr[c(dxn)c(X)c(dxn)c(dxn)]", dxn * X * dxn * dxn, ctx.Xn.scale(4)),
    ]


def random_word_errors(count: int = 1000, seed: int = oracle.DEFAULT_SEED, max_len: int = 6) -> list[float]:
    """Absolute differences between the Wick trace and the matrix trace on random words."""
    rng = np.random.default_rng(seed)
    names = [f"u{k}" for k in range(1, 6)]
    errors = []
    rep = oracle.build_gamma_rep(4)
    for _ in range(count):
        vecs = {k: oracle.exact_rational_vector(rng) for k in names}
        pair = {(p, q): sum((x * y for x, y in zip(vecs[p], vecs[q])), Fraction(0))
                for p in names for q in names}
        alg = CliffordAlgebra(names, lambda p, q, pair=pair: ScalarExpr.const(pair[(p, q)]))
        expr = alg.zero()
        for _ in range(int(rng.integers(1, 4))):
            word = [names[int(i)] for i in rng.integers(0, 5, size=int(rng.integers(0, max_len + 1)))]
            coeff = ScalarExpr.const(Q(int(rng.integers(-3, 4)), int(rng.integers(-3, 4))))
            term = alg.one(coeff)
            for k in word:
                term = term * alg.c(k)
            expr = expr + term
        exact = complex(expr.trace().evaluate({}))
        a = oracle.NumericAssignment({k: [float(x) for x in v] for k, v in vecs.items()})
        errors.append(abs(exact - oracle.numeric_trace(expr, a, rep)))
    return errors


def suite_clifford(cfg: VerifyConfig) -> list[Check]:
    out = []
    ctx = BoundaryContext()
    for label, expr, want in printed_trace_identities(ctx):
        got = expr.trace()
        out.append(_check("clifford", label, got == want, f"{got.render()} (expected {want.render()})"))
    # the same identities at random numeric data, through the matrix representation
    rng = np.random.default_rng(cfg.seed)
    rep = oracle.build_gamma_rep(4)
    worst = 0.0
    for _ in range(20):
        a = oracle.boundary_assignment(rng, hprime=float(rng.normal()), f=float(rng.normal()))
        for _, expr, want in printed_trace_identities(ctx):
            worst = max(worst, abs(oracle.numeric_trace(expr, a, rep) - a.value(want)))
    out.append(_check("clifford", "printed identities vs matrices", worst <= 1e-12, f"max error {worst:.1e}"))
    # [c(dxn), c(X)] relation: c(dxn)c(X) = -c(X)c(dxn) - 2 X_n
    a = ctx.alg
    lhs = a.c(DXN) * a.c(XVEC)
    rhs = -(a.c(XVEC) * a.c(DXN)) - a.one(ctx.Xn.scale(2))
    out.append(_check("clifford", "c(dxn)c(X) relation", lhs == rhs))
    errs = random_word_errors(1000, cfg.seed)
    out.append(_check("clifford", "1000 random words vs matrices", max(errs) <= 1e-10,
                      f"max error {max(errs):.1e}"))
    return out


# -- moments ---------------------------------------------------------------------------

def moment_indices(n: int = 4, degree: int = 6) -> list[tuple]:
    return [a for a in itertools.product(range(degree + 1), repeat=n) if sum(a) <= degree]


def _moment_value(alpha) -> float:
    return sphere_moment(alpha).evaluate({"pi": math.pi, "VolS3": 2 * math.pi ** 2}).real


def suite_moments(cfg: VerifyConfig) -> list[Check]:
    out = []
    pi2 = ScalarExpr.var("pi", 2)
    for alpha, want in (((4, 0, 0, 0), pi2.scale(Fraction(1, 4))), ((2, 2, 0, 0), pi2.scale(Fraction(1, 12))),
                        ((2, 0, 0, 0), pi2.scale(Fraction(1, 2))), ((1, 0, 0, 0), ScalarExpr.const(0))):
        got = vol_substitution(sphere_moment(alpha))
        out.append(_check("moments", f"exact xi^{alpha}", got == want, got.render()))
    alphas = moment_indices()
    ests = oracle.mc_sphere_moments(alphas, 4, cfg.mc_samples, cfg.seed)
    reduced = cfg.mc_samples < FULL_MC_SAMPLES
    worst, bad = 0.0, []
    for alpha, est in zip(alphas, ests):
        exact = _moment_value(alpha)
        z = abs(est.estimate - exact) / est.stderr if est.stderr else (0.0 if est.estimate == exact else math.inf)
        worst = max(worst, z)
        if z > 3:
            bad.append(alpha)
    out.append(_check("moments", f"{len(alphas)} moments of degree <= 6 vs Monte-Carlo", not bad,
                      f"worst {worst:.2f} sigma at {cfg.mc_samples} samples" + (f"; outside 3 sigma: {bad}" if bad else ""),
                      reduced_precision=reduced))
    return out


# -- half-plane ------------------------------------------------------------------------

def random_integrable(rng: np.random.Generator) -> XiNRational:
    up, down = int(rng.integers(0, 5)), int(rng.integers(0, 5))
    if up + down < 2:
        up += 2 - (up + down)
    top = up + down - 2
    num = {}
    for d in range(top + 1):
        num[d] = ScalarExpr.const(Q(Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5))),
                                    Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5)))))
    if all(c.is_zero() for c in num.values()):
        num[0] = ScalarExpr.const(1)
    return partial_fractions(num, up, down)


def _pi_value(e: ScalarExpr | None, extra=None) -> complex:
    if e is None:
        return 0j
    vals = {"pi": math.pi}
    vals.update(extra or {})
    return e.evaluate(vals)


def case_integrand_errors(seed: int = oracle.DEFAULT_SEED) -> list[tuple[str, float]]:
    """Residue value against quadrature for all ten boundary case integrands."""
    rng = np.random.default_rng(seed)
    out = []
    for kind in "AB":
        report = phi_total(kind)
        for c in report.cases:
            a = oracle.boundary_assignment(rng, hprime=float(rng.normal()), f=float(rng.normal()))
            if c.integrand.is_zero():
                out.append((f"{kind}-{c.case.case_id}", 0.0))
                continue
            exact = a.value(real_line_integral(c.integrand))
            num = oracle.numeric_line_integral(c.integrand, a).value
            out.append((f"{kind}-{c.case.case_id}", abs(exact - num) / max(1.0, abs(exact))))
    return out


def suite_halfplane(cfg: VerifyConfig) -> list[Check]:
    out = []
    bctx = BoundaryContext()
    printed = {i.target: i for i in fixtures.boundary_intermediates("A", bctx)}["pi+sigma-1"]
    got = pi_plus(build_inverse_low_orders("A", bctx)[-1].rational())
    out.append(_check("halfplane", "pi+ sigma_-1 vs printed", got == printed.value, got.render()))
    two = ScalarExpr.const(-2)
    ex = partial_fractions({3: two, 1: two}, 4, 2)
    val = real_line_integral(ex)
    want = var("pi") * ScalarExpr.const(Q(0, Fraction(-1, 2)))
    out.append(_check("halfplane", "int (-2x^3-2x)/((x-i)^4(x+i)^2)", val == want, val.render()))
    basic = real_line_integral(partial_fractions({0: ScalarExpr.const(1)}, 1, 1))
    out.append(_check("halfplane", "int 1/(1+x^2)", basic == var("pi"), basic.render()))
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(100):
        r = random_integrable(rng)
        exact = _pi_value(real_line_integral(r))
        num = oracle.numeric_line_integral(r, {}).value
        worst = max(worst, abs(exact - num) / max(abs(exact), 1e-300) if exact else abs(num))
    out.append(_check("halfplane", "100 random integrals vs quadrature", worst <= 1e-10,
                      f"max relative error {worst:.1e}"))
    errs = case_integrand_errors(cfg.seed)
    w = max(e for _, e in errs)
    out.append(_check("halfplane", "ten case integrands vs quadrature", w <= 1e-9, f"max error {w:.1e}"))
    return out


# -- parametrix ------------------------------------------------------------------------

def identity_check(kind, ctx: InteriorContext) -> dict:
    """``sigma(T^2) o parametrix`` in orders 0, -1, -2 at the base point."""
    sq = build_square_symbol(kind, ctx)
    r = compose(sq, parametrix(sq, 3), -2).at_base()
    n0, k0 = r.combined(0)
    return {0: (n0 - ctx.alg.one(ctx.xi_sq() ** k0)).is_zero(),
            -1: r.is_zero_component(-1), -2: r.is_zero_component(-2)}


def sigma_checks(kind, ctx: InteriorContext) -> dict:
    """Generated parametrix components against the printed ones.

    Keys: ``sigma-2``, ``sigma-3``, ``sigma-4 gravity`` and ``sigma-4 perturbation``.
    """
    sq = build_square_symbol(kind, ctx)
    par = parametrix(sq, ctx.n - 1).at_base()
    m2 = par.combined(-2)
    out = {"sigma-2": m2[0] == ctx.alg.one(ctx.xi_sq() ** (m2[1] - 1))}
    s3 = fixtures.sigma_minus3_printed(kind, ctx).at_base()
    out["sigma-3"] = (_same_component(ctx, par, s3, -3, 0) and _same_component(ctx, par, s3, -3, 1))
    base = fixtures.base_values(ctx)
    printed = None
    for term in fixtures.printed_terms(kind):
        sym = term.symbol(ctx, base)
        printed = sym if printed is None else printed + sym
    out["sigma-4 gravity"] = _same_component(ctx, par, printed, -4, 1)
    out["sigma-4 perturbation"] = _same_component(ctx, par, printed, -4, 0)
    return out


def suite_parametrix(cfg: VerifyConfig) -> list[Check]:
    out = []
    ctx = InteriorContext()
    for kind in "AB":
        ident = identity_check(kind, ctx)
        for order, ok in ident.items():
            out.append(_check("parametrix", f"{kind}: composition is identity in order {order}", ok))
        sig = sigma_checks(kind, ctx)
        lists = "N/M" if kind == "A" else "N/R"
        for key in ("sigma-2", "sigma-3", "sigma-4 gravity"):
            out.append(_check("parametrix", f"{kind}: {key} vs printed", sig[key]))
        if sig["sigma-4 perturbation"]:
            out.append(_check("parametrix", f"{kind}: sigma-4 perturbation vs printed {lists} list", True))
        else:
            out.append(Check("parametrix", f"{kind}: sigma-4 perturbation vs printed {lists} list", "discrepancy",
                             "generated order -4 differs from the printed term list; see piece records"))
    return out


# -- theorems --------------------------------------------------------------------------

def m8m9_oracle(samples: int, seed: int) -> oracle.MomentEstimate:
    """Monte-Carlo value of the M8+M9 block at fixed ``X``, ``df`` on the unit sphere."""
    est = oracle.mc_block_integral([(-1.0, ("xi", "X", "xi", "df")), (-1.0, ("X", "xi", "df", "xi"))],
                                   {"X": BLOCK_X, "df": BLOCK_DF}, samples, seed)
    return est


def block_engine_value(res) -> float:
    d = res.per_term["M8"] + res.per_term["M9"]
    vals = {"pi": math.pi}
    xdf = sum(x * y for x, y in zip(BLOCK_X, BLOCK_DF))
    total = 0.0
    for name, coeff in d.terms.items():
        if name != "X(df)":
            raise ValueError(f"unexpected basis element {name} in the M8+M9 block")
        total += coeff.evaluate(vals).real * xdf
    return total


def _records(suite, prefix, records) -> list[Check]:
    out = []
    for r in records:
        rec = r.to_json() if hasattr(r, "to_json") else r
        out.append(Check(suite, f"{prefix}{rec['term_id']}", "discrepancy",
                         f"engine {rec['engine_value']} | printed {rec['paper_value']}", record=rec))
    return out


def xn_block_values(kind="B") -> dict:
    """``X_n`` parts of cases IV and V, split by ``sigma_-2`` block."""
    report = phi_total(kind)
    out = {}
    for cid in ("IV", "V"):
        blocks = report.case(cid).blocks
        out[cid] = {lab: v["value"] for lab, v in blocks.items()}
    return out


def xn_block_quadrature(kind="B", seed: int = oracle.DEFAULT_SEED) -> float:
    """Worst gap between the residue value and quadrature over the block integrands of IV and V."""
    from .boundary import _apply_coefficient, _finish, _trace_rational
    ctx = BoundaryContext()
    sigma = build_inverse_low_orders(kind, ctx)
    s1 = sigma[-1].rational()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in enumerate_cases(ctx.n):
        if -2 not in (case.r, case.l):
            continue
        for coef, block in sigma_minus2_blocks(kind, ctx).values():
            prod = (pi_plus(block.rational()) * s1.derivative() if case.r == -2
                    else pi_plus(s1) * block.rational().derivative())
            integrand, value = _finish(ctx, _trace_rational(_apply_coefficient(ctx, coef, prod)), case.prefactor)
            a = oracle.boundary_assignment(rng, hprime=float(rng.normal()), f=float(rng.normal()))
            if integrand.is_zero():
                continue
            exact = a.value(value)
            num = oracle.numeric_line_integral(integrand, a).value
            worst = max(worst, abs(exact - num) / max(1.0, abs(exact)))
    return worst


def suite_theorems(cfg: VerifyConfig) -> list[Check]:
    out = []
    pi2 = ScalarExpr.var("pi", 2)
    ctx = InteriorContext()

    # operator B interior
    rb = interior_density("B", ctx)
    theorem_b, _ = fixtures.PRINTED_THEOREMS["B"]
    out.append(_check("theorems", "B interior: perturbation density equals the printed theorem",
                      rb.perturbation == theorem_b, rb.perturbation.render()))
    out.append(_check("theorems", "B interior: s coefficient 1/3",
                      rb.total.coefficient("s") == ScalarExpr.const(Fraction(1, 3))))
    for term in fixtures.printed_terms("B", group="P"):
        want = term.paper_value if term.paper_value is not None else None
        got = rb.per_term[term.term_id]
        if want is not None:
            out.append(_check("theorems", f"B interior: {term.term_id}", got == want, got.render()))
    out.extend(_records("theorems", "B interior record ", rb.discrepancies))

    # operator A interior
    ra = interior_density("A", ctx)
    out.append(_check("theorems", "A interior: div(fX) coefficient 8 pi^2",
                      ra.total.coefficient("div(fX)") == pi2.scale(8)))
    out.append(_check("theorems", "A interior: s coefficient 1/3",
                      ra.total.coefficient("s") == ScalarExpr.const(Fraction(1, 3))))
    m3m10 = ra.per_term["M3"] + ra.per_term["M10"]
    out.append(_check("theorems", "A interior: M3 + M10 cancel", m3m10.is_zero(), m3m10.render()))
    engine = block_engine_value(ra)
    est = m8m9_oracle(cfg.mc_samples, cfg.seed)
    rel = abs(est.estimate - engine) / abs(engine)
    reduced = cfg.mc_samples < FULL_MC_SAMPLES
    tol = BLOCK_REL_TOL if not reduced else max(BLOCK_REL_TOL, 3 * est.stderr / abs(engine))
    out.append(_check("theorems", "A interior: M8+M9 block vs Monte-Carlo", rel <= tol,
                      f"engine {engine:.6f}, oracle {est.estimate:.6f} +- {est.stderr:.6f}, "
                      f"relative gap {rel:.1e} (tolerance {tol:.1e})", reduced_precision=reduced))
    out.extend(_records("theorems", "A interior record ", ra.discrepancies))

    # boundary
    pa, pb = phi_total("A"), phi_total("B")
    from .boundary import PRINTED_PHI
    for c in pa.cases:
        want, _ = PRINTED_PHI["A"][c.case.case_id]
        out.append(_check("theorems", f"A boundary: Phi_{c.case.case_id}", c.density == want, c.density.render()))
    out.append(_check("theorems", "A boundary: total vanishes", pa.vanishes, pa.total.render()))
    for cid in ("I", "II", "III"):
        out.append(_check("theorems", f"B boundary: case {cid} equals operator A",
                          pb.case(cid).density == pa.case(cid).density))
    hp = var("pi") * var("Omega3") * ScalarExpr.const(Fraction(9, 8))
    h4 = pb.case("IV").density.coefficient("h'")
    h5 = pb.case("V").density.coefficient("h'")
    out.append(_check("theorems", "B boundary: h' blocks are +-9/8 pi Omega3", h4 == hp and h5 == -hp,
                      f"IV {h4.render()}, V {h5.render()}"))
    x4 = DensityExpr({"X_n": pb.case("IV").density.coefficient("X_n")}, "dx'")
    x5 = DensityExpr({"X_n": pb.case("V").density.coefficient("X_n")}, "dx'")
    out.append(_check("theorems", "B boundary: X_n blocks are negatives", (x4 + x5).is_zero() and not x4.is_zero(),
                      f"IV {x4.render()}, V {x5.render()}"))
    gap = xn_block_quadrature("B", cfg.seed)
    out.append(_check("theorems", "B boundary: block values vs quadrature", gap <= 1e-9, f"max error {gap:.1e}"))
    out.append(_check("theorems", "B boundary: total vanishes", pb.vanishes, pb.total.render()))
    for rep in (pa, pb):
        out.extend(_records("theorems", f"{rep.kind} boundary record ", rep.records()))
    for kind in "AB":
        bad = [r for r in check_intermediates(kind) if not r["match"]]
        out.extend(_records("theorems", f"{kind} boundary intermediate ", bad))
    return out


SUITES = {
    "clifford": suite_clifford,
    "moments": suite_moments,
    "halfplane": suite_halfplane,
    "parametrix": suite_parametrix,
    "theorems": suite_theorems,
}


def run_verify(suites, cfg: VerifyConfig | None = None) -> VerifyReport:
    cfg = cfg or VerifyConfig()
    names = list(SUITES) if suites in ("all", None) else ([suites] if isinstance(suites, str) else list(suites))
    report = VerifyReport(strict_paper=cfg.strict_paper)
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}")
        report.checks.extend(SUITES[name](cfg))
    return report
