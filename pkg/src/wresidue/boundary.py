"""Boundary correction term of the residue for ``A^-2`` and ``B^-2`` (n = 4).

The correction is a sum over index tuples ``(r, l, k, j, |alpha|)`` with
``r + l - k - j - |alpha| = -3`` of

    (-i)^(|alpha|+j+k+1) / (alpha! (j+k+1)!)
      * int_{|xi'|=1} int_R tr[d_xn^j d_xi'^alpha d_xin^k pi+ sigma_r
                               x d_x'^alpha d_xin^(j+1) d_xn^k sigma_l] dxin sigma(xi') dx'

Each integrand is traced first, then integrated over ``xi'`` (odd powers of
``g(X, xi')`` vanish, everything else is constant on the unit sphere), and
finally over ``xi_n`` by residues in the upper half-plane.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial

from .cosphere import DensityExpr
from .geometry import DXN, OMEGA3, WCOV, XVEC, BoundaryContext
from .halfplane import XiNRational, pi_plus, real_line_integral
from .scalar import ONE_EXPR, ZERO, Q, ScalarExpr, var
from .symbols import (CollarSymbol, OperatorKind, _cxi_collar, _padd, _pmul, _pscale,
                      build_inverse_low_orders)

__all__ = [
    "BoundaryCase",
    "enumerate_cases",
    "PhiReport",
    "phi_case",
    "phi_total",
    "sigma_minus2_blocks",
    "sigma_minus2_split",
    "trace_xi_prime",
    "PRINTED_PHI",
    "check_intermediates",
]

N_DIM = 4


@dataclass(frozen=True)
class BoundaryCase:
    case_id: str
    r: int
    l: int
    k: int
    j: int
    alpha: int

    @property
    def prefactor(self) -> ScalarExpr:
        # alpha! for |alpha| <= 1 is 1
        q = Q(0, -1) ** (self.alpha + self.j + self.k + 1) * Q(Fraction(1, factorial(self.j + self.k + 1)))
        return ScalarExpr.const(q)

    def to_json(self) -> dict:
        return {"id": self.case_id, "r": self.r, "l": self.l, "k": self.k, "j": self.j,
                "alpha": self.alpha, "prefactor": self.prefactor.render()}


_ROMAN = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII"]


def enumerate_cases(n: int = N_DIM) -> list[BoundaryCase]:
    """All tuples with ``r + l - k - j - |alpha| = 1 - n`` and ``r, l <= -1``."""
    target = 1 - n
    found = []
    for r, l in product(range(-1, target - 1, -1), repeat=2):
        slack = r + l - target
        if slack < 0:
            continue
        for alpha, j, k in product(range(slack + 1), repeat=3):
            if alpha + j + k == slack:
                found.append((r, l, k, j, alpha))
    # order: r = l = -1 with alpha, j, k in turn, then (r, l) = (-2, -1), (-1, -2)
    found.sort(key=lambda t: (-(t[0] + t[1]), -t[4], -t[3], -t[2], t[0]))
    cases = [BoundaryCase(_ROMAN[i], *t) for i, t in enumerate(found)]
    for c in cases:
        if c.r < -2 or c.l < -2:
            raise AssertionError("symbol orders below -2 are not available")
    return cases


# -- xi' integration ------------------------------------------------------------------

class OddTermSurvived(ValueError):
    """A power of ``g(X, xi')`` other than 0 or 1 reached the sphere integral."""


def trace_xi_prime(ctx: BoundaryContext, e: ScalarExpr) -> ScalarExpr:
    """``int_{|xi'|=1} e sigma(xi')`` for ``e`` at most linear in ``g(X, xi')``.

    Odd terms vanish; the rest is constant on the unit sphere and picks up ``Omega3``.
    """
    out = {}
    for mono, c in e.terms.items():
        d = dict(mono)
        if d.get("ww"):
            raise OddTermSurvived("g(w, w) survived the trace")
        p = d.get("gXxi", 0)
        if p == 0:
            out[mono] = c
        elif p > 1:
            raise OddTermSurvived(f"g(X, xi')^{p} needs a second moment")
    return ScalarExpr(out) * var(OMEGA3)


def _trace_rational(r: XiNRational) -> XiNRational:
    return r.map_coeffs(lambda c: c.trace())


# -- sigma_-2 split ---------------------------------------------------------------------

def sigma_minus2_blocks(kind, ctx: BoundaryContext) -> dict:
    """``sigma_-2`` split into the printed blocks, before any projection.

    Returns ``{label: (coefficient, block)}`` with ``sigma_-2 = sum coefficient * block``.
    Labels: ``C1`` (Q and ``c(w)`` terms), ``C2`` (the ``h'(0)`` term), ``C3``
    (``f c(X)``), and for kind B ``C4`` (the ``xi(X)`` term).  For kind B the
    ``C3`` block enters with coefficient ``-1/f``, recorded as ``None``.
    """
    kind = OperatorKind.parse(kind)
    alg = ctx.alg
    cxi = _cxi_collar(ctx)

    def sandwich(mid: dict) -> dict:
        return _pmul(_pmul(cxi, mid), cxi)

    q_block = sandwich({0: ctx.Q()})
    w_block = _pmul(_pmul(cxi, {0: alg.c(DXN)}), {0: alg.c(WCOV)})
    c1 = CollarSymbol(ctx, {2: _padd(q_block, w_block)})
    c2 = CollarSymbol(ctx, {3: _pmul(_pmul(cxi, {0: alg.c(DXN)}), _pscale(cxi, ctx.hp))})
    c3 = CollarSymbol(ctx, {2: sandwich({0: alg.c(XVEC) * ctx.f})})
    blocks = {"C1": (ONE_EXPR, c1), "C2": (-ONE_EXPR, c2)}
    if kind is OperatorKind.A:
        blocks["C3"] = (ONE_EXPR, c3)
    else:
        blocks["C3"] = (None, c3)
        xiX = {0: alg.one(ctx.gXxi), 1: alg.one(ctx.Xn)}
        # c(xi) [2 c(xi) xi(X) / |xi|^2] c(xi) / |xi|^4 = -2 xi(X) c(xi) / |xi|^4
        blocks["C4"] = (ONE_EXPR, CollarSymbol(ctx, {2: _pscale(_pmul(cxi, xiX), -2)}))
    return blocks


def sigma_minus2_split(kind, ctx: BoundaryContext) -> dict:
    """``pi+ sigma_-2`` split as ``{label: (coefficient, pi+ block)}``."""
    return {k: (coef, pi_plus(sym.rational()))
            for k, (coef, sym) in sigma_minus2_blocks(kind, ctx).items()}


def _apply_coefficient(ctx, coef, r: XiNRational) -> XiNRational:
    if coef is None:
        return r.map_coeffs(lambda c: -_strip_f(ctx, c))
    return r.map_coeffs(lambda c: c * coef)


def split_total(kind, ctx: BoundaryContext) -> XiNRational:
    """Recombine the split; equals ``pi+ sigma_-2``."""
    out = XiNRational()
    for coef, block in sigma_minus2_split(kind, ctx).values():
        out = out + _apply_coefficient(ctx, coef, block)
    return out


def _strip_f(ctx, c):
    """Divide a Clifford expression that is linear in ``f`` by ``f``."""
    def div(e: ScalarExpr) -> ScalarExpr:
        out = {}
        for mono, q in e.terms.items():
            d = dict(mono)
            if d.get("f") != 1:
                raise ValueError("block is not linear in f")
            del d["f"]
            out[tuple(sorted(d.items()))] = q
        return ScalarExpr(out)
    return c.map_coeffs(div)


# -- cases ----------------------------------------------------------------------------

@dataclass
class CaseResult:
    case: BoundaryCase
    integrand: XiNRational          # traced, xi'-integrated, prefactor applied
    density: DensityExpr
    blocks: dict = field(default_factory=dict)


def _integrand(kind, case: BoundaryCase, ctx: BoundaryContext, sigma: dict):
    """Clifford-valued integrand without the prefactor, or None if it vanishes."""
    n = ctx.n
    s1 = sigma[-1]
    if case.alpha:
        # tangential derivatives vanish at the base point
        if not s1.x_derivative(1).parts:
            return None
        raise AssertionError("tangential derivative did not vanish")
    if (case.r, case.l) == (-1, -1):
        left = s1.x_derivative(n) if case.j else s1
        left = pi_plus(left.rational())
        for _ in range(case.k):
            left = left.derivative()
        right = s1.x_derivative(n) if case.k else s1
        right = right.rational()
        for _ in range(case.j + 1):
            right = right.derivative()
        return left * right
    r_sym, l_sym = sigma[case.r], sigma[case.l]
    return pi_plus(r_sym.rational()) * l_sym.rational().derivative()


def _finish(ctx, traced: XiNRational, prefactor: ScalarExpr) -> tuple[XiNRational, ScalarExpr]:
    integrated = traced.map_coeffs(lambda c: trace_xi_prime(ctx, c) * prefactor)
    value = real_line_integral(integrated)
    return integrated, value if value is not None else ZERO


def recognize_boundary(e: ScalarExpr) -> DensityExpr:
    """Express a boundary value in the basis ``h'``, ``f X_n``, ``X_n``, ``1``."""
    names = {(("hprime", 1),): "h'", (("Xn", 1), ("f", 1)): "f X_n", (("Xn", 1),): "X_n", (): "1"}
    basis_vars = {"hprime", "Xn", "f", "XX", "gXxi"}
    out: dict = {}
    for mono, c in e.terms.items():
        key = tuple(p for p in mono if p[0] in basis_vars)
        rest = tuple(p for p in mono if p[0] not in basis_vars)
        name = names.get(key)
        if name is None:
            raise ValueError(f"unrecognized boundary monomial {mono}")
        out[name] = out.get(name, ZERO) + ScalarExpr({rest: c})
    return DensityExpr(out, "dx'")


def phi_case(kind, case: BoundaryCase, ctx: BoundaryContext | None = None) -> CaseResult:
    """Contribution of one index case, with the ``sigma_-2`` block split for cases with ``r = -2``."""
    kind = OperatorKind.parse(kind)
    ctx = ctx or BoundaryContext()
    sigma = build_inverse_low_orders(kind, ctx)
    raw = _integrand(kind, case, ctx, sigma)
    if raw is None:
        return CaseResult(case, XiNRational(), DensityExpr({}, "dx'"))
    integrand, value = _finish(ctx, _trace_rational(raw), case.prefactor)
    result = CaseResult(case, integrand, recognize_boundary(value))
    if -2 in (case.r, case.l):
        s1 = sigma[-1].rational()
        for label, (coef, block) in sigma_minus2_blocks(kind, ctx).items():
            if case.r == -2:
                prod = pi_plus(block.rational()) * s1.derivative()
            else:
                prod = pi_plus(s1) * block.rational().derivative()
            traced = _trace_rational(prod)
            _, v = _finish(ctx, _trace_rational(_apply_coefficient(ctx, coef, prod)), case.prefactor)
            result.blocks[label] = {"coefficient": "-1/f" if coef is None else coef.render(),
                                    "trace": traced, "scalar": v, "value": recognize_boundary(v)}
    return result


# -- printed values ---------------------------------------------------------------------

def _bd(**kw) -> DensityExpr:
    names = {"h": "h'", "fXn": "f X_n", "Xn": "X_n"}
    pio = var("pi") * var(OMEGA3)
    return DensityExpr({names[k]: pio * ScalarExpr.const(Fraction(v)) for k, v in kw.items() if v},
                       "dx'")


PRINTED_PHI = {
    "A": {
        "I": (_bd(), "so Phi_1 = 0"),
        "II": (_bd(h=Fraction(-3, 8)), "= -3/8 pi h'(0) Omega_3 dx'"),
        "III": (_bd(h=Fraction(3, 8)), "= 3/8 pi h'(0) Omega_3 dx'"),
        "IV": (_bd(h=Fraction(9, 8), fXn=-1), "Phi_4 = (9/8 h'(0) - f X_n) pi Omega_3 dx'"),
        "V": (_bd(h=Fraction(-9, 8), fXn=1), "Phi_5 = (-9/8 h'(0) + f X_n) pi Omega_3 dx'"),
    },
    "B": {
        "I": (_bd(), "Phi~_i = Phi_i, i = 1, 2, 3"),
        "II": (_bd(h=Fraction(-3, 8)), "Phi~_i = Phi_i, i = 1, 2, 3"),
        "III": (_bd(h=Fraction(3, 8)), "Phi~_i = Phi_i, i = 1, 2, 3"),
        "IV": (_bd(h=Fraction(9, 8), Xn=Fraction(1, 2)), "Phi_4 = (9/8 h'(0) + 1/2 X_n) pi Omega_3 dx'"),
        "V": (_bd(h=Fraction(-9, 8), Xn=Fraction(-1, 2)),
              "Phi~_5 = (-9/8 h'(0) - 1/2 X_n) pi Omega_3 dx'"),
    },
}


@dataclass
class PhiReport:
    kind: str
    cases: list
    total: DensityExpr

    @property
    def vanishes(self) -> bool:
        return self.total.is_zero()

    def case(self, case_id: str) -> CaseResult:
        for c in self.cases:
            if c.case.case_id == case_id:
                return c
        raise KeyError(case_id)

    def records(self) -> list[dict]:
        out = []
        for c in self.cases:
            printed, quote = PRINTED_PHI[self.kind][c.case.case_id]
            if c.density != printed:
                out.append({"term_id": f"Phi{c.case.case_id}", "engine_value": c.density.render(),
                            "paper_value": printed.render(), "location_quote": quote})
        return out

    def to_json(self) -> dict:
        cases = []
        for c in self.cases:
            printed, _ = PRINTED_PHI[self.kind][c.case.case_id]
            entry = {"id": c.case.case_id, "index": c.case.to_json(),
                     "density": c.density.render(), "printed_density": printed.render(),
                     "match": c.density == printed}
            if c.blocks:
                entry["blocks"] = {k: {"coefficient": v["coefficient"], "value": v["value"].render()}
                                   for k, v in sorted(c.blocks.items())}
            cases.append(entry)
        return {"operator": self.kind, "cases": cases, "total": self.total.render(),
                "vanishes": self.vanishes, "discrepancies": self.records()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def phi_total(kind, ctx: BoundaryContext | None = None) -> PhiReport:
    kind = OperatorKind.parse(kind)
    ctx = ctx or BoundaryContext()
    results = [phi_case(kind, c, ctx) for c in enumerate_cases(ctx.n)]
    total = DensityExpr({}, "dx'")
    for r in results:
        total = total + r.density
    return PhiReport(kind.value, results, total)


def check_intermediates(kind, ctx: BoundaryContext | None = None) -> list[dict]:
    """Compare every printed boundary intermediate with the engine's value."""
    from .fixtures import boundary_intermediates
    kind = OperatorKind.parse(kind)
    ctx = ctx or BoundaryContext()
    sigma = build_inverse_low_orders(kind, ctx)
    split = sigma_minus2_split(kind, ctx)
    cases = {c.case_id: c for c in enumerate_cases(ctx.n)}
    results: dict = {}

    def case(cid):
        if cid not in results:
            results[cid] = phi_case(kind, cases[cid], ctx)
        return results[cid]

    def engine(target: str):
        if target == "pi+sigma-1":
            return pi_plus(sigma[-1].rational())
        if target in split:
            return split[target][1]
        what, _, rest = target.partition(":")
        if what == "integrand":
            return case(rest).integrand
        cid, _, labels = rest.partition(":")
        blocks = case(cid).blocks
        if what == "trace":
            if labels == "C1+C2":
                return blocks["C1"]["trace"] - blocks["C2"]["trace"]
            return blocks[labels]["trace"]
        if what == "value":
            total = ZERO
            for lab in labels.split("+"):
                total = total + blocks[lab]["scalar"]
            return total
        raise KeyError(target)

    out = []
    for item in boundary_intermediates(kind, ctx):
        got = engine(item.target)
        out.append({"term_id": item.item_id, "match": got == item.value,
                    "engine_value": got.render(), "paper_value": item.value.render(),
                    "location_quote": item.quote})
    return out
