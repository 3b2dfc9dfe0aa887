"""Encodings of the printed symbol formulas, and a text record format.

Each printed term of the order ``-4`` symbol is encoded as a builder that
evaluates the term at the base point of an :class:`InteriorContext` from jet
values.  Builders follow the printed formula literally, including its signs
and powers of ``|xi|``; where an index is left dangling in print the choice
made here is stated next to the builder.

The text record format renders one symbol component per record::

    record M8 order=-4
      (-1)*|xi|^-4*c(e1)*c(e2) + ...

and parses back with :func:`parse_records`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .clifford import CliffordExpr
from .cosphere import DensityExpr
from .geometry import InteriorContext
from .scalar import ONE_EXPR, ZERO, Q, ScalarExpr, _Parser, var
from .symbols import (I_EXPR, OperatorKind, PdoSymbol, _cmul, _tmul, invert_leading,
                      x_derivative, xi_derivative)

__all__ = [
    "PrintedTerm",
    "printed_terms",
    "sigma_minus3_printed",
    "render_record",
    "parse_records",
    "dump_records",
    "base_values",
    "PRINTED_BLOCKS",
    "PRINTED_THEOREMS",
    "PIECE_GROUPS",
    "boundary_intermediates",
]


# -- base-point values -------------------------------------------------------------

class _Base:
    """Values at ``x0`` of the fields and jets that printed terms use."""

    def __init__(self, ctx: InteriorContext):
        self.ctx = ctx
        at = ctx.at_base
        alg = ctx.alg
        idx = ctx.idx
        self.idx = idx
        self.alg = alg
        self.xi = ctx.xi
        self.xi_up = {m: at(sum((ctx.ginv[(m, n)] * ctx.xi[n] for n in idx), ZERO)) for m in idx}
        gs_jet = {m: alg.one(ctx.gamma_up[m]) - _sig_up(ctx, m) * ScalarExpr.const(2) for m in idx}
        self.GS = {m: gs_jet[m].map_coeffs(at) for m in idx}
        self.dGS = {(mu, m): gs_jet[m].map_coeffs(lambda e, mu=mu: at(e.diff(f"x{mu}")))
                    for mu in idx for m in idx}
        self.Gam = {m: at(ctx.gamma_up[m]) for m in idx}
        self.sig_up = {m: _sig_up(ctx, m).map_coeffs(at) for m in idx}
        self.ginv = {k: at(v) for k, v in ctx.ginv.items()}
        self.glow = {k: at(v) for k, v in ctx.glow.items()}
        self.dg = {(mu, a, b): at(ctx.ginv[(a, b)].diff(f"x{mu}"))
                   for mu in idx for a in idx for b in idx}
        self.ddg = {(mu, nu, a, b): at(ctx.ginv[(a, b)].diff(f"x{mu}").diff(f"x{nu}"))
                    for mu in idx for nu in idx for a in idx for b in idx}
        r2 = sum((ctx.ginv[(a, b)] * ctx.xi[a] * ctx.xi[b] for a in idx for b in idx), ZERO)
        self.r2_jet = r2
        self.d_r2 = {mu: at(r2.diff(f"x{mu}")) for mu in idx}
        self.cxi_jet = ctx.cxi()
        self.cX_jet = ctx.cX()
        self.cxi = self.cxi_jet.map_coeffs(at)
        self.cX = self.cX_jet.map_coeffs(at)
        self.cdf = ctx.cdf().map_coeffs(at)
        self.cdx = {m: ctx.cdx(m).map_coeffs(at) for m in idx}
        self.d_cxi = {mu: self.cxi_jet.map_coeffs(lambda e, mu=mu: at(e.diff(f"x{mu}"))) for mu in idx}
        self.d_cX = {mu: self.cX_jet.map_coeffs(lambda e, mu=mu: at(e.diff(f"x{mu}"))) for mu in idx}
        self.f = ctx.f
        self.d_f = {mu: at(ctx.f_jet.diff(f"x{mu}")) for mu in idx}
        self.gs = ctx.gamma_sigma().map_coeffs(at)
        self.s = ctx.s
        self.X_sq = at(ctx.X_norm_sq())
        self.anti = self.cxi * self.cX + self.cX * self.cxi
        # d_mu [f (c(xi)c(X) + c(X)c(xi))] and d_mu of the f-free bracket
        xn = ctx.x_names
        fa = _cmul(self.cxi_jet, self.cX_jet, 1, xn) + _cmul(self.cX_jet, self.cxi_jet, 1, xn)
        self.d_anti = {mu: fa.map_coeffs(lambda e, mu=mu: at(e.diff(f"x{mu}"))) for mu in idx}
        self.d_f_anti = {mu: self.d_anti[mu] * self.f + self.anti * self.d_f[mu] for mu in idx}
        # d^{x mu} sigma_mu = sum g^{mu nu} d_nu sigma_mu
        acc = alg.zero()
        for m in idx:
            for n in idx:
                acc = acc + ctx.spin[m].map_coeffs(
                    lambda e, n=n, m=m: at(_tmul(ctx.ginv[(m, n)], e.diff(f"x{n}"), 0, xn)))
        self.div_sigma = acc


def _sig_up(ctx, m) -> CliffordExpr:
    out = ctx.alg.zero()
    for n in ctx.idx:
        out = out + ctx.spin[n] * ctx.ginv[(m, n)]
    return out


class _Acc:
    """Order -4 component at ``x0`` as ``{k: CliffordExpr}``."""

    def __init__(self, b: _Base):
        self.b = b
        self.parts: dict = {}

    def add(self, k: int, value, coeff=1):
        if not isinstance(value, CliffordExpr):
            value = self.b.alg.one(value)
        if value.is_zero():
            return
        if coeff != 1:
            value = value * ScalarExpr.const(coeff)
        cur = self.parts.get(k)
        self.parts[k] = value if cur is None else cur + value

    def symbol(self) -> PdoSymbol:
        return PdoSymbol(self.b.ctx, {-4: self.parts}, {-4: 0})


def _nz(*vals) -> bool:
    return all(not v.is_zero() for v in vals)


# -- printed terms of sigma_-4 ----------------------------------------------------------

def _N1(b, acc):
    for mu in b.idx:
        for nu in b.idx:
            t = b.Gam[mu] * b.Gam[nu]
            if not t.is_zero():
                acc.add(3, t * b.xi[mu] * b.xi[nu], -1)
            # [g_{mu nu} - |xi|^-4 xi_mu xi_nu][sigma^mu sigma^nu - Gamma^nu sigma^nu]
            br = b.sig_up[mu] * b.sig_up[nu] - b.sig_up[nu] * b.Gam[nu]
            if br.is_zero():
                continue
            acc.add(2, br * b.glow[(mu, nu)])
            acc.add(4, br * (b.xi[mu] * b.xi[nu]), -1)


def _N2(b, acc):
    acc.add(2, b.div_sigma)
    acc.add(2, b.s, Fraction(-1, 4))


def _N3(b, acc):
    for mu in b.idx:
        for nu in b.idx:
            if b.GS[nu].is_zero():
                continue
            for a in b.idx:
                for be in b.idx:
                    if b.dg[(mu, a, be)].is_zero():
                        continue
                    acc.add(4, b.GS[nu] * (b.xi_up[mu] * b.xi[nu] * b.xi[a] * b.xi[be]
                                           * b.dg[(mu, a, be)]), -6)


def _N4(b, acc):
    for mu in b.idx:
        for nu in b.idx:
            acc.add(3, b.dGS[(mu, nu)] * (b.xi_up[mu] * b.xi[nu]), 2)


def _dg_pairs(b):
    return [(k, v) for k, v in b.dg.items() if not v.is_zero()]


def _N5(b, acc):
    nz = _dg_pairs(b)
    for (mu, a, be), d1 in nz:
        for (nu, g, de), d2 in nz:
            acc.add(5, b.xi_up[mu] * b.xi_up[nu] * b.xi[a] * b.xi[be] * b.xi[g] * b.xi[de] * d1 * d2, -12)


def _N6(b, acc):
    nz = _dg_pairs(b)
    for (mu, nu, a), d1 in nz:
        for (nu2, g, de), d2 in nz:
            if nu2 == nu:
                acc.add(4, b.xi_up[mu] * b.xi[a] * b.xi[g] * b.xi[de] * d1 * d2, 4)


def _N7(b, acc):
    for (mu, a, be), d in _dg_pairs(b):
        acc.add(3, b.GS[mu] * (b.xi[a] * b.xi[be] * d))


def _N8(b, acc):
    for (mu, nu, g, de), d in b.ddg.items():
        if not d.is_zero():
            acc.add(4, b.xi_up[mu] * b.xi_up[nu] * b.xi[g] * b.xi[de] * d, 4)


def _N9(b, acc):
    for (mu, nu, a, be), d in b.ddg.items():
        if not d.is_zero() and not b.ginv[(mu, nu)].is_zero():
            acc.add(3, b.xi[a] * b.xi[be] * b.ginv[(mu, nu)] * d, -1)


def _N10(b, acc):
    nz = _dg_pairs(b)
    for (mu, a, be), d1 in nz:
        for (nu, g, de), d2 in nz:
            acc.add(4, b.xi[a] * b.xi[be] * b.xi[g] * b.xi[de] * b.ginv[(mu, nu)] * d1 * d2, 2)


def _M1(b, acc):
    for mu in b.idx:
        acc.add(3, b.anti * b.GS[mu] * (b.f * b.xi[mu]), -1)


def _M2(b, acc):
    for (mu, a, be), d in _dg_pairs(b):
        acc.add(4, b.anti * (b.f * b.xi_up[mu] * b.xi[a] * b.xi[be] * d), 2)


def _M3(b, acc):
    acc.add(3, b.anti * b.anti * (b.f * b.f), -1)


def _M4(b, acc):
    # printed "(Gamma^mu - 2 sigma^nu)"; read as (Gamma^mu - 2 sigma^mu)
    for mu in b.idx:
        acc.add(3, b.GS[mu] * b.anti * (b.f * b.xi[mu]), -1)


def _M5(b, acc):
    # printed "xi^mu d_nu^x [...]" with nu free; contracted as d_mu.
    # d_mu [|xi|^-2 F] = |xi|^-2 d_mu F - |xi|^-4 d_mu(|xi|^2) F
    for mu in b.idx:
        acc.add(2, b.d_f_anti[mu] * b.xi_up[mu], -2)
        acc.add(3, b.anti * (b.f * b.d_r2[mu] * b.xi_up[mu]), 2)


def _M6(b, acc):
    acc.add(1, (b.gs * b.cX + b.cX * b.gs) * (I_EXPR * b.f))


def _M7(b, acc):
    # d_xi^mu [f (c(xi)c(X) + c(X)c(xi))] = f (c(dx_mu)c(X) + c(X)c(dx_mu))
    for (mu, a, be), d in _dg_pairs(b):
        dxi = b.cdx[mu] * b.cX + b.cX * b.cdx[mu]
        acc.add(2, dxi * (b.f * b.xi[a] * b.xi[be] * d), -1)


def _M8(b, acc):
    acc.add(2, b.cxi * b.cX * b.cxi * b.cdf, -1)


def _M9(b, acc):
    acc.add(2, b.cX * b.cxi * b.cdf * b.cxi, -1)


def _M10(b, acc):
    acc.add(1, b.f * b.f * b.X_sq)


def _R1(b, acc):
    for mu in b.idx:
        acc.add(3, b.anti * b.GS[mu] * b.xi[mu], -1)


def _R2(b, acc):
    for mu in b.idx:
        acc.add(3, b.GS[mu] * b.anti * b.xi[mu], -1)


def _R3(b, acc):
    acc.add(3, b.anti * b.anti, -1)


def _R4(b, acc):
    for (mu, a, be), d in _dg_pairs(b):
        acc.add(4, b.anti * (b.xi_up[mu] * b.xi[a] * b.xi[be] * d), 2)


def _R5(b, acc):
    # same index reading as M5
    for mu in b.idx:
        acc.add(2, b.d_anti[mu] * b.xi_up[mu], -2)
        acc.add(3, b.anti * (b.d_r2[mu] * b.xi_up[mu]), 2)


def _R6(b, acc):
    acc.add(2, b.cX * b.gs * I_EXPR)
    acc.add(2, b.X_sq, -1)
    for mu in b.idx:
        acc.add(3, b.cxi * b.cX * b.GS[mu] * b.xi[mu], -1)
    acc.add(3, b.cxi * b.gs * b.cxi * b.cX * I_EXPR)


def _R7(b, acc):
    # second summand printed as "c(xi) d_mu(|xi|^2) c(X)"; read with c(dx_mu) c(xi)
    # inserted, as required for order -4 homogeneity
    for mu in b.idx:
        acc.add(3, b.cxi * b.cdx[mu] * b.d_cxi[mu] * b.cX)
        acc.add(4, b.cxi * b.cdx[mu] * b.cxi * b.cX * b.d_r2[mu], -1)


def _R8(b, acc):
    # -|xi|^-4 [d_xi^mu(|xi|^-2) c(xi) + |xi|^-2 c(dx_mu)] [d_mu(c(X)) |xi|^2 + c(X) d_mu(|xi|^2)]
    # with d_xi^mu(|xi|^-2) = -2 xi^mu |xi|^-4
    for mu in b.idx:
        left4 = b.cxi * (b.xi_up[mu] * ScalarExpr.const(-2))
        left2 = b.cdx[mu]
        acc.add(3, left4 * b.d_cX[mu], -1)
        acc.add(4, left4 * b.cX * b.d_r2[mu], -1)
        acc.add(2, left2 * b.d_cX[mu], -1)
        acc.add(3, left2 * b.cX * b.d_r2[mu], -1)


# -- printed values ---------------------------------------------------------------------

PI2 = var("pi") * var("pi")


def _dens(**coeffs) -> DensityExpr:
    """Density per ``tr[id]`` in units of ``pi^2``, multiplied by ``tr[id] = 4``."""
    names = {"divfX": "div(fX)", "Xdf": "X(df)", "XX": "|X|^2", "f2XX": "f^2|X|^2",
             "divX": "div(X)", "XnormDf": "|X||df|"}
    return DensityExpr({names[k]: PI2 * ScalarExpr.const(Fraction(v) * 4)
                        for k, v in coeffs.items() if v})


@dataclass(frozen=True)
class PrintedTerm:
    term_id: str
    kinds: tuple
    builder: Callable
    paper_value: DensityExpr | None   # None: the paper states no separate value
    quote: str
    group: str                        # N (gravity) or P (perturbation)

    def symbol(self, ctx: InteriorContext, base: _Base | None = None) -> PdoSymbol:
        b = base or _Base(ctx)
        acc = _Acc(b)
        self.builder(b, acc)
        return acc.symbol()


_ZERO_D = DensityExpr({})

_TERMS = [
    PrintedTerm("N1", ("A", "B"), _N1, None, "N_1 = -|xi|^-6 xi_mu xi_nu Gamma^mu Gamma^nu + ...", "N"),
    PrintedTerm("N2", ("A", "B"), _N2, None, "N_2 = |xi|^-4 d^{x mu} sigma_mu - 1/4 |xi|^-4 s", "N"),
    PrintedTerm("N3", ("A", "B"), _N3, None, "N_3 = -6|xi|^-8 xi^mu xi_nu xi_alpha xi_beta (...)", "N"),
    PrintedTerm("N4", ("A", "B"), _N4, None, "N_4 = 2|xi|^-6 xi^mu xi_nu d_mu(Gamma^nu - 2 sigma^nu)", "N"),
    PrintedTerm("N5", ("A", "B"), _N5, None, "N_5 = -12|xi|^-10 ...", "N"),
    PrintedTerm("N6", ("A", "B"), _N6, None, "N_6 = 4|xi|^-8 ...", "N"),
    PrintedTerm("N7", ("A", "B"), _N7, None, "N_7 = |xi|^-6 xi_alpha xi_beta (Gamma^mu - 2 sigma^mu) d_mu g", "N"),
    PrintedTerm("N8", ("A", "B"), _N8, None, "N_8 = 4|xi|^-8 xi^mu xi^nu xi_gamma xi_delta d_mu d_nu g", "N"),
    PrintedTerm("N9", ("A", "B"), _N9, None, "N_9 = -|xi|^-6 xi_alpha xi_beta g^{mu nu} d_mu d_nu g", "N"),
    PrintedTerm("N10", ("A", "B"), _N10, None, "N_10 = 2|xi|^-8 ...", "N"),
    PrintedTerm("M1", ("A",), _M1, _ZERO_D, "the result of this term M_1 disappears", "P"),
    PrintedTerm("M2", ("A",), _M2, _ZERO_D, "the result of this term M_2 disappears", "P"),
    PrintedTerm("M3", ("A",), _M3, _dens(f2XX=-2), "= -2f^2 pi^2 |X|^2 tr[id]", "P"),
    PrintedTerm("M4", ("A",), _M4, _ZERO_D, "the result of this term M_4, M_6, M_7 disappear", "P"),
    PrintedTerm("M5", ("A",), _M5, _dens(divfX=2), "= 2 pi^2 div_M(fX) tr[id]", "P"),
    PrintedTerm("M6", ("A",), _M6, _ZERO_D, "the result of this term M_4, M_6, M_7 disappear", "P"),
    PrintedTerm("M7", ("A",), _M7, _ZERO_D, "the result of this term M_4, M_6, M_7 disappear", "P"),
    PrintedTerm("M8", ("A",), _M8, None, "tr(M_8)(x_0) = tr(M_9)(x_0) = tr[-c(xi)c(X)c(xi)c(df)]", "P"),
    PrintedTerm("M9", ("A",), _M9, None, "tr(M_8)(x_0) = tr(M_9)(x_0) = tr[-c(xi)c(X)c(xi)c(df)]", "P"),
    PrintedTerm("M10", ("A",), _M10, _dens(f2XX=2), "= 2f^2 pi^2 |X|^2 tr[id]", "P"),
    PrintedTerm("R1", ("B",), _R1, _ZERO_D, "the result of this term R_1, R_2 and R_4 disappear", "P"),
    PrintedTerm("R2", ("B",), _R2, _ZERO_D, "the result of this term R_1, R_2 and R_4 disappear", "P"),
    PrintedTerm("R3", ("B",), _R3, _dens(XX=-2), "int tr(R_3)(x_0) = -2 pi^2 |X|^2 tr[id]", "P"),
    PrintedTerm("R4", ("B",), _R4, _ZERO_D, "the result of this term R_1, R_2 and R_4 disappear", "P"),
    PrintedTerm("R5", ("B",), _R5, _dens(divX=2), "int tr(R_5)(x_0) = 2 pi^2 div_M(X) tr[id]", "P"),
    PrintedTerm("R6", ("B",), _R6, _dens(XX=-2), "int tr(R_6)(x_0) = -2 pi^2 |X|^2 tr[id]", "P"),
    PrintedTerm("R7", ("B",), _R7, _ZERO_D, "the result of this term R_7 disappears", "P"),
    PrintedTerm("R8", ("B",), _R8, _dens(divX=1), "= pi^2 div_M(X) tr[id]", "P"),
]

# printed values for combinations of terms
PRINTED_BLOCKS = {
    "M8+M9": (("M8", "M9"), _dens(Xdf=2, XnormDf=-2),
              "2 pi^2 X(df) tr[id] ... -2 pi^2 |X||df| tr[id]"),
    "M3+M10": (("M3", "M10"), _ZERO_D, "-2f^2 pi^2|X|^2 + 2f^2 pi^2|X|^2"),
}

# theorem right-hand sides, perturbation part only (the s/12 part is the gravity constant)
PRINTED_THEOREMS = {
    "A": (_dens(divfX=2, Xdf=2, XnormDf=-2),
          "4 int (2 pi^2 div_M(fX) + 2 pi^2 X(df) - 2 pi^2 |X||df| + s/12) dVol_M"),
    "B": (_dens(XX=-4, divX=3),
          "4 int (-4 pi^2 |X|^2 + 3 pi^2 div_M(X) + s/12) dVol_M"),
}


# printed terms grouped by the recursion piece they come from
PIECE_GROUPS = {
    "A": {"s1q3": ("M1", "M3", "M4"), "s0q2": ("M6", "M8", "M9", "M10"), "ds1q2": ("M7",),
          "ds2q3": ("M2", "M5"), "dds2q2": ()},
    "B": {"s1q3": ("R1", "R2", "R3"), "s0q2": ("R6", "R7", "R8"), "ds1q2": (),
          "ds2q3": ("R4", "R5"), "dds2q2": ()},
}

PIECE_QUOTES = {
    "s1q3": "-sigma_-2[sigma_1 sigma_-3 + ...]",
    "s0q2": "-sigma_-2[... + sigma_0 sigma_-2 ...]",
    "ds1q2": "-sigma_-2[... - i d_xi^mu sigma_1 d_mu^x sigma_-2 ...]",
    "ds2q3": "-2i|xi|^-2 xi^mu . d_mu^x sigma_-3",
    "dds2q2": "terms of order <= -5 (second-order term of the composition formula)",
}

SIGMA0_QUOTES = {
    "A": "sigma_0^{A^2}(x, xi) = -(d^x sigma_mu + sigma^mu sigma_mu - Gamma^mu sigma_mu) + 1/4 s + ...",
    "B": "sigma_0^{B^2}(x, xi) = -(d^x sigma_mu + sigma^mu sigma_mu - Gamma^mu sigma_mu) + 1/4 s + ...",
}


def printed_terms(kind=None, group=None) -> list[PrintedTerm]:
    out = []
    for t in _TERMS:
        if kind is not None and OperatorKind.parse(kind).value not in t.kinds:
            continue
        if group is not None and t.group != group:
            continue
        out.append(t)
    return out


def base_values(ctx: InteriorContext) -> _Base:
    return _Base(ctx)


# -- printed sigma_-3 ------------------------------------------------------------------

def sigma_minus3_printed(kind, ctx: InteriorContext) -> PdoSymbol:
    """``-|xi|^-2 [sigma_1 |xi|^-2 - i d_xi^mu(|xi|^2) d_mu(|xi|^-2)]`` with ``x``-dependent ``|xi|^2``.

    ``sigma_1`` is the printed first-order part (with ``f`` for kind A).
    """
    kind = OperatorKind.parse(kind)
    idx = ctx.idx
    alg = ctx.alg
    r2 = sum((ctx.ginv[(a, b)] * ctx.xi[a] * ctx.xi[b] for a in idx for b in idx), ZERO)
    s2 = PdoSymbol.term(ctx, 2, r2, prec=2)
    inv = invert_leading(s2)
    cxi, cX = ctx.cxi(), ctx.cX()
    anti = cxi * cX + cX * cxi
    if kind is OperatorKind.A:
        anti = anti * ctx.f_jet
    gs = alg.zero()
    for m in idx:
        gs = gs + alg.one(ctx.gamma_up[m] * ctx.xi[m])
        for n in idx:
            gs = gs - ctx.spin[n] * (ctx.ginv[(m, n)] * ctx.xi[m] * 2)
    s1 = PdoSymbol.term(ctx, 1, (anti + gs) * I_EXPR, prec=1)
    inner = s1.pmul(inv)
    for m in idx:
        inner = inner - xi_derivative(s2, m).pmul(x_derivative(inv, m)).scale(I_EXPR)
    return inv.pmul(inner).scale(-1)


# -- text records -------------------------------------------------------------------------

def render_record(record_id: str, sym: PdoSymbol, order: int) -> str:
    """One component as a text record (deterministic)."""
    lines = [f"record {record_id} order={order} xprec={sym.prec.get(order, 0)}"]
    terms = []
    parts = sym.comps.get(order, {})
    for k in sorted(parts):
        c = parts[k]
        for w in sorted(c.terms, key=lambda w: (len(w), [c.alg.rank[a] for a in w])):
            bits = [f"({c.terms[w].render()})"]
            if k:
                bits.append(f"|xi|^-{2 * k}")
            bits.extend(f"c({a})" for a in w)
            terms.append("*".join(bits))
    lines.append("  " + (" + ".join(terms) if terms else "0"))
    return "\n".join(lines)


class _Val:
    """Parsed value: ``{(k, word): ScalarExpr}``."""

    __slots__ = ("alg", "d")

    def __init__(self, alg, d):
        self.alg = alg
        self.d = {key: v for key, v in d.items() if not v.is_zero()}

    @staticmethod
    def lift(alg, x):
        if isinstance(x, _Val):
            return x
        return _Val(alg, {(0, ()): ScalarExpr.coerce(x)})

    def __add__(self, other):
        other = _Val.lift(self.alg, other)
        out = dict(self.d)
        for key, v in other.d.items():
            out[key] = out[key] + v if key in out else v
        return _Val(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return _Val(self.alg, {k: -v for k, v in self.d.items()})

    def __sub__(self, other):
        return self + (-_Val.lift(self.alg, other))

    def __rsub__(self, other):
        return _Val.lift(self.alg, other) - self

    def __mul__(self, other):
        other = _Val.lift(self.alg, other)
        out: dict = {}
        for (k1, w1), v1 in self.d.items():
            for (k2, w2), v2 in other.d.items():
                for w, cw in self.alg.mul_words(w1, w2).items():
                    key = (k1 + k2, w)
                    t = v1 * v2 * cw
                    out[key] = out[key] + t if key in out else t
        return _Val(self.alg, out)

    def __rmul__(self, other):
        return _Val.lift(self.alg, other) * self

    def __truediv__(self, q):
        return self * ScalarExpr.const(Q(1) / Q.coerce(q))

    def __pow__(self, n):
        out = _Val.lift(self.alg, 1)
        for _ in range(n):
            out = out * self
        return out


class _Hook:
    def __init__(self, alg):
        self.alg = alg

    def name(self, val, parser):
        if val == "c" and parser.peek() == ("sym", "(") :
            parser.take()
            parts = []
            while parser.peek()[0] != "sym" or parser.peek()[1] != ")":
                parts.append(str(parser.take()[1]))
            parser.take("sym", ")")
            name = "".join(parts)
            return _Val(self.alg, {(0, (name,)): ONE_EXPR})
        return None

    def symbol(self, val, parser):
        if val == "|":
            parser.take()
            parser.take("name", "xi")
            parser.take("sym", "|")
            return _XiNorm()
        return None

    def negative_power(self, base, n):
        if isinstance(base, _XiNorm):
            if n % 2:
                raise ValueError("|xi| powers must be even")
            return _Val(self.alg, {(n // 2, ()): ONE_EXPR})
        raise ValueError("negative exponent")


class _XiNorm:
    pass


_HEADER = re.compile(r"record\s+(\S+)\s+order=(-?\d+)\s+xprec=(-?\d+)")


def parse_records(text: str, ctx: InteriorContext) -> dict:
    """Parse records back into ``{record_id: PdoSymbol}``."""
    out = {}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    i = 0
    while i < len(lines):
        m = _HEADER.match(lines[i].strip())
        if not m:
            raise ValueError(f"bad record header: {lines[i]!r}")
        rid, order, xprec = m.group(1), int(m.group(2)), int(m.group(3))
        body = []
        i += 1
        while i < len(lines) and not lines[i].lstrip().startswith("record "):
            body.append(lines[i].strip())
            i += 1
        src = " ".join(body)
        p = _Parser(src, ctx_registry(), _Hook(ctx.alg))
        val = _Val.lift(ctx.alg, p.expr())
        p.take("end")
        parts: dict = {}
        for (k, w), v in val.d.items():
            e = CliffordExpr(ctx.alg, {w: v})
            parts[k] = parts[k] + e if k in parts else e
        out[rid] = PdoSymbol(ctx, {order: parts}, {order: xprec})
    return out


def ctx_registry():
    from .scalar import REGISTRY
    return REGISTRY


def dump_records(kind, ctx: InteriorContext | None = None) -> str:
    """Text records of every printed order -4 term for ``kind``."""
    ctx = ctx or InteriorContext()
    b = _Base(ctx)
    return "\n".join(render_record(t.term_id, t.symbol(ctx, b), -4) for t in printed_terms(kind))


# -- boundary intermediates ---------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryIntermediate:
    """A printed intermediate of the boundary computation.

    ``target`` names the engine quantity it is compared with (see
    :func:`wresidue.boundary.check_intermediates`); ``value`` is an
    :class:`XiNRational` or, for ``*-value`` targets, a scalar multiplying
    ``dx'``.
    """

    item_id: str
    target: str
    value: object
    quote: str


def _xr(num: dict, up: int, down: int):
    from .halfplane import partial_fractions
    return partial_fractions(num, up, down)


def boundary_intermediates(kind, ctx=None) -> list[BoundaryIntermediate]:
    from .geometry import DXN, OMEGA3, WCOV, XI_PRIME, XVEC, BoundaryContext
    kind = OperatorKind.parse(kind)
    ctx = ctx or BoundaryContext()
    alg = ctx.alg
    i = I_EXPR
    h = ctx.hp
    f = ctx.f
    Xn = ctx.Xn
    gx = ctx.gXxi
    om = var(OMEGA3)
    c = alg.c
    cxp, cdn, cw, cX = c(XI_PRIME), c(DXN), c(WCOV), c(XVEC)
    Qm = ctx.Q()

    def k(v):
        return ScalarExpr.const(v)

    out = [BoundaryIntermediate(
        "pi+sigma-1", "pi+sigma-1", _xr({0: (cxp + cdn * i) * k(Fraction(1, 2))}, 1, 0),
        "pi+ sigma_-1 = (c(xi') + i c(dx_n)) / (2(xi_n - i))")]
    if kind is OperatorKind.A:
        inner = {0: cxp * Qm * cxp * k(2) + cxp * cdn * cw * k(2) + (cdn * Qm * cxp + cxp * Qm * cdn - cw) * i,
                 1: (cxp * Qm * cxp + cdn * Qm * cdn + cxp * cdn * cw) * i}
        out.append(BoundaryIntermediate(
            "C1", "C1", _xr({d: v * k(Fraction(-1, 4)) for d, v in inner.items()}, 2, 0),
            "C_1 = -1/(4(xi_n - i)^2) [(2 + i xi_n) c(xi')Q c(xi') + ...]"))
        # (h'/2)[c(dxn)/(4i(x-i)) + (c(dxn) - i c(xi'))/(8(x-i)^2) + (3x - 7i)/(8(x-i)^3)(i c(xi') - c(dxn))]
        a = cdn * (-i) * k(Fraction(1, 4))
        b = (cdn - cxp * i) * k(Fraction(1, 8))
        cc = cxp * i - cdn
        num = {2: a, 1: a * k(-2) * i + b, 0: a * k(-1) + b * (-i) + cc * (-i) * k(Fraction(7, 8))}
        num[1] = num[1] + cc * k(Fraction(3, 8))
        out.append(BoundaryIntermediate(
            "C2", "C2", _xr({d: v * h * k(Fraction(1, 2)) for d, v in num.items()}, 3, 0),
            "C_2 = h'(0)/2 [c(dx_n)/(4i(xi_n - i)) + ...]"))
        c3 = {0: (cxp * cX * cxp * k(2) + (cxp * cX * cdn + cdn * cX * cxp) * i),
              1: (cxp * cX * cxp + cdn * cX * cdn) * i}
        out.append(BoundaryIntermediate(
            "C3", "C3", _xr({d: v * f * k(Fraction(1, 4)) for d, v in c3.items()}, 2, 0),
            "C_3 = (2 + i xi_n)/(4(xi_n - i)^2) f c(xi')c(X)c(xi') + ..."))
        tr1 = (_xr({0: h * i * k(Fraction(3, 2))}, 4, 2)
               + _xr({2: h * k(Fraction(1, 2)), 1: h * (-i) * k(Fraction(1, 2)), 0: -h}, 3, 2))
        out.append(BoundaryIntermediate(
            "trC1", "trace:IV:C1", tr1,
            "tr[C_1 x d_xin sigma_-1] = 3ih'(0)/(2(xi_n - i)^2(1 + xi_n^2)^2) + ..."))
        tr2 = _xr({2: h * k(Fraction(1, 2)), 1: h * (-i) * k(Fraction(1, 2)), 0: h * k(-2)}, 3, 2)
        out.append(BoundaryIntermediate(
            "trC2", "trace:IV:C2", tr2,
            "tr[C_2 x d_xin sigma_-1] = 2ih'(0)(-i xi_n^2 - xi_n + 4i)/(4(xi_n - i)^3(xi_n + i)^2)"))
        tr3 = (_xr({0: f * Xn * i * k(2) + f * gx * k(2)}, 3, 1)
               + _xr({1: f * Xn * k(-4) + f * gx * i * k(4), 2: f * Xn * (-i) * k(4) - f * gx}, 4, 2))
        out.append(BoundaryIntermediate(
            "trC3", "trace:IV:C3", tr3,
            "tr[C_3 x d_xin sigma_-1] = 2i/((xi_n - i)^3(xi_n + i)) f X_n - ..."))
        out.append(BoundaryIntermediate(
            "IV:C1-C2", "value:IV:C1+C2", var("pi") * h * om * k(Fraction(9, 8)),
            "= 9/8 pi h'(0) Omega_3 dx'"))
        out.append(BoundaryIntermediate(
            "IV:C3", "value:IV:C3", -var("pi") * f * Xn * om, "= -f X_n pi Omega_3 dx'"))
        out.append(BoundaryIntermediate(
            "II-integrand", "integrand:II",
            _xr({2: -h * i * om, 1: h * om * k(-2), 0: h * i * om}, 4, 3),
            "Phi_2 = -int int i h'(0)(xi_n - i)^2 / ((xi_n - i)^4 (xi_n + i)^3)"))
        out.append(BoundaryIntermediate(
            "III-integrand", "integrand:III",
            _xr({0: -h * i * om, 1: h * om * k(3)}, 4, 3) + _xr({1: -h * i * om}, 4, 2),
            "Phi_3 = -int int h'(0)(i - 3 xi_n)/(...) - int int h'(0) i xi_n/(...)"))
        # the same integrand assembled from the two printed trace quotients, times -1/2
        out.append(BoundaryIntermediate(
            "III-traces", "integrand:III",
            _xr({0: -h * i * om, 1: h * om * k(3)}, 4, 3) + _xr({1: h * i * om}, 4, 2),
            "= 2h'(0)(i - 3xi_n)/((xi_n - i)^4(xi_n + i)^3) and = -2ih'(0) xi_n/((xi_n - i)^4(xi_n + i)^2)"))
        trv3 = _xr({0: f * Xn * k(4) + f * gx * i * k(4),
                    1: f * Xn * i * k(12) + f * gx * k(-12),
                    2: f * Xn * k(-12) + f * gx * i * k(-12),
                    3: f * Xn * (-i) * k(4) + f * gx * k(4)}, 4, 3)
        out.append(BoundaryIntermediate(
            "trV:C3", "trace:V:C3", trv3,
            "4 (1 - 3xi_n^2 + 3i xi_n - i xi_n^3)/((xi_n - i)^4(xi_n + i)^3) f X_n + ..."))
        trq = (_xr({2: h * i * k(3), 1: h * k(3), 0: h * i * k(-6)}, 3, 3)
               + _xr({1: h * i * k(12)}, 3, 4))
        out.append(BoundaryIntermediate(
            "trV:q1", "trace:V:C1+C2", trq,
            "= 3h'(0)(i xi_n^2 + xi_n - 2i)/((xi - i)^3(xi + i)^3) + 12h'(0) i xi_n/(...)"))
        out.append(BoundaryIntermediate(
            "V:q1", "value:V:C1+C2", var("pi") * h * om * k(Fraction(-9, 8)),
            "= -9/8 pi h'(0) Omega_3 dx'"))
        out.append(BoundaryIntermediate(
            "V:C3", "value:V:C3", var("pi") * f * Xn * om, "= f X_n pi Omega_3 dx'"))
    else:
        c4 = {0: cxp * gx * k(2) + cxp * Xn * i + cdn * gx * i, 1: cxp * gx * i + cdn * Xn * i}
        out.append(BoundaryIntermediate(
            "C4", "C4", _xr({d: v * k(Fraction(1, 2)) for d, v in c4.items()}, 2, 0),
            "C_4 = (2 + i xi_n)/(2(xi_n - i)^2) sum xi_j X_j c(xi') + ..."))
        tr4 = _xr({2: gx * k(-4), 1: gx * i * k(8), 0: gx * k(2)}, 4, 2) + \
            _xr({3: Xn * k(-2), 1: Xn * k(-2)}, 4, 2)
        out.append(BoundaryIntermediate(
            "trC4", "trace:IV:C4", tr4,
            "tr[C_4 x d_xin sigma_-1] = (-4xi_n^2 + 8i xi_n + 2)/(...) sum xi_j X_j + ..."))
        out.append(BoundaryIntermediate(
            "IV:C4", "value:IV:C4", Xn * om * k(Fraction(-1, 2)), "= -1/2 X_n Omega_3 dx'"))
        trv4 = (_xr({2: gx * i * k(-12), 1: gx * k(-16), 0: gx * i * k(4)}, 4, 3)
                + _xr({3: Xn * i * k(-8), 2: Xn * k(-12), 1: Xn * i * k(8), 0: Xn * k(4)}, 4, 3))
        out.append(BoundaryIntermediate(
            "trV:C4", "trace:V:C4", trv4,
            "= -4 (3i xi_n^2 + 4 xi_n - i)/(...) sum xi_j X_j - 4 (2i xi_n^3 + ...)/(...) X_n"))
        out.append(BoundaryIntermediate(
            "V:C4", "value:V:C4", Xn * om * k(Fraction(1, 2)), "= 1/2 X_n Omega_3 dx'"))
    return out
