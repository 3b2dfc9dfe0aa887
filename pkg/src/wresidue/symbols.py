"""Pseudo-differential symbols in the interior jet model.

A :class:`PdoSymbol` stores homogeneous components.  Component ``d`` is a sum
``sum_k C_k(xi, x) |xi|_0^(-2k)`` where each ``C_k`` is a Clifford expression
whose coefficients are polynomials in ``xi_mu``, the coordinates ``x_mu`` and
the formal jets of the context.  Every component carries an x-precision ``p``:
monomials of total x-degree at most ``p`` are exact, higher ones were dropped.
An x-derivative lowers the precision by one.

Composition uses the full asymptotic formula
``sigma(PQ) ~ sum_alpha (-i)^|alpha| / alpha! d_xi^alpha sigma(P) d_x^alpha sigma(Q)``.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial

from .clifford import CliffordExpr
from .geometry import BoundaryContext, InteriorContext, DXN, WCOV, XI_PRIME, XVEC
from .halfplane import XiNRational, partial_fractions
from .scalar import ONE_EXPR, ZERO, Q, ScalarExpr

__all__ = [
    "OperatorKind",
    "PdoSymbol",
    "PrecisionLost",
    "build_square_symbol",
    "build_operator_symbol",
    "build_dirac_symbol",
    "build_inverse_low_orders",
    "compose",
    "parametrix",
    "invert_leading",
    "xi_derivative",
    "x_derivative",
    "derive_square_low_orders",
    "CollarSymbol",
]

MINUS_I = Q(0, -1)
I_EXPR = ScalarExpr.const(Q(0, 1))


class OperatorKind(str, Enum):
    A = "A"   # D + c(X) D^-1 f D
    B = "B"   # D + D^-1 c(X) D

    @classmethod
    def parse(cls, text) -> "OperatorKind":
        if isinstance(text, OperatorKind):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValueError(f"unknown operator kind {text!r}; expected A or B") from None


class PrecisionLost(ValueError):
    """A quantity was requested beyond the tracked x-precision."""


# -- x-degree bookkeeping -------------------------------------------------------

_XDEG_CACHE: dict = {}


def _xdeg(mono, xnames) -> int:
    key = (mono, xnames)
    got = _XDEG_CACHE.get(key)
    if got is None:
        got = sum(e for n, e in mono if n in xnames)
        _XDEG_CACHE[key] = got
    return got


def _truncate(e: ScalarExpr, p: int, xnames) -> ScalarExpr:
    if p < 0:
        return ZERO
    return e.filter(lambda m: _xdeg(m, xnames) <= p)


def _tmul(a: ScalarExpr, b: ScalarExpr, p: int, xnames) -> ScalarExpr:
    """``a * b`` keeping only monomials of x-degree at most ``p``."""
    if p < 0 or a.is_zero() or b.is_zero():
        return ZERO
    la = [(m, c, _xdeg(m, xnames)) for m, c in a.terms.items()]
    lb = [(m, c, _xdeg(m, xnames)) for m, c in b.terms.items()]
    out: dict = {}
    from .scalar import _mono_mul
    for m1, c1, d1 in la:
        if d1 > p:
            continue
        for m2, c2, d2 in lb:
            if d1 + d2 > p:
                continue
            m = _mono_mul(m1, m2)
            c = c1 * c2
            s = out.get(m)
            out[m] = c if s is None else s + c
    return ScalarExpr(out)


def _cmul(a: CliffordExpr, b: CliffordExpr, p: int, xnames) -> CliffordExpr:
    out: dict = {}
    alg = a.alg
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            coef = _tmul(cu, cv, p, xnames)
            if coef.is_zero():
                continue
            for w, cw in alg.mul_words(u, v).items():
                t = coef * cw
                s = out.get(w)
                out[w] = t if s is None else s + t
    return CliffordExpr(alg, out)


# -- the symbol type ----------------------------------------------------------------

class PdoSymbol:
    """``comps[order][k] -> CliffordExpr``; ``prec[order] -> int``."""

    __slots__ = ("ctx", "comps", "prec")

    def __init__(self, ctx: InteriorContext, comps=None, prec=None):
        self.ctx = ctx
        self.comps: dict = {}
        self.prec: dict = dict(prec or {})
        for d, parts in (comps or {}).items():
            kept = {k: c for k, c in parts.items() if not c.is_zero()}
            if kept:
                self.comps[d] = kept
            self.prec.setdefault(d, 2)

    @classmethod
    def term(cls, ctx, order: int, value, k: int = 0, prec: int = 2) -> "PdoSymbol":
        if isinstance(value, ScalarExpr) or not isinstance(value, CliffordExpr):
            value = ctx.alg.one(value)
        value = value.map_coeffs(lambda c: _truncate(c, prec, ctx.x_names))
        return cls(ctx, {order: {k: value}}, {order: prec})

    # -- structure ----------------------------------------------------------------
    def orders(self) -> list[int]:
        return sorted(set(self.comps) | set(self.prec), reverse=True)

    def component(self, order: int) -> "PdoSymbol":
        return PdoSymbol(self.ctx, {order: self.comps.get(order, {})},
                         {order: self.prec.get(order, 2)})

    def truncate_orders(self, lowest: int) -> "PdoSymbol":
        return PdoSymbol(self.ctx, {d: v for d, v in self.comps.items() if d >= lowest},
                         {d: p for d, p in self.prec.items() if d >= lowest})

    def __add__(self, other: "PdoSymbol") -> "PdoSymbol":
        comps = {d: dict(v) for d, v in self.comps.items()}
        prec = dict(self.prec)
        for d, parts in other.comps.items():
            tgt = comps.setdefault(d, {})
            for k, c in parts.items():
                tgt[k] = tgt[k] + c if k in tgt else c
        for d, p in other.prec.items():
            prec[d] = min(prec.get(d, p), p)
        out = PdoSymbol(self.ctx, comps, prec)
        return out._retruncate()

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, q) -> "PdoSymbol":
        s = ScalarExpr.coerce(q) if not isinstance(q, ScalarExpr) else q
        return PdoSymbol(self.ctx, {d: {k: c * s for k, c in v.items()} for d, v in self.comps.items()},
                         self.prec)

    def lmul_const(self, c: CliffordExpr) -> "PdoSymbol":
        return PdoSymbol(self.ctx, {d: {k: c * v for k, v in parts.items()}
                                    for d, parts in self.comps.items()}, self.prec)

    def _retruncate(self) -> "PdoSymbol":
        xn = self.ctx.x_names
        comps = {d: {k: c.map_coeffs(lambda e, p=self.prec[d]: _truncate(e, p, xn))
                     for k, c in parts.items()}
                 for d, parts in self.comps.items()}
        return PdoSymbol(self.ctx, comps, self.prec)

    def pmul(self, other: "PdoSymbol", lowest: int = -10 ** 6) -> "PdoSymbol":
        """Pointwise product of symbols (no derivative terms)."""
        xn = self.ctx.x_names
        comps: dict = {}
        prec: dict = {}
        for d1, parts1 in self._all_parts():
            for d2, parts2 in other._all_parts():
                d = d1 + d2
                if d < lowest:
                    continue
                p = min(self.prec[d1], other.prec[d2])
                prec[d] = min(prec.get(d, p), p)
        for d1, parts1 in self._all_parts():
            for d2, parts2 in other._all_parts():
                d = d1 + d2
                if d < lowest:
                    continue
                tgt = comps.setdefault(d, {})
                for k1, c1 in parts1.items():
                    for k2, c2 in parts2.items():
                        r = _cmul(c1, c2, prec[d], xn)
                        if r.is_zero():
                            continue
                        k = k1 + k2
                        tgt[k] = tgt[k] + r if k in tgt else r
        return PdoSymbol(self.ctx, comps, prec)

    def _all_parts(self):
        for d in self.orders():
            yield d, self.comps.get(d, {})

    # -- evaluation ----------------------------------------------------------------
    def at_base(self) -> "PdoSymbol":
        return PdoSymbol(self.ctx, {d: {k: c.map_coeffs(self.ctx.at_base) for k, c in parts.items()}
                                    for d, parts in self.comps.items()},
                         {d: min(p, 0) for d, p in self.prec.items()})

    def combined(self, order: int) -> tuple[CliffordExpr, int]:
        """Component ``order`` over the common denominator: ``(N, K)`` with value ``N |xi|_0^-2K``."""
        parts = self.comps.get(order, {})
        if not parts:
            return self.ctx.alg.zero(), 0
        K = max(parts)
        r2 = self.ctx.xi_sq()
        out = self.ctx.alg.zero()
        for k, c in parts.items():
            fac = r2 ** (K - k)
            out = out + c * fac
        return out, K

    def is_zero_component(self, order: int) -> bool:
        return self.combined(order)[0].is_zero()

    def on_cosphere(self, order: int) -> CliffordExpr:
        """Component ``order`` restricted to ``|xi|_0 = 1`` (a polynomial in xi)."""
        out = self.ctx.alg.zero()
        for c in self.comps.get(order, {}).values():
            out = out + c
        return out

    def check_homogeneity(self) -> list[str]:
        """Return a list of violations of ``deg_xi - 2k == order``."""
        bad = []
        xin = set(self.ctx.xi_names)
        for d, parts in self.comps.items():
            for k, c in parts.items():
                for coef in c.terms.values():
                    for m in coef.terms:
                        deg = sum(e for n, e in m if n in xin)
                        if deg - 2 * k != d:
                            bad.append(f"order {d}: |xi|^-{2 * k} times xi-degree {deg}")
        return bad

    def render(self) -> str:
        lines = []
        for d in self.orders():
            lines.append(f"[order {d}, x-precision {self.prec.get(d)}]")
            for k in sorted(self.comps.get(d, {})):
                suffix = f" * |xi|^-{2 * k}" if k else ""
                lines.append(f"  ({self.comps[d][k].render()}){suffix}")
        return "\n".join(lines)


# -- derivatives -------------------------------------------------------------------

def xi_derivative(sym: PdoSymbol, mu: int) -> PdoSymbol:
    """``d / d xi_mu``; lowers every order by one."""
    ctx = sym.ctx
    name = f"xi{mu}"
    ximu = ctx.xi[mu]
    comps: dict = {}
    for d, parts in sym.comps.items():
        tgt = comps.setdefault(d - 1, {})
        for k, c in parts.items():
            dc = c.map_coeffs(lambda e: e.diff(name))
            if not dc.is_zero():
                tgt[k] = tgt[k] + dc if k in tgt else dc
            if k:
                extra = c * (ximu.scale(-2 * k))
                tgt[k + 1] = tgt[k + 1] + extra if k + 1 in tgt else extra
    return PdoSymbol(ctx, comps, {d - 1: p for d, p in sym.prec.items()})


def x_derivative(sym: PdoSymbol, mu: int) -> PdoSymbol:
    """``d / d x_mu``; lowers every precision by one."""
    name = f"x{mu}"
    comps = {d: {k: c.map_coeffs(lambda e: e.diff(name)) for k, c in parts.items()}
             for d, parts in sym.comps.items()}
    return PdoSymbol(sym.ctx, comps, {d: p - 1 for d, p in sym.prec.items()})


def _multi_xi(sym, seq, cache):
    key = ("xi", id(sym), seq)
    if key not in cache:
        cur = sym if not seq else xi_derivative(_multi_xi(sym, seq[:-1], cache), seq[-1])
        cache[key] = cur
    return cache[key]


def _multi_x(sym, seq, cache):
    key = ("x", id(sym), seq)
    if key not in cache:
        cur = sym if not seq else x_derivative(_multi_x(sym, seq[:-1], cache), seq[-1])
        cache[key] = cur
    return cache[key]


def compose(p: PdoSymbol, q: PdoSymbol, lowest: int) -> PdoSymbol:
    """Symbol of ``P Q`` keeping orders ``>= lowest``."""
    ctx = p.ctx
    top = max(p.orders()) + max(q.orders())
    max_alpha = max(0, max(q.prec.values(), default=0))
    max_alpha = min(max_alpha, top - lowest)
    out = PdoSymbol(ctx, {}, {})
    cache: dict = {}
    for m in range(max_alpha + 1):
        for seq in combinations_with_replacement(ctx.idx, m):
            weight = Fraction(1)
            for j in set(seq):
                weight /= factorial(seq.count(j))
            coeff = MINUS_I ** m * Q(weight)
            dp = _multi_xi(p, seq, cache)
            dq = _multi_x(q, seq, cache)
            # negative precision marks an order as unknown rather than zero
            term = dp.pmul(dq, lowest)
            out = out + term.scale(ScalarExpr.const(coeff))
    return out._retruncate()


# -- inversion ---------------------------------------------------------------------

def _invert_scalar(ctx, s: ScalarExpr, order: int, prec: int) -> PdoSymbol:
    """Inverse of a scalar symbol whose base-point part is ``c |xi|_0^order``."""
    if order % 2:
        raise ValueError("scalar leading symbol must have even order")
    m = order // 2
    base = ctx.at_base(s)
    r2m = ctx.xi_sq() ** m
    # identify c with base == c * |xi|_0^(2m)
    c = None
    for mono, q in base.terms.items():
        c = q
        break
    if c is None or not (base - r2m.scale(c)).is_zero():
        raise ValueError("leading symbol is not a multiple of |xi|^2 at the base point")
    rest = _truncate(s - r2m.scale(c), prec, ctx.x_names)
    cinv = Q(1) / c
    comps: dict = {}
    term = ONE_EXPR
    j = 0
    while not term.is_zero():
        val = term.scale(cinv ** (j + 1) * (Q(-1) ** j))
        k = m * (j + 1)
        comps[k] = ctx.alg.one(val)
        j += 1
        term = _tmul(term, rest, prec, ctx.x_names)
    return PdoSymbol(ctx, {-order: comps}, {-order: prec})


def invert_leading(sym: PdoSymbol) -> PdoSymbol:
    """Inverse of the top component, valid to its x-precision."""
    ctx = sym.ctx
    d = max(sym.comps)
    prec = sym.prec[d]
    lead = sym.component(d)
    if lead.comps[d].keys() != {0}:
        raise ValueError("leading symbol must be polynomial in xi")
    val = lead.comps[d][0]
    if set(val.terms) == {()}:
        return _invert_scalar(ctx, val.terms[()], d, prec)
    sq = lead.pmul(lead)
    sqv = sq.comps[2 * d]
    if sqv.keys() != {0} or set(sqv[0].terms) != {()}:
        raise ValueError("leading symbol does not square to a scalar")
    inv_sq = _invert_scalar(ctx, sqv[0].terms[()], 2 * d, prec)
    return lead.pmul(inv_sq)


def parametrix(sym: PdoSymbol, depth: int = 3) -> PdoSymbol:
    """First ``depth`` components of a parametrix of ``sym``.

    Each new component solves ``sigma_top q_new + R = 0`` where ``R`` is the
    matching component of ``sym o (q so far)``, with every term of the
    composition formula kept.
    """
    top = max(sym.comps)
    inv = invert_leading(sym)
    q = inv
    for ell in range(1, depth):
        target = -ell
        comp = compose(sym, q, target).component(target)
        if comp.prec[target] < 0:
            raise PrecisionLost(f"order {target} has no x-precision left")
        new = inv.pmul(comp).scale(-1)
        new = PdoSymbol(sym.ctx, new.comps, {-top - ell: comp.prec[target]})
        q = q + new
    return q


def recursion_pieces(sym: PdoSymbol) -> dict:
    """Order ``-4`` of the parametrix of a second-order ``sym``, split by source.

    With ``q_k`` the parametrix components and ``s_k`` those of ``sym``:

    * ``s1q3``: ``-q_-2 s_1 q_-3``
    * ``s0q2``: ``-q_-2 s_0 q_-2``
    * ``ds1q2``: ``i q_-2 sum d_xi s_1 d_x q_-2``
    * ``ds2q3``: ``i q_-2 sum d_xi s_2 d_x q_-3``
    * ``dds2q2``: ``q_-2 sum_{|a|=2} (1/a!) d_xi^a s_2 d_x^a q_-2``

    The pieces add up to the ``-4`` component of :func:`parametrix`.
    """
    if max(sym.comps) != 2:
        raise ValueError("recursion pieces are defined for second-order symbols")
    ctx = sym.ctx
    q = parametrix(sym, depth=2)
    q2, q3 = q.component(-2), q.component(-3)
    s2, s1, s0 = sym.component(2), sym.component(1), sym.component(0)
    inv = q2
    pieces = {
        "s1q3": s1.pmul(q3),
        "s0q2": s0.pmul(q2),
    }
    ds1 = PdoSymbol(ctx, {}, {})
    ds2 = PdoSymbol(ctx, {}, {})
    for m in ctx.idx:
        ds1 = ds1 + xi_derivative(s1, m).pmul(x_derivative(q2, m)).scale(MINUS_I)
        ds2 = ds2 + xi_derivative(s2, m).pmul(x_derivative(q3, m)).scale(MINUS_I)
    pieces["ds1q2"] = ds1
    pieces["ds2q3"] = ds2
    dd = PdoSymbol(ctx, {}, {})
    cache: dict = {}
    for seq in combinations_with_replacement(ctx.idx, 2):
        weight = Fraction(1)
        for j in set(seq):
            weight /= factorial(seq.count(j))
        term = _multi_xi(s2, seq, cache).pmul(_multi_x(q2, seq, cache))
        dd = dd + term.scale(ScalarExpr.const(MINUS_I ** 2 * Q(weight)))
    pieces["dds2q2"] = dd
    return {k: inv.pmul(v.component(-2)).scale(-1).at_base().component(-4)
            for k, v in pieces.items()}


# -- operator symbols ---------------------------------------------------------------

def _sym(ctx, order, value, k=0, prec=2):
    return PdoSymbol.term(ctx, order, value, k, prec)


def _cm(ctx, p: int, *factors) -> CliffordExpr:
    """Truncated product of Clifford or scalar factors (x-degree at most ``p``)."""
    xn = ctx.x_names
    out = ctx.alg.one()
    for f in factors:
        if not isinstance(f, CliffordExpr):
            f = ctx.alg.one(f)
        out = _cmul(out, f, p, xn)
    return out


def _dx(e, m):
    if isinstance(e, CliffordExpr):
        return e.map_coeffs(lambda c: c.diff(f"x{m}"))
    return e.diff(f"x{m}")


def _gravity_square(ctx):
    """Components of ``D^2`` as printed: orders 2, 1, 0."""
    g2 = ZERO
    for a in ctx.idx:
        for b in ctx.idx:
            g2 = g2 + ctx.ginv[(a, b)] * ctx.xi[a] * ctx.xi[b]
    s1 = ctx.alg.zero()
    for m in ctx.idx:
        s1 = s1 + _cm(ctx, 1, ctx.gamma_up[m] * ctx.xi[m])
        for nn in ctx.idx:
            s1 = s1 - _cm(ctx, 1, ctx.spin[nn], ctx.ginv[(m, nn)], ctx.xi[m], 2)
    s1 = s1 * I_EXPR
    s0 = ctx.alg.one(ctx.s.scale(Fraction(1, 4)))
    for m in ctx.idx:
        for nn in ctx.idx:
            s0 = s0 - _cm(ctx, 0, ctx.ginv[(m, nn)], _dx(ctx.spin[m], nn))
            s0 = s0 - _cm(ctx, 0, ctx.spin[nn], ctx.spin[m], ctx.ginv[(m, nn)])
        s0 = s0 + _cm(ctx, 0, ctx.spin[m], ctx.gamma_up[m])
    return g2, s1, s0


def _gamma_sigma_xi(ctx, p):
    """``(Gamma^mu - 2 sigma^mu) xi_mu``."""
    out = ctx.alg.zero()
    for m in ctx.idx:
        out = out + _cm(ctx, p, ctx.gamma_up[m] * ctx.xi[m])
        for nn in ctx.idx:
            out = out - _cm(ctx, p, ctx.spin[nn], ctx.ginv[(m, nn)], ctx.xi[m], 2)
    return out


def build_square_symbol(kind, ctx: InteriorContext) -> PdoSymbol:
    """Symbol of ``A^2`` or ``B^2`` exactly as printed, in the interior jet model.

    Orders 2, 1, 0 carry x-precision 2, 1, 0 respectively.
    """
    kind = OperatorKind.parse(kind)
    g2, s1, s0 = _gravity_square(ctx)
    alg = ctx.alg
    cxi, cX, cdf = ctx.cxi(), ctx.cX(), ctx.cdf()
    gs = ctx.gamma_sigma()
    i = I_EXPR
    if kind is OperatorKind.A:
        f = ctx.f_jet
        s1 = s1 + _cm(ctx, 1, cxi, cX, i, f) + _cm(ctx, 1, cX, cxi, i, f)
        base0 = (_cm(ctx, 0, gs, cX, i, f) + _cm(ctx, 0, cX, gs, i, f)
                 + _cm(ctx, 0, f, f, ctx.X_norm_sq()))
        over2 = -_cm(ctx, 0, cxi, cX, cxi, cdf) - _cm(ctx, 0, cX, cxi, cdf, cxi)
        return (_sym(ctx, 2, g2, prec=2) + _sym(ctx, 1, s1, prec=1)
                + _sym(ctx, 0, s0 + base0, prec=0) + _sym(ctx, 0, over2, k=1, prec=0))
    # kind B
    s1 = s1 + _cm(ctx, 1, cxi, cX, i) + _cm(ctx, 1, cX, cxi, i)
    base0 = _cm(ctx, 0, cX, gs, i) - _cm(ctx, 0, ctx.X_norm_sq())
    over2 = -_cm(ctx, 0, cxi, cX, _gamma_sigma_xi(ctx, 0)) + _cm(ctx, 0, cxi, gs, cxi, cX, i)
    # |xi|^-4 [c(xi) c(dx_mu) d_mu(c(xi)) |xi|^2 - c(xi) c(dx_mu) c(xi) d_mu(|xi|^2)] c(X)
    over4 = alg.zero()
    over2b = alg.zero()
    for m in ctx.idx:
        over2b = over2b + _cm(ctx, 0, cxi, ctx.cdx(m), _dx(cxi, m), cX)
        over4 = over4 - _cm(ctx, 0, cxi, ctx.cdx(m), cxi, cX, _dx(g2, m))
    # -[d_xi^mu(|xi|^-2) c(xi) + |xi|^-2 d_xi^mu c(xi)] [d_mu(c(X)) |xi|^2 + c(X) d_mu(|xi|^2)]
    # with d_xi^mu(|xi|^-2) = -2 xi^mu |xi|^-4
    tail0 = alg.zero()
    tail2 = alg.zero()
    tail4 = alg.zero()
    for m in ctx.idx:
        for nn in ctx.idx:
            gmn = ctx.ginv[(m, nn)]
            left4 = (cxi, ctx.xi[nn], gmn, -2)
            left2 = (ctx.cdx(nn), gmn)
            tail2 = tail2 - _cm(ctx, 0, *left4, _dx(cX, m))
            tail4 = tail4 - _cm(ctx, 0, *left4, cX, _dx(g2, m))
            tail0 = tail0 - _cm(ctx, 0, *left2, _dx(cX, m))
            tail2 = tail2 - _cm(ctx, 0, *left2, cX, _dx(g2, m))
    return (_sym(ctx, 2, g2, prec=2) + _sym(ctx, 1, s1, prec=1)
            + _sym(ctx, 0, s0 + base0 + tail0, prec=0)
            + _sym(ctx, 0, over2 + over2b + tail2, k=1, prec=0)
            + _sym(ctx, 0, over4 + tail4, k=2, prec=0))


def build_dirac_symbol(ctx: InteriorContext, prec: int = 2) -> PdoSymbol:
    """``sigma(D) = i c(xi) + gamma^mu sigma_mu``."""
    return _sym(ctx, 1, ctx.cxi() * I_EXPR, prec=prec) + _sym(ctx, 0, ctx.gamma_sigma(), prec=prec)


def build_operator_symbol(kind, ctx: InteriorContext, lowest: int = -1, prec: int = 2) -> PdoSymbol:
    """Symbol of ``A`` or ``B`` itself, obtained by composing its factors."""
    kind = OperatorKind.parse(kind)
    D = build_dirac_symbol(ctx, prec)
    Dinv = parametrix(D, depth=1 - lowest)
    cX = _sym(ctx, 0, ctx.cX(), prec=prec)
    if kind is OperatorKind.A:
        f = _sym(ctx, 0, ctx.f_jet, prec=prec)
        tail = compose(cX, compose(Dinv, compose(f, D, lowest - 1), lowest), lowest)
    else:
        tail = compose(Dinv, compose(cX, D, lowest - 1), lowest)
    return (D + tail).truncate_orders(lowest)


def derive_square_low_orders(kind, ctx: InteriorContext) -> PdoSymbol:
    """``sigma(T o T)`` for ``T`` the operator symbol, orders 2..0, at the base point."""
    T = build_operator_symbol(kind, ctx, lowest=-1, prec=1)
    return compose(T, T, 0)


# -- boundary symbols ----------------------------------------------------------------

class CollarSymbol:
    """Boundary symbol at ``|xi'| = 1``: ``sum_k N_k(xi_n) / (1 + xi_n^2)^k``.

    ``N_k`` maps a power of ``xi_n`` to a Clifford coefficient in the collar
    algebra.  Only the first normal derivative is supported, and only for
    numerators of Clifford degree at most one, where differentiating the
    normal form is exact.
    """

    def __init__(self, ctx: BoundaryContext, parts: dict):
        self.ctx = ctx
        self.parts = {k: {d: c for d, c in v.items() if not c.is_zero()} for k, v in parts.items()}

    def rational(self) -> XiNRational:
        out = XiNRational()
        for k, num in self.parts.items():
            if num:
                out = out + partial_fractions(num, k, k)
        return out

    def x_derivative(self, j: int) -> "CollarSymbol":
        ctx = self.ctx
        if j != ctx.n:
            # tangential derivatives of c(xi) and |xi|^2 vanish at the base point
            return CollarSymbol(ctx, {})
        alg = ctx.alg
        out: dict = {}

        def add(k, d, c):
            tgt = out.setdefault(k, {})
            tgt[d] = tgt[d] + c if d in tgt else c

        for k, num in self.parts.items():
            for d, c in num.items():
                if any(len(w) > 1 for w in c.terms):
                    raise ValueError("normal derivative needs a Clifford-degree-one numerator")
                dc = alg.zero()
                for w, coef in c.terms.items():
                    if w == (XI_PRIME,):
                        dc = dc + alg.c(WCOV) * coef
                    elif w and w[0] not in (DXN,):
                        raise ValueError(f"no normal derivative rule for c({w[0]})")
                add(k, d, dc)
                if k:
                    add(k + 1, d, c * ctx.hp.scale(-k))
        return CollarSymbol(ctx, out)


def _cxi_collar(ctx: BoundaryContext) -> dict:
    """``c(xi) = c(xi') + xi_n c(dx_n)`` as a polynomial in ``xi_n``."""
    return {0: ctx.alg.c(XI_PRIME), 1: ctx.alg.c(DXN)}


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for d1, c1 in a.items():
        for d2, c2 in b.items():
            t = c1 * c2
            if t.is_zero():
                continue
            out[d1 + d2] = out[d1 + d2] + t if d1 + d2 in out else t
    return out


def _padd(*polys) -> dict:
    out: dict = {}
    for p in polys:
        for d, c in p.items():
            out[d] = out[d] + c if d in out else c
    return out


def _pscale(a: dict, s) -> dict:
    return {d: c * s for d, c in a.items()}


def collar_sigma0(kind, ctx: BoundaryContext) -> CollarSymbol:
    """``sigma_0`` of the perturbed first-order operator at the boundary point."""
    kind = OperatorKind.parse(kind)
    alg = ctx.alg
    q = ctx.Q()
    if kind is OperatorKind.A:
        return CollarSymbol(ctx, {0: {0: q + alg.c(XVEC) * ctx.f}})
    # Q - c(X) + 2 c(xi) xi(X) / |xi|^2 with xi(X) = g(X, xi') + xi_n X_n
    xiX = {0: alg.one(ctx.gXxi), 1: alg.one(ctx.Xn)}
    return CollarSymbol(ctx, {0: {0: q - alg.c(XVEC)},
                              1: _pscale(_pmul(_cxi_collar(ctx), xiX), 2)})


def build_inverse_low_orders(kind, ctx):
    """``sigma_{-1}`` and ``sigma_{-2}`` of the inverse of ``A`` or ``B``.

    For a :class:`BoundaryContext` the result is ``{-1: CollarSymbol, -2: CollarSymbol}``
    at the boundary base point.  For an :class:`InteriorContext` the same
    formula is built from jets as a :class:`PdoSymbol`.
    """
    kind = OperatorKind.parse(kind)
    if isinstance(ctx, BoundaryContext):
        return _collar_inverse(kind, ctx)
    return _interior_inverse(kind, ctx)


def _collar_inverse(kind, ctx: BoundaryContext) -> dict:
    alg = ctx.alg
    i = I_EXPR
    cxi = _cxi_collar(ctx)
    s_m1 = CollarSymbol(ctx, {1: _pscale(cxi, i)})
    # c(xi) sigma_0 c(xi) / |xi|^4
    s0 = collar_sigma0(kind, ctx)
    parts: dict = {}
    for k, num in s0.parts.items():
        parts[k + 2] = _padd(parts.get(k + 2, {}), _pmul(_pmul(cxi, num), cxi))
    # c(xi) c(dx_n) [c(w) |xi|^2 - c(xi) h'] / |xi|^6
    cd = _pmul(cxi, {0: alg.c(DXN)})
    r2 = {0: alg.one(), 2: alg.one()}
    bracket = _padd(_pmul(r2, {0: alg.c(WCOV)}), _pscale(cxi, -ctx.hp))
    parts[3] = _padd(parts.get(3, {}), _pmul(cd, bracket))
    return {-1: s_m1, -2: CollarSymbol(ctx, parts)}


def _interior_inverse(kind, ctx: InteriorContext) -> PdoSymbol:
    alg = ctx.alg
    cxi = ctx.cxi()
    gs = ctx.gamma_sigma()
    if kind is OperatorKind.A:
        s0 = _sym(ctx, 0, gs + ctx.cX() * ctx.f_jet, prec=1)
    else:
        s0 = (_sym(ctx, 0, gs - ctx.cX(), prec=1)
              + _sym(ctx, 0, cxi * ctx.xi_of_X() * ScalarExpr.const(2), k=1, prec=1))
    r2 = ZERO
    for a in ctx.idx:
        for b in ctx.idx:
            r2 = r2 + ctx.ginv[(a, b)] * ctx.xi[a] * ctx.xi[b]
    m1 = _sym(ctx, -1, cxi * I_EXPR, k=1, prec=1)
    c = _sym(ctx, 1, cxi, prec=1)
    part1 = c.pmul(s0).pmul(c)
    # c(xi) c(dx_j) [d_j(c(xi)) |xi|^2 - c(xi) d_j(|xi|^2)]
    acc = alg.zero()
    for j in ctx.idx:
        dcx = cxi.map_coeffs(lambda e, j=j: e.diff(f"x{j}"))
        dr2 = r2.diff(f"x{j}")
        acc = acc + cxi * ctx.cdx(j) * (dcx * ctx.xi_sq() - cxi * dr2)
    comps = {-2: {}}
    for k, v in part1.comps[2].items():
        comps[-2][k + 2] = v
    comps[-2][3] = acc
    m2 = PdoSymbol(ctx, comps, {-2: 0})._retruncate()
    return m1 + m2
