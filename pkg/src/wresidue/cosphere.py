"""Cosphere integration and recognition of densities.

``sphere_moment`` integrates monomials in ``xi`` over the unit sphere
``S^(n-1)`` exactly; odd monomials vanish and even ones are a rational multiple
of the formal volume ``VolS3`` (for ``n = 4``).  ``interior_density`` runs the
whole interior pipeline: square symbol, parametrix, trace of the order ``-n``
component at the base point, cosphere integration, and recognition of the
result in a fixed basis of invariant expressions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .geometry import InteriorContext
from .scalar import ZERO, Q, ScalarExpr, declare, substitute, var

__all__ = [
    "sphere_moment",
    "integrate_cosphere",
    "DensityExpr",
    "SecondJetLeak",
    "UnrecognizedDensity",
    "recognize_interior",
    "interior_density",
    "GRAVITY_CONSTANT",
    "vol_substitution",
]

VOL = declare("VolS3", "even")
PI = declare("pi", "even")

# classical normalisation of the pure-gravity part: (1/12) s tr[id].
# Imported as a constant; the engine never derives it.
GRAVITY_CONSTANT = Fraction(1, 12)


class SecondJetLeak(ValueError):
    """Curvature jets survived in a perturbation term after integration."""


class UnrecognizedDensity(ValueError):
    """A residual remained after projecting onto the invariant basis."""


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def sphere_moment(alpha: Iterable[int], n: int = 4) -> ScalarExpr:
    """``int_{S^(n-1)} xi^alpha`` as a multiple of the formal sphere volume.

    For even exponents the value is ``Vol * prod (a_i - 1)!! / (n (n+2) ... (n + |a| - 2))``.
    """
    alpha = tuple(alpha)
    if len(alpha) > n:
        raise ValueError("multi-index longer than the dimension")
    if any(a < 0 for a in alpha):
        raise ValueError("negative exponent")
    if any(a % 2 for a in alpha):
        return ZERO
    total = sum(alpha)
    num = 1
    for a in alpha:
        num *= _double_factorial(a - 1)
    den = 1
    for j in range(0, total, 2):
        den *= n + j
    vol = var(VOL) if n == 4 else var(declare(f"VolS{n - 1}", "even"))
    return vol.scale(Fraction(num, den))


def integrate_cosphere(e: ScalarExpr, xi_names: tuple, n: int = 4) -> ScalarExpr:
    """Integrate a polynomial in ``xi`` (other symbols are coefficients) over ``S^(n-1)``."""
    out = ZERO
    moments: dict = {}
    for mono, cof in e.collect(xi_names).items():
        d = dict(mono)
        alpha = tuple(d.get(x, 0) for x in xi_names)
        m = moments.get(alpha)
        if m is None:
            m = moments[alpha] = sphere_moment(alpha, n)
        if not m.is_zero():
            out = out + cof * m
    return out


def vol_substitution(e: ScalarExpr) -> ScalarExpr:
    """Replace ``VolS3`` by ``2 pi^2``."""
    return substitute(e, {VOL: var(PI) * var(PI) * 2})


# -- recognition ----------------------------------------------------------------

BASIS_DOC = {
    "div(fX)": "sum_j d_j(f X_j) = f div X + X(df)",
    "X(df)": "sum_j X_j d_j f",
    "|X|^2": "g(X, X)",
    "f^2|X|^2": "f^2 g(X, X)",
    "div(X)": "sum_j d_j X_j",
    "|X||df|": "|X| |df| (never produced by a polynomial computation)",
    "s": "scalar curvature",
    "h'": "h'(0)",
    "f X_n": "f X_n",
    "X_n": "X_n",
    "1": "constant",
}


def _basis_polys(ctx: InteriorContext) -> list[tuple[str, ScalarExpr, tuple]]:
    """(name, polynomial, pivot monomial) in triangular order."""
    idx = ctx.idx
    f = ctx.f
    X = ctx.X
    dX = ctx.dX
    df = ctx.df
    divX = sum((dX[(j, j)] for j in idx), ZERO)
    Xdf = sum((X[j] * df[j] for j in idx), ZERO)
    XX = sum((X[j] * X[j] for j in idx), ZERO)
    return [
        ("div(fX)", f * divX + Xdf, ((F_NAME, 1), ("dX1_1", 1))),
        ("X(df)", Xdf, (("X1", 1), ("df1", 1))),
        ("f^2|X|^2", f * f * XX, (("X1", 2), (F_NAME, 2))),
        ("|X|^2", XX, (("X1", 2),)),
        ("div(X)", divX, (("dX1_1", 1),)),
        ("s", ctx.s, ((S_NAME, 1),)),
    ]


F_NAME = "f"
S_NAME = "s"


@dataclass
class DensityExpr:
    """``sum coeff[name] * basis[name]`` against a measure.

    Coefficients are scalars in the formal constants (``pi``, ``VolS3``,
    ``Omega3``); basis names are listed in ``BASIS_DOC``.
    """

    terms: dict = field(default_factory=dict)
    measure: str = "dVol_M"

    def coefficient(self, name: str) -> ScalarExpr:
        return self.terms.get(name, ZERO)

    def __add__(self, other: "DensityExpr") -> "DensityExpr":
        if other.measure != self.measure:
            raise ValueError("cannot add densities with different measures")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, ZERO) + v
        return DensityExpr({k: v for k, v in out.items() if not v.is_zero()}, self.measure)

    def scale(self, c) -> "DensityExpr":
        c = ScalarExpr.coerce(c)
        return DensityExpr({k: v * c for k, v in self.terms.items() if not (v * c).is_zero()},
                           self.measure)

    def map_coeffs(self, fn) -> "DensityExpr":
        out = {k: fn(v) for k, v in self.terms.items()}
        return DensityExpr({k: v for k, v in out.items() if not v.is_zero()}, self.measure)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.terms.values())

    def __eq__(self, other):
        if not isinstance(other, DensityExpr):
            return NotImplemented
        return self.measure == other.measure and (self + other.scale(-1)).is_zero()

    def render(self) -> str:
        if self.is_zero():
            return f"0 {self.measure}"
        bits = []
        for k in sorted(self.terms, key=_basis_rank):
            c = self.terms[k].render()
            bits.append(f"({c})" if k == "1" else f"({c})*{k}")
        return " + ".join(bits) + f" {self.measure}"

    def to_json(self) -> dict:
        return {
            "measure": self.measure,
            "terms": {k: self.terms[k].render() for k in sorted(self.terms, key=_basis_rank)},
            "text": self.render(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _basis_rank(name: str):
    order = list(BASIS_DOC)
    return (order.index(name) if name in order else len(order), name)


def recognize_interior(ctx: InteriorContext, e: ScalarExpr, measure="dVol_M") -> DensityExpr:
    """Express ``e`` (polynomial in jets, coefficients in constants) in the basis."""
    jet_names = set(ctx.perturbation_names) | {S_NAME}
    rest = e
    out: dict = {}
    for name, poly, pivot in _basis_polys(ctx):
        pivot = tuple(sorted(pivot))
        coef = _coefficient_of(rest, pivot, jet_names)
        if coef.is_zero():
            continue
        ref = _coefficient_of(poly, pivot, jet_names)
        c = coef * ScalarExpr.const(Q(1) / ref.constant_value())
        out[name] = c
        rest = rest - poly * c
    if not rest.is_zero():
        raise UnrecognizedDensity(f"residual after recognition: {rest.render()}")
    return DensityExpr(out, measure)


def _coefficient_of(e: ScalarExpr, pivot: tuple, jet_names) -> ScalarExpr:
    out = {}
    for mono, c in e.terms.items():
        jet = tuple(p for p in mono if p[0] in jet_names)
        if jet == pivot:
            rest = tuple(p for p in mono if p[0] not in jet_names)
            out[rest] = c
    return ScalarExpr(out)


# -- interior pipeline ------------------------------------------------------------

DISCREPANCY_SCHEMA = {
    "type": "object",
    "required": ["term_id", "engine_value", "paper_value", "location_quote"],
    "properties": {
        "term_id": {"type": "string"},
        "engine_value": {"type": "string"},
        "paper_value": {"type": "string"},
        "location_quote": {"type": "string"},
        "note": {"type": "string"},
    },
}


@dataclass
class Discrepancy:
    term_id: str
    engine_value: str
    paper_value: str
    location_quote: str
    note: str = ""

    def to_json(self) -> dict:
        out = {"term_id": self.term_id, "engine_value": self.engine_value,
               "paper_value": self.paper_value, "location_quote": self.location_quote}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class InteriorResult:
    """Interior density of ``A^-2`` or ``B^-2``.

    ``perturbation`` evaluates the printed order ``-4`` term list with the
    engine; ``generated`` is the same block taken from the parametrix of the
    printed square symbol.  Both are kept, and every disagreement with a
    printed value is listed in ``discrepancies``.
    """

    kind: str
    perturbation: DensityExpr
    gravity: DensityExpr
    total: DensityExpr
    generated: DensityExpr
    per_term: dict
    pieces: dict
    gravity_block_match: bool
    discrepancies: list
    raw_trace_integral: ScalarExpr

    @property
    def matches_paper(self) -> bool:
        """Whether the perturbation density equals the printed theorem."""
        return not any(d.term_id == f"theorem-{self.kind}" for d in self.discrepancies)

    def to_json(self) -> dict:
        return {
            "operator": self.kind,
            "density": self.total.to_json(),
            "matches_paper": self.matches_paper,
            "perturbation": self.perturbation.to_json(),
            "gravity": self.gravity.to_json(),
            "generated_perturbation": self.generated.to_json(),
            "per_term": {k: v.to_json()["text"] for k, v in self.per_term.items()},
            "pieces": {k: {"generated": g.to_json()["text"], "printed": p.to_json()["text"]}
                       for k, (g, p) in self.pieces.items()},
            "gravity_block_match": self.gravity_block_match,
            "discrepancies": [d.to_json() for d in self.discrepancies],
        }


def split_blocks(ctx: InteriorContext, e: ScalarExpr) -> tuple[ScalarExpr, ScalarExpr]:
    """Split into (perturbation, gravity) parts; mixed terms are an error."""
    pert_names = ctx.perturbation_names
    grav_names = ctx.gravity_names
    pert, grav = {}, {}
    for mono, c in e.terms.items():
        names = {n for n, _ in mono}
        has_p = bool(names & pert_names)
        has_g = bool(names & grav_names)
        if has_p and has_g:
            raise SecondJetLeak(f"mixed curvature/perturbation term survives: {mono}")
        (pert if has_p else grav)[mono] = c
    return ScalarExpr(pert), ScalarExpr(grav)


def trace_integral(sym, order: int) -> ScalarExpr:
    """``int_{|xi|=1} tr[sigma_order(x0, xi)] dxi`` (formal ``VolS3``)."""
    ctx = sym.ctx
    comp = sym.at_base().on_cosphere(order)
    return integrate_cosphere(comp.trace(), ctx.xi_names, ctx.n)


def _pert_density(ctx, sym, order, substitute_volume=True) -> DensityExpr:
    pert, _ = split_blocks(ctx, trace_integral(sym, order))
    if substitute_volume:
        pert = vol_substitution(pert)
    return recognize_interior(ctx, pert)


def _symbol_blocks(ctx, sym, order):
    """Split the numerator of one component into perturbation and gravity words."""
    num, k = sym.combined(order)
    pert, grav = {}, {}
    for w, c in num.terms.items():
        p, g = split_blocks(ctx, c)
        pert[w], grav[w] = p, g
    return num.__class__(ctx.alg, pert), num.__class__(ctx.alg, grav), k


def _same_component(ctx, a, b, order, block: int) -> bool:
    """Compare one block (0 perturbation, 1 gravity) of two components exactly."""
    pa, ka = _symbol_blocks(ctx, a, order)[block], _symbol_blocks(ctx, a, order)[2]
    pb, kb = _symbol_blocks(ctx, b, order)[block], _symbol_blocks(ctx, b, order)[2]
    k = max(ka, kb)
    r2 = ctx.xi_sq()
    return (pa * r2 ** (k - ka) - pb * r2 ** (k - kb)).is_zero()


def sigma0_densities(kind, ctx: InteriorContext | None = None) -> tuple[DensityExpr, DensityExpr]:
    """``int tr sigma_0`` perturbation block: printed square symbol vs composed factors."""
    from .symbols import build_square_symbol, derive_square_low_orders
    ctx = ctx or InteriorContext()
    printed = build_square_symbol(kind, ctx).at_base()
    derived = derive_square_low_orders(kind, ctx).at_base()
    return _pert_density(ctx, printed, 0), _pert_density(ctx, derived, 0)


def interior_density(kind, ctx: InteriorContext | None = None, substitute_volume=True) -> InteriorResult:
    """Interior residue density of ``A^-2`` or ``B^-2`` at the base point."""
    from . import fixtures
    from .symbols import OperatorKind, build_square_symbol, parametrix, recursion_pieces
    ctx = ctx or InteriorContext()
    kind = OperatorKind.parse(kind)
    base = fixtures.base_values(ctx)
    records: list[Discrepancy] = []

    # printed term lists, evaluated term by term
    per_term: dict = {}
    printed_syms: dict = {}
    for term in fixtures.printed_terms(kind):
        sym = term.symbol(ctx, base)
        printed_syms[term.term_id] = sym
        if term.group == "P":
            per_term[term.term_id] = _pert_density(ctx, sym, -4, substitute_volume)
    for term in fixtures.printed_terms(kind, group="P"):
        if term.paper_value is not None and per_term[term.term_id] != term.paper_value:
            records.append(Discrepancy(term.term_id, per_term[term.term_id].render(),
                                       term.paper_value.render(), term.quote))
    for block_id, (ids, value, quote) in fixtures.PRINTED_BLOCKS.items():
        if not all(i in per_term for i in ids):
            continue
        got = DensityExpr({})
        for i in ids:
            got = got + per_term[i]
        if got != value:
            records.append(Discrepancy(block_id, got.render(), value.render(), quote,
                                       "the printed value is not a polynomial in the jets"
                                       if "|X||df|" in value.terms else ""))
    pdens = DensityExpr({})
    for v in per_term.values():
        pdens = pdens + v

    # generated from the printed square symbol by the parametrix recursion
    square = build_square_symbol(kind, ctx)
    par = parametrix(square, depth=ctx.n - 1)
    raw = trace_integral(par, -ctx.n)
    gen_pert, _gen_grav = split_blocks(ctx, raw)
    if substitute_volume:
        gen_pert = vol_substitution(gen_pert)
    generated = recognize_interior(ctx, gen_pert)

    # gravity block: printed N list against the generated symbol
    nsum = None
    for term in fixtures.printed_terms(kind, group="N"):
        nsum = printed_syms[term.term_id] if nsum is None else nsum + printed_syms[term.term_id]
    gen4 = par.at_base().component(-4)
    gravity_match = _same_component(ctx, gen4, nsum, -4, 1)
    if not gravity_match:
        records.append(Discrepancy("N1+...+N10", "generated order -4 gravity block",
                                   "printed N list", "We get for sigma_-4 the sum of terms",
                                   "symbol-level mismatch in curvature jets"))

    # perturbation block, piece by piece of the recursion
    pieces: dict = {}
    for name, sym in recursion_pieces(square).items():
        ids = fixtures.PIECE_GROUPS[kind.value][name]
        printed = DensityExpr({})
        for i in ids:
            printed = printed + per_term[i]
        engine = _pert_density(ctx, sym, -4, substitute_volume)
        pieces[name] = (engine, printed)
        if engine != printed:
            records.append(Discrepancy(
                f"sigma-4[{name}]:" + "+".join(ids), engine.render(), printed.render(),
                fixtures.PIECE_QUOTES[name],
                "printed terms disagree with the recursion applied to the printed square symbol"))

    # square symbol: printed order 0 against the composed factors
    s0_printed, s0_derived = sigma0_densities(kind, ctx)
    if s0_printed != s0_derived:
        records.append(Discrepancy(
            "sigma0", s0_derived.render(), s0_printed.render(), fixtures.SIGMA0_QUOTES[kind.value],
            "int tr sigma_0 perturbation block; engine value composes the factor symbols"))

    theorem, quote = fixtures.PRINTED_THEOREMS[kind.value]
    if pdens != theorem:
        records.append(Discrepancy(f"theorem-{kind.value}", pdens.render(), theorem.render(), quote))

    trid = ctx.alg.tr_id
    gdens = DensityExpr({"s": ScalarExpr.const(GRAVITY_CONSTANT * trid)})
    return InteriorResult(kind.value, pdens, gdens, pdens + gdens, generated, per_term, pieces,
                          gravity_match, records, raw)
