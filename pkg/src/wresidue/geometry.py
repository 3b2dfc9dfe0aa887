"""Evaluation contexts: interior normal coordinates and the boundary collar.

The interior context represents every geometric field by its Taylor jet at the
base point ``x0 = 0`` in the coordinate indeterminates ``x1..xn`` (kept to
total degree two).  Normal coordinates fix ``g(x0) = delta``, ``dg(x0) = 0``,
``Gamma(x0) = 0`` and ``sigma(x0) = 0``; the second jets of the inverse metric
and the first jets of the spin connection stay formal.

The boundary context encodes the collar metric ``g = h(x_n)^-1 g_dM + dx_n^2``
at a point of the boundary where tangential derivatives of the boundary metric
vanish; the single surviving parameter is ``h'(0)``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .clifford import CliffordAlgebra, CliffordExpr, UndeclaredPairing
from .scalar import ONE_EXPR, ZERO, ScalarExpr, declare, var

__all__ = [
    "GeoContext",
    "InteriorContext",
    "BoundaryContext",
    "interior_context",
    "boundary_context",
    "pairing",
    "XI_PRIME",
    "DXN",
    "XVEC",
    "WCOV",
]

# formal constants shared by every computation
PI = declare("pi", "even")
OMEGA3 = declare("Omega3", "even")
VOL_S3 = declare("VolS3", "even")
HPRIME = declare("hprime", "even")
SCAL = declare("s", "free")
F = declare("f", "free")

XI_PRIME, DXN, XVEC, WCOV = "xi'", "dxn", "X", "w"


def _g2_name(m, n, a, b):
    m, n = sorted((m, n))
    a, b = sorted((a, b))
    return f"G2_{m}{n}_{a}{b}"


class GeoContext:
    kind: str
    n: int

    def lookup(self, name: str, *idx, **kw):
        raise NotImplementedError


class InteriorContext(GeoContext):
    """Normal coordinates centred at the base point; fields are x-jets."""

    kind = "interior-normal"

    def __init__(self, n: int = 4):
        if n % 2 or n < 2:
            raise ValueError("interior context needs an even dimension n >= 2")
        self.n = n
        rng = range(1, n + 1)
        self.idx = tuple(rng)
        self.x = {m: var(declare(f"x{m}")) for m in rng}
        self.xi = {m: var(declare(f"xi{m}")) for m in rng}
        self.X = {j: var(declare(f"X{j}")) for j in rng}
        self.df = {j: var(declare(f"df{j}")) for j in rng}
        self.dX = {(j, m): var(declare(f"dX{j}_{m}")) for j in rng for m in rng}
        self.f = var(F)
        self.s = var(SCAL)
        self.G2 = {}
        for m in rng:
            for nn in rng:
                for a in rng:
                    for b in rng:
                        self.G2[(m, nn, a, b)] = var(declare(_g2_name(m, nn, a, b)))
        self.pairs = tuple(combinations(rng, 2))
        self.dsig = {(m, nn, p): var(declare(f"dsig{m}_{nn}_{p[0]}{p[1]}"))
                     for m in rng for nn in rng for p in self.pairs}
        basis = [f"e{k}" for k in rng]
        self.alg = CliffordAlgebra(basis, lambda a, b: ONE_EXPR if a == b else ZERO, dim=n)
        self.e = {k: self.alg.c(f"e{k}") for k in rng}
        self.x_names = tuple(f"x{m}" for m in rng)
        self.xi_names = tuple(f"xi{m}" for m in rng)
        self.perturbation_names = frozenset(
            [F] + [f"X{j}" for j in rng] + [f"df{j}" for j in rng]
            + [f"dX{j}_{m}" for j in rng for m in rng])
        self.gravity_names = frozenset(
            [SCAL] + [str(next(iter(v.free_symbols()))) for v in self.G2.values()]
            + [next(iter(v.free_symbols())) for v in self.dsig.values()])
        self._build_jets()

    # -- jets ---------------------------------------------------------------
    def _build_jets(self):
        rng = self.idx
        x = self.x
        half = Fraction(1, 2)
        self.ginv = {}
        self.glow = {}
        for a in rng:
            for b in rng:
                quad = ZERO
                for m in rng:
                    for nn in rng:
                        quad = quad + self.G2[(m, nn, a, b)] * x[m] * x[nn]
                delta = ONE_EXPR if a == b else ZERO
                self.ginv[(a, b)] = delta + quad.scale(half)
                self.glow[(a, b)] = delta - quad.scale(half)
        # first x-jet of Gamma^l_{ab} from the lower metric
        dglow = {}
        for r in rng:
            for b in rng:
                for a in rng:
                    # d_a g_{rb} to first order
                    dglow[(a, r, b)] = sum((self.G2[(a, nn, r, b)] * x[nn] for nn in rng), ZERO).scale(-1)
        self.christoffel = {}
        for l in rng:
            for a in rng:
                for b in rng:
                    self.christoffel[(l, a, b)] = (dglow[(a, l, b)] + dglow[(b, l, a)]
                                                   - dglow[(l, a, b)]).scale(half)
        self.gamma_up = {l: sum((self.christoffel[(l, a, a)] for a in rng), ZERO) for l in rng}
        # frame S^mu_i(x) with S S^T = g^{-1} to second order
        quarter = Fraction(1, 4)
        self.frame = {}
        for m in rng:
            comp = {}
            for i in rng:
                quad = ZERO
                for a in rng:
                    for b in rng:
                        quad = quad + self.G2[(a, b, m, i)] * x[a] * x[b]
                comp[f"e{i}"] = (ONE_EXPR if m == i else ZERO) + quad.scale(quarter)
            self.frame[m] = self.alg.vector(comp)
        self.f_jet = self.f + sum((self.df[m] * x[m] for m in rng), ZERO)
        self.X_jet = {j: self.X[j] + sum((self.dX[(j, m)] * x[m] for m in rng), ZERO) for j in rng}
        # spin connection sigma_mu(x), first order, valued in the even part
        self.spin = {}
        for m in rng:
            acc = self.alg.zero()
            for nn in rng:
                for p in self.pairs:
                    acc = acc + self.alg.c(f"e{p[0]}", f"e{p[1]}") * (self.dsig[(m, nn, p)] * x[nn])
            self.spin[m] = acc

    def xi_sq(self) -> ScalarExpr:
        """Flat ``|xi|_0^2`` at the base point (the homogeneous denominator)."""
        return sum((v * v for v in self.xi.values()), ZERO)

    def cxi(self) -> CliffordExpr:
        """``c(xi)(x) = sum xi_mu c(dx^mu)(x)``."""
        return sum((self.frame[m] * self.xi[m] for m in self.idx), self.alg.zero())

    def cdx(self, m: int) -> CliffordExpr:
        return self.frame[m]

    def cX(self) -> CliffordExpr:
        return sum((self.frame[j] * self.X_jet[j] for j in self.idx), self.alg.zero())

    def cdf(self) -> CliffordExpr:
        return sum((self.frame[j] * self.df[j] for j in self.idx), self.alg.zero())

    def xi_of_X(self) -> ScalarExpr:
        return sum((self.xi[j] * self.X_jet[j] for j in self.idx), ZERO)

    def X_norm_sq(self) -> ScalarExpr:
        out = ZERO
        for j in self.idx:
            for k in self.idx:
                out = out + self.glow[(j, k)] * self.X_jet[j] * self.X_jet[k]
        return out

    def gamma_sigma(self) -> CliffordExpr:
        """``gamma^mu sigma_mu``."""
        return sum((self.frame[m] * self.spin[m] for m in self.idx), self.alg.zero())

    # -- lookups at the base point --------------------------------------------
    def lookup(self, name: str, *idx, derivs: tuple = ()):
        """Value at ``x0`` of a field or of one of its derivatives."""
        jet = {
            "ginv": lambda: self.ginv[tuple(idx)],
            "christoffel": lambda: self.christoffel[tuple(idx)],
            "f": lambda: self.f_jet,
            "X": lambda: self.X_jet[idx[0]],
        }.get(name)
        if jet is None:
            if name == "sigma":
                e = self.spin[idx[0]]
                for d in derivs:
                    e = e.map_coeffs(lambda c, d=d: c.diff(f"x{d}"))
                return e.map_coeffs(self.at_base)
            raise KeyError(name)
        e = jet()
        for d in derivs:
            e = e.diff(f"x{d}")
        return self.at_base(e)

    def at_base(self, e: ScalarExpr) -> ScalarExpr:
        names = set(self.x_names)
        return e.filter(lambda m: not any(n in names for n, _ in m))


class BoundaryContext(GeoContext):
    """Collar metric at a boundary point, unit cotangent sphere ``|xi'| = 1``."""

    kind = "boundary-collar"

    def __init__(self, n: int = 4):
        if n % 2 or n < 3:
            raise ValueError("boundary context needs an even dimension n >= 4")
        self.n = n
        self.hp = var(HPRIME)
        self.f = var(F)
        self.Xn = var(declare("Xn"))
        self.gXxi = var(declare("gXxi", "odd"))
        self.XX = var(declare("XX"))
        self.ww = var(declare("ww", "even"))
        half = self.hp.scale(Fraction(1, 2))
        self.table = {
            (XI_PRIME, XI_PRIME): ONE_EXPR,
            (XI_PRIME, DXN): ZERO,
            (DXN, DXN): ONE_EXPR,
            (XVEC, DXN): self.Xn,
            (XVEC, XI_PRIME): self.gXxi,
            (XVEC, XVEC): self.XX,
            (WCOV, XI_PRIME): half,
            (WCOV, DXN): ZERO,
            (WCOV, WCOV): self.ww,
        }
        self.alg = CliffordAlgebra([XI_PRIME, DXN, XVEC, WCOV], self.pair, dim=n)
        frame = [f"e{k}" for k in range(1, n + 1)]
        self.frame_alg = CliffordAlgebra(frame, lambda a, b: ONE_EXPR if a == b else ZERO, dim=n)

    def pair(self, a: str, b: str) -> ScalarExpr:
        if {a, b} == {WCOV, XVEC}:
            raise AssertionError("g(w, X) requested: the in-scope traces never need it")
        got = self.table.get((a, b))
        if got is None:
            got = self.table.get((b, a))
        if got is None:
            raise UndeclaredPairing(f"g({a}, {b})")
        return got

    # collar lookups ----------------------------------------------------------
    def d_xi_sq(self, j: int) -> ScalarExpr:
        """``d_{x_j} |xi|^2_g (x0)`` at ``|xi'| = 1``."""
        return self.hp if j == self.n else ZERO

    def omega(self, s: int, t: int, i: int) -> ScalarExpr:
        """Connection form ``omega_{s,t}(e_i)(x0)``."""
        n = self.n
        if i < n and s == n and t == i:
            return self.hp.scale(Fraction(1, 2))
        if i < n and s == i and t == n:
            return self.hp.scale(Fraction(-1, 2))
        return ZERO

    def christoffel(self, k: int, s: int, t: int) -> ScalarExpr:
        """``Gamma^k_{st}(x0)``."""
        n = self.n
        if s == t and s < n and k == n:
            return self.hp.scale(Fraction(1, 2))
        if k < n and ((s == n and t == k) or (s == k and t == n)):
            return self.hp.scale(Fraction(-1, 2))
        return ZERO

    def lookup(self, name: str, *idx, **kw):
        if name == "christoffel":
            return self.christoffel(*idx)
        if name == "omega":
            return self.omega(*idx)
        if name == "d_xi_sq":
            return self.d_xi_sq(*idx)
        raise KeyError(name)

    def Q(self) -> CliffordExpr:
        """``-1/4 sum omega_{s,t}(e_i) c(e_i) c(e_s) c(e_t)`` mapped to the covector algebra."""
        n = self.n
        acc = self.frame_alg.zero()
        for i in range(1, n + 1):
            for s in range(1, n + 1):
                for t in range(1, n + 1):
                    w = self.omega(s, t, i)
                    if w.is_zero():
                        continue
                    acc = acc + self.frame_alg.c(f"e{i}", f"e{s}", f"e{t}") * w
        acc = acc * ScalarExpr.const(Fraction(-1, 4))
        out = self.alg.zero()
        for word, coef in acc.terms.items():
            if word == (f"e{n}",):
                out = out + self.alg.c(DXN) * coef
            else:
                raise ValueError(f"Q has a tangential component {word}")
        return out


def interior_context(n: int = 4) -> InteriorContext:
    return InteriorContext(n)


def boundary_context(n: int = 4) -> BoundaryContext:
    return BoundaryContext(n)


def pairing(ctx: GeoContext, a: str, b: str) -> ScalarExpr:
    if isinstance(ctx, BoundaryContext):
        return ctx.pair(a, b)
    if isinstance(ctx, InteriorContext):
        vec = {"X": ctx.X, "df": ctx.df, "xi": ctx.xi}
        if a in vec and b in vec:
            return sum((vec[a][j] * vec[b][j] for j in ctx.idx), ZERO)
        raise UndeclaredPairing(f"g({a}, {b})")
    raise TypeError(ctx)
