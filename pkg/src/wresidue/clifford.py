"""Symbolic Clifford algebra over formal covectors.

Generators satisfy ``c(a)c(b) + c(b)c(a) = -2 g(a, b)``, so ``c(a)^2 = -|a|^2``.
Words are kept in a normal form that is strictly increasing with respect to a
fixed total order on covector identifiers; the spinor trace is evaluated by the
Wick recursion with ``tr[id] = 2^(n//2)``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

from .scalar import ONE_EXPR, ZERO, Q, ScalarExpr

__all__ = [
    "UndeclaredPairing",
    "CliffordAlgebra",
    "CliffordExpr",
    "cliff_mul",
    "cliff_trace",
    "cliff_normalize",
]


class UndeclaredPairing(KeyError):
    """No inner product is declared between two covectors."""


Word = tuple


class CliffordAlgebra:
    """Generators ``order`` with a symmetric ``pairing(a, b) -> ScalarExpr``.

    ``pairing`` may be a mapping keyed by unordered pairs (frozensets or
    2-tuples) or a callable.  ``dim`` fixes the spinor trace normalisation.
    """

    def __init__(self, order: Sequence[str], pairing, dim: int = 4):
        if len(set(order)) != len(order):
            raise ValueError("duplicate covector in order")
        self.order = tuple(order)
        self.rank = {c: k for k, c in enumerate(self.order)}
        self.dim = dim
        self.tr_id = 2 ** (dim // 2)
        if callable(pairing):
            self._pair_fn = pairing
            self._pair_table = None
        else:
            table = {}
            for key, val in pairing.items():
                a, b = tuple(key) if len(key) == 2 else (tuple(key)[0],) * 2
                table[(a, b)] = table[(b, a)] = ScalarExpr.coerce(val)
            self._pair_table = table
            self._pair_fn = None
        self._gen_cache: dict = {}
        self._trace_cache: dict = {}
        self._pair_cache: dict = {}

    def pairing(self, a: str, b: str) -> ScalarExpr:
        key = (a, b)
        got = self._pair_cache.get(key)
        if got is not None:
            return got
        if self._pair_table is not None:
            try:
                got = self._pair_table[key]
            except KeyError:
                raise UndeclaredPairing(f"g({a}, {b}) is not declared") from None
        else:
            got = ScalarExpr.coerce(self._pair_fn(a, b))
        self._pair_cache[key] = self._pair_cache[(b, a)] = got
        return got

    def _check(self, a):
        if a not in self.rank:
            raise UndeclaredPairing(f"unknown covector {a!r}")

    # -- elementary constructors ----------------------------------------
    def one(self, coeff=1) -> "CliffordExpr":
        c = ScalarExpr.coerce(coeff)
        return CliffordExpr(self, {(): c} if not c.is_zero() else {})

    def zero(self) -> "CliffordExpr":
        return CliffordExpr(self, {})

    def c(self, *names: str) -> "CliffordExpr":
        """The (normalised) product ``c(names[0]) ... c(names[-1])``."""
        return cliff_normalize(self, names)

    def vector(self, components: Mapping[str, ScalarExpr]) -> "CliffordExpr":
        """``sum_k components[k] * c(k)``."""
        terms = {}
        for k, v in components.items():
            self._check(k)
            v = ScalarExpr.coerce(v)
            if not v.is_zero():
                terms[(k,)] = v
        return CliffordExpr(self, terms)

    # -- normal form ------------------------------------------------------
    def mul_gen(self, word: Word, a: str) -> dict:
        """Normal form of ``word * c(a)`` for a normal ``word``: {word: ScalarExpr}."""
        key = (word, a)
        got = self._gen_cache.get(key)
        if got is not None:
            return got
        self._check(a)
        if not word:
            out = {(a,): ONE_EXPR}
        else:
            last = word[-1]
            ra, rl = self.rank[a], self.rank[last]
            if ra > rl:
                out = {word + (a,): ONE_EXPR}
            elif ra == rl:
                out = {word[:-1]: -self.pairing(a, a)}
                if out[word[:-1]].is_zero():
                    out = {}
            else:
                # u c(l) c(a) = -u c(a) c(l) - 2 g(a, l) u
                out = {}
                for w, coef in self.mul_gen(word[:-1], a).items():
                    for w2, c2 in self.mul_gen(w, last).items():
                        _acc(out, w2, -(coef * c2))
                g = self.pairing(a, last)
                if not g.is_zero():
                    _acc(out, word[:-1], g.scale(-2))
        self._gen_cache[key] = out
        return out

    def mul_words(self, u: Word, v: Word) -> dict:
        cur = {u: ONE_EXPR}
        for a in v:
            nxt: dict = {}
            for w, coef in cur.items():
                for w2, c2 in self.mul_gen(w, a).items():
                    _acc(nxt, w2, coef * c2)
            cur = nxt
        return cur

    def word_trace(self, word: Word) -> ScalarExpr:
        if len(word) % 2:
            return ZERO
        got = self._trace_cache.get(word)
        if got is not None:
            return got
        if not word:
            out = ScalarExpr.const(self.tr_id)
        else:
            out = ZERO
            a1 = word[0]
            for j in range(1, len(word)):
                g = self.pairing(a1, word[j])
                if g.is_zero():
                    continue
                rest = word[1:j] + word[j + 1:]
                sign = 1 if j % 2 == 1 else -1
                # (-1)^j with 1-based j = position + 1; anticommutator gives -g
                out = out + g * self.word_trace(rest).scale(-sign)
        self._trace_cache[word] = out
        return out


def _acc(d: dict, key, val: ScalarExpr):
    if val.is_zero():
        return
    s = d.get(key)
    if s is None:
        d[key] = val
    else:
        s = s + val
        if s.is_zero():
            del d[key]
        else:
            d[key] = s


class CliffordExpr:
    """Linear combination of normal-form words with :class:`ScalarExpr` coefficients."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: CliffordAlgebra, terms: Mapping[Word, ScalarExpr]):
        self.alg = alg
        self.terms = {w: c for w, c in terms.items() if not c.is_zero()}

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if isinstance(other, CliffordExpr):
            out = dict(self.terms)
            for w, c in other.terms.items():
                _acc(out, w, c)
            return CliffordExpr(self.alg, out)
        return self + self.alg.one(other)

    __radd__ = __add__

    def __neg__(self):
        return CliffordExpr(self.alg, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CliffordExpr):
            out: dict = {}
            for u, cu in self.terms.items():
                for v, cv in other.terms.items():
                    coef = cu * cv
                    if coef.is_zero():
                        continue
                    for w, cw in self.alg.mul_words(u, v).items():
                        _acc(out, w, coef * cw)
            return CliffordExpr(self.alg, out)
        s = ScalarExpr.coerce(other)
        return CliffordExpr(self.alg, {w: c * s for w, c in self.terms.items()})

    def __rmul__(self, other):
        s = ScalarExpr.coerce(other)
        return CliffordExpr(self.alg, {w: s * c for w, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, CliffordExpr):
            return self.terms == other.terms
        if isinstance(other, (int, ScalarExpr, Q)):
            return self == self.alg.one(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def scalar_part(self) -> ScalarExpr:
        return self.terms.get((), ZERO)

    def map_coeffs(self, fn: Callable[[ScalarExpr], ScalarExpr]) -> "CliffordExpr":
        return CliffordExpr(self.alg, {w: fn(c) for w, c in self.terms.items()})

    def trace(self) -> ScalarExpr:
        return cliff_trace(self)

    def covectors(self) -> set[str]:
        return {a for w in self.terms for a in w}

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), [self.alg.rank[a] for a in w])):
            c = self.terms[w]
            word = "".join(f"c({a})" for a in w)
            if not w:
                parts.append(f"({c.render()})")
            elif c == ONE_EXPR:
                parts.append(word)
            else:
                parts.append(f"({c.render()})*{word}")
        return " + ".join(parts)

    __str__ = render

    def __repr__(self):
        return f"CliffordExpr({self.render()!r})"


def cliff_normalize(alg: CliffordAlgebra, word: Iterable[str]) -> CliffordExpr:
    """Normal form of a raw word ``c(w0) c(w1) ...``."""
    cur = {(): ONE_EXPR}
    for a in word:
        nxt: dict = {}
        for w, coef in cur.items():
            for w2, c2 in alg.mul_gen(w, a).items():
                _acc(nxt, w2, coef * c2)
        cur = nxt
    return CliffordExpr(alg, cur)


def cliff_mul(a: CliffordExpr, b: CliffordExpr) -> CliffordExpr:
    return a * b


def cliff_trace(a: CliffordExpr) -> ScalarExpr:
    out = ZERO
    for w, c in a.terms.items():
        t = a.alg.word_trace(w)
        if not t.is_zero():
            out = out + c * t
    return out


def expand_covectors(expr: CliffordExpr, target: CliffordAlgebra,
                     rules: Mapping[str, Mapping[str, ScalarExpr]]) -> CliffordExpr:
    """Re-express ``expr`` in ``target`` by linear substitution of each covector."""
    out = target.zero()
    for w, c in expr.terms.items():
        term = target.one(c)
        for a in w:
            comp = rules.get(a, {a: ONE_EXPR})
            term = term * target.vector(comp)
        out = out + term
    return out
