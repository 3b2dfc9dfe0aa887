"""Exact scalar expressions: polynomials over Gaussian rationals in registered indeterminates.

A :class:`ScalarExpr` is a canonical sparse polynomial.  Each term is an exact
coefficient (a Gaussian rational, so that the factors of ``i`` produced by the
symbol calculus stay exact) times a monomial in indeterminates drawn from a
:class:`Registry`.  Every indeterminate carries a parity tag describing its
behaviour under the reflection ``xi' -> -xi'``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

__all__ = [
    "Q",
    "Registry",
    "REGISTRY",
    "ScalarExpr",
    "UnknownIndeterminate",
    "declare",
    "var",
    "const",
    "parse_scalar",
    "scalar_add",
    "scalar_mul",
    "substitute",
]

PARITIES = ("even", "odd", "free")


class UnknownIndeterminate(KeyError):
    """Raised when an identifier is not present in the registry."""


def _norm(x):
    if type(x) is int:
        return x
    if not isinstance(x, Fraction):
        x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


class Q:
    """Gaussian rational ``re + im*i`` with :class:`Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        # integral parts are kept as ints: far cheaper than Fraction arithmetic
        self.re = _norm(re)
        self.im = _norm(im)

    @classmethod
    def coerce(cls, value) -> "Q":
        if isinstance(value, Q):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(Fraction(value))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if not isinstance(other, Q):
            try:
                other = Q.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        other = Q.coerce(other)
        return Q(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = Q.coerce(other)
        return Q(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return Q.coerce(other) - self

    def __neg__(self):
        return Q(-self.re, -self.im)

    def __mul__(self, other):
        other = Q.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return Q(a * c)
        return Q(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Q.coerce(other)
        c, d = other.re, other.im
        den = Fraction(c * c + d * d)
        if not den:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * Q(c / den, -d / den)

    def __rtruediv__(self, other):
        return Q.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return Q(1) / (self ** (-n))
        out = Q(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return Q(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self):
        return not self.im

    def render(self) -> str:
        if not self.im:
            return _frac(self.re)
        if not self.re:
            return "I" if self.im == 1 else f"{_frac(self.im)}*I"
        return f"({_frac(self.re)} + {_frac(self.im)}*I)"

    def __repr__(self):
        return f"Q({self.render()})"


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


ONE = Q(1)
IMAG = Q(0, 1)


class Registry:
    """Declared indeterminates and their parity tags."""

    _NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_']*$")

    def __init__(self):
        self._parity: dict[str, str] = {}
        self._frozen = False

    def declare(self, name: str, parity: str = "free") -> str:
        if parity not in PARITIES:
            raise ValueError(f"bad parity {parity!r}")
        if not self._NAME.match(name) or name == "I":
            raise ValueError(f"bad indeterminate name {name!r}")
        old = self._parity.get(name)
        if old is not None:
            if old != parity:
                raise ValueError(f"{name} already declared with parity {old}")
            return name
        if self._frozen:
            raise RuntimeError(f"registry is frozen; cannot declare {name}")
        self._parity[name] = parity
        return name

    def parity(self, name: str) -> str:
        try:
            return self._parity[name]
        except KeyError:
            raise UnknownIndeterminate(name) from None

    def __contains__(self, name):
        return name in self._parity

    def freeze(self):
        self._frozen = True

    def thaw(self):
        self._frozen = False

    @property
    def frozen(self):
        return self._frozen


REGISTRY = Registry()


def declare(name: str, parity: str = "free") -> str:
    return REGISTRY.declare(name, parity)


Monomial = tuple  # tuple[tuple[str, int], ...], sorted by name


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


Number = Union[int, Fraction, Q, complex]


class ScalarExpr:
    """Canonical polynomial; immutable.  ``terms`` maps monomial -> nonzero :class:`Q`."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Q] | None = None, _trusted=False):
        if _trusted:
            self.terms = terms
        else:
            self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, value: Number) -> "ScalarExpr":
        q = Q.coerce(value)
        return cls({(): q}, _trusted=True) if q else ZERO

    @classmethod
    def var(cls, name: str, power: int = 1, registry: Registry = REGISTRY) -> "ScalarExpr":
        registry.parity(name)
        if power == 0:
            return ONE_EXPR
        if power < 0:
            raise ValueError("negative powers are not polynomial")
        return cls({((name, power),): ONE}, _trusted=True)

    @staticmethod
    def coerce(value) -> "ScalarExpr":
        if isinstance(value, ScalarExpr):
            return value
        return ScalarExpr.const(value)

    # predicates ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self) -> Q:
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        return self.terms.get((), Q(0))

    def free_symbols(self) -> set[str]:
        return {name for m in self.terms for name, _ in m}

    def degree_in(self, names: Iterable[str]) -> int:
        names = set(names)
        best = -1
        for m in self.terms:
            best = max(best, sum(e for n, e in m if n in names))
        return best

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, (ScalarExpr, int, Fraction, Q, complex)):
            return NotImplemented
        other = ScalarExpr.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return ScalarExpr(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr({m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, (ScalarExpr, int, Fraction, Q, complex)):
            return NotImplemented
        return self + (-ScalarExpr.coerce(other))

    def __rsub__(self, other):
        return ScalarExpr.coerce(other) - self

    def scale(self, q: Number) -> "ScalarExpr":
        q = Q.coerce(q)
        if not q:
            return ZERO
        if q == ONE:
            return self
        return ScalarExpr({m: c * q for m, c in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, ScalarExpr):
            if not isinstance(other, (int, Fraction, Q, complex)):
                return NotImplemented
            return self.scale(other)
        if not self.terms or not other.terms:
            return ZERO
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                s = out.get(m)
                out[m] = c if s is None else s + c
        return ScalarExpr(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = ONE_EXPR
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, q: Number):
        return self.scale(Q(1) / Q.coerce(q))

    def conjugate(self) -> "ScalarExpr":
        return ScalarExpr({m: c.conjugate() for m, c in self.terms.items()}, _trusted=True)

    # structural -------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def map_terms(self, fn) -> "ScalarExpr":
        """Apply ``fn(monomial, coeff) -> ScalarExpr | None`` to each term and sum."""
        out = ZERO
        for m, c in self.terms.items():
            r = fn(m, c)
            if r is not None:
                out = out + r
        return out

    def filter(self, keep) -> "ScalarExpr":
        return ScalarExpr({m: c for m, c in self.terms.items() if keep(m)}, _trusted=True)

    def coefficient(self, monomial: Mapping[str, int] | Monomial) -> Q:
        if isinstance(monomial, Mapping):
            monomial = tuple(sorted((k, v) for k, v in monomial.items() if v))
        return self.terms.get(tuple(monomial), Q(0))

    def collect(self, names: Iterable[str]) -> dict[Monomial, "ScalarExpr"]:
        """Split into {monomial in ``names``: cofactor}."""
        names = set(names)
        out: dict = {}
        for m, c in self.terms.items():
            key = tuple(p for p in m if p[0] in names)
            rest = tuple(p for p in m if p[0] not in names)
            out.setdefault(key, {})[rest] = c
        return {k: ScalarExpr(v, _trusted=True) for k, v in out.items()}

    def diff(self, name: str) -> "ScalarExpr":
        out = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(name)
            if not e:
                continue
            if e == 1:
                del d[name]
            else:
                d[name] = e - 1
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, Q(0)) + c * e
        return ScalarExpr(out)

    def parity(self, registry: Registry = REGISTRY) -> str:
        """'even', 'odd' or 'mixed' under xi' -> -xi'."""
        seen = set()
        for m in self.terms:
            seen.add(_mono_parity(m, registry))
        if not seen or seen == {"even"}:
            return "even"
        if seen == {"odd"}:
            return "odd"
        return "mixed"

    def parity_split(self, registry: Registry = REGISTRY) -> tuple["ScalarExpr", "ScalarExpr"]:
        even, odd = {}, {}
        for m, c in self.terms.items():
            (odd if _mono_parity(m, registry) == "odd" else even)[m] = c
        return ScalarExpr(even, _trusted=True), ScalarExpr(odd, _trusted=True)

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        total = 0j
        for m, c in self.terms.items():
            t = complex(c)
            for name, e in m:
                t *= values[name] ** e
            total += t
        return total

    # rendering --------------------------------------------------------------
    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=_mono_sort_key):
            parts.append(_render_term(self.terms[m], m))
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    __str__ = render

    def __repr__(self):
        return f"ScalarExpr({self.render()!r})"


def _mono_parity(m: Monomial, registry: Registry) -> str:
    odd = 0
    for name, e in m:
        if registry.parity(name) == "odd":
            odd += e
    return "odd" if odd % 2 else "even"


def _mono_sort_key(m: Monomial):
    return (tuple(n for n, _ in m), tuple(e for _, e in m))


def _render_term(c: Q, m: Monomial) -> str:
    factors = [n if e == 1 else f"{n}^{e}" for n, e in m]
    if not factors:
        return c.render()
    body = "*".join(factors)
    if c == ONE:
        return body
    if c == Q(-1):
        return "-" + body
    return f"{c.render()}*{body}"


ZERO = ScalarExpr({}, _trusted=True)
ONE_EXPR = ScalarExpr({(): ONE}, _trusted=True)
I_EXPR = ScalarExpr({(): IMAG}, _trusted=True)


def var(name: str, power: int = 1) -> ScalarExpr:
    return ScalarExpr.var(name, power)


def const(value: Number) -> ScalarExpr:
    return ScalarExpr.const(value)


def scalar_add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    return ScalarExpr.coerce(a) + b


def scalar_mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    return ScalarExpr.coerce(a) * ScalarExpr.coerce(b)


def substitute(e: ScalarExpr, bindings: Mapping[str, ScalarExpr | Number],
               registry: Registry = REGISTRY) -> ScalarExpr:
    """Simultaneous substitution of indeterminates, followed by canonicalisation."""
    for k in bindings:
        registry.parity(k)
    if not bindings:
        return e
    bound = {k: ScalarExpr.coerce(v) for k, v in bindings.items()}
    cache: dict = {}

    def power(name, k):
        key = (name, k)
        if key not in cache:
            cache[key] = bound[name] ** k
        return cache[key]

    out: dict = {}
    acc = ZERO
    for m, c in e.terms.items():
        keep = tuple(p for p in m if p[0] not in bound)
        hit = [p for p in m if p[0] in bound]
        if not hit:
            out[m] = out.get(m, Q(0)) + c
            continue
        t = ScalarExpr({keep: c}, _trusted=True)
        for name, k in hit:
            t = t * power(name, k)
            if t.is_zero():
                break
        acc = acc + t
    return ScalarExpr(out) + acc


# --------------------------------------------------------------------------
# text grammar: sums of products of rational literals, I, names and powers

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_']*)|(\S))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        num, name, sym = m.groups()
        if num is not None:
            out.append(("num", int(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("sym", sym))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, text, registry, hook=None):
        self.toks = _tokenize(text)
        self.i = 0
        self.registry = registry
        self.hook = hook

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind and tok[0] != kind or value is not None and tok[1] != value:
            raise ValueError(f"parse error near token {tok!r}")
        self.i += 1
        return tok

    def expr(self):
        sign = 1
        if self.peek() == ("sym", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("sym", "+"):
            self.take()
        acc = self.product() * sign
        while self.peek() in (("sym", "+"), ("sym", "-")):
            op = self.take()[1]
            rhs = self.product()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def product(self):
        acc = self.power()
        while self.peek() in (("sym", "*"), ("sym", "/")):
            op = self.take()[1]
            rhs = self.power()
            if op == "*":
                acc = acc * rhs
            else:
                if not isinstance(rhs, ScalarExpr) or not rhs.is_constant():
                    raise ValueError("division only by numeric constants")
                acc = acc / rhs.constant_value()
        return acc

    def power(self):
        base = self.atom()
        if self.peek() == ("sym", "^"):
            self.take()
            neg = False
            if self.peek() == ("sym", "-"):
                self.take()
                neg = True
            n = self.take("num")[1]
            if neg:
                if self.hook is None:
                    raise ValueError("negative exponent")
                return self.hook.negative_power(base, n)
            return base ** n
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return ScalarExpr.const(val)
        if kind == "name":
            self.take()
            if val == "I":
                return I_EXPR
            if self.hook is not None:
                got = self.hook.name(val, self)
                if got is not None:
                    return got
            return ScalarExpr.var(val, registry=self.registry)
        if (kind, val) == ("sym", "("):
            self.take()
            e = self.expr()
            self.take("sym", ")")
            return e
        if self.hook is not None:
            got = self.hook.symbol(val, self)
            if got is not None:
                return got
        raise ValueError(f"unexpected token {val!r}")


def parse_scalar(text: str, registry: Registry = REGISTRY) -> ScalarExpr:
    """Parse the rendering grammar back into a :class:`ScalarExpr`."""
    p = _Parser(text, registry)
    e = p.expr()
    p.take("end")
    return e
