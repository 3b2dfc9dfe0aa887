"""Rational functions of ``xi_n`` with poles only at ``+i`` and ``-i``.

Values are kept in partial-fraction form: a polynomial part plus principal
parts ``c / (xi_n - p)^k`` for ``p`` in ``{+i, -i}``.  Coefficients may be
:class:`~wresidue.scalar.ScalarExpr` or :class:`~wresidue.clifford.CliffordExpr`;
products keep the left/right order of Clifford coefficients.

The projection ``pi_plus`` keeps the principal parts at ``+i`` (the
upper half-plane) and drops the rest, including the polynomial part.
"""

from __future__ import annotations

from math import comb, factorial
from typing import Callable, Mapping

from .scalar import Q, ScalarExpr, var

__all__ = [
    "XiNRational",
    "PoleError",
    "NotIntegrable",
    "partial_fractions",
    "pi_plus",
    "pi_prime",
    "contour_gamma_plus",
    "real_line_integral",
]

UP, DOWN = 1, -1
POLE_VALUE = {UP: Q(0, 1), DOWN: Q(0, -1)}


class PoleError(ValueError):
    """A denominator factor other than ``(xi_n -+ i)`` was supplied."""


class NotIntegrable(ValueError):
    """The function does not decay like ``|xi_n|^-2`` at infinity."""


def _scale(c, q):
    q = Q.coerce(q)
    if q == Q(1):
        return c
    return c * ScalarExpr.const(q)


def _acc(d: dict, key, val):
    if val.is_zero():
        return
    cur = d.get(key)
    if cur is None:
        d[key] = val
    else:
        cur = cur + val
        if cur.is_zero():
            del d[key]
        else:
            d[key] = cur


def _poly_mul_scalar(p: dict, s: dict) -> dict:
    """Polynomial with ring coefficients times polynomial with Q coefficients."""
    out: dict = {}
    for d1, c in p.items():
        for d2, q in s.items():
            _acc(out, d1 + d2, _scale(c, q))
    return out


def _binomial_poly(root: Q, k: int) -> dict:
    """Coefficients of ``(xi - root)^k``."""
    return {j: Q(comb(k, j)) * (-root) ** (k - j) for j in range(k + 1)}


def _den_poly(a: int, b: int) -> dict:
    out = {0: Q(1)}
    for root, k in ((POLE_VALUE[UP], a), (POLE_VALUE[DOWN], b)):
        f = _binomial_poly(root, k)
        nxt: dict = {}
        for d1, c1 in out.items():
            for d2, c2 in f.items():
                nxt[d1 + d2] = nxt.get(d1 + d2, Q(0)) + c1 * c2
        out = {d: c for d, c in nxt.items() if c}
    return out


class XiNRational:
    """Partial-fraction normal form.  ``parts[(pole, order)] -> coefficient``."""

    __slots__ = ("poly", "parts")

    def __init__(self, poly: Mapping[int, object] | None = None,
                 parts: Mapping[tuple, object] | None = None):
        self.poly = {d: c for d, c in (poly or {}).items() if not c.is_zero()}
        self.parts = {k: c for k, c in (parts or {}).items() if not c.is_zero()}
        for pole, order in self.parts:
            if pole not in (UP, DOWN) or order < 1:
                raise PoleError(f"bad principal part key {(pole, order)}")

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_fraction(cls, numerator: Mapping[int, object], up: int, down: int) -> "XiNRational":
        return partial_fractions(numerator, up, down)

    @classmethod
    def constant(cls, c) -> "XiNRational":
        return cls({0: c})

    def is_zero(self):
        return not self.poly and not self.parts

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, XiNRational):
            other = XiNRational.constant(other)
        poly = dict(self.poly)
        parts = dict(self.parts)
        for d, c in other.poly.items():
            _acc(poly, d, c)
        for k, c in other.parts.items():
            _acc(parts, k, c)
        return XiNRational(poly, parts)

    __radd__ = __add__

    def __neg__(self):
        return XiNRational({d: -c for d, c in self.poly.items()},
                           {k: -c for k, c in self.parts.items()})

    def __sub__(self, other):
        return self + (-other)

    def lmul(self, c) -> "XiNRational":
        """``c * self`` for a xi_n-free coefficient ``c``."""
        return XiNRational({d: c * v for d, v in self.poly.items()},
                           {k: c * v for k, v in self.parts.items()})

    def rmul(self, c) -> "XiNRational":
        return XiNRational({d: v * c for d, v in self.poly.items()},
                           {k: v * c for k, v in self.parts.items()})

    def __mul__(self, other):
        if isinstance(other, XiNRational):
            n1, a1, b1 = self.to_fraction()
            n2, a2, b2 = other.to_fraction()
            num: dict = {}
            for d1, c1 in n1.items():
                for d2, c2 in n2.items():
                    _acc(num, d1 + d2, c1 * c2)
            return partial_fractions(num, a1 + a2, b1 + b2)
        return self.rmul(other)

    def __rmul__(self, other):
        return self.lmul(other)

    def map_coeffs(self, fn: Callable) -> "XiNRational":
        """Apply a linear map (e.g. a trace) to every coefficient."""
        return XiNRational({d: fn(c) for d, c in self.poly.items()},
                           {k: fn(c) for k, c in self.parts.items()})

    def derivative(self) -> "XiNRational":
        """``d / d xi_n``."""
        poly = {d - 1: _scale(c, d) for d, c in self.poly.items() if d}
        parts: dict = {}
        for (pole, k), c in self.parts.items():
            _acc(parts, (pole, k + 1), _scale(c, -k))
        return XiNRational(poly, parts)

    def __eq__(self, other):
        if not isinstance(other, XiNRational):
            return NotImplemented
        return self.poly == other.poly and self.parts == other.parts

    # -- recomposition --------------------------------------------------------
    def max_orders(self) -> tuple[int, int]:
        a = max((k for p, k in self.parts if p == UP), default=0)
        b = max((k for p, k in self.parts if p == DOWN), default=0)
        return a, b

    def to_fraction(self) -> tuple[dict, int, int]:
        """``(numerator, a, b)`` with denominator ``(xi - i)^a (xi + i)^b``."""
        a, b = self.max_orders()
        num: dict = {}
        if self.poly:
            for d, c in _poly_mul_scalar(self.poly, _den_poly(a, b)).items():
                _acc(num, d, c)
        for (pole, k), c in self.parts.items():
            if pole == UP:
                factor = _den_poly(a - k, b)
            else:
                factor = _den_poly(a, b - k)
            for d, cc in _poly_mul_scalar({0: c}, factor).items():
                _acc(num, d, cc)
        return num, a, b

    # -- residues -------------------------------------------------------------
    def residue(self, pole: int):
        return self.parts.get((pole, 1))

    def evaluate(self, xn: complex, coeff_value: Callable[[object], complex]) -> complex:
        total = 0j
        for d, c in self.poly.items():
            total += coeff_value(c) * xn ** d
        for (pole, k), c in self.parts.items():
            total += coeff_value(c) / (xn - complex(POLE_VALUE[pole])) ** k
        return total

    def degree_at_infinity(self) -> int:
        if self.poly:
            return max(self.poly)
        if not self.parts:
            return -10 ** 9
        r = [c for (p, k), c in self.parts.items() if k == 1]
        s = r[0] + r[1] if len(r) == 2 else (r[0] if r else None)
        if s is not None and not s.is_zero():
            return -1
        return -2

    def render(self) -> str:
        bits = []
        for d in sorted(self.poly):
            bits.append(f"({self.poly[d].render()})*xin^{d}")
        for (pole, k) in sorted(self.parts, key=lambda t: (-t[0], t[1])):
            sign = "-" if pole == UP else "+"
            bits.append(f"({self.parts[(pole, k)].render()})/(xin {sign} I)^{k}")
        return " + ".join(bits) if bits else "0"

    __str__ = render


def partial_fractions(numerator: Mapping[int, object], up: int, down: int) -> XiNRational:
    """Decompose ``numerator / ((xi_n - i)^up (xi_n + i)^down)`` exactly."""
    if up < 0 or down < 0:
        raise PoleError("negative pole order")
    num = {d: c for d, c in numerator.items() if not c.is_zero()}
    if not num:
        return XiNRational()
    den = _den_poly(up, down)
    dd = max(den)
    # long division by the monic denominator
    quot: dict = {}
    rem = dict(num)
    while rem and max(rem) >= dd:
        top = max(rem)
        c = rem[top]
        shift = top - dd
        quot[shift] = c
        for d, q in den.items():
            _acc(rem, d + shift, _scale(c, -q))
    parts: dict = {}
    for pole, order, other, other_order in ((UP, up, DOWN, down), (DOWN, down, UP, up)):
        if order == 0 or not rem:
            continue
        p = POLE_VALUE[pole]
        delta = p - POLE_VALUE[other]
        # rem(p + u) as a series in u
        shifted: dict = {}
        for d, c in rem.items():
            for j in range(d + 1):
                _acc(shifted, j, _scale(c, Q(comb(d, j)) * p ** (d - j)))
        # (u + delta)^(-other_order) series
        inv = [Q(_gen_binom(-other_order, j)) * delta ** (-other_order - j)
               for j in range(order)]
        for m in range(order):
            acc = None
            for j in range(m + 1):
                c = shifted.get(m - j)
                if c is None:
                    continue
                term = _scale(c, inv[j])
                acc = term if acc is None else acc + term
            if acc is not None and not acc.is_zero():
                parts[(pole, order - m)] = acc
    return XiNRational(quot, parts)


def _gen_binom(n: int, k: int) -> int:
    """Generalised binomial ``C(n, k)``, valid for negative ``n``."""
    out = 1
    for t in range(k):
        out *= n - t
    return out // factorial(k)


def pi_plus(r: XiNRational) -> XiNRational:
    """Keep the principal parts at the upper half-plane pole ``+i``."""
    return XiNRational({}, {k: c for k, c in r.parts.items() if k[0] == UP})


def pi_minus_complement(r: XiNRational) -> XiNRational:
    """``r - pi_plus(r)``: polynomial part and principal parts at ``-i``."""
    return XiNRational(r.poly, {k: c for k, c in r.parts.items() if k[0] == DOWN})


def _require_integrable(r: XiNRational):
    if r.poly:
        raise NotIntegrable("polynomial part is nonzero")


def pi_prime(r: XiNRational):
    """``(1/2pi) * contour integral over Gamma+`` = ``i * Res_{+i}``."""
    _require_integrable(r)
    res = r.residue(UP)
    if res is None:
        return None
    return res * ScalarExpr.const(Q(0, 1))


def contour_gamma_plus(r: XiNRational):
    """``2 pi i * Res_{+i}``, with ``pi`` kept as a formal constant."""
    _require_integrable(r)
    res = r.residue(UP)
    if res is None:
        return None
    return res * (var("pi") * ScalarExpr.const(Q(0, 2)))


def real_line_integral(r: XiNRational):
    """Integral over the real line, closed in the upper half-plane."""
    if r.degree_at_infinity() > -2:
        raise NotIntegrable("integrand decays slower than |xi_n|^-2")
    return contour_gamma_plus(r)
