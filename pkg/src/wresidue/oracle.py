"""Independent numeric checks: gamma matrices, Monte-Carlo sphere moments, quadrature.

Nothing here calls the symbolic trace, moment or residue code; the results are
compared against those routines by the verification suites.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate

from .clifford import CliffordExpr
from .halfplane import NotIntegrable, XiNRational

__all__ = [
    "DEFAULT_SEED",
    "GammaRep",
    "NumericAssignment",
    "MomentEstimate",
    "build_gamma_rep",
    "numeric_trace",
    "mc_sphere_moment",
    "mc_sphere_moments",
    "numeric_line_integral",
    "mc_block_integral",
    "boundary_assignment",
]

DEFAULT_SEED = 2026
_BATCH = 1_000_000
_MATRIX_BATCH = 100_000


class MissingAssignment(KeyError):
    """A covector or scalar has no numeric value."""


@dataclass(frozen=True)
class GammaRep:
    """``i`` times the Hermitian Euclidean gammas, so that ``g^i g^j + g^j g^i = -2 delta``."""

    matrices: np.ndarray   # shape (n, d, d)

    @property
    def n(self) -> int:
        return self.matrices.shape[0]

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def clifford(self, v: Sequence[float]) -> np.ndarray:
        """``c(v) = sum_j v_j gamma^j`` for a covector in an orthonormal frame."""
        return np.tensordot(np.asarray(v, dtype=complex), self.matrices, axes=1)

    def anticommutator_error(self) -> float:
        eye = np.eye(self.dim)
        worst = 0.0
        for a in range(self.n):
            for b in range(self.n):
                g, h = self.matrices[a], self.matrices[b]
                want = -2.0 * eye if a == b else 0.0 * eye
                worst = max(worst, float(np.abs(g @ h + h @ g - want).max()))
        return worst


def build_gamma_rep(n: int = 4) -> GammaRep:
    if n != 4:
        raise ValueError("only n = 4 is supported")
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    e2 = np.eye(2, dtype=complex)
    # Hermitian, squares to +1, pairwise anticommuting
    herm = [np.kron(s1, s1), np.kron(s1, s2), np.kron(s1, s3), np.kron(s2, e2)]
    rep = GammaRep(np.array([1j * h for h in herm]))
    if rep.anticommutator_error() > 1e-14:
        raise AssertionError("gamma representation failed its relations")
    return rep


@dataclass
class NumericAssignment:
    """Covector components in an orthonormal frame plus values for scalar indeterminates."""

    vectors: Mapping[str, Sequence[float]]
    scalars: Mapping[str, complex] = field(default_factory=dict)
    seed: int | None = None

    def vector(self, name: str) -> np.ndarray:
        try:
            return np.asarray(self.vectors[name], dtype=float)
        except KeyError:
            raise MissingAssignment(f"no components for covector {name!r}") from None

    def value(self, expr) -> complex:
        try:
            return expr.evaluate(self.scalars)
        except KeyError as exc:
            raise MissingAssignment(f"no value for {exc.args[0]!r}") from None


def numeric_trace(word: CliffordExpr, a: NumericAssignment, rep: GammaRep | None = None) -> complex:
    """Matrix trace of ``word`` with each ``c(v)`` realised by gamma matrices."""
    rep = rep or build_gamma_rep(4)
    mats = {}
    total = 0j
    for w, coeff in word.terms.items():
        m = np.eye(rep.dim, dtype=complex)
        for name in w:
            if name not in mats:
                mats[name] = rep.clifford(a.vector(name))
            m = m @ mats[name]
        total += a.value(coeff) * np.trace(m)
    return complex(total)


def boundary_assignment(rng: np.random.Generator, hprime: float = 1.0, f: float = 1.0,
                        omega3: float = 2 * math.pi ** 2) -> NumericAssignment:
    """Random data for the collar algebra: unit ``xi'`` orthogonal to ``dx_n = e_4``.

    ``w`` is fixed by ``g(w, xi') = h'/2`` and ``g(w, dx_n) = 0``; the pairing
    values used by the symbolic algebra are computed from the same vectors.
    """
    xi = np.zeros(4)
    xi[:3] = rng.normal(size=3)
    xi /= np.linalg.norm(xi)
    dxn = np.array([0.0, 0.0, 0.0, 1.0])
    X = rng.normal(size=4)
    perp = np.zeros(4)
    perp[:3] = rng.normal(size=3)
    perp[:3] -= perp[:3].dot(xi[:3]) * xi[:3]
    w = 0.5 * hprime * xi + perp
    scalars = {"hprime": hprime, "f": f, "Xn": X[3], "gXxi": X.dot(xi), "XX": X.dot(X),
               "ww": w.dot(w), "pi": math.pi, "Omega3": omega3}
    return NumericAssignment({"xi'": xi, "dxn": dxn, "X": X, "w": w}, scalars)


# -- sphere moments --------------------------------------------------------------------

@dataclass(frozen=True)
class MomentEstimate:
    estimate: float
    stderr: float
    samples: int

    def within(self, exact: float, k: float = 3.0) -> bool:
        return abs(self.estimate - exact) <= k * self.stderr


def _sphere_volume(n: int) -> float:
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def _sphere_batches(n: int, samples: int, seed: int, batch: int = _BATCH):
    rng = np.random.default_rng(seed)
    left = samples
    while left > 0:
        m = min(batch, left)
        x = rng.standard_normal((m, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        left -= m
        yield x


def mc_sphere_moments(alphas: Sequence[Sequence[int]], n: int = 4, samples: int = 10 ** 6,
                      seed: int = DEFAULT_SEED) -> list[MomentEstimate]:
    """``int_{S^{n-1}} xi^alpha`` for several multi-indices from one shared sample."""
    if samples < 10 ** 4:
        raise ValueError("at least 10^4 samples are required")
    alphas = [tuple(a) for a in alphas]
    top = max((max(a) for a in alphas), default=0)
    s1 = np.zeros(len(alphas))
    s2 = np.zeros(len(alphas))
    for x in _sphere_batches(n, samples, seed):
        powers = [[np.ones(len(x))] for _ in range(n)]
        for j in range(n):
            for _ in range(top):
                powers[j].append(powers[j][-1] * x[:, j])
        for i, a in enumerate(alphas):
            v = powers[0][a[0]]
            for j in range(1, n):
                if a[j]:
                    v = v * powers[j][a[j]]
            s1[i] += v.sum()
            s2[i] += (v * v).sum()
    vol = _sphere_volume(n)
    out = []
    for i in range(len(alphas)):
        mean = s1[i] / samples
        var = max(s2[i] / samples - mean * mean, 0.0)
        out.append(MomentEstimate(vol * mean, vol * math.sqrt(var / (samples - 1)), samples))
    return out


def mc_sphere_moment(monomial: Sequence[int], n: int = 4, samples: int = 10 ** 6,
                     seed: int = DEFAULT_SEED) -> MomentEstimate:
    return mc_sphere_moments([monomial], n, samples, seed)[0]


def mc_block_integral(words: Sequence[tuple[float, Sequence[str]]], vectors: Mapping[str, Sequence[float]],
                      samples: int = 10 ** 6, seed: int = DEFAULT_SEED,
                      rep: GammaRep | None = None) -> MomentEstimate:
    """``int_{S^3} tr[sum coeff * c(v_1)...c(v_k)]`` with ``xi`` drawn uniformly from the sphere.

    The name ``"xi"`` in a word stands for the sample point; other names are
    looked up in ``vectors``.  All of the integrand is realised with matrices.
    """
    rep = rep or build_gamma_rep(4)
    fixed = {k: rep.clifford(v) for k, v in vectors.items()}
    s1 = s2 = 0.0
    for x in _sphere_batches(4, samples, seed, _MATRIX_BATCH):
        cxi = np.einsum("bj,jkl->bkl", x.astype(complex), rep.matrices)
        vals = np.zeros(len(x))
        for coeff, word in words:
            m = None
            for name in word:
                g = cxi if name == "xi" else fixed[name]
                if m is None:
                    m = np.broadcast_to(g, cxi.shape).copy() if g.ndim == 2 else g
                else:
                    m = m @ g
            vals += coeff * np.trace(m, axis1=-2, axis2=-1).real
        s1 += vals.sum()
        s2 += (vals * vals).sum()
    vol = _sphere_volume(4)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return MomentEstimate(vol * mean, vol * math.sqrt(var / (samples - 1)), samples)


# -- line integrals --------------------------------------------------------------------

@dataclass(frozen=True)
class LineIntegral:
    value: complex
    error: float


def numeric_line_integral(r: XiNRational, a: NumericAssignment | Mapping[str, complex]) -> LineIntegral:
    """Adaptive quadrature of ``r`` over the real line.

    Uses ``xi_n = tan(t)``, which maps the line onto ``(-pi/2, pi/2)`` exactly, so
    no truncation tail is left over; integrands decaying like ``|xi_n|^-2`` or
    faster become bounded on the closed interval.
    """
    if r.degree_at_infinity() > -2:
        raise NotIntegrable("integrand decays slower than |xi_n|^-2")
    scalars = a.scalars if isinstance(a, NumericAssignment) else a
    cache: dict = {}

    def coeff(c):
        key = id(c)
        if key not in cache:
            cache[key] = c.evaluate(scalars)
        return cache[key]

    def g(t):
        x = math.tan(t)
        return r.evaluate(x, coeff) * (1.0 + x * x)

    h = math.pi / 2
    with warnings.catch_warnings():
        # a part that is identically zero up to roundoff cannot meet a relative tolerance
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, e1 = integrate.quad(lambda t: g(t).real, -h, h, epsabs=1e-13, epsrel=1e-13, limit=200)
        im, e2 = integrate.quad(lambda t: g(t).imag, -h, h, epsabs=1e-13, epsrel=1e-13, limit=200)
    return LineIntegral(complex(re, im), e1 + e2)


def exact_rational_vector(rng: np.random.Generator, n: int = 4, den: int = 4) -> list[Fraction]:
    """Small random rational vector, handy for exact symbolic pairings."""
    return [Fraction(int(k), den) for k in rng.integers(-2 * den, 2 * den + 1, size=n)]
