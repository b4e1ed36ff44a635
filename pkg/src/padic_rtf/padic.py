"""Finite-precision arithmetic in Q_p (p odd) and its characters.

A nonzero element is stored as ``p**v * u`` with ``u`` a unit known modulo
``p**m``. Characters of the unit group are indexed through a discrete
logarithm with respect to one fixed generator, chosen as a primitive root
modulo ``p**2`` so that the same integer generates ``(Z/p^m)^x`` for every
level ``m``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np
import sympy

from .errors import InsufficientPrecision, UnsupportedPrime, ZeroArgument

INF = "inf"

Rational = Union[int, Fraction]


def check_prime(p: int) -> int:
    """Return ``p`` if it is an odd prime, else raise UnsupportedPrime."""
    if not isinstance(p, (int, np.integer)) or p < 3 or not sympy.isprime(int(p)):
        raise UnsupportedPrime(f"p must be an odd prime, got {p!r}")
    return int(p)


def val_int(n: int, p: int) -> int:
    """Valuation of a nonzero integer."""
    if n == 0:
        raise ZeroArgument("valuation of integer 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def val_rational(x: Rational, p: int):
    """Valuation of a rational number, ``INF`` for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    return val_int(x.numerator, p) - val_int(x.denominator, p)


@lru_cache(maxsize=None)
def generator(p: int) -> int:
    """Smallest primitive root modulo p**2 (hence modulo every p**m)."""
    p = check_prime(p)
    for g in range(2, p * p):
        if g % p and sympy.n_order(g, p * p) == p * (p - 1):
            return g
    raise UnsupportedPrime(p)  # pragma: no cover


def group_order(p: int, m: int) -> int:
    """Order of (Z/p^m)^x; 1 for m = 0."""
    return 1 if m == 0 else (p - 1) * p ** (m - 1)


class UnitGroup:
    """The cyclic group (Z/p^m)^x with its discrete-log tables.

    ``units[j] = g**j mod p**m`` and ``dlog[u] = j`` (``-1`` on non-units).
    """

    def __init__(self, p: int, m: int):
        self.p = check_prime(p)
        if m < 1:
            raise ValueError("unit group level must be >= 1")
        self.m = m
        self.q = p**m
        self.N = group_order(p, m)
        g = generator(p)
        units = np.empty(self.N, dtype=np.int64)
        acc = 1
        for j in range(self.N):
            units[j] = acc
            acc = acc * g % self.q
        self.units = units
        dlog = np.full(self.q, -1, dtype=np.int64)
        dlog[units] = np.arange(self.N)
        self.dlog = dlog

    def conductor(self, k: int) -> int:
        """Conductor exponent of the character with index ``k`` at this level."""
        k %= self.N
        if k == 0:
            return 0
        c = self.m
        while c > 1 and k % self.p ** (self.m - c + 1) == 0:
            c -= 1
        return c

    def conductors(self) -> np.ndarray:
        """Vector of conductor exponents for all indices ``0..N-1``."""
        k = np.arange(self.N)
        out = np.full(self.N, self.m, dtype=np.int64)
        for c in range(self.m - 1, 0, -1):
            out[k % self.p ** (self.m - c) == 0] = c
        out[0] = 0
        return out


@lru_cache(maxsize=64)
def unit_group(p: int, m: int) -> UnitGroup:
    return UnitGroup(p, m)


# ---------------------------------------------------------------------------
# Scalars


@dataclass(frozen=True)
class PAdicScalar:
    """The element ``p**v * u`` of Q_p with ``u`` known modulo ``p**m``."""

    p: int
    v: object  # int, or INF for zero
    u: int
    m: int

    def __post_init__(self):
        check_prime(self.p)
        if self.m < 1:
            raise ValueError("precision m must be >= 1")
        if self.v == INF:
            object.__setattr__(self, "u", 0)
            return
        if not isinstance(self.v, (int, np.integer)):
            raise TypeError("valuation must be an integer or 'inf'")
        u = int(self.u) % self.p**self.m
        if u % self.p == 0:
            raise ValueError("unit part must be invertible mod p")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", int(self.v))

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, p: int, m: int) -> "PAdicScalar":
        return cls(p, INF, 0, m)

    @classmethod
    def from_rational(cls, x: Rational, p: int, m: int) -> "PAdicScalar":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, m)
        v = val_rational(x, p)
        rest = x / Fraction(p) ** v
        q = p**m
        u = rest.numerator * pow(rest.denominator, -1, q) % q
        return cls(p, v, u, m)

    @property
    def is_zero(self) -> bool:
        return self.v == INF

    def to_fraction(self) -> Fraction:
        """The rational representative ``p**v * u`` with ``0 < u < p**m``."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.u) * Fraction(self.p) ** self.v

    # arithmetic ---------------------------------------------------------
    def _same(self, other: "PAdicScalar"):
        if self.p != other.p:
            raise ValueError("prime mismatch")
        return min(self.m, other.m)

    def __mul__(self, other: "PAdicScalar") -> "PAdicScalar":
        m = self._same(other)
        if self.is_zero or other.is_zero:
            return PAdicScalar.zero(self.p, m)
        return PAdicScalar(self.p, self.v + other.v, self.u * other.u, m)

    def inverse(self) -> "PAdicScalar":
        if self.is_zero:
            raise ZeroArgument("inverse of zero")
        return PAdicScalar(self.p, -self.v, pow(self.u, -1, self.p**self.m), self.m)

    def __truediv__(self, other: "PAdicScalar") -> "PAdicScalar":
        return self * other.inverse()

    def __neg__(self) -> "PAdicScalar":
        if self.is_zero:
            return self
        return PAdicScalar(self.p, self.v, -self.u, self.m)

    def __add__(self, other: "PAdicScalar") -> "PAdicScalar":
        m = self._same(other)
        if self.is_zero:
            return PAdicScalar(other.p, other.v, other.u, m) if not other.is_zero else other
        if other.is_zero:
            return PAdicScalar(self.p, self.v, self.u, m)
        a, b = (self, other) if self.v <= other.v else (other, self)
        d = b.v - a.v
        q = self.p**m
        s = (a.u + self.p**d * b.u) % q
        if s % self.p == 0:
            raise InsufficientPrecision(
                "cancellation in addition leaves fewer than m known digits"
            )
        return PAdicScalar(self.p, a.v, s, m)

    def __sub__(self, other: "PAdicScalar") -> "PAdicScalar":
        return self + (-other)

    def to_json(self) -> dict:
        return {"p": self.p, "v": self.v, "u": str(self.u), "m": self.m}

    @classmethod
    def from_json(cls, d: dict) -> "PAdicScalar":
        return cls(int(d["p"]), d["v"] if d["v"] == INF else int(d["v"]), int(d["u"]), int(d["m"]))


def as_scalar(x, p: int, m: int) -> PAdicScalar:
    """Coerce an int, Fraction or PAdicScalar to a PAdicScalar."""
    if isinstance(x, PAdicScalar):
        return x
    return PAdicScalar.from_rational(x, p, m)


def valuation(x: PAdicScalar):
    """Valuation of ``x``; the string ``'inf'`` for zero."""
    return x.v


def abs_p(x: PAdicScalar) -> Fraction:
    """Normalized absolute value ``p**(-v)``; zero for zero."""
    if x.is_zero:
        return Fraction(0)
    return Fraction(1, x.p**x.v) if x.v >= 0 else Fraction(x.p ** (-x.v))


def frac_part(x: PAdicScalar) -> Fraction:
    """Rational in [0, 1) whose difference with ``x`` is p-integral."""
    if x.is_zero or x.v >= 0:
        return Fraction(0)
    k = -x.v
    if k > x.m:
        raise InsufficientPrecision(
            f"need {k} digits below the point, only {x.m} known"
        )
    return Fraction(x.u % x.p**k, x.p**k)


# ---------------------------------------------------------------------------
# Characters


@dataclass(frozen=True)
class AdditiveCharacter:
    """``psi_sigma(x) = exp(2 pi i sigma frac(x))``, conductor Z_p."""

    p: int
    sigma: int = 1

    def __post_init__(self):
        check_prime(self.p)
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")

    def __call__(self, x: PAdicScalar) -> complex:
        return psi(self, x)


def psi(ch: AdditiveCharacter, x: PAdicScalar) -> complex:
    f = frac_part(x)
    if f == 0:
        return 1.0 + 0j
    return cmath.exp(2j * math.pi * ch.sigma * float(f))


@dataclass(frozen=True)
class UnitCharacter:
    """Character of (Z/p^c)^x sending the fixed generator to exp(2 pi i k / N_c).

    ``c`` is the exact conductor exponent; ``k`` is reduced modulo
    ``N_c = (p-1) p^(c-1)``.
    """

    p: int
    c: int
    k: int

    def __post_init__(self):
        check_prime(self.p)
        if self.c < 0:
            raise ValueError("conductor exponent must be >= 0")
        N = group_order(self.p, self.c)
        k = int(self.k) % N
        object.__setattr__(self, "k", k)
        if self.c == 0:
            return
        if unit_group(self.p, self.c).conductor(k) != self.c:
            raise ValueError(f"index {k} does not have exact conductor p^{self.c}")

    @classmethod
    def trivial(cls, p: int) -> "UnitCharacter":
        return cls(p, 0, 0)

    @classmethod
    def from_level(cls, p: int, m: int, k: int) -> "UnitCharacter":
        """Build from an index at level ``m``, reducing to the exact conductor."""
        if m == 0:
            return cls.trivial(p)
        G = unit_group(p, m)
        k %= G.N
        c = G.conductor(k)
        if c == 0:
            return cls.trivial(p)
        return cls(p, c, k // p ** (m - c))

    def index_at(self, m: int) -> int:
        """Index of the same character viewed at level ``m >= c``."""
        if m < self.c:
            raise ValueError("level below the conductor")
        if self.c == 0:
            return 0
        return self.k * self.p ** (m - self.c)

    @property
    def order(self) -> int:
        N = group_order(self.p, self.c)
        return N // math.gcd(self.k, N)

    @property
    def generator_value(self) -> complex:
        return cmath.exp(2j * math.pi * self.k / group_order(self.p, self.c))

    def inverse(self) -> "UnitCharacter":
        return UnitCharacter(self.p, self.c, -self.k)

    def __call__(self, u: int) -> complex:
        if self.c == 0:
            return 1.0 + 0j
        G = unit_group(self.p, self.c)
        j = int(G.dlog[int(u) % G.q])
        if j < 0:
            raise ZeroArgument("unit character evaluated at a non-unit")
        return cmath.exp(2j * math.pi * self.k * j / G.N)


@dataclass(frozen=True)
class MultiplicativeCharacter:
    """``x -> eta(unit x) * zeta**v(x) * |x|**a`` with ``zeta = exp(2 pi i r)``."""

    eta: UnitCharacter
    r: Fraction = Fraction(0)
    a: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r) % 1)
        object.__setattr__(self, "a", Fraction(self.a))

    @property
    def p(self) -> int:
        return self.eta.p

    @property
    def zeta(self) -> complex:
        return cmath.exp(2j * math.pi * float(self.r)) if self.r else 1.0 + 0j

    def __mul__(self, other: "MultiplicativeCharacter") -> "MultiplicativeCharacter":
        c = max(self.eta.c, other.eta.c)
        k = self.eta.index_at(c) + other.eta.index_at(c)
        return MultiplicativeCharacter(
            UnitCharacter.from_level(self.p, c, k), self.r + other.r, self.a + other.a
        )

    def inverse(self) -> "MultiplicativeCharacter":
        return MultiplicativeCharacter(self.eta.inverse(), -self.r, -self.a)

    @property
    def name(self) -> str:
        """Short label for the four quadratic characters, else a generic tag."""
        for nm, ch in zip(QUADRATIC_NAMES, quadratic_characters(self.p)):
            if ch.eta == self.eta and ch.r == self.r:
                return nm
        return f"c{self.eta.c}k{self.eta.k}r{self.r}"


def eval_char(chi: MultiplicativeCharacter, x: PAdicScalar) -> complex:
    """Value of ``chi`` at a nonzero scalar."""
    if x.is_zero:
        raise ZeroArgument("character evaluated at zero")
    if chi.eta.c > x.m:
        raise InsufficientPrecision("unit part not known to the conductor")
    val = chi.eta(x.u)
    if chi.r:
        val *= cmath.exp(2j * math.pi * float(chi.r) * x.v)
    if chi.a:
        val *= float(x.p) ** (-float(chi.a) * x.v)
    return val


QUADRATIC_NAMES = ("triv", "ur", "ram1", "ram2")


@lru_cache(maxsize=None)
def quadratic_characters(p: int) -> tuple:
    """The four quadratic characters of Q_p^x, in the order of QUADRATIC_NAMES.

    ``ram1`` is the Legendre symbol on units with value +1 at p, ``ram2``
    the same with value -1 at p.
    """
    p = check_prime(p)
    triv = UnitCharacter.trivial(p)
    leg = UnitCharacter(p, 1, (p - 1) // 2)
    half = Fraction(1, 2)
    return (
        MultiplicativeCharacter(triv),
        MultiplicativeCharacter(triv, half),
        MultiplicativeCharacter(leg),
        MultiplicativeCharacter(leg, half),
    )


def quadratic_by_name(p: int, name: str) -> MultiplicativeCharacter:
    try:
        return quadratic_characters(p)[QUADRATIC_NAMES.index(name)]
    except ValueError:
        raise ValueError(f"unknown quadratic character {name!r}") from None


def legendre(u, p: int):
    """Legendre symbol of integers (vectorized), 0 on multiples of p."""
    u = np.asarray(u, dtype=np.int64) % p
    sq = np.zeros(p, dtype=np.int64)
    sq[(np.arange(1, p) ** 2) % p] = 1
    out = np.where(sq[u] == 1, 1, -1)
    return np.where(u == 0, 0, out)
