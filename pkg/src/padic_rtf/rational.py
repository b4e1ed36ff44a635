"""Rational functions of ``t`` with exactly labelled poles, and germ tails.

Every pole sits at ``t = 1/lam`` with ``lam = p**(-a) * exp(2 pi i r)`` for
rational ``a, r``; the pair ``(a, r)`` is the pole's label, so two factors
cancel only when their labels agree exactly.  Each pole also carries an
anchor: ``"0"`` if the pole is expanded in positive powers of ``t`` (a
germ at the origin of Q_p) or ``"inf"`` if it is expanded in negative
powers (a germ at infinity).

A :class:`Tail` is the coefficient sequence ``n -> P(n) lam**n`` on
``n >= K`` (anchor ``"0"``) or ``n <= -K`` (anchor ``"inf"``), with ``P`` a
polynomial in ``n``.  A :class:`SeriesEntry` is a finite Laurent
polynomial plus tails; it is the per-character content of a Mellin symbol.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NonconvergentTail

ANCHORS = ("0", "inf")
# poles of pure gamma-factor products are never expanded, so they may stay unanchored
UNANCHORED = "none"


@dataclass(frozen=True, order=True)
class PoleLabel:
    """Exact label of ``lam = p**(-a) * exp(2 pi i r)``; ``r`` is taken mod 1."""

    a: Fraction
    r: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "r", Fraction(self.r) % 1)

    def value(self, p: int) -> complex:
        mag = float(p) ** (-float(self.a))
        if self.r == 0:
            return complex(mag)
        return mag * cmath.exp(2j * math.pi * float(self.r))

    def times_power_of_p(self, b: Fraction) -> "PoleLabel":
        """Label of ``lam * p**(-b)``."""
        return PoleLabel(self.a + Fraction(b), self.r)

    def inverse(self) -> "PoleLabel":
        return PoleLabel(-self.a, -self.r)


# ---------------------------------------------------------------------------
# small polynomial helpers (ascending coefficient arrays)


def _arr(c) -> np.ndarray:
    a = np.atleast_1d(np.asarray(c, dtype=complex))
    return a if a.size else np.zeros(1, dtype=complex)


def poly_trim(c: np.ndarray) -> np.ndarray:
    c = _arr(c)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


def poly_shift_arg(P: np.ndarray, s) -> np.ndarray:
    """Coefficients of ``n -> P(n + s)``."""
    P = _arr(P)
    out = np.zeros(len(P), dtype=complex)
    base = np.array([1.0 + 0j])
    lin = np.array([s, 1.0], dtype=complex)
    for d, c in enumerate(P):
        if d:
            base = npoly.polymul(base, lin)
        out[: len(base)] += c * base
    return out


def poly_neg_arg(P: np.ndarray) -> np.ndarray:
    """Coefficients of ``n -> P(-n)``."""
    P = _arr(P).copy()
    P[1::2] *= -1
    return P


def binom_poly(shift: int, i: int) -> np.ndarray:
    """Coefficients in ``n`` of ``binomial(n + shift, i)``."""
    out = np.array([1.0 + 0j])
    for j in range(i):
        out = npoly.polymul(out, np.array([shift - j, 1.0], dtype=complex)) / (j + 1)
    return _arr(out)


def binom_basis(P: np.ndarray, K: int) -> np.ndarray:
    """Solve ``P(n) = sum_i b_i binomial(n - K + i, i)`` for ``b``."""
    P = poly_trim(P)
    e = len(P) - 1
    M = np.array([[math.comb(j + i, i) for i in range(e + 1)] for j in range(e + 1)], dtype=float)
    rhs = npoly.polyval(np.arange(K, K + e + 1), P)
    return np.linalg.solve(M, rhs)


def _series_pow(base: np.ndarray, k: int, order: int) -> np.ndarray:
    out = np.zeros(order, dtype=complex)
    out[0] = 1.0
    for _ in range(k):
        out = np.convolve(out, base)[:order]
    return out


def _series_inv_linear(c0: complex, c1: complex, order: int) -> np.ndarray:
    """Series of ``1/(c0 + c1 u)`` in ``u``."""
    q = -c1 / c0
    return (q ** np.arange(order)) / c0


def _series_binom(e: int, order: int) -> np.ndarray:
    """Series of ``(1 - u)**e`` for any integer ``e``."""
    out = np.zeros(order, dtype=complex)
    c = 1.0
    for k in range(order):
        out[k] = c
        c = c * (e - k) / (k + 1) * -1
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoleRational:
    """``const * t**lo * poly(t) * prod (1 - mu t)**z / prod (1 - lam t)**M``.

    ``zeros`` maps labels to multiplicities; ``poles`` maps labels to
    ``(multiplicity, anchor)``.  Coinciding zero and pole labels cancel on
    construction.
    """

    p: int
    const: complex = 1.0
    lo: int = 0
    poly: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))
    zeros: Tuple[Tuple[PoleLabel, int], ...] = ()
    poles: Tuple[Tuple[PoleLabel, int, str], ...] = ()

    def __post_init__(self):
        poly = poly_trim(self.poly)
        lo = int(self.lo)
        const = complex(self.const)
        if not np.any(poly):
            object.__setattr__(self, "const", 0j)
            object.__setattr__(self, "poly", np.ones(1, dtype=complex))
            object.__setattr__(self, "zeros", ())
            object.__setattr__(self, "poles", ())
            object.__setattr__(self, "lo", 0)
            return
        first = np.nonzero(poly)[0][0]
        if first:
            poly = poly[first:]
            lo += int(first)
        zeros: Dict[PoleLabel, int] = {}
        for lab, z in self.zeros:
            zeros[lab] = zeros.get(lab, 0) + int(z)
        poles: Dict[PoleLabel, List] = {}
        for lab, mlt, anc in self.poles:
            if anc not in ANCHORS and anc != UNANCHORED:
                raise ValueError(f"bad anchor {anc!r}")
            if lab in poles and poles[lab][1] != anc:
                if UNANCHORED in (anc, poles[lab][1]):
                    poles[lab][1] = UNANCHORED
                else:
                    raise NonconvergentTail(
                        f"pole {lab} carries both anchors; the product has no Mellin meaning"
                    )
            cur = poles.setdefault(lab, [0, anc])
            cur[0] += int(mlt)
        for lab in list(poles):
            if lab in zeros:
                k = min(zeros[lab], poles[lab][0])
                zeros[lab] -= k
                poles[lab][0] -= k
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "const", const)
        object.__setattr__(
            self, "zeros", tuple(sorted((lab, z) for lab, z in zeros.items() if z > 0))
        )
        object.__setattr__(
            self,
            "poles",
            tuple(sorted((lab, v[0], v[1]) for lab, v in poles.items() if v[0] > 0)),
        )

    # ------------------------------------------------------------------
    @classmethod
    def monomial(cls, p: int, c: complex, k: int) -> "PoleRational":
        return cls(p, c, k)

    @property
    def is_zero(self) -> bool:
        return self.const == 0

    def numerator_poly(self) -> np.ndarray:
        """``poly * prod(1 - mu t)**z`` as an ascending coefficient array."""
        out = self.poly.copy()
        for lab, z in self.zeros:
            mu = lab.value(self.p)
            for _ in range(z):
                out = npoly.polymul(out, np.array([1.0, -mu]))
        return _arr(out)

    def denominator_poly(self) -> np.ndarray:
        out = np.array([1.0 + 0j])
        for lab, M, _ in self.poles:
            lam = lab.value(self.p)
            for _ in range(M):
                out = npoly.polymul(out, np.array([1.0, -lam]))
        return _arr(out)

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        val = self.const * t**self.lo * npoly.polyval(t, self.poly)
        for lab, z in self.zeros:
            val = val * (1 - lab.value(self.p) * t) ** z
        for lab, M, _ in self.poles:
            val = val / (1 - lab.value(self.p) * t) ** M
        return val

    def __mul__(self, other):
        if not isinstance(other, PoleRational):
            return PoleRational(self.p, self.const * other, self.lo, self.poly, self.zeros, self.poles)
        if other.p != self.p:
            raise ValueError("prime mismatch")
        return PoleRational(
            self.p,
            self.const * other.const,
            self.lo + other.lo,
            npoly.polymul(self.poly, other.poly),
            self.zeros + other.zeros,
            self.poles + other.poles,
        )

    __rmul__ = __mul__

    def scale_variable(self, b) -> "PoleRational":
        """Substitute ``t -> p**(-b) t`` (multiplication of the measure by ``|x|**b``)."""
        b = Fraction(b)
        c = float(self.p) ** (-float(b))
        poly = self.poly * c ** np.arange(len(self.poly))
        return PoleRational(
            self.p,
            self.const * c**self.lo,
            self.lo,
            poly,
            tuple((lab.times_power_of_p(b), z) for lab, z in self.zeros),
            tuple((lab.times_power_of_p(b), M, a) for lab, M, a in self.poles),
        )

    def unanchored(self) -> "PoleRational":
        """Same function with pole anchors erased (evaluation-only use)."""
        return PoleRational(
            self.p, self.const, self.lo, self.poly, self.zeros,
            tuple((lab, M, UNANCHORED) for lab, M, _ in self.poles),
        )

    def rotate_variable(self, r) -> "PoleRational":
        """Substitute ``t -> exp(2 pi i r) t``."""
        r = Fraction(r)
        w = cmath.exp(2j * math.pi * float(r))
        poly = self.poly * w ** np.arange(len(self.poly))
        return PoleRational(
            self.p,
            self.const * w**self.lo,
            self.lo,
            poly,
            tuple((PoleLabel(lab.a, lab.r + r), z) for lab, z in self.zeros),
            tuple((PoleLabel(lab.a, lab.r + r), M, a) for lab, M, a in self.poles),
        )

    def substitute_power(self, d: int) -> "PoleRational":
        """Substitute ``t -> t**d`` for a nonzero integer ``d``.

        A negative ``d`` swaps the roles of 0 and infinity, so pole anchors
        flip.
        """
        if d == 0:
            raise ValueError("degree must be nonzero")
        p = self.p
        dd = abs(d)
        const = self.const
        if d > 0:
            lo = self.lo * d
            poly = np.zeros((len(self.poly) - 1) * d + 1, dtype=complex)
            poly[::d] = self.poly
        else:
            deg = len(self.poly) - 1
            lo = self.lo * d - dd * deg
            poly = np.zeros(deg * dd + 1, dtype=complex)
            poly[::dd] = self.poly[::-1]
        zeros = []
        poles = []

        def split(lab, sign):
            # 1 - lam t**(sign*dd) expressed through linear factors
            if sign > 0:
                return 1.0 + 0j, 0, [PoleLabel(lab.a / dd, (lab.r + j) / dd) for j in range(dd)]
            lam = lab.value(p)
            # 1 - lam t^-dd = -lam t^-dd (1 - lam^-1 t^dd)
            inv = lab.inverse()
            return -lam, -dd, [PoleLabel(inv.a / dd, (inv.r + j) / dd) for j in range(dd)]

        sign = 1 if d > 0 else -1
        for lab, z in self.zeros:
            c, sh, labs = split(lab, sign)
            const *= c**z
            lo += sh * z
            zeros.extend((l2, z) for l2 in labs)
        for lab, M, anc in self.poles:
            c, sh, labs = split(lab, sign)
            const /= c**M
            lo -= sh * M
            new_anc = anc if d > 0 or anc == UNANCHORED else ("inf" if anc == "0" else "0")
            poles.extend((l2, M, new_anc) for l2 in labs)
        return PoleRational(p, const, lo, poly, tuple(zeros), tuple(poles))

    # ------------------------------------------------------------------
    def partial_fractions(self):
        """Split into a Laurent polynomial plus principal parts.

        Returns ``(lo, coeffs, parts)`` where the Laurent part is
        ``sum coeffs[j] t**(lo + j)`` and ``parts`` is a list of
        ``(label, anchor, [c_1, ..., c_M])`` meaning
        ``sum_i c_i / (1 - lam t)**i``.
        """
        p = self.p
        if self.is_zero:
            return 0, np.zeros(1, dtype=complex), []
        parts = []
        lams = [(lab, lab.value(p), M, anc) for lab, M, anc in self.poles]
        num = self.numerator_poly() * self.const
        for j, (lab, lam, M, anc) in enumerate(lams):
            order = M
            # t = (1 - u) / lam
            S = _series_binom(self.lo, order) * lam ** (-self.lo)
            t_ser = np.zeros(order, dtype=complex)
            t_ser[0] = 1 / lam
            if order > 1:
                t_ser[1] = -1 / lam
            A = np.zeros(order, dtype=complex)
            for c in num[::-1]:
                A = np.convolve(A, t_ser)[:order]
                A[0] += c
            S = np.convolve(S, A)[:order]
            for i, (lab2, lam2, M2, _) in enumerate(lams):
                if i == j:
                    continue
                rho = lam2 / lam
                inv = _series_inv_linear(1 - rho, rho, order)
                S = np.convolve(S, _series_pow(inv, M2, order))[:order]
            parts.append((lab, anc, [S[M - i] for i in range(1, M + 1)]))
        total_M = sum(M for _, _, M, _ in lams)
        H = self.lo + len(num) - 1 - total_M
        low = min(self.lo, 0)
        high = max(H, -1) if self.lo < 0 else H
        if high < low:
            return 0, np.zeros(1, dtype=complex), parts
        n_terms = high - self.lo + 1
        ser = np.zeros(max(n_terms, 1), dtype=complex)
        ser[: min(len(num), len(ser))] = num[: len(ser)]
        for _, lam, M, _ in lams:
            geo = lam ** np.arange(len(ser))
            for _ in range(M):
                ser = np.convolve(ser, geo)[: len(ser)]
        coeffs = np.zeros(high - low + 1, dtype=complex)
        # R's expansion at 0 occupies degrees lo .. high
        for idx in range(max(n_terms, 0)):
            deg = self.lo + idx
            if low <= deg <= high:
                coeffs[deg - low] += ser[idx]
        for lab, anc, cs in parts:
            lam = lab.value(p)
            for i, c in enumerate(cs, start=1):
                for deg in range(max(0, low), high + 1):
                    coeffs[deg - low] -= c * math.comb(deg + i - 1, i - 1) * lam**deg
        return low, coeffs, parts

    def to_entry(self) -> "SeriesEntry":
        lo, coeffs, parts = self.partial_fractions()
        tails = []
        for lab, anc, cs in parts:
            for i, c in enumerate(cs, start=1):
                if c == 0:
                    continue
                tails.append(Tail.from_principal_part(lab, anc, i, c))
        return SeriesEntry(self.p, lo, coeffs, tails).normalized()


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tail:
    """Coefficients ``P(n) lam**n`` on ``n >= K`` (anchor "0") or ``n <= -K`` ("inf")."""

    anchor: str
    label: PoleLabel
    K: int
    P: np.ndarray

    def __post_init__(self):
        if self.anchor not in ANCHORS:
            raise ValueError(f"bad anchor {self.anchor!r}")
        object.__setattr__(self, "P", poly_trim(self.P))
        object.__setattr__(self, "K", int(self.K))

    @classmethod
    def from_principal_part(cls, lab: PoleLabel, anchor: str, i: int, c: complex) -> "Tail":
        if anchor == "0":
            return cls("0", lab, 0, c * binom_poly(i - 1, i - 1))
        # c/(1-x)^i at |x| > 1 has coefficient c (-1)^i binom(-n-1, i-1) for n <= -1
        return cls("inf", lab, 1, c * (-1) ** i * poly_neg_arg(binom_poly(-1, i - 1)))

    @property
    def degree(self) -> int:
        return len(self.P) - 1

    def covers(self, n: int) -> bool:
        return n >= self.K if self.anchor == "0" else n <= -self.K

    def coeff(self, n, p: int):
        n = np.asarray(n)
        lam = self.label.value(p)
        val = npoly.polyval(n, self.P) * lam ** n.astype(float if lam.imag == 0 else complex)
        if self.anchor == "0":
            return np.where(n >= self.K, val, 0)
        return np.where(n <= -self.K, val, 0)

    def scaled(self, c: complex) -> "Tail":
        return Tail(self.anchor, self.label, self.K, self.P * c)

    def with_cutoff(self, K: int, p: int):
        """Raise the cutoff to ``K``; return ``(tail, lo, coeffs)`` of the moved part."""
        if K <= self.K:
            return self, 0, np.zeros(0, dtype=complex)
        ns = np.arange(self.K, K) if self.anchor == "0" else np.arange(-K + 1, -self.K + 1)
        vals = np.asarray(self.coeff(ns, p), dtype=complex)
        return Tail(self.anchor, self.label, K, self.P), int(ns[0]), vals

    def to_rational(self, p: int) -> PoleRational:
        lam = self.label.value(p)
        e = self.degree
        if self.anchor == "0":
            b = binom_basis(self.P, self.K)
            num = np.zeros(e + 1, dtype=complex)
            for i, bi in enumerate(b):
                num[: e - i + 1] += bi * _binom_expand(e - i)
            poly = num * lam ** np.arange(len(num))
            return PoleRational(p, lam**self.K, self.K, poly, (), ((self.label, e + 1, "0"),))
        Pm = poly_neg_arg(self.P)
        b = binom_basis(Pm, self.K)
        num = np.zeros(e + 2, dtype=complex)
        for i, bi in enumerate(b):
            term = npoly.polymul(np.r_[np.zeros(i + 1), 1.0], _binom_expand(e - i))
            num[: len(term)] += bi * (-1) ** (i + 1) * term
        poly = num * lam ** np.arange(len(num))
        return PoleRational(p, lam ** (-self.K), -self.K, poly, (), ((self.label, e + 1, "inf"),))

    def substitute_scale(self, b) -> "Tail":
        """Tail after ``t -> p**(-b) t``."""
        return Tail(self.anchor, self.label.times_power_of_p(b), self.K, self.P)

    def times_monomial(self, c: complex, k: int, p: int) -> "Tail":
        """Tail of ``(c t**k) * self``."""
        lam = self.label.value(p)
        P = c * lam ** (-k) * poly_shift_arg(self.P, -k)
        K = self.K + k if self.anchor == "0" else self.K - k
        return Tail(self.anchor, self.label, K, P)


def _binom_expand(e: int) -> np.ndarray:
    """Coefficients of ``(1 - x)**e`` for ``e >= 0``."""
    return np.array([math.comb(e, k) * (-1) ** k for k in range(e + 1)], dtype=complex)


def laurent_times_tail(lo: int, coeffs: np.ndarray, tail: Tail, p: int):
    """Product of a Laurent polynomial with a tail, by direct sequence convolution.

    Returns ``(lo2, coeffs2, tail2)``.
    """
    coeffs = _arr(coeffs)
    hi = lo + len(coeffs) - 1
    lam = tail.label.value(p)
    js = np.arange(lo, hi + 1)
    Q = np.zeros(len(tail.P), dtype=complex)
    for j, l in zip(js, coeffs):
        if l != 0:
            Q += l * lam ** (-float(j) if lam.imag == 0 else -j) * poly_shift_arg(tail.P, -j)
    if tail.anchor == "0":
        Ns = np.arange(lo + tail.K, hi + tail.K)
        K2 = hi + tail.K
    else:
        Ns = np.arange(lo - tail.K + 1, hi - tail.K + 1)
        K2 = tail.K - lo
    out = np.zeros(len(Ns), dtype=complex)
    for idx, N in enumerate(Ns):
        out[idx] = np.sum(coeffs * tail.coeff(N - js, p))
    lo2 = int(Ns[0]) if len(Ns) else 0
    return lo2, out, Tail(tail.anchor, tail.label, K2, Q)


# ---------------------------------------------------------------------------


@dataclass
class SeriesEntry:
    """Finite Laurent polynomial ``sum c_j t**(lo+j)`` plus tails."""

    p: int
    lo: int = 0
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))
    tails: List[Tail] = field(default_factory=list)

    def __post_init__(self):
        self.coeffs = _arr(self.coeffs)
        self.lo = int(self.lo)

    @classmethod
    def zero(cls, p: int) -> "SeriesEntry":
        return cls(p)

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    def copy(self) -> "SeriesEntry":
        return SeriesEntry(self.p, self.lo, self.coeffs.copy(), list(self.tails))

    def add_laurent(self, lo: int, coeffs) -> None:
        coeffs = _arr(coeffs)
        if len(coeffs) == 0:
            return
        new_lo = min(self.lo, lo)
        new_hi = max(self.hi, lo + len(coeffs) - 1)
        out = np.zeros(new_hi - new_lo + 1, dtype=complex)
        out[self.lo - new_lo : self.lo - new_lo + len(self.coeffs)] += self.coeffs
        out[lo - new_lo : lo - new_lo + len(coeffs)] += coeffs
        self.lo, self.coeffs = new_lo, out

    def normalized(self) -> "SeriesEntry":
        """Merge tails sharing anchor and label, trim zero Laurent ends."""
        res = SeriesEntry(self.p, self.lo, self.coeffs.copy(), [])
        groups: Dict[Tuple[str, PoleLabel], List[Tail]] = {}
        for t in self.tails:
            if np.any(t.P):
                groups.setdefault((t.anchor, t.label), []).append(t)
        for (anc, lab), ts in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            K = max(t.K for t in ts)
            deg = max(len(t.P) for t in ts)
            P = np.zeros(deg, dtype=complex)
            for t in ts:
                t2, lo, vals = t.with_cutoff(K, self.p)
                res.add_laurent(lo, vals)
                P[: len(t2.P)] += t2.P
            if np.any(P):
                res.tails.append(Tail(anc, lab, K, P))
        nz = np.nonzero(res.coeffs)[0]
        if nz.size:
            res.lo, res.coeffs = res.lo + int(nz[0]), res.coeffs[nz[0] : nz[-1] + 1]
        else:
            res.lo, res.coeffs = 0, np.zeros(1, dtype=complex)
        return res

    def __add__(self, other: "SeriesEntry") -> "SeriesEntry":
        out = self.copy()
        out.add_laurent(other.lo, other.coeffs)
        out.tails = out.tails + list(other.tails)
        return out.normalized()

    def scaled(self, c: complex) -> "SeriesEntry":
        return SeriesEntry(self.p, self.lo, self.coeffs * c, [t.scaled(c) for t in self.tails])

    def coeff(self, n: int) -> complex:
        val = 0j
        if self.lo <= n <= self.hi:
            val += self.coeffs[n - self.lo]
        for t in self.tails:
            val += complex(t.coeff(n, self.p))
        return val

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        val = t**self.lo * npoly.polyval(t, self.coeffs)
        for tl in self.tails:
            val = val + tl.to_rational(self.p)(t)
        return val

    def scale_variable(self, b) -> "SeriesEntry":
        c = float(self.p) ** (-float(Fraction(b)))
        ns = np.arange(self.lo, self.hi + 1)
        return SeriesEntry(
            self.p, self.lo, self.coeffs * c ** ns.astype(float), [t.substitute_scale(b) for t in self.tails]
        )

    def times_monomial(self, c: complex, k: int) -> "SeriesEntry":
        return SeriesEntry(
            self.p, self.lo + k, self.coeffs * c, [t.times_monomial(c, k, self.p) for t in self.tails]
        )

    def __mul__(self, other) -> "SeriesEntry":
        if isinstance(other, PoleRational):
            return self.mul_rational(other)
        if not isinstance(other, SeriesEntry):
            return self.scaled(other)
        p = self.p
        out = SeriesEntry(p, self.lo + other.lo, np.convolve(self.coeffs, other.coeffs), [])
        for a, b in ((self, other), (other, self)):
            for t in b.tails:
                lo2, c2, t2 = laurent_times_tail(a.lo, a.coeffs, t, p)
                out.add_laurent(lo2, c2)
                out.tails.append(t2)
        for t1 in self.tails:
            for t2 in other.tails:
                prod = (t1.to_rational(p) * t2.to_rational(p)).to_entry()
                out.add_laurent(prod.lo, prod.coeffs)
                out.tails.extend(prod.tails)
        return out.normalized()

    def mul_rational(self, R: PoleRational) -> "SeriesEntry":
        """Product with a rational symbol, keeping exact zero/pole cancellation for tails."""
        p = self.p
        if R.is_zero:
            return SeriesEntry.zero(p)
        if not R.poles and not R.zeros and len(R.poly) == 1:
            return self.times_monomial(R.const * R.poly[0], R.lo).normalized()
        RE = R.to_entry()
        out = SeriesEntry(p, self.lo + RE.lo, np.convolve(self.coeffs, RE.coeffs), [])
        for t in RE.tails:
            lo2, c2, t2 = laurent_times_tail(self.lo, self.coeffs, t, p)
            out.add_laurent(lo2, c2)
            out.tails.append(t2)
        for t in self.tails:
            prod = (t.to_rational(p) * R).to_entry()
            out.add_laurent(prod.lo, prod.coeffs)
            out.tails.extend(prod.tails)
        return out.normalized()
