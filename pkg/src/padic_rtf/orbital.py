"""Kuznetsov-side test vectors, Kloosterman sums and germs, and X-side orbital integrals.

Bruhat coordinates: ``n1 w a n2`` with ``n1 = [[1, x], [0, 1]]``,
``w = [[0, -1], [1, 0]]`` and ``n2 = [[1, y], [0, 1]]``.

* PGL2, ``a = diag(xi, 1)``: the element is integral up to the centre iff
  ``v(xi) = 2 mu >= 0`` and, with ``x = X p^-mu``, ``y = Y p^-mu``, one has
  ``X, Y`` integral and ``X Y xi' = 1 mod p^mu`` (``xi = p^{2 mu} xi'``).  The
  twisted integral is the Kloosterman sum ``S(-1, -1/xi'; p^mu)`` and the
  measure is that value times ``|xi| d^x xi``.
* SL2, ``a = diag(zeta, 1/zeta)``: integral iff ``v(zeta) = n >= 0`` and,
  with ``X = x zeta``, ``Y = y zeta``, ``X Y = 1 mod p^n``.  For ``n >= 1``
  the integral is ``|zeta|^-1 int_{Z_p^x} psi^-1((u + 1/u)/zeta) du`` and the
  measure is that value times ``|zeta|^2 d^x zeta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
import sympy

from .errors import DepthExceeded, InsufficientPrecision, InstanceTooLarge, ZeroArgument
from .measures import AsymptoticMeasure, Ball, GermTerm, ShellMeasure, SteppedMeasure
from .padic import PAdicScalar, check_prime, legendre, quadratic_characters, unit_group, val_rational
from .quadratic import QuadSpace, class_index, form_counts

GROUPS = ("pgl2", "sl2")


def _prime_power(q: int) -> Tuple[int, int]:
    f = sympy.factorint(q)
    if len(f) != 1:
        raise ValueError(f"{q} is not a prime power")
    (p, k), = f.items()
    return int(p), int(k)


def kloosterman_sum(a: int, b: int, modulus: int) -> complex:
    """``sum_{x mod q, gcd(x, q) = 1} exp(2 pi i (a x + b / x) / q)`` for a prime power ``q``."""
    if modulus < 2:
        raise ValueError("modulus must be a prime power p^k with k >= 1")
    p, _ = _prime_power(modulus)
    x = np.array([u for u in range(1, modulus) if u % p], dtype=np.int64)
    xinv = np.array([pow(int(u), -1, modulus) for u in x], dtype=np.int64)
    ph = (a * x + b * xinv) % modulus
    return complex(np.exp(2j * np.pi * ph / modulus).sum())


@lru_cache(maxsize=64)
def _kl_table(p: int, mu: int) -> np.ndarray:
    """``K(t) = sum_{X Z = t} e(-(X + Z)/p^mu)`` over units, indexed by discrete log at level ``mu``.

    It is the multiplicative self-convolution of ``X -> e(-X/p^mu)``, done with an FFT.
    """
    G = unit_group(p, mu)
    a = np.exp(-2j * np.pi * G.units / p**mu)
    A = np.fft.fft(a)
    return np.fft.ifft(A * A)


def _lift_rows(p: int, lev: int, m: int, row: np.ndarray) -> np.ndarray:
    """View a row indexed by discrete log at level ``lev`` at the finer level ``m``."""
    if lev == m:
        return row
    reps = unit_group(p, m).N // unit_group(p, lev).N
    return np.tile(row, reps)


@dataclass
class KuznetsovVector:
    group: str
    p: int
    measure: AsymptoticMeasure
    provenance: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "p": self.p,
            "measure": self.measure.to_json(),
            "provenance": self.provenance,
        }


def kuznetsov_shell(group: str, p: int, n: int, m: int) -> np.ndarray:
    """``d^x``-density of the basic vector on shell ``n``, averaged over cosets of ``1 + p^m Z_p``.

    The values on the shell depend on the unit part modulo ``p^mu`` (PGL2,
    ``n = 2 mu``) or ``p^n`` (SL2).  When that exceeds ``m`` the coset average
    vanishes, since every level-``m`` character meets a Gauss sum of higher
    conductor; this is returned as an exact zero row.
    """
    check_prime(p)
    N = unit_group(p, m).N
    if group == "pgl2":
        if n < 0 or n % 2:
            return np.zeros(N, dtype=complex)
        mu = n // 2
        if mu == 0:
            return np.ones(N, dtype=complex)
        if mu > m:
            return np.zeros(N, dtype=complex)
        K = _kl_table(p, mu)
        j = np.arange(len(K))
        row = K[(-j) % len(K)] * float(p) ** (-n)
        return _lift_rows(p, mu, m, row)
    if group == "sl2":
        if n < 0:
            return np.zeros(N, dtype=complex)
        if n == 0:
            return np.ones(N, dtype=complex)
        if n > m:
            return np.zeros(N, dtype=complex)
        K = _kl_table(p, n)
        j = np.arange(len(K))
        row = K[(-2 * j) % len(K)] * float(p) ** (-2 * n)
        return _lift_rows(p, n, m, row)
    raise ValueError(f"group must be one of {GROUPS}")


def kuznetsov_basic(group: str, p: int, window: Optional[Tuple[int, int]] = None, m: Optional[int] = None) -> KuznetsovVector:
    """Orbital integrals of the indicator of ``G*(Z_p)`` on the shells of ``window``.

    With ``m`` given and no window, the result is the full projection of the
    basic vector to level ``m``: it lives on shells ``0..2m`` (PGL2) or
    ``0..m`` (SL2).  With a window, ``m`` defaults to the level needed for the
    window's values to be exact.
    """
    group = group.lower()
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}")
    top = (lambda m_: 2 * m_) if group == "pgl2" else (lambda m_: m_)
    if window is None:
        if m is None:
            raise ValueError("give a window or a level")
        window = (0, top(m))
    lo, hi = window
    if m is None:
        m = max(1, (hi + 1) // 2 if group == "pgl2" else hi)
    if m > 12:
        raise DepthExceeded("window too deep for the enumeration precision")
    shells = {}
    for n in range(max(lo, 0), hi + 1):
        row = kuznetsov_shell(group, p, n, m)
        if np.any(row):
            shells[n] = row
    coord = "xi" if group == "pgl2" else "zeta"
    meas = AsymptoticMeasure(p, ShellMeasure(p, m, shells), [], coord, (Fraction(0),))
    prov = {
        "function": f"indicator of {group.upper()}(Z_p)",
        "haar": "vol G*(Z_p) = 1; product self-dual measure on N x N",
        "density": "Kloosterman value times |xi| d^x xi" if group == "pgl2" else "value times |zeta|^2 d^x zeta",
        "level": m,
        "window": [lo, hi],
        "exact_through_shell": top(m),
    }
    return KuznetsovVector(group, p, meas, prov)


def kuznetsov_bruhat_enum(group: str, p: int, x: Fraction, M: Optional[int] = None) -> complex:
    """Twisted Bruhat-cell integral at one point by enumerating ``X, Y mod p^M`` (independent check).

    Returns the value ``I`` before the factor ``|xi|`` (PGL2) or ``|zeta|^2`` (SL2).
    """
    x = Fraction(x)
    if x == 0:
        raise ZeroArgument("the cell integral is taken at a nonzero point")
    v = val_rational(x, p)
    unit = x / Fraction(p) ** v
    if group == "pgl2":
        if v < 0 or v % 2:
            return 0j
        mu = v // 2
        M = M or max(mu, 1)
        q = p**M
        xi_u = unit.numerator * pow(unit.denominator, -1, q) % q
        X, Y = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
        ok = (X * Y * xi_u - 1) % p**mu == 0
        ph = np.exp(-2j * np.pi * ((X + Y) % q)[ok] / p**mu)
        # (x, y) = (X, Y) p^-mu: dx dy = p^{2 mu} dX dY; each cell has mass p^{-2M}
        return complex(ph.sum()) * p ** (2 * mu) / q**2
    if group == "sl2":
        if v < 0:
            return 0j
        M = M or max(v, 1)
        q = p**M
        z_u = unit.numerator * pow(unit.denominator, -1, q) % q
        X, Y = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
        ok = (X * Y - 1) % p**v == 0
        inv = pow(int(z_u), -1, q)
        ph = np.exp(-2j * np.pi * (((X + Y) * inv) % q)[ok] / p**v)
        return complex(ph.sum()) * p ** (2 * v) / q**2
    raise ValueError(f"group must be one of {GROUPS}")


def kloosterman_germ(group: str, x, branch: int = 1, p: Optional[int] = None) -> complex:
    """The germ integrals near 0.

    PGL2: ``int_{|u|^2 = |xi|} psi^-1(u/xi + 1/u) du``.
    SL2: ``int_{u in branch + p Z_p} psi^-1((u + 1/u)/zeta) du``.

    ``x`` is a :class:`PAdicScalar` or a rational together with ``p``.
    """
    group = group.lower()
    if isinstance(x, PAdicScalar):
        if x.is_zero:
            raise ZeroArgument("germ evaluated at zero")
        p, v, unit, prec = x.p, x.v, x.u, x.m
    else:
        if p is None:
            raise ValueError("a rational argument needs the prime p")
        x = Fraction(x)
        if x == 0:
            raise ZeroArgument("germ evaluated at zero")
        v = val_rational(x, p)
        unit = x / Fraction(p) ** v
        prec = math.inf
    if group == "pgl2":
        if v % 2:
            return 0j
        mu = v // 2
        if mu == 0:
            return complex(1 - 1 / p)
        if mu < 0:
            return _pgl2_negative(p, mu, unit)
        if prec < mu:
            raise InsufficientPrecision("unit part not known modulo p^mu")
        q = p**mu
        xu = _unit_mod(unit, q)
        K = sum(
            np.exp(-2j * np.pi * ((pow(xu, -1, q) * U + pow(U, -1, q)) % q) / q)
            for U in range(1, q)
            if U % p
        )
        return complex(K) * float(p) ** (-2 * mu)
    if group == "sl2":
        if branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if v <= 0:
            return complex(1 / p)
        if prec < v:
            raise InsufficientPrecision("unit part not known modulo p^n")
        q = p**v
        zi = pow(_unit_mod(unit, q), -1, q)
        us = np.array([u for u in range(q) if (u - branch) % p == 0], dtype=np.int64)
        inv = np.array([pow(int(u), -1, q) for u in us], dtype=np.int64)
        ph = np.exp(-2j * np.pi * (((us + inv) * zi) % q) / q)
        return complex(ph.sum()) / q
    raise ValueError(f"group must be one of {GROUPS}")


def _unit_mod(unit, q: int) -> int:
    if isinstance(unit, Fraction):
        return unit.numerator * pow(unit.denominator, -1, q) % q
    return int(unit) % q


def _pgl2_negative(p: int, mu: int, unit) -> complex:
    """PGL2 germ for ``v(xi) = 2 mu < 0``: ``u = p^mu U`` with ``U`` a unit.

    ``u/xi = p^{-mu} U / xi'`` is integral and ``1/u = p^{-mu}/U`` is integral,
    so the integrand is 1 and the integral is ``vol{|u| = p^-mu} = p^-mu (1 - 1/p)``.
    """
    return complex(float(p) ** (-mu) * (1 - 1 / p))


# ---------------------------------------------------------------------------
# X side


def a1_orbital_count(vc: int, vc1: int) -> int:
    """Number of torus valuation pairs ``(A, B)`` making the pair integral, for ``c`` with
    ``v(c) = vc`` and ``v(c - 1) = vc1``.

    With ``g = [[1, 1], [y, 1]]`` and ``c = 1/(1 - y)``, the pair ``(x0, x0 g)``
    translated by the torus element of valuations ``(A, B)`` is integral iff
    ``A + B + D = 2 min(A + B, A, B + Y, 0)`` with ``Y = v(y)``, ``D = v(1 - y)``.
    """
    if vc < 0 and vc1 != vc or vc > 0 and vc1 != 0 or vc == 0 and vc1 < 0:
        raise ValueError("inconsistent valuations of c and c - 1")
    D = -vc
    Y = vc1 + D
    R = 2 * (abs(Y) + abs(D)) + 4
    cnt = 0
    for A in range(-R, R + 1):
        for B in range(-R, R + 1):
            if A + B + D == 2 * min(A + B, A, B + Y, 0):
                cnt += 1
    return cnt


def xside_basic(row: str, p: int, window: Tuple[int, int] = (-3, 3), M: int = 4) -> AsymptoticMeasure:
    """Orbital integrals of the basic function on the line ``c``, as a measure.

    A1: density ``O(c) dc`` from the torus count; the shells
    ``v(c) <= window[1]`` and ``v(c - 1) <= window[1]`` are explicit, the rest
    are the log germs ``1 - log_p|c|`` and ``1 - log_p|c - 1|``.

    D2: pushforward of the normalized Haar measure of ``SL2(Z_p)`` under the
    trace, exact at resolution ``p^-M`` (``M <= 4``).
    """
    check_prime(p)
    row = row.upper()
    if row == "A1":
        return _xside_a1(p, window)
    if row == "D2":
        if M > 4:
            raise DepthExceeded("D2 enumeration is limited to M <= 4")
        return _xside_d2(p, M)
    raise ValueError("row must be A1 or D2")


def _xside_a1(p: int, window: Tuple[int, int]) -> AsymptoticMeasure:
    lo, hi = window
    hi = max(hi, 1)
    pieces = []
    # v(c) = n >= 1 (near 0)
    for n in range(1, hi + 1):
        O = a1_orbital_count(n, 0)
        for u in range(1, p):
            pieces.append((Ball(p, Fraction(u * p**n), n + 1), Fraction(O)))
    # units away from 1
    O0 = a1_orbital_count(0, 0)
    for u in range(2, p):
        pieces.append((Ball(p, Fraction(u), 1), Fraction(O0)))
    # v(c - 1) = k >= 1
    for k in range(1, hi + 1):
        O = a1_orbital_count(0, k)
        for u in range(1, p):
            pieces.append((Ball(p, Fraction(1 + u * p**k), k + 1), Fraction(O)))
    for n in range(min(lo, -1), 0):
        if a1_orbital_count(n, n):
            raise AssertionError("nonzero count outside Z_p")
    triv = quadratic_characters(p)[0]
    c = 1 - 1 / p
    K = hi + 1
    germs = []
    for at in (0, 1):
        germs.append(GermTerm("0", Fraction(1), triv, 0, c, K, at))
        germs.append(GermTerm("0", Fraction(1), triv, 1, -c, K, at))
    return AsymptoticMeasure(p, SteppedMeasure(p, "dx", tuple(pieces)), germs, "c", (Fraction(0), Fraction(1)))


def sl2_order(p: int, M: int) -> int:
    return p ** (3 * M) - p ** (3 * M - 2)


def sl2_trace_counts(p: int, M: int) -> np.ndarray:
    """``#{g in SL2(Z/p^M) : tr g = t}`` for every ``t mod p^M`` (direct enumeration over ``a, d``)."""
    q = p**M
    if q**2 > 10**7:
        raise InstanceTooLarge("trace enumeration too large")
    # number of (b, c) with b c = r mod q, by valuation of r
    r = np.arange(q)
    bc = np.zeros(q, dtype=np.int64)
    B, C = np.meshgrid(np.arange(q), np.arange(q), indexing="ij") if q <= 3000 else (None, None)
    if B is not None:
        bc = np.bincount(((B * C) % q).ravel(), minlength=q)
    else:  # pragma: no cover - guarded by the size check
        raise InstanceTooLarge("trace enumeration too large")
    out = np.zeros(q, dtype=np.int64)
    a = np.arange(q)
    for t in range(q):
        out[t] = bc[(a * (t - a) - 1) % q].sum()
    return out


def _xside_d2(p: int, M: int) -> AsymptoticMeasure:
    q = p**M
    counts = sl2_trace_counts(p, M)
    order = sl2_order(p, M)
    pieces = []
    for t in range(q):
        if counts[t]:
            # mass counts/order on a ball of volume p^-M
            pieces.append((Ball(p, Fraction(t), M), Fraction(int(counts[t]) * q, order)))
    step = SteppedMeasure(p, "dx", tuple(pieces)).canonicalize()
    return AsymptoticMeasure(p, step, [], "c", (Fraction(-2), Fraction(2)))


def xside_d2_density(p: int, t: Fraction, M: int = 8) -> Fraction:
    """Trace density of ``SL2(Z_p)`` at ``t`` from the ``A^2 + BC`` counts at ``t^2/4 - 1``."""
    xi = Fraction(t) ** 2 / 4 - 1
    if xi == 0:
        raise ZeroArgument("singular trace")
    v = val_rational(xi, p)
    if v < 0:
        return Fraction(0)
    if v >= M:
        raise InsufficientPrecision("increase M")
    unit = xi / Fraction(p) ** v
    eps = int(legendre(unit.numerator * pow(unit.denominator, -1, p) % p, p))
    c = form_counts(QuadSpace(3, p), M)
    return c.density(class_index(v, eps, M)) / (1 - Fraction(1, p * p))
