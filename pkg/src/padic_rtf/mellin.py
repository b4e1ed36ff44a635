"""Mellin symbols, convolution kernels and Tate gamma factors.

For a measure ``mu`` on Q_p^x and a unit character ``eta_k`` of level ``m``
the symbol entry is ``sum_n t**n * int_{v(x)=n} eta_k(u)^{-1} dmu``; the
unit integrals are an FFT over the discrete-log index.  Multiplicative
convolution of measures multiplies entries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConsistencyFailure, LevelExceedsBound, UnderivedRow
from .measures import AsymptoticMeasure, GermTerm, ShellMeasure, SteppedMeasure, _cjson
from .padic import (
    MultiplicativeCharacter,
    UnitCharacter,
    check_prime,
    unit_group,
)
from .rational import PoleLabel, PoleRational, SeriesEntry, Tail


@dataclass
class MellinSymbol:
    """Per-character symbols at level ``m``.

    ``dense[k, j]`` is the coefficient of ``t**(lo + j)`` for character ``k``;
    ``tails[k]`` lists germ tails; ``rational[k]``, when present, overrides
    both with a closed rational function (used for gamma-factor products).
    """

    p: int
    m: int
    lo: int = 0
    dense: Optional[np.ndarray] = None
    tails: Dict[int, List[Tail]] = field(default_factory=dict)
    rational: Optional[Dict[int, PoleRational]] = None

    def __post_init__(self):
        check_prime(self.p)
        N = self.N
        if self.dense is None:
            self.dense = np.zeros((N, 1), dtype=complex)
        self.dense = np.asarray(self.dense, dtype=complex).reshape(N, -1)

    @property
    def N(self) -> int:
        return unit_group(self.p, self.m).N if self.m > 0 else 1

    @property
    def L(self) -> int:
        return self.dense.shape[1]

    # entries -----------------------------------------------------------
    def entry(self, k: int) -> SeriesEntry:
        k %= self.N
        if self.rational is not None and k in self.rational:
            return self.rational[k].to_entry()
        return SeriesEntry(self.p, self.lo, self.dense[k].copy(), list(self.tails.get(k, []))).normalized()

    def _ensure_range(self, lo: int, hi: int) -> None:
        new_lo = min(self.lo, lo)
        new_hi = max(self.lo + self.L - 1, hi)
        if new_lo == self.lo and new_hi == self.lo + self.L - 1:
            return
        out = np.zeros((self.N, new_hi - new_lo + 1), dtype=complex)
        out[:, self.lo - new_lo : self.lo - new_lo + self.L] = self.dense
        self.lo, self.dense = new_lo, out

    def set_entry(self, k: int, e: SeriesEntry) -> None:
        k %= self.N
        self._ensure_range(e.lo, e.hi)
        self.dense[k] = 0
        self.dense[k, e.lo - self.lo : e.lo - self.lo + len(e.coeffs)] = e.coeffs
        if e.tails:
            self.tails[k] = list(e.tails)
        else:
            self.tails.pop(k, None)

    def evaluate(self, k: int, t):
        k %= self.N
        if self.rational is not None and k in self.rational:
            return self.rational[k](t)
        t = np.asarray(t, dtype=complex)
        val = t**self.lo * npoly.polyval(t, self.dense[k])
        for tl in self.tails.get(k, []):
            val = val + tl.to_rational(self.p)(t)
        return val

    def coefficient(self, k: int, n: int) -> complex:
        return self.entry(k).coeff(n)

    def copy(self) -> "MellinSymbol":
        return MellinSymbol(
            self.p,
            self.m,
            self.lo,
            self.dense.copy(),
            {k: list(v) for k, v in self.tails.items()},
            dict(self.rational) if self.rational is not None else None,
        )

    def lift(self, m2: int) -> "MellinSymbol":
        """View at a finer level: index ``k`` becomes ``k * p**(m2 - m)``."""
        if m2 == self.m:
            return self.copy()
        if m2 < self.m:
            raise LevelExceedsBound("cannot lower the level of a symbol")
        N2 = unit_group(self.p, m2).N
        step = N2 // self.N if self.m > 0 else N2
        dense = np.zeros((N2, self.L), dtype=complex)
        if self.m > 0:
            dense[:: (self.p ** (m2 - self.m))] = self.dense
            mult = self.p ** (m2 - self.m)
        else:
            dense[0] = self.dense[0]
            mult = 0
        tails = {k * mult: list(v) for k, v in self.tails.items()}
        rational = {k * mult: v for k, v in self.rational.items()} if self.rational is not None else None
        return MellinSymbol(self.p, m2, self.lo, dense, tails, rational)

    def scale_variable(self, b) -> "MellinSymbol":
        """Symbol of the measure multiplied by ``|x|**b`` (``t -> p**(-b) t``)."""
        b = Fraction(b)
        n = np.arange(self.lo, self.lo + self.L)
        dense = self.dense * (float(self.p) ** (-float(b) * n))[None, :]
        tails = {k: [t.substitute_scale(b) for t in v] for k, v in self.tails.items()}
        rational = (
            {k: v.scale_variable(b) for k, v in self.rational.items()} if self.rational is not None else None
        )
        return MellinSymbol(self.p, self.m, self.lo, dense, tails, rational)

    def to_json(self) -> dict:
        entries = []
        keys = set(np.nonzero(np.any(self.dense != 0, axis=1))[0].tolist()) | set(self.tails)
        if self.rational is not None:
            keys |= set(self.rational)
        for k in sorted(keys):
            if self.rational is not None and k in self.rational:
                R = self.rational[k]
                lo, num, den = R.lo, R.numerator_poly() * R.const, R.denominator_poly()
            else:
                lo, num, den = entry_num_den(self.entry(k))
            entries.append(
                {
                    "eta": _char_tag(self.p, self.m, k),
                    "lo": int(lo),
                    "num": [_cjson(z) for z in num],
                    "den": [_cjson(z) for z in den],
                }
            )
        return {"p": self.p, "m": self.m, "entries": entries}


def _char_tag(p: int, m: int, k: int) -> str:
    ch = UnitCharacter.from_level(p, m, k)
    return f"c{ch.c}k{ch.k}"


def entry_num_den(e: SeriesEntry):
    """Write ``e`` as ``t**lo * num(t) / den(t)`` with ``den(0) = 1``."""
    p = e.p
    rats = [t.to_rational(p) for t in e.tails]
    den = np.array([1.0 + 0j])
    for R in rats:
        den = npoly.polymul(den, R.denominator_poly())
    lo = min([e.lo] + [R.lo for R in rats])
    num = np.zeros(1, dtype=complex)

    def add(num, shift, poly):
        need = shift + len(poly)
        if need > len(num):
            num = np.r_[num, np.zeros(need - len(num), dtype=complex)]
        num[shift : shift + len(poly)] += poly
        return num

    num = add(num, e.lo - lo, npoly.polymul(e.coeffs, den))
    for i, R in enumerate(rats):
        other = np.array([1.0 + 0j])
        for j, R2 in enumerate(rats):
            if j != i:
                other = npoly.polymul(other, R2.denominator_poly())
        num = add(num, R.lo - lo, npoly.polymul(R.numerator_poly() * R.const, other))
    return lo, num, den


# ---------------------------------------------------------------------------


def measure_level(f: AsymptoticMeasure) -> int:
    """Smallest ``m`` such that ``f`` is constant on cosets of ``1 + p^m Z_p`` away from its germs."""
    lev = 0
    step = f.step
    if isinstance(step, ShellMeasure):
        lev = step.m
    else:
        for b, d in step.pieces:
            if d != 0 and not b.contains_zero:
                lev = max(lev, b.k - b.valuation())
    for g in f.germs:
        lev = max(lev, g.eta.eta.c)
    return max(lev, 1)


def _split_origin(f: AsymptoticMeasure):
    """Step part without balls around 0, plus germs replacing those balls."""
    step = f.step
    if isinstance(step, ShellMeasure) or not any(b.contains_zero for b, _ in step.pieces):
        return step, list(f.germs)
    p = f.p
    if step.kind != "dx":
        raise ValueError("a d^x x density cannot be constant on a ball around 0")
    triv = MultiplicativeCharacter(UnitCharacter(p, 0, 0))
    rest, extra = [], []
    for b, d in step.pieces:
        if b.contains_zero:
            extra.append(GermTerm("0", Fraction(1), triv, 0, complex(d) * (1 - 1 / p), b.k))
        else:
            rest.append((b, d))
    return SteppedMeasure(p, "dx", tuple(rest)), list(f.germs) + extra


def _as_shell(step, m: int, p: int) -> ShellMeasure:
    if isinstance(step, ShellMeasure):
        if step.m > m:
            raise LevelExceedsBound(f"input level {step.m} exceeds bound {m}")
        return step.lift(m)
    if not step.pieces:
        return ShellMeasure(p, m, {})
    return ShellMeasure.from_stepped(step, m)


def mellin(f: AsymptoticMeasure, m: Optional[int] = None) -> MellinSymbol:
    """Symbol of a measure on Q_p^x at conductor bound ``m`` (default: the level of ``f``)."""
    p = f.p
    if m is None:
        m = measure_level(f)
    step, germs = _split_origin(f)
    sh = _as_shell(step, m, p)
    N = unit_group(p, m).N
    ns = sorted(n for n, v in sh.shells.items())
    if ns:
        lo, hi = ns[0], ns[-1]
        cols = np.zeros((hi - lo + 1, N), dtype=complex)
        for n in ns:
            cols[n - lo] = sh.shells[n]
        dense = (np.fft.fft(cols, axis=1) / N).T
    else:
        lo, dense = 0, np.zeros((N, 1), dtype=complex)
    S = MellinSymbol(p, m, lo, dense)
    for g in germs:
        if g.at != 0:
            raise ValueError("germs anchored away from 0 have no multiplicative symbol")
        if g.eta.eta.c > m:
            raise LevelExceedsBound("germ character conductor exceeds the bound")
        k = g.eta.eta.index_at(m)
        S.tails.setdefault(k, []).append(g.tail())
    for k in list(S.tails):
        e = SeriesEntry(p, 0, np.zeros(1), S.tails[k]).normalized()
        S.tails[k] = e.tails
        if np.any(e.coeffs):
            S._ensure_range(e.lo, e.hi)
            S.dense[k, e.lo - S.lo : e.lo - S.lo + len(e.coeffs)] += e.coeffs
    return S


def inverse_mellin(
    S: MellinSymbol, window: Optional[Tuple[int, int]] = None, coordinate: str = "x", singular_points=()
) -> AsymptoticMeasure:
    """Measure with the given symbol; shells outside ``window`` are dropped."""
    p, m = S.p, S.m
    if S.rational is not None:
        S = S.copy()
        for k, R in S.rational.items():
            S.set_entry(k, R.to_entry())
        S.rational = None
    N = S.N
    vals = np.fft.ifft(S.dense, axis=0) * N
    shells = {}
    for j in range(S.L):
        n = S.lo + j
        if window is not None and not (window[0] <= n <= window[1]):
            continue
        col = vals[:, j]
        if np.any(col != 0):
            shells[n] = col
    germs = []
    for k, tl in S.tails.items():
        ch = UnitCharacter.from_level(p, m, k)
        for t in tl:
            eta = MultiplicativeCharacter(ch, t.label.r)
            for e, c in enumerate(t.P):
                if c != 0:
                    germs.append(GermTerm(t.anchor, t.label.a, eta, e, c * (-1) ** e, t.K))
    return AsymptoticMeasure(p, ShellMeasure(p, m, shells), germs, coordinate, singular_points).canonicalize()


def symbol_mul(S1: MellinSymbol, S2: MellinSymbol) -> MellinSymbol:
    """Componentwise product."""
    if S1.p != S2.p:
        raise ValueError("prime mismatch")
    m = max(S1.m, S2.m)
    A, B = S1.lift(m), S2.lift(m)
    if A.rational is not None and B.rational is not None:
        keys = set(A.rational) | set(B.rational)
        zero = PoleRational(A.p, 0)
        return MellinSymbol(
            A.p, m, rational={k: A.rational.get(k, zero) * B.rational.get(k, zero) for k in keys}
        )
    for S in (A, B):
        if S.rational is not None:
            for k, R in S.rational.items():
                S.set_entry(k, R.to_entry())
            S.rational = None
    out = np.zeros((A.N, A.L + B.L - 1), dtype=complex)
    for j in range(A.L):
        out[:, j : j + B.L] += A.dense[:, j : j + 1] * B.dense
    res = MellinSymbol(A.p, m, A.lo + B.lo, out)
    for k in set(A.tails) | set(B.tails):
        res.set_entry(k, A.entry(k) * B.entry(k))
    return res


# ---------------------------------------------------------------------------


def _negative_shell_integrals(p: int, m: int, s: Fraction, sigma: int) -> np.ndarray:
    """``int_{v(x)=n} |x|^s psi_sigma(x) eta_k(u)^{-1} dx`` for ``n = -m..-1`` (rows) and every ``k``.

    Shells with ``n <= -(m+1)`` vanish against level-``m`` characters: the
    inner sum over ``u mod p^{-n}`` contains a complete additive character sum.
    """
    G = unit_group(p, m)
    out = np.zeros((m, G.N), dtype=complex)
    for j, n in enumerate(range(-m, 0)):
        phase = np.exp(2j * np.pi * sigma * (G.units % p ** (-n)) / p ** (-n))
        out[j] = np.fft.fft(phase) / p**m * float(p) ** (-n * float(s + 1))
    return out


class KernelSymbol:
    """Symbol of the measure ``|x|**s psi_sigma(x) dx`` at level ``m``.

    Built by summing the kernel shell by shell.  Shells ``v(x) >= 0`` only see
    the trivial character and form the geometric tail ``(1-1/p) p^{-n(s+1)}``;
    the finitely many negative shells are Gauss sums.  The trivial entry is
    then recognized as ``-p^s t^{-1} (1 - p^{-s} t) / (1 - p^{-s-1} t)`` and
    the others as single monomials, and both forms are checked against the sums.
    """

    def __init__(self, p: int, m: int, s, sigma: int = 1):
        self.p = check_prime(p)
        self.m = m
        self.s = Fraction(s)
        self.sigma = sigma
        G = unit_group(p, m)
        self.cond = G.conductors()
        shells = _negative_shell_integrals(p, m, self.s, sigma)
        # a character of conductor c only meets the shell v(x) = -c
        self.coeff = np.zeros(G.N, dtype=complex)
        for k in range(1, G.N):
            c = int(self.cond[k])
            col = shells[:, k].copy()
            self.coeff[k] = col[m - c]
            col[m - c] = 0
            if np.max(np.abs(col)) > 1e-9 * max(1.0, abs(self.coeff[k])):
                raise ConsistencyFailure("kernel shell sum is not a monomial")
        c_m1 = shells[m - 1, 0]
        if m > 1 and np.max(np.abs(shells[: m - 1, 0])) > 1e-9:
            raise ConsistencyFailure("trivial kernel entry has deep negative shells")
        lam = float(p) ** (-float(self.s + 1))
        mu = (c_m1 * lam - (1 - 1 / p)) / c_m1
        if abs(mu - float(p) ** (-float(self.s))) > 1e-9 * abs(mu):
            raise ConsistencyFailure("trivial kernel entry has an unexpected zero")
        self.trivial = PoleRational(
            p,
            c_m1,
            -1,
            np.ones(1),
            ((PoleLabel(self.s), 1),),
            ((PoleLabel(self.s + 1), 1, "0"),),
        )

    def entry(self, k: int) -> PoleRational:
        k %= len(self.cond)
        if k == 0:
            return self.trivial
        return PoleRational(self.p, self.coeff[k], -int(self.cond[k]))

    def apply(self, S: MellinSymbol) -> MellinSymbol:
        """Multiply a symbol of the same level by this kernel."""
        if S.m != self.m:
            raise LevelExceedsBound("kernel and symbol levels differ")
        if S.rational is not None:
            return MellinSymbol(
                S.p, S.m, rational={k: R * self.entry(k) for k, R in S.rational.items()}
            )
        m = self.m
        out = np.zeros((S.N, S.L + m), dtype=complex)
        for c in range(1, m + 1):
            sel = self.cond == c
            out[sel, m - c : m - c + S.L] = S.dense[sel] * self.coeff[sel][:, None]
        res = MellinSymbol(S.p, m, S.lo - m, out)
        for k, tl in S.tails.items():
            if k == 0:
                continue
            c = int(self.cond[k])
            res.tails[k] = [t.times_monomial(self.coeff[k], -c, S.p) for t in tl]
        res.set_entry(0, S.entry(0).mul_rational(self.trivial))
        return res


def kernel_symbol(p: int, m: int, s, sigma: int = 1) -> KernelSymbol:
    return KernelSymbol(p, m, s, sigma)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaFactorSpec:
    """Unit character (or quadratic multiplicative character), shift ``a`` and additive sign."""

    eta: object
    a: Fraction = Fraction(0)
    sigma: int = 1


def tate_gamma(spec: GammaFactorSpec) -> PoleRational:
    """Gamma factor normalized to be unitary on ``|t| = 1`` at ``a = 0``.

    It is the kernel symbol of ``|x|^{-1/2-a} psi_sigma(x) dx``, so that
    ``tate_gamma(eta, a, sigma)(t) * tate_gamma(eta^-1, -a, -sigma)(1/t) = 1``.
    A multiplicative character with ``eta(p) = exp(2 pi i r)`` enters through
    ``t -> exp(-2 pi i r) t``.
    """
    eta = spec.eta
    r, shift = Fraction(0), Fraction(0)
    if isinstance(eta, MultiplicativeCharacter):
        r, shift = eta.r, eta.a
        eta = eta.eta
    p = eta.p
    m = max(eta.c, 1)
    K = _kernel_cached(p, m, Fraction(-1, 2) - Fraction(spec.a), spec.sigma)
    R = K.entry(eta.index_at(m))
    if r:
        R = R.rotate_variable(-r)
    return R.scale_variable(shift) if shift else R


@lru_cache(maxsize=512)
def _kernel_cached(p: int, m: int, s: Fraction, sigma: int) -> KernelSymbol:
    return KernelSymbol(p, m, s, sigma)


def gamma_factor_at_level(p: int, m: int, k: int, a, sigma: int) -> PoleRational:
    """Gamma factor of the level-``m`` character with index ``k``."""
    K = _kernel_cached(p, m, Fraction(-1, 2) - Fraction(a), sigma)
    return K.entry(k)


def mu_X(row, p: int, m: int = 2, psi_sign: int = 1) -> MellinSymbol:
    """Gamma-factor product for a derived table row, one rational entry per character.

    Type T uses the coordinate where half the spherical coroot has degree 1;
    type G the coordinate where the coroot itself has degree 1.
    ``psi_sign = -1`` replaces the additive character by its inverse throughout.
    """
    factors = mu_X_factors(row)
    N = unit_group(p, m).N
    entries = {}
    for k in range(N):
        R = PoleRational(p, 1.0)
        for d, s, sigma in factors:
            g = gamma_factor_at_level(p, m, (d * k) % N, s - Fraction(1, 2), sigma * psi_sign)
            R = R * g.unanchored().substitute_power(d)
        entries[k] = R
    return MellinSymbol(p, m, rational=entries)


def mu_X_factors(row) -> List[Tuple[int, Fraction, int]]:
    """``(degree, s, sigma)`` for each gamma factor of the row's product."""
    rt = getattr(row, "root_type", None)
    if rt == "T":
        if row.s1 is None or row.s2 is None:
            raise UnderivedRow("row lacks s1/s2")
        return [
            (1, 1 - Fraction(row.s1), -1),
            (1, 1 - Fraction(row.s2), 1),
            (-2, Fraction(0), 1),
        ]
    if rt == "G":
        if row.s0 is None:
            raise UnderivedRow("row lacks s0")
        return [(1, 1 - Fraction(row.s0), -1), (-1, Fraction(0), 1)]
    raise UnderivedRow("row has no root type")
