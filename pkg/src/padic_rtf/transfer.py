"""Multiplicative convolution with ``|x|^s psi(x) dx`` and the rank-one transfer operator.

Two evaluation paths are provided.  The symbol path multiplies Mellin
symbols.  The oracle path sums the convolution shell by shell,

    (K * f)(p^k w) = sum_n (1 - 1/p) p^{-n(s+1)} avg_u psi(p^n u) f(p^{k-n} w / u),

where ``f`` is a density against ``d^x x`` and ``u`` runs over the units
modulo ``p^m``.  Shells ``n <= -(m+1)`` contribute nothing against level-``m``
data and are checked to vanish rather than assumed to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .errors import CoordinateMismatch, NonconvergentTail, ParamsInconsistent
from .measures import AsymptoticMeasure, GermTerm, ShellMeasure
from .mellin import (
    KernelSymbol,
    _as_shell,
    _split_origin,
    inverse_mellin,
    measure_level,
    mellin,
)
from .padic import check_prime, unit_group

SINGULAR_POINTS = {"T": (Fraction(0), Fraction(1)), "G": (Fraction(-2), Fraction(2))}
INPUT_COORDINATE = {"T": "xi", "G": "zeta"}


@dataclass(frozen=True)
class TransferParams:
    root_type: str
    s1: Optional[Fraction] = None
    s2: Optional[Fraction] = None
    s0: Optional[Fraction] = None
    psi_sign: int = 1
    p: Optional[int] = None

    def __post_init__(self):
        if self.root_type not in ("T", "G"):
            raise ParamsInconsistent("root type must be T or G")
        if self.psi_sign not in (1, -1):
            raise ParamsInconsistent("psi sign must be +1 or -1")
        if self.p is not None:
            check_prime(self.p)
        if self.root_type == "T":
            if self.s1 is None or self.s2 is None:
                raise ParamsInconsistent("type T needs s1 and s2")
            s1, s2 = Fraction(self.s1), Fraction(self.s2)
            if not s1 >= s2 > 0:
                raise ParamsInconsistent("type T needs s1 >= s2 > 0")
            object.__setattr__(self, "s1", s1)
            object.__setattr__(self, "s2", s2)
        else:
            if self.s0 is None:
                raise ParamsInconsistent("type G needs s0")
            s0 = Fraction(self.s0)
            if s0 < 1:
                raise ParamsInconsistent("type G needs s0 >= 1")
            object.__setattr__(self, "s0", s0)

    @classmethod
    def from_row(cls, row, p: Optional[int] = None, psi_sign: int = 1) -> "TransferParams":
        if row.root_type == "T":
            return cls("T", s1=row.s1, s2=row.s2, psi_sign=psi_sign, p=p)
        return cls("G", s0=row.s0, psi_sign=psi_sign, p=p)

    def kernel_exponents(self) -> List[Fraction]:
        """Exponents ``s`` of the kernels ``|x|^s psi(x) dx``, innermost last."""
        if self.root_type == "T":
            return [Fraction(1, 2) - self.s1, Fraction(1, 2) - self.s2]
        return [1 - self.s0]

    @property
    def outer_power(self) -> Fraction:
        """Exponent ``b`` of the final multiplication by ``|x|^b``."""
        return self.s1 - Fraction(1, 2) if self.root_type == "T" else self.s0 - 1

    def allowed_tails(self) -> Dict[Fraction, int]:
        """Allowed exponents at infinity mapped to the largest allowed log power."""
        if self.root_type == "G":
            return {1 - self.s0: 0}
        a1, a2 = Fraction(1, 2) - self.s1, Fraction(1, 2) - self.s2
        if a1 == a2:
            return {a1: 1}
        return {a1: 0, a2: 0}


# ---------------------------------------------------------------------------
# oracle path


@lru_cache(maxsize=256)
def _phase_rows(p: int, m: int, sigma: int) -> np.ndarray:
    """``psi_sigma(p^n g^j)`` for ``n = -m..-1`` (rows) over the level-``m`` unit group."""
    G = unit_group(p, m)
    return np.array(
        [np.exp(2j * np.pi * sigma * (G.units % p**-n) / p**-n) for n in range(-m, 0)]
    )


@lru_cache(maxsize=256)
def assert_deep_shells_vanish(p: int, m: int, sigma: int, depth: int = 3) -> float:
    """Check that ``sum_{u = u0 mod p^m} psi(p^n u)`` vanishes for ``n = -(m+1)..-(m+depth)``.

    Returns the largest absolute value seen; raises if it is not at rounding level.
    """
    worst = 0.0
    for n in range(m + 1, m + depth + 1):
        q = p**n
        u = np.arange(q)
        ph = np.exp(2j * np.pi * sigma * u / q)
        sums = ph.reshape(q // p**m, p**m).sum(axis=0)
        worst = max(worst, float(np.max(np.abs(sums))) / (q // p**m))
    if worst > 1e-9:
        raise AssertionError(f"deep shell sums do not vanish ({worst:.3e})")
    return worst


def _circ(a: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``(1/N) sum_j a[j] F[w - j]`` on the cyclic unit group, summed directly."""
    N = len(F)
    out = np.zeros(N, dtype=complex)
    for j in np.nonzero(a)[0]:
        out += a[j] * np.roll(F, j)
    return out / N


class ShellFunction:
    """A ``d^x``-density known shell by shell at level ``m``, with support bounds.

    ``lo``/``hi`` bound the shells where it can be nonzero (``None`` when unbounded).
    When ``lo`` is ``None`` the function is a combination of ``|x|^a (log|x|)^e``
    on the shells below ``lo_hint``; ``tails`` maps each exponent ``a`` to the
    number of log powers present (``e + 1``).
    """

    def __init__(self, p: int, m: int, row: Callable[[int], np.ndarray], lo, hi, tails=None, lo_hint=0):
        self.p, self.m = p, m
        self._row = row
        self.lo, self.hi = lo, hi
        self.tails: Dict[Fraction, int] = dict(tails or {})
        self.lo_hint = lo_hint
        self._cache: Dict[int, np.ndarray] = {}

    @property
    def tail_a(self):
        return max(self.tails) if self.tails else None

    def __call__(self, n: int) -> np.ndarray:
        if (self.lo is not None and n < self.lo) or (self.hi is not None and n > self.hi):
            return np.zeros(unit_group(self.p, self.m).N, dtype=complex)
        if n not in self._cache:
            self._cache[n] = self._row(n)
        return self._cache[n]


def shell_function(f: AsymptoticMeasure, m: int) -> ShellFunction:
    """View a measure in a coordinate centred at 0 as a :class:`ShellFunction`."""
    p = f.p
    step, germs = _split_origin(f)
    for g in germs:
        if g.anchor == "0" and g.at != 0:
            raise ValueError("only germs at 0 and infinity can be convolved multiplicatively")
    sh = _as_shell(step, m, p)
    G = unit_group(p, m)
    char_rows = {}
    for g in germs:
        if g.eta.eta.c > m:
            raise ValueError("germ conductor exceeds the level")
        if g.eta not in char_rows:
            eta = g.eta.eta
            char_rows[g.eta] = np.exp(2j * np.pi * eta.index_at(m) * np.arange(G.N) / G.N) if eta.c else np.ones(G.N)
    tails = [(g.tail(), char_rows[g.eta]) for g in germs]

    def row(n: int) -> np.ndarray:
        out = np.array(sh.shells[n], dtype=complex) if n in sh.shells else np.zeros(G.N, dtype=complex)
        for tl, ch in tails:
            if tl.covers(n):
                out = out + complex(tl.coeff(n, p)) * ch
        return out

    occupied = [n for n, v in sh.shells.items() if np.any(v)]
    lo = min(occupied) if occupied else None
    hi = max(occupied) if occupied else None
    inf_a = [g.a for g in germs if g.anchor == "inf"]
    zero_g = [g for g in germs if g.anchor == "0"]
    if zero_g:
        hi = None
    elif inf_a:
        hi = max(occupied + [-g.K for g in germs])
    if inf_a:
        lo = None
    elif lo is None and zero_g:
        lo = min(g.K for g in zero_g)
    if lo is None and hi is None and not inf_a and not zero_g:
        lo, hi = 0, -1
    starts = occupied + [-g.K for g in germs if g.anchor == "inf"]
    tail_powers: Dict[Fraction, int] = {}
    for g in germs:
        if g.anchor == "inf":
            tail_powers[g.a] = max(tail_powers.get(g.a, 0), g.e + 1)
    return ShellFunction(p, m, row, lo, hi, tail_powers, min(starts) if starts else 0)


def _truncation(p: int, delta: float, tol: float = 1e-15) -> int:
    """Terms needed so that ``n**2 p^{-n delta}`` drops below ``tol``."""
    if delta <= 0:
        raise NonconvergentTail("the convolution sum does not converge absolutely")
    E = 1
    while E * E * float(p) ** (-delta * E) > tol:
        E += 1
    return E + 2


def _convolve_shell(F: ShellFunction, s: Fraction, sigma: int, k: int) -> np.ndarray:
    p, m = F.p, F.m
    phases = _phase_rows(p, m, sigma)
    n_lo = -m if F.hi is None else max(-m, k - F.hi)
    if F.lo is not None:
        n_hi = k - F.lo
    else:
        delta = float(s) + 1 - float(F.tail_a)
        n_hi = max(k - F.lo_hint, n_lo) + _truncation(p, delta)
    N = unit_group(p, m).N
    out = np.zeros(N, dtype=complex)
    for n in range(n_lo, n_hi + 1):
        row = F(k - n)
        if not np.any(row):
            continue
        c = (1 - 1 / p) * float(p) ** (-n * float(s + 1))
        if n >= 0:
            out += c * row.mean()
        else:
            out += c * _circ(phases[n + m], row)
    return out


def convolve_oracle(F: ShellFunction, s, sigma: int = 1) -> ShellFunction:
    """Lazy shell-by-shell convolution of ``F`` with ``|x|^s psi_sigma(x) dx``."""
    s = Fraction(s)
    assert_deep_shells_vanish(F.p, F.m, sigma)
    if F.tail_a is not None and F.tail_a >= s + 1:
        raise NonconvergentTail("tail at infinity outside the convergence strip")
    # the kernel's zero at t = p^{-s} removes one log power of the tail |x|^s
    tails = dict(F.tails)
    if s in tails:
        tails[s] -= 1
        if not tails[s]:
            del tails[s]
    lo = F.lo - F.m if F.lo is not None else (None if tails else F.lo_hint - F.m)
    return ShellFunction(
        F.p,
        F.m,
        lambda k: _convolve_shell(F, s, sigma, k),
        lo,
        None,
        tails,
        F.lo_hint - F.m,
    )


def _window_measure(F: ShellFunction, window, coordinate="x", singular_points=(), scale_power=Fraction(0)):
    shells = {}
    for n in range(window[0], window[1] + 1):
        row = F(n) * float(F.p) ** (-float(scale_power) * n)
        if np.any(row):
            shells[n] = row
    return AsymptoticMeasure(F.p, ShellMeasure(F.p, F.m, shells), [], coordinate, singular_points)


# ---------------------------------------------------------------------------


def kernel_convolve(
    f: AsymptoticMeasure,
    s,
    sigma: int = 1,
    mode: str = "symbol",
    m: Optional[int] = None,
    window: Tuple[int, int] = (-4, 4),
) -> AsymptoticMeasure:
    """Convolve ``f`` (a measure on the multiplicative group) with ``|x|^s psi_sigma(x) dx``.

    Symbol mode returns the full measure.  Oracle mode returns the shells in
    ``window`` only, since its output is known pointwise.
    """
    s = Fraction(s)
    if m is None:
        m = measure_level(f)
    if mode == "symbol":
        S = mellin(f, m)
        out = KernelSymbol(f.p, m, s, sigma).apply(S)
        return inverse_mellin(out, coordinate=f.coordinate, singular_points=f.singular_points)
    if mode == "oracle":
        F = shell_function(f, m)
        return _window_measure(convolve_oracle(F, s, sigma), window, f.coordinate, f.singular_points)
    raise ValueError("mode must be 'oracle' or 'symbol'")


def _check_coordinate(f: AsymptoticMeasure, params: TransferParams):
    want = INPUT_COORDINATE[params.root_type]
    if f.coordinate not in (want, "x"):
        raise CoordinateMismatch(f"type {params.root_type} expects coordinate {want}, got {f.coordinate}")
    if params.p is not None and params.p != f.p:
        raise ParamsInconsistent("prime of the parameters differs from the input's")


def transfer(
    f: AsymptoticMeasure,
    params: TransferParams,
    mode: str = "symbol",
    m: Optional[int] = None,
    window: Tuple[int, int] = (-4, 4),
    kernel_order: Tuple[int, ...] = None,
) -> AsymptoticMeasure:
    """Apply the transfer operator; output lives on the line ``c``.

    ``kernel_order`` permutes the two type-T kernels. They commute on inputs
    whose tails keep every intermediate convergent; the default order applies
    the kernel with the larger exponent first, which always does.
    """
    _check_coordinate(f, params)
    if m is None:
        m = measure_level(f)
    exps = params.kernel_exponents()
    order = kernel_order or tuple(reversed(range(len(exps))))
    sig = params.psi_sign
    sing = SINGULAR_POINTS[params.root_type]
    b = params.outer_power
    if mode == "symbol":
        S = mellin(f, m)
        for i in order:
            S = KernelSymbol(f.p, m, exps[i], sig).apply(S)
        S = S.scale_variable(b)
        return inverse_mellin(S, coordinate="c", singular_points=sing)
    if mode == "oracle":
        F = shell_function(f, m)
        for i in order:
            F = convolve_oracle(F, exps[i], sig)
        return _window_measure(F, window, "c", sing, b)
    raise ValueError("mode must be 'oracle' or 'symbol'")


def shell_row(f: AsymptoticMeasure, n: int, m: int) -> np.ndarray:
    """``d^x``-density of ``f`` on the shell ``v = n`` indexed by discrete log at level ``m``."""
    return shell_function(f, m)(n)


def enlarged_space_check(f: AsymptoticMeasure, params: TransferParams) -> Tuple[bool, str]:
    """Whether ``f`` is a step measure plus tails at infinity of the allowed shapes."""
    allowed = params.allowed_tails()
    for g in f.germs:
        if g.anchor != "inf":
            return False, f"singular term at {g.at} is not a tail at infinity"
        if g.eta.eta.c != 0 or g.eta.r != 0:
            return False, f"tail character {g.eta.name} is not trivial"
        if g.a not in allowed:
            return False, f"tail exponent {g.a} not in {sorted(allowed)}"
        if g.e > allowed[g.a]:
            return False, f"log power {g.e} not allowed for exponent {g.a}"
    return True, "ok"
