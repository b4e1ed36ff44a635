"""Measures on Q_p: ball step functions, shell tables and singular germ tails.

Multiplicative Haar measure is normalized by ``d^x x = (1-1/p)^{-1} dx/|x|``
so that ``Z_p^x`` has volume 1.  Germ terms are always written against
``d^x`` of the local coordinate ``x - at``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    AnchorCollision,
    CoordinateMismatch,
    DivergentIntegral,
    KindMismatch,
)
from .jsonio import pair
from .padic import (
    INF,
    MultiplicativeCharacter,
    PAdicScalar,
    QUADRATIC_NAMES,
    UnitCharacter,
    check_prime,
    quadratic_by_name,
    quadratic_characters,
    unit_group,
    val_rational,
)
from .rational import PoleLabel, Tail

Number = Union[int, Fraction, complex, float]


def _frac(x) -> Fraction:
    if isinstance(x, PAdicScalar):
        return x.to_fraction()
    return Fraction(x)


def residue_mod(x: Fraction, p: int, k: int) -> Fraction:
    """Representative of ``x`` modulo ``p**k Z_p`` in ``[0, p**k)`` (digits below k)."""
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    v = val_rational(x, p)
    if v >= k:
        return Fraction(0)
    j = max(0, -v)
    # x = A / (B p^j) with B prime to p
    num = x * Fraction(p) ** j
    B = num.denominator
    A = num.numerator
    q = p ** (k + j)
    return Fraction(A * pow(B, -1, q) % q, p**j)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Ball:
    """The set ``center + p**k Z_p`` with a canonical center."""

    p: int
    center: Fraction
    k: int

    def __post_init__(self):
        object.__setattr__(self, "center", residue_mod(Fraction(self.center), self.p, self.k))

    @property
    def volume(self) -> Fraction:
        """Additive Haar volume."""
        return Fraction(1, self.p**self.k) if self.k >= 0 else Fraction(self.p ** (-self.k))

    @property
    def contains_zero(self) -> bool:
        return self.center == 0

    def valuation(self) -> int:
        """Common valuation of the ball's points (requires ``0`` outside the ball)."""
        return val_rational(self.center, self.p)

    def mult_volume(self) -> Fraction:
        """Volume for ``d^x x``; the ball must avoid 0."""
        v = self.valuation()
        return self.volume * Fraction(self.p) ** v / (1 - Fraction(1, self.p))

    def contains(self, x) -> bool:
        d = _frac(x) - self.center
        return d == 0 or val_rational(d, self.p) >= self.k

    def contains_ball(self, other: "Ball") -> bool:
        return other.k >= self.k and self.contains(other.center)

    def children(self) -> List["Ball"]:
        step = Fraction(self.p) ** self.k
        return [Ball(self.p, self.center + i * step, self.k + 1) for i in range(self.p)]

    def parent(self) -> "Ball":
        return Ball(self.p, self.center, self.k - 1)

    def translate(self, c) -> "Ball":
        return Ball(self.p, self.center + Fraction(c), self.k)


KINDS = ("dx", "dmulx")


@dataclass(frozen=True)
class SteppedMeasure:
    """Finite combination of ball indicators against ``dx`` or ``d^x x``."""

    p: int
    kind: str = "dx"
    pieces: Tuple[Tuple[Ball, Number], ...] = ()

    def __post_init__(self):
        check_prime(self.p)
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind == "dmulx":
            for b, _ in self.pieces:
                if b.contains_zero:
                    raise ValueError("multiplicative pieces must avoid 0")

    @classmethod
    def from_list(cls, p: int, kind: str, items: Sequence[Tuple[object, int, Number]]):
        return cls(p, kind, tuple((Ball(p, Fraction(c), k), d) for c, k, d in items))

    def is_empty(self) -> bool:
        return not self.pieces

    def piece_mass(self, ball: Ball, dens) -> Number:
        return dens * (ball.volume if self.kind == "dx" else ball.mult_volume())

    def total_mass(self) -> Number:
        return sum((self.piece_mass(b, d) for b, d in self.pieces), 0)

    def density_at(self, x) -> Number:
        """Density at a point (against this measure's own kind)."""
        return sum((d for b, d in self.pieces if b.contains(x)), 0)

    def integrate(self, region=None) -> Number:
        """Mass over a ball, the complement of a ball (``("not", ball)``) or everything."""
        if region is None:
            return self.total_mass()
        if isinstance(region, tuple) and region[0] == "not":
            return self.total_mass() - self.integrate(region[1])
        tot = 0
        for b, d in self.pieces:
            if region.contains_ball(b):
                tot += self.piece_mass(b, d)
            elif b.contains_ball(region):
                tot += self.piece_mass(region, d)
        return tot

    def scaled(self, c) -> "SteppedMeasure":
        return SteppedMeasure(self.p, self.kind, tuple((b, d * c) for b, d in self.pieces))

    def translate(self, c) -> "SteppedMeasure":
        if self.kind == "dmulx" and c != 0:
            return self.to_dx().translate(c)
        return SteppedMeasure(self.p, self.kind, tuple((b.translate(c), d) for b, d in self.pieces))

    def to_dx(self) -> "SteppedMeasure":
        if self.kind == "dx":
            return self
        p = self.p
        out = []
        for b, d in self.pieces:
            out.append((b, d * Fraction(p) ** b.valuation() / (1 - Fraction(1, p))))
        return SteppedMeasure(p, "dx", tuple(out))

    def canonicalize(self) -> "SteppedMeasure":
        return canonicalize_pieces(self)

    def to_json_list(self) -> list:
        return [
            {"center": str(b.center), "k": b.k, "density": _cjson(d), "kind": self.kind}
            for b, d in self.pieces
        ]


def canonicalize_pieces(f: SteppedMeasure) -> SteppedMeasure:
    """Disjoint balls, zero densities dropped, full sibling sets with equal density merged."""
    p = f.p
    acc: Dict[Ball, Number] = {}
    for b, d in f.pieces:
        acc[b] = acc.get(b, 0) + d
    # refine nesting: split every ball that strictly contains another one
    if acc:
        kmin = min(b.k for b in acc)
        ancestors = set()
        for b in acc:
            for k in range(b.k - 1, kmin - 1, -1):
                anc = Ball(p, b.center, k)
                if anc in ancestors:
                    break
                ancestors.add(anc)
        todo = [b for b in acc if b in ancestors]
        while todo:
            big = todo.pop()
            if big not in acc:
                continue
            d = acc.pop(big)
            for ch in big.children():
                acc[ch] = acc.get(ch, 0) + d
                if ch in ancestors:
                    todo.append(ch)
    acc = {b: d for b, d in acc.items() if d != 0}
    # merge complete sibling sets with identical densities
    changed = True
    while changed:
        changed = False
        groups: Dict[Ball, List[Ball]] = {}
        for b in acc:
            groups.setdefault(b.parent(), []).append(b)
        for par, kids in groups.items():
            if len(kids) == p:
                vals = {acc[k] for k in kids}
                if len(vals) == 1:
                    if f.kind == "dmulx" and par.contains_zero:
                        continue
                    d = vals.pop()
                    for k in kids:
                        del acc[k]
                    acc[par] = d
                    changed = True
    pieces = tuple(sorted(acc.items(), key=lambda kv: (kv[0].k, kv[0].center)))
    return SteppedMeasure(p, f.kind, pieces)


def additive_convolve(f: SteppedMeasure, g: SteppedMeasure) -> SteppedMeasure:
    """Exact additive convolution of two compactly supported ``dx`` measures."""
    if f.kind != "dx" or g.kind != "dx":
        raise KindMismatch("additive convolution needs additive-Haar measures")
    if f.p != g.p:
        raise CoordinateMismatch("prime mismatch")
    out = []
    for b1, d1 in f.pieces:
        for b2, d2 in g.pieces:
            kmin, kmax = min(b1.k, b2.k), max(b1.k, b2.k)
            vol = Fraction(1, f.p**kmax) if kmax >= 0 else Fraction(f.p ** (-kmax))
            out.append((Ball(f.p, b1.center + b2.center, kmin), d1 * d2 * vol))
    return SteppedMeasure(f.p, "dx", tuple(out)).canonicalize()


# ---------------------------------------------------------------------------


@dataclass
class ShellMeasure:
    """Density against ``d^x x`` on shells ``v(x) = n``, constant on ``1 + p^m Z_p`` cosets.

    ``shells[n][j]`` is the value at ``p**n * g**j``.
    """

    p: int
    m: int
    shells: Dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        G = unit_group(self.p, self.m)
        self.shells = {
            int(n): np.asarray(v, dtype=complex).reshape(G.N) for n, v in self.shells.items()
        }

    @property
    def group(self):
        return unit_group(self.p, self.m)

    def support(self) -> Tuple[int, int]:
        ns = [n for n, v in self.shells.items() if np.any(v)]
        return (min(ns), max(ns)) if ns else (0, -1)

    def value_at(self, x) -> complex:
        x = x if isinstance(x, PAdicScalar) else PAdicScalar.from_rational(x, self.p, self.m)
        if x.is_zero:
            return 0j
        row = self.shells.get(x.v)
        if row is None:
            return 0j
        j = self.group.dlog[x.u % self.p**self.m]
        return complex(row[j])

    def shell_mass(self, n: int) -> complex:
        row = self.shells.get(n)
        return complex(np.mean(row)) if row is not None else 0j

    def total_mass(self) -> complex:
        return sum((self.shell_mass(n) for n in self.shells), 0j)

    def to_stepped(self) -> SteppedMeasure:
        G = self.group
        pieces = []
        for n, row in sorted(self.shells.items()):
            base = Fraction(self.p) ** n
            for j in np.nonzero(row)[0]:
                pieces.append((Ball(self.p, base * int(G.units[j]), n + self.m), complex(row[j])))
        return SteppedMeasure(self.p, "dmulx", tuple(pieces))

    def integrate(self, region=None) -> complex:
        if region is None:
            return self.total_mass()
        return complex(self.to_stepped().integrate(region))

    def scaled(self, c) -> "ShellMeasure":
        return ShellMeasure(self.p, self.m, {n: v * c for n, v in self.shells.items()})

    def lift(self, m2: int) -> "ShellMeasure":
        """Same measure viewed at a finer level ``m2 >= m``."""
        if m2 < self.m:
            raise ValueError("can only lift to a finer level")
        reps = unit_group(self.p, m2).N // self.group.N
        return ShellMeasure(self.p, m2, {n: np.tile(v, reps) for n, v in self.shells.items()})

    def __add__(self, other: "ShellMeasure") -> "ShellMeasure":
        m = max(self.m, other.m)
        a, b = self.lift(m), other.lift(m)
        out = dict(a.shells)
        for n, v in b.shells.items():
            out[n] = out[n] + v if n in out else v.copy()
        return ShellMeasure(self.p, m, out)

    @classmethod
    def from_stepped(cls, f: SteppedMeasure, m: int) -> "ShellMeasure":
        """Convert balls avoiding 0 to a level-``m`` shell table."""
        p = f.p
        G = unit_group(p, m)
        shells: Dict[int, np.ndarray] = {}
        for b, d in f.pieces:
            if b.contains_zero:
                raise ValueError("ball contains 0; not representable on shells")
            n = b.valuation()
            depth = b.k - n
            if depth > m:
                from .errors import LevelExceedsBound

                raise LevelExceedsBound(f"ball of depth {depth} exceeds level {m}")
            unit = b.center / Fraction(p) ** n
            u0 = unit.numerator * pow(unit.denominator, -1, p**depth) % p**depth
            mask = (G.units % p**depth) == u0
            dens = complex(d)
            if f.kind == "dx":
                dens *= (1 - 1 / p) * float(p) ** (-n)
            row = shells.setdefault(n, np.zeros(G.N, dtype=complex))
            row[mask] += dens
        return cls(p, m, shells)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GermTerm:
    """``coeff * |y|^a * eta(y) * (log_p|y|)^e d^x y`` with ``y = x - at`` (or ``y = x`` at infinity).

    Supported on ``v(y) >= K`` for anchor ``"0"`` and on ``v(y) <= -K`` for
    anchor ``"inf"``.
    """

    anchor: str
    a: Fraction
    eta: MultiplicativeCharacter
    e: int
    coeff: complex
    K: int
    at: Fraction = Fraction(0)

    def __post_init__(self):
        if self.anchor not in ("0", "inf"):
            raise ValueError("anchor must be '0' or 'inf'")
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "at", Fraction(self.at) if self.anchor == "0" else Fraction(0))
        object.__setattr__(self, "coeff", complex(self.coeff))
        if self.e < 0:
            raise ValueError("log power must be >= 0")

    @property
    def p(self) -> int:
        return self.eta.p

    @property
    def label(self) -> PoleLabel:
        return PoleLabel(self.a, self.eta.r)

    def shell_coefficients(self) -> np.ndarray:
        """``P`` with shell factor ``P(n) lam**n`` (unit factor ``eta(u)`` aside)."""
        P = np.zeros(self.e + 1, dtype=complex)
        P[self.e] = self.coeff * (-1) ** self.e
        return P

    def tail(self) -> Tail:
        return Tail(self.anchor, self.label, self.K, self.shell_coefficients())

    def covers(self, n: int) -> bool:
        return n >= self.K if self.anchor == "0" else n <= -self.K

    def value(self, y) -> complex:
        """Density against ``d^x y`` at a nonzero local coordinate ``y``."""
        y = y if isinstance(y, PAdicScalar) else PAdicScalar.from_rational(y, self.p, max(self.eta.eta.c, 1))
        if y.is_zero or not self.covers(y.v):
            return 0j
        n = y.v
        return complex(self.tail().coeff(n, self.p)) * self.eta.eta(y.u)

    def shell_pieces(self, n: int, kind: str = "dmulx") -> List[Tuple[Ball, complex]]:
        """The germ restricted to shell ``n`` as ball pieces in the ambient coordinate."""
        p = self.p
        c = max(self.eta.eta.c, 1)
        G = unit_group(p, c)
        base = complex(self.tail().coeff(n, p))
        out = []
        for u in G.units:
            val = base * self.eta.eta(int(u))
            if kind == "dx":
                val /= (1 - 1 / p) * float(p) ** (-n)
            out.append((Ball(p, self.at + Fraction(p) ** n * int(u), n + c), val))
        return out

    def _shell_sum(self, lo, hi) -> complex:
        """Sum of shell masses over ``lo <= n <= hi`` (``None`` = unbounded)."""
        if self.eta.eta.c > 0:
            return 0j
        p = self.p
        lab = self.label
        P = self.shell_coefficients()
        if self.anchor == "0":
            lo = self.K if lo is None else max(lo, self.K)
        else:
            hi = -self.K if hi is None else min(hi, -self.K)
        if lo is not None and hi is not None:
            if hi < lo:
                return 0j
            ns = np.arange(lo, hi + 1)
            return complex(np.sum(Tail("0", lab, lo, P).coeff(ns, p)))
        mag = float(p) ** (-float(self.a))
        if lo is not None:  # n -> +infinity
            if mag >= 1:
                raise DivergentIntegral("germ at 0 with Re(a) <= 0 is not integrable")
            return complex(Tail("0", lab, lo, P).to_rational(p)(1.0))
        if mag <= 1:
            raise DivergentIntegral("germ at infinity with Re(a) >= 0 is not integrable")
        return complex(Tail("inf", lab, -hi, P).to_rational(p)(1.0))

    def integrate(self, region=None) -> complex:
        p = self.p
        if region is None:
            return self._shell_sum(None, None)
        if isinstance(region, tuple) and region[0] == "not":
            return self.integrate(None) - self.integrate(region[1])
        ball = region.translate(-self.at)
        if ball.contains_zero:
            return self._shell_sum(ball.k, None)
        n0 = ball.valuation()
        if not self.covers(n0):
            return 0j
        depth = ball.k - n0
        c = self.eta.eta.c
        if c > depth:
            return 0j
        unit = ball.center / Fraction(p) ** n0
        uu = unit.numerator * pow(unit.denominator, -1, p ** max(c, 1)) % p ** max(c, 1)
        val = complex(self.tail().coeff(n0, p)) * self.eta.eta(uu)
        return val * float(ball.mult_volume())

    def to_json(self) -> dict:
        if self.anchor == "inf":
            anc = "inf"
        elif self.at == 0:
            anc = "0"
        else:
            anc = str(self.at)
        return {
            "anchor": anc,
            "a": str(self.a),
            "eta": eta_name(self.eta),
            "e": self.e,
            "coeff": _cjson(self.coeff),
            "K": self.K,
        }

    @classmethod
    def from_json(cls, d: dict, p: int) -> "GermTerm":
        anc = d["anchor"]
        at = Fraction(0)
        if anc not in ("0", "inf"):
            at, anc = Fraction(anc), "0"
        return cls(anc, Fraction(d["a"]), eta_from_name(p, d["eta"]), int(d["e"]), _cparse(d["coeff"]), int(d["K"]), at)


def eta_name(eta: MultiplicativeCharacter) -> str:
    return eta.name


def eta_from_name(p: int, name: str) -> MultiplicativeCharacter:
    if name in QUADRATIC_NAMES:
        return quadratic_by_name(p, name)
    # generic tag c{c}k{k}r{r}
    body = name[1:]
    c, rest = body.split("k", 1)
    k, r = rest.split("r", 1)
    return MultiplicativeCharacter(UnitCharacter(p, int(c), int(k)), Fraction(r))


def _cjson(z) -> list:
    return pair(z)


def _cparse(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


# ---------------------------------------------------------------------------

COORDINATES = ("xi", "zeta", "c", "x")


@dataclass
class AsymptoticMeasure:
    """Step part plus germ tails on one coordinate line."""

    p: int
    step: Union[SteppedMeasure, ShellMeasure, None] = None
    germs: List[GermTerm] = field(default_factory=list)
    coordinate: str = "x"
    singular_points: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        check_prime(self.p)
        if self.step is None:
            self.step = SteppedMeasure(self.p, "dx")
        if self.coordinate not in COORDINATES:
            raise ValueError(f"coordinate must be one of {COORDINATES}")
        self.singular_points = tuple(Fraction(s) for s in self.singular_points)
        self.germs = list(self.germs)

    @classmethod
    def zero(cls, p: int, coordinate: str = "x", singular_points=()) -> "AsymptoticMeasure":
        return cls(p, None, [], coordinate, singular_points)

    # evaluation --------------------------------------------------------
    def density(self, x, against: str = "dx") -> complex:
        """Density at ``x`` against ``dx`` (default) or ``d^x x``."""
        p = self.p
        xf = _frac(x)
        if isinstance(self.step, ShellMeasure):
            m = self.step.m
            val = self.step.value_at(xf if not isinstance(x, PAdicScalar) else x)
            dens_mult = val
            dens_dx = val / ((1 - 1 / p) * _absf(xf, p)) if xf != 0 else 0j
        else:
            d = complex(self.step.density_at(xf))
            if self.step.kind == "dx":
                dens_dx = d
                dens_mult = d * (1 - 1 / p) * _absf(xf, p) if xf != 0 else 0j
            else:
                dens_mult = d
                dens_dx = d / ((1 - 1 / p) * _absf(xf, p)) if xf != 0 else 0j
        for g in self.germs:
            y = xf - g.at
            if y == 0:
                continue
            gv = g.value(PAdicScalar.from_rational(y, p, max(g.eta.eta.c, 1)))
            if gv == 0:
                continue
            if against == "dx":
                dens_dx += gv / ((1 - 1 / p) * _absf(y, p))
            else:
                dens_mult += gv * _absf(xf, p) / _absf(y, p)
        return dens_dx if against == "dx" else dens_mult

    def integrate(self, region=None) -> complex:
        return complex(self.step.integrate(region)) + sum(
            (g.integrate(region) for g in self.germs), 0j
        )

    # algebra -----------------------------------------------------------
    def _check(self, other: "AsymptoticMeasure"):
        if self.p != other.p or self.coordinate != other.coordinate:
            raise CoordinateMismatch(
                f"cannot combine {self.coordinate}@{self.p} with {other.coordinate}@{other.p}"
            )

    def scaled(self, c) -> "AsymptoticMeasure":
        if c == 0:
            return AsymptoticMeasure.zero(self.p, self.coordinate, self.singular_points)
        return AsymptoticMeasure(
            self.p,
            self.step.scaled(c),
            [replace(g, coeff=g.coeff * c) for g in self.germs],
            self.coordinate,
            self.singular_points,
        ).canonicalize()

    def __add__(self, other: "AsymptoticMeasure") -> "AsymptoticMeasure":
        self._check(other)
        if isinstance(self.step, ShellMeasure) and isinstance(other.step, ShellMeasure):
            step = self.step + other.step
        else:
            a, b = _as_stepped(self.step), _as_stepped(other.step)
            if a.kind != b.kind:
                a, b = a.to_dx(), b.to_dx()
            step = SteppedMeasure(self.p, a.kind, a.pieces + b.pieces)
        sp = tuple(sorted(set(self.singular_points) | set(other.singular_points)))
        return AsymptoticMeasure(self.p, step, self.germs + other.germs, self.coordinate, sp).canonicalize()

    def canonicalize(self) -> "AsymptoticMeasure":
        """Unique form: step balls avoid germ anchors, equal germs merged,
        germ cutoffs advanced past the step support."""
        p = self.p
        germs = [g for g in self.germs if g.coeff != 0]
        step = self.step
        if isinstance(step, ShellMeasure):
            step = ShellMeasure(p, step.m, {n: v for n, v in step.shells.items() if np.any(v)})
            if any(g.at != 0 for g in germs):
                step = step.to_stepped()
        if isinstance(step, SteppedMeasure):
            step, extra = _absorb_anchor_balls(step.canonicalize(), germs)
            germs = germs + extra
        germs, step = _merge_germs(germs, step)
        for _ in range(2):
            new_germs = []
            for g in germs:
                shells = _occupied_shells(step, g)
                if shells:
                    target = (max(shells) + 1) if g.anchor == "0" else (-min(shells) + 1)
                    if target > g.K:
                        step, g = _fold(step, g, target)
                new_germs.append(g)
            germs, step = _merge_germs(new_germs, step)
        if isinstance(step, SteppedMeasure):
            step = step.canonicalize()
        germs.sort(key=lambda g: (g.anchor, g.at, g.a, g.e, eta_name(g.eta), g.K))
        return AsymptoticMeasure(p, step, germs, self.coordinate, self.singular_points)

    def coordinate_shift(self, c0) -> "AsymptoticMeasure":
        """Translate by ``c0``: the measure of ``E`` becomes the old measure of ``E - c0``."""
        c0 = Fraction(c0)
        if c0 == 0:
            return self
        p = self.p
        step = _as_stepped(self.step).translate(c0)
        germs = []
        for g in self.germs:
            if g.anchor == "0":
                germs.append(replace(g, at=g.at + c0))
            else:
                # |x - c0| = |x| once |x| > |c0|; fold the shells where that fails
                need = 1 - val_rational(c0, p)
                if g.K < need:
                    extra = []
                    for n in range(-need + 1, -g.K + 1):
                        extra.extend(g.shell_pieces(n, step.kind))
                    step = SteppedMeasure(p, step.kind, step.pieces + tuple(
                        (b.translate(c0), d) for b, d in extra))
                    g = replace(g, K=need)
                germs.append(g)
        anchors = [g.at for g in germs if g.anchor == "0"]
        orig = [g.at for g in self.germs if g.anchor == "0"]
        if len(set(anchors)) != len(set(orig)):
            raise AnchorCollision("two germ anchors coincide after the shift")
        sp = tuple(s + c0 for s in self.singular_points)
        return AsymptoticMeasure(p, step, germs, self.coordinate, sp).canonicalize()

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "p": self.p,
            "coordinate": self.coordinate,
            "singular_points": [str(s) for s in self.singular_points],
        }
        if isinstance(self.step, ShellMeasure):
            out["step"] = []
            out["shell_table"] = {
                "m": self.step.m,
                "shells": {
                    str(n): [_cjson(z) for z in v] for n, v in sorted(self.step.shells.items())
                },
            }
        else:
            out["step"] = self.step.to_json_list()
        out["germs"] = [g.to_json() for g in self.germs]
        return out

    @classmethod
    def from_json(cls, d: dict) -> "AsymptoticMeasure":
        p = int(d["p"])
        if "shell_table" in d:
            st = d["shell_table"]
            step = ShellMeasure(
                p,
                int(st["m"]),
                {int(n): np.array([_cparse(z) for z in v]) for n, v in st["shells"].items()},
            )
        else:
            items = d.get("step", [])
            kinds = {it.get("kind", "dx") for it in items} or {"dx"}
            if len(kinds) > 1:
                raise KindMismatch("mixed step kinds in one measure")
            kind = kinds.pop()
            step = SteppedMeasure(
                p,
                kind,
                tuple((Ball(p, Fraction(it["center"]), int(it["k"])), _num(_cparse(it["density"]))) for it in items),
            )
        germs = [GermTerm.from_json(g, p) for g in d.get("germs", [])]
        return cls(p, step, germs, d.get("coordinate", "x"), tuple(Fraction(s) for s in d.get("singular_points", [])))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _num(z: complex):
    """Keep exactly representable real densities as Fractions."""
    if z.imag == 0 and float(z.real).is_integer():
        return Fraction(int(z.real))
    return z


def _absf(x: Fraction, p: int) -> float:
    v = val_rational(x, p)
    return float(p) ** (-v)


def _as_stepped(step) -> SteppedMeasure:
    return step.to_stepped() if isinstance(step, ShellMeasure) else step


def _occupied_shells(step, g: GermTerm) -> List[int]:
    """Shells of the local coordinate of ``g`` met by the step part within the germ's range."""
    if isinstance(step, ShellMeasure):
        return [n for n, v in step.shells.items() if np.any(v) and g.covers(n)]
    out = []
    for b, d in step.pieces:
        if d == 0:
            continue
        bb = b.translate(-g.at)
        if bb.contains_zero:
            # only possible for germs at infinity once anchors are absorbed
            if g.anchor == "inf" and g.covers(bb.k):
                out.append(bb.k)
            continue
        n = bb.valuation()
        if g.covers(n):
            out.append(n)
    return out


def _fold(step, g: GermTerm, newK: int):
    """Move the germ's shells between its cutoff and ``newK`` into the step part."""
    if newK <= g.K:
        return step, g
    p = g.p
    rng = range(g.K, newK) if g.anchor == "0" else range(-newK + 1, -g.K + 1)
    if isinstance(step, ShellMeasure) and g.at == 0 and g.eta.eta.c <= step.m:
        G = step.group
        c = g.eta.eta.c
        unit_vals = np.array([g.eta.eta(int(u)) for u in G.units]) if c else np.ones(G.N)
        shells = dict(step.shells)
        for n in rng:
            row = complex(g.tail().coeff(n, p)) * unit_vals
            shells[n] = shells[n] + row if n in shells else row
        return ShellMeasure(p, step.m, shells), replace(g, K=newK)
    step = _as_stepped(step)
    if g.at != 0 and step.kind != "dx":
        step = step.to_dx()
    extra = []
    for n in rng:
        extra.extend(g.shell_pieces(n, step.kind))
    return SteppedMeasure(p, step.kind, step.pieces + tuple(extra)).canonicalize(), replace(g, K=newK)


def _absorb_anchor_balls(step: SteppedMeasure, germs: List[GermTerm]):
    """Turn step balls containing a germ anchor into ``|y|^1`` germs."""
    anchors = sorted({g.at for g in germs if g.anchor == "0"})
    if not anchors:
        return step, []
    p = step.p
    if step.kind != "dx" and any(b.contains(P) for b, _ in step.pieces for P in anchors):
        step = step.to_dx()
    pieces = list(step.pieces)
    out, extra = [], []
    triv = quadratic_characters(p)[0]
    while pieces:
        b, d = pieces.pop()
        hits = [P for P in anchors if b.contains(P)]
        if not hits:
            out.append((b, d))
        elif len(hits) > 1:
            pieces.extend((ch, d) for ch in b.children())
        else:
            extra.append(GermTerm("0", Fraction(1), triv, 0, complex(d) * (1 - 1 / p), b.k, hits[0]))
    return SteppedMeasure(p, step.kind, tuple(out)), extra


def _merge_germs(germs: List[GermTerm], step):
    """Combine germs of the same shape, aligning their cutoffs by folding."""
    groups: Dict[tuple, List[GermTerm]] = {}
    for g in germs:
        groups.setdefault((g.anchor, g.at, g.a, g.eta, g.e), []).append(g)
    out = []
    for gs in groups.values():
        K = max(g.K for g in gs)
        total = 0j
        for g in gs:
            step, g2 = _fold(step, g, K)
            total += g2.coeff
        if total != 0:
            out.append(replace(gs[0], coeff=total, K=K))
    return out, step


def integrate(f, region=None):
    """Total mass of ``f`` over a ball, a ball complement ``("not", ball)``, or everything."""
    return f.integrate(region)


def canonicalize(f):
    return f.canonicalize()


def add(f: AsymptoticMeasure, g: AsymptoticMeasure) -> AsymptoticMeasure:
    return f + g


def scale(f: AsymptoticMeasure, c) -> AsymptoticMeasure:
    return f.scaled(c)


def coordinate_shift(f: AsymptoticMeasure, c0) -> AsymptoticMeasure:
    return f.coordinate_shift(c0)
