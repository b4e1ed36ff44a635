"""Pushforwards of lattice measures under split quadratic forms, and their germs.

Everything is computed from exact counts modulo ``p^M``.  The number of
vectors ``v mod p^M`` with ``Q(v) = c`` depends only on the square class of
``c`` (its valuation below ``M`` and the Legendre symbol of its unit part, or
``c = 0``), so a form is summarized by ``2M + 1`` numbers.  Orthogonal sums
become convolutions of these class vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import IllConditionedFit, InstanceTooLarge, NonFactorizableInput, UnboundedSupport
from .measures import AsymptoticMeasure, Ball, GermTerm, SteppedMeasure
from .padic import PAdicScalar, check_prime, legendre, quadratic_characters


@dataclass(frozen=True)
class QuadSpace:
    """``h`` hyperbolic planes ``x_i y_i`` plus, when ``d`` is odd, the line ``z^2``."""

    d: int
    p: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        check_prime(self.p)

    @property
    def planes(self) -> int:
        return self.d // 2

    @property
    def unary(self) -> bool:
        return self.d % 2 == 1

    def evaluate(self, v: Sequence[int]) -> int:
        h = self.planes
        q = sum(v[2 * i] * v[2 * i + 1] for i in range(h))
        if self.unary:
            q += v[-1] ** 2
        return q


# ---------------------------------------------------------------------------
# square classes modulo p^M


def n_classes(M: int) -> int:
    return 2 * M + 1


def class_index(v: int, eps: int, M: int) -> int:
    """Index of ``p^v u`` with ``legendre(u) = eps``; ``v >= M`` means the zero class."""
    if v >= M:
        return 2 * M
    return 2 * v + (0 if eps == 1 else 1)


def class_label(i: int, M: int) -> Tuple[int, int]:
    if i == 2 * M:
        return (M, 0)
    return (i // 2, 1 if i % 2 == 0 else -1)


def classify(x: np.ndarray, p: int, M: int) -> np.ndarray:
    """Class indices of integers modulo ``p^M``."""
    q = p**M
    x = np.asarray(x, dtype=np.int64) % q
    v = np.zeros(x.shape, dtype=np.int64)
    u = x.copy()
    live = u != 0
    for _ in range(M):
        div = live & (u % p == 0)
        if not div.any():
            break
        u = np.where(div, u // p, u)
        v += div
    out = 2 * v + (legendre(u, p) == -1)
    return np.where(x == 0, 2 * M, out)


@lru_cache(maxsize=64)
def class_sizes(p: int, M: int) -> Tuple[int, ...]:
    sizes = []
    for i in range(2 * M):
        v, _ = class_label(i, M)
        sizes.append((p - 1) // 2 * p ** (M - v - 1))
    sizes.append(1)
    return tuple(sizes)


def class_representative(i: int, p: int, M: int) -> int:
    v, eps = class_label(i, M)
    if eps == 0:
        return 0
    if eps == 1:
        return p**v
    nonres = next(u for u in range(2, p) if legendre(u, p) == -1)
    return nonres * p**v


@lru_cache(maxsize=32)
def _sum_table(p: int, M: int) -> np.ndarray:
    """``H[C1, C2, C3] = #{b in C2 : a + b in C3}`` for a fixed ``a`` in ``C1``."""
    q = p**M
    if q > 5_000_000:
        raise InstanceTooLarge(f"p^M = {q} residues is too many for the class table")
    b = np.arange(q, dtype=np.int64)
    cb = classify(b, p, M)
    K = n_classes(M)
    H = np.zeros((K, K, K), dtype=np.int64)
    for i in range(K):
        a = class_representative(i, p, M)
        cs = classify(a + b, p, M)
        H[i] = np.bincount(cb * K + cs, minlength=K * K).reshape(K, K)
    return H


@dataclass(frozen=True)
class ClassCounts:
    """Weighted number of ``v mod p^M`` with ``Q(v) = c`` for one ``c`` in each class.

    ``dim`` is the number of variables; the pushforward of the normalized
    lattice measure gives the ball ``c + p^M Z_p`` mass ``per_element / p^(dim M)``.
    """

    p: int
    M: int
    dim: int
    per_element: Tuple[Fraction, ...]

    def convolve(self, other: "ClassCounts") -> "ClassCounts":
        if (self.p, self.M) != (other.p, other.M):
            raise ValueError("class counts at different precisions")
        p, M = self.p, self.M
        H = _sum_table(p, M)
        sizes = class_sizes(p, M)
        K = n_classes(M)
        out = []
        for c3 in range(K):
            tot = Fraction(0)
            for c1 in range(K):
                if not self.per_element[c1]:
                    continue
                a = self.per_element[c1] * sizes[c1]
                for c2 in range(K):
                    h = int(H[c1, c2, c3])
                    if h and other.per_element[c2]:
                        tot += a * other.per_element[c2] * h
            out.append(tot / sizes[c3])
        return ClassCounts(p, M, self.dim + other.dim, tuple(out))

    def mass(self, i: int) -> Fraction:
        """Mass of the whole class ``i``."""
        return self.per_element[i] * class_sizes(self.p, self.M)[i] / Fraction(self.p) ** (self.dim * self.M)

    def density(self, i: int) -> Fraction:
        """Density against ``dx`` on class ``i`` (for ``i`` below the zero class)."""
        return self.per_element[i] * Fraction(self.p) ** self.M / Fraction(self.p) ** (self.dim * self.M)

    def to_measure(self, germs: Sequence[GermTerm] = ()) -> AsymptoticMeasure:
        """Step measure on shells ``< M``; the ball ``p^M Z_p`` either carries its mass or ``germs``."""
        p, M = self.p, self.M
        pieces = []
        for i in range(2 * M):
            v, eps = class_label(i, M)
            d = self.density(i)
            if d == 0:
                continue
            for u in range(1, p):
                if legendre(u, p) == eps:
                    pieces.append((Ball(p, Fraction(u * p**v), v + 1), d))
        if not germs:
            z = self.mass(2 * M)
            if z:
                pieces.append((Ball(p, Fraction(0), M), z * p**M))
        step = SteppedMeasure(p, "dx", tuple(pieces))
        return AsymptoticMeasure(p, step, list(germs), "x", (Fraction(0),))


def _weight_at_zero(p: int, M: int, w: int) -> Fraction:
    """Average of ``|x|^w`` over ``p^M Z_p`` for the normalized measure."""
    return (1 - Fraction(1, p)) * Fraction(p) ** (-M * w) / (1 - Fraction(p) ** (-1 - w))


@lru_cache(maxsize=64)
def plane_counts(p: int, M: int, w: int = 0) -> ClassCounts:
    """Counts for ``xy`` weighted by ``|x|^w``.

    For ``c = p^v u`` with ``v < M``, the pairs split by ``i = v(x)`` in
    ``0..v``; each ``i`` contributes ``phi(p^(M-i)) p^i = (p-1) p^(M-1)``
    pairs of weight ``p^(-i w)``.
    """
    check_prime(p)
    out = []
    base = (p - 1) * p ** (M - 1)
    for i in range(2 * M):
        v, _ = class_label(i, M)
        out.append(sum(Fraction(base) * Fraction(p) ** (-k * w) for k in range(v + 1)))
    # zero class: total weight minus the rest
    total = Fraction(0)
    for k in range(M):
        total += (p - 1) * p ** (M - k - 1) * Fraction(p) ** (-k * w)
    total += _weight_at_zero(p, M, w)
    total *= p**M
    sizes = class_sizes(p, M)
    rest = sum(out[i] * sizes[i] for i in range(2 * M))
    out.append(total - rest)
    return ClassCounts(p, M, 2, tuple(out))


@lru_cache(maxsize=64)
def unary_counts(p: int, M: int) -> ClassCounts:
    """Counts for ``z^2``: ``2 p^(v/2)`` on even-valuation square classes."""
    check_prime(p)
    out = []
    for i in range(2 * M):
        v, eps = class_label(i, M)
        out.append(Fraction(2 * p ** (v // 2)) if (v % 2 == 0 and eps == 1) else Fraction(0))
    out.append(Fraction(p ** (M // 2)))
    return ClassCounts(p, M, 1, tuple(out))


def form_counts(Q: QuadSpace, M: int) -> ClassCounts:
    c = plane_counts(Q.p, M)
    for _ in range(Q.planes - 1):
        c = c.convolve(plane_counts(Q.p, M))
    if Q.unary:
        c = c.convolve(unary_counts(Q.p, M))
    return c


# ---------------------------------------------------------------------------
# pushforward measures


def plane_pushforward(p: int, M: int) -> AsymptoticMeasure:
    """Pushforward of the unit-square measure under ``xy``.

    Shells below ``M`` come from the counts; from ``M`` on the density
    ``(n+1)(1-1/p) dx`` is carried by the germs ``(1-1/p)^2 |x|`` and
    ``-(1-1/p)^2 |x| log_p|x|`` against ``d^x x``.
    """
    triv = quadratic_characters(p)[0]
    c = (1 - 1 / p) ** 2
    germs = [
        GermTerm("0", Fraction(1), triv, 0, c, M),
        GermTerm("0", Fraction(1), triv, 1, -c, M),
    ]
    return plane_counts(p, M).to_measure(germs)


def unary_pushforward(p: int, M: int) -> AsymptoticMeasure:
    """Pushforward of ``dz`` on ``Z_p`` under ``z^2``; beyond ``M`` it is ``(1-1/p)/2 |x|^(1/2) eta(x)`` summed over the quadratic ``eta``."""
    c = (1 - 1 / p) / 2
    germs = [GermTerm("0", Fraction(1, 2), eta, 0, c, M) for eta in quadratic_characters(p)]
    return unary_counts(p, M).to_measure(germs)


def pushforward(Q: QuadSpace, f=None, M: int = 7) -> AsymptoticMeasure:
    """Pushforward of the unit-lattice Haar measure by block convolution.

    Only the unit-lattice measure factors through every Witt decomposition;
    other inputs go to :func:`brute_pushforward` when ``d <= 3``.
    """
    if f is not None:
        if Q.d <= 3:
            return brute_pushforward(Q, f, M)
        raise NonFactorizableInput("only the unit-lattice measure is supported for d > 3")
    if Q.d == 2:
        return plane_pushforward(Q.p, M)
    return form_counts(Q, M).to_measure()


def twisted_pushforward_T(phi2=None, d: int = 2, p: int = 3, M: int = 7) -> AsymptoticMeasure:
    """``xi -> int Phi_2(a, xi/a) |a|^((d-2)/2) d^x a`` times ``d xi``.

    With ``b = xi/a`` this is ``(1-1/p)^-1`` times the pushforward of
    ``Phi_2 |a|^w da db`` under ``ab``.  ``phi2=None`` is the unit lattice;
    otherwise ``phi2`` is a list of ``((ball_a, ball_b), weight)`` pieces.
    """
    if (d - 2) % 2:
        raise ValueError("the two-dimensional twist needs even d")
    w = (d - 2) // 2
    if phi2 is None:
        c = plane_counts(p, M, w)
        c = ClassCounts(p, M, 2, tuple(x * p / (p - 1) for x in c.per_element))
        return c.to_measure()
    if not phi2:
        return AsymptoticMeasure.zero(p, "x", (Fraction(0),))
    return _enumerate(p, M, phi2, lambda X: X[0] * X[1], weight=(0, w), scale=Fraction(p, p - 1))


def twisted_pushforward_G(phi2=None, d: int = 3, p: int = 3, M: int = 7) -> AsymptoticMeasure:
    """Pushforward of ``Phi_2 |C|^((d-3)/2) dA dB dC`` under ``A^2 + BC``."""
    if (d - 3) % 2:
        raise ValueError("the three-dimensional twist needs odd d")
    w = (d - 3) // 2
    if phi2 is None:
        return unary_counts(p, M).convolve(plane_counts(p, M, w)).to_measure()
    if not phi2:
        return AsymptoticMeasure.zero(p, "x", (Fraction(0),))
    return _enumerate(p, M, phi2, lambda X: X[0] ** 2 + X[1] * X[2], weight=(2, w))


def _ball_residues(b: Ball, M: int) -> np.ndarray:
    """Residues modulo ``p^M`` of the points of a ball inside ``Z_p``."""
    p = b.p
    if b.k < 0 or b.center.denominator != 1:
        raise UnboundedSupport("enumeration needs balls inside Z_p")
    q = p**M
    if b.k >= M:
        return np.array([int(b.center) % q], dtype=np.int64)
    step = p**b.k
    return (int(b.center) + step * np.arange(q // step, dtype=np.int64)) % q


def _val_array(x: np.ndarray, p: int, cap: int) -> np.ndarray:
    v = np.zeros(x.shape, dtype=np.int64)
    u = x.copy()
    live = u != 0
    for _ in range(cap):
        div = live & (u % p == 0)
        if not div.any():
            break
        u = np.where(div, u // p, u)
        v += div
    return np.where(x == 0, cap, v)


def _enumerate(p, M, pieces, form, weight=None, scale=Fraction(1)) -> AsymptoticMeasure:
    """Brute-force pushforward of a sum of product-ball indicators inside ``Z_p^dim``.

    Every residue vector modulo ``p^M`` of every piece is visited; a cell whose
    weighted coordinate is ``0 mod p^M`` gets the cell average of the weight.
    """
    dim = len(pieces[0][0])
    q = p**M
    hist = [Fraction(0)] * n_classes(M)
    for balls, wt in pieces:
        res = [_ball_residues(b, M) for b in balls]
        pts = math.prod(len(r) for r in res)
        if pts > 10**7:
            raise InstanceTooLarge(f"{pts} enumeration points exceed the cap")
        X = [g.ravel() for g in np.meshgrid(*res, indexing="ij")]
        cls = classify(form(X), p, M)
        if weight is None or not weight[1]:
            counts = np.bincount(cls, minlength=n_classes(M))
            for i, c in enumerate(counts):
                hist[i] += Fraction(wt) * int(c)
            continue
        j, e = weight
        vj = _val_array(X[j] % q, p, M)
        for v in range(M + 1):
            sel = vj == v
            if not sel.any():
                continue
            w = _weight_at_zero(p, M, e) if v == M else Fraction(p) ** (-v * e)
            counts = np.bincount(cls[sel], minlength=n_classes(M))
            for i, c in enumerate(counts):
                hist[i] += Fraction(wt) * w * int(c)
    sizes = class_sizes(p, M)
    per = tuple(h * scale / sizes[i] for i, h in enumerate(hist))
    return ClassCounts(p, M, dim, per).to_measure()


def brute_pushforward(Q: QuadSpace, f=None, M: int = 4) -> AsymptoticMeasure:
    """Pushforward by enumerating every residue vector (independent oracle, ``d <= 3``).

    ``f`` is ``None`` (unit lattice) or a list of ``(balls, weight)`` with one ball per coordinate.
    """
    if Q.d > 3:
        raise InstanceTooLarge("brute force is limited to d <= 3")
    p = Q.p
    if f is None:
        f = [((Ball(p, 0, 0),) * Q.d, 1)]
    if not f:
        return AsymptoticMeasure.zero(p, "x", (Fraction(0),))
    if p ** (Q.d * M) > 10**8:
        raise InstanceTooLarge("more than 1e8 enumeration points")
    return _enumerate(p, M, f, lambda X: Q.evaluate(X))


# ---------------------------------------------------------------------------
# germ fitting


@dataclass
class GermProfile:
    """Coefficients of ``C0 + |y|^alpha (log term + sum_eta a_eta eta(y))`` near an anchor."""

    d: int
    exponent: Fraction
    C0: complex
    a: Dict[str, complex]
    log: complex
    residual: float
    shells: Tuple[int, int]
    anchor: str = "0"

    def to_json(self) -> dict:
        from .measures import _cjson

        return {
            "d": self.d,
            "exponent": str(self.exponent),
            "anchor": self.anchor,
            "shells": list(self.shells),
            "C0": _cjson(self.C0),
            "a": {k: _cjson(v) for k, v in self.a.items()},
            "log": _cjson(self.log),
            "residual": self.residual,
        }

    def vector(self) -> np.ndarray:
        return np.array([self.a[k] for k in ("triv", "ur", "ram1", "ram2")])


def germ_extract(
    f: AsymptoticMeasure,
    d: int,
    anchor="0",
    K: int = 1,
    n_shells: int = 5,
    residue_depth: int = 2,
) -> GermProfile:
    """Fit the ``dx``-density of ``f`` on shells ``K..K+n_shells-1`` around ``anchor``.

    Columns: the constant ``C0``; ``|y|^(d/2-1)`` times each quadratic
    character; and ``|y|^(d/2-1) log_p|y|^-1``.  When ``d = 2`` the trivial
    character column duplicates ``C0`` and is dropped.  Points ``y = p^n u``
    run over units ``u`` modulo ``p^residue_depth``, so a dependence on more
    than the square class shows up in the residual.
    """
    p = f.p
    alpha = Fraction(d, 2) - 1
    if n_shells < 5:
        raise IllConditionedFit("at least five shells are needed")
    at_inf = anchor == "inf"
    c0 = Fraction(0) if at_inf else Fraction(anchor)
    q = p**residue_depth
    units = [u for u in range(1, q) if u % p]
    rows, b = [], []
    ns = range(K, K + n_shells)
    for n in ns:
        v = -n if at_inf else n
        r = float(p) ** (-float(alpha) * v)
        for u in units:
            y = Fraction(u) * Fraction(p) ** v
            b.append(complex(f.density(c0 + y, "dx")))
            lg = int(legendre(u, p))
            sgn = (-1) ** n
            rows.append([1.0, r, r * sgn, r * lg, r * lg * sgn, r * n])
    A = np.array(rows, dtype=complex)
    b = np.array(b, dtype=complex)
    cols = [0, 1, 2, 3, 4, 5]
    if alpha == 0:
        cols.remove(1)
    if at_inf:
        # nothing smooth survives at infinity beyond a constant
        pass
    A2 = A[:, cols]
    if np.linalg.matrix_rank(A2) < len(cols):
        raise IllConditionedFit("design matrix is rank deficient")
    sol, *_ = np.linalg.lstsq(A2, b, rcond=None)
    full = np.zeros(6, dtype=complex)
    full[cols] = sol
    scale = np.max(np.abs(b)) if np.any(b) else 0.0
    residual = float(np.max(np.abs(A2 @ sol - b)) / scale) if scale else 0.0
    return GermProfile(
        d,
        alpha,
        full[0],
        {"triv": full[1], "ur": full[2], "ram1": full[3], "ram2": full[4]},
        full[5],
        residual,
        (K, K + n_shells - 1),
        str(anchor),
    )


# ---------------------------------------------------------------------------
# linearized integration formula


def _gauss_counts(p: int, M: int, d: int, c: int) -> Fraction:
    """``#{v mod p^M : Q_d(v) = c}`` through additive characters.

    ``sum_t e(-tc/p^M) prod_blocks S_block(t) / p^M`` with the plane sum
    ``p^M p^min(v(t), M)`` and the unary Gauss sum computed directly.
    """
    q = p**M
    t = np.arange(q)
    vt = _val_array(t, p, M)
    plane = (float(q) * np.power(float(p), np.minimum(vt, M))).astype(complex)
    z = np.arange(q)
    total = plane ** (d // 2)
    if d % 2:
        unary = np.array([np.exp(2j * np.pi * (tt * z * z % q) / q).sum() for tt in range(q)])
        total = total * unary
    phase = np.exp(-2j * np.pi * (t * c % q) / q)
    return Fraction(round(float(np.real(np.sum(phase * total)) / q)))


@dataclass
class IntegrationReport:
    d: int
    p: int
    annulus: Tuple[int, int]
    lhs: List[float]
    rhs: List[float]
    normalization: float
    max_deviation: float

    def to_json(self) -> dict:
        return self.__dict__.copy()


def integration_check(Q: QuadSpace, annulus: Tuple[int, int] = (0, 3), M: Optional[int] = None) -> IntegrationReport:
    """Compare the Haar mass of ``Q^-1(shell n)`` with ``int_shell |xi|^(d/2-1) vol(orbit) d xi``.

    The left side comes from block-convolved class counts.  The orbit volume
    of ``xi = p^n u`` is the Leray volume of the rescaled fibre, counted
    independently with Gauss sums; its overall normalization is fitted on the
    first shell and the remaining shells are predictions.
    """
    p, d = Q.p, Q.d
    lo, hi = annulus
    if hi < lo:
        return IntegrationReport(d, p, annulus, [], [], 0.0, 0.0)
    if M is None:
        M = hi + 2
    counts = form_counts(Q, M)
    lhs, rhs = [], []
    nonres = next(u for u in range(2, p) if legendre(u, p) == -1)
    for n in range(lo, hi + 1):
        lhs.append(float(counts.mass(class_index(n, 1, M)) + counts.mass(class_index(n, -1, M))))
        # orbit volume at p^n u: Leray density over |xi|^(d/2-1), via Gauss-sum counts
        tot = 0.0
        for u in (1, nonres):
            cnt = _gauss_counts(p, M, d, u * p**n)
            leray = float(cnt) * float(p) ** M / float(p) ** (d * M)
            vol_orbit = leray * float(p) ** (n * (d / 2 - 1))
            shell_mass = float(p) ** (-n) * (1 - 1 / p) / 2
            tot += float(p) ** (-n * (d / 2 - 1)) * vol_orbit * shell_mass
        rhs.append(tot)
    lhs_a, rhs_a = np.array(lhs), np.array(rhs)
    if not np.any(lhs_a) and not np.any(rhs_a):
        return IntegrationReport(d, p, annulus, lhs, rhs, 0.0, 0.0)
    norm = lhs_a[0] / rhs_a[0]
    dev = float(np.max(np.abs(lhs_a - norm * rhs_a) / np.abs(lhs_a)))
    return IntegrationReport(d, p, annulus, lhs, rhs, float(norm), dev)
