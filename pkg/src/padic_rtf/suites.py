"""Verification suites behind ``padic-rtf check``.

Each suite returns a :class:`SuiteResult` holding one :class:`CheckLine` per
assertion.  Randomized suites draw from ``numpy.random.Philox`` keyed by
``(seed, stream)``, so a seed reproduces the same inputs on any machine.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .measures import AsymptoticMeasure, Ball, GermTerm, ShellMeasure, SteppedMeasure
from .mellin import GammaFactorSpec, tate_gamma
from .orbital import kuznetsov_basic, xside_basic
from .padic import UnitCharacter, quadratic_characters, unit_group, val_rational
from .quadratic import QuadSpace, germ_extract, pushforward, twisted_pushforward_G, twisted_pushforward_T
from .roots import PARAMETRIC, full_table, row_by_label, symbolic_dependence
from .transfer import TransferParams, enlarged_space_check, kernel_convolve, shell_row, transfer

SUITES = ("table", "gamma", "germs", "reduction", "transfer-shape", "fl-smoke")


@dataclass
class CheckLine:
    name: str
    ok: bool
    value: float = 0.0
    tol: Optional[float] = None
    detail: str = ""
    timing: bool = False

    def render(self) -> str:
        tol = "" if self.tol is None else f" tol={self.tol:.1e}"
        det = f" {self.detail}" if self.detail else ""
        return f"{'PASS' if self.ok else 'FAIL'} {self.name} value={self.value:.3e}{tol}{det}"

    def to_json(self) -> dict:
        # wall-clock values vary between runs and would break byte-identical artifacts
        value = None if self.timing else float(self.value)
        tol = None if self.tol is None else float(self.tol)
        return {"name": self.name, "ok": self.ok, "value": value, "tol": tol, "detail": self.detail}


@dataclass
class SuiteResult:
    suite: str
    lines: List[CheckLine] = field(default_factory=list)
    runtime: float = 0.0
    artifacts: Dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.lines)

    def add(self, name: str, ok: bool, value: float = 0.0, tol: Optional[float] = None, detail: str = "") -> CheckLine:
        line = CheckLine(name, bool(ok), float(value), tol, detail)
        self.lines.append(line)
        return line

    def add_runtime(self, limit: float) -> CheckLine:
        line = self.add("runtime", self.runtime < limit, self.runtime, limit, "seconds")
        line.timing = True
        return line

    def summary(self) -> str:
        n_ok = sum(c.ok for c in self.lines)
        return f"suite {self.suite}: {n_ok}/{len(self.lines)} passed in {self.runtime:.2f}s"

    def to_json(self) -> dict:
        return {"suite": self.suite, "ok": self.ok, "lines": [c.to_json() for c in self.lines], "artifacts": self.artifacts}


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


def random_step_measure(rng: np.random.Generator, p: int, n_balls: int = 4, coordinate: str = "x") -> AsymptoticMeasure:
    """Sum of ``n_balls`` ball indicators ``u p^v + p^(v+j) Z_p`` (``v`` in -2..2, ``j`` in 1..2) with
    complex Gaussian densities against ``dx``.  The balls avoid 0."""
    pieces = []
    for _ in range(n_balls):
        v = int(rng.integers(-2, 3))
        j = int(rng.integers(1, 3))
        u = int(rng.integers(1, p**j))
        while u % p == 0:
            u = int(rng.integers(1, p**j))
        dens = complex(rng.normal(), rng.normal())
        pieces.append((Ball(p, Fraction(u) * Fraction(p) ** v, v + j), dens))
    return AsymptoticMeasure(p, SteppedMeasure(p, "dx", tuple(pieces)), [], coordinate, ())


# ---------------------------------------------------------------------------


def suite_table(cfg) -> SuiteResult:
    res = SuiteResult("table")
    t0 = time.perf_counter()
    checks = full_table()
    rows = []
    for c in checks:
        tag = c.label if c.n is None else f"{c.label}[n={c.n}]"
        res.add(f"table.{tag}", c.ok, len(c.mismatches), 0.0, "; ".join(c.mismatches))
        if c.row is not None:
            rows.append(c.to_json())
            r = c.row
            res.add(f"levi-orthogonal.{tag}", all(x == 0 for x in r.levi_pairings), float(sum(abs(x) for x in r.levi_pairings)), 0.0)
            if r.root_type == "T":
                res.add(f"s1-s2.{tag}", r.s1 - r.s2 == Fraction(r.dm1, 2) - 1, float(r.s1 - r.s2), 0.0)
            else:
                res.add(f"codim.{tag}", r.pairing_2rho + 1 == r.dimX, float(r.pairing_2rho + 1 - r.dimX), 0.0)
    for fam in PARAMETRIC:
        bad = symbolic_dependence(fam)
        res.add(f"symbolic.{fam}", not bad, len(bad), 0.0, "; ".join(f"{k}: {v}" for k, v in bad.items()))
    res.runtime = time.perf_counter() - t0
    res.add_runtime(1.0)
    res.artifacts["rows"] = rows
    return res


def _dual_poly_check(G1, G2) -> float:
    """Residual of ``G1(t) G2(1/t) = 1`` as a polynomial identity after clearing denominators."""
    N1, D1 = G1.numerator_poly(), G1.denominator_poly()
    N2, D2 = G2.numerator_poly(), G2.denominator_poly()
    # G2(1/t) = c2 t^-l2 N2(1/t)/D2(1/t) = c2 t^(-l2 - deg N2 + deg D2) rev N2 / rev D2
    e = G1.lo - G2.lo - (len(N2) - 1) + (len(D2) - 1)
    lhs = G1.const * G2.const * npoly.polymul(N1, N2[::-1])
    rhs = npoly.polymul(D1, D2[::-1])
    if e >= 0:
        lhs = np.concatenate([np.zeros(e), lhs])
    else:
        rhs = np.concatenate([np.zeros(-e), rhs])
    n = max(len(lhs), len(rhs))
    lhs = np.pad(lhs, (0, n - len(lhs)))
    rhs = np.pad(rhs, (0, n - len(rhs)))
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(rhs)), 1e-300))


def suite_gamma(cfg, primes: Optional[Sequence[int]] = None, n_random: int = 20) -> SuiteResult:
    res = SuiteResult("gamma")
    t0 = time.perf_counter()
    tol = cfg.tol
    primes = primes or [cfg.p]
    for p in primes:
        rng = make_rng(cfg.seed, p)
        worst = 0.0
        for i in range(n_random):
            f = random_step_measure(rng, p)
            s = Fraction(int(rng.integers(-3, 4)), 2)
            sigma = int(rng.choice([-1, 1]))
            a = kernel_convolve(f, s, sigma, "symbol")
            b = kernel_convolve(f, s, sigma, "oracle", window=(-4, 4))
            m = max(1, max(bb.k - bb.valuation() for bb, _ in f.step.pieces))
            err = max(float(np.max(np.abs(shell_row(a, n, m) - shell_row(b, n, m)))) for n in range(-4, 5))
            worst = max(worst, err)
            res.add(f"convolution.p{p}.{i}", err < tol, err, tol, f"s={s} sigma={sigma}")
        m = 2
        dual = 0.0
        for k in range(unit_group(p, m).N):
            eta = UnitCharacter.from_level(p, m, k)
            for a in (Fraction(0), Fraction(1, 3)):
                for sigma in (1, -1):
                    G1 = tate_gamma(GammaFactorSpec(eta, a, sigma))
                    G2 = tate_gamma(GammaFactorSpec(eta.inverse(), -a, -sigma))
                    dual = max(dual, _dual_poly_check(G1, G2))
        res.add(f"duality.p{p}", dual < tol, dual, tol, f"all level-{m} characters, a in {{0, 1/3}}")
        ts = np.exp(2j * np.pi * rng.random(50))
        names = ("triv", "ur", "ram1", "ram2")
        for name, eta in zip(names, quadratic_characters(p)):
            worst_u = 0.0
            for sigma in (1, -1):
                G = tate_gamma(GammaFactorSpec(eta, Fraction(0), sigma))
                worst_u = max(worst_u, float(np.max(np.abs(np.abs(G(ts)) - 1))))
            res.add(f"unitarity.p{p}.{name}", worst_u < tol, worst_u, tol)
    res.runtime = time.perf_counter() - t0
    res.add_runtime(60)
    return res


GERM_M = {3: 7, 5: 7, 7: 6}


def suite_germs(cfg, primes: Optional[Sequence[int]] = None, dims: Sequence[int] = range(2, 7)) -> SuiteResult:
    res = SuiteResult("germs")
    t0 = time.perf_counter()
    tol = cfg.tol
    profiles = []
    for p in primes or [cfg.p]:
        M = GERM_M.get(p, 6)
        for d in dims:
            g = germ_extract(pushforward(QuadSpace(d, p), M=M), d)
            profiles.append({"p": p, **g.to_json()})
            res.add(f"fit.p{p}.d{d}", g.residual < tol, g.residual, tol)
            lg = abs(g.log)
            if d == 2:
                res.add(f"log-present.p{p}.d{d}", lg > 1e-3, lg, 1e-3, "log coefficient must be nonzero")
            else:
                res.add(f"log-absent.p{p}.d{d}", lg < tol, lg, tol)
            if d % 2 == 0:
                nt = max(abs(g.a[k]) for k in ("ur", "ram1", "ram2"))
                res.add(f"nontrivial-vanish.p{p}.d{d}", nt < tol, nt, tol)
    res.runtime = time.perf_counter() - t0
    res.add_runtime(60)
    res.artifacts["profiles"] = profiles
    return res


def profile_vector(g) -> np.ndarray:
    return np.r_[g.vector(), g.log]


def suite_reduction(cfg, primes: Optional[Sequence[int]] = None, dims: Sequence[int] = range(2, 7)) -> SuiteResult:
    res = SuiteResult("reduction")
    t0 = time.perf_counter()
    tol = cfg.tol
    for p in primes or [cfg.p]:
        M = GERM_M.get(p, 6)
        for d in dims:
            g = germ_extract(pushforward(QuadSpace(d, p), M=M), d)
            tw = twisted_pushforward_T(None, d, p, M) if d % 2 == 0 else twisted_pushforward_G(None, d, p, M)
            h = germ_extract(tw, d)
            v1, v2 = profile_vector(g), profile_vector(h)
            lam = np.vdot(v2, v1) / np.vdot(v2, v2)
            dev = float(np.max(np.abs(v1 - lam * v2)) / np.max(np.abs(v1)))
            res.add(f"profile.p{p}.d{d}", dev < tol, dev, tol, f"scalar={complex(lam).real:.12g}")
            res.add(f"twisted-fit.p{p}.d{d}", h.residual < tol, h.residual, tol)
    res.runtime = time.perf_counter() - t0
    return res


TRANSFER_LEVEL = {3: 8, 5: 7, 7: 6}
SHAPE_TOL = 1e-6


def enlarged_input(rng: np.random.Generator, params: TransferParams, group: str, p: int, m: int) -> AsymptoticMeasure:
    """Random level-2 step part on shells -2..2, allowed tails at infinity, plus a multiple of the
    level-``m`` Kuznetsov basic vector."""
    coord = "xi" if params.root_type == "T" else "zeta"
    N2 = unit_group(p, 2).N
    sh = ShellMeasure(p, 2, {n: rng.normal(size=N2) + 1j * rng.normal(size=N2) for n in range(-2, 3)}).lift(m)
    triv = quadratic_characters(p)[0]
    germs = []
    for a, e in sorted(params.allowed_tails().items()):
        for k in range(e + 1):
            germs.append(GermTerm("inf", a, triv, k, complex(rng.normal(), rng.normal()), 3))
    f = AsymptoticMeasure(p, sh, germs, coord, ())
    return f + kuznetsov_basic(group, p, m=m).measure.scaled(complex(rng.normal(), rng.normal()))


def _regular_points(p: int, sing: Sequence[Fraction], vrange=(-3, 3)) -> List[Fraction]:
    pts = []
    for v in range(vrange[0], vrange[1] + 1):
        for u in range(1, p * p):
            if u % p == 0:
                continue
            c = Fraction(u) * Fraction(p) ** v
            if c in sing or any(val_rational(c - s, p) >= 1 for s in sing):
                continue
            pts.append(c)
    return pts


def suite_transfer_shape(cfg, primes: Optional[Sequence[int]] = None, K: int = 2, n_inputs: int = 3) -> SuiteResult:
    res = SuiteResult("transfer-shape")
    t0 = time.perf_counter()
    for label, group in (("A1", "pgl2"), ("D2", "sl2")):
        row = row_by_label(label)
        for p, trial in itertools.product(primes or [cfg.p], range(n_inputs)):
            rng = make_rng(cfg.seed, 1000 * p + 10 * trial + (1 if label == "A1" else 2))
            m = TRANSFER_LEVEL.get(p, 6)
            params = TransferParams.from_row(row, p=p)
            f = enlarged_input(rng, params, group, p, m)
            tag = f"{label}.p{p}.{trial}"
            ok, msg = enlarged_space_check(f, params)
            res.add(f"enlarged-space.{tag}", ok, 0.0, None, msg)
            out = transfer(f, params, m=m)
            sing = out.singular_points
            # smooth away from the singular points: constant on c + p^(v(c)+3) Z_p
            worst = 0.0
            for c in _regular_points(p, sing):
                base = out.density(c)
                step = Fraction(p) ** (val_rational(c, p) + 3)
                for t in range(1, p):
                    worst = max(worst, abs(out.density(c + t * step) - base))
            res.add(f"smooth.{tag}", worst < SHAPE_TOL, worst, SHAPE_TOL)
            for c0, d in zip(sing, (row.d1, row.dm1)):
                g = germ_extract(out, d, anchor=c0, K=K)
                res.add(f"germ.{tag}.c={c0}", g.residual < SHAPE_TOL, g.residual, SHAPE_TOL, f"d={d}")
                if d == 2:
                    res.add(f"log-germ.{tag}.c={c0}", abs(g.log) > 1e-6, abs(g.log), 1e-6)
                else:
                    res.add(f"no-log.{tag}.c={c0}", abs(g.log) < SHAPE_TOL, abs(g.log), SHAPE_TOL)
    res.runtime = time.perf_counter() - t0
    return res


FL_TOL = 1e-6


def fl_comparison(p: int, m: Optional[int] = None):
    """Densities of ``T(kuznetsov_basic)`` and ``xside_basic(A1)`` on the regular shells
    ``|v(c)| <= 3`` and ``1 <= v(c - 1) <= 3``, with the fitted constant and relative deviation."""
    m = m or TRANSFER_LEVEL.get(p, 6)
    row = row_by_label("A1")
    out = transfer(kuznetsov_basic("pgl2", p, m=m).measure, TransferParams.from_row(row, p=p), m=m)
    X = xside_basic("A1", p, (-3, 3))
    pts = [Fraction(u) * Fraction(p) ** v for v in range(-3, 4) for u in range(1, p) if not (v == 0 and u == 1)]
    pts += [1 + Fraction(u) * Fraction(p) ** k for k in range(1, 4) for u in range(1, p)]
    T = np.array([out.density(c) for c in pts])
    Xv = np.array([X.density(c) for c in pts])
    lam = np.vdot(T, Xv) / np.vdot(T, T)
    dev = float(np.max(np.abs(lam * T - Xv)) / np.max(np.abs(Xv)))
    return pts, T, Xv, complex(lam), dev


def suite_fl_smoke(cfg, primes: Optional[Sequence[int]] = None) -> SuiteResult:
    res = SuiteResult("fl-smoke")
    t0 = time.perf_counter()
    table = []
    for p in primes or [cfg.p]:
        pts, T, Xv, lam, dev = fl_comparison(p)
        res.add(f"fl.A1.p{p}", dev < FL_TOL, dev, FL_TOL, f"fitted constant {lam.real:.12g}")
        table.append({"p": p, "constant": lam, "points": [str(c) for c in pts], "transfer": T, "xside": Xv})
    res.runtime = time.perf_counter() - t0
    res.artifacts["comparison"] = table
    return res


RUNNERS: Dict[str, Callable] = {
    "table": suite_table,
    "gamma": suite_gamma,
    "germs": suite_germs,
    "reduction": suite_reduction,
    "transfer-shape": suite_transfer_shape,
    "fl-smoke": suite_fl_smoke,
}


def run_suite(name: str, cfg, primes: Optional[Sequence[int]] = None) -> SuiteResult:
    if name not in RUNNERS:
        raise KeyError(name)
    if name == "table":
        return suite_table(cfg)
    return RUNNERS[name](cfg, primes=primes)
