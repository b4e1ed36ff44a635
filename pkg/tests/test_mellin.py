from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from padic_rtf.errors import UnderivedRow
from padic_rtf.measures import AsymptoticMeasure, Ball, GermTerm, ShellMeasure, SteppedMeasure
from padic_rtf.mellin import (
    GammaFactorSpec,
    MellinSymbol,
    gamma_factor_at_level,
    inverse_mellin,
    kernel_symbol,
    mellin,
    mu_X,
    symbol_mul,
    tate_gamma,
)
from padic_rtf.padic import UnitCharacter, legendre, quadratic_characters, unit_group
from padic_rtf.rational import PoleRational
from padic_rtf.roots import row_by_label
from padic_rtf.suites import _dual_poly_check
from padic_rtf.transfer import kernel_convolve, shell_row

T0 = 0.37 + 0.2j


def units_dx(p):
    return AsymptoticMeasure(p, SteppedMeasure(p, "dx", tuple((Ball(p, Fraction(u), 1), 1) for u in range(1, p))))


def test_units_entry():
    p = 5
    S = mellin(units_dx(p), 2)
    assert abs(S.evaluate(0, T0) - (1 - 1 / p)) < 1e-15
    assert max(abs(S.evaluate(k, T0)) for k in range(1, unit_group(p, 2).N)) < 1e-15


def test_germ_entry_is_geometric_series():
    p = 5
    triv = quadratic_characters(p)[0]
    g = AsymptoticMeasure(p, None, [GermTerm("0", Fraction(1, 2), triv, 0, 1.0, 2)])
    q = p**-0.5 * T0
    assert abs(mellin(g, 2).evaluate(0, T0) - q**2 / (1 - q)) < 1e-14


def test_log_germ_entry():
    p = 3
    triv = quadratic_characters(p)[0]
    g = AsymptoticMeasure(p, None, [GermTerm("0", Fraction(1), triv, 1, 1.0, 1)])
    q = T0 / p
    # sum_{n>=1} (-n) q^n
    assert abs(mellin(g, 1).evaluate(0, T0) + q / (1 - q) ** 2) < 1e-14


@pytest.mark.parametrize("p", [3, 5, 7])
def test_gamma_unitarity(p):
    ts = np.exp(2j * np.pi * np.random.default_rng(p).random(50))
    for eta in quadratic_characters(p):
        for sigma in (1, -1):
            G = tate_gamma(GammaFactorSpec(eta, Fraction(0), sigma))
            assert np.max(np.abs(np.abs(G(ts)) - 1)) < 1e-9


@pytest.mark.parametrize("p", [3, 5])
def test_gamma_duality_polynomial_identity(p):
    m = 2
    for k in range(unit_group(p, m).N):
        eta = UnitCharacter.from_level(p, m, k)
        for a in (Fraction(0), Fraction(1, 3), Fraction(-1, 2)):
            for sigma in (1, -1):
                G1 = tate_gamma(GammaFactorSpec(eta, a, sigma))
                G2 = tate_gamma(GammaFactorSpec(eta.inverse(), -a, -sigma))
                assert _dual_poly_check(G1, G2) < 1e-9


def test_unramified_gamma_is_degree_one_ratio():
    G = tate_gamma(GammaFactorSpec(UnitCharacter.trivial(5), Fraction(1, 3), 1))
    assert len(G.numerator_poly()) <= 2 and len(G.denominator_poly()) <= 2


@pytest.mark.parametrize("p", [5, 13])
def test_ramified_constant_is_normalized_gauss_sum(p):
    leg = quadratic_characters(p)[2]
    G = tate_gamma(GammaFactorSpec(leg, Fraction(0), 1))
    assert len(G.numerator_poly()) == 1 and len(G.denominator_poly()) == 1
    gauss = sum(int(legendre(x, p)) * np.exp(2j * np.pi * x / p) for x in range(1, p)) / np.sqrt(p)
    assert abs(abs(G.const) - 1) < 1e-12
    assert abs(G.const - gauss) < 1e-12


def test_kernel_applied_to_units_reproduces_gamma():
    p = 5
    f = AsymptoticMeasure(p, ShellMeasure(p, 1, {0: np.ones(4)}), [], "x", ())
    for a in (Fraction(0), Fraction(1, 2)):
        conv = kernel_convolve(f, Fraction(-1, 2) - a, 1, "symbol", m=1)
        G = tate_gamma(GammaFactorSpec(UnitCharacter.trivial(p), a, 1))
        S = mellin(conv, 1)
        for t in (T0, 0.5j, -0.3):
            assert abs(S.evaluate(0, t) - G(t)) < 1e-12
        oracle = kernel_convolve(f, Fraction(-1, 2) - a, 1, "oracle", m=1, window=(-4, 4))
        assert max(np.max(np.abs(shell_row(conv, n, 1) - shell_row(oracle, n, 1))) for n in range(-4, 5)) < 1e-12


def test_kernel_apply_is_componentwise_product():
    p, m = 5, 2
    rng = np.random.default_rng(1)
    triv = quadratic_characters(p)[0]
    sh = ShellMeasure(p, m, {n: rng.normal(size=20) + 1j * rng.normal(size=20) for n in range(-1, 3)})
    f = AsymptoticMeasure(p, sh, [GermTerm("0", Fraction(1, 2), triv, 0, 1.0, 3)], "x", ())
    S = mellin(f, m)
    K = kernel_symbol(p, m, Fraction(1, 3), 1)
    T = K.apply(S)
    for k in (0, 1, 5, 7):
        assert abs(T.evaluate(k, T0) - S.evaluate(k, T0) * K.entry(k)(T0)) < 1e-12


def test_round_trip():
    p, m = 5, 2
    rng = np.random.default_rng(2)
    sh = ShellMeasure(p, m, {n: rng.normal(size=20) for n in range(-2, 3)})
    f = AsymptoticMeasure(p, sh, [], "x", ())
    g = inverse_mellin(mellin(f, m))
    for n in range(-2, 3):
        assert np.max(np.abs(shell_row(g, n, m) - sh.shells[n])) < 1e-13


def test_symbol_mul_trivial_cases():
    p, m = 3, 1
    t = PoleRational(p, 1.0, 1)
    S = MellinSymbol(p, m, rational={0: t, 1: PoleRational(p, 2.0)})
    one = MellinSymbol(p, m, rational={0: PoleRational(p, 1.0), 1: PoleRational(p, 1.0)})
    zero = MellinSymbol(p, m, rational={0: PoleRational(p, 0), 1: PoleRational(p, 0)})
    assert abs(symbol_mul(S, one).evaluate(1, T0) - 2) < 1e-15
    assert symbol_mul(S, zero).evaluate(0, T0) == 0
    assert abs(symbol_mul(S, S).evaluate(0, T0) - T0**2) < 1e-15


def test_symbol_json_shape():
    S = mellin(units_dx(3), 2)
    js = S.to_json()
    assert js["p"] == 3 and js["m"] == 2
    assert {"eta", "num", "den"} <= set(js["entries"][0])


def test_mu_x_d2_is_product_of_two_factors():
    p, m = 5, 2
    row = row_by_label("D2")
    S = mu_X(row, p, m)
    N = unit_group(p, m).N
    for k in (0, 1, 3, 10):
        g1 = gamma_factor_at_level(p, m, k, Fraction(-1, 2), -1).unanchored()
        g2 = gamma_factor_at_level(p, m, (-k) % N, Fraction(-1, 2), 1).unanchored().substitute_power(-1)
        for t in (0.6 + 0.2j, 1.3j):
            assert abs(S.evaluate(k, t) - g1(t) * g2(t)) < 1e-10


@pytest.mark.parametrize("label", ["A1", "Bn", "G2"])
def test_mu_x_swap_symmetry(label):
    row = row_by_label(label, 2 if label == "Bn" else None)
    swapped = replace(row, s1=row.s2, s2=row.s1)
    p, m = 5, 2
    A, B = mu_X(row, p, m), mu_X(swapped, p, m, psi_sign=-1)
    for k in range(unit_group(p, m).N):
        for t in (0.6 + 0.2j, 0.9j):
            assert abs(A.evaluate(k, t) - B.evaluate(k, t)) < 1e-9 * max(1, abs(A.evaluate(k, t)))


def test_mu_x_a1_unit_modulus():
    # expected to fail: the degree -2 factor is evaluated off its unitary line
    S = mu_X(row_by_label("A1"), 5, 2)
    ts = np.exp(2j * np.pi * np.random.default_rng(5).random(20))
    worst = max(abs(abs(S.evaluate(k, t)) - 1) for k in range(unit_group(5, 2).N) for t in ts)
    assert worst < 1e-9


def test_mu_x_needs_derived_row():
    class Bare:
        root_type = None

    with pytest.raises(UnderivedRow):
        mu_X(Bare(), 3)
