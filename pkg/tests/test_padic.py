import cmath
from fractions import Fraction

import numpy as np
import pytest

from padic_rtf.errors import InsufficientPrecision, UnsupportedPrime, ZeroArgument
from padic_rtf.padic import (
    INF,
    AdditiveCharacter,
    MultiplicativeCharacter,
    PAdicScalar,
    UnitCharacter,
    abs_p,
    eval_char,
    frac_part,
    generator,
    legendre,
    psi,
    quadratic_characters,
    unit_group,
    valuation,
)


def S(x, p, m=4):
    return PAdicScalar.from_rational(Fraction(x), p, m)


def test_valuation():
    assert valuation(PAdicScalar.zero(3, 2)) == INF
    assert valuation(PAdicScalar(3, 1, 1, 2)) == 1
    assert valuation(S(Fraction(3, 5), 5)) == -1


def test_abs():
    assert abs_p(PAdicScalar.zero(3, 2)) == 0
    assert abs_p(S(9, 3)) == Fraction(1, 9)
    assert abs_p(S(Fraction(1, 5), 5)) == 5


def test_frac_part():
    assert frac_part(S(7, 3)) == 0
    assert frac_part(S(Fraction(1, 3), 3)) == Fraction(1, 3)
    assert frac_part(S(Fraction(4, 9), 3)) == Fraction(4, 9)
    with pytest.raises(InsufficientPrecision):
        frac_part(PAdicScalar(3, -3, 1, 2))


def test_psi():
    ch = AdditiveCharacter(5)
    assert psi(ch, PAdicScalar.zero(5, 2)) == 1
    assert abs(psi(ch, S(Fraction(1, 5), 5)) - cmath.exp(2j * cmath.pi / 5)) < 1e-15
    assert abs(sum(psi(ch, S(Fraction(j, 5), 5)) for j in range(5))) < 1e-12


def test_arithmetic_round_trip():
    p, m = 7, 5
    a, b = S(Fraction(3, 49), p, m), S(Fraction(10, 7), p, m)
    prod = a * b
    assert prod.v == -3 and prod.u == 30 % p**m
    assert (a / a).to_fraction() == 1
    assert (a + S(1, p, m)).v == -2
    with pytest.raises(InsufficientPrecision):
        a - a


def test_quadratic_characters():
    triv, ur, ram1, ram2 = quadratic_characters(5)
    assert eval_char(triv, S(Fraction(7, 25), 5)) == 1
    assert abs(eval_char(ur, S(125, 5)) + 1) < 1e-15
    assert abs(eval_char(ram1, S(2, 5)) + 1) < 1e-15


def test_eval_char():
    half = MultiplicativeCharacter(UnitCharacter.trivial(3), Fraction(0), Fraction(1, 2))
    assert abs(eval_char(half, S(9, 3)) - 1 / 3) < 1e-15
    _, _, _, ram2 = quadratic_characters(5)
    # non-residue 2 times p: (-1) * zeta with zeta = ram2(p) = -1
    assert abs(eval_char(ram2, S(10, 5)) - 1) < 1e-15
    with pytest.raises(ZeroArgument):
        eval_char(ram2, PAdicScalar.zero(5, 2))


def test_legendre_matches_euler():
    for p in (3, 5, 7, 11):
        u = np.arange(1, p)
        euler = np.array([pow(int(x), (p - 1) // 2, p) for x in u])
        euler = np.where(euler == 1, 1, -1)
        assert np.array_equal(legendre(u, p), euler)


def test_unit_group_dlog():
    G = unit_group(5, 2)
    assert G.N == 20
    assert generator(5) == G.units[1]
    assert np.array_equal(G.units[G.dlog[G.units]], G.units)
    assert G.conductor(0) == 0 and G.conductor(5) == 1 and G.conductor(1) == 2


def test_unit_character_lift():
    eta = UnitCharacter.from_level(5, 2, 5)
    assert eta.c == 1
    for u in (1, 2, 3, 7, 13):
        assert abs(eta(u) - UnitCharacter(5, 1, 1)(u)) < 1e-12


def test_even_prime_rejected():
    with pytest.raises(UnsupportedPrime):
        PAdicScalar(2, 0, 1, 2)
