from fractions import Fraction

import numpy as np
import pytest

from padic_rtf.errors import DepthExceeded, ZeroArgument
from padic_rtf.orbital import (
    a1_orbital_count,
    kloosterman_germ,
    kloosterman_sum,
    kuznetsov_basic,
    kuznetsov_bruhat_enum,
    sl2_order,
    sl2_trace_counts,
    xside_basic,
    xside_d2_density,
)
from padic_rtf.padic import val_rational


def test_small_kloosterman_sums():
    assert abs(kloosterman_sum(1, 0, 5) - (-1)) < 1e-12
    assert abs(kloosterman_sum(0, 0, 5) - 4) < 1e-12
    assert abs(kloosterman_sum(1, 1, 3) - (-1)) < 1e-12


def test_kloosterman_sums_are_real_and_weil_bounded():
    for a in range(1, 7):
        for b in range(1, 7):
            s = kloosterman_sum(a, b, 7)
            assert abs(s.imag) < 1e-12
            assert abs(s) <= 2 * np.sqrt(7) + 1e-12


def _units(p):
    return [u for u in (1, 2, 3, 4, 7, 8) if u % p]


@pytest.mark.parametrize("group,p,m", [("pgl2", 3, 2), ("pgl2", 5, 2), ("sl2", 3, 2), ("sl2", 5, 3)])
def test_basic_vector_matches_cell_enumeration(group, p, m):
    kv = kuznetsov_basic(group, p, m=m)
    top = kv.provenance["exact_through_shell"]
    for n in range(top + 1):
        weight = Fraction(1, p**n) if group == "pgl2" else Fraction(1, p ** (2 * n))
        for u in _units(p):
            x = Fraction(u * p**n)
            want = float(weight) * kuznetsov_bruhat_enum(group, p, x, M=max(n, 1))
            assert abs(kv.measure.density(x, "dx^x") - want) < 1e-12


def test_basic_vector_vanishes_off_integers():
    for group in ("pgl2", "sl2"):
        assert kuznetsov_bruhat_enum(group, 3, Fraction(1, 3)) == 0
        assert kuznetsov_bruhat_enum(group, 3, Fraction(1, 9)) == 0


def test_pgl2_odd_shells_vanish():
    assert kuznetsov_bruhat_enum("pgl2", 5, Fraction(5)) == 0
    assert kuznetsov_bruhat_enum("pgl2", 5, Fraction(2 * 125)) == 0


def test_deep_sl2_shells_average_to_zero():
    # past the projection level the values average to zero over cosets of 1 + p^m Z_p
    p, m = 3, 2
    kv = kuznetsov_basic("sl2", p, m=m)
    for n in (3, 4):
        for u0 in (1, 2, 4):
            s = sum(kuznetsov_bruhat_enum("sl2", p, Fraction((u0 + p**m * k) * p**n), M=n) for k in range(p ** (n - m)))
            assert abs(s) < 1e-12
        assert kv.measure.density(Fraction(p**n), "dx^x") == 0


def test_pgl2_germ_is_the_basic_vector_away_from_units():
    p, m = 5, 3
    kv = kuznetsov_basic("pgl2", p, m=m)
    for n in range(1, 2 * m + 1):
        for u in (1, 2, 3):
            x = Fraction(u * p**n)
            assert abs(kv.measure.density(x, "dx^x") - kloosterman_germ("pgl2", x, p=p)) < 1e-12
    assert abs(kloosterman_germ("pgl2", Fraction(1), p=p) - (1 - 1 / p)) < 1e-15


def test_pgl2_germ_below_zero():
    assert abs(kloosterman_germ("pgl2", Fraction(1, 25), p=5) - 4) < 1e-12
    assert kloosterman_germ("pgl2", Fraction(1, 5), p=5) == 0


def test_sl2_germs_sum_to_the_basic_vector():
    p, m = 5, 3
    kv = kuznetsov_basic("sl2", p, m=m)
    for n in range(2, m + 1):
        for u in (1, 2, 3):
            x = Fraction(u * p**n)
            both = kloosterman_germ("sl2", x, 1, p=p) + kloosterman_germ("sl2", x, -1, p=p)
            assert abs(kv.measure.density(x, "dx^x") - p ** (-n) * both) < 1e-12


def test_sl2_branches_are_conjugate_and_germ_is_flat_outside():
    p = 7
    for n in (1, 2):
        x = Fraction(3 * p**n)
        plus, minus = kloosterman_germ("sl2", x, 1, p=p), kloosterman_germ("sl2", x, -1, p=p)
        assert abs(plus - minus.conjugate()) < 1e-12
    assert kloosterman_germ("sl2", Fraction(1, 7), p=p) == pytest.approx(1 / 7)


def test_germ_at_zero_rejected():
    with pytest.raises(ZeroArgument):
        kloosterman_germ("pgl2", 0, p=3)
    with pytest.raises(ZeroArgument):
        kuznetsov_bruhat_enum("sl2", 3, 0)


def test_too_deep_window_rejected():
    with pytest.raises(DepthExceeded):
        kuznetsov_basic("sl2", 3, window=(0, 13))


def test_a1_counts():
    assert a1_orbital_count(0, 0) == 1
    assert a1_orbital_count(1, 0) == 2
    assert a1_orbital_count(3, 0) == 4
    assert a1_orbital_count(0, 2) == 3
    assert a1_orbital_count(-1, -1) == 0
    assert a1_orbital_count(-4, -4) == 0


def test_a1_xside_density():
    p = 3
    x = xside_basic("A1", p, window=(-3, 3))
    for c in (Fraction(2), Fraction(3), Fraction(18), Fraction(1 + 9), Fraction(1, 3)):
        vc = val_rational(c, p)
        vc1 = val_rational(c - 1, p)
        want = 0 if vc < 0 else 1 + vc + vc1
        assert abs(x.density(c, "dx") - want) < 1e-12


def test_sl2_group_order():
    for p, M in ((3, 1), (3, 2), (5, 1)):
        assert int(sl2_trace_counts(p, M).sum()) == sl2_order(p, M)


@pytest.mark.parametrize("p,M", [(3, 3), (5, 2)])
def test_d2_xside_mass_and_density(p, M):
    x = xside_basic("D2", p, M=M)
    assert abs(x.integrate() - 1) < 1e-12
    for t in range(p**M):
        xi = Fraction(t * t, 4) - 1
        if xi == 0 or val_rational(xi, p) >= M - 1:
            continue
        assert abs(x.density(Fraction(t), "dx") - float(xside_d2_density(p, Fraction(t)))) < 1e-12
