from fractions import Fraction

import numpy as np
import pytest

from padic_rtf.errors import IllConditionedFit, NonFactorizableInput, UnboundedSupport
from padic_rtf.measures import Ball
from padic_rtf.padic import legendre
from padic_rtf.quadratic import (
    QuadSpace,
    brute_pushforward,
    class_index,
    form_counts,
    germ_extract,
    integration_check,
    plane_pushforward,
    pushforward,
    twisted_pushforward_G,
    twisted_pushforward_T,
    unary_pushforward,
)


@pytest.mark.parametrize("p", [3, 5])
def test_pushforwards_are_probability_measures(p):
    assert abs(plane_pushforward(p, 6).integrate() - 1) < 1e-12
    assert abs(unary_pushforward(p, 6).integrate() - 1) < 1e-12
    for d in range(2, 7):
        assert abs(pushforward(QuadSpace(d, p), M=6).integrate() - 1) < 1e-12


@pytest.mark.parametrize("p,d,M", [(3, 2, 4), (5, 3, 3), (3, 3, 4)])
def test_block_counts_match_enumeration(p, d, M):
    Q = QuadSpace(d, p)
    brute = brute_pushforward(Q, None, M)
    counts = form_counts(Q, M)
    for n in range(M):
        for u in range(1, p):
            y = Fraction(u * p**n)
            assert brute.step.density_at(y) == counts.density(class_index(n, int(legendre(u, p)), M))


def test_plane_density_grows_linearly_in_depth():
    p = 3
    f = plane_pushforward(p, 7)
    for n in range(10):
        got = complex(f.density(Fraction(p**n), "dx")) / (1 - 1 / p)
        assert abs(got - (n + 1)) < 1e-9


@pytest.mark.parametrize("p", [3, 5])
def test_plane_germ_is_pure_log(p):
    g = germ_extract(pushforward(QuadSpace(2, p), M=7), 2)
    assert g.residual < 1e-9
    assert abs(g.log - (1 - 1 / p)) < 1e-9
    assert abs(g.C0 - (1 - 1 / p)) < 1e-9


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("d", [4, 6])
def test_even_dimension_has_no_character_germs(p, d):
    g = germ_extract(pushforward(QuadSpace(d, p), M=7), d)
    assert g.residual < 1e-9
    assert abs(g.log) < 1e-9
    for k in ("ur", "ram1", "ram2"):
        assert abs(g.a[k]) < 1e-9


@pytest.mark.parametrize("p,M", [(3, 7), (5, 7), (7, 6)])
@pytest.mark.parametrize("d", [3, 5])
def test_odd_dimension_ramified_germs(p, M, d):
    g = germ_extract(pushforward(QuadSpace(d, p), M=M), d)
    expect = p ** (-(d - 1) / 2) / 2
    assert abs(g.a["ram1"] - expect) < 1e-9
    assert abs(g.a["ram2"] - expect) < 1e-9
    assert abs(g.log) < 1e-9


def test_twisted_enumeration_matches_counts():
    p, M = 3, 4
    pts = [Fraction(u * p**n) for n in range(M) for u in (1, 2)]
    a = twisted_pushforward_T(None, 4, p, M)
    b = twisted_pushforward_T([((Ball(p, 0, 0), Ball(p, 0, 0)), 1)], 4, p, M)
    assert max(abs(complex(a.density(y, "dx") - b.density(y, "dx"))) for y in pts) < 1e-12
    a = twisted_pushforward_G(None, 5, p, M)
    b = twisted_pushforward_G([((Ball(p, 0, 0),) * 3, 1)], 5, p, M)
    assert max(abs(complex(a.density(y, "dx") - b.density(y, "dx"))) for y in pts) < 1e-12


def test_twist_parity_is_enforced():
    with pytest.raises(ValueError):
        twisted_pushforward_T(None, 3, 3, 4)
    with pytest.raises(ValueError):
        twisted_pushforward_G(None, 4, 3, 4)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_integration_formula(d):
    r = integration_check(QuadSpace(d, 3), (0, 3))
    assert r.max_deviation < 1e-9


def test_integration_empty_annulus():
    r = integration_check(QuadSpace(3, 3), (2, 1))
    assert r.lhs == [] and r.max_deviation == 0.0


def test_enumeration_needs_compact_support():
    with pytest.raises(UnboundedSupport):
        brute_pushforward(QuadSpace(2, 3), [((Ball(3, 0, -1), Ball(3, 0, 0)), 1)], 3)


def test_general_input_in_high_dimension_rejected():
    with pytest.raises(NonFactorizableInput):
        pushforward(QuadSpace(4, 3), f=[((Ball(3, 0, 0),) * 4, 1)])


def test_germ_fit_needs_enough_shells():
    with pytest.raises(IllConditionedFit):
        germ_extract(plane_pushforward(3, 6), 2, n_shells=3)


def test_small_dimension_rejected():
    with pytest.raises(ValueError):
        QuadSpace(1, 3)
