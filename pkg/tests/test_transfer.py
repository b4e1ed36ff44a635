from fractions import Fraction

import numpy as np
import pytest

from padic_rtf.errors import CoordinateMismatch, NonconvergentTail, ParamsInconsistent
from padic_rtf.measures import AsymptoticMeasure, GermTerm, ShellMeasure
from padic_rtf.padic import quadratic_characters, unit_group
from padic_rtf.roots import row_by_label
from padic_rtf.suites import make_rng, random_step_measure
from padic_rtf.transfer import (
    TransferParams,
    assert_deep_shells_vanish,
    convolve_oracle,
    enlarged_space_check,
    kernel_convolve,
    shell_function,
    shell_row,
    transfer,
)

WINDOW = range(-4, 5)


def max_gap(a, b, m):
    return max(float(np.max(np.abs(shell_row(a, n, m) - shell_row(b, n, m)))) for n in WINDOW)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_symbol_matches_oracle_on_random_steps(p):
    rng = make_rng(7, p)
    for _ in range(5):
        f = random_step_measure(rng, p)
        s = Fraction(int(rng.integers(-3, 4)), 2)
        sigma = int(rng.choice([-1, 1]))
        m = 2
        a = kernel_convolve(f, s, sigma, "symbol", m=m)
        b = kernel_convolve(f, s, sigma, "oracle", m=m)
        assert max_gap(a, b, m) < 1e-9


def random_shells(rng, p, m, lo=-1, hi=1):
    N = unit_group(p, m).N
    return ShellMeasure(p, m, {n: rng.normal(size=N) for n in range(lo, hi + 1)})


@pytest.mark.parametrize("s1,s2", [(Fraction(1, 2), Fraction(1, 2)), (Fraction(3, 2), Fraction(1, 2))])
def test_type_t_transfer_with_tails(s1, s2):
    p, m = 3, 2
    rng = np.random.default_rng(3)
    triv = quadratic_characters(p)[0]
    prm = TransferParams("T", s1=s1, s2=s2)
    germs = [GermTerm("inf", Fraction(1, 2) - s1, triv, 0, 0.7, 2)]
    if s1 == s2:
        germs.append(GermTerm("inf", Fraction(1, 2) - s1, triv, 1, 0.3, 2))
    else:
        germs.append(GermTerm("inf", Fraction(1, 2) - s2, triv, 0, 0.3, 1))
    f = AsymptoticMeasure(p, random_shells(rng, p, m), germs, "xi", ())
    assert enlarged_space_check(f, prm)[0]
    a, b = transfer(f, prm, "symbol"), transfer(f, prm, "oracle")
    assert max_gap(a, b, m) < 1e-9
    if s1 == s2:
        c = transfer(f, prm, "symbol", kernel_order=(0, 1))
        assert max_gap(a, c, m) < 1e-9
    else:
        # the reversed order passes through a tail with no Mellin transform
        with pytest.raises(NonconvergentTail):
            transfer(f, prm, "symbol", kernel_order=(0, 1))


def test_kernel_order_commutes_on_steps():
    p, m = 5, 2
    f = random_step_measure(make_rng(11, 0), p)
    prm = TransferParams("T", s1=Fraction(3, 2), s2=Fraction(1, 2))
    f = AsymptoticMeasure(p, f.step, [], "xi", ())
    a = transfer(f, prm, "symbol", m=m)
    b = transfer(f, prm, "symbol", m=m, kernel_order=(0, 1))
    assert max_gap(a, b, m) < 1e-9


def test_type_g_transfer_with_tail():
    p, m = 3, 2
    rng = np.random.default_rng(4)
    triv = quadratic_characters(p)[0]
    prm = TransferParams.from_row(row_by_label("D2"))
    f = AsymptoticMeasure(p, random_shells(rng, p, m), [GermTerm("inf", Fraction(0), triv, 0, 0.5, 1)], "zeta", ())
    assert max_gap(transfer(f, prm, "symbol"), transfer(f, prm, "oracle"), m) < 1e-9


def test_output_coordinate_and_singular_points():
    p = 3
    f = AsymptoticMeasure(p, ShellMeasure(p, 1, {0: np.ones(2)}), [], "xi", ())
    out = transfer(f, TransferParams.from_row(row_by_label("A1")))
    assert out.coordinate == "c" and out.singular_points == (Fraction(0), Fraction(1))


def test_wrong_coordinate_rejected():
    p = 3
    f = AsymptoticMeasure(p, ShellMeasure(p, 1, {0: np.ones(2)}), [], "zeta", ())
    with pytest.raises(CoordinateMismatch):
        transfer(f, TransferParams.from_row(row_by_label("A1")))


def test_params_validation():
    with pytest.raises(ParamsInconsistent):
        TransferParams("T", s1=Fraction(1, 2), s2=Fraction(3, 2))
    with pytest.raises(ParamsInconsistent):
        TransferParams("G", s0=Fraction(1, 2))
    with pytest.raises(ParamsInconsistent):
        TransferParams("X")


def test_enlarged_space_rejects_bad_tails():
    p = 3
    triv, ur, _, _ = quadratic_characters(p)
    prm = TransferParams.from_row(row_by_label("A1"))
    sh = ShellMeasure(p, 1, {0: np.ones(2)})
    bad_char = AsymptoticMeasure(p, sh, [GermTerm("inf", Fraction(0), ur, 0, 1.0, 1)], "xi")
    bad_exp = AsymptoticMeasure(p, sh, [GermTerm("inf", Fraction(1, 3), triv, 0, 1.0, 1)], "xi")
    bad_log = AsymptoticMeasure(p, sh, [GermTerm("inf", Fraction(0), triv, 2, 1.0, 1)], "xi")
    at_zero = AsymptoticMeasure(p, sh, [GermTerm("0", Fraction(1), triv, 0, 1.0, 1)], "xi")
    for f in (bad_char, bad_exp, bad_log, at_zero):
        assert not enlarged_space_check(f, prm)[0]


def test_oracle_refuses_divergent_tail():
    p, m = 3, 1
    triv = quadratic_characters(p)[0]
    f = AsymptoticMeasure(p, None, [GermTerm("inf", Fraction(2), triv, 0, 1.0, 1)], "x")
    with pytest.raises(NonconvergentTail):
        convolve_oracle(shell_function(f, m), Fraction(0), 1)(0)


@pytest.mark.parametrize("p,m", [(3, 2), (5, 2), (7, 1)])
def test_deep_shells_vanish(p, m):
    assert assert_deep_shells_vanish(p, m, 1) < 1e-12


def _random_enlarged(rng, p, prm, m=2):
    triv = quadratic_characters(p)[0]
    germs = [
        GermTerm("inf", a, triv, k, complex(rng.normal(), rng.normal()), 2)
        for a, e in sorted(prm.allowed_tails().items())
        for k in range(e + 1)
    ]
    coord = "xi" if prm.root_type == "T" else "zeta"
    return AsymptoticMeasure(p, random_shells(rng, p, m, -2, 2), germs, coord, ())


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("label", ["A1", "Bn", "D2"])
def test_oracle_and_symbol_agree_on_enlarged_inputs(p, label):
    prm = TransferParams.from_row(row_by_label(label, 2 if label == "Bn" else None))
    rng = make_rng(5, 10 * p + len(label))
    worst = 0.0
    for _ in range(20):
        f = _random_enlarged(rng, p, prm)
        worst = max(worst, max_gap(transfer(f, prm, "symbol"), transfer(f, prm, "oracle"), 2))
    assert worst < 1e-9


def test_transfer_is_linear():
    p = 3
    prm = TransferParams.from_row(row_by_label("A1"))
    rng = make_rng(6, 0)
    f, g = _random_enlarged(rng, p, prm), _random_enlarged(rng, p, prm)
    lhs = transfer(f.scaled(2) + g, prm)
    rhs = transfer(f, prm).scaled(2) + transfer(g, prm)
    assert max_gap(lhs, rhs, 2) < 1e-10


def test_zero_input_gives_zero():
    p = 3
    prm = TransferParams.from_row(row_by_label("D2"))
    f = AsymptoticMeasure(p, ShellMeasure(p, 1, {}), [], "zeta", ())
    out = transfer(f, prm)
    assert max_gap(out, out.scaled(0), 1) == 0


def test_d2_basic_vector_has_square_root_germs():
    from padic_rtf.orbital import kuznetsov_basic
    from padic_rtf.quadratic import germ_extract

    p, m = 3, 8
    prm = TransferParams.from_row(row_by_label("D2"))
    out = transfer(kuznetsov_basic("sl2", p, m=m).measure, prm, m=m)
    for c0 in (Fraction(-2), Fraction(2)):
        g = germ_extract(out, 3, anchor=c0, K=2)
        assert g.residual < 1e-6
        assert abs(g.log) < 1e-6
        assert abs(g.a["ram1"]) > 1e-6 or abs(g.a["ram2"]) > 1e-6 or abs(g.a["triv"]) > 1e-6
