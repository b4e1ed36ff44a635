from fractions import Fraction

import numpy as np
import pytest

from padic_rtf.measures import (
    AsymptoticMeasure,
    Ball,
    GermTerm,
    ShellMeasure,
    SteppedMeasure,
    additive_convolve,
    add,
    canonicalize,
    coordinate_shift,
    integrate,
    scale,
)
from padic_rtf.padic import quadratic_characters, unit_group


def ball(p, c, k):
    return Ball(p, Fraction(c), k)


def meas(p, pieces, germs=(), kind="dx"):
    return AsymptoticMeasure(p, SteppedMeasure(p, kind, tuple(pieces)), list(germs), "x", ())


def test_integrate_balls():
    p = 5
    assert integrate(meas(p, [(ball(p, 0, 0), 1)])) == 1
    assert abs(integrate(meas(p, [(ball(p, 0, 1), 1)])) - 0.2) < 1e-15


def test_integrate_germ():
    p = 3
    triv = quadratic_characters(p)[0]
    f = meas(p, [], [GermTerm("0", 1, triv, 0, 1.0, 1)])
    assert abs(integrate(f) - 1 / (p - 1)) < 1e-14


def test_canonicalize_refines_nested_balls():
    p = 3
    f = SteppedMeasure(p, "dx", ((ball(p, 0, 0), 1), (ball(p, 0, 1), 1))).canonicalize()
    assert f.density_at(Fraction(3)) == 2
    assert f.density_at(Fraction(1)) == 1
    assert f.density_at(Fraction(2)) == 1
    assert SteppedMeasure(p, "dx", ()).canonicalize().pieces == ()


def test_canonicalize_advances_germ_cutoff():
    p = 3
    triv = quadratic_characters(p)[0]
    f = AsymptoticMeasure(p, SteppedMeasure(p, "dx", ((ball(p, 0, 0), 1),)), [GermTerm("0", 1, triv, 0, 1.0, 1)], "x", ())
    g = canonicalize(f)
    assert all(gt.K >= 1 for gt in g.germs)
    for x in (Fraction(1), Fraction(3), Fraction(9), Fraction(27, 2)):
        assert abs(g.density(x) - f.density(x)) < 1e-12
    assert abs(integrate(g) - integrate(f)) < 1e-12


def test_add_and_scale():
    p = 5
    f = meas(p, [(ball(p, 0, 0), 1)])
    z = AsymptoticMeasure.zero(p)
    assert integrate(add(f, z)) == integrate(f)
    assert integrate(scale(f, 0)) == 0
    two = add(f, f)
    assert two.density(Fraction(3)) == 2


def test_additive_convolve():
    p = 3
    Zp = SteppedMeasure(p, "dx", ((ball(p, 0, 0), 1),))
    pZp = SteppedMeasure(p, "dx", ((ball(p, 0, 1), p),))
    assert additive_convolve(Zp, Zp).canonicalize().pieces == Zp.pieces
    assert additive_convolve(Zp, pZp).canonicalize().pieces == Zp.pieces
    one = SteppedMeasure(p, "dx", ((ball(p, 1, 1), 1),))
    c = additive_convolve(one, one).canonicalize()
    assert c.density_at(Fraction(2)) == Fraction(1, p)
    assert c.density_at(Fraction(1)) == 0


def test_coordinate_shift():
    p = 5
    f = meas(p, [(ball(p, 0, 0), 1)])
    g = coordinate_shift(f, 1)
    assert g.density(Fraction(4)) == f.density(Fraction(4))
    triv = quadratic_characters(p)[0]
    h = meas(p, [], [GermTerm("0", Fraction(1, 2), triv, 0, 1.0, 1)])
    assert coordinate_shift(h, 0).germs == h.germs
    far = coordinate_shift(h, Fraction(1, 25))
    assert far.germs[0].at == Fraction(1, 25)
    assert abs(far.density(Fraction(1, 25) + 5) - h.density(Fraction(5))) < 1e-14


def test_shell_measure_matches_stepped():
    p, m = 3, 2
    f = SteppedMeasure(p, "dx", ((ball(p, 1, 2), 2), (ball(p, 6, 3), -1)))
    sh = ShellMeasure.from_stepped(f, m)
    for x in (Fraction(1), Fraction(10), Fraction(6), Fraction(33)):
        assert abs(AsymptoticMeasure(p, sh).density(x) - complex(f.density_at(x))) < 1e-12
    assert abs(sh.total_mass() - complex(f.total_mass())) < 1e-12


def test_json_round_trip():
    p = 5
    triv, ur, ram1, _ = quadratic_characters(p)
    f = AsymptoticMeasure(
        p,
        SteppedMeasure(p, "dx", ((ball(p, 2, 1), 0.5 + 1j),)),
        [GermTerm("0", Fraction(1, 2), ram1, 0, 0.25, 2), GermTerm("inf", Fraction(-1), ur, 1, -2.0, 1)],
        "xi",
        (Fraction(0),),
    )
    g = AsymptoticMeasure.from_json(f.to_json())
    for x in (Fraction(2), Fraction(50), Fraction(1, 125), Fraction(75)):
        assert abs(g.density(x) - f.density(x)) < 1e-15
    sh = AsymptoticMeasure(p, ShellMeasure(p, 1, {0: np.arange(4) + 1j}), [], "zeta", ())
    back = AsymptoticMeasure.from_json(sh.to_json())
    assert abs(back.density(Fraction(3)) - sh.density(Fraction(3))) < 1e-15
