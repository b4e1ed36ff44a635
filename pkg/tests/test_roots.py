import time
from fractions import Fraction

import pytest

from padic_rtf.errors import InvalidSubset, ZeroRoot
from padic_rtf.roots import (
    PARAMETRIC,
    ROW_LABELS,
    RootSystem,
    full_table,
    pair_coroot,
    row_by_label,
    standard_cartan,
    symbolic_dependence,
    two_rho_P,
)


def test_full_table_matches_expected():
    checks = full_table()
    assert len({c.label for c in checks}) == 10
    bad = [(c.label, c.n, c.mismatches) for c in checks if not c.ok]
    assert not bad


def test_table_is_fast():
    t = time.perf_counter()
    full_table()
    assert time.perf_counter() - t < 1.0


@pytest.mark.parametrize("kind,n", [("A", 3), ("B", 3), ("C", 4), ("D", 4), ("F", 4), ("G", 2)])
def test_cartan_matrices(kind, n):
    rs = RootSystem(kind, n)
    assert (rs.cartan() == standard_cartan(kind, n)).all()


@pytest.mark.parametrize("kind,n,count", [("A", 3, 6), ("B", 3, 9), ("C", 3, 9), ("D", 4, 12), ("F", 4, 24), ("G", 2, 6)])
def test_positive_root_counts(kind, n, count):
    assert len(RootSystem(kind, n).positive_roots()) == count


def test_two_rho_rank_one():
    rs = RootSystem("A", 1)
    assert two_rho_P(rs, []) == rs.simple[0]


def test_two_rho_borel_of_a2():
    rs = RootSystem("A", 2)
    assert rs.coefficients(two_rho_P(rs, [])) == (2, 2)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_two_rho_of_the_middle_parabolic(n):
    rs = RootSystem("A", n)
    got = rs.coefficients(two_rho_P(rs, range(1, n - 1)))
    assert got == (n,) * n


def test_pairing_examples():
    g = (1, -1, 0)
    assert pair_coroot(g, g) == 2
    assert pair_coroot((0, 0, 1), g) == 0
    rs = RootSystem("D", 2)
    gamma = rs.vector((1, 1))
    assert pair_coroot(gamma, gamma) == 2


def test_errors():
    with pytest.raises(InvalidSubset):
        two_rho_P(RootSystem("A", 2), [2])
    with pytest.raises(ZeroRoot):
        pair_coroot((1, 0), (0, 0))


def test_named_rows():
    a1 = row_by_label("A1")
    assert (a1.s1, a1.s2, a1.L) == (Fraction(1, 2), Fraction(1, 2), "L(Std,1/2)^2")
    b2 = row_by_label("Bn", 2)
    assert (b2.s1, b2.s2) == (Fraction(3, 2), Fraction(1, 2))
    d2 = row_by_label("D2")
    assert (d2.s0, d2.d1, d2.dm1) == (1, 3, 3)
    assert row_by_label("F4").L == "L(Std,11/2)L(Std,5/2)"
    assert row_by_label("G2").L == "L(Std,5/2)L(Std,1/2)"
    assert row_by_label("B3''").L == "L(Ad,3)"


def _all_rows():
    for label in ROW_LABELS:
        for n in PARAMETRIC.get(label, (None,)):
            yield row_by_label(label, n)


def test_row_identities():
    for row in _all_rows():
        assert all(x == 0 for x in row.levi_pairings), row.label
        if row.root_type == "T":
            assert row.s1 + row.s2 == Fraction(row.dimX, 2)
            assert row.s1 - row.s2 == Fraction(row.dm1, 2) - 1
            assert row.gamma_is_root
        else:
            assert row.pairing_2rho + 1 == row.dimX
            assert row.s0 == Fraction(row.dimX - 1, 2)


@pytest.mark.parametrize("label", sorted(PARAMETRIC))
def test_symbolic_dependence_on_n(label):
    assert symbolic_dependence(label) == {}


def test_type_g_roots_split_into_equal_length_orthogonal_roots():
    # stated invariant checked literally; the B3'' root splits only as long + short
    for row in _all_rows():
        if row.root_type == "G":
            assert row.gamma_split_equal_length, row.label
