from fractions import Fraction

import pytest

from hodgeft.psi import psi_integral, psi_table
from hodgeft.series import UnstableKey
from oracles import dvv, genus0_closed


@pytest.mark.parametrize("g, d, value", [
    (0, (0, 0, 0), Fraction(1)),
    (0, (2, 0, 0, 0, 0), Fraction(1)),
    (0, (1, 1, 0, 0, 0), Fraction(2)),
    (1, (1,), Fraction(1, 24)),
    (2, (4,), Fraction(1, 1152)),
    (1, (0,), Fraction(0)),
])
def test_reference_values(g, d, value):
    assert psi_integral(g, d) == value


def test_one_point_formula():
    # <tau_{3g-2}>_g = 1 / (24^g g!)
    fact = 1
    for g in range(1, 5):
        fact *= g
        assert psi_integral(g, (3 * g - 2,)) == Fraction(1, 24 ** g * fact)


def test_genus_zero_closed_form():
    for g, d, v in psi_table(0, 8):
        assert v == genus0_closed(d)


def test_table_matches_independent_recursion():
    table = psi_table(3, 6)
    assert len(table) > 200
    for g, d, v in table:
        assert v == dvv(g, d), (g, d)


def test_unstable_and_invalid():
    with pytest.raises(UnstableKey):
        psi_integral(0, (0, 0))
    with pytest.raises(UnstableKey):
        psi_integral(1, ())
    with pytest.raises(ValueError):
        psi_integral(0, (-1, 0, 0, 2))


def test_string_and_dilaton_on_table():
    for g, d, _ in psi_table(2, 6):
        n = len(d)
        if n >= 1:
            lowered = sum(psi_integral(g, d[:j] + (d[j] - 1,) + d[j + 1:])
                          for j in range(n) if d[j])
            assert psi_integral(g, (0,) + d) == lowered
            assert psi_integral(g, (1,) + d) == (2 * g - 2 + n) * psi_integral(g, d)
