from fractions import Fraction

import pytest

from conftest import load
from hodgeft.frobenius import AlgebraError, identity, trivial_algebra
from hodgeft.givental import PointPotential, RMatrixSeries, tft_potential
from hodgeft.series import LogPotential, TruncationWindow, tabulate
from hodgeft.verify import (CheckReport, check_3g2, check_dilaton, check_equivalence,
                            check_givental_invariance, check_string, check_trr0,
                            tautological_checks, twelfth_vanishes)

W = TruncationWindow(2, 5, 4)


@pytest.fixture(scope="module")
def point_table():
    return tabulate(PointPotential(), W)


def _perturbed(F, g, key, delta=Fraction(1)):
    entries = dict(F.entries)
    entries[(g, key)] = entries.get((g, key), 0) + delta
    return LogPotential(entries, F.window, F.parity, F.total_parity)


def test_point_table_passes_everything(point_table):
    reports = tautological_checks(point_table, [[1]])
    assert [r.name for r in reports] == ["string", "dilaton", "trr0", "3g2"]
    for rep in reports:
        assert rep.passed and rep.checked > 0


def test_string_detects_perturbation(point_table):
    bad = _perturbed(point_table, 1, ((0, 0), (2, 0)))
    rep = check_string(bad, [[1]])
    assert not rep.passed
    assert (1, ((0, 0), (2, 0))) in [(g, key) for g, key, _, _ in rep.failures]


def test_dilaton_detects_perturbation(point_table):
    bad = _perturbed(point_table, 2, ((1, 0), (2, 0), (3, 0)))
    rep = check_dilaton(bad)
    assert not rep.passed
    assert (2, ((1, 0), (2, 0), (3, 0))) in [(g, k) for g, k, _, _ in rep.failures]


def test_trr0_detects_perturbation(point_table):
    bad = _perturbed(point_table, 0, ((0, 0),) * 4 + ((1, 0),))
    assert not check_trr0(bad, [[1]]).passed


def test_3g2_injected_failure():
    F = LogPotential({(0, ((0, 0), (0, 0), (1, 0))): 5}, TruncationWindow(1, 4, 2), (0,))
    rep = check_3g2(F)
    assert not rep.passed
    assert rep.failures == [(0, ((0, 0), (0, 0), (1, 0)), Fraction(5), Fraction(0))]


def test_trr0_is_orientation_sensitive(exterior2):
    # the graded pairing is not symmetric: int uv = 1 = -int vu
    A = exterior2
    Z = tft_potential(A, TruncationWindow(0, 5, 2))
    assert check_trr0(Z, A.eta).passed
    transposed = [list(col) for col in zip(*A.eta)]
    assert transposed != A.eta
    assert not check_trr0(Z, transposed).passed


def test_graded_tft_checks(exterior2, fixture8):
    for A in (exterior2, fixture8):
        Z = tft_potential(A, TruncationWindow(1, 4, 2))
        for rep in tautological_checks(Z, A.eta):
            assert rep.passed, str(rep)


def test_report_formatting():
    rep = CheckReport("demo")
    rep.add(1, ((0, 0), (2, 1)), Fraction(1, 2), Fraction(0))
    rep.add(0, ((0, 0),) * 3, 1, 1)
    assert rep.checked == 2 and not rep.passed
    assert str(rep).splitlines() == ["demo: FAIL (2 identities, 1 failing)",
                                     "  g=1 (0,1)(2,2): 1/2 != 0"]


def test_equivalence_on_point_and_small_fixture(trivial, fixture8):
    assert check_equivalence(trivial, TruncationWindow(2, 5, 3)).passed
    rep = check_equivalence(fixture8, TruncationWindow(1, 4, 2))
    assert rep.passed and rep.checked > 0


def test_twelfth_identity_on_mutant():
    rep = twelfth_vanishes(load("fixture8_a5"))
    assert not rep.passed
    assert twelfth_vanishes(load("fixture8")).passed


def test_givental_invariance_rejects_bad_r():
    A = trivial_algebra()
    with pytest.raises(AlgebraError):
        check_givental_invariance(PointPotential(), RMatrixSeries(A, {2: identity(1)}),
                                  TruncationWindow(1, 4, 2))


def test_givental_invariance_graded_tft(exterior2):
    R = RMatrixSeries.random(exterior2, 4, l_max=2)
    from hodgeft.givental import TftPotential
    rep = check_givental_invariance(TftPotential(exterior2), R, TruncationWindow(1, 4, 2))
    assert rep.passed, str(rep)
