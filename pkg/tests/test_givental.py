from fractions import Fraction

import pytest

from conftest import load
from hodgeft.frobenius import AlgebraError, HodgeAlgebra, identity, trivial_algebra
from hodgeft.givental import (PointPotential, RMatrixSeries, TftPotential, exp_flow,
                              exp_op_apply, gminus_z_check, hodge_potential,
                              leaf_operator_apply, q_closed_check, quantize,
                              tft_potential)
from hodgeft.series import TruncationWindow, tabulate
from hodgeft.verify import tautological_checks


def poly_algebra():
    z = [[Fraction(0)] * 3 for _ in range(3)]
    mult = [[[Fraction(int(k == i + j)) for k in range(3)] for j in range(3)]
            for i in range(3)]
    return HodgeAlgebra(["1", "x", "x2"], [0, 0, 0], mult,
                        [Fraction(0), Fraction(0), Fraction(1)], z, z, z)


def test_trivial_algebra_gives_point():
    W = TruncationWindow(2, 6, 4)
    assert hodge_potential(trivial_algebra(), W) == tabulate(PointPotential(), W)


def test_tft_genus_zero_is_triple_pairing(fixture8):
    A = fixture8
    Z = tft_potential(A, TruncationWindow(0, 3, 0))
    for (g, key), value in Z.items():
        (_, i), (_, j), (_, k) = key
        prod = A.mul(A.mul(A.basis(i), A.basis(j)), A.basis(k))
        assert value == A.integrate(prod)
    assert Z.entries


@pytest.mark.parametrize("make, sdim", [
    (trivial_algebra, 1), (poly_algebra, 3), (lambda: load("exterior2"), 0),
    (lambda: load("fixture8"), 0),
])
def test_tft_genus_one_is_superdimension(make, sdim):
    # <tau_1(1)>_1 = sdim / 24
    Z = TftPotential(make())
    assert Z.coefficient(1, ((1, 0),)) == Fraction(sdim, 24)


def test_r_matrix_validation(fixture8):
    A = fixture8
    s = A.s
    one = identity(s)
    RMatrixSeries(A, {1: one})
    with pytest.raises(AlgebraError, match="skew"):
        RMatrixSeries(A, {2: one})
    with pytest.raises(AlgebraError, match="start at 1"):
        RMatrixSeries(A, {0: one})
    with pytest.raises(AlgebraError, match="even"):
        RMatrixSeries(A, {1: A.Gm})
    bad = [row[:] for row in one]
    bad[1][2] = Fraction(1)
    bad[2][1] = Fraction(0)
    with pytest.raises(AlgebraError):
        RMatrixSeries(A, {1: bad})


def test_random_r_matrix_is_seeded(fixture8):
    R1 = RMatrixSeries.random(fixture8, 3)
    R2 = RMatrixSeries.random(fixture8, 3)
    assert R1.terms == R2.terms
    assert RMatrixSeries.from_json(fixture8, R1.to_json()).terms == R1.terms
    assert fixture8.symmetry_type(R1.terms[1]) == "symmetric"
    assert fixture8.symmetry_type(R1.terms[2]) == "skew"


@pytest.mark.parametrize("terms, inner_cap", [
    ({1: [[Fraction(2)]]}, 7),
    ({1: [[Fraction(1)]], 3: [[Fraction(-1)]]}, 16),
])
def test_inverse_r_matrix_undoes_action(terms, inner_cap):
    A = trivial_algebra()
    W = TruncationWindow(1, 4, 3)
    X = quantize(A, terms)
    Y = quantize(A, {l: [[-x for x in row] for row in m] for l, m in terms.items()})
    back = tabulate(exp_flow(Y, exp_flow(X, PointPotential(), inner_cap), 7), W)
    assert back == tabulate(PointPotential(), W)


def test_r_action_changes_point():
    R = RMatrixSeries(trivial_algebra(), {1: [[Fraction(1)]]})
    W = TruncationWindow(1, 4, 2)
    image = exp_op_apply(R, PointPotential(), W)
    assert image != tabulate(PointPotential(), W)
    assert all(r.passed for r in tautological_checks(image, [[1]]))


def test_givental_invariance_rank_one_seed():
    A = trivial_algebra()
    R = RMatrixSeries.random(A, 0, l_max=3)
    image = exp_op_apply(R, PointPotential(), TruncationWindow(2, 5, 3))
    for rep in tautological_checks(image, A.eta):
        assert rep.passed, str(rep)


def test_hodge_potential_exterior_algebra(exterior2):
    W = TruncationWindow(1, 4, 2)
    H = hodge_potential(exterior2, W)
    assert H == tft_potential(exterior2, W)
    for rep in tautological_checks(H, exterior2.eta):
        assert rep.passed, str(rep)


@pytest.mark.parametrize("name", ["fixture8", "exterior2", "trivial"])
def test_inputs_pass_on_axiom_passing_fixtures(name):
    A = load(name)
    W = TruncationWindow(1, 4, 2)
    assert q_closed_check(A, W) == (True, None)
    assert gminus_z_check(A, W) == (True, None)
    assert leaf_operator_apply(A.Q, TftPotential(A), W, A).entries == {}


def test_q_mutation_breaks_q_closedness():
    ok, (g, key, value) = q_closed_check(load("fixture8_q"), TruncationWindow(1, 4, 2))
    assert not ok and value != 0


def test_gminus_mutation_breaks_gminus_z():
    ok, (g, key, value) = gminus_z_check(load("fixture8_gm"), TruncationWindow(1, 4, 2))
    assert not ok and value != 0


def test_fixture8_hodge_potential_small_window(fixture8):
    H = hodge_potential(fixture8, TruncationWindow(1, 5, 2))
    for rep in tautological_checks(H, fixture8.eta, indices=fixture8.h0_indices()):
        assert rep.passed, str(rep)


@pytest.mark.parametrize("make", [poly_algebra, lambda: load("exterior2")],
                         ids=["even", "graded"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_invariance_for_higher_rank(make, seed):
    """Even-degree terms and odd-odd Casimir entries both enter here."""
    A = make()
    R = RMatrixSeries.random(A, seed, l_max=3)
    image = exp_op_apply(R, TftPotential(A), TruncationWindow(1, 4, 2))
    for rep in tautological_checks(image, A.eta):
        assert rep.passed, str(rep)
