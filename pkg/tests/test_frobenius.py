import itertools
import json
from fractions import Fraction

import pytest

from conftest import data_path, load
from hodgeft.frobenius import (AlgebraError, HodgeAlgebra, check_axioms, determinant,
                               identity, inverse, matmul, operator_parity, rank,
                               supertrace, trivial_algebra)

FAILING = {
    "fixture8": set(),
    "exterior2": set(),
    "trivial": set(),
    "fixture8_a4": {"A2", "A4"},
    "fixture8_a5": {"A2", "A5"},
    "fixture8_q": {"A2", "A6"},
    "fixture8_gm": {"A2", "A4", "A6"},
    "broken": {"A7"},
}


@pytest.mark.parametrize("name", sorted(FAILING))
def test_fixture_axiom_reports(name):
    rep = check_axioms(load(name))
    assert {k for k, ok in rep.results.items() if not ok} == FAILING[name]
    for k in FAILING[name]:
        assert rep.witness[k] is not None


def test_linear_algebra_helpers():
    m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    assert matmul(m, inverse(m)) == identity(2)
    assert determinant(m) == 1
    assert rank([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]) == 1
    with pytest.raises(Exception):
        inverse([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]])
    par = (0, 1)
    assert operator_parity(identity(2), par) == 0
    assert operator_parity([[0, 1], [0, 0]], par) == 1
    assert operator_parity([[0, 0], [0, 0]], par) is None
    with pytest.raises(AlgebraError, match="homogeneous"):
        operator_parity([[1, 1], [0, 0]], par)
    assert supertrace(identity(2), par) == 0


def test_fixture8_structure(fixture8):
    A = fixture8
    assert A.h0_indices() == [0, 1, 2, 3]
    assert A.parity[A.h0_indices()[-1] + 1:] != ()
    # the unit acts as identity and the pairing is nondegenerate
    for i in range(A.s):
        assert A.mul(A.basis(0), A.basis(i)) == A.basis(i)
    assert determinant(A.eta) != 0
    # supercommutativity
    for i, j in itertools.product(range(A.s), repeat=2):
        sign = -1 if A.parity[i] and A.parity[j] else 1
        assert A.mul(A.basis(i), A.basis(j)) == [sign * x for x in A.mul(A.basis(j), A.basis(i))]
    assert A.symmetry_type(A.GmGp()) == "symmetric"


def test_exterior_algebra_pairing(exterior2):
    A = exterior2
    u, v = A.basis(1), A.basis(2)
    assert A.integrate(A.mul(u, v)) == 1
    assert A.integrate(A.mul(v, u)) == -1
    assert A.mul(u, u) == [0] * 4


def test_json_roundtrip_and_hash(fixture8):
    again = HodgeAlgebra.from_json(json.loads(fixture8.canonical_text()))
    assert again.canonical_text() == fixture8.canonical_text()
    assert again.content_hash() == fixture8.content_hash()
    assert fixture8.content_hash() != load("fixture8_q").content_hash()


def test_bivector_roundtrip(fixture8):
    A = fixture8
    op = A.GmGp()
    assert A.operator_of(A.bivector_of(op)) == op


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d["basis"].__setitem__(0, {"name": "1", "parity": 1}), "unit"),
    (lambda d: d["products"].append(["th", "z", {"th": "1"}]), "parity"),
    (lambda d: d["integral"].__setitem__("th", "1"), "even"),
    (lambda d: d["Q"].append(["1", "w", "1"]), "homogeneous"),
    (lambda d: d["products"].append(["th", "zz", {"w": "1"}]), "unknown"),
    (lambda d: d["integral"].__setitem__("w", "1/0"), "rational"),
])
def test_malformed_algebras(mutate, message):
    with open(data_path("fixture8")) as fh:
        data = json.load(fh)
    mutate(data)
    with pytest.raises(AlgebraError, match=message):
        HodgeAlgebra.from_json(data)


def test_load_reports_json_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"basis": [\n  oops]}')
    with pytest.raises(AlgebraError, match="line 2"):
        HodgeAlgebra.load(path)


def test_trivial_algebra():
    A = trivial_algebra()
    assert A.s == 1 and A.eta == [[1]]
    assert check_axioms(A).passed
