import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bidarboux.liegroup import (
    ETA,
    NotUnitDeterminant,
    T_SMALL,
    adjointMap,
    det2,
    det3,
    hyperbolic_point,
    ident,
    inv2,
    isLorentz,
    isRestrictedLorentz,
    lieAlgebraCheck,
    minkowski_norm,
    mmul,
    paraQuaternionTable,
    random_sl2,
    series_agreement,
    t_coordinates,
    to_matrix,
)


def test_para_quaternion_examples():
    rep = paraQuaternionTable()
    assert rep.passed
    assert mmul(T_SMALL[1], T_SMALL[2]) == T_SMALL[3]
    assert mmul(T_SMALL[2], T_SMALL[2]) == [[-1, 0], [0, -1]]
    assert mmul(T_SMALL[1], T_SMALL[1]) == ident(2)


def test_lie_algebra():
    assert lieAlgebraCheck().passed


def test_lorentz_examples():
    assert isLorentz(ident(3)) and isRestrictedLorentz(ident(3))
    boost = [[Fraction(17, 8), Fraction(-15, 8), 0], [Fraction(-15, 8), Fraction(17, 8), 0], [0, 0, 1]]
    assert isLorentz(boost) and isRestrictedLorentz(boost)
    assert isLorentz(ETA) and not isRestrictedLorentz(ETA)
    assert not isLorentz([[2, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_adjoint_examples():
    assert adjointMap(ident(2)) == ident(3)
    assert adjointMap([[-1, 0], [0, -1]]) == ident(3)
    Lam = adjointMap([[2, 0], [0, Fraction(1, 2)]])
    assert [Lam[a][0] for a in range(3)] == [Fraction(17, 8), Fraction(-15, 8), 0]
    assert Lam[0][0] ** 2 - Lam[1][0] ** 2 == 1
    with pytest.raises(NotUnitDeterminant):
        adjointMap([[2, 0], [0, 1]])


def test_vector_matrix_dictionary():
    x = [Fraction(1), Fraction(2), Fraction(-3)]
    m = to_matrix(x)
    assert det2(m) == -minkowski_norm(x)
    assert t_coordinates(m)[1:] == x


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_adjoint_is_restricted_lorentz(rng):
    g = random_sl2(rng)
    assert det2(g) == 1
    L = adjointMap(g)
    assert isRestrictedLorentz(L)
    assert adjointMap([[-x for x in row] for row in g]) == L


@settings(max_examples=20, deadline=None)
@given(st.randoms(use_true_random=False))
def test_adjoint_homomorphism(rng):
    g, h = random_sl2(rng), random_sl2(rng)
    assert adjointMap(mmul(g, h)) == mmul(adjointMap(g), adjointMap(h))
    assert adjointMap(inv2(g)) == mmul(ident(3), adjointMap(inv2(g)))
    assert mmul(adjointMap(g), adjointMap(inv2(g))) == ident(3)


def test_adjoint_preserves_minkowski_norm():
    rng = random.Random(3)
    for _ in range(10):
        g = random_sl2(rng)
        x = [Fraction(rng.randint(-5, 5)) for _ in range(3)]
        L = adjointMap(g)
        y = [sum(L[a][b] * x[b] for b in range(3)) for a in range(3)]
        assert minkowski_norm(y) == minkowski_norm(x)
        assert det3(L) == 1


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_series_agreement(alpha):
    assert series_agreement(alpha, 6)


def test_hyperbolic_point():
    h = hyperbolic_point(2)
    assert h["cosh"] ** 2 - h["sinh"] ** 2 == 1
