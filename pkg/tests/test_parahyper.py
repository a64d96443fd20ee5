import random
from fractions import Fraction

import pytest
import sympy

from bidarboux.chartfile import load_fixture
from bidarboux.liegroup import adjointMap, inv2
from bidarboux.parahyper import (
    ESingular,
    base_of,
    biDarbouxStructures,
    buildJ,
    buildPfromE,
    buildSigma,
    check_obata,
    check_para_hypercomplex,
    chiral_nijenhuis,
    gl2_rotate_structures,
    kron_identity,
    nijenhuis,
    obataConnection,
    obataCurvature,
    structures_match_canonical,
    t_coordinates,
)
from bidarboux.poisson import random_poly
from bidarboux.superalgebra import RationalFn, simplify
from bidarboux.triplectic import canonical_chart, chart_from_EF

from oracles import sympy_zero, to_sympy


def consts(m):
    return [[RationalFn.lift(x).constant_term() for x in row] for row in m]


def test_two_dimensional_example():
    tc = chart_from_EF(1, 0, None, E=[["1"]])
    base = base_of(tc)
    sig, P = buildSigma(base), buildPfromE(base, tc.E())
    J = buildJ(sig, P)
    assert consts(sig.components) == [[1, 0], [0, -1]]
    assert consts(P.components) == [[0, 1], [1, 0]]
    assert consts(J.components) == [[0, -1], [1, 0]]
    assert check_para_hypercomplex(sig, P, J, point={}).passed


def test_P_for_counterexample():
    ex = load_fixture("example3d").triplectic()
    base = base_of(ex)
    P = buildPfromE(base, ex.E())
    p, c = sympy.symbols("p1 c1")
    assert sympy_zero(to_sympy(P.components[1][0]) - (p + c))
    assert sympy_zero(to_sympy(P.components[0][1]) - 1 / (p + c))
    assert simplify(P.components[0][1] * P.components[1][0]) == base.const(1)
    rep = check_para_hypercomplex(buildSigma(base), P, point={"p1": 1, "c1": 1})
    assert rep.passed
    assert rep.details["pole_locus"] == ["p1 + c1 = 0"]


def test_singular_E():
    tc = canonical_chart(2)
    base = base_of(tc)
    z = base.const(0)
    with pytest.raises(ESingular):
        buildPfromE(base, [[z, z], [z, z]])


@pytest.mark.parametrize("n,eps,par", [(2, 0, [0, 0]), (2, 1, [0, 1]), (3, 0, [1, 0, 0])])
def test_para_hypercomplex_on_canonical(n, eps, par):
    base = base_of(canonical_chart(n, eps, par))
    sig = buildSigma(base)
    P = buildPfromE(base, canonical_chart(n, eps, par).E())
    assert check_para_hypercomplex(sig, P, point={}).passed
    assert structures_match_canonical(base)


def test_nijenhuis_examples():
    ex = load_fixture("example3d").triplectic()
    base = base_of(ex)
    assert nijenhuis(buildSigma(base)).is_zero()
    assert nijenhuis(buildPfromE(base, ex.E())).is_zero()
    bad = chart_from_EF(2, 0, None, E=[["1", "0"], ["p1", "1"]])
    b2 = base_of(bad)
    N = nijenhuis(buildPfromE(b2, bad.E()))
    assert N.nonzero()
    P = buildPfromE(b2, bad.E())
    assert any(not chiral_nijenhuis(N, P, s).is_zero() for s in (1, -1))


def test_nijenhuis_vanishes_on_corpus(factorizable):
    for m in factorizable:
        if m.n > 2:
            continue
        base = base_of(m.chart)
        assert nijenhuis(buildPfromE(base, m.chart.E())).is_zero(), m.name


def test_obata_examples():
    conn = obataConnection(canonical_chart(2))
    assert not conn.gamma
    assert obataCurvature(conn)[1]
    ex = load_fixture("example3d").triplectic()
    conn = obataConnection(ex)
    p, c = sympy.symbols("p1 c1")
    assert sympy_zero(to_sympy(conn.christoffel(0, 0, 0)) - 1 / (p + c))
    assert sympy_zero(to_sympy(conn.christoffel(1, 1, 1)) + 1 / (p + c))
    assert check_obata(conn).passed
    curv, flat = obataCurvature(conn)
    assert not flat
    tc = chart_from_EF(1, 0, None, E=[["(1+p1)*(2+c1)"]])
    conn = obataConnection(tc)
    assert not conn.christoffel(0, 0, 0).depends_on("c1")
    assert sympy_zero(to_sympy(conn.christoffel(0, 0, 0)) - 1 / (1 + p))
    assert obataCurvature(conn)[1]


def test_obata_on_mixed_parity_corpus(factorizable):
    for m in factorizable:
        conn = obataConnection(m.chart)
        assert check_obata(conn).passed, m.name
        assert obataCurvature(conn)[1], m.name


def _random_e(rng, tc):
    p, c = tc.gen("p1"), tc.gen("c1")
    if rng.random() < 0.5:
        a = random_poly(tc.table, ["p1"], rng, 2, 2) + 3
        b = random_poly(tc.table, ["c1"], rng, 2, 2) + 2
        return a * b
    return random_poly(tc.table, ["p1", "c1"], rng, 3, 3) + 5 + p * c


def test_flatness_against_symbolic_oracle():
    rng = random.Random(21)
    p, c = sympy.symbols("p1 c1")
    for _ in range(12):
        tc = canonical_chart(1)
        e = _random_e(rng, tc)
        tc = chart_from_EF(1, 0, None, E=[[e]], chart=tc.chart)
        conn = obataConnection(tc)
        es = to_sympy(e)
        want_pp = sympy.diff(sympy.log(es), p)
        want_cc = -sympy.diff(sympy.log(es), c)
        assert sympy_zero(to_sympy(conn.christoffel(0, 0, 0)) - want_pp)
        assert sympy_zero(to_sympy(conn.christoffel(1, 1, 1)) - want_cc)
        oracle_flat = sympy_zero(sympy.diff(sympy.log(es), p, c))
        assert obataCurvature(conn)[1] == oracle_flat


def test_bi_darboux_structures():
    s = biDarbouxStructures(1)
    assert s["P"] == [[0, 1], [1, 0]] and s["J"] == [[0, -1], [1, 0]] and s["Sigma"] == [[1, 0], [0, -1]]
    s = biDarbouxStructures(2)
    I = s["Id"]
    neg = [[-x for x in row] for row in I]
    from bidarboux.liegroup import mmul
    assert mmul(s["P"], s["P"]) == I
    assert mmul(s["Sigma"], s["Sigma"]) == I
    assert mmul(s["J"], s["J"]) == neg
    assert s["P"][0][2] == 1 and s["P"][1][3] == 1 and s["P"][0][3] == 0


def test_gl2_rotation_matches_adjoint_map():
    rng = random.Random(2)
    from bidarboux.liegroup import random_sl2
    for g in [[[1, 1], [0, 1]]] + [random_sl2(rng) for _ in range(5)]:
        rot = gl2_rotate_structures(g)
        Lam = adjointMap(inv2(g))
        for key, b in (("P", 0), ("J", 1), ("Sigma", 2)):
            assert rot[key][0] == 0
            assert rot[key][1:] == [Lam[a][b] for a in range(3)]


def test_gl2_rotation_preserves_relations():
    g = [[1, 1], [0, 1]]
    rot = gl2_rotate_structures(g)
    from bidarboux.liegroup import T_SMALL, madd, mmul, mscale
    mats = {}
    for key, coords in rot.items():
        m = [[0, 0], [0, 0]]
        for a in range(4):
            m = madd(m, mscale(T_SMALL[a], coords[a]))
        mats[key] = m
    assert mmul(mats["P"], mats["P"]) == [[1, 0], [0, 1]]
    assert mmul(mats["J"], mats["J"]) == [[-1, 0], [0, -1]]
    assert madd(mmul(mats["P"], mats["Sigma"]), mmul(mats["Sigma"], mats["P"])) == [[0, 0], [0, 0]]
    assert kron_identity(g, 1) == [[1, 1], [0, 1]]
    assert t_coordinates([[1, 1], [0, 1]]) == [1, Fraction(1, 2), Fraction(-1, 2), 0]
