import random
from fractions import Fraction

import pytest

from bidarboux.chartfile import load_fixture
from bidarboux.poisson import (
    CasimirPrecheckFailed,
    NotAntisymmetric,
    PoissonPencil,
    PoissonStructure,
    SingularGroupElement,
    bracket,
    body_rank,
    check_antisymmetry,
    check_jacobi,
    check_mutual_involutivity,
    check_symmetrized_jacobi,
    gl2_rotate,
    is_casimir,
    jacobi_spot_check,
    triplectic_chart,
)
from bidarboux.superalgebra import SuperPoly
from bidarboux.triplectic import canonical_chart, chart_from_EF


def test_canonical_bracket_signs():
    tc = canonical_chart(1)
    S = tc.pencil.first
    q, p = tc.gen("q1"), tc.gen("p1")
    assert bracket(q, p, S) == SuperPoly.constant(tc.table, 1)
    assert bracket(p, q, S) == SuperPoly.constant(tc.table, -1)


def test_odd_bracket_sign():
    # eps = 1, q even and p odd: {p, q} = -(-1)^{(0+1)(1+1)} {q, p} = -1
    tc = canonical_chart(1, 1, [0])
    assert tc.table["p1"].parity == 1
    S = tc.pencil.first
    assert bracket(tc.gen("p1"), tc.gen("q1"), S) == SuperPoly.constant(tc.table, -1)
    # odd q and odd bracket: both arguments odd-shifted to even, so plain antisymmetry
    tc = canonical_chart(1, 1, [1])
    S = tc.pencil.first
    assert bracket(tc.gen("q1"), tc.gen("q1"), S).is_zero()


def test_bracket_is_graded_antisymmetric_on_functions():
    rng = random.Random(3)
    tc = chart_from_EF(2, 1, [1, 0], E=[["1 + p1", "0"], ["0", "1"]])
    names = tc.chart.names
    from bidarboux.poisson import random_poly

    for _ in range(10):
        f = random_poly(tc.table, names, rng, 2, 3, parity=rng.randint(0, 1))
        h = random_poly(tc.table, names, rng, 2, 3, parity=rng.randint(0, 1))
        if f.is_zero() or h.is_zero():
            continue
        s = -1 if ((f.parity() + 1) * (h.parity() + 1)) % 2 else 1
        for S in (tc.pencil.first, tc.pencil.second):
            assert bracket(f, h, S) == -bracket(h, f, S) * s


def test_jacobi_examples():
    assert check_symmetrized_jacobi(canonical_chart(2).pencil).passed
    ex = load_fixture("example3d").pencil
    assert check_jacobi(ex.first).passed and check_jacobi(ex.second).passed
    assert check_symmetrized_jacobi(ex).passed


def test_q_dependent_structure_fails_jacobi():
    tc = chart_from_EF(1, 0, None, E=[["q1"]])
    rep = check_symmetrized_jacobi(tc.pencil)
    assert not rep.passed
    assert any(not v["residual"].is_zero() for v in rep.violations)


def test_antisymmetry_enforced():
    ch = triplectic_chart(1)
    with pytest.raises(NotAntisymmetric):
        PoissonStructure(ch, {("q1", "p1"): 1, ("p1", "q1"): 1})
    assert check_antisymmetry(PoissonStructure(ch, {("q1", "p1"): 1})).passed


def test_casimirs():
    tc = canonical_chart(1)
    S1 = tc.pencil.first
    assert is_casimir(tc.gen("c1"), S1)
    assert not is_casimir(tc.gen("q1"), S1)
    assert is_casimir(1, S1)
    assert is_casimir(1, tc.pencil.second)


def test_mutual_involutivity():
    tc = canonical_chart(2)
    gens = lambda names: [tc.gen(x) for x in names]  # noqa: E731
    assert check_mutual_involutivity(tc.pencil, gens(tc.p), gens(tc.c)).passed
    ex = load_fixture("example3d").triplectic()
    assert check_mutual_involutivity(ex.pencil, [ex.gen("p1")], [ex.gen("c1")]).passed


def test_injected_involutivity_violation():
    tc = canonical_chart(1)
    S2 = PoissonStructure(tc.chart, {("q1", "c1"): 1, ("p1", "c1"): 1})
    P = PoissonPencil(tc.pencil.first, S2)
    with pytest.raises(CasimirPrecheckFailed):
        check_mutual_involutivity(P, [tc.gen("p1")], [tc.gen("c1")])
    rep = check_mutual_involutivity(P, [tc.gen("p1")], [tc.gen("c1")], precheck=False)
    assert not rep.passed


def test_gl2_rotation_examples():
    P = canonical_chart(1).pencil
    assert gl2_rotate(P, [[1, 0], [0, 1]]) == P
    R = gl2_rotate(P, [[1, 1], [0, 1]])
    assert R.first == P.first
    assert R.second == P.first.scaled(-1) + P.second
    assert check_symmetrized_jacobi(R).passed
    R = gl2_rotate(P, [[3, 0], [0, 3]])
    assert R.first == P.first.scaled(Fraction(1, 3))
    assert R.second == P.second.scaled(Fraction(1, 3))
    with pytest.raises(SingularGroupElement):
        gl2_rotate(P, [[1, 2], [2, 4]])


def test_gl2_rotation_is_an_action():
    rng = random.Random(5)
    P = load_fixture("example3d").pencil
    for _ in range(5):
        g = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        h = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        if g[0][0] * g[1][1] == g[0][1] * g[1][0] or h[0][0] * h[1][1] == h[0][1] * h[1][0]:
            continue
        hg = [[sum(h[i][k] * g[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
        assert gl2_rotate(gl2_rotate(P, g), h) == gl2_rotate(P, hg)


def test_body_rank():
    tc = canonical_chart(1)
    assert body_rank(tc.pencil.first, {"p1": 5, "c1": -2}) == 2
    assert body_rank(PoissonStructure(tc.chart, {}), {}) == 0
    ex = load_fixture("example3d").pencil
    assert body_rank(ex.second, {"p1": 1, "c1": 1}) == 2


def test_spot_check_on_random_functions():
    rep = jacobi_spot_check(load_fixture("example3d").pencil, random.Random(1), trials=3)
    assert rep.passed
