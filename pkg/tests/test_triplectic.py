import random
from fractions import Fraction

import pytest

from bidarboux.chartfile import load_fixture
from bidarboux.corpus import triangular_map
from bidarboux.expression import parse_rational
from bidarboux.forms import form_name
from bidarboux.poisson import check_symmetrized_jacobi, random_poly
from bidarboux.superalgebra import SuperPoly, simplify
from bidarboux.triplectic import (
    ESingular,
    F3Generator,
    NotSemiCanonical,
    ParaDolbeault,
    QDependent,
    apply_f3,
    bridge_to_chart,
    canonical_chart,
    chart_from_EF,
    check_bi_canonical,
    check_bi_darboux,
    check_closedness,
    check_differential_factorization,
    check_f3_laws,
    extract_EF,
    factorize,
    gauge_law_F,
    gauge_residual,
    integrate_jacobian,
    kill_f,
    presymplectic_data,
)


def P(tc, text):
    return parse_rational(text, tc.table)


def test_extract_examples():
    tc = canonical_chart(2)
    E, F = extract_EF(tc)
    assert E == [[1, 0], [0, 1]] or all(simplify(E[i][j]) == SuperPoly.constant(tc.table, int(i == j))
                                        for i in range(2) for j in range(2))
    assert all(x.is_zero() for row in F for x in row)
    ex = load_fixture("example3d").triplectic()
    E, F = extract_EF(ex)
    assert E[0][0] == P(ex, "p1 + c1") and F[0][0].is_zero()


def test_extract_rejects_bad_charts():
    with pytest.raises(QDependent):
        extract_EF(chart_from_EF(1, 0, None, E=[["q1"]]))
    with pytest.raises(ESingular):
        extract_EF(chart_from_EF(2, 0, None, E=[["1", "1"], ["1", "1"]]))
    tc = canonical_chart(1)
    from bidarboux.poisson import PoissonPencil, PoissonStructure
    from bidarboux.triplectic import TriplecticChart

    bad = PoissonStructure(tc.chart, {("q1", "c1"): 1, ("p1", "c1"): 1})
    with pytest.raises(NotSemiCanonical):
        extract_EF(TriplecticChart(PoissonPencil(tc.pencil.first, bad)))


def test_closedness_examples():
    ex = load_fixture("example3d").triplectic()
    rep = check_closedness(ex)
    assert rep.passed
    assert check_closedness(canonical_chart(2)).passed
    # dE^2_1/dp1 != dE^1_1/dp2
    bad = chart_from_EF(2, 0, None, E=[["1", "0"], ["p1", "1"]])
    assert not check_closedness(bad).passed


def test_closedness_odd_diagonal():
    # odd p: dE/dp must vanish along the diagonal, otherwise Jacobi breaks
    tc = chart_from_EF(1, 1, [0], E=[["2 + p1*c1"]])
    assert tc.table["p1"].parity == 1
    assert not check_closedness(tc).passed
    assert not check_symmetrized_jacobi(tc.pencil).passed


def test_factorize_examples():
    tc = chart_from_EF(1, 0, None, E=[["(1+p1)*(2+c1)"]])
    Pm, C = factorize(tc, base={"p1": 0, "c1": 0})
    assert Pm[0][0] == P(tc, "2 + 2*p1")
    assert simplify(C[0][0]) == P(tc, "1 + c1/2")
    ex = load_fixture("example3d").triplectic()
    assert factorize(ex, base={"p1": 1, "c1": 1}) is None
    Pm, C = factorize(canonical_chart(2), base={})
    one = SuperPoly.constant(canonical_chart(2).table, 1)
    assert Pm[0][0] == one and simplify(C[1][1]) == one


def test_factorization_independent_of_base_point():
    tc = chart_from_EF(1, 0, None, E=[["(1+p1)*(2+c1)"]])
    for base in ({"p1": 0, "c1": 0}, {"p1": 2, "c1": -1}, {"p1": -3, "c1": 5}):
        Pm, C = factorize(tc, base=base)
        prod = simplify(Pm[0][0] * C[0][0])
        assert prod == P(tc, "(1+p1)*(2+c1)")


def test_differential_condition_examples():
    assert not check_differential_factorization(load_fixture("example3d").triplectic())
    assert check_differential_factorization(chart_from_EF(1, 0, None, E=[["(1+p1)*(2+c1)"]]))
    assert check_differential_factorization(canonical_chart(2))


def test_integrate_jacobian_examples():
    tc = canonical_chart(1)
    assert integrate_jacobian(tc, [[SuperPoly.constant(tc.table, 2)]], tc.p) == [2 * tc.gen("p1")]
    assert integrate_jacobian(tc, [[P(tc, "2*(1+p1)")]], tc.p) == [P(tc, "2*p1 + p1^2")]
    tc2 = canonical_chart(2)
    one, zero = SuperPoly.constant(tc2.table, 1), SuperPoly.constant(tc2.table, 0)
    assert integrate_jacobian(tc2, [[one, zero], [zero, one]], tc2.p) == [tc2.gen("p1"), tc2.gen("p2")]


def test_apply_f3_identity_and_straightening():
    tc = canonical_chart(2)
    step = apply_f3(tc, F3Generator([tc.gen("p1"), tc.gen("p2")]))
    assert step.chart.pencil == tc.pencil and step.exact
    tc = chart_from_EF(1, 0, None, E=[["2*(1+p1)"]])
    step = apply_f3(tc, F3Generator([P(tc, "2*p1 + p1^2")]))
    assert step.chart.E()[0][0] == SuperPoly.constant(tc.table, 1)
    assert step.chart.F()[0][0].is_zero()
    assert step.exact


def test_apply_f3_gauge_matches_law():
    tc = canonical_chart(2)
    B = tc.gen("c1") * tc.gen("p2")
    step = apply_f3(tc, F3Generator([tc.gen("p1"), tc.gen("p2")], B))
    F = step.chart.F()
    want = gauge_law_F(tc, B)
    assert F == want
    assert not F[0][1].is_zero()
    assert check_symmetrized_jacobi(step.chart.pencil).passed


def test_f3_laws_on_random_generators():
    rng = random.Random(8)
    for tc in (chart_from_EF(1, 0, None, E=[["(1+p1)*(2+c1)"]]),
               chart_from_EF(2, 1, [1, 0], E=[["1 + p1", "0"], ["0", "1"]])):
        for _ in range(3):
            A = triangular_map(tc, tc.p, rng)
            B = random_poly(tc.table, tc.p + tc.c, rng, 3, 3, parity=tc.epsilon)
            rep = check_f3_laws(tc, F3Generator(A, B))
            assert rep.passed, rep.violations


def test_kill_f_examples():
    tc = canonical_chart(2)
    B, step = kill_f(tc)
    assert B.is_zero() and step.chart is tc
    tc = chart_from_EF(2, 0, None, F={(0, 1): 1})
    B, step = kill_f(tc)
    assert B == P(tc, "-1/2*p1*c2 + 1/2*p2*c1")
    assert check_bi_darboux(step.chart).passed
    assert all(x.is_zero() for row in gauge_residual(tc, B) for x in row)
    tc = chart_from_EF(2, 0, None, F={(0, 1): "p1"})
    assert check_symmetrized_jacobi(tc.pencil).passed
    B, step = kill_f(tc)
    assert check_bi_darboux(step.chart).passed


def test_bridge_to_chart():
    tc = chart_from_EF(2, 0, None, F={(0, 1): 1})
    alg, beta, back = bridge_to_chart(tc)
    assert not beta.is_zero()
    assert alg.dOp(beta).is_zero()
    assert all(alg.gradings(m)[2] == 2 for m in beta.terms)
    assert set(back) == {"x1_1", "x1_2", "x2_1", "x2_2"}
    alg, beta, _ = bridge_to_chart(canonical_chart(2))
    assert beta.is_zero()


def test_para_dolbeault_examples():
    tc = canonical_chart(1)
    D = ParaDolbeault(tc)
    dp1 = SuperPoly.generator(D.table, form_name("p1"))
    assert D.d1(tc.gen("p1") * tc.gen("c1")) == dp1 * D.lift(tc.gen("c1"))
    ex = load_fixture("example3d").triplectic()
    D = ParaDolbeault(ex)
    dp1 = SuperPoly.generator(D.table, form_name("p1"))
    f = ex.gen("c1") ** 3
    assert D.d2(f) == dp1 * D.lift(P(ex, "p1 + c1") * 3 * ex.gen("c1") ** 2)


@pytest.mark.parametrize("E", [[["p1+c1"]], [["(1+p1)*(2+c1)"]], [["1"]]])
def test_para_dolbeault_relations(E):
    tc = chart_from_EF(1, 0, None, E=E)
    D = ParaDolbeault(tc)
    rng = random.Random(4)
    for _ in range(5):
        f = random_poly(tc.table, tc.p + tc.c, rng, 3, 3, parity=0)
        for a in ("d1", "dt1", "d2", "dt2"):
            op = D.operator(a)
            assert op(op(f)).is_zero()
        for a, b in (("d1", "dt1"), ("d1", "d2"), ("dt1", "dt2")):
            assert D.anticommutator(a, b, f).is_zero()


def test_d2_dt2_anticommute_only_for_constant_E():
    tc = chart_from_EF(1, 0, None, E=[["3"]])
    D = ParaDolbeault(tc)
    assert D.anticommutator("d2", "dt2", tc.gen("p1") ** 2 * tc.gen("c1")).is_zero()
    tc = chart_from_EF(1, 0, None, E=[["(1+p1)*(2+c1)"]])
    D = ParaDolbeault(tc)
    assert not D.anticommutator("d2", "dt2", tc.gen("p1") ** 2 * tc.gen("c1")).is_zero()


def test_presymplectic_potential():
    data = presymplectic_data(canonical_chart(2, 1, [0, 1]))
    assert data["exact"]


def test_bi_canonical_examples():
    tc = canonical_chart(1)
    rep = check_bi_canonical(tc, {})
    assert rep.passed
    assert rep.details["J"] == [[SuperPoly.constant(tc.table, 1)]]
    assert all(x.is_zero() for x in rep.details["b"])
    # q' = q - b with b = p1 + c1, a gradient in p and in c
    rep = check_bi_canonical(tc, {"q1": tc.gen("q1") - tc.gen("p1") - tc.gen("c1")})
    assert rep.passed
    assert rep.details["B1"] == P(tc, "p1^2/2 + p1*c1")
    assert rep.details["B2"] == P(tc, "p1*c1 + c1^2/2")
    rep = check_bi_canonical(tc, {"q1": tc.gen("q1") * Fraction(1, 2), "p1": 2 * tc.gen("p1")})
    assert not rep.passed


def test_bi_canonical_linear_rescaling():
    tc = canonical_chart(2)
    fw = {"q1": tc.gen("q1") * Fraction(1, 2), "p1": 2 * tc.gen("p1"), "c1": 2 * tc.gen("c1")}
    rep = check_bi_canonical(tc, fw)
    assert rep.passed
