"""Shared generators and relation tables for the operator-algebra tests."""
import random

from bidarboux.homotopy import TriGradedAlgebra
from bidarboux.poisson import random_poly


def algebra_names(alg):
    return [v.name for v in alg.table.variables]


def random_element(alg, rng, degree=4, terms=3):
    while True:
        w = random_poly(alg.table, algebra_names(alg), rng, degree, terms)
        if not w.is_zero():
            return w


def random_parities(rng, max_n=3):
    n = rng.randint(1, max_n)
    return [rng.randint(0, 1) for _ in range(n)]


def comm(A, B, w, sign=1):
    """AB - sign BA."""
    return A(B(w)) - B(A(w)) * sign


def operator_relations(alg):
    """Each entry maps an element to a residual that must vanish."""
    d1 = lambda w: alg.dA(1, w)  # noqa: E731
    d2 = lambda w: alg.dA(2, w)  # noqa: E731
    i1 = lambda w: alg.iA(1, w)  # noqa: E731
    i2 = lambda w: alg.iA(2, w)  # noqa: E731
    L = alg.scriptL
    rel = {
        "d1 d1 = 0": lambda w: d1(d1(w)),
        "d2 d2 = 0": lambda w: d2(d2(w)),
        "{d1, d2} = 0": lambda w: comm(d1, d2, w, -1),
        "{i1, i2} = 0": lambda w: comm(i1, i2, w, -1),
        "d d = 0": lambda w: alg.dOp(alg.dOp(w)),
        "[trace, d] = 2d": lambda w: comm(alg.traceL, alg.dOp, w) - alg.dOp(w) * 2,
        "[i, trace] = 2i": lambda w: comm(alg.iOp, alg.traceL, w) - alg.iOp(w) * 2,
        "L = Lambda + R_b d^b": lambda w: alg.LOp(w) - alg.Lambda(w) - alg.R(1, d1(w)) - alg.R(2, d2(w)),
        "d Lambda = Lambda' d": lambda w: alg.dOp(alg.Lambda(w)) - alg.LambdaPrime(alg.dOp(w)),
        "Lambda i = i Lambda'": lambda w: alg.Lambda(alg.iOp(w)) - alg.iOp(alg.LambdaPrime(w)),
        "[L, Lambda] = 0": lambda w: comm(alg.LOp, alg.Lambda, w),
    }
    for a in (1, 2):
        for b in (1, 2):
            rel[f"[Lambda, L^{a}_{b}] = 0"] = (
                lambda w, a=a, b=b: comm(alg.Lambda, lambda v: L(a, b, v), w))
            for c in (1, 2):
                for d in (1, 2):
                    def gl2(w, a=a, b=b, c=c, d=d):
                        lhs = comm(lambda v: L(a, b, v), lambda v: L(c, d, v), w)
                        rhs = alg.zero()
                        if a == d:
                            rhs = rhs + L(c, b, w)
                        if c == b:
                            rhs = rhs - L(a, d, w)
                        return lhs - rhs
                    rel[f"gl(2) [L^{a}_{b}, L^{c}_{d}]"] = gl2
    return rel


def highest_weight_vector(alg, rng, n1, n3):
    """Random monomial in x1 and x3 only (so L^2_1 kills it), or None."""
    from bidarboux.superalgebra import SuperPoly

    for _ in range(50):
        exps = {}
        for _ in range(n1):
            k = alg.name(1, rng.randint(1, alg.n))
            exps[k] = exps.get(k, 0) + 1
        for _ in range(n3):
            k = alg.name(3, rng.randint(1, alg.n))
            exps[k] = exps.get(k, 0) + 1
        v = SuperPoly.monomial(alg.table, exps, 1)
        if not v.is_zero():
            return v
    return None


def closed_form(alg, rng, degree=6, tries=200):
    """``d rho`` for a random rho, or None when every draw is killed.

    With n = 1 and an even index, x3_1 is odd and every ``d rho`` vanishes.
    """
    for _ in range(tries):
        rho = random_poly(alg.table, algebra_names(alg), rng, degree, 3)
        w = alg.dOp(rho)
        if not w.is_zero() and w.degree() <= degree:
            return w
    return None


__all__ = ["TriGradedAlgebra", "random", "random_element", "operator_relations", "closed_form",
           "highest_weight_vector", "random_parities"]
