"""Split quaternions, so(2,1) and the adjoint double cover SL(2) -> SO+(2,1).

Indices run over 1, 2, 3 with Minkowski metric ``eta = diag(1, -1, 1)``; the
middle slot is the time direction.  A vector ``x`` is the traceless matrix
``x^a t_a = [[x3, x1 - x2], [x1 + x2, -x3]]`` whose determinant is
``-x.eta.x``.  Everything is exact; exponentials are truncated power series
in a formal parameter, stored as lists of coefficient matrices.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Dict, List, Sequence

from .report import CheckReport

Mat = List[List[Fraction]]

ETA = [[1, 0, 0], [0, -1, 0], [0, 0, 1]]
ETA_DET = -1

T_SMALL = {
    0: [[1, 0], [0, 1]],
    1: [[0, 1], [1, 0]],
    2: [[0, -1], [1, 0]],
    3: [[1, 0], [0, -1]],
}

T_BIG = {
    1: [[0, 0, 0], [0, 0, 1], [0, 1, 0]],
    2: [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
    3: [[0, -1, 0], [-1, 0, 0], [0, 0, 0]],
}


class NotUnitDeterminant(ValueError):
    pass


def mat(rows) -> Mat:
    return [[Fraction(x) for x in row] for row in rows]


def mmul(a, b) -> Mat:
    return [[sum((Fraction(a[i][k]) * Fraction(b[k][j]) for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


def madd(a, b, s=1) -> Mat:
    return [[Fraction(x) + s * Fraction(y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mscale(a, s) -> Mat:
    return [[Fraction(x) * s for x in row] for row in a]


def transpose(a) -> Mat:
    return [list(r) for r in zip(*mat(a))]


def ident(n: int) -> Mat:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def det2(g) -> Fraction:
    g = mat(g)
    return g[0][0] * g[1][1] - g[0][1] * g[1][0]


def det3(m) -> Fraction:
    m = mat(m)
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def inv2(g) -> Mat:
    g = mat(g)
    d = det2(g)
    if d == 0:
        raise ZeroDivisionError("singular 2x2 matrix")
    return [[g[1][1] / d, -g[0][1] / d], [-g[1][0] / d, g[0][0] / d]]


def levi_civita(a: int, b: int, c: int) -> int:
    """``eps_{abc}`` on indices 1..3 with ``eps_123 = 1``."""
    if len({a, b, c}) < 3:
        return 0
    perm = [a, b, c]
    inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def eta(a: int, b: int) -> int:
    return ETA[a - 1][b - 1]


# the inverse metric has the same entries
eta_inv = eta


def structure_constant(a: int, b: int, d: int) -> int:
    """``eps_{abc} eta^{cd}`` summed over c."""
    return sum(levi_civita(a, b, c) * eta_inv(c, d) for c in (1, 2, 3))


# ---------------------------------------------------------------------------
# Minkowski vectors


def to_matrix(x: Sequence) -> Mat:
    x1, x2, x3 = (Fraction(v) for v in x)
    return [[x3, x1 - x2], [x1 + x2, -x3]]


def t_coordinates(m) -> List[Fraction]:
    """``(m_0, m_1, m_2, m_3)`` with ``m = m_a t_a``."""
    (a, b), (c, d) = mat(m)
    return [(a + d) / 2, (b + c) / 2, (c - b) / 2, (a - d) / 2]


def minkowski_norm(x: Sequence) -> Fraction:
    return sum(eta(a, a) * Fraction(x[a - 1]) ** 2 for a in (1, 2, 3))


# ---------------------------------------------------------------------------
# checks


def paraQuaternionTable() -> CheckReport:
    """``t_a t_b = eta_ab Id + eps_abc eta^cd t_d`` and ``t_0`` central."""
    rep = CheckReport("para_quaternion_table")
    table = {}
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            lhs = mmul(T_SMALL[a], T_SMALL[b])
            rhs = mscale(ident(2), eta(a, b))
            for d in (1, 2, 3):
                rhs = madd(rhs, mscale(T_SMALL[d], structure_constant(a, b, d)))
            table[(a, b)] = t_coordinates(lhs)
            if lhs != rhs:
                rep.fail(product=(a, b), lhs=lhs, rhs=rhs)
    for a in range(4):
        if mmul(T_SMALL[0], T_SMALL[a]) != mmul(T_SMALL[a], T_SMALL[0]):
            rep.fail(central=a)
    rep.details["table"] = table
    return rep


def lieAlgebraCheck() -> CheckReport:
    """so(2,1) brackets, the map ``T_a -> t_a / 2`` and the epsilon contraction identity."""
    rep = CheckReport("lie_algebra")
    half = {a: mscale(T_SMALL[a], Fraction(1, 2)) for a in (1, 2, 3)}
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            rhs = [[Fraction(0)] * 3 for _ in range(3)]
            rhs_small = [[Fraction(0)] * 2 for _ in range(2)]
            for d in (1, 2, 3):
                k = structure_constant(a, b, d)
                rhs = madd(rhs, mscale(T_BIG[d], k))
                rhs_small = madd(rhs_small, mscale(half[d], k))
            comm = madd(mmul(T_BIG[a], T_BIG[b]), mmul(T_BIG[b], T_BIG[a]), -1)
            if comm != rhs:
                rep.fail(bracket=(a, b), algebra="so(2,1)")
            comm2 = madd(mmul(half[a], half[b]), mmul(half[b], half[a]), -1)
            if comm2 != rhs_small:
                rep.fail(bracket=(a, b), algebra="sl(2)")
        # each generator is an infinitesimal Lorentz transformation
        gen = T_BIG[a]
        if madd(mmul(transpose(gen), ETA), mmul(ETA, gen)) != mat([[0] * 3] * 3):
            rep.fail(generator=a, relation="T^T eta + eta T = 0")
    for a, b, c, d in itertools.product((1, 2, 3), repeat=4):
        lhs = ETA_DET * sum(levi_civita(a, b, m) * eta_inv(m, v) * levi_civita(v, c, d)
                            for m in (1, 2, 3) for v in (1, 2, 3))
        rhs = eta(a, c) * eta(b, d) - eta(a, d) * eta(b, c)
        if lhs != rhs:
            rep.fail(epsilon_identity=(a, b, c, d))
    return rep


def isLorentz(L) -> bool:
    L = mat(L)
    return mmul(mmul(transpose(L), ETA), L) == mat(ETA)


def isRestrictedLorentz(L) -> bool:
    L = mat(L)
    return isLorentz(L) and det3(L) == 1 and L[1][1] >= 1


def adjointMap(g) -> Mat:
    """``Lambda`` with ``g t_b g^-1 = t_a Lambda^a_b``."""
    g = mat(g)
    if det2(g) != 1:
        raise NotUnitDeterminant(f"det g = {det2(g)}")
    gi = inv2(g)
    cols = []
    for b in (1, 2, 3):
        coords = t_coordinates(mmul(mmul(g, T_SMALL[b]), gi))
        cols.append(coords[1:])
    return [[cols[b][a] for b in range(3)] for a in range(3)]


def random_sl2(rng: random.Random, steps: int = 3) -> Mat:
    """Product of random elementary and diagonal unit-determinant factors."""
    g = ident(2)
    choices = [Fraction(k, d) for k in range(-3, 4) for d in (1, 2, 3) if k]
    for _ in range(steps):
        kind = rng.randrange(3)
        x = rng.choice(choices)
        if kind == 0:
            f = [[1, x], [0, 1]]
        elif kind == 1:
            f = [[1, 0], [x, 1]]
        else:
            f = [[x, 0], [0, 1 / x]]
        g = mmul(g, f)
    if rng.random() < 0.5:
        g = mscale(g, -1)
    return g


# ---------------------------------------------------------------------------
# truncated exponentials


def exp_series(m, order: int, scale=Fraction(1)) -> List[Mat]:
    """Coefficients ``C_k`` of ``exp(theta * scale * m) = sum_k C_k theta^k`` up to ``order``."""
    n = len(m)
    out = [ident(n)]
    term = ident(n)
    for k in range(1, order + 1):
        term = mscale(mmul(term, m), Fraction(scale) / k)
        out.append(term)
    return out


def series_mul(a: List[Mat], b: List[Mat], order: int) -> List[Mat]:
    n = len(a[0])
    out = [[[Fraction(0)] * len(b[0][0]) for _ in range(n)] for _ in range(order + 1)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j <= order:
                out[i + j] = madd(out[i + j], mmul(x, y))
    return out


def adjoint_series(alpha: int, order: int) -> List[Mat]:
    """Series of ``Ad(exp(theta t_alpha / 2))`` obtained by conjugating each t_b."""
    g = exp_series(T_SMALL[alpha], order, Fraction(1, 2))
    gi = exp_series(T_SMALL[alpha], order, Fraction(-1, 2))
    cols = []
    for b in (1, 2, 3):
        conj = series_mul(series_mul(g, [mat(T_SMALL[b])], order), gi, order)
        cols.append([t_coordinates(c)[1:] for c in conj])
    return [[[cols[b][k][a] for b in range(3)] for a in range(3)] for k in range(order + 1)]


def series_agreement(alpha: int, order: int = 6) -> bool:
    """``Ad(exp(theta t_a / 2)) = exp(theta T_a)`` order by order."""
    return adjoint_series(alpha, order) == exp_series(T_BIG[alpha], order)


def hyperbolic_point(s) -> Dict[str, Fraction]:
    """Rational ``cosh``/``sinh`` pair ``((s + 1/s)/2, (s - 1/s)/2)``."""
    s = Fraction(s)
    return {"cosh": (s + 1 / s) / 2, "sinh": (s - 1 / s) / 2}


def lorentz_report(g=None, L=None) -> CheckReport:
    """Adjoint image of a group element, or membership of a given 3x3 matrix."""
    rep = CheckReport("lorentz")
    if g is not None:
        Lam = adjointMap(g)
        rep.details["adjoint"] = Lam
        L = Lam
    L = mat(L)
    rep.details["lorentz"] = isLorentz(L)
    rep.details["restricted"] = isRestrictedLorentz(L)
    if not rep.details["restricted"]:
        rep.fail(matrix=L, lorentz=rep.details["lorentz"])
    return rep


# snake_case spellings
para_quaternion_table = paraQuaternionTable
lie_algebra_check = lieAlgebraCheck
is_lorentz = isLorentz
is_restricted_lorentz = isRestrictedLorentz
adjoint_map = adjointMap
