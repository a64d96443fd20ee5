"""Parity structures on the base ``xi = (p_1..p_n, c_1..c_n)`` and the Obata connection.

Tensors are plain component arrays ``M[I][J]`` (upper index first).  The
Obata connection is stored as a matrix of one-forms

    A^J_M = dxi^I Gamma_I^J_M,        nabla P = dP + A P - P A

which has vanishing mixed blocks and, with ``X``/``Y`` the off-diagonal
blocks of P,

    A_pp = -(d1 X) Y,     A_cc = -(dt1 Y) X.

Curvature is the matrix of two-forms ``R = dA + A A``.  Christoffel
components are read off by differentiating with respect to the form
generators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .expression import print_expression
from .forms import form_name, lift_to, with_forms
from .report import CheckReport
from .superalgebra import (
    NotInvertible,
    RationalFn,
    SuperPoly,
    VariableTable,
    body_matrix,
    invert_matrix,
    is_zero,
    mat_eq,
    mat_mul,
    mat_sub,
    rational_rank,
    simplify,
)


class ESingular(ValueError):
    pass


@dataclass
class Base:
    """Coordinates of N with one form generator per coordinate."""

    table: VariableTable
    p: List[str]
    c: List[str]

    @property
    def names(self) -> List[str]:
        return self.p + self.c

    @property
    def n(self) -> int:
        return len(self.p)

    def eps(self, I: int) -> int:
        return self.table[self.names[I]].parity

    def dxi(self, I: int) -> SuperPoly:
        return SuperPoly.generator(self.table, form_name(self.names[I]))

    def const(self, v) -> SuperPoly:
        return SuperPoly.constant(self.table, v)


def base_of(tc) -> Base:
    table = with_forms(tc.table, tc.p + tc.c)
    return Base(table, list(tc.p), list(tc.c))


@dataclass
class ParityStructure:
    base: Base
    components: List[List[object]]
    label: str = ""

    def square(self):
        return mat_mul(self.components, self.components)


def _s(cond) -> int:
    return -1 if cond % 2 else 1


def _lift_matrix(base: Base, m):
    return [[lift_to(simplify(x), base.table) for x in row] for row in m]


def buildSigma(base: Base) -> ParityStructure:
    n = base.n
    comp = [[base.const(0) for _ in range(2 * n)] for _ in range(2 * n)]
    for i in range(n):
        comp[i][i] = base.const(1)
        comp[n + i][n + i] = base.const(-1)
    return ParityStructure(base, comp, "Sigma")


def _E_and_inverse(base: Base, E):
    E = _lift_matrix(base, E)
    try:
        Et = invert_matrix(E)
    except NotInvertible as exc:
        raise ESingular(str(exc)) from None
    return E, [[simplify(x) for x in row] for row in Et]


def buildPfromE(base: Base, E) -> ParityStructure:
    """``P^i_jhat = Et_i^jhat`` and ``P^ihat_j = E_ihat^j`` (transposed with graded signs)."""
    n = base.n
    E, Et = _E_and_inverse(base, E)
    comp = [[base.const(0) for _ in range(2 * n)] for _ in range(2 * n)]
    for i in range(n):
        ep = base.eps(i)
        for j in range(n):
            ec = base.eps(n + j)
            comp[i][n + j] = Et[j][i] * _s(ec * (ep + 1))
    for i in range(n):
        ec = base.eps(n + i)
        for j in range(n):
            ep = base.eps(j)
            comp[n + i][j] = E[j][i] * _s(ep * (ec + 1))
    comp = [[simplify(x) for x in row] for row in comp]
    return ParityStructure(base, comp, "P")


def buildJ(sigma: ParityStructure, P: ParityStructure) -> ParityStructure:
    return ParityStructure(P.base, [[simplify(x) for x in row] for row in mat_mul(P.components, sigma.components)], "J")


def _identity(base: Base, scale=1):
    m = 2 * base.n
    return [[base.const(scale if i == j else 0) for j in range(m)] for i in range(m)]


def _scaled(m, s):
    return [[x * s for x in row] for row in m]


def check_para_hypercomplex(sigma: ParityStructure, P: ParityStructure, J: ParityStructure = None,
                            point=None) -> CheckReport:
    """P^2 = Sigma^2 = Id, J^2 = -Id, {Sigma, P} = 0 and the n/n kernel split on the body."""
    base = P.base
    J = J or buildJ(sigma, P)
    rep = CheckReport("para_hypercomplex")
    I = _identity(base)
    if not mat_eq(P.square(), I):
        rep.fail(relation="P^2 = Id")
    if not mat_eq(sigma.square(), I):
        rep.fail(relation="Sigma^2 = Id")
    if not mat_eq(J.square(), _identity(base, -1)):
        rep.fail(relation="J^2 = -Id")
    anti = mat_mul(sigma.components, P.components)
    anti2 = mat_mul(P.components, sigma.components)
    if not all(is_zero(simplify(x + y)) for ra, rb in zip(anti, anti2) for x, y in zip(ra, rb)):
        rep.fail(relation="{Sigma, P} = 0")
    poles = {}
    for row in P.components:
        for x in row:
            for f, _ in getattr(x, "den", ()):
                poles[print_expression(f)] = f
    rep.details["pole_locus"] = [f"{k} = 0" for k in sorted(poles)]
    if point is not None:
        full = {v.name: 0 for v in base.table.variables if base.table.scalar_like[base.table.index(v.name)]}
        full.update({k: Fraction(v) for k, v in point.items()})
        for S in (sigma, P):
            body = body_matrix(S.components, full)
            m = len(body)
            for sgn in (1, -1):
                shifted = [[body[i][j] + (sgn if i == j else 0) for j in range(m)] for i in range(m)]
                ker = m - rational_rank(shifted)
                if ker != base.n:
                    rep.fail(relation=f"dim ker({S.label} {'+' if sgn > 0 else '-'} Id) = n", found=ker)
    return rep


# ---------------------------------------------------------------------------
# Nijenhuis tensor


@dataclass
class NijenhuisTensor:
    base: Base
    components: Dict[Tuple[int, int, int], object]

    def is_zero(self) -> bool:
        return all(is_zero(v) for v in self.components.values())

    def nonzero(self):
        return {k: v for k, v in self.components.items() if not is_zero(v)}


def nijenhuis(P: ParityStructure) -> NijenhuisTensor:
    """``N^K_IJ = ((P^K_I <-d_M) P^M_J - P^K_M (P^M_I <-d_J)) - (-1)^{e_I e_J} (I <-> J)``."""
    base = P.base
    names = base.names
    m = len(names)
    comp = P.components
    D = [[[None] * m for _ in range(m)] for _ in range(m)]
    for K in range(m):
        for I in range(m):
            x = comp[K][I]
            for M in range(m):
                D[K][I][M] = None if is_zero(x) or not x.depends_on(names[M]) else simplify(x.right_derivative(names[M]))

    def half(K, I, J):
        acc = base.const(0)
        for M in range(m):
            d = D[K][I][M]
            if d is not None and not is_zero(comp[M][J]):
                acc = acc + d * comp[M][J]
            d2 = D[M][I][J]
            if d2 is not None and not is_zero(comp[K][M]):
                acc = acc - comp[K][M] * d2
        return acc

    out = {}
    for K in range(m):
        for I in range(m):
            for J in range(m):
                v = half(K, I, J) - half(K, J, I) * _s(base.eps(I) * base.eps(J))
                out[(K, I, J)] = simplify(v)
    return NijenhuisTensor(base, out)


def chiral_nijenhuis(N: NijenhuisTensor, P: ParityStructure, sign: int) -> NijenhuisTensor:
    """``8 N_pm^K_IJ = N^K_IM P_pm^M_J - (-1)^{e_I e_J} (I <-> J)``."""
    base = N.base
    m = 2 * base.n
    Ppm = [[(P.components[i][j] * sign + (1 if i == j else 0)) * Fraction(1, 2) for j in range(m)] for i in range(m)]
    out = {}
    for K in range(m):
        for I in range(m):
            for J in range(m):
                acc = base.const(0)
                for M in range(m):
                    a = N.components[(K, I, M)]
                    if not is_zero(a) and not is_zero(Ppm[M][J]):
                        acc = acc + a * Ppm[M][J]
                    b = N.components[(K, J, M)]
                    if not is_zero(b) and not is_zero(Ppm[M][I]):
                        acc = acc - b * Ppm[M][I] * _s(base.eps(I) * base.eps(J))
                out[(K, I, J)] = simplify(acc * Fraction(1, 8))
    return NijenhuisTensor(base, out)


# ---------------------------------------------------------------------------
# Obata connection


def _d_part(base: Base, f, names: Sequence[str]):
    """``sum dxi * d_left f / dxi`` over the given coordinates."""
    f = lift_to(f, base.table)
    out = base.const(0)
    for x in names:
        if not f.depends_on(x):
            continue
        out = out + SuperPoly.generator(base.table, form_name(x)) * f.left_derivative(x)
    return simplify(out)


@dataclass
class ObataConnection:
    base: Base
    P: ParityStructure
    A: List[List[object]]
    gamma: Dict[Tuple[int, int, int], object] = field(default_factory=dict)

    def christoffel(self, K: int, I: int, J: int):
        return self.gamma.get((K, I, J), self.base.const(0))


def obata_connection(tc_or_base, E=None) -> ObataConnection:
    if isinstance(tc_or_base, Base):
        base = tc_or_base
    else:
        base = base_of(tc_or_base)
        E = E if E is not None else tc_or_base.E()
    P = buildPfromE(base, E)
    n = base.n
    X = [row[n:] for row in P.components[:n]]
    Y = [row[:n] for row in P.components[n:]]
    dX = [[_d_part(base, x, base.p) for x in row] for row in X]
    dY = [[_d_part(base, y, base.c) for y in row] for row in Y]
    Ap = mat_mul(dX, Y)
    Ac = mat_mul(dY, X)
    m = 2 * n
    A = [[base.const(0) for _ in range(m)] for _ in range(m)]
    for i in range(n):
        for j in range(n):
            A[i][j] = simplify(-Ap[i][j])
            A[n + i][n + j] = simplify(-Ac[i][j])
    gamma = {}
    for J in range(m):
        for M in range(m):
            a = A[J][M]
            if is_zero(a):
                continue
            for I in range(m):
                g = simplify(a.left_derivative(form_name(base.names[I])))
                if not is_zero(g):
                    gamma[(J, I, M)] = simplify(g * _s(base.eps(I) * base.eps(J)))
    return ObataConnection(base, P, A, gamma)


def covariant_derivative(conn: ObataConnection, T: ParityStructure):
    """``dT + A T - T A`` as a matrix of one-forms."""
    base = conn.base
    names = base.names
    dT = [[_d_part(base, x, names) for x in row] for row in T.components]
    AT = mat_mul(conn.A, T.components)
    TA = mat_mul(T.components, conn.A)
    return [[simplify(a + b - c) for a, b, c in zip(ra, rb, rc)] for ra, rb, rc in zip(dT, AT, TA)]


def check_obata(conn: ObataConnection) -> CheckReport:
    """nabla Sigma = 0, nabla P = 0 and graded symmetry of the lower indices."""
    rep = CheckReport("obata_connection")
    base = conn.base
    for S in (buildSigma(base), conn.P):
        for r, row in enumerate(covariant_derivative(conn, S)):
            for c, x in enumerate(row):
                if not is_zero(x):
                    rep.fail(relation=f"nabla {S.label} = 0", entry=(r, c), residual=x)
    m = 2 * base.n
    for K in range(m):
        for I in range(m):
            for J in range(m):
                a = conn.christoffel(K, I, J)
                b = conn.christoffel(K, J, I)
                s = _s((base.eps(I) + 1) * (base.eps(J) + 1))
                r = simplify(a + b * s)
                if not is_zero(r):
                    rep.fail(relation="torsion", index=(K, I, J), residual=r)
    return rep


@dataclass
class Curvature:
    base: Base
    matrix: List[List[object]]
    components: Dict[Tuple[str, str], object]

    @property
    def is_flat(self) -> bool:
        return all(is_zero(v) for v in self.components.values())

    @property
    def isFlat(self) -> bool:
        return self.is_flat


def obata_curvature(conn: ObataConnection) -> Curvature:
    base = conn.base
    names = base.names
    dA = [[_d_part(base, x, names) for x in row] for row in conn.A]
    AA = mat_mul(conn.A, conn.A)
    R = [[simplify(a + b) for a, b in zip(ra, rb)] for ra, rb in zip(dA, AA)]
    comps = {}
    for J, row in enumerate(R):
        for M, x in enumerate(row):
            comps[(names[J], names[M])] = x
    return Curvature(base, R, comps)


def obataCurvature(conn: ObataConnection) -> Tuple[Curvature, bool]:
    curv = obata_curvature(conn)
    return curv, curv.is_flat


# ---------------------------------------------------------------------------
# structures in bi-Darboux coordinates


T_MATRICES = {
    "t0": [[1, 0], [0, 1]],
    "t1": [[0, 1], [1, 0]],
    "t2": [[0, -1], [1, 0]],
    "t3": [[1, 0], [0, -1]],
}


def kron_identity(t, n: int):
    """``t (x) Id_n`` laid out in (p-block, c-block) order."""
    m = 2 * n
    out = [[Fraction(0)] * m for _ in range(m)]
    for a in range(2):
        for b in range(2):
            for i in range(n):
                out[a * n + i][b * n + i] = Fraction(t[a][b])
    return out


def biDarbouxStructures(n: int) -> Dict[str, List[List[Fraction]]]:
    """Id, P, J, Sigma as ``t_alpha (x) Id_n``."""
    return {
        "Id": kron_identity(T_MATRICES["t0"], n),
        "P": kron_identity(T_MATRICES["t1"], n),
        "J": kron_identity(T_MATRICES["t2"], n),
        "Sigma": kron_identity(T_MATRICES["t3"], n),
    }


def structures_match_canonical(base: Base) -> bool:
    """The constant structures agree with Sigma, P(E = Id) and J built from scratch."""
    n = base.n
    sig = buildSigma(base)
    P = buildPfromE(base, [[base.const(int(i == j)) for j in range(n)] for i in range(n)])
    J = buildJ(sig, P)
    ref = biDarbouxStructures(n)
    for S, key in ((sig, "Sigma"), (P, "P"), (J, "J")):
        consts = [[RationalFn.lift(x).constant_term() if RationalFn.lift(x).is_constant() else None for x in row]
                  for row in S.components]
        if consts != ref[key]:
            return False
    return True


def _inv2(g):
    (a, b), (c, d) = [[Fraction(x) for x in row] for row in g]
    det = a * d - b * c
    if det == 0:
        raise ValueError("singular group element")
    return [[d / det, -b / det], [-c / det, a / det]]


def _mul2(x, y):
    return [[sum(Fraction(x[i][k]) * Fraction(y[k][j]) for k in range(2)) for j in range(2)] for i in range(2)]


def t_coordinates(m) -> List[Fraction]:
    """Coefficients of a 2x2 matrix in the basis t0..t3."""
    (a, b), (c, d) = [[Fraction(x) for x in row] for row in m]
    return [(a + d) / 2, (b + c) / 2, (c - b) / 2, (a - d) / 2]


def gl2_rotate_structures(g) -> Dict[str, List[Fraction]]:
    """Momentum rotation by ``g`` conjugates ``t -> g^-1 t g``; returns t-coordinates of P, J, Sigma."""
    gi = _inv2(g)
    out = {}
    for key, t in (("P", "t1"), ("J", "t2"), ("Sigma", "t3")):
        out[key] = t_coordinates(_mul2(_mul2(gi, T_MATRICES[t]), g))
    return out


def rotate_momenta_matrix(g, n: int):
    """The 2n x 2n matrix acting on (p, c) for a constant GL(2) rotation of the momenta."""
    return kron_identity(g, n)


obataConnection = obata_connection
