"""Triplectic charts in semi-canonical form and the bi-Darboux construction.

A chart has positions ``q``, momenta ``p`` and second Casimirs ``c``.  The
first bracket is in Darboux form, the momenta are Casimirs of the second
bracket and the ``c`` are Casimirs of the first one.  What is left of the
second bracket is

    E[i][j] = {q_i, c_j}^2,      F[i][j] = {q_i, q_j}^2

and the chart admits bi-Darboux coordinates exactly when ``E = P(p) C(c)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .forms import form_name, lift_to, vector_field, with_forms
from .poisson import Chart, PoissonPencil, PoissonStructure, bracket, triplectic_chart
from .report import CheckReport, StageError
from .superalgebra import (
    NotInvertible,
    RationalFn,
    SuperPoly,
    VariableTable,
    body_matrix,
    invert_matrix,
    is_zero,
    mat_eq,
    mat_is_identity,
    mat_mul,
    rational_det,
    rational_inverse,
    simplify,
)
from .transform import MapNotInvertible, TruncationResidual, inverse_from_jacobian, invert_polynomial_map, transform_pencil


class NotSemiCanonical(ValueError):
    pass


class QDependent(ValueError):
    pass


class ESingular(ValueError):
    pass


class NotClosed(ValueError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or []


class BasePointSingular(ValueError):
    pass


class NotIntegrable(ValueError):
    pass


class EnotIdentity(ValueError):
    pass


def _zero(table):
    return SuperPoly(table, {})


def _eq(x, y) -> bool:
    return RationalFn.lift(x, getattr(x, "table", None) or y.table) == RationalFn.lift(y, getattr(y, "table", None) or x.table)


class TriplecticChart:
    """A pencil over ``q1..qn, p1..pn, c1..cn`` with helpers for the E/F data."""

    def __init__(self, pencil: PoissonPencil):
        self.pencil = pencil
        chart = pencil.chart
        self.q = chart.by_role("position")
        self.p = chart.by_role("momentum")
        self.c = chart.by_role("casimir")
        if not (len(self.q) == len(self.p) == len(self.c)):
            raise NotSemiCanonical("need equally many positions, momenta and Casimirs")

    @property
    def chart(self) -> Chart:
        return self.pencil.chart

    @property
    def table(self) -> VariableTable:
        return self.pencil.table

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def epsilon(self) -> int:
        return self.chart.epsilon

    def position_parities(self) -> List[int]:
        return [self.table[q].parity for q in self.q]

    def gen(self, name) -> SuperPoly:
        return SuperPoly.generator(self.table, name)

    def E(self):
        S = self.pencil.second
        return [[S.entry(qi, cj) for cj in self.c] for qi in self.q]

    def F(self):
        S = self.pencil.second
        return [[S.entry(qi, qj) for qj in self.q] for qi in self.q]

    def base_names(self) -> List[str]:
        return self.p + self.c


def chart_from_EF(n: int, epsilon: int = 0, position_parities: Sequence[int] = None, E=None, F=None,
                  truncation_degree: int = 8, chart: Chart = None) -> TriplecticChart:
    """Build a semi-canonical chart from E and F given as matrices or strings.

    F may be a full matrix or a dict ``{(i, j): value}`` with 0-based indices;
    graded antisymmetric partners are filled in.
    """
    from .expression import parse_rational

    ch = chart or triplectic_chart(n, epsilon, position_parities, truncation_degree)
    t = ch.table
    q = ch.by_role("position")
    p = ch.by_role("momentum")
    c = ch.by_role("casimir")

    def conv(x):
        if isinstance(x, str):
            return parse_rational(x, t)
        if isinstance(x, (int, Fraction)):
            return SuperPoly.constant(t, x)
        return x

    first = {(q[i], p[i]): 1 for i in range(n)}
    second = {}
    if E is None:
        E = [[int(i == j) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            v = conv(E[i][j])
            if not is_zero(v):
                second[(q[i], c[j])] = v
    if F is not None:
        items = F.items() if isinstance(F, Mapping) else (((i, j), F[i][j]) for i in range(n) for j in range(n))
        for (i, j), v in items:
            v = conv(v)
            if is_zero(v):
                continue
            if (q[j], q[i]) in second:
                continue
            second[(q[i], q[j])] = v
    pencil = PoissonPencil(PoissonStructure(ch, first), PoissonStructure(ch, second))
    return TriplecticChart(pencil)


def canonical_chart(n: int, epsilon: int = 0, position_parities: Sequence[int] = None) -> TriplecticChart:
    return chart_from_EF(n, epsilon, position_parities)


# ---------------------------------------------------------------------------
# E / F extraction


def extract_EF(tc: TriplecticChart, check_invertible: bool = True):
    """E and F after validating the semi-canonical axioms."""
    names = tc.chart.names
    S1, S2 = tc.pencil.first, tc.pencil.second
    canon = chart_from_EF(tc.n, tc.epsilon, tc.position_parities(), chart=tc.chart).pencil.first
    problems = []
    for a in names:
        for b in names:
            if not _eq(S1.entry(a, b), canon.entry(a, b)):
                problems.append(f"first bracket {{{a},{b}}} is not in Darboux form")
    allowed = set()
    for qi in tc.q:
        for x in tc.q + tc.c:
            allowed.add((qi, x))
            allowed.add((x, qi))
    for (a, b), v in S2.pi.items():
        if (a, b) not in allowed and not is_zero(v):
            problems.append(f"second bracket {{{a},{b}}} must vanish")
    if problems:
        raise NotSemiCanonical("; ".join(sorted(set(problems))))
    E, F = tc.E(), tc.F()
    for mat, label in ((E, "E"), (F, "F")):
        for row in mat:
            for x in row:
                if any(x.depends_on(q) for q in tc.q):
                    raise QDependent(f"{label} depends on the positions")
    if check_invertible:
        try:
            invert_matrix(E)
        except NotInvertible as exc:
            raise ESingular(str(exc)) from None
    return E, F


# ---------------------------------------------------------------------------
# closedness and potentials


def _grsym(tc, a: str, b: str) -> int:
    t = tc.table
    return -1 if (t[a].parity * t[b].parity) % 2 else 1


def euler_potential(table: VariableTable, names: Sequence[str], column) -> Optional[SuperPoly]:
    """Polynomial ``A`` with ``d_left A / d names[i] = column[i]`` and no constant part in ``names``.

    Uses ``N A = sum_i x_i column[i]`` with ``N`` the Euler operator in ``names``;
    returns None when the column is not polynomial or not a gradient.
    """
    total = _zero(table)
    for x, f in zip(names, column):
        f = simplify(f)
        if isinstance(f, RationalFn):
            return None
        total = total + SuperPoly.generator(table, x) * f
    idx = {table.index(x) for x in names}
    out = {}
    for m, c in total.terms.items():
        k = sum(e for i, e in m if i in idx)
        out[m] = c / k
    A = SuperPoly(table, out)
    for x, f in zip(names, column):
        if A.left_derivative(x) != simplify(f):
            return None
    return A


def check_closedness(tc: TriplecticChart, E=None) -> CheckReport:
    """Graded symmetry of dE/dp and of dEt/dc, plus potentials when they exist.

    Diagonal pairs are included: for an odd index the condition forces the derivative to vanish.
    """
    E = E if E is not None else tc.E()
    n = tc.n
    rep = CheckReport("closedness")
    for j in range(n):
        for i in range(n):
            for k in range(i, n):
                lhs = E[k][j].left_derivative(tc.p[i])
                rhs = E[i][j].left_derivative(tc.p[k]) * _grsym(tc, tc.p[i], tc.p[k])
                r = simplify(lhs - rhs)
                if not is_zero(r):
                    rep.fail(condition="dE/dp", i=i + 1, k=k + 1, j=j + 1, residual=r)
    try:
        Et = invert_matrix(E)
    except NotInvertible as exc:
        raise ESingular(str(exc)) from None
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                lhs = Et[j][k].left_derivative(tc.c[i])
                rhs = Et[i][k].left_derivative(tc.c[j]) * _grsym(tc, tc.c[i], tc.c[j])
                r = simplify(lhs - rhs)
                if not is_zero(r):
                    rep.fail(condition="dEt/dc", i=i + 1, j=j + 1, k=k + 1, residual=r)
    if rep.passed:
        A = [euler_potential(tc.table, tc.p, [E[i][j] for i in range(n)]) for j in range(n)]
        At = [euler_potential(tc.table, tc.c, [Et[j][i] for j in range(n)]) for i in range(n)]
        rep.details["A"] = A if all(a is not None for a in A) else None
        rep.details["Atilde"] = At if all(a is not None for a in At) else None
    return rep


# ---------------------------------------------------------------------------
# factorization


def _point_assignment(tc, names, point):
    t = tc.table
    out = {}
    for x in names:
        if t[x].parity:
            out[x] = 0
        else:
            out[x] = Fraction(point.get(x, 0))
    return out


def _subst(x, assignment):
    if is_zero(x):
        return x
    if not any(x.depends_on(k) for k in assignment):
        return x
    return simplify(x.substitute(assignment, check=False))


def _body_E(tc, E, point):
    full = {x: 0 for x in tc.table.names() if tc.table.scalar_like[tc.table.index(x)]}
    full.update({k: Fraction(v) for k, v in point.items()})
    return body_matrix(E, full)


def default_base_point(tc: TriplecticChart, E=None, radius: int = 3) -> Dict[str, Fraction]:
    """First small integer point (lexicographic, origin first) where the body of E is invertible."""
    E = E if E is not None else tc.E()
    t = tc.table
    even = [x for x in tc.p + tc.c if t[x].parity == 0]
    values = [0]
    for k in range(1, radius + 1):
        values += [k, -k]
    for combo in product(values, repeat=len(even)):
        point = dict(zip(even, (Fraction(v) for v in combo)))
        try:
            if rational_det(_body_E(tc, E, point)) != 0:
                return point
        except ZeroDivisionError:
            continue
    raise BasePointSingular("no small integer point with invertible E found")


def factor_candidates(tc: TriplecticChart, E, base: Mapping[str, object]):
    """``P(p) = E(p, c0)`` and ``C(c) = E(p0, c0)^-1 E(p0, c)``."""
    try:
        E0 = _body_E(tc, E, base)
    except ZeroDivisionError:
        raise BasePointSingular("E has a pole at the base point") from None
    if rational_det(E0) == 0:
        raise BasePointSingular("E is singular at the base point")
    E0inv = rational_inverse(E0)
    at_c0 = _point_assignment(tc, tc.c, base)
    at_p0 = _point_assignment(tc, tc.p, base)
    P = [[_subst(x, at_c0) for x in row] for row in E]
    Ep0 = [[_subst(x, at_p0) for x in row] for row in E]
    n = tc.n
    C = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = _zero(tc.table)
            for k in range(n):
                if E0inv[i][k]:
                    acc = acc + Ep0[k][j] * E0inv[i][k]
            row.append(simplify(acc))
        C.append(row)
    return P, C


def factorize(tc: TriplecticChart, E=None, base: Mapping[str, object] = None):
    """Return ``(P, C)`` with ``P(p) C(c) == E`` exactly, or None when E does not separate."""
    E = E if E is not None else tc.E()
    base = dict(base) if base is not None else default_base_point(tc, E)
    P, C = factor_candidates(tc, E, base)
    if mat_eq(mat_mul(P, C), E):
        return [[simplify(x) for x in row] for row in P], C
    return None


def factorization_residual(tc: TriplecticChart, E=None, base=None):
    E = E if E is not None else tc.E()
    base = dict(base) if base is not None else default_base_point(tc, E)
    P, C = factor_candidates(tc, E, base)
    PC = mat_mul(P, C)
    return [[simplify(RationalFn.lift(e) - RationalFn.lift(x)) for e, x in zip(re, rx)] for re, rx in zip(E, PC)]


def check_differential_factorization(tc: TriplecticChart, E=None) -> bool:
    return differential_factorization_report(tc, E).passed


def differential_factorization_report(tc: TriplecticChart, E=None) -> CheckReport:
    """``d/dp_i [(d/dc_j Et) E] == 0`` for all i, j."""
    E = E if E is not None else tc.E()
    try:
        Et = invert_matrix(E)
    except NotInvertible as exc:
        raise ESingular(str(exc)) from None
    rep = CheckReport("differential_factorization")
    for j, cj in enumerate(tc.c):
        dEt = [[x.left_derivative(cj) for x in row] for row in Et]
        M = mat_mul(dEt, E)
        for i, pi in enumerate(tc.p):
            for r, row in enumerate(M):
                for s, x in enumerate(row):
                    d = simplify(x.left_derivative(pi))
                    if not is_zero(d):
                        rep.fail(p=pi, c=cj, entry=(r + 1, s + 1), residual=d)
    return rep


# ---------------------------------------------------------------------------
# integrating Jacobians


def integrate_jacobian(tc: TriplecticChart, M, names: Sequence[str]) -> List[SuperPoly]:
    """Polynomials ``y_j`` with ``d_left y_j / d names[i] = M[i][j]``, vanishing at the origin."""
    n = len(names)
    out = []
    for j in range(n):
        col = [M[i][j] for i in range(n)]
        pot = euler_potential(tc.table, names, col)
        if pot is None:
            raise NotIntegrable(f"column {j + 1} is not a polynomial gradient")
        out.append(pot)
    return out


# ---------------------------------------------------------------------------
# F3 transformations


@dataclass
class F3Generator:
    """``-F3 = A_j(p) q'^j + B(p, c)``."""

    A: List[SuperPoly]
    B: Optional[SuperPoly] = None


@dataclass
class StepResult:
    chart: TriplecticChart
    forward: Dict[str, object]
    inverse: Dict[str, object]
    exact: bool = True
    status: str = "exact"
    degraded: List[str] = field(default_factory=list)


def _is_identity_map(tc, A) -> bool:
    return all(a == tc.gen(p) for a, p in zip(A, tc.p))


def f3_forward(tc: TriplecticChart, gen: F3Generator):
    """New coordinates as functions of the old ones, plus the Jacobian M."""
    t = tc.table
    n = tc.n
    A = [lift_to(a, t) for a in gen.A]
    for j, a in enumerate(A):
        if any(a.depends_on(x) for x in tc.q + tc.c):
            raise MapNotInvertible(f"A_{j + 1} must depend on the momenta only")
        if not is_zero(a) and a.parity() != t[tc.p[j]].parity:
            raise MapNotInvertible(f"A_{j + 1} has the wrong parity")
    B = lift_to(gen.B, t) if gen.B is not None else _zero(t)
    if any(B.depends_on(x) for x in tc.q):
        raise MapNotInvertible("B must not depend on the positions")
    M = [[A[j].left_derivative(tc.p[i]) for j in range(n)] for i in range(n)]
    try:
        Minv = invert_matrix(M)
    except NotInvertible as exc:
        raise MapNotInvertible(f"dA/dp is not invertible: {exc}") from None
    b = [B.left_derivative(p) for p in tc.p]
    forward = {}
    for j in range(n):
        acc = _zero(t)
        for i in range(n):
            if is_zero(Minv[j][i]):
                continue
            acc = acc + Minv[j][i] * (tc.gen(tc.q[i]) - b[i])
        forward[tc.q[j]] = simplify(acc)
    for j in range(n):
        forward[tc.p[j]] = A[j]
    return forward, M, b


def apply_f3(tc: TriplecticChart, gen: F3Generator, degree: int = None, base: Mapping[str, object] = None) -> StepResult:
    """Canonical transformation with ``q = (dA/dp) q' + dB/dp``, ``p' = A(p)``, ``c' = c``."""
    degree = degree if degree is not None else tc.chart.truncation_degree
    forward, M, b = f3_forward(tc, gen)
    n = tc.n
    t = tc.table
    if _is_identity_map(tc, [forward[p] for p in tc.p]):
        pinv = {}
        exact = True
    else:
        inv = invert_polynomial_map(t, {p: forward[p] for p in tc.p}, base, degree)
        pinv = inv.values
        exact = inv.exact
    inverse = dict(pinv)
    # q in terms of the new coordinates: q = M(p(p')) q' + b(p(p'), c)
    for i in range(n):
        acc = b[i]
        for j in range(n):
            if not is_zero(M[i][j]):
                acc = acc + M[i][j] * tc.gen(tc.q[j])
        inverse[tc.q[i]] = _subst(simplify(acc), pinv) if pinv else simplify(acc)
    inexact = [] if exact else list(tc.p) + list(tc.q)
    res = transform_pencil(tc.pencil, forward, inverse, inexact=inexact, truncate_degree=degree)
    status = "exact" if res.exact else f"verified to order {degree}"
    return StepResult(TriplecticChart(res.pencil), forward, inverse, res.exact, status, res.degraded_entries)


def reparametrize_casimirs(tc: TriplecticChart, Cinv, base: Mapping[str, object] = None, degree: int = None) -> StepResult:
    """Change ``c -> c'`` with ``d_left c'_j / d c_i = Cinv[i][j]``.

    With a polynomial gradient the map is explicit; otherwise ``c(c')`` is
    only known as a series (normalized so that ``c' = 0`` at the base point)
    and brackets that need it are truncated.
    """
    degree = degree if degree is not None else tc.chart.truncation_degree
    t = tc.table
    n = tc.n
    try:
        cprime = integrate_jacobian(tc, Cinv, tc.c)
    except NotIntegrable:
        cprime = None
    if cprime is not None:
        if all(cp == tc.gen(c) for cp, c in zip(cprime, tc.c)):
            return StepResult(tc, {}, {})
        inv = invert_polynomial_map(t, dict(zip(tc.c, cprime)), base, degree)
        forward = dict(zip(tc.c, cprime))
        res = transform_pencil(tc.pencil, forward, inv.values,
                               inexact=[] if inv.exact else list(tc.c), truncate_degree=degree)
        status = "exact" if res.exact else f"verified to order {degree}"
        return StepResult(TriplecticChart(res.pencil), forward, inv.values, res.exact, status, res.degraded_entries)
    # no polynomial antiderivative: E'' = E' Cinv directly, F re-expressed by series
    E = tc.E()
    Enew = mat_mul(E, Cinv)
    F = tc.F()
    needs = any(x.depends_on(c) for row in F for x in row for c in tc.c)
    Fnew = F
    exact = True
    inverse = {}
    if needs:
        Cmat = invert_matrix(Cinv)
        series = inverse_from_jacobian(t, tc.c, Cmat, base, degree)
        inverse = series.values
        exact = False
        Fnew = [[_trunc(_subst(x, inverse), degree) for x in row] for row in F]
    chart = chart_from_EF(n, tc.epsilon, tc.position_parities(), E=[[simplify(x) for x in row] for row in Enew],
                          F={(i, j): Fnew[i][j] for i in range(n) for j in range(n)}, chart=tc.chart)
    status = "exact" if exact else f"verified to order {degree}"
    degraded = [] if exact else [f"F[{i + 1}][{j + 1}]" for i in range(n) for j in range(n) if not is_zero(F[i][j])]
    return StepResult(chart, {"c": "defined by its Jacobian"}, inverse, exact, status, degraded)


def _trunc(x, degree):
    return x.truncate(degree) if isinstance(x, SuperPoly) else x


# ---------------------------------------------------------------------------
# killing F with the homotopy


def beta_two_form(tc: TriplecticChart, algebra, F=None) -> SuperPoly:
    """``beta = 1/2 eta_i F^{ij} eta_j (-1)^{eps(eta_j) eps}`` in the algebra variables."""
    F = F if F is not None else tc.F()
    n = tc.n
    to_alg = {}
    for i in range(n):
        to_alg[tc.p[i]] = algebra.x(1, i + 1)
        to_alg[tc.c[i]] = algebra.x(2, i + 1)
    out = algebra.zero()
    eps = tc.epsilon
    for i in range(n):
        for j in range(n):
            f = F[i][j]
            if is_zero(f):
                continue
            f = simplify(f)
            if isinstance(f, RationalFn):
                raise NotClosed("F must be polynomial for the homotopy")
            g = f.substitute(to_alg, target=algebra.table, check=False)
            eta_j_par = algebra.table[algebra.name(3, j + 1)].parity
            s = -1 if (eta_j_par * eps) % 2 else 1
            out = out + algebra.x(3, i + 1) * g * algebra.x(3, j + 1) * (Fraction(s, 2))
    return out


def bridge_to_chart(tc: TriplecticChart, degree: int = None):
    """Algebra with ``x1 -> p``, ``x2 -> c``, ``x3 -> eta`` and the two-form beta of F.

    Returns ``(algebra, beta, back)`` where ``back`` maps algebra generators to chart ones.
    """
    from .homotopy import TriGradedAlgebra

    F = tc.F()
    t = tc.table
    pars = [t[p].parity for p in tc.p]
    nonzero = [x.degree() if isinstance(x, SuperPoly) else 0 for row in F for x in row if not is_zero(x)]
    deg = max(nonzero, default=0) + 2
    algebra = TriGradedAlgebra(pars, degree=max(deg, degree or 0))
    beta = beta_two_form(tc, algebra, F) if nonzero else algebra.zero()
    back = {}
    for i in range(tc.n):
        back[algebra.name(1, i + 1)] = tc.gen(tc.p[i])
        back[algebra.name(2, i + 1)] = tc.gen(tc.c[i])
    return algebra, beta, back


def kill_f_potential(tc: TriplecticChart, degree: int = None) -> SuperPoly:
    """Zero-form ``B`` with ``beta = d^2 d^1 B`` (requires E = Id)."""
    from .homotopy import NotClosed as FormNotClosed

    E, F = tc.E(), tc.F()
    if not mat_is_identity(E):
        raise EnotIdentity("E must be the identity before F can be removed")
    if all(is_zero(x) for row in F for x in row):
        return _zero(tc.table)
    algebra, beta, back = bridge_to_chart(tc, degree)
    try:
        eta = algebra.biPoincareHomotopy(beta)
    except FormNotClosed as exc:
        raise NotClosed(str(exc), list(exc.residuals.values())) from None
    # d^1 d^2 anticommute, so beta = d^2 d^1 B means B = -eta
    return -eta.substitute(back, target=tc.table, check=False)


def kill_f(tc: TriplecticChart, degree: int = None) -> Tuple[SuperPoly, StepResult]:
    B = kill_f_potential(tc, degree)
    if B.is_zero():
        return B, StepResult(tc, {}, {})
    step = apply_f3(tc, F3Generator([tc.gen(p) for p in tc.p], B), degree)
    return B, step


def gauge_residual(tc: TriplecticChart, B: SuperPoly, F=None):
    """``F^{ij} - ({q_i, {q_j, B}^1}^2 - sign (i<->j))``; zero when B generates F."""
    F = F if F is not None else tc.F()
    S1, S2 = tc.pencil.first, tc.pencil.second
    n = tc.n
    t = tc.table
    eps = tc.epsilon
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            qi, qj = tc.gen(tc.q[i]), tc.gen(tc.q[j])
            a = bracket(qi, bracket(qj, B, S1), S2)
            b = bracket(qj, bracket(qi, B, S1), S2)
            s = -1 if ((t[tc.q[i]].parity + eps) * (t[tc.q[j]].parity + eps)) % 2 else 1
            row.append(simplify(F[i][j] - (a - b * s)))
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# transformation laws


def check_f3_laws(tc: TriplecticChart, gen: F3Generator) -> CheckReport:
    """Tensor law for E and the inhomogeneous law for F, both in old coordinates."""
    forward, M, b = f3_forward(tc, gen)
    S2 = tc.pencil.second
    n = tc.n
    t = tc.table
    eps = tc.epsilon
    rep = CheckReport("f3_laws")
    E, F = tc.E(), tc.F()
    qn = [forward[q] for q in tc.q]
    pn = [forward[p] for p in tc.p]
    Enew = [[bracket(qn[j], tc.gen(tc.c[k]), S2) for k in range(n)] for j in range(n)]
    Fnew = [[bracket(qn[j], qn[k], S2) for k in range(n)] for j in range(n)]
    ME = mat_mul(M, Enew)
    for i in range(n):
        for k in range(n):
            if not _eq(E[i][k], ME[i][k]):
                rep.fail(law="E tensor", i=i + 1, k=k + 1, residual=simplify(E[i][k] - ME[i][k]))
    B = lift_to(gen.B, t) if gen.B is not None else _zero(t)
    for i in range(n):
        for m in range(n):
            lhs = F[i][m]
            for j in range(n):
                for k in range(n):
                    if is_zero(M[i][j]) or is_zero(Fnew[j][k]):
                        continue
                    r = pn[k].right_derivative(tc.p[m])
                    if is_zero(r):
                        continue
                    sgn = -1 if ((t[tc.q[k]].parity + t[tc.q[m]].parity) * (1 - eps)) % 2 else 1
                    lhs = lhs - M[i][j] * Fnew[j][k] * r * sgn
            rhs = _zero(t)
            for swapped, (a, bb) in enumerate(((i, m), (m, i))):
                term = _zero(t)
                inner = B.left_derivative(tc.p[bb])
                for kk in range(n):
                    term = term + E[a][kk] * inner.left_derivative(tc.c[kk])
                if not swapped:
                    rhs = rhs + term
                else:
                    s = -1 if (t[tc.p[i]].parity * t[tc.p[m]].parity) % 2 else 1
                    rhs = rhs - term * s
            if not _eq(simplify(lhs), rhs):
                rep.fail(law="F transformation", i=i + 1, m=m + 1, residual=simplify(lhs - rhs))
    return rep


def gauge_law_F(tc: TriplecticChart, B: SuperPoly):
    """``F'^{ij} = F^{ij} - (E^i_k d_c_k d_p_j B - sign (i<->j))`` for a pure gauge shift."""
    E, F = tc.E(), tc.F()
    n = tc.n
    t = tc.table
    B = lift_to(B, t)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            def term(a, b):
                acc = _zero(t)
                d = B.left_derivative(tc.p[b])
                for k in range(n):
                    acc = acc + E[a][k] * d.left_derivative(tc.c[k])
                return acc
            s = -1 if (t[tc.p[i]].parity * t[tc.p[j]].parity) % 2 else 1
            row.append(simplify(F[i][j] - (term(i, j) - term(j, i) * s)))
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# para-Dolbeault operators and presymplectic data


class ParaDolbeault:
    """``d1 = dp d/dp``, ``dt1 = dc d/dc``, ``d2 = dp E d/dc``, ``dt2 = dc Et d/dp``."""

    def __init__(self, tc: TriplecticChart):
        self.tc = tc
        E = tc.E()
        try:
            Et = invert_matrix(E)
        except NotInvertible as exc:
            raise ESingular(str(exc)) from None
        self.table = with_forms(tc.table, tc.q + tc.p + tc.c)
        t = self.table
        n = tc.n
        dp = [SuperPoly.generator(t, form_name(p)) for p in tc.p]
        dc = [SuperPoly.generator(t, form_name(c)) for c in tc.c]
        self._d1 = [(dp[i], tc.p[i]) for i in range(n)]
        self._dt1 = [(dc[i], tc.c[i]) for i in range(n)]
        self._d2 = []
        for j in range(n):
            coeff = _zero(t)
            for i in range(n):
                if not is_zero(E[i][j]):
                    coeff = coeff + dp[i] * lift_to(E[i][j], t)
            self._d2.append((simplify(coeff), tc.c[j]))
        self._dt2 = []
        for j in range(n):
            coeff = _zero(t)
            for i in range(n):
                if not is_zero(Et[i][j]):
                    coeff = coeff + dc[i] * lift_to(simplify(Et[i][j]), t)
            self._dt2.append((simplify(coeff), tc.p[j]))

    def lift(self, f):
        return lift_to(f, self.table)

    def _apply(self, pairs, f):
        f = self.lift(f)
        out = SuperPoly(self.table, {})
        for coeff, name in pairs:
            if is_zero(coeff) or not f.depends_on(name):
                continue
            out = out + coeff * f.left_derivative(name)
        return simplify(out)

    def d1(self, f):
        return self._apply(self._d1, f)

    def dt1(self, f):
        return self._apply(self._dt1, f)

    def d2(self, f):
        return self._apply(self._d2, f)

    def dt2(self, f):
        return self._apply(self._dt2, f)

    def operator(self, name: str):
        return {"d1": self.d1, "dt1": self.dt1, "d2": self.d2, "dt2": self.dt2}[name]

    def anticommutator(self, a: str, b: str, f):
        """The operators are even with form degree 1, so their graded commutator is ``AB + BA``."""
        A, B = self.operator(a), self.operator(b)
        return simplify(A(B(f)) + B(A(f)))

    def F_two_form(self):
        """``1/2 dp_i F^{ij} dp_j (-1)^{eps_j (1 - eps)}``."""
        tc = self.tc
        t = self.table
        F = tc.F()
        out = SuperPoly(t, {})
        for i in range(tc.n):
            for j in range(tc.n):
                if is_zero(F[i][j]):
                    continue
                s = -1 if (tc.table[tc.q[j]].parity * (1 - tc.epsilon)) % 2 else 1
                dpi = SuperPoly.generator(t, form_name(tc.p[i]))
                dpj = SuperPoly.generator(t, form_name(tc.p[j]))
                out = out + dpi * self.lift(F[i][j]) * dpj * Fraction(s, 2)
        return simplify(out)


def presymplectic_data(tc: TriplecticChart):
    """Potential ``theta = -dp_j q^j``, ``omega = dp_i dq^i`` and the exterior derivative check."""
    t = with_forms(tc.table, tc.q + tc.p + tc.c)
    theta = SuperPoly(t, {})
    omega = SuperPoly(t, {})
    for qn, pn in zip(tc.q, tc.p):
        dp = SuperPoly.generator(t, form_name(pn))
        theta = theta - dp * SuperPoly.generator(t, qn)
        omega = omega + dp * SuperPoly.generator(t, form_name(qn))
    names = tc.q + tc.p + tc.c
    dtheta = vector_field(theta, [(SuperPoly.generator(t, form_name(x)), x) for x in names])
    return {"theta": theta, "omega": omega, "exact": dtheta == omega, "table": t}


# ---------------------------------------------------------------------------
# bi-canonical form and maps


def check_bi_darboux(tc: TriplecticChart) -> CheckReport:
    """Every fundamental bracket equals its canonical value exactly."""
    rep = CheckReport("bi_darboux_form")
    canon = canonical_chart(tc.n, tc.epsilon, tc.position_parities())
    if canon.chart != tc.chart:
        canon = chart_from_EF(tc.n, tc.epsilon, tc.position_parities(), chart=tc.chart)
    names = tc.chart.names
    for a in (1, 2):
        S, C = tc.pencil.structure(a), canon.pencil.structure(a)
        for x in names:
            for y in names:
                if not _eq(S.entry(x, y), C.entry(x, y)):
                    rep.fail(bracket=a, A=x, B=y, value=S.entry(x, y))
    return rep


def check_bi_canonical(tc: TriplecticChart, forward: Mapping[str, object]) -> CheckReport:
    """Check a map from a bi-Darboux chart to new coordinates ``forward`` (in old ones)."""
    rep = CheckReport("bi_canonical")
    t = tc.table
    n = tc.n
    fw = {x: lift_to(forward.get(x, tc.gen(x)), t) if not isinstance(forward.get(x), str) else forward[x]
          for x in tc.chart.names}
    # brackets of the new coordinates, computed in the old chart
    S1, S2 = tc.pencil.first, tc.pencil.second
    canon = chart_from_EF(n, tc.epsilon, tc.position_parities(), chart=tc.chart)
    for a, S in ((1, S1), (2, S2)):
        C = canon.pencil.structure(a)
        for x in tc.chart.names:
            for y in tc.chart.names:
                v = bracket(fw[x], fw[y], S)
                if not _eq(v, C.entry(x, y)):
                    rep.fail(check="canonical brackets", bracket=a, A=x, B=y, value=v)
    Jp = [[simplify(fw[tc.p[j]].left_derivative(tc.p[i])) for j in range(n)] for i in range(n)]
    Jc = [[simplify(fw[tc.c[j]].left_derivative(tc.c[i])) for j in range(n)] for i in range(n)]
    for J, label in ((Jp, "p"), (Jc, "c")):
        for row in J:
            for x in row:
                if not (RationalFn.lift(x).is_constant()):
                    rep.fail(check="constant Jacobian", momenta=label, entry=x)
    if not mat_eq(Jp, Jc):
        rep.fail(check="common Jacobian", Jp=Jp, Jc=Jc)
    for j in range(n):
        if any(fw[tc.p[j]].depends_on(x) for x in tc.q + tc.c):
            rep.fail(check="p' depends on p only", index=j + 1)
        if any(fw[tc.c[j]].depends_on(x) for x in tc.q + tc.p):
            rep.fail(check="c' depends on c only", index=j + 1)
    rep.details["J"] = Jp
    if rep.passed:
        # b = q - J q'; must be free of q
        b = []
        for i in range(n):
            acc = tc.gen(tc.q[i])
            for j in range(n):
                if not is_zero(Jp[i][j]):
                    acc = acc - Jp[i][j] * fw[tc.q[j]]
            acc = simplify(acc)
            if any(acc.depends_on(x) for x in tc.q):
                rep.fail(check="positions affine", index=i + 1, residual=acc)
            b.append(acc)
        rep.details["b"] = b
        if rep.passed:
            Bp = euler_potential(t, tc.p, b)
            Bc = euler_potential(t, tc.c, b)
            rep.details["B1"] = Bp
            rep.details["B2"] = Bc
            if any(not is_zero(x) for x in b) and (Bp is None or Bc is None):
                rep.fail(check="shift is a gradient for both momenta", b=b)
    return rep


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class PipelineResult:
    success: bool
    chart: Optional[TriplecticChart] = None
    P: Optional[list] = None
    C: Optional[list] = None
    B: Optional[SuperPoly] = None
    base_point: Optional[Dict[str, Fraction]] = None
    stages: List[dict] = field(default_factory=list)
    obstruction: Optional[dict] = None
    exact: bool = True

    @property
    def status(self) -> str:
        if not self.success:
            return "obstructed"
        return "success" if self.exact else "success (verified to truncation order)"


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError:
        raise
    except Exception as exc:  # tag every failure with its stage
        raise StageError(name, exc) from exc


def bi_darboux_pipeline(tc: TriplecticChart, base: Mapping[str, object] = None, degree: int = None) -> PipelineResult:
    degree = degree if degree is not None else tc.chart.truncation_degree
    E, F = _stage("extractEF", extract_EF, tc)
    result = PipelineResult(False)
    clos = _stage("checkClosedness", check_closedness, tc, E)
    if not clos.passed:
        raise StageError("checkClosedness", NotClosed("E violates the closedness conditions", clos.violations))
    result.stages.append({"stage": "checkClosedness", "passed": True})
    base = dict(base) if base is not None else _stage("basePoint", default_base_point, tc, E)
    result.base_point = {k: Fraction(v) for k, v in base.items()}
    fac = _stage("factorize", factorize, tc, E, base)
    if fac is None:
        result.obstruction = _stage("obstruction", obstruction_report, tc, E, base)
        result.stages.append({"stage": "factorize", "passed": False})
        return result
    P, C = fac
    result.P, result.C = P, C
    result.stages.append({"stage": "factorize", "passed": True, "P": P, "C": C})
    pprime = _stage("integrateJacobian", integrate_jacobian, tc, P, tc.p)
    result.stages.append({"stage": "integrateJacobian", "p'": pprime})
    step = _stage("applyF3", apply_f3, tc, F3Generator(pprime), degree, base)
    result.exact &= step.exact
    result.stages.append({"stage": "applyF3", "A": pprime, "B": 0, "status": step.status})
    cur = step.chart
    Cinv = _stage("integrateJacobian", invert_matrix, C)
    step = _stage("reparametrizeCasimirs", reparametrize_casimirs, cur, Cinv, base, degree)
    result.exact &= step.exact
    result.stages.append({"stage": "reparametrizeCasimirs", "Cinv": Cinv,
                          "c'": step.forward.get("c", [step.forward.get(c) for c in cur.c]) if step.forward else None,
                          "status": step.status})
    cur = step.chart
    E2 = cur.E()
    if not mat_is_identity(E2):
        raise StageError("reparametrizeCasimirs", EnotIdentity("E did not become the identity"))
    B, step = _stage("killF", kill_f, cur, degree)
    result.exact &= step.exact
    result.B = B
    result.stages.append({"stage": "killF", "B": B, "status": step.status})
    cur = step.chart
    final = check_bi_darboux(cur)
    result.stages.append({"stage": "verify", "passed": final.passed})
    result.chart = cur
    result.success = final.passed
    if not final.passed:
        result.obstruction = {"verification": final.to_dict()}
    return result


def obstruction_report(tc: TriplecticChart, E, base) -> dict:
    from .parahyper import obata_connection, obata_curvature

    res = factorization_residual(tc, E, base)
    diff = differential_factorization_report(tc, E)
    conn = obata_connection(tc)
    curv = obata_curvature(conn)
    witness = None
    for key, val in sorted(curv.components.items()):
        if not is_zero(val):
            witness = {"component": key, "value": val}
            break
    return {
        "factorization_residual": res,
        "differential_condition": diff.passed,
        "differential_residuals": [v["residual"] for v in diff.violations],
        "curvature_flat": curv.is_flat,
        "curvature_witness": witness,
    }


# camelCase spellings
extractEF = extract_EF
checkClosedness = check_closedness
checkDifferentialFactorization = check_differential_factorization
integrateJacobian = integrate_jacobian
applyF3 = apply_f3
killF = kill_f
bridgeToChart = bridge_to_chart
paraDolbeault = ParaDolbeault
checkBiCanonical = check_bi_canonical
biDarbouxPipeline = bi_darboux_pipeline
