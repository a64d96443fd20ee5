"""Poisson structures given by their fundamental bracket matrices.

A structure stores ``Pi[A][B] = {z^A, z^B}`` for the chart coordinates and
extends to arbitrary functions by

    {f, g} = sum_{A,B} (f <-d/dz^A) Pi^{AB} (d/dz^B -> g)

with right derivatives on the left argument and left derivatives on the right
one.  For Darboux data this reproduces the usual canonical bracket including
its graded signs.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .report import CheckReport
from .superalgebra import (
    GradedVariable,
    RationalFn,
    SuperPoly,
    VariableTable,
    is_zero,
    rational_rank,
    simplify,
)


class ChartMismatch(ValueError):
    pass


class NotAntisymmetric(ValueError):
    pass


class CasimirPrecheckFailed(ValueError):
    pass


class SingularGroupElement(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """Coordinates z^A with a common intrinsic bracket parity ``epsilon``."""

    table: VariableTable
    epsilon: int = 0
    truncation_degree: int = 8

    @property
    def names(self) -> List[str]:
        return [v.name for v in self.table.variables if v.role != "form"]

    def coordinates(self) -> List[GradedVariable]:
        return [v for v in self.table.variables if v.role != "form"]

    def by_role(self, role: str) -> List[str]:
        vs = [v for v in self.table.variables if v.role == role]
        return [v.name for v in sorted(vs, key=lambda v: v.index)]

    @property
    def n(self) -> int:
        return len(self.by_role("position"))

    def parity(self, name: str) -> int:
        return self.table[name].parity


def triplectic_chart(n: int, epsilon: int = 0, position_parities: Sequence[int] = None,
                     truncation_degree: int = 8) -> Chart:
    """Chart ``q1..qn, p1..pn, c1..cn`` with eps(p_i) = eps(c_i) = eps_i + epsilon."""
    pp = list(position_parities) if position_parities is not None else [0] * n
    if len(pp) != n:
        raise ValueError("need one parity per position")
    vs = [GradedVariable(f"q{i + 1}", pp[i], 0, "position", i + 1) for i in range(n)]
    vs += [GradedVariable(f"p{i + 1}", (pp[i] + epsilon) % 2, 0, "momentum", i + 1) for i in range(n)]
    vs += [GradedVariable(f"c{i + 1}", (pp[i] + epsilon) % 2, 0, "casimir", i + 1) for i in range(n)]
    return Chart(VariableTable(vs), epsilon, truncation_degree)


def _sym_sign(eps_a: int, eps_b: int, epsilon: int) -> int:
    return -1 if ((eps_a + epsilon) * (eps_b + epsilon)) % 2 else 1


class PoissonStructure:
    """Fundamental bracket matrix over a chart, stored sparsely by name pairs."""

    def __init__(self, chart: Chart, entries: Mapping[Tuple[str, str], object], complete: bool = True,
                 check: bool = True):
        self.chart = chart
        table = chart.table
        pi: Dict[Tuple[str, str], object] = {}
        for (a, b), v in entries.items():
            if isinstance(v, (int, Fraction)):
                v = SuperPoly.constant(table, v)
            if is_zero(v):
                continue
            pi[(a, b)] = simplify(v)
        if complete:
            for (a, b), v in list(pi.items()):
                partner = -v * _sym_sign(table[a].parity, table[b].parity, chart.epsilon)
                if (b, a) in pi:
                    if check and not _equal(pi[(b, a)], partner):
                        raise NotAntisymmetric(f"{{{a},{b}}} and {{{b},{a}}} violate graded antisymmetry")
                else:
                    pi[(b, a)] = simplify(partner)
        self.pi = pi
        if check:
            self._check_parities()
            if not complete:
                rep = check_antisymmetry(self)
                if not rep.passed:
                    raise NotAntisymmetric(str(rep.violations[0]))

    @property
    def table(self) -> VariableTable:
        return self.chart.table

    @property
    def epsilon(self) -> int:
        return self.chart.epsilon

    def _check_parities(self):
        t = self.table
        for (a, b), v in self.pi.items():
            want = (t[a].parity + t[b].parity + self.epsilon) % 2
            par = v.parity()
            if par is None or par != want:
                raise ValueError(f"bracket {{{a},{b}}} has parity {par}, expected {want}")

    def entry(self, a: str, b: str):
        v = self.pi.get((a, b))
        return v if v is not None else SuperPoly(self.table, {})

    def matrix(self) -> List[List[object]]:
        names = self.chart.names
        return [[self.entry(a, b) for b in names] for a in names]

    def __eq__(self, other):
        if not isinstance(other, PoissonStructure):
            return NotImplemented
        if self.chart != other.chart:
            return False
        keys = set(self.pi) | set(other.pi)
        return all(_equal(self.entry(*k), other.entry(*k)) for k in keys)

    def scaled(self, lam) -> "PoissonStructure":
        lam = Fraction(lam)
        return PoissonStructure(self.chart, {k: v * lam for k, v in self.pi.items()}, complete=False, check=False)

    def __add__(self, other: "PoissonStructure") -> "PoissonStructure":
        if self.chart != other.chart:
            raise ChartMismatch("structures live on different charts")
        keys = set(self.pi) | set(other.pi)
        return PoissonStructure(self.chart, {k: self.entry(*k) + other.entry(*k) for k in keys},
                                complete=False, check=False)

    def bracket(self, f, g):
        return bracket(f, g, self)

    def depends_on(self, name: str) -> bool:
        return any(v.depends_on(name) for v in self.pi.values())


def _equal(x, y) -> bool:
    if isinstance(x, SuperPoly) and isinstance(y, SuperPoly):
        return x == y
    return RationalFn.lift(x) == RationalFn.lift(y)


def _sub(x, y):
    return simplify(x - y)


def _coerce(f, table):
    if isinstance(f, (int, Fraction)):
        return SuperPoly.constant(table, f)
    if f.table != table:
        raise ChartMismatch("function is not defined over the structure's chart")
    return f


def bracket(f, g, S: PoissonStructure):
    """``{f, g}`` for the structure ``S``; works for SuperPoly and RationalFn."""
    table = S.table
    f = _coerce(f, table)
    g = _coerce(g, table)
    right = {}
    left = {}
    result = SuperPoly(table, {})
    for (a, b), v in S.pi.items():
        if a not in right:
            right[a] = simplify(f.right_derivative(a)) if f.depends_on(a) else None
        if right[a] is None or is_zero(right[a]):
            continue
        if b not in left:
            left[b] = simplify(g.left_derivative(b)) if g.depends_on(b) else None
        if left[b] is None or is_zero(left[b]):
            continue
        result = result + right[a] * v * left[b]
    return simplify(result)


def _jacobi_term(S_a: PoissonStructure, S_b: PoissonStructure, x: str, y: str, z: str):
    """{{x,y}^a, z}^b for coordinate names."""
    inner = S_a.entry(x, y)
    if is_zero(inner):
        return SuperPoly(S_a.table, {})
    return bracket(inner, SuperPoly.generator(S_a.table, z), S_b)


def symmetrized_jacobiator(S_a: PoissonStructure, S_b: PoissonStructure, f, g, h, epsilon: int):
    """Cyclic sum with a and b symmetrized, on arbitrary homogeneous f, g, h."""
    total = SuperPoly(S_a.table, {})
    items = [f, g, h]
    for k in range(3):
        u, v, w = items[k], items[(k + 1) % 3], items[(k + 2) % 3]
        pu, pw = u.parity(), w.parity()
        s = _sym_sign(pu, pw, epsilon)
        inner_a = bracket(u, v, S_a)
        inner_b = bracket(u, v, S_b)
        term = bracket(inner_a, w, S_b) + bracket(inner_b, w, S_a)
        total = total + term * s
    return simplify(total)


def _coordinate_jacobiator(S_a, S_b, x, y, z, epsilon):
    t = S_a.table
    trip = [x, y, z]
    total = SuperPoly(t, {})
    for k in range(3):
        u, v, w = trip[k], trip[(k + 1) % 3], trip[(k + 2) % 3]
        s = _sym_sign(t[u].parity, t[w].parity, epsilon)
        term = _jacobi_term(S_a, S_b, u, v, w) + _jacobi_term(S_b, S_a, u, v, w)
        if not is_zero(term):
            total = total + term * s
    return simplify(total)


def check_antisymmetry(S: PoissonStructure) -> CheckReport:
    rep = CheckReport("antisymmetry")
    t = S.table
    for (a, b), v in S.pi.items():
        partner = S.entry(b, a)
        want = -v * _sym_sign(t[a].parity, t[b].parity, S.epsilon)
        if not _equal(partner, want):
            rep.fail(A=a, B=b, residual=_sub(partner, want))
    return rep


def check_jacobi(S: PoissonStructure) -> CheckReport:
    """Plain Jacobi identity on all coordinate triples."""
    rep = _check_pair(S, S, "jacobi")
    return rep


def _check_pair(S_a, S_b, name):
    rep = CheckReport(name)
    names = S_a.chart.names
    for x, y, z in combinations_with_replacement(names, 3):
        res = _coordinate_jacobiator(S_a, S_b, x, y, z, S_a.epsilon)
        if not is_zero(res):
            rep.fail(triple=(x, y, z), residual=res)
    return rep


class PoissonPencil:
    def __init__(self, first: PoissonStructure, second: PoissonStructure):
        if first.chart != second.chart:
            raise ChartMismatch("brackets live on different charts")
        self.first = first
        self.second = second

    @property
    def chart(self) -> Chart:
        return self.first.chart

    @property
    def table(self) -> VariableTable:
        return self.first.table

    def structure(self, a: int) -> PoissonStructure:
        return self.first if a == 1 else self.second

    def combination(self, lam1, lam2) -> PoissonStructure:
        return self.first.scaled(lam1) + self.second.scaled(lam2)

    def __eq__(self, other):
        return isinstance(other, PoissonPencil) and self.first == other.first and self.second == other.second


def check_symmetrized_jacobi(P: PoissonPencil) -> CheckReport:
    """Symmetrized Jacobi identity for all index pairs (a, b) on coordinate triples."""
    rep = CheckReport("symmetrized_jacobi")
    for a, b in ((1, 1), (1, 2), (2, 2)):
        sub = _check_pair(P.structure(a), P.structure(b), f"jacobi_{a}{b}")
        for v in sub.violations:
            rep.fail(a=a, b=b, **v)
    return rep


def random_poly(table: VariableTable, names: Sequence[str], rng: random.Random, degree: int = 2,
                terms: int = 3, parity: Optional[int] = None) -> SuperPoly:
    """Random homogeneous-parity polynomial in the given generators."""
    out = SuperPoly(table, {})
    tries = 0
    while len(out.terms) < terms and tries < 50 * terms:
        tries += 1
        d = rng.randint(0, degree)
        exps: Dict[str, int] = {}
        for _ in range(d):
            v = rng.choice(list(names))
            exps[v] = exps.get(v, 0) + 1
        mono = SuperPoly.monomial(table, exps, rng.choice([1, -1, 2, Fraction(1, 2), 3]))
        if mono.is_zero():
            continue
        if parity is not None and mono.parity() != parity:
            continue
        out = out + mono
    return out


def jacobi_spot_check(P: PoissonPencil, rng: random.Random, trials: int = 3, degree: int = 2) -> CheckReport:
    """Symmetrized Jacobi on random homogeneous polynomials."""
    rep = CheckReport("jacobi_spot_check")
    names = P.chart.names
    for _ in range(trials):
        fs = [random_poly(P.table, names, rng, degree, parity=rng.randint(0, 1)) for _ in range(3)]
        for a, b in ((1, 1), (1, 2), (2, 2)):
            res = symmetrized_jacobiator(P.structure(a), P.structure(b), *fs, P.chart.epsilon)
            if not is_zero(res):
                rep.fail(a=a, b=b, functions=fs, residual=res)
    return rep


def is_casimir(f, S: PoissonStructure) -> bool:
    f = _coerce(f, S.table)
    for name in S.chart.names:
        if not is_zero(bracket(f, SuperPoly.generator(S.table, name), S)):
            return False
    return True


def check_mutual_involutivity(P: PoissonPencil, casimirs_of_second: Iterable, casimirs_of_first: Iterable,
                              precheck: bool = True) -> CheckReport:
    """``{xi_ai, xi_bj}^c = 0`` for all a, b, c.

    ``casimirs_of_second`` are the xi_1 (momenta p, Casimirs of bracket 2) and
    ``casimirs_of_first`` the xi_2 (c variables, Casimirs of bracket 1).
    """
    xi1 = [_coerce(f, P.table) for f in casimirs_of_second]
    xi2 = [_coerce(f, P.table) for f in casimirs_of_first]
    if precheck:
        for f in xi1:
            if not is_casimir(f, P.second):
                raise CasimirPrecheckFailed(f"{f} is not a Casimir of the second bracket")
        for f in xi2:
            if not is_casimir(f, P.first):
                raise CasimirPrecheckFailed(f"{f} is not a Casimir of the first bracket")
    rep = CheckReport("mutual_involutivity")
    funcs = [(1, i, f) for i, f in enumerate(xi1)] + [(2, i, f) for i, f in enumerate(xi2)]
    for a, i, f in funcs:
        for b, j, g in funcs:
            for c in (1, 2):
                val = bracket(f, g, P.structure(c))
                if not is_zero(val):
                    rep.fail(first=str(f), second=str(g), bracket=c, residual=val)
    return rep


def _inverse2(g):
    (a, b), (c, d) = [[Fraction(x) for x in row] for row in g]
    det = a * d - b * c
    if det == 0:
        raise SingularGroupElement("group element has zero determinant")
    return [[d / det, -b / det], [-c / det, a / det]]


def gl2_rotate(P: PoissonPencil, g) -> PoissonPencil:
    """``{.,.}'^b = {.,.}^a (g^-1)_a^b`` with ``g[a][b] = g_a^b``."""
    gi = _inverse2(g)
    new = []
    for b in range(2):
        s = P.first.scaled(gi[0][b]) + P.second.scaled(gi[1][b])
        new.append(s)
    return PoissonPencil(*new)


def body_rank(S: PoissonStructure, point: Mapping[str, object]) -> int:
    """Rank over Q of the bracket matrix evaluated on the even body at ``point``."""
    names = S.chart.names
    full = {v.name: 0 for v in S.table.variables if not S.table.scalar_like[S.table.index(v.name)]}
    full.update({k: Fraction(v) for k, v in point.items()})
    rows = []
    for a in names:
        row = []
        for b in names:
            v = S.entry(a, b)
            row.append(Fraction(0) if is_zero(v) else v.evaluate(full))
        rows.append(row)
    return rational_rank(rows)
