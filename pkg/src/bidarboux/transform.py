"""Coordinate changes on a chart.

New fundamental brackets are computed in the old coordinates straight from
the bracket formula, ``{z'^A, z'^B} = {phi^A(z), phi^B(z)}``, and then
re-expressed in the new coordinates by substituting the inverse map.  The
substitution is lazy: a bracket only pays for the variables it really
depends on, so a map whose inverse is only known as a truncated series still
gives exact results for brackets that do not need it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

from .poisson import PoissonPencil, PoissonStructure
from .superalgebra import (
    GradedVariable,
    NotInvertible,
    RationalFn,
    SuperPoly,
    VariableTable,
    is_zero,
    rational_inverse,
    simplify,
)


class MapNotInvertible(ValueError):
    pass


class TruncationResidual(ValueError):
    pass


@dataclass
class MapInverse:
    """Old coordinates as functions of the new ones (same variable names)."""

    values: Dict[str, object]
    exact: bool = True
    degree: Optional[int] = None
    residual_degree: Optional[int] = None

    @property
    def status(self) -> str:
        return "exact" if self.exact else f"verified to order {self.degree}"


def _aux_table(table: VariableTable, names: Sequence[str]) -> VariableTable:
    vs = [GradedVariable(f"_d{k}", table[n].parity) for k, n in enumerate(names)]
    vs += [GradedVariable(f"_u{k}", table[n].parity) for k, n in enumerate(names)]
    return VariableTable(vs)


def _base_value(table, name, base):
    v = table[name]
    if v.parity or v.form_degree:
        return Fraction(0)
    return Fraction(base.get(name, 0))


def invert_polynomial_map(table: VariableTable, forward: Mapping[str, SuperPoly], base: Mapping[str, object] = None,
                          degree: int = 8) -> MapInverse:
    """Invert ``y = forward(x)`` around ``base`` by fixed-point series iteration.

    The inverse is returned as polynomials in the new coordinates (which reuse
    the old names).  An exact composition check decides between an exact
    inverse, one valid to order ``degree``, and :class:`TruncationResidual`.
    """
    base = dict(base or {})
    names = list(forward)
    aux = _aux_table(table, names)
    d = [SuperPoly.generator(aux, f"_d{k}") for k in range(len(names))]
    u = [SuperPoly.generator(aux, f"_u{k}") for k in range(len(names))]
    shift = {n: d[k] + _base_value(table, n, base) for k, n in enumerate(names)}
    shifted = []
    for n in names:
        f = forward[n]
        if isinstance(f, RationalFn):
            if not f.is_polynomial():
                raise MapNotInvertible("only polynomial maps can be inverted as series")
            f = f.num
        extra = f.free_variables() - set(names)
        if extra:
            raise MapNotInvertible(f"map for {n!r} depends on {sorted(extra)} outside the mapped set")
        shifted.append(f.substitute(shift, target=aux, check=False))
    a0 = [f.constant_term() for f in shifted]
    lin = []
    for k, f in enumerate(shifted):
        row = []
        for m in range(len(names)):
            row.append(f.terms.get(((m, 1),), Fraction(0)))
        lin.append(row)
    try:
        linv = rational_inverse(lin)
    except NotInvertible:
        raise MapNotInvertible("linear part of the map is singular at the base point") from None
    nonlin = []
    for k, f in enumerate(shifted):
        terms = {m: c for m, c in f.terms.items() if sum(e for _, e in m) >= 2}
        nonlin.append(SuperPoly(aux, terms))

    def apply_linv(vec):
        out = []
        for m in range(len(names)):
            acc = SuperPoly(aux, {})
            for k in range(len(names)):
                if linv[m][k]:
                    acc = acc + vec[k] * linv[m][k]
            out.append(acc)
        return out

    delta = apply_linv(u)
    if any(not f.is_zero() for f in nonlin):
        for _ in range(degree + 1):
            sub = {f"_d{m}": delta[m] for m in range(len(names))}
            rhs = [u[k] - nl.substitute(sub, target=aux, check=False, degree=degree) for k, nl in enumerate(nonlin)]
            new = [x.truncate(degree) for x in apply_linv(rhs)]
            if new == delta:
                break
            delta = new
    sub = {f"_d{m}": delta[m] for m in range(len(names))}
    residual = [shifted[k].substitute(sub, target=aux, check=False) - a0[k] - u[k] for k in range(len(names))]
    low = min((r.low_degree() for r in residual if not r.is_zero()), default=None)
    if low is not None and low <= degree:
        raise TruncationResidual(f"composition differs from the identity at order {low} <= {degree}")
    back = {f"_u{k}": SuperPoly.generator(table, n) - a0[k] for k, n in enumerate(names)}
    values = {}
    for m, n in enumerate(names):
        expr = delta[m].substitute(back, target=table, check=False) + _base_value(table, n, base)
        values[n] = expr
    return MapInverse(values, exact=low is None, degree=degree, residual_degree=low)


def inverse_from_jacobian(table: VariableTable, names: Sequence[str], jac, base: Mapping[str, object] = None,
                          degree: int = 8) -> MapInverse:
    """Series for ``x(y)`` given ``jac[j][m] = d_left x_m / d y_j`` as polynomials in x.

    The new coordinates are normalized to vanish at ``base``.  Used when the
    forward map is not polynomial (for instance a logarithm) but its inverse
    Jacobian is.
    """
    base = dict(base or {})
    names = list(names)
    aux = _aux_table(table, names)
    u = [SuperPoly.generator(aux, f"_u{k}") for k in range(len(names))]
    b = [_base_value(table, n, base) for n in names]
    jpoly = []
    for row in jac:
        prow = []
        for x in row:
            x = simplify(x)
            if isinstance(x, RationalFn):
                raise MapNotInvertible("inverse Jacobian must be polynomial")
            prow.append(x)
        jpoly.append(prow)
    x = [SuperPoly.constant(aux, b[m]) for m in range(len(names))]
    for _ in range(degree + 1):
        sub = {n: x[m] for m, n in enumerate(names)}
        new = []
        for m in range(len(names)):
            acc = SuperPoly(aux, {})
            for j in range(len(names)):
                jm = jpoly[j][m]
                if jm.is_zero():
                    continue
                acc = acc + u[j] * jm.substitute(sub, target=aux, check=False, degree=degree)
            acc = acc.truncate(degree)
            integ = {}
            for mono, c in acc.terms.items():
                k = sum(e for _, e in mono)
                integ[mono] = c / k
            new.append(SuperPoly(aux, integ) + b[m])
        if new == x:
            break
        x = new
    # exact when the Jacobian relation holds identically
    sub = {n: x[m] for m, n in enumerate(names)}
    exact = True
    for j in range(len(names)):
        for m in range(len(names)):
            lhs = x[m].left_derivative(f"_u{j}")
            rhs = jpoly[j][m].substitute(sub, target=aux, check=False)
            if lhs != rhs:
                exact = False
    back = {f"_u{k}": SuperPoly.generator(table, n) for k, n in enumerate(names)}
    values = {n: x[m].substitute(back, target=table, check=False) for m, n in enumerate(names)}
    return MapInverse(values, exact=exact, degree=degree)


@dataclass
class TransformResult:
    pencil: PoissonPencil
    exact: bool = True
    degraded_entries: List[str] = field(default_factory=list)


def reexpress(expr, inverse: Mapping[str, object]):
    """Substitute only the inverse components the expression depends on."""
    if isinstance(expr, (int, Fraction)) or is_zero(expr):
        return expr, False
    needed = {k: v for k, v in inverse.items() if expr.depends_on(k)}
    if not needed:
        return expr, False
    return simplify(expr.substitute(needed, check=False)), True


def _series(val, degree):
    """Truncate a series-valued bracket; rational ones are expanded about the origin when possible."""
    if isinstance(val, SuperPoly):
        return val.truncate(degree)
    if val.is_polynomial():
        return val.num.truncate(degree)
    try:
        return val.series(degree)
    except ZeroDivisionError:
        return val


def transform_pencil(pencil: PoissonPencil, forward: Mapping[str, object], inverse: Mapping[str, object],
                     inexact: Sequence[str] = (), truncate_degree: Optional[int] = None) -> TransformResult:
    """Fundamental brackets of the new coordinates ``forward`` re-expressed via ``inverse``.

    ``forward`` gives every new coordinate (by name) in the old ones; missing
    names are unchanged.  ``inverse`` gives old coordinates in the new ones
    for the names that change.  Names in ``inexact`` have series inverses; any
    bracket that needs them is truncated at ``truncate_degree`` when it is a
    polynomial and reported as degraded.
    """
    chart = pencil.chart
    table = chart.table
    names = chart.names
    phi = {n: forward.get(n, SuperPoly.generator(table, n)) for n in names}
    inexact = set(inexact)
    degraded = []
    out = []
    for a, S in ((1, pencil.first), (2, pencil.second)):
        entries = {}
        for i, x in enumerate(names):
            for y in names[i:]:
                val = S.bracket(phi[x], phi[y])
                if is_zero(val):
                    continue
                used = {k for k in inverse if val.depends_on(k)}
                val, _ = reexpress(val, inverse)
                if used & inexact:
                    degraded.append(f"{{{x},{y}}}^{a}")
                    if truncate_degree is not None:
                        val = _series(val, truncate_degree)
                entries[(x, y)] = val
        out.append(PoissonStructure(chart, entries, complete=True, check=True))
    return TransformResult(PoissonPencil(*out), exact=not degraded, degraded_entries=degraded)
