"""Form generators ``dz`` adjoined to a variable table.

A form generator carries the parity of its coordinate and form degree 1, so
the bigraded sign rule makes ``dz`` of an even coordinate anticommute with
other one-forms and commute with coordinates.
"""
from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .superalgebra import GradedVariable, RationalFn, SuperPoly, VariableTable, is_zero, simplify


def form_name(name: str) -> str:
    return f"d{name}"


def with_forms(table: VariableTable, names: Iterable[str]) -> VariableTable:
    """Extend ``table`` by one form generator per listed coordinate (skipping ones present)."""
    new = []
    for n in names:
        v = table[n]
        fn = form_name(n)
        if fn in table:
            continue
        new.append(GradedVariable(fn, v.parity, 1, "form", v.index))
    return table.extend(new) if new else table


def lift_to(f, target: VariableTable):
    """Re-express a scalar over a larger table containing all its generators."""
    if isinstance(f, (int,)) or not hasattr(f, "table"):
        return SuperPoly.constant(target, f)
    if f.table == target:
        return f
    if isinstance(f, SuperPoly):
        return f.to_table(target)
    assignment = {}
    for v in f.table.variables:
        if f.depends_on(v.name):
            assignment[v.name] = SuperPoly.generator(target, v.name)
    return simplify(f.substitute(assignment, target=target, check=False))


def vector_field(f, pairs: Sequence, target: VariableTable = None):
    """Apply ``sum_k coeff_k * d_left/d name_k`` where ``pairs = [(coeff, name), ...]``."""
    table = target or f.table
    out = SuperPoly(table, {})
    for coeff, name in pairs:
        if not f.depends_on(name):
            continue
        df = f.left_derivative(name)
        if is_zero(df):
            continue
        out = out + lift_to(coeff, table) * df
    return simplify(out)


def exterior_derivative(f, names: Sequence[str]):
    """``d f = sum dz * d_left f / dz`` over the listed coordinates."""
    table = f.table
    return vector_field(f, [(SuperPoly.generator(table, form_name(n)), n) for n in names])


def graded_commutator(op_a, op_b, f, sign: int):
    """``[A, B] f = A(B f) - sign * B(A f)`` with ``sign`` the operators' swap sign."""
    return simplify(op_a(op_b(f)) - op_b(op_a(f)) * sign)


def assign_forms(mapping: Mapping[str, str]):
    """Rename helper: form generator names for a coordinate renaming."""
    return {form_name(a): form_name(b) for a, b in mapping.items()}
