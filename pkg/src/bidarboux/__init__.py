"""Exact toolkit for super Poisson pencils and bi-Darboux coordinates."""
from .superalgebra import (
    GradedVariable,
    NotInvertible,
    OddPivot,
    RationalFn,
    SuperPoly,
    VariableTable,
    invert_matrix,
)
from .expression import ParseError, parse_expression, parse_rational, print_expression

__version__ = "0.1.0"
