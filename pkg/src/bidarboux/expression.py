"""Text grammar for graded polynomials and rational functions.

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' INTEGER)?
    atom  := INTEGER | IDENT | '(' expr ')'

Products keep their written order, so ``th2*th1`` picks up the swap sign when
normalized.  :func:`parse_expression` only divides by constants;
:func:`parse_rational` also divides by even polynomials.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Tuple

from .superalgebra import RationalFn, SuperPoly, VariableTable


class ParseError(ValueError):
    def __init__(self, message: str, position: int = -1, text: str = ""):
        self.position = position
        self.text = text
        where = f" at position {position}" if position >= 0 else ""
        super().__init__(f"{message}{where}")


class UnknownIdentifier(ParseError):
    pass


class OddPower(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            skip = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + skip]!r}", pos + skip, text)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", m.group(1), start))
        elif m.group(2):
            out.append(("id", m.group(2), start))
        else:
            op = m.group(3)
            out.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, table: VariableTable, rational: bool):
        self.text = text
        self.table = table
        self.rational = rational
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.peek()
        return cls(msg, tok[2], self.text)

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            tok = self.take()
            rhs = self.unary()
            if tok[1] == "*":
                value = value * rhs
                continue
            poly = rhs.as_poly() if isinstance(rhs, RationalFn) else rhs
            if poly is not None and poly.is_constant():
                c = poly.constant_term()
                if c == 0:
                    raise ParseError("division by zero", tok[2], self.text)
                value = value * (Fraction(1) / c)
            elif self.rational:
                try:
                    value = RationalFn.lift(value) * RationalFn.lift(rhs).inverse()
                except Exception as exc:
                    raise ParseError(f"cannot divide: {exc}", tok[2], self.text) from None
            else:
                raise ParseError("division by a non-constant", tok[2], self.text)
        return value

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            v = self.unary()
            return -v if tok[1] == "-" else v
        return self.power()

    def power(self):
        start = self.peek()
        base, single = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num":
                raise ParseError("exponent must be a non-negative integer", tok[2], self.text)
            k = int(tok[1])
            if k > 1:
                odd = False
                if single is not None:
                    odd = self.table.variables[single].nilpotent
                else:
                    p, f = base.parity(), base.form_degree()
                    odd = p is not None and f is not None and (p + f) % 2 == 1
                if odd:
                    raise OddPower("odd generator raised to a power above 1", start[2], self.text)
            return base ** k
        return base

    def atom(self):
        tok = self.take()
        if tok[0] == "num":
            return SuperPoly.constant(self.table, int(tok[1])), None
        if tok[0] == "id":
            if tok[1] not in self.table:
                raise UnknownIdentifier(f"unknown identifier {tok[1]!r}", tok[2], self.text)
            return SuperPoly.generator(self.table, tok[1]), self.table.index(tok[1])
        if tok[0] == "op" and tok[1] == "(":
            v = self.expr()
            close = self.take()
            if close[0] != "op" or close[1] != ")":
                raise ParseError("expected ')'", close[2], self.text)
            return v, None
        if tok[0] == "end":
            raise ParseError("unexpected end of input", tok[2], self.text)
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2], self.text)


def parse_expression(text: str, table: VariableTable) -> SuperPoly:
    """Parse a polynomial; only constant denominators are allowed."""
    value = _Parser(text, table, rational=False).parse()
    if isinstance(value, RationalFn):
        value = value.as_poly()
    return value


def parse_rational(text: str, table: VariableTable):
    """Parse a rational function; returns a SuperPoly when no denominator survives."""
    value = _Parser(text, table, rational=True).parse()
    if isinstance(value, RationalFn) and value.is_polynomial():
        return value.num
    return value


# ---------------------------------------------------------------------------
# printing


def _monomial_text(table: VariableTable, m) -> str:
    parts = []
    for i, e in m:
        name = table.variables[i].name
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _poly_text(p: SuperPoly) -> str:
    if p.is_zero():
        return "0"
    pieces = []
    for m, c in p.sorted_terms():
        neg = c < 0
        a = -c if neg else c
        mono = _monomial_text(p.table, m)
        if not mono:
            body = _fmt(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_fmt(a)}*{mono}"
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


def _fmt(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _needs_parens(p: SuperPoly) -> bool:
    if len(p.terms) > 1:
        return True
    if len(p.terms) == 1:
        (m, c), = p.terms.items()
        return c.denominator != 1 or (c < 0) or (bool(m) and c != 1)
    return False


def print_expression(x) -> str:
    """Deterministic canonical text; constant term first, then by degree."""
    if isinstance(x, SuperPoly):
        return _poly_text(x)
    if isinstance(x, RationalFn):
        if not x.den:
            return _poly_text(x.num)
        num = _poly_text(x.num)
        if len(x.num.terms) > 1:
            num = f"({num})"
        dens = []
        for f, k in x.den:
            t = _poly_text(f)
            if _needs_parens(f) or (k > 1 and len(f.terms) > 1):
                t = f"({t})"
            dens.append(t if k == 1 else f"{t}^{k}")
        den = dens[0] if len(dens) == 1 else "(" + "*".join(dens) + ")"
        return f"{num}/{den}"
    if isinstance(x, (int, Fraction)):
        return _fmt(Fraction(x))
    raise TypeError(f"cannot print {type(x).__name__}")
