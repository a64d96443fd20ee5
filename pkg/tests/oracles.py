"""Independent reference implementations used only by the tests."""
from fractions import Fraction

import sympy


def bubble_product(table, words):
    """Multiply monomials given as generator-name lists by adjacent swaps.

    Each swap of neighbours a, b contributes (-1)^(eps_a eps_b + deg_a deg_b);
    a repeated generator whose self-swap sign is -1 kills the word.
    Returns (sign, sorted names) or (0, None).
    """
    word = [n for w in words for n in w]
    order = {v.name: k for k, v in enumerate(table.variables)}
    sign = 1
    word = list(word)
    for i in range(len(word)):
        for j in range(len(word) - 1 - i):
            a, b = word[j], word[j + 1]
            if order[a] > order[b]:
                va, vb = table[a], table[b]
                if (va.parity * vb.parity + va.form_degree * vb.form_degree) % 2:
                    sign = -sign
                word[j], word[j + 1] = b, a
    for a, b in zip(word, word[1:]):
        v = table[a]
        if a == b and (v.parity + v.form_degree) % 2:
            return 0, None
    return sign, word


def word_poly(table, word, coeff=1):
    from bidarboux.superalgebra import SuperPoly

    exps = {}
    for n in word:
        exps[n] = exps.get(n, 0) + 1
    out = SuperPoly.constant(table, Fraction(coeff))
    for n in word:
        out = out * SuperPoly.generator(table, n)
    return out


def to_sympy(x, symbols=None):
    """Even-only SuperPoly or RationalFn to a sympy expression."""
    from bidarboux.superalgebra import RationalFn

    symbols = symbols or {}

    def poly(p):
        total = sympy.Integer(0)
        for mono, c in p.terms.items():
            term = sympy.Rational(c.numerator, c.denominator)
            for i, e in mono:
                name = p.table.variables[i].name
                sym = symbols.setdefault(name, sympy.Symbol(name))
                term *= sym ** e
            total += term
        return total

    if isinstance(x, RationalFn):
        out = poly(x.num)
        for f, k in x.den:
            out = out / poly(f) ** k
        return out
    return poly(x)


def sympy_zero(expr) -> bool:
    return sympy.simplify(sympy.together(expr)) == 0
