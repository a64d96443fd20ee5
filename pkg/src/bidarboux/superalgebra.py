"""Exact supercommutative polynomials and rational functions.

Every generator carries a Grassmann parity and a form degree.  Two adjacent
generators are swapped with the sign ``(-1)**(e1*e2 + p1*p2)``; a generator
for which that sign is negative on itself squares to zero.  Coefficients are
:class:`fractions.Fraction` throughout, so every identity checked on top of
this module is checked exactly.

Denominators of :class:`RationalFn` only ever contain parity-0, form-degree-0
generators.  They are kept unreduced (no gcd), as a product of monic factors,
and equality is decided by cross multiplication.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

ROLES = ("position", "momentum", "casimir", "form", "auxiliary")


class AlgebraError(Exception):
    """Base class for errors raised by the algebra layer."""


class TableMismatch(AlgebraError):
    pass


class GradingMismatch(AlgebraError):
    pass


class NotInvertible(AlgebraError):
    pass


class OddPivot(NotInvertible):
    """Elimination stalled on a column whose only nonzero entries are odd."""


@dataclass(frozen=True)
class GradedVariable:
    name: str
    parity: int = 0
    form_degree: int = 0
    role: str = "auxiliary"
    index: int = 0

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError(f"parity of {self.name!r} must be 0 or 1")
        if self.form_degree < 0:
            raise ValueError(f"negative form degree for {self.name!r}")
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")

    @property
    def nilpotent(self) -> bool:
        return (self.parity + self.form_degree) % 2 == 1

    @property
    def central(self) -> bool:
        return self.parity == 0 and self.form_degree % 2 == 0


class VariableTable:
    """Ordered set of generators; the order is the canonical monomial order."""

    def __init__(self, variables: Iterable[GradedVariable]):
        self.variables: Tuple[GradedVariable, ...] = tuple(variables)
        self._index = {}
        for i, v in enumerate(self.variables):
            if v.name in self._index:
                raise ValueError(f"duplicate variable name {v.name!r}")
            self._index[v.name] = i
        self.eps = tuple(v.parity for v in self.variables)
        self.form = tuple(v.form_degree % 2 for v in self.variables)
        self.nil = tuple(v.nilpotent for v in self.variables)
        # parity-0, form-degree-0 generators; only these may enter denominators
        self.scalar_like = tuple(v.parity == 0 and v.form_degree == 0 for v in self.variables)

    def __len__(self):
        return len(self.variables)

    def __iter__(self):
        return iter(self.variables)

    def __contains__(self, name) -> bool:
        if isinstance(name, GradedVariable):
            name = name.name
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, VariableTable) and self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def __repr__(self):
        return "VariableTable(%s)" % ", ".join(v.name for v in self.variables)

    def index(self, var) -> int:
        if isinstance(var, GradedVariable):
            var = var.name
        try:
            return self._index[var]
        except KeyError:
            raise KeyError(f"unknown variable {var!r}") from None

    def __getitem__(self, name) -> GradedVariable:
        return self.variables[self.index(name)]

    def names(self):
        return [v.name for v in self.variables]

    def gen(self, name) -> "SuperPoly":
        return SuperPoly.generator(self, name)

    def gens(self, *names):
        return [self.gen(n) for n in names]

    def one(self) -> "SuperPoly":
        return SuperPoly.constant(self, 1)

    def zero(self) -> "SuperPoly":
        return SuperPoly(self, {})

    def extend(self, variables: Iterable[GradedVariable]) -> "VariableTable":
        return VariableTable(self.variables + tuple(variables))

    def swap_sign(self, i: int, j: int) -> int:
        return (self.eps[i] * self.eps[j] + self.form[i] * self.form[j]) & 1


Monomial = Tuple[Tuple[int, int], ...]
Number = Union[int, Fraction]

_ONE = Fraction(1)


def _mono_mul(table: VariableTable, m1: Monomial, m2: Monomial):
    """Product of two canonical monomials as ``(sign, monomial)``, or None if zero."""
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    eps, form, nil = table.eps, table.form, table.nil
    sign = 0
    acc_e = acc_p = 0
    j = 0
    n2 = len(m2)
    out = []
    for x, e1 in m1:
        while j < n2 and m2[j][0] < x:
            y, e2 = m2[j]
            acc_e += e2 * eps[y]
            acc_p += e2 * form[y]
            out.append(m2[j])
            j += 1
        sign += e1 * (eps[x] * acc_e + form[x] * acc_p)
        if j < n2 and m2[j][0] == x:
            e = e1 + m2[j][1]
            if nil[x]:
                return None
            # the copy of x coming from m2 does not have to cross itself
            out.append((x, e))
            acc_e += m2[j][1] * eps[x]
            acc_p += m2[j][1] * form[x]
            j += 1
        else:
            out.append((x, e1))
    out.extend(m2[j:])
    return (-1 if sign & 1 else 1), tuple(out)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    return (_mono_degree(m), m)


def _fmt_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class SuperPoly:
    """Immutable sparse polynomial in the generators of a :class:`VariableTable`."""

    __slots__ = ("table", "terms", "_hash")

    def __init__(self, table: VariableTable, terms: Mapping[Monomial, Number] = None):
        self.table = table
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = c if isinstance(c, Fraction) else Fraction(c)
        self.terms: Dict[Monomial, Fraction] = clean
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, table: VariableTable, value: Number) -> "SuperPoly":
        return cls(table, {(): Fraction(value)} if value else {})

    @classmethod
    def generator(cls, table: VariableTable, name) -> "SuperPoly":
        return cls(table, {((table.index(name), 1),): _ONE})

    @classmethod
    def monomial(cls, table: VariableTable, exps: Mapping[str, int], coeff: Number = 1) -> "SuperPoly":
        """Monomial with the generators multiplied in canonical order."""
        items = sorted((table.index(k), e) for k, e in exps.items() if e)
        for i, e in items:
            if e > 1 and table.nil[i]:
                return cls(table, {})
        return cls(table, {tuple(items): Fraction(coeff)})

    def _coerce(self, other) -> "SuperPoly":
        if isinstance(other, SuperPoly):
            if other.table is not self.table and other.table != self.table:
                raise TableMismatch("polynomials live over different variable tables")
            return other
        if isinstance(other, (int, Fraction)):
            return SuperPoly.constant(self.table, other)
        return NotImplemented

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, RationalFn):
            return RationalFn.lift(self) + other
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return SuperPoly(self.table, out)

    __radd__ = __add__

    def __neg__(self):
        return SuperPoly(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, RationalFn):
            return RationalFn.lift(self) - other
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RationalFn):
            return RationalFn.lift(self) * other
        if isinstance(other, (int, Fraction)):
            if not other:
                return SuperPoly(self.table, {})
            return SuperPoly(self.table, {m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        table = self.table
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                r = _mono_mul(table, m1, m2)
                if r is None:
                    continue
                s, m = r
                v = out.get(m, 0) + (c1 * c2 if s > 0 else -c1 * c2)
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return SuperPoly(table, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return RationalFn.lift(self) / other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = SuperPoly.constant(self.table, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, RationalFn):
            return other == self
        if isinstance(other, (int, Fraction)):
            other = SuperPoly.constant(self.table, other)
        if not isinstance(other, SuperPoly):
            return NotImplemented
        return self.table == other.table and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"SuperPoly({self})"

    def __str__(self):
        from .expression import print_expression

        return print_expression(self)

    # gradings ----------------------------------------------------------------
    def _mono_grading(self, m: Monomial):
        e = p = 0
        for i, k in m:
            e += k * self.table.eps[i]
            p += k * self.table.variables[i].form_degree
        return e & 1, p

    def parity(self) -> Optional[int]:
        """Total parity, 0 for the zero polynomial, None when terms disagree."""
        ps = {self._mono_grading(m)[0] for m in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def form_degree(self) -> Optional[int]:
        ds = {self._mono_grading(m)[1] for m in self.terms}
        if not ds:
            return 0
        return ds.pop() if len(ds) == 1 else None

    def is_homogeneous(self) -> bool:
        return self.parity() is not None and self.form_degree() is not None

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self.terms), default=-1)

    def low_degree(self) -> int:
        return min((_mono_degree(m) for m in self.terms), default=-1)

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def free_variables(self) -> set:
        return {self.table.variables[i].name for m in self.terms for i, _ in m}

    def depends_on(self, name) -> bool:
        i = self.table.index(name)
        return any(j == i for m in self.terms for j, _ in m)

    def homogeneous_part(self, degree: int, names=None) -> "SuperPoly":
        """Terms whose degree (in ``names``, default all generators) equals ``degree``."""
        idx = None if names is None else {self.table.index(n) for n in names}
        out = {}
        for m, c in self.terms.items():
            d = sum(e for i, e in m if idx is None or i in idx)
            if d == degree:
                out[m] = c
        return SuperPoly(self.table, out)

    def truncate(self, degree: int) -> "SuperPoly":
        return SuperPoly(self.table, {m: c for m, c in self.terms.items() if _mono_degree(m) <= degree})

    def body(self) -> "SuperPoly":
        """Drop every term containing a generator of odd parity or nonzero form degree."""
        sl = self.table.scalar_like
        return SuperPoly(self.table, {m: c for m, c in self.terms.items() if all(sl[i] for i, _ in m)})

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]))

    # calculus ----------------------------------------------------------------
    def _derive(self, name, left: bool) -> "SuperPoly":
        table = self.table
        v = table.index(name)
        out: Dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            pos = None
            for k, (i, _) in enumerate(m):
                if i == v:
                    pos = k
                    break
            if pos is None:
                continue
            e = m[pos][1]
            others = m[:pos] if left else m[pos + 1:]
            s = 0
            for i, k in others:
                s += k * table.swap_sign(v, i)
            coeff = c * e
            if s & 1:
                coeff = -coeff
            if e == 1:
                nm = m[:pos] + m[pos + 1:]
            else:
                nm = m[:pos] + ((v, e - 1),) + m[pos + 1:]
            out[nm] = out.get(nm, 0) + coeff
        return SuperPoly(table, out)

    def left_derivative(self, name) -> "SuperPoly":
        """Graded derivative acting from the left."""
        return self._derive(name, True)

    def right_derivative(self, name) -> "SuperPoly":
        """Graded derivative acting from the right, ``f <- d/dv``."""
        return self._derive(name, False)

    def antiderivative(self, name) -> "SuperPoly":
        """Monomial-wise left antiderivative in an even central generator."""
        table = self.table
        v = table.index(name)
        if not table.variables[v].central:
            raise GradingMismatch("antiderivatives only in parity-0, form-degree-0 generators")
        out = {}
        for m, c in self.terms.items():
            exps = dict(m)
            e = exps.get(v, 0) + 1
            exps[v] = e
            out[tuple(sorted(exps.items()))] = c / e
        return SuperPoly(table, out)

    # substitution --------------------------------------------------------------
    def substitute(self, assignment: Mapping, target: VariableTable = None, check: bool = True,
                   degree: Optional[int] = None):
        """Graded algebra homomorphism sending generators to the given values.

        ``assignment`` maps names (or variables) to SuperPoly/RationalFn values;
        unmapped generators are sent to themselves, which requires ``target`` to
        contain them.  Values must have the grading of the generator they replace.
        """
        table = self.table
        target = target or table
        values = {}
        for key, val in assignment.items():
            i = table.index(key)
            if isinstance(val, (int, Fraction)):
                val = SuperPoly.constant(target, val)
            if check and not _is_zero(val):
                var = table.variables[i]
                if var.parity != 0 or var.form_degree != 0:
                    if val.parity() != var.parity or val.form_degree() != var.form_degree:
                        raise GradingMismatch(
                            f"value for {var.name!r} has grading ({val.parity()}, {val.form_degree()}),"
                            f" expected ({var.parity}, {var.form_degree})")
                elif val.parity() != 0 or val.form_degree() != 0:
                    raise GradingMismatch(f"value for {var.name!r} must be even of form degree 0")
            values[i] = val
        for i, v in enumerate(table.variables):
            if i not in values and any(i == j for m in self.terms for j, _ in m):
                if target is table:
                    values[i] = SuperPoly.generator(table, v.name)
                else:
                    values[i] = SuperPoly.generator(target, v.name)
        powers: Dict[Tuple[int, int], object] = {}

        def cut(x):
            return x.truncate(degree) if degree is not None and isinstance(x, SuperPoly) else x

        def power(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = cut(values[i]) if e == 1 else cut(power(i, e - 1) * values[i])
            return powers[key]

        result = SuperPoly(target, {})
        for m, c in self.terms.items():
            term = SuperPoly.constant(target, c)
            for i, e in m:
                term = cut(term * power(i, e))
                if _is_zero(term):
                    break
            result = result + term
        return result

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        """Numeric value of the body at a point; odd and form generators go to zero."""
        table = self.table
        total = Fraction(0)
        for m, c in self.terms.items():
            val = c
            for i, e in m:
                v = table.variables[i]
                if not table.scalar_like[i]:
                    val = 0
                    break
                if v.name not in point:
                    raise KeyError(f"no value given for {v.name!r}")
                val *= Fraction(point[v.name]) ** e
            total += val
        return total

    def to_table(self, target: VariableTable, rename: Mapping[str, str] = None) -> "SuperPoly":
        """Re-express over another table, optionally renaming generators."""
        rename = rename or {}
        assignment = {v.name: SuperPoly.generator(target, rename.get(v.name, v.name))
                      for v in self.table.variables
                      if self.depends_on(v.name)}
        return self.substitute(assignment, target=target, check=False)


def _is_zero(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return x.is_zero()


# ---------------------------------------------------------------------------
# exact division by central polynomials


def _grlex_key(m: Monomial):
    # graded lex on exponent vectors, a genuine monomial order
    return (_mono_degree(m), tuple((-i, e) for i, e in m))


def exact_divide(g: SuperPoly, f: SuperPoly) -> Optional[SuperPoly]:
    """Quotient ``g/f`` if ``f`` (central, nonzero) divides ``g`` exactly, else None."""
    if f.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if g.is_zero():
        return SuperPoly(g.table, {})
    lt = max(f.terms, key=_grlex_key)
    lc = f.terms[lt]
    lt_exp = dict(lt)
    table = g.table
    rem = dict(g.terms)
    quot: Dict[Monomial, Fraction] = {}
    fterms = list(f.terms.items())
    while rem:
        m = max(rem, key=_grlex_key)
        exps = dict(m)
        for i, e in lt_exp.items():
            if exps.get(i, 0) < e:
                return None
            exps[i] -= e
        qm = tuple(sorted((i, e) for i, e in exps.items() if e))
        qc = rem[m] / lc
        quot[qm] = quot.get(qm, 0) + qc
        for fm, fc in fterms:
            r = _mono_mul(table, qm, fm)
            if r is None:
                continue
            s, pm = r
            v = rem.get(pm, 0) - (qc * fc if s > 0 else -qc * fc)
            if v:
                rem[pm] = v
            else:
                rem.pop(pm, None)
    return SuperPoly(table, quot)


def _normalize_factor(f: SuperPoly):
    """Split a central polynomial as ``const * monic``."""
    lt = max(f.terms, key=_grlex_key)
    lc = f.terms[lt]
    return lc, f * (1 / lc)


def _factor_key(f: SuperPoly):
    return tuple(sorted(f.terms.items(), key=lambda t: _grlex_key(t[0])))


class RationalFn:
    """Quotient of a SuperPoly by a product of central monic polynomial factors."""

    __slots__ = ("num", "den")

    def __init__(self, num: SuperPoly, den: Iterable[Tuple[SuperPoly, int]] = ()):
        self.num = num
        self.den: Tuple[Tuple[SuperPoly, int], ...] = tuple(den)

    @property
    def table(self) -> VariableTable:
        return self.num.table

    # construction ----------------------------------------------------------
    @staticmethod
    def lift(x, table: VariableTable = None) -> "RationalFn":
        if isinstance(x, RationalFn):
            return x
        if isinstance(x, SuperPoly):
            return RationalFn(x)
        if isinstance(x, (int, Fraction)):
            if table is None:
                raise TypeError("a table is needed to lift a scalar")
            return RationalFn(SuperPoly.constant(table, x))
        raise TypeError(f"cannot lift {type(x).__name__} to RationalFn")

    @classmethod
    def build(cls, num: SuperPoly, factors: Mapping) -> "RationalFn":
        """Normalize factors (monic, merged) and cancel what divides exactly."""
        merged: Dict[tuple, list] = {}
        for f, k in (factors.items() if isinstance(factors, Mapping) else factors):
            if k == 0:
                continue
            if f.is_constant():
                c = f.constant_term()
                if c == 0:
                    raise ZeroDivisionError("zero denominator")
                num = num * (Fraction(1) / c) ** k
                continue
            lc, mf = _normalize_factor(f)
            if lc != 1:
                num = num * (Fraction(1) / lc) ** k
            key = _factor_key(mf)
            if key in merged:
                merged[key][1] += k
            else:
                merged[key] = [mf, k]
        den = []
        for key in sorted(merged):
            f, k = merged[key]
            while k and not num.is_zero():
                q = exact_divide(num, f)
                if q is None:
                    break
                num = q
                k -= 1
            if num.is_zero():
                return cls(num)
            if k:
                den.append((f, k))
        # the numerator may itself divide a denominator factor, e.g. (2+c)/((1+p)(2+c))
        if den and not num.is_constant() and num.parity() == 0 and num.form_degree() == 0:
            for pos, (f, k) in enumerate(den):
                q = exact_divide(f, num)
                if q is not None:
                    rest = den[:pos] + den[pos + 1:]
                    if k > 1:
                        rest.append((f, k - 1))
                    rest.append((q, 1))
                    return cls.build(SuperPoly.constant(num.table, 1), rest)
        return cls(num, den)

    def _den_map(self):
        return {_factor_key(f): (f, k) for f, k in self.den}

    # arithmetic --------------------------------------------------------------
    def _coerce(self, other) -> "RationalFn":
        if isinstance(other, RationalFn):
            return other
        if isinstance(other, SuperPoly):
            return RationalFn(other)
        if isinstance(other, (int, Fraction)):
            return RationalFn(SuperPoly.constant(self.table, other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.den and not self.den:
            return RationalFn(self.num + other.num)
        a, b = self._den_map(), other._den_map()
        keys = set(a) | set(b)
        lcm = {}
        for key in keys:
            f = (a.get(key) or b.get(key))[0]
            lcm[key] = (f, max(a.get(key, (f, 0))[1], b.get(key, (f, 0))[1]))
        n1, n2 = self.num, other.num
        for key, (f, k) in lcm.items():
            k1 = k - a.get(key, (f, 0))[1]
            k2 = k - b.get(key, (f, 0))[1]
            if k1:
                n1 = n1 * f ** k1
            if k2:
                n2 = n2 * f ** k2
        return RationalFn.build(n1 + n2, [v for v in lcm.values()])

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalFn(self.num * other, self.den) if other else RationalFn(self.num * 0)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        num = self.num * other.num
        if num.is_zero():
            return RationalFn(num)
        if not self.den and not other.den:
            return RationalFn(num)
        return RationalFn.build(num, list(self.den) + list(other.den))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        if isinstance(other, SuperPoly):
            return RationalFn(other) * self
        return NotImplemented

    def inverse(self) -> "RationalFn":
        """Multiplicative inverse of an even element with nonzero body."""
        num = self.num
        if num.parity() != 0 or num.form_degree() != 0:
            raise NotInvertible("only even elements of form degree 0 can be inverted")
        b = num.body()
        if b.is_zero():
            raise NotInvertible("element has zero body")
        n = num - b
        inv_b = RationalFn.build(SuperPoly.constant(self.table, 1), [(b, 1)])
        result = inv_b
        if not n.is_zero():
            # (b + n)^-1 = sum_k (-n)^k b^-(k+1); terminates because n is nilpotent
            x = -(RationalFn(n) * inv_b)
            term = inv_b
            for _ in range(len(self.table) + 2):
                term = term * x
                if term.is_zero():
                    break
                result = result + term
            else:
                raise NotInvertible("nilpotent part does not vanish; cannot invert")
        return result * RationalFn(SuperPoly.constant(self.table, 1), self.den).expand_den()

    def expand_den(self) -> "RationalFn":
        """Multiply out the denominator into the numerator when used as a factor."""
        num = self.num
        for f, k in self.den:
            num = num * f ** k
        return RationalFn(num)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RationalFn.lift(other, self.table) * self.inverse()

    def __pow__(self, k: int):
        result = RationalFn(SuperPoly.constant(self.table, 1))
        for _ in range(k):
            result = result * self
        return result

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, SuperPoly)):
            other = self._coerce(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        # cross multiplication
        lhs, rhs = self.num, other.num
        for f, k in other.den:
            lhs = lhs * f ** k
        for f, k in self.den:
            rhs = rhs * f ** k
        return lhs == rhs

    __hash__ = None

    def __repr__(self):
        return f"RationalFn({self})"

    def __str__(self):
        from .expression import print_expression

        return print_expression(self)

    # structure ---------------------------------------------------------------
    def is_polynomial(self) -> bool:
        return not self.den

    def as_poly(self) -> Optional[SuperPoly]:
        return self.num if not self.den else None

    def denominator(self) -> SuperPoly:
        d = SuperPoly.constant(self.table, 1)
        for f, k in self.den:
            d = d * f ** k
        return d

    def parity(self):
        return self.num.parity()

    def form_degree(self):
        return self.num.form_degree()

    def free_variables(self) -> set:
        out = set(self.num.free_variables())
        for f, _ in self.den:
            out |= f.free_variables()
        return out

    def depends_on(self, name) -> bool:
        return self.num.depends_on(name) or any(f.depends_on(name) for f, _ in self.den)

    def body(self) -> "RationalFn":
        return RationalFn(self.num.body(), self.den)

    def is_constant(self) -> bool:
        return not self.den and self.num.is_constant()

    def constant_term(self) -> Fraction:
        if self.den:
            raise ValueError("not a polynomial")
        return self.num.constant_term()

    # calculus ----------------------------------------------------------------
    def _derive(self, name, left: bool) -> "RationalFn":
        dn = self.num.left_derivative(name) if left else self.num.right_derivative(name)
        result = RationalFn.build(dn, self.den) if self.den else RationalFn(dn)
        for f, k in self.den:
            df = f.left_derivative(name)
            if df.is_zero():
                continue
            result = result - RationalFn.build(self.num * df * k, list(self.den) + [(f, 1)])
        return result

    def left_derivative(self, name) -> "RationalFn":
        return self._derive(name, True)

    def right_derivative(self, name) -> "RationalFn":
        return self._derive(name, False)

    def substitute(self, assignment: Mapping, target: VariableTable = None, check: bool = True) -> "RationalFn":
        out = RationalFn.lift(self.num.substitute(assignment, target, check))
        for f, k in self.den:
            fs = RationalFn.lift(f.substitute(assignment, target, check))
            out = out * fs.inverse() ** k
        return out

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        val = self.num.evaluate(point)
        for f, k in self.den:
            d = f.evaluate(point)
            if d == 0:
                raise ZeroDivisionError("denominator vanishes at the evaluation point")
            val /= d ** k
        return val

    def truncate(self, degree: int) -> "RationalFn":
        if self.den:
            raise ValueError("only polynomials can be truncated")
        return RationalFn(self.num.truncate(degree))

    def series(self, degree: int) -> SuperPoly:
        """Taylor polynomial about the origin, up to total degree ``degree``.

        Needs every denominator factor to have a nonzero constant term.
        """
        out = self.num.truncate(degree)
        for f, k in self.den:
            f0 = f.constant_term()
            if f0 == 0:
                raise ZeroDivisionError("denominator vanishes at the origin")
            r = (f - f0) * (-1 / f0)
            inv = SuperPoly.constant(self.table, 1)
            term = inv
            for _ in range(degree):
                term = (term * r).truncate(degree)
                if term.is_zero():
                    break
                inv = inv + term
            inv = inv * (1 / f0)
            for _ in range(k):
                out = (out * inv).truncate(degree)
        return out


Scalar = Union[SuperPoly, RationalFn]


def lift(x, table: VariableTable) -> RationalFn:
    return RationalFn.lift(x, table)


def simplify(x):
    """Return a SuperPoly when a RationalFn has a trivial denominator."""
    if isinstance(x, RationalFn) and not x.den:
        return x.num
    return x


def is_zero(x) -> bool:
    return _is_zero(x)


def left_derivative(v, f):
    return f.left_derivative(v)


def right_derivative(v, f):
    return f.right_derivative(v)


def multiply(a, b):
    if isinstance(a, SuperPoly) and isinstance(b, SuperPoly) and a.table != b.table:
        raise TableMismatch("polynomials live over different variable tables")
    return a * b


def substitute(f, assignment, target=None):
    return f.substitute(assignment, target)


# ---------------------------------------------------------------------------
# matrices of scalars (lists of rows)


def zeros(table: VariableTable, rows: int, cols: int = None):
    cols = rows if cols is None else cols
    return [[RationalFn(SuperPoly(table, {})) for _ in range(cols)] for _ in range(rows)]


def identity(table: VariableTable, n: int):
    m = zeros(table, n)
    for i in range(n):
        m[i][i] = RationalFn(SuperPoly.constant(table, 1))
    return m


def lift_matrix(m, table: VariableTable):
    return [[RationalFn.lift(x, table) for x in row] for row in m]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    if a and len(a[0]) != k:
        raise ValueError("shape mismatch in matrix product")
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = None
            for l in range(k):
                x, y = a[i][l], b[l][j]
                if is_zero(x) or is_zero(y):
                    continue
                t = x * y
                acc = t if acc is None else acc + t
            if acc is None:
                acc = a[i][0] * 0 if k else RationalFn(SuperPoly(_table_of(a, b), {}))
            row.append(acc)
        out.append(row)
    return out


def _table_of(*mats):
    for m in mats:
        for row in m:
            for x in row:
                if hasattr(x, "table"):
                    return x.table
    raise ValueError("cannot infer table of an empty matrix")


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, s):
    return [[x * s for x in row] for row in a]


def mat_eq(a, b) -> bool:
    if len(a) != len(b):
        return False
    for ra, rb in zip(a, b):
        if len(ra) != len(rb):
            return False
        for x, y in zip(ra, rb):
            if not (RationalFn.lift(x) == RationalFn.lift(y)):
                return False
    return True


def mat_is_zero(a) -> bool:
    return all(is_zero(x) for row in a for x in row)


def mat_is_identity(a) -> bool:
    for i, row in enumerate(a):
        for j, x in enumerate(row):
            x = RationalFn.lift(x)
            if i == j:
                if not (x == 1):
                    return False
            elif not x.is_zero():
                return False
    return True


def mat_map(f, a):
    return [[f(x) for x in row] for row in a]


def invert_matrix(m):
    """Exact inverse of a square matrix of SuperPoly/RationalFn entries.

    Gauss-Jordan elimination with entries always multiplied from the left, so
    graded (super) matrices are handled as long as every pivot is even with a
    nonzero body.  Raises :class:`OddPivot` when a column only offers odd
    entries and :class:`NotInvertible` when it offers nothing.
    """
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix is not square")
    if n == 0:
        return []
    table = _table_of(m)
    a = [[RationalFn.lift(x, table) for x in row] for row in m]
    inv = identity(table, n)
    for col in range(n):
        pivot = None
        saw_odd = False
        best = None
        for r in range(col, n):
            x = a[r][col]
            if x.is_zero():
                continue
            if x.parity() != 0 or x.form_degree() != 0:
                saw_odd = True
                continue
            if x.num.body().is_zero():
                continue
            # prefer constant pivots to keep denominators small
            score = (0 if x.is_constant() else 1, len(x.num.terms))
            if best is None or score < best:
                best, pivot = score, r
        if pivot is None:
            if saw_odd:
                raise OddPivot(f"column {col} has only odd entries below the diagonal")
            raise NotInvertible(f"column {col} has no invertible pivot")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        pinv = a[col][col].inverse()
        a[col] = [pinv * x for x in a[col]]
        inv[col] = [pinv * x for x in inv[col]]
        for r in range(n):
            if r == col or a[r][col].is_zero():
                continue
            lam = a[r][col]
            a[r] = [x - lam * y for x, y in zip(a[r], a[col])]
            inv[r] = [x - lam * y for x, y in zip(inv[r], inv[col])]
    return inv


def body_matrix(m, point: Mapping[str, Number]):
    """Evaluate the body of every entry at a point (odd generators set to zero)."""
    return [[RationalFn.lift(x).evaluate(point) for x in row] for row in m]


def rational_rank(rows) -> int:
    """Rank over Q of a matrix of Fractions."""
    a = [[Fraction(x) for x in row] for row in rows]
    if not a:
        return 0
    rank = 0
    ncols = len(a[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        pv = a[rank][c]
        for r in range(len(a)):
            if r != rank and a[r][c] != 0:
                f = a[r][c] / pv
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def rational_det(rows) -> Fraction:
    """Determinant over Q by fraction-exact elimination."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        pv = a[c][c]
        det *= pv
        for r in range(c + 1, n):
            if a[r][c] != 0:
                f = a[r][c] / pv
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def rational_solve(rows, rhs):
    """Solve ``A x = b`` exactly for square nonsingular A (b a list of columns' entries)."""
    n = len(rows)
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise NotInvertible("singular linear system")
        a[c], a[piv] = a[piv], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[r][n] for r in range(n)]


def rational_inverse(rows):
    n = len(rows)
    cols = [rational_solve(rows, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def small_integer_points(names, radius: int = 3):
    """Deterministic lexicographic enumeration of integer points, origin first."""
    values = [0]
    for k in range(1, radius + 1):
        values += [k, -k]
    for combo in _cartesian(values, repeat=len(names)):
        yield dict(zip(names, combo))
