"""Tri-graded algebra of forms and the constructive bi-Poincare homotopy.

Generators ``x{a}_{i}`` (``a`` in 1, 2, 3, ``i`` in 1..n) have parity
``eps_i + [a == 3]``; they are listed a-major so a monomial factors as an
(x1, x2) part followed by an x3 part without sign.  The operators

    d^a      = x3_i d/dx{a}_i               (odd)
    i_a      = x{a}_i d/dx3_i               (odd)
    L^a_b    = x{b}_i d/dx{a}_i + [a == b] N3
    trace    = N1 + N2 + 2 N3
    d        = d^1 d^2,      i = i_2 i_1
    Lambda   = 1/2 {L^1_1, L^2_2} - 1/2 {L^2_1, L^1_2} - trace/2

all use left derivatives.  Lambda preserves the x3 monomial, the per-index
counts of x1 and x2 generators and the number of x1 generators, so it is
inverted on these small blocks by exact linear algebra.  The homotopy is
``eta = i(Lambda^-1 omega)`` and ``d eta == omega`` is checked on return.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from .superalgebra import GradedVariable, NotInvertible, SuperPoly, VariableTable, rational_det, rational_solve


class NotClosed(ValueError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class DegreeTooLow(ValueError):
    pass


class BlockNotCovered(ValueError):
    pass


class BeyondTruncation(ValueError):
    pass


class HomotopyFailure(RuntimeError):
    pass


def var_name(alpha: int, i: int) -> str:
    return f"x{alpha}_{i}"


# epsilon tensors with eps^{12} = eps_{21} = 1
_EPS_UP = {(1, 2): 1, (2, 1): -1}
_EPS_DOWN = {(1, 2): -1, (2, 1): 1}


@dataclass
class Block:
    """Lambda restricted to one graded piece; ``det`` is the invertibility certificate."""

    n12: int
    n3: int
    basis: List[SuperPoly]
    matrix: List[List[Fraction]]
    det: Fraction


class TriGradedAlgebra:
    """Formal forms in ``x{a}_{i}`` with ``eps(x{a}_i) = eps_i + [a == 3]``."""

    def __init__(self, parities: Sequence[int], degree: int = 8, names: Optional[Dict[Tuple[int, int], str]] = None):
        self.parities = [int(e) % 2 for e in parities]
        self.n = len(self.parities)
        self.degree = degree
        self._names = names or {}
        vs = []
        for a in (1, 2, 3):
            for i in range(1, self.n + 1):
                par = (self.parities[i - 1] + (a == 3)) % 2
                vs.append(GradedVariable(self.name(a, i), par, 0, "auxiliary", i))
        self.table = VariableTable(vs)
        self._blocks: Dict[tuple, Tuple[List[tuple], List[List[Fraction]]]] = {}

    def name(self, a: int, i: int) -> str:
        return self._names.get((a, i), var_name(a, i))

    def x(self, a: int, i: int) -> SuperPoly:
        return SuperPoly.generator(self.table, self.name(a, i))

    def zero(self) -> SuperPoly:
        return SuperPoly(self.table, {})

    def parse(self, text: str) -> SuperPoly:
        from .expression import parse_expression

        return parse_expression(text, self.table)

    # gradings --------------------------------------------------------------
    def _alpha_of(self, idx: int) -> Tuple[int, int]:
        return idx // self.n + 1, idx % self.n + 1

    def gradings(self, mono) -> Tuple[int, int, int]:
        deg = [0, 0, 0]
        for idx, e in mono:
            a, _ = self._alpha_of(idx)
            deg[a - 1] += e
        return tuple(deg)

    def ell(self, mono) -> int:
        n1, n2, n3 = self.gradings(mono)
        return n1 + n2 + 2 * n3

    # first-order operators ---------------------------------------------------
    def _field(self, w: SuperPoly, pairs) -> SuperPoly:
        out = self.zero()
        for coeff_var, var in pairs:
            if not w.depends_on(var):
                continue
            out = out + SuperPoly.generator(self.table, coeff_var) * w.left_derivative(var)
        return out

    def dA(self, a: int, w: SuperPoly) -> SuperPoly:
        return self._field(w, [(self.name(3, i), self.name(a, i)) for i in range(1, self.n + 1)])

    def iA(self, a: int, w: SuperPoly) -> SuperPoly:
        return self._field(w, [(self.name(a, i), self.name(3, i)) for i in range(1, self.n + 1)])

    def number(self, alpha: int, w: SuperPoly) -> SuperPoly:
        out = {}
        for m, c in w.terms.items():
            k = self.gradings(m)[alpha - 1]
            if k:
                out[m] = c * k
        return SuperPoly(self.table, out)

    def scriptL(self, a: int, b: int, w: SuperPoly) -> SuperPoly:
        out = self._field(w, [(self.name(b, i), self.name(a, i)) for i in range(1, self.n + 1)])
        if a == b:
            out = out + self.number(3, w)
        return out

    def traceL(self, w: SuperPoly) -> SuperPoly:
        out = {}
        for m, c in w.terms.items():
            k = self.ell(m)
            if k:
                out[m] = c * k
        return SuperPoly(self.table, out)

    # composite operators -----------------------------------------------------
    def dOp(self, w: SuperPoly) -> SuperPoly:
        return self.dA(1, self.dA(2, w))

    def iOp(self, w: SuperPoly) -> SuperPoly:
        return self.iA(2, self.iA(1, w))

    def LOp(self, w: SuperPoly) -> SuperPoly:
        return self.dOp(self.iOp(w)) - self.iOp(self.dOp(w))

    def Lambda(self, w: SuperPoly) -> SuperPoly:
        L = self.scriptL
        a = L(1, 1, L(2, 2, w)) + L(2, 2, L(1, 1, w))
        b = L(2, 1, L(1, 2, w)) + L(1, 2, L(2, 1, w))
        return (a - b) * Fraction(1, 2) - self.traceL(w) * Fraction(1, 2)

    def LambdaPrime(self, w: SuperPoly) -> SuperPoly:
        return self.Lambda(w) - self.traceL(w) + w * 2

    def R(self, b: int, w: SuperPoly) -> SuperPoly:
        """``R_b = eps_{ba} eps^{dc} L^a_c i_d``."""
        out = self.zero()
        for a in (1, 2):
            s1 = _EPS_DOWN.get((b, a))
            if not s1:
                continue
            for dd in (1, 2):
                for c in (1, 2):
                    s2 = _EPS_UP.get((dd, c))
                    if not s2:
                        continue
                    out = out + self.scriptL(a, c, self.iA(dd, w)) * (s1 * s2)
        return out

    # blocks ------------------------------------------------------------------
    def _split(self, mono):
        """Key of the fine Lambda block containing ``mono``."""
        n = self.n
        counts = [0] * n
        n1 = 0
        x3 = []
        for idx, e in mono:
            a, i = self._alpha_of(idx)
            if a == 3:
                x3.append((idx, e))
            else:
                counts[i - 1] += e
                if a == 1:
                    n1 += e
        return tuple(x3), tuple(counts), n1

    def _fine_basis(self, key) -> List[tuple]:
        x3, counts, n1 = key
        n = self.n
        options = []
        for i in range(n):
            c = counts[i]
            opts = []
            for a1 in range(c + 1):
                a2 = c - a1
                if self.parities[i] and (a1 > 1 or a2 > 1):
                    continue
                opts.append(a1)
            options.append(opts)
        out = []
        for split in product(*options):
            if sum(split) != n1:
                continue
            m = []
            for i in range(n):
                if split[i]:
                    m.append((i, split[i]))
            for i in range(n):
                a2 = counts[i] - split[i]
                if a2:
                    m.append((n + i, a2))
            out.append(tuple(sorted(m + list(x3))))
        return out

    def _fine_block(self, key):
        if key not in self._blocks:
            basis = self._fine_basis(key)
            pos = {m: k for k, m in enumerate(basis)}
            size = len(basis)
            mat = [[Fraction(0)] * size for _ in range(size)]
            for col, m in enumerate(basis):
                img = self.Lambda(SuperPoly(self.table, {m: 1}))
                for mm, c in img.terms.items():
                    if mm not in pos:
                        raise HomotopyFailure("Lambda left its block")
                    mat[pos[mm]][col] = c
            self._blocks[key] = (basis, mat)
        return self._blocks[key]

    def _keys_of_grading(self, n12: int, n3: int):
        n = self.n
        x3_monos = set()
        for exps in _compositions(n3, n):
            if any(self.parities[i] == 0 and exps[i] > 1 for i in range(n)):
                continue  # x3_i is odd when eps_i is even
            x3_monos.add(tuple((2 * n + i, e) for i, e in enumerate(exps) if e))
        keys = []
        for x3 in sorted(x3_monos):
            for counts in _compositions(n12, n):
                if any(self.parities[i] and counts[i] > 2 for i in range(n)):
                    continue
                for n1 in range(n12 + 1):
                    key = (x3, tuple(counts), n1)
                    if self._fine_basis(key):
                        keys.append(key)
        return keys

    def lambdaBlock(self, n12: int, n3: int, allow_uncovered: bool = False) -> Block:
        """Lambda on the span of all monomials with these gradings, with its determinant."""
        if n3 < 2 and not allow_uncovered:
            raise BlockNotCovered(f"Lambda is only certified invertible for n3 >= 2, got {n3}")
        basis: List[tuple] = []
        blocks = []
        det = Fraction(1)
        for key in self._keys_of_grading(n12, n3):
            b, mat = self._fine_block(key)
            blocks.append((len(basis), mat))
            basis.extend(b)
            det *= rational_det(mat)
        size = len(basis)
        full = [[Fraction(0)] * size for _ in range(size)]
        for off, mat in blocks:
            for r, row in enumerate(mat):
                for c, v in enumerate(row):
                    full[off + r][off + c] = v
        return Block(n12, n3, [SuperPoly(self.table, {m: 1}) for m in basis], full, det)

    def lambda_inverse(self, w: SuperPoly) -> Tuple[SuperPoly, Dict[tuple, Fraction]]:
        """Solve ``Lambda x = w`` blockwise; also returns the determinants used."""
        groups: Dict[tuple, Dict[tuple, Fraction]] = {}
        for m, c in w.terms.items():
            groups.setdefault(self._split(m), {})[m] = c
        out = {}
        dets = {}
        for key in sorted(groups):
            basis, mat = self._fine_block(key)
            rhs = [groups[key].get(m, Fraction(0)) for m in basis]
            det = rational_det(mat)
            dets[key] = det
            if det == 0:
                raise NotInvertible(f"Lambda is singular on block {key}")
            sol = rational_solve(mat, rhs)
            for m, v in zip(basis, sol):
                if v:
                    out[m] = out.get(m, 0) + v
        return SuperPoly(self.table, out), dets

    # homotopy ----------------------------------------------------------------
    def biPoincareHomotopy(self, omega: SuperPoly, verify: bool = True) -> SuperPoly:
        if omega.is_zero():
            return self.zero()
        if omega.table != self.table:
            omega = omega.to_table(self.table)
        if omega.degree() > self.degree:
            raise BeyondTruncation(f"form has degree {omega.degree()} above the truncation degree {self.degree}")
        low = [m for m in omega.terms if self.gradings(m)[2] < 2]
        if low:
            raise DegreeTooLow("every component needs at least two x3 generators")
        res = {a: self.dA(a, omega) for a in (1, 2)}
        bad = {a: r for a, r in res.items() if not r.is_zero()}
        if bad:
            raise NotClosed("form is not closed under d^1 and d^2", bad)
        x, _ = self.lambda_inverse(omega)
        eta = self.iOp(x)
        if verify and self.dOp(eta) != omega:
            raise HomotopyFailure("d(eta) differs from omega")
        return eta

    def highest_weight_eigenvalue(self, v: SuperPoly) -> Tuple[Fraction, Fraction, int]:
        """For a highest-weight monomial-homogeneous ``v``: (observed, predicted, bound)."""
        if not self.scriptL(2, 1, v).is_zero():
            raise ValueError("not a highest-weight vector")
        m = next(iter(v.terms))
        n1, n2, n3 = self.gradings(m)
        ell = n1 + n2 + 2 * n3
        j = Fraction(n1 - n2, 2)
        lam = self.Lambda(v)
        c = v.terms[m]
        observed = lam.terms.get(m, Fraction(0)) / c
        if lam != v * observed:
            raise ValueError("vector is not an eigenvector of Lambda")
        predicted = Fraction(ell, 2) * (Fraction(ell, 2) - 1) - j * (j + 1)
        return observed, predicted, (n1 + n2 + n3) * (n3 - 1)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def biPoincareHomotopy(omega: SuperPoly, algebra: TriGradedAlgebra) -> SuperPoly:
    return algebra.biPoincareHomotopy(omega)
