"""Generated chart corpus for cross-checks.

Factorizable members are canonical charts pushed through random triangular
coordinate changes: an F3 transformation ``p' = A(p)`` with gauge ``B(p, c)``
and a Casimir change ``c' = gamma(c)``.  Triangular maps with constant
diagonals have polynomial inverses, so every member is exact.  The
non-factorizable members are the rank-one obstruction ``E = p + c`` and a
diagonal version of it, optionally moved by the same kind of maps.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from .poisson import random_poly
from .superalgebra import SuperPoly
from .triplectic import (
    F3Generator,
    TriplecticChart,
    apply_f3,
    canonical_chart,
    chart_from_EF,
    reparametrize_casimirs,
)


@dataclass
class CorpusMember:
    name: str
    chart: TriplecticChart
    factorizable: bool
    generators: List[dict] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.chart.n

    @property
    def epsilon(self) -> int:
        return self.chart.epsilon


def _coeff(rng):
    return rng.choice([1, -1, 2, Fraction(1, 2), -2, 3])


def triangular_map(tc: TriplecticChart, names, rng: random.Random, degree: int = 2) -> List[SuperPoly]:
    """``y_k = s_k x_k + f_k(x_{k+1}, ...)`` with parity-matched ``f_k`` and no constant term."""
    t = tc.table
    out = []
    for k, x in enumerate(names):
        later = names[k + 1:]
        y = SuperPoly.generator(t, x) * _coeff(rng)
        if later:
            f = SuperPoly(t, {})
            for _ in range(20):
                f = random_poly(t, later, rng, degree=degree, terms=2, parity=t[x].parity)
                f = f - f.constant_term()
                if not f.is_zero() and f.degree() >= min(2, degree):
                    break
            y = y + f
        out.append(y)
    return out


def gauge_potential(tc: TriplecticChart, rng: random.Random, degree: int = 3) -> SuperPoly:
    """Random ``B(p, c)`` of parity epsilon with at least one mixed p-c term when possible."""
    t = tc.table
    names = tc.p + tc.c
    B = random_poly(t, names, rng, degree=degree, terms=3, parity=tc.epsilon)
    for _ in range(20):
        mixed = rng.choice(tc.p) , rng.choice(tc.c)
        m = SuperPoly.generator(t, mixed[0]) * SuperPoly.generator(t, mixed[1])
        if not m.is_zero() and m.parity() == tc.epsilon:
            B = B + m * _coeff(rng)
            break
    return B - B.constant_term()


def e_degree(tc: TriplecticChart) -> int:
    d = 0
    for row in tc.E():
        for x in row:
            num = getattr(x, "num", x)
            if not num.is_zero():
                d = max(d, num.degree())
    return d


def transform_member(tc: TriplecticChart, rng: random.Random, with_gauge: bool = True, degree: int = 2):
    """Apply a random Casimir change and a random F3 step; returns the chart and the generators used."""
    log = []
    t = tc.table
    gamma = triangular_map(tc, tc.c, rng, degree)
    Cinv = [[g.left_derivative(ci) for g in gamma] for ci in tc.c]
    step = reparametrize_casimirs(tc, Cinv)
    tc = step.chart
    log.append({"kind": "casimir", "map": gamma})
    A = triangular_map(tc, tc.p, rng, degree)
    B = gauge_potential(tc, rng) if with_gauge else None
    step = apply_f3(tc, F3Generator(A, B))
    log.append({"kind": "f3", "A": A, "B": B})
    return step.chart, log


def product_chart(epsilon: int, parities, rng: random.Random, with_gauge: bool = True):
    """n = 1 chart with ``E = a(p) g(c)`` (even body factors) moved by a gauge step."""
    tc = canonical_chart(1, epsilon, parities)
    t = tc.table
    p, c = tc.gen("p1"), tc.gen("c1")
    if t["p1"].parity == 0:
        a = _coeff(rng) + p * _coeff(rng) + (p * p * _coeff(rng) if rng.random() < 0.5 else 0)
        g = _coeff(rng) + c * _coeff(rng)
    else:
        a, g = SuperPoly.constant(t, _coeff(rng)), SuperPoly.constant(t, _coeff(rng))
    tc = chart_from_EF(1, epsilon, parities, E=[[a * g]], chart=tc.chart)
    log = [{"kind": "product", "E": a * g}]
    if with_gauge:
        B = gauge_potential(tc, rng)
        tc = apply_f3(tc, F3Generator([p], B)).chart
        log.append({"kind": "f3", "A": [p], "B": B})
    return tc, log


def factorizable_member(n: int, epsilon: int, parities, rng: random.Random, with_gauge: bool = True,
                        max_degree: int = 3, name: str = "") -> CorpusMember:
    if n == 1:
        tc, log = product_chart(epsilon, parities, rng, with_gauge)
        return CorpusMember(name or f"fact-n1-e{epsilon}-{parities[0]}", tc, True, log)
    for _ in range(30):
        tc, log = transform_member(canonical_chart(n, epsilon, parities), rng, with_gauge)
        if e_degree(tc) <= max_degree:
            return CorpusMember(name or f"fact-n{n}-e{epsilon}-{''.join(map(str, parities))}", tc, True, log)
    raise RuntimeError("could not draw a low-degree member")


def manual_members() -> List[CorpusMember]:
    out = [
        CorpusMember("product-n1", chart_from_EF(1, 0, None, E=[["(1+p1)*(2+c1)"]]), True),
        CorpusMember("linear-n1", chart_from_EF(1, 0, None, E=[["2*(1+p1)"]]), True),
        CorpusMember("canonical-n2", canonical_chart(2), True),
        CorpusMember("obstructed-n1", chart_from_EF(1, 0, None, E=[["p1+c1"]]), False),
        CorpusMember("obstructed-odd-q", chart_from_EF(1, 1, [1], E=[["p1+c1"]]), False),
        CorpusMember("obstructed-diag-n2", chart_from_EF(2, 0, None, E=[["p1+c1", "0"], ["0", "p2+c2"]]), False),
        CorpusMember("obstructed-n2-mixed",
                     chart_from_EF(2, 0, [0, 1], E=[["p1+c1", "0"], ["0", "1"]]), False),
    ]
    return out


SHAPES = [
    (1, 0, [0]), (1, 1, [0]), (1, 1, [1]), (1, 0, [1]),
    (2, 0, [0, 0]), (2, 1, [0, 1]), (2, 0, [1, 0]), (2, 1, [1, 1]),
    (3, 0, [0, 0, 0]), (3, 1, [1, 0, 1]),
]


def build_corpus(seed: int = 2024, extra_obstructed: bool = True) -> List[CorpusMember]:
    """At least ten factorizable members over n in {1,2,3}, eps in {0,1}, plus obstructed ones."""
    rng = random.Random(seed)
    members = manual_members()
    for k, (n, eps, par) in enumerate(SHAPES):
        members.append(factorizable_member(n, eps, par, rng, with_gauge=(k % 3 != 2),
                                           name=f"fact-{k}-n{n}-e{eps}-{''.join(map(str, par))}"))
    if extra_obstructed:
        base = chart_from_EF(2, 0, None, E=[["p1+c1", "0"], ["0", "1"]])
        tc, log = transform_member(base, rng, with_gauge=True)
        members.append(CorpusMember("obstructed-moved-n2", tc, False, log))
    return members
