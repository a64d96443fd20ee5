"""JSON chart files.

A chart file lists the graded coordinates, the intrinsic bracket parity, a
truncation degree, the two fundamental bracket tables as sparse
``{A, B, expression}`` lists and optionally a base point.  Only one entry of
each graded-antisymmetric pair needs to be given; saving writes the entries
with ``A`` before ``B`` in declaration order, so load/save/load is stable.
"""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, Optional

from .expression import ParseError, parse_rational, print_expression
from .poisson import Chart, NotAntisymmetric, PoissonPencil, PoissonStructure
from .superalgebra import GradedVariable, VariableTable, is_zero
from .triplectic import TriplecticChart


class ChartFileError(ValueError):
    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ChartFile:
    def __init__(self, pencil: PoissonPencil, base_point: Optional[Dict[str, Fraction]] = None):
        self.pencil = pencil
        self.base_point = base_point

    @property
    def chart(self) -> Chart:
        return self.pencil.chart

    def triplectic(self) -> TriplecticChart:
        return TriplecticChart(self.pencil)


def _need(doc, key, where):
    if key not in doc:
        raise ChartFileError(f"missing field {key!r}", where)
    return doc[key]


def _variables(doc) -> VariableTable:
    vs = []
    seen = set()
    for k, v in enumerate(_need(doc, "variables", "")):
        where = f"variables[{k}]"
        name = _need(v, "name", where)
        if name in seen:
            raise ChartFileError(f"duplicate variable {name!r}", where)
        seen.add(name)
        try:
            vs.append(GradedVariable(name, int(v.get("parity", 0)), int(v.get("formDegree", 0)),
                                     v.get("role", "auxiliary"), int(v.get("index", 0))))
        except (TypeError, ValueError) as exc:
            raise ChartFileError(str(exc), where) from None
    return VariableTable(vs)


def _structure(doc, key, chart: Chart) -> PoissonStructure:
    entries = {}
    for k, e in enumerate(doc.get(key, [])):
        where = f"{key}[{k}]"
        a, b = _need(e, "A", where), _need(e, "B", where)
        for x in (a, b):
            if x not in chart.table:
                raise ChartFileError(f"unknown variable {x!r}", where)
        text = str(_need(e, "expression", where))
        try:
            val = parse_rational(text, chart.table)
        except ParseError as exc:
            raise ChartFileError(f"{exc} in {text!r}", f"{where}.expression") from None
        if (a, b) in entries:
            raise ChartFileError(f"entry {{{a},{b}}} given twice", where)
        entries[(a, b)] = val
    try:
        return PoissonStructure(chart, entries, complete=True, check=True)
    except NotAntisymmetric as exc:
        raise ChartFileError(str(exc), key) from None
    except ValueError as exc:
        raise ChartFileError(str(exc), key) from None


def chart_from_dict(doc) -> ChartFile:
    table = _variables(doc)
    eps = int(doc.get("epsilon", 0))
    if eps not in (0, 1):
        raise ChartFileError("epsilon must be 0 or 1", "epsilon")
    chart = Chart(table, eps, int(doc.get("truncationDegree", 8)))
    pencil = PoissonPencil(_structure(doc, "bracket1", chart), _structure(doc, "bracket2", chart))
    base = None
    if doc.get("basePoint") is not None:
        base = {}
        for k, v in doc["basePoint"].items():
            if k not in table:
                raise ChartFileError(f"unknown variable {k!r}", "basePoint")
            try:
                base[k] = Fraction(str(v))
            except ValueError:
                raise ChartFileError(f"bad value {v!r}", f"basePoint.{k}") from None
    return ChartFile(pencil, base)


def load_chart(path) -> ChartFile:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChartFileError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return chart_from_dict(doc)


def _entries(S: PoissonStructure):
    names = S.chart.names
    pos = {n: i for i, n in enumerate(names)}
    out = []
    for (a, b), v in sorted(S.pi.items(), key=lambda kv: (pos[kv[0][0]], pos[kv[0][1]])):
        if pos[a] > pos[b] or is_zero(v):
            continue
        out.append({"A": a, "B": b, "expression": print_expression(v)})
    return out


def chart_to_dict(pencil: PoissonPencil, base_point=None) -> dict:
    chart = pencil.chart
    doc = {
        "variables": [
            {"name": v.name, "parity": v.parity, "formDegree": v.form_degree, "role": v.role, "index": v.index}
            for v in chart.coordinates()
        ],
        "epsilon": chart.epsilon,
        "truncationDegree": chart.truncation_degree,
        "bracket1": _entries(pencil.first),
        "bracket2": _entries(pencil.second),
    }
    if base_point:
        doc["basePoint"] = {k: str(Fraction(v)) for k, v in sorted(base_point.items())}
    return doc


def save_chart(pencil: PoissonPencil, path, base_point=None):
    Path(path).write_text(json.dumps(chart_to_dict(pencil, base_point), indent=2) + "\n", encoding="utf-8")


def fixture_path(name: str) -> Path:
    """Path of a shipped fixture, by file stem or name."""
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("bidarboux") / "fixtures" / name))


def load_fixture(name: str) -> ChartFile:
    return load_chart(fixture_path(name))
