"""Semantic layer: turn a parsed model file into library objects.

Scoping is declaration-ordered: a stanza may only mention names declared
above it.  Every check reports the source position of the offending node.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property

import sympy as sp

from ..core import HBAR, NAMED_CONSTANTS, DEFAULT_ORDER, MomentumPoly, PhaseFunction, SampleDomain, momentum
from ..errors import DimensionMismatch, InvQuantError, ModelError, NonPolynomialMomenta, UndeclaredName
from ..geometry import (
    ChristoffelField,
    CurvatureData,
    MetricField,
    PointTransformation,
    christoffel_from_metric,
    curvature,
)
from ..phase import PhaseVectorField
from ..star import StarProduct, moyal, sigma_product, star_from_vectorfields, transformed_moyal
from . import ast
from .parser import parse

_FUNCS = {"sin": sp.sin, "cos": sp.cos, "tan": sp.tan, "exp": sp.exp, "ln": sp.log, "sqrt": sp.sqrt}
_BUILTINS: dict[str, sp.Expr] = {"pi": sp.pi, "I": sp.I, **{s.name: s for s in NAMED_CONSTANTS}}
DEFAULT_INTERVAL = (-2.0, 2.0)


def to_sympy(e: ast.Expr, scope: dict[str, sp.Expr]) -> sp.Expr:
    """Evaluate an expression node in ``scope``; unknown names are errors."""
    if isinstance(e, ast.Num):
        return sp.Rational(e.text)
    if isinstance(e, ast.Name):
        if e.id not in scope:
            raise UndeclaredName(f"undeclared name {e.id!r}", e.pos.line, e.pos.column)
        return scope[e.id]
    if isinstance(e, ast.Neg):
        return -to_sympy(e.operand, scope)
    if isinstance(e, ast.Call):
        return _FUNCS[e.func](to_sympy(e.arg, scope))
    a, b = to_sympy(e.left, scope), to_sympy(e.right, scope)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0:
            raise ModelError("division by zero", e.pos.line, e.pos.column)
        return a / b
    return a**b


@dataclass
class Chart:
    """A coordinate patch together with whatever geometry its stanza supplies."""

    name: str
    kind: str  # "transform", "metric" or "chart"
    coords: tuple[sp.Symbol, ...]
    domain: SampleDomain
    transform: PointTransformation | None = None
    metric_field: MetricField | None = None

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def flat(self) -> bool:
        return self.kind != "metric"

    @cached_property
    def gamma(self) -> ChristoffelField:
        if self.transform is not None:
            return self.transform.christoffel
        if self.metric_field is not None:
            return christoffel_from_metric(self.metric_field)
        return ChristoffelField.flat(self.coords)

    @cached_property
    def metric(self) -> MetricField:
        if self.transform is not None:
            return self.transform.metric
        if self.metric_field is not None:
            return self.metric_field
        return MetricField.from_rows(self.coords, sp.eye(self.dim).tolist(), self.domain, self.name)

    @cached_property
    def curvature(self) -> CurvatureData:
        return curvature(self.gamma, self.metric)


@dataclass
class Hamiltonian:
    name: str
    chart: Chart
    expr: sp.Expr
    pos: ast.Pos

    def series(self, coords=None, order: int = DEFAULT_ORDER) -> PhaseFunction:
        coords = self.chart.coords if coords is None else coords
        try:
            return PhaseFunction.from_expr(self.expr, coords, order)
        except NonPolynomialMomenta as exc:
            raise ModelError(f"hamiltonian {self.name!r}: {exc}", self.pos.line, self.pos.column) from exc

    def classical(self) -> MomentumPoly:
        return self.series().coeffs[0]


@dataclass
class Quantization:
    target: Hamiltonian
    method: str
    alpha: sp.Expr | None


@dataclass
class Model:
    source: ast.ModelFile
    constants: dict[str, sp.Symbol] = field(default_factory=dict)
    params: dict[str, sp.Expr] = field(default_factory=dict)
    charts: dict[str, Chart] = field(default_factory=dict)
    products: dict[str, Callable[[int], StarProduct]] = field(default_factory=dict)
    hamiltonians: dict[str, Hamiltonian] = field(default_factory=dict)
    quantizations: list[Quantization] = field(default_factory=list)
    order: int = DEFAULT_ORDER

    def names(self) -> set[str]:
        return set(self.constants) | set(self.params) | set(self.charts) | set(self.products) | set(self.hamiltonians)

    def chart(self, name: str) -> Chart:
        if name not in self.charts:
            raise UndeclaredName(f"no transform, metric or chart named {name!r}")
        return self.charts[name]

    def product(self, name: str, order: int | None = None) -> StarProduct:
        """Star product by name; a flat chart name yields its transformed Moyal product."""
        order = self.order if order is None else order
        if name in self.products:
            return self.products[name](order)
        chart = self.chart(name)
        if chart.transform is not None:
            return transformed_moyal(chart.transform, order)
        if chart.kind == "chart":
            return moyal(chart.coords, order)
        raise ModelError(f"{name!r} is a metric; star products need flat fields")

    def hamiltonian(self, name: str) -> Hamiltonian:
        if name not in self.hamiltonians:
            raise UndeclaredName(f"no hamiltonian named {name!r}")
        return self.hamiltonians[name]


class _Builder:
    def __init__(self, tree: ast.ModelFile):
        self.model = Model(tree)

    def fail(self, cls, msg: str, pos: ast.Pos):
        return cls(msg, pos.line, pos.column)

    def base_scope(self) -> dict[str, sp.Expr]:
        scope = dict(_BUILTINS)
        scope.update(self.model.constants)
        scope.update(self.model.params)
        return scope

    def declare(self, name: str, pos: ast.Pos) -> None:
        if name in self.model.names():
            raise self.fail(ModelError, f"{name!r} is already declared", pos)

    def bound(self, e: ast.Expr, scope) -> float:
        value = to_sympy(e, scope)
        if not value.is_real:
            raise self.fail(ModelError, "domain bounds must be real numbers", e.pos)
        return float(value)

    def domain(self, decl, variables: tuple[str, ...]) -> SampleDomain:
        scope = self.base_scope()
        intervals = {}
        for d in decl.domains:
            if d.var not in variables:
                raise self.fail(UndeclaredName, f"domain for undeclared variable {d.var!r}", d.pos)
            lo, hi = self.bound(d.low, scope), self.bound(d.high, scope)
            if not lo < hi:
                raise self.fail(ModelError, f"empty interval for {d.var!r}", d.pos)
            intervals[sp.Symbol(d.var)] = (lo, hi)
        for v in variables:
            intervals.setdefault(sp.Symbol(v), DEFAULT_INTERVAL)
        constants = {s: 1.0 for s in self.model.constants.values()}
        coords = [sp.Symbol(v) for v in variables]
        return SampleDomain(intervals, constants).with_momenta(coords)

    def check_header(self, decl) -> tuple[sp.Symbol, ...]:
        if len(decl.variables) != decl.dim:
            raise self.fail(DimensionMismatch,
                            f"{decl.name!r} declares dim {decl.dim} but lists {len(decl.variables)} variables", decl.pos)
        if len(set(decl.variables)) != len(decl.variables):
            raise self.fail(ModelError, f"{decl.name!r} repeats a variable", decl.pos)
        return tuple(sp.Symbol(v) for v in decl.variables)

    def config_scope(self, coords) -> dict[str, sp.Expr]:
        scope = self.base_scope()
        scope.update({x.name: x for x in coords})
        return scope

    def phase_scope(self, coords) -> dict[str, sp.Expr]:
        scope = self.config_scope(coords)
        scope.update({momentum(x).name: momentum(x) for x in coords})
        scope["hbar"] = HBAR
        return scope

    # -- stanzas -------------------------------------------------------------

    def const(self, d: ast.ConstDecl) -> None:
        for name in d.names:
            if name in _BUILTINS and name in self.model.constants:
                raise self.fail(ModelError, f"{name!r} is already declared", d.pos)
            if name not in _BUILTINS:
                self.declare(name, d.pos)
            self.model.constants[name] = sp.Symbol(name)

    def param(self, d: ast.ParamDecl) -> None:
        self.declare(d.name, d.pos)
        self.model.params[d.name] = to_sympy(d.value, self.base_scope())

    def transform(self, d: ast.TransformDecl) -> None:
        self.declare(d.name, d.pos)
        coords = self.check_header(d)
        if len(d.components) != d.dim:
            raise self.fail(DimensionMismatch,
                            f"transform {d.name!r} of dim {d.dim} gives {len(d.components)} components", d.pos)
        scope = self.config_scope(coords)
        targets = tuple(sp.Symbol(t) for t, _ in d.components)
        phi = tuple(to_sympy(e, scope) for _, e in d.components)
        dom = self.domain(d, d.variables)
        try:
            T = PointTransformation(d.name, coords, targets, phi, dom)
        except InvQuantError as exc:
            raise self.fail(ModelError, f"transform {d.name!r}: {exc}", d.pos) from exc
        self.model.charts[d.name] = Chart(d.name, "transform", coords, dom, transform=T)

    def metric(self, d: ast.MetricDecl) -> None:
        self.declare(d.name, d.pos)
        coords = self.check_header(d)
        scope = self.config_scope(coords)
        rows = [[sp.S.Zero] * d.dim for _ in range(d.dim)]
        for a, b, e in d.entries:
            for v in (a, b):
                if v not in d.variables:
                    raise self.fail(UndeclaredName, f"metric index {v!r} is not a variable of {d.name!r}", e.pos)
            i, j = d.variables.index(a), d.variables.index(b)
            rows[i][j] = rows[j][i] = to_sympy(e, scope)
        dom = self.domain(d, d.variables)
        try:
            g = MetricField.from_rows(coords, rows, dom, d.name)
        except InvQuantError as exc:
            raise self.fail(ModelError, f"metric {d.name!r}: {exc}", d.pos) from exc
        self.model.charts[d.name] = Chart(d.name, "metric", coords, dom, metric_field=g)

    def chart(self, d: ast.ChartDecl) -> None:
        self.declare(d.name, d.pos)
        coords = self.check_header(d)
        self.model.charts[d.name] = Chart(d.name, "chart", coords, self.domain(d, d.variables))

    def lookup_chart(self, name: str, pos: ast.Pos) -> Chart:
        if name not in self.model.charts:
            raise self.fail(UndeclaredName, f"undeclared chart {name!r}", pos)
        return self.model.charts[name]

    def fields(self, d: ast.FieldsDecl) -> None:
        self.declare(d.name, d.pos)
        chart = self.lookup_chart(d.chart, d.pos)
        if len(d.pairs) != chart.dim:
            raise self.fail(DimensionMismatch,
                            f"{len(d.pairs)} field pairs on the {chart.dim}-dimensional chart {chart.name!r}", d.pos)
        names = [x for pair in d.pairs for x in pair]
        slots = {x.name: i for i, x in enumerate(chart.coords)}
        slots.update({momentum(x).name: chart.dim + i for i, x in enumerate(chart.coords)})
        comps = {f: [sp.S.Zero] * (2 * chart.dim) for f in names}
        scope = self.phase_scope(chart.coords)
        del scope["hbar"]
        for f, var, e in d.components:
            if f not in comps:
                raise self.fail(UndeclaredName, f"field {f!r} is not part of a declared pair", e.pos)
            if var not in slots:
                raise self.fail(UndeclaredName, f"{var!r} is not a phase-space variable of {chart.name!r}", e.pos)
            comps[f][slots[var]] = to_sympy(e, scope)
        n = chart.dim
        vf = {f: PhaseVectorField(chart.coords, c[:n], c[n:]) for f, c in comps.items()}
        Xs = [vf[x] for x, _ in d.pairs]
        Ys = [vf[y] for _, y in d.pairs]
        try:
            star_from_vectorfields(Xs, Ys, 0, chart.domain, d.name)
        except InvQuantError as exc:
            raise self.fail(ModelError, f"fields {d.name!r}: {exc}", d.pos) from exc
        self.model.products[d.name] = lambda order: star_from_vectorfields(Xs, Ys, order, name=d.name)

    def product(self, d: ast.ProductDecl) -> None:
        self.declare(d.name, d.pos)
        chart = self.lookup_chart(d.chart, d.pos)
        args = [to_sympy(a, self.base_scope()) for a in d.args]
        if d.kind == "sigma":
            if len(args) != 3:
                raise self.fail(DimensionMismatch, "sigma(...) takes sigma, alpha and beta", d.pos)
            self.model.products[d.name] = lambda order: sigma_product(chart.coords, *args, order=order)
        else:
            if args:
                raise self.fail(DimensionMismatch, "moyal takes no parameters", d.pos)
            self.model.products[d.name] = lambda order: moyal(chart.coords, order)

    def infer_chart(self, d: ast.HamiltonianDecl) -> Chart:
        used = _names(d.body)
        base = set(self.base_scope()) | {"hbar"}
        for chart in self.model.charts.values():
            allowed = set(self.phase_scope(chart.coords))
            if used <= allowed and (used - base):
                return chart
        unknown = sorted(used - base)
        raise self.fail(UndeclaredName, f"no declared chart provides {', '.join(unknown) or 'these names'}", d.pos)

    def hamiltonian(self, d: ast.HamiltonianDecl) -> None:
        self.declare(d.name, d.pos)
        chart = self.lookup_chart(d.chart, d.pos) if d.chart else self.infer_chart(d)
        expr = to_sympy(d.body, self.phase_scope(chart.coords))
        ham = Hamiltonian(d.name, chart, expr, d.pos)
        ham.series()
        self.model.hamiltonians[d.name] = ham

    def quantize(self, d: ast.QuantizeDecl) -> None:
        if d.target not in self.model.hamiltonians:
            raise self.fail(UndeclaredName, f"undeclared hamiltonian {d.target!r}", d.pos)
        alpha = to_sympy(d.alpha, self.base_scope()) if d.alpha is not None else None
        self.model.quantizations.append(Quantization(self.model.hamiltonians[d.target], d.method, alpha))

    def build(self) -> Model:
        dispatch = {
            ast.ConstDecl: self.const, ast.ParamDecl: self.param, ast.TransformDecl: self.transform,
            ast.MetricDecl: self.metric, ast.ChartDecl: self.chart, ast.FieldsDecl: self.fields,
            ast.ProductDecl: self.product, ast.HamiltonianDecl: self.hamiltonian, ast.QuantizeDecl: self.quantize,
        }
        for d in self.model.source.declarations:
            dispatch[type(d)](d)
        return self.model


def _names(e: ast.Expr) -> set[str]:
    if isinstance(e, ast.Name):
        return {e.id}
    if isinstance(e, ast.Num):
        return set()
    if isinstance(e, ast.Neg):
        return _names(e.operand)
    if isinstance(e, ast.Call):
        return _names(e.arg)
    return _names(e.left) | _names(e.right)


def build(tree: ast.ModelFile) -> Model:
    return _Builder(tree).build()


def load(source: str) -> Model:
    return build(parse(source))
