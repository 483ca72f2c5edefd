"""Syntax tree of model files.

Source positions are carried on every node but excluded from equality, so a
pretty-printed and re-parsed file compares equal to the original.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Pos:
    line: int
    column: int


def _pos() -> Pos:
    return field(default=Pos(0, 0), compare=False, repr=False)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    text: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Name:
    id: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Neg:
    operand: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    arg: Expr
    pos: Pos = _pos()


Expr = Num | Name | Neg | BinOp | Call


# -- declarations ------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    var: str
    low: Expr
    high: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ConstDecl:
    names: tuple[str, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class ParamDecl:
    name: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class TransformDecl:
    name: str
    dim: int
    variables: tuple[str, ...]
    components: tuple[tuple[str, Expr], ...]
    domains: tuple[Domain, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class MetricDecl:
    name: str
    dim: int
    variables: tuple[str, ...]
    entries: tuple[tuple[str, str, Expr], ...]
    domains: tuple[Domain, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class ChartDecl:
    name: str
    dim: int
    variables: tuple[str, ...]
    domains: tuple[Domain, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class FieldsDecl:
    name: str
    chart: str
    pairs: tuple[tuple[str, str], ...]
    components: tuple[tuple[str, str, Expr], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class ProductDecl:
    name: str
    kind: str
    args: tuple[Expr, ...]
    chart: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class HamiltonianDecl:
    name: str
    chart: str | None
    body: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class QuantizeDecl:
    target: str
    method: str
    alpha: Expr | None
    pos: Pos = _pos()


Decl = ConstDecl | ParamDecl | TransformDecl | MetricDecl | ChartDecl | FieldsDecl | ProductDecl | HamiltonianDecl | QuantizeDecl


@dataclass(frozen=True)
class ModelFile:
    declarations: tuple[Decl, ...]

    def names(self) -> list[str]:
        return [d.name for d in self.declarations if hasattr(d, "name")]

    def find(self, name: str):
        for d in self.declarations:
            if getattr(d, "name", None) == name:
                return d
        return None


def strip_positions(node):
    """Copy of ``node`` with every position reset (for debugging comparisons)."""
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        kwargs = {}
        for f in dataclasses.fields(node):
            value = getattr(node, f.name)
            kwargs[f.name] = Pos(0, 0) if f.name == "pos" else strip_positions(value)
        return type(node)(**kwargs)
    if isinstance(node, tuple):
        return tuple(strip_positions(x) for x in node)
    return node
