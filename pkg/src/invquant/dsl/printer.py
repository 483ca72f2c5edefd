"""Canonical pretty-printer; its output reparses to an equal syntax tree."""

from __future__ import annotations

from . import ast

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY = 3


def _prec(e: ast.Expr) -> int:
    if isinstance(e, ast.BinOp):
        return _PREC[e.op]
    if isinstance(e, ast.Neg):
        return _UNARY
    return 5


def format_expr(e: ast.Expr) -> str:
    if isinstance(e, ast.Num):
        return e.text
    if isinstance(e, ast.Name):
        return e.id
    if isinstance(e, ast.Call):
        return f"{e.func}({format_expr(e.arg)})"
    if isinstance(e, ast.Neg):
        inner = format_expr(e.operand)
        # "- -x" would still parse, but keep a single sign per level readable
        return f"-({inner})" if _prec(e.operand) < _UNARY else f"-{inner}"
    p = _PREC[e.op]
    left, right = format_expr(e.left), format_expr(e.right)
    if e.op == "^":
        # right-associative; a negative base needs parentheses
        if _prec(e.left) <= _PREC["^"]:
            left = f"({left})"
        if _prec(e.right) < _UNARY:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    # left-associative: equal precedence on the right keeps its parentheses
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def _domain(d: ast.Domain) -> str:
    return f"  domain {d.var} in ({format_expr(d.low)}, {format_expr(d.high)})"


def _header(kind: str, d) -> str:
    return f"{kind} {d.name} dim {d.dim} ({', '.join(d.variables)}):"


def format_decl(d: ast.Decl) -> str:
    if isinstance(d, ast.ConstDecl):
        return "const " + ", ".join(d.names)
    if isinstance(d, ast.ParamDecl):
        return f"param {d.name} = {format_expr(d.value)}"
    if isinstance(d, ast.TransformDecl):
        lines = [_header("transform", d)]
        lines += [f"  {t} = {format_expr(e)}" for t, e in d.components]
        lines += [_domain(x) for x in d.domains]
        return "\n".join(lines + ["end"])
    if isinstance(d, ast.MetricDecl):
        lines = [_header("metric", d)]
        lines += [f"  g[{a}, {b}] = {format_expr(e)}" for a, b, e in d.entries]
        lines += [_domain(x) for x in d.domains]
        return "\n".join(lines + ["end"])
    if isinstance(d, ast.ChartDecl):
        return "\n".join([_header("chart", d)] + [_domain(x) for x in d.domains] + ["end"])
    if isinstance(d, ast.FieldsDecl):
        lines = [f"fields {d.name} on {d.chart}:"]
        lines += [f"  pair {x} {y}" for x, y in d.pairs]
        lines += [f"  {f}.{v} = {format_expr(e)}" for f, v, e in d.components]
        return "\n".join(lines + ["end"])
    if isinstance(d, ast.ProductDecl):
        args = f"({', '.join(format_expr(a) for a in d.args)})" if d.args else ""
        return f"product {d.name} = {d.kind}{args} on {d.chart}"
    if isinstance(d, ast.HamiltonianDecl):
        on = f" on {d.chart}" if d.chart else ""
        return f"hamiltonian {d.name}{on}: {format_expr(d.body)}"
    if isinstance(d, ast.QuantizeDecl):
        arg = f"({format_expr(d.alpha)})" if d.alpha is not None else ""
        return f"quantize {d.target} with {d.method}{arg}"
    raise TypeError(f"not a declaration: {d!r}")


def pretty(model: ast.ModelFile) -> str:
    return "\n\n".join(format_decl(d) for d in model.declarations) + "\n"
