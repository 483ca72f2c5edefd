"""Lexer and recursive-descent parser for model files.

Grammar (one statement per line; newlines inside parentheses are ignored)::

    const NAME {, NAME}
    param NAME = expr
    transform NAME dim INT (NAME {, NAME}):  { NAME = expr | domain }  end
    metric NAME dim INT (NAME {, NAME}):     { g[NAME, NAME] = expr | domain }  end
    chart NAME dim INT (NAME {, NAME}):      { domain }  end
    fields NAME on NAME:                     { pair NAME NAME | NAME.NAME = expr }  end
    product NAME = KIND(expr {, expr}) on NAME
    hamiltonian NAME [on NAME]: expr          (expr may start on the next line)
    quantize NAME with METHOD [(expr)]
    domain NAME in (expr, expr)

    expr  := term {(+|-) term}
    term  := unary {(*|/) unary}
    unary := - unary | power
    power := atom [^ unary]
    atom  := NUMBER | NAME | NAME(expr) | (expr)

Keywords are contextual, so ``e`` or ``domain`` stay usable as names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ModelSyntaxError
from . import ast

FUNCTIONS = frozenset({"sin", "cos", "tan", "exp", "ln", "sqrt"})
METHODS = frozenset({"weyl", "s_order", "covariant", "curved", "minimal"})
PRODUCT_KINDS = frozenset({"sigma", "moyal"})

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>#[^\n]*)|(?P<nl>\n)"
    r"|(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()=,\[\].:])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "number", "op", "nl", "eof"
    text: str
    line: int
    column: int

    @property
    def pos(self) -> ast.Pos:
        return ast.Pos(self.line, self.column)

    def describe(self) -> str:
        return {"nl": "end of line", "eof": "end of input"}.get(self.kind, repr(self.text))


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, depth = 1, 0, 0
    i = 0
    while i < len(source):
        m = _TOKEN.match(source, i)
        col = i - line_start + 1
        if m is None:
            raise ModelSyntaxError(f"unexpected character {source[i]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            # newlines inside parentheses continue the statement
            if depth == 0:
                tokens.append(Token("nl", text, line, col))
            line += 1
            line_start = m.end()
        elif kind in ("number", "name"):
            tokens.append(Token(kind, text, line, col))
        elif kind == "op":
            if text in "([":
                depth += 1
            elif text in ")]":
                depth = max(depth - 1, 0)
            tokens.append(Token("op", text, line, col))
        i = m.end()
    tokens.append(Token("nl", "", line, i - line_start + 1))
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    # -- token plumbing ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, expected: str, tok: Token | None = None) -> ModelSyntaxError:
        tok = tok or self.tok
        return ModelSyntaxError(f"expected {expected}, found {tok.describe()}", tok.line, tok.column)

    def at_op(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def at_word(self, word: str) -> bool:
        return self.tok.kind == "name" and self.tok.text == word

    def op(self, text: str) -> Token:
        if not self.at_op(text):
            raise self.error(repr(text))
        return self.advance()

    def word(self, word: str) -> Token:
        if not self.at_word(word):
            raise self.error(repr(word))
        return self.advance()

    def name(self, what: str = "a name") -> Token:
        if self.tok.kind != "name":
            raise self.error(what)
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "number" or not self.tok.text.isdigit():
            raise self.error("an integer")
        return int(self.advance().text)

    def newline(self) -> None:
        if self.tok.kind != "nl":
            raise self.error("end of line")
        while self.tok.kind == "nl":
            self.advance()

    def skip_blank(self) -> None:
        while self.tok.kind == "nl":
            self.advance()

    # -- expressions ---------------------------------------------------------

    def expr(self) -> ast.Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.advance()
            left = ast.BinOp(t.text, left, self.term(), t.pos)
        return left

    def term(self) -> ast.Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.advance()
            left = ast.BinOp(t.text, left, self.unary(), t.pos)
        return left

    def unary(self) -> ast.Expr:
        if self.at_op("-"):
            t = self.advance()
            return ast.Neg(self.unary(), t.pos)
        return self.power()

    def power(self) -> ast.Expr:
        base = self.atom()
        if self.at_op("^"):
            t = self.advance()
            return ast.BinOp("^", base, self.unary(), t.pos)
        return base

    def atom(self) -> ast.Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return ast.Num(t.text, t.pos)
        if t.kind == "name":
            self.advance()
            if self.at_op("("):
                if t.text not in FUNCTIONS:
                    raise ModelSyntaxError(f"unknown function {t.text!r}", t.line, t.column)
                self.advance()
                arg = self.expr()
                self.op(")")
                return ast.Call(t.text, arg, t.pos)
            return ast.Name(t.text, t.pos)
        if self.at_op("("):
            self.advance()
            inner = self.expr()
            self.op(")")
            return inner
        raise self.error("an expression")

    # -- statements ----------------------------------------------------------

    def model(self) -> ast.ModelFile:
        decls = []
        self.skip_blank()
        while self.tok.kind != "eof":
            decls.append(self.declaration())
            self.skip_blank()
        return ast.ModelFile(tuple(decls))

    def declaration(self) -> ast.Decl:
        t = self.tok
        handler = {
            "const": self.const_decl,
            "param": self.param_decl,
            "transform": self.transform_decl,
            "metric": self.metric_decl,
            "chart": self.chart_decl,
            "fields": self.fields_decl,
            "product": self.product_decl,
            "hamiltonian": self.hamiltonian_decl,
            "quantize": self.quantize_decl,
        }.get(t.text if t.kind == "name" else "")
        if handler is None:
            raise self.error("a declaration keyword")
        self.advance()
        return handler(t.pos)

    def const_decl(self, pos) -> ast.ConstDecl:
        names = [self.name().text]
        while self.at_op(","):
            self.advance()
            names.append(self.name().text)
        self.newline()
        return ast.ConstDecl(tuple(names), pos)

    def param_decl(self, pos) -> ast.ParamDecl:
        name = self.name().text
        self.op("=")
        value = self.expr()
        self.newline()
        return ast.ParamDecl(name, value, pos)

    def header(self) -> tuple[str, int, tuple[str, ...]]:
        name = self.name().text
        self.word("dim")
        dim = self.integer()
        self.op("(")
        variables = [self.name("a variable").text]
        while self.at_op(","):
            self.advance()
            variables.append(self.name("a variable").text)
        self.op(")")
        self.op(":")
        self.newline()
        return name, dim, tuple(variables)

    def domain(self) -> ast.Domain:
        t = self.word("domain")
        var = self.name("a variable").text
        self.word("in")
        self.op("(")
        low = self.expr()
        self.op(",")
        high = self.expr()
        self.op(")")
        self.newline()
        return ast.Domain(var, low, high, t.pos)

    def at_end(self) -> bool:
        if self.tok.kind == "eof":
            raise self.error("'end'")
        return self.at_word("end") and self.peek().kind in ("nl", "eof")

    def close_block(self) -> None:
        self.word("end")
        self.newline()

    def at_domain(self) -> bool:
        return self.at_word("domain") and self.peek().kind == "name" and self.peek(2).text == "in"

    def transform_decl(self, pos) -> ast.TransformDecl:
        name, dim, variables = self.header()
        comps, domains = [], []
        while not self.at_end():
            if self.at_domain():
                domains.append(self.domain())
                continue
            target = self.name("a target variable").text
            self.op("=")
            comps.append((target, self.expr()))
            self.newline()
        self.close_block()
        return ast.TransformDecl(name, dim, variables, tuple(comps), tuple(domains), pos)

    def metric_decl(self, pos) -> ast.MetricDecl:
        name, dim, variables = self.header()
        entries, domains = [], []
        while not self.at_end():
            if self.at_domain():
                domains.append(self.domain())
                continue
            self.word("g")
            self.op("[")
            a = self.name("a variable").text
            self.op(",")
            b = self.name("a variable").text
            self.op("]")
            self.op("=")
            entries.append((a, b, self.expr()))
            self.newline()
        self.close_block()
        return ast.MetricDecl(name, dim, variables, tuple(entries), tuple(domains), pos)

    def chart_decl(self, pos) -> ast.ChartDecl:
        name, dim, variables = self.header()
        domains = []
        while not self.at_end():
            if not self.at_domain():
                raise self.error("'domain'")
            domains.append(self.domain())
        self.close_block()
        return ast.ChartDecl(name, dim, variables, tuple(domains), pos)

    def fields_decl(self, pos) -> ast.FieldsDecl:
        name = self.name().text
        self.word("on")
        chart = self.name("a chart name").text
        self.op(":")
        self.newline()
        pairs, comps = [], []
        while not self.at_end():
            if self.at_word("pair") and self.peek().kind == "name" and self.peek(2).kind == "name":
                self.advance()
                pairs.append((self.advance().text, self.advance().text))
                self.newline()
                continue
            fld = self.name("a field name").text
            self.op(".")
            var = self.name("a phase-space variable").text
            self.op("=")
            comps.append((fld, var, self.expr()))
            self.newline()
        self.close_block()
        return ast.FieldsDecl(name, chart, tuple(pairs), tuple(comps), pos)

    def product_decl(self, pos) -> ast.ProductDecl:
        name = self.name().text
        self.op("=")
        kt = self.name("a product kind")
        if kt.text not in PRODUCT_KINDS:
            raise ModelSyntaxError(f"unknown product kind {kt.text!r}", kt.line, kt.column)
        args = []
        if self.at_op("("):
            self.advance()
            args.append(self.expr())
            while self.at_op(","):
                self.advance()
                args.append(self.expr())
            self.op(")")
        self.word("on")
        chart = self.name("a chart name").text
        self.newline()
        return ast.ProductDecl(name, kt.text, tuple(args), chart, pos)

    def hamiltonian_decl(self, pos) -> ast.HamiltonianDecl:
        name = self.name().text
        chart = None
        if self.at_word("on"):
            self.advance()
            chart = self.name("a chart name").text
        self.op(":")
        # the body may start on the following line
        self.skip_blank()
        body = self.expr()
        self.newline()
        return ast.HamiltonianDecl(name, chart, body, pos)

    def quantize_decl(self, pos) -> ast.QuantizeDecl:
        target = self.name("a hamiltonian name").text
        self.word("with")
        mt = self.name("a quantization method")
        if mt.text not in METHODS:
            raise ModelSyntaxError(f"unknown quantization method {mt.text!r}", mt.line, mt.column)
        alpha = None
        if self.at_op("("):
            self.advance()
            alpha = self.expr()
            self.op(")")
        if (mt.text == "curved") != (alpha is not None):
            raise ModelSyntaxError("curved(alpha) is the only method taking an argument", mt.line, mt.column)
        self.newline()
        return ast.QuantizeDecl(target, mt.text, alpha, pos)


def parse(source: str) -> ast.ModelFile:
    """Parse a model file into its syntax tree."""
    return Parser(source).model()


def parse_expression(source: str) -> ast.Expr:
    """Parse a single expression, rejecting trailing input."""
    p = Parser(source)
    e = p.expr()
    if p.tok.kind not in ("nl", "eof"):
        raise p.error("end of expression")
    return e
