"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class InvQuantError(Exception):
    """Base class for all errors raised by invquant."""


class DivisionByZero(InvQuantError, ZeroDivisionError):
    """A denominator is (numerically) zero at an evaluation point."""


class UnboundVariable(InvQuantError, KeyError):
    """An expression contains a symbol with no value at the evaluation point."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class DomainExhausted(InvQuantError):
    """Rejection sampling could not find enough admissible points."""


class TruncationMismatch(InvQuantError, ValueError):
    """Two hbar-series with different truncation orders (or charts) were combined."""


class NonPolynomialMomenta(InvQuantError, ValueError):
    """An expression is not polynomial in the momenta."""


class SingularJacobian(InvQuantError, ValueError):
    pass


class SingularMetric(InvQuantError, ValueError):
    pass


class RankMismatch(InvQuantError, ValueError):
    pass


class NonCommutingFields(InvQuantError, ValueError):
    pass


class WrongPoissonTensor(InvQuantError, ValueError):
    pass


class RealityViolation(InvQuantError, ValueError):
    pass


class NotUnital(InvQuantError, ValueError):
    """A morphism whose hbar^0 part is not the identity cannot be inverted."""


class ModelError(InvQuantError):
    """Error in a model file, carrying the source span it refers to."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ModelSyntaxError(ModelError):
    pass


class UndeclaredName(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass
