"""Model-file language and command-line front end."""

from .model import Model, build, load
from .parser import parse, parse_expression
from .printer import pretty

__all__ = ["Model", "build", "load", "parse", "parse_expression", "pretty"]
