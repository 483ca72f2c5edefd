import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from invquant.core import residual
from invquant.dsl import ast
from invquant.dsl.model import load, to_sympy
from invquant.dsl.parser import parse, parse_expression
from invquant.dsl.presets import PRESETS, find, load_preset, preset_source
from invquant.dsl.printer import format_expr, pretty
from invquant.errors import DimensionMismatch, ModelError, ModelSyntaxError, UndeclaredName
from invquant.geometry import spherical

SPHERICAL_HEADER = """transform spherical dim 3 (r, theta, phi):
  x = r*sin(theta)*cos(phi)
  y = r*sin(theta)*sin(phi)
  z = r*cos(theta)
  domain r in (0.2, 3)
  domain theta in (0, pi)
end
"""


# -- parsing -----------------------------------------------------------------

def test_precedence_and_associativity():
    e = parse_expression("-a^2^b * c + d / e - f")
    # ((-(a^(2^b)) * c) + (d / e)) - f
    assert ast.strip_positions(e) == ast.strip_positions(parse_expression("((-(a^(2^b)))*c + (d/e)) - f"))
    assert isinstance(e, ast.BinOp) and e.op == "-"


def test_unary_minus_binds_looser_than_power():
    x = sp.Symbol("x")
    assert to_sympy(parse_expression("-x^2"), {"x": x}) == -x**2


def test_syntax_error_reports_the_offending_column():
    with pytest.raises(ModelSyntaxError) as info:
        parse_expression("x^ = ")
    assert (info.value.line, info.value.column) == (1, 4)


def test_syntax_error_line_in_a_file():
    # newlines inside parentheses are insignificant, so the error is at end of input
    src = SPHERICAL_HEADER + "hamiltonian H: (p_r^2\n"
    with pytest.raises(ModelSyntaxError) as info:
        parse(src)
    assert info.value.line == 9


def test_unknown_function_is_a_syntax_error():
    with pytest.raises(ModelSyntaxError):
        parse_expression("sinh(x)")


def test_spherical_preset_matches_library_map():
    model = load_preset("spherical")
    T = model.chart("spherical").transform
    ref = spherical()
    assert T.dim == 3
    assert all(sp.simplify(a - b) == 0 for a, b in zip(T.phi, ref.phi))


def test_hydrogen_hamiltonian_is_quadratic_in_momenta():
    model = load(SPHERICAL_HEADER + "hamiltonian H: (p_r^2 + p_theta^2/r^2 + p_phi^2/(r^2*sin(theta)^2))/(2*m) - 1/r\n")
    H = model.hamiltonian("H")
    assert H.chart.name == "spherical"
    poly = H.classical()
    assert poly.degree == 2
    r = sp.Symbol("r")
    assert poly.coefficient((0, 0, 0)) == -1 / r
    assert poly.coefficient((2, 0, 0)) == 1 / (2 * sp.Symbol("m"))


def test_undeclared_name_carries_a_position():
    with pytest.raises(UndeclaredName) as info:
        load(SPHERICAL_HEADER + "hamiltonian H on spherical: p_r^2 + q\n")
    assert info.value.line == 8
    assert info.value.column == 37


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        load("transform polar dim 3 (r, theta):\n  x = r*cos(theta)\n  y = r*sin(theta)\nend\n")


def test_transform_component_count_mismatch():
    with pytest.raises(DimensionMismatch):
        load("transform polar dim 2 (r, theta):\n  x = r*cos(theta)\nend\n")


def test_duplicate_declaration():
    src = "chart a dim 1 (x):\nend\nchart a dim 1 (y):\nend\n"
    with pytest.raises(ModelError):
        load(src)


def test_domain_must_be_ordered():
    with pytest.raises(ModelError):
        load("chart c dim 1 (x):\n  domain x in (2, 1)\nend\n")


def test_quantize_target_must_exist():
    with pytest.raises(UndeclaredName):
        load("quantize nothing with weyl\n")


def test_metric_stanza_and_curvature():
    model = load_preset("sphere2")
    chart = model.chart("sphere2")
    assert not chart.flat
    assert residual(chart.curvature.scalar, 2, chart.domain) < 1e-12


def test_preset_lookup():
    assert find("hydrogen") is load_preset("spherical")
    with pytest.raises(UndeclaredName):
        find("no_such_thing")
    with pytest.raises(UndeclaredName):
        preset_source("no_such_preset")


# -- printing ----------------------------------------------------------------

@pytest.mark.parametrize("name", PRESETS)
def test_presets_round_trip(name):
    tree = parse(preset_source(name))
    again = parse(pretty(tree))
    assert ast.strip_positions(again) == ast.strip_positions(tree)


_names = st.sampled_from(["x", "r", "theta", "p_x", "m"])
_nums = st.sampled_from(["0", "1", "2", "0.5", "3"])


def _exprs():
    leaves = st.one_of(_names.map(ast.Name), _nums.map(ast.Num))
    return st.recursive(leaves, lambda sub: st.one_of(
        sub.map(ast.Neg),
        st.tuples(st.sampled_from("+-*/^"), sub, sub).map(lambda t: ast.BinOp(*t)),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "sqrt"]), sub).map(lambda t: ast.Call(*t)),
    ), max_leaves=8)


@given(_exprs())
def test_expression_round_trip(e):
    assert ast.strip_positions(parse_expression(format_expr(e))) == ast.strip_positions(e)
