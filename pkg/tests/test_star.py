import dataclasses

import pytest
import sympy as sp
from hypothesis import given, settings

from conftest import LINE, PLANE, X, momentum_polys, plane_domain
from invquant.core import MomentumPoly, PhaseFunction, poisson_bracket, residual
from invquant.errors import NonCommutingFields, WrongPoissonTensor
from invquant.geometry import polar
from invquant.phase import PhaseVectorField
from invquant.star import (
    check_vector_fields,
    moyal,
    quantum_bracket,
    sigma_product,
    star_from_vectorfields,
    transformed_moyal,
)

PX = sp.Symbol("p_x")
LINE_DOM = plane_domain(LINE)


def _poly(expr, coords=LINE):
    return MomentumPoly.from_expr(expr, coords)


def _series(*coeffs, coords=LINE):
    return PhaseFunction(coords, [_poly(c, coords) for c in coeffs], len(coeffs) - 1)


def test_moyal_on_canonical_pair():
    M = moyal(LINE, 2)
    assert M.star(_poly(X), _poly(PX)) == _series(X * PX, sp.I / 2, 0)
    assert M.star(_poly(PX), _poly(X)) == _series(X * PX, -sp.I / 2, 0)


def test_moyal_second_order_term():
    # x^2 * p^2 = x^2 p^2 + 2 i hbar x p - hbar^2 / 2
    M = moyal(LINE, 2)
    assert residual(M.star(_poly(X**2), _poly(PX**2)), _series(X**2 * PX**2, 2 * sp.I * X * PX, -sp.Rational(1, 2)),
                    LINE_DOM) == 0.0


@given(momentum_polys(), momentum_polys())
def test_classical_limit_is_pointwise_product(f, g):
    prod = moyal(PLANE, 2).star(f, g)
    assert residual(prod[0], f * g, plane_domain()) < 1e-12


@given(momentum_polys())
def test_one_is_a_unit(f):
    M = moyal(PLANE, 2)
    one = MomentumPoly.constant(PLANE, 1)
    dom = plane_domain()
    assert residual(M.star(one, f), M.lift(f), dom) < 1e-12
    assert residual(M.star(f, one), M.lift(f), dom) < 1e-12


@given(momentum_polys(degree=2), momentum_polys(degree=2))
def test_first_order_commutator_is_poisson_bracket(f, g):
    qb = quantum_bracket(moyal(PLANE, 2), f, g)
    assert residual(qb[0], poisson_bracket(f, g), plane_domain()) < 1e-10


@given(momentum_polys(degree=2), momentum_polys(degree=2), momentum_polys(degree=2))
def test_moyal_is_associative(f, g, h):
    M = moyal(PLANE, 2)
    assert residual(M.star(M.star(f, g), h), M.star(f, M.star(g, h)), plane_domain()) < 1e-9


@given(momentum_polys(complex_coeffs=True), momentum_polys(complex_coeffs=True))
def test_moyal_conjugation_is_an_involution(f, g):
    M = moyal(PLANE, 2)
    lhs = M.star(f, g).conjugate()
    rhs = M.star(g.conjugate(), f.conjugate())
    assert residual(lhs, rhs, plane_domain()) < 1e-10


@settings(max_examples=5)
@given(momentum_polys(LINE, degree=2), momentum_polys(LINE, degree=2), momentum_polys(LINE, degree=2))
def test_sigma_product_is_associative(f, g, h):
    S = sigma_product(LINE, sp.Rational(1, 4), sp.Rational(1, 3), -sp.Rational(1, 2), 2)
    assert residual(S.star(S.star(f, g), h), S.star(f, S.star(g, h)), LINE_DOM) < 1e-9


def test_zero_parameters_recover_moyal():
    S = sigma_product(PLANE, 0, 0, 0, 2)
    assert S.table == moyal(PLANE, 2).table


@settings(max_examples=5)
@given(momentum_polys(degree=2), momentum_polys(degree=2), momentum_polys(degree=2))
def test_transformed_moyal_is_associative(f, g, h):
    T = polar()
    coords = T.coords
    f, g, h = (MomentumPoly(coords, {k: v.subs({X: coords[0], sp.Symbol("y"): coords[1]}) for k, v in p.terms.items()})
               for p in (f, g, h))
    P = transformed_moyal(T, 2)
    dom = dataclasses.replace(T.domain, eps=0.1).with_momenta(coords)
    assert residual(P.star(P.star(f, g), h), P.star(f, P.star(g, h)), dom) < 1e-8


def test_transformed_moyal_fields_pass_the_decomposition_check():
    T = polar()
    P = transformed_moyal(T, 1)
    n = T.dim
    check_vector_fields(P.fields[:n], P.fields[n:], T.domain)


def test_non_commuting_fields_are_rejected():
    zero, one = MomentumPoly.zero(LINE), MomentumPoly.constant(LINE, 1)
    Xf = PhaseVectorField(LINE, [one], [MomentumPoly.momentum(LINE, 0)])
    Yf = PhaseVectorField(LINE, [zero], [one])
    with pytest.raises(NonCommutingFields):
        star_from_vectorfields([Xf], [Yf], 1, LINE_DOM)


def test_wrong_poisson_tensor_is_rejected():
    zero, two = MomentumPoly.zero(LINE), MomentumPoly.constant(LINE, 2)
    Xf = PhaseVectorField(LINE, [two], [zero])
    Yf = PhaseVectorField(LINE, [zero], [MomentumPoly.constant(LINE, 1)])
    with pytest.raises(WrongPoissonTensor):
        star_from_vectorfields([Xf], [Yf], 1, LINE_DOM)
