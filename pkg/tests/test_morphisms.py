import dataclasses

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LINE, PLANE, momentum_polys, plane_domain
from invquant.core import MomentumPoly, residual
from invquant.dsl import references
from invquant.errors import NotUnital, RealityViolation
from invquant.geometry import inversion, polar, spherical
from invquant.morphisms import (
    Morphism,
    PPolynomial,
    build_S_P,
    build_S_sigma,
    build_S_T,
    corpus_pairs,
    monomial_corpus,
    verify_intertwining,
)
from invquant.phase import PhaseDiffOp
from invquant.star import moyal, p_family_product, sigma_product, transformed_moyal

rationals = st.fractions(min_value=-2, max_value=2, max_denominator=6).map(sp.Rational)


def _wide(T):
    return dataclasses.replace(T.domain, eps=0.1).with_momenta(T.coords)


def _is_identity(S: Morphism, dom) -> bool:
    ident = Morphism.identity(S.coords, S.order)
    return residual(S.components(), ident.components(), dom) < 1e-10


@given(rationals, rationals, rationals)
def test_sigma_morphism_inverse(sigma, alpha, beta):
    S = build_S_sigma(PLANE, sigma, alpha, beta, 3)
    dom = plane_domain()
    assert _is_identity(S.invert().compose(S), dom)
    assert _is_identity(S.compose(S.invert()), dom)


@pytest.mark.parametrize("make", [polar, spherical, inversion])
def test_s_t_inverse(make):
    T = make()
    S = build_S_T(T.christoffel, 3)
    assert _is_identity(S.invert() @ S, _wide(T))


@pytest.mark.parametrize("make", [polar, spherical, inversion])
def test_s_t_has_only_even_hbar_terms_through_second_order(make):
    S = build_S_T(make().christoffel, 3)
    assert S.is_unital()
    assert S.ops[1].is_zero()
    assert S.ops[3].is_zero()
    assert not S.ops[2].is_zero()


@given(rationals, rationals, rationals, st.integers(0, 1), st.integers(0, 1))
def test_sigma_morphism_fixes_canonical_coordinates(sigma, alpha, beta, kind, slot):
    S = build_S_sigma(PLANE, sigma, alpha, beta, 3)
    f = MomentumPoly.position(PLANE, slot) if kind == 0 else MomentumPoly.momentum(PLANE, slot)
    image = S.apply(f)
    assert image[0] == f
    assert all(image[h].is_zero() for h in range(1, 4))


@pytest.mark.parametrize("make", [polar, spherical])
def test_s_t_fixes_coordinates_and_momenta(make):
    T = make()
    S = build_S_T(T.christoffel, 3)
    for i in range(T.dim):
        for f in (MomentumPoly.position(T.coords, i), MomentumPoly.momentum(T.coords, i)):
            image = S.apply(f)
            assert image[0] == f
            assert all(image[h].is_zero() for h in range(1, 4))


def test_example1_morphism_is_the_inversion_s_t():
    T = inversion()
    S = build_S_T(T.christoffel, 2)
    assert residual(S.components(), references.example1_morphism(2).components(), _wide(T)) < 1e-12


def test_sigma_intertwining_on_small_corpus():
    sigma, alpha, beta = sp.Rational(1, 4), sp.Rational(1, 3), -sp.Rational(1, 2)
    corpus = corpus_pairs(monomial_corpus(LINE, 2, (1, LINE[0])))
    rep = verify_intertwining(build_S_sigma(LINE, sigma, alpha, beta, 2), moyal(LINE, 2),
                              sigma_product(LINE, sigma, alpha, beta, 2), corpus, 2, plane_domain(LINE))
    assert rep["max_residual"] < 1e-10


def test_wrong_morphism_fails_intertwining():
    sigma, alpha, beta = sp.Rational(1, 4), sp.Rational(1, 3), -sp.Rational(1, 2)
    corpus = corpus_pairs(monomial_corpus(LINE, 2, (1, LINE[0])))
    rep = verify_intertwining(build_S_sigma(LINE, sigma, alpha, beta + 1, 2), moyal(LINE, 2),
                              sigma_product(LINE, sigma, alpha, beta, 2), corpus, 2, plane_domain(LINE))
    assert rep["max_residual"] > 1e-3


def test_polar_intertwining_on_small_corpus():
    T = polar()
    corpus = corpus_pairs(monomial_corpus(T.coords, 2, (1, T.coords[0])))
    rep = verify_intertwining(build_S_T(T.christoffel, 2), moyal(T.coords, 2), transformed_moyal(T, 2), corpus, 2,
                              _wide(T))
    assert rep["max_residual"] < 1e-8


def test_p_family_intertwining():
    P = PPolynomial.minimal(1)
    corpus = corpus_pairs(monomial_corpus(LINE, 2, (1, LINE[0])))
    rep = verify_intertwining(build_S_P(LINE, P, 2), moyal(LINE, 2), p_family_product(LINE, P, 2), corpus, 2,
                              plane_domain(LINE))
    assert rep["max_residual"] < 1e-10


@settings(max_examples=10)
@given(momentum_polys(LINE, degree=2), momentum_polys(LINE, degree=2))
def test_p_family_intertwines_random_pairs(f, g):
    P = PPolynomial.minimal(1)
    S = build_S_P(LINE, P, 2)
    lhs = S.apply(moyal(LINE, 2).star(f, g))
    rhs = p_family_product(LINE, P, 2).star(S.apply(f), S.apply(g))
    assert residual(lhs, rhs, plane_domain(LINE)) < 1e-9


def test_non_real_p_is_rejected():
    P = PPolynomial(1, {(2, (2, 0)): sp.I})
    with pytest.raises(RealityViolation):
        build_S_P(LINE, P)


def test_inverting_a_non_unital_series_fails():
    S = Morphism(LINE, [PhaseDiffOp.identity(LINE).scale(2)], 2)
    with pytest.raises(NotUnital):
        S.invert()
