import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import LINE, PLANE, X, Y, momentum_polys, plane_domain, scalars
from invquant.core import (
    HBAR,
    MomentumPoly,
    PhaseFunction,
    SampleDomain,
    canon,
    conjugate,
    differentiate,
    equals_numeric,
    evaluate,
    poisson_bracket,
    residual,
)
from invquant.errors import DivisionByZero, DomainExhausted, NonPolynomialMomenta, TruncationMismatch

PX, PY = sp.symbols("p_x p_y")


# -- scalars -----------------------------------------------------------------

@given(scalars(), scalars())
def test_leibniz_rule(f, g):
    lhs = differentiate(f * g, X)
    rhs = differentiate(f, X) * g + f * differentiate(g, X)
    assert residual(lhs, rhs, plane_domain()) < 1e-12


@given(scalars())
def test_mixed_partials_commute(f):
    assert canon(differentiate(differentiate(f, X), Y) - differentiate(differentiate(f, Y), X)) == 0


@given(scalars())
def test_canon_is_idempotent(f):
    assert canon(canon(f)) == canon(f)


def test_conjugate_flips_only_the_imaginary_unit():
    assert conjugate(X + 2 * sp.I * Y) == X - 2 * sp.I * Y
    assert conjugate(sp.exp(sp.I * X)) == sp.exp(-sp.I * X)


def test_evaluate_rejects_singular_points():
    assert evaluate(1 / X, {"x": 2.0}) == pytest.approx(0.5)
    with pytest.raises(DivisionByZero):
        evaluate(1 / X, {"x": 0.0})


def test_named_constants_default_to_one():
    m = sp.Symbol("m")
    assert evaluate(m * X, {X: 3}) == pytest.approx(3)


# -- sampling oracle ---------------------------------------------------------

def test_sampling_is_a_function_of_the_seed():
    dom = SampleDomain({X: (-1.0, 1.0), Y: (0.0, 1.0)}, seed=5)
    a, b = dom.sample([1 / X]), dom.sample([1 / X])
    assert np.array_equal(a[X], b[X])
    c = dom.reseeded(6).sample([1 / X])
    assert not np.array_equal(a[X], c[X])


def test_sample_points_avoid_singular_factors():
    dom = SampleDomain({X: (-1.0, 1.0)}, eps=0.2)
    pts = dom.sample([1 / sp.sin(X)])
    assert np.all(np.abs(np.sin(pts[X])) >= 0.2)


def test_adding_a_variable_keeps_existing_streams():
    one = SampleDomain({X: (0.0, 1.0)}).sample([X])[X]
    two = SampleDomain({X: (0.0, 1.0), Y: (0.0, 1.0)}).sample([X])[X]
    assert np.array_equal(one, two)


def test_exhausted_domain_raises():
    dom = SampleDomain({X: (-1e-4, 1e-4)}, eps=1.0, max_batches=2)
    with pytest.raises(DomainExhausted):
        dom.sample([1 / X])


def test_equals_numeric_separates_identities_from_near_misses():
    dom = plane_domain()
    assert equals_numeric(sp.sin(X) ** 2 + sp.cos(X) ** 2, 1, dom)
    assert not equals_numeric(sp.sin(X) ** 2 + sp.cos(X) ** 2, 1 + 1e-6, dom)


def test_residual_is_coefficientwise():
    a = MomentumPoly(PLANE, {(1, 0): X, (0, 1): Y})
    b = MomentumPoly(PLANE, {(1, 0): X, (0, 1): Y + 1})
    # scale 1 + max(|y|, |y + 1|) keeps the residual below 1
    assert 0.3 < residual(a, b, plane_domain()) < 1.0


# -- momentum polynomials ----------------------------------------------------

def test_from_expr_collects_momentum_monomials():
    p = MomentumPoly.from_expr(PX**2 * X + 3 + PX * PY * sp.sin(Y), PLANE)
    assert p.terms == {(2, 0): X, (0, 0): 3, (1, 1): sp.sin(Y)}
    assert p.degree == 2


def test_from_expr_rejects_non_polynomial_momenta():
    with pytest.raises(NonPolynomialMomenta):
        MomentumPoly.from_expr(1 / PX, LINE)


@given(momentum_polys(), momentum_polys())
def test_product_is_commutative(f, g):
    assert residual(f * g, g * f, plane_domain()) < 1e-12


@given(momentum_polys(degree=2), momentum_polys(degree=2))
def test_momentum_derivative_is_a_derivation(f, g):
    lhs = (f * g).diff_p(0)
    rhs = f.diff_p(0) * g + f * g.diff_p(0)
    assert residual(lhs, rhs, plane_domain()) < 1e-12


def test_canonical_bracket():
    x, p = MomentumPoly.position(LINE, 0), MomentumPoly.momentum(LINE, 0)
    assert poisson_bracket(x, p) == MomentumPoly.constant(LINE, 1)


@given(momentum_polys(degree=2), momentum_polys(degree=2), momentum_polys(degree=2))
def test_poisson_bracket_satisfies_jacobi(f, g, h):
    jac = (poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f))
           + poisson_bracket(h, poisson_bracket(f, g)))
    assert residual(jac, 0, plane_domain()) < 1e-10


# -- hbar series -------------------------------------------------------------

def test_series_product_truncates():
    a = PhaseFunction.from_expr(X + HBAR, LINE, 1)
    sq = a * a
    assert sq.order == 1
    assert [c.to_expr() for c in sq.coeffs] == [X**2, 2 * X]


def test_series_orders_must_match():
    with pytest.raises(TruncationMismatch):
        PhaseFunction.lift(X, LINE, 1) + PhaseFunction.lift(X, LINE, 2)


def test_hbar_must_enter_polynomially():
    with pytest.raises(NonPolynomialMomenta):
        PhaseFunction.from_expr(1 / HBAR, LINE, 2)


@given(st.integers(0, 3), st.integers(0, 3))
def test_shift_moves_coefficients(k, order):
    f = PhaseFunction.lift(X, LINE, order)
    shifted = f.shift(k)
    assert shifted.order == order
    assert shifted.is_zero() == (k > order)
