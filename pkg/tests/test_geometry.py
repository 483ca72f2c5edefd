import dataclasses
import itertools

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from invquant.core import MomentumPoly, SampleDomain, residual
from invquant.errors import RankMismatch, SingularJacobian, SingularMetric
from invquant.geometry import (
    ChristoffelField,
    MetricField,
    PointTransformation,
    christoffel_from_metric,
    contract,
    covariant_derivative,
    curvature,
    inversion,
    parabolic,
    polar,
    random_symmetric_tensor,
    spherical,
    unit_sphere_metric,
)

r, th, ph = sp.symbols("r theta phi")


def _wide(dom: SampleDomain) -> SampleDomain:
    return dataclasses.replace(dom, eps=0.1)


def _levi_civita(coords, g):
    """Independent oracle: textbook Christoffel formula on a sympy Matrix."""
    G = sp.Matrix(g)
    Gi = G.inv()
    n = len(coords)
    out = {}
    for i, j, k in itertools.product(range(n), repeat=3):
        out[i, j, k] = sp.Rational(1, 2) * sum(
            Gi[i, l] * (sp.diff(G[l, j], coords[k]) + sp.diff(G[l, k], coords[j]) - sp.diff(G[j, k], coords[l]))
            for l in range(n))
    return out


# frozen from the independent oracle above (simplified by hand)
POLAR_GAMMA = {(0, 1, 1): -r, (1, 0, 1): 1 / r, (1, 1, 0): 1 / r}
SPHERICAL_GAMMA = {
    (0, 1, 1): -r, (0, 2, 2): -r * sp.sin(th) ** 2,
    (1, 0, 1): 1 / r, (1, 1, 0): 1 / r, (1, 2, 2): -sp.sin(th) * sp.cos(th),
    (2, 0, 2): 1 / r, (2, 2, 0): 1 / r, (2, 1, 2): sp.cos(th) / sp.sin(th), (2, 2, 1): sp.cos(th) / sp.sin(th),
}


@pytest.mark.parametrize("T, frozen", [(polar(), POLAR_GAMMA), (spherical(), SPHERICAL_GAMMA)])
def test_transformation_christoffels_match_frozen_values(T, frozen):
    got = T.christoffel.components()
    expected = {k: frozen.get(k, 0) for k in got}
    assert residual(got, expected, _wide(T.domain)) < 1e-12


@pytest.mark.parametrize("T", [polar(), spherical(), parabolic(), inversion()])
def test_transformation_route_matches_textbook_levi_civita(T):
    oracle = _levi_civita(T.coords, T.metric.g.tolist())
    assert residual(T.christoffel.components(), oracle, _wide(T.domain)) < 1e-9


def test_polar_pullback_metric():
    g = polar().metric
    assert sp.simplify(g.g[0, 0]) == 1
    assert sp.simplify(g.g[1, 1] - r**2) == 0
    assert g.g[0, 1] == 0


def test_sphere_curvature_scalar_is_two():
    g = unit_sphere_metric()
    R = curvature(christoffel_from_metric(g), g).scalar
    assert residual(R, 2, _wide(g.domain)) < 1e-12


@pytest.mark.parametrize("T", [polar(), spherical(), parabolic(), inversion()])
def test_transformation_connections_are_flat(T):
    curv = curvature(T.christoffel, T.metric)
    assert residual(curv.riemann, {}, _wide(T.domain)) < 1e-9


@pytest.mark.parametrize("T", [polar(), spherical(), parabolic()])
def test_connection_is_torsion_free(T):
    assert T.christoffel.is_torsion_free()


@pytest.mark.parametrize("T", [polar(), spherical()])
def test_metric_is_covariantly_constant(T):
    g_low = T.metric.as_tensor(contravariant=False)
    g_up = T.metric.as_tensor(contravariant=True)
    gamma = T.christoffel
    dom = _wide(T.domain)
    assert residual(covariant_derivative(g_low, gamma).components(), {}, dom) < 1e-9
    assert residual(covariant_derivative(g_up, gamma).components(), {}, dom) < 1e-9


@pytest.mark.parametrize("T", [polar(), spherical(), parabolic()])
def test_contracted_christoffel_is_log_density_gradient(T):
    g, gamma = T.metric, T.christoffel
    lhs = {j: gamma.contracted(j) for j in range(T.dim)}
    rhs = {j: g.log_density_gradient(j) for j in range(T.dim)}
    assert residual(lhs, rhs, _wide(T.domain)) < 1e-9


def test_point_transformation_is_canonical():
    T = polar()
    table = T.bracket_table()
    for key, value in table.items():
        expected = 1 if key[0] == "Q" and key[2] == "P" and key[1] == key[3] else 0
        target = MomentumPoly.constant(T.coords, expected)
        assert residual(value, target, _wide(T.domain).with_momenta(T.coords)) < 1e-12, key


def test_inversion_momentum_map():
    T = inversion()
    (x,) = T.coords
    (p,) = T.momentum_map
    assert sp.simplify(p.to_expr() - x**2 * sp.Symbol("p_x")) == 0


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_random_tensors_are_symmetric(seed, rank):
    K = random_symmetric_tensor((r, th), rank, seed)
    assert K.is_symmetric()


@given(st.integers(0, 10_000))
def test_covariant_derivative_commutes_with_contraction(seed):
    T = polar()
    K = random_symmetric_tensor(T.coords, 2, seed)
    g_low = T.metric.as_tensor(contravariant=False)
    n = T.dim
    # K^i_j = K^{ik} g_{kj}; trace then differentiate == differentiate then trace
    mixed = dataclasses.replace(K, comps=np.array(
        [[sum(K[i, k] * g_low[k, j] for k in range(n)) for j in range(n)] for i in range(n)], dtype=object),
        up=1, down=1)
    a = covariant_derivative(contract(mixed, 0, 0), T.christoffel)
    b = contract(covariant_derivative(mixed, T.christoffel), 0, 0)
    assert residual(a.components(), b.components(), _wide(T.domain)) < 1e-9


def test_singular_jacobian_is_rejected():
    x, y = sp.symbols("x y")
    with pytest.raises(SingularJacobian):
        PointTransformation("bad", (x, y), sp.symbols("u v"), (x + y, 2 * x + 2 * y),
                            SampleDomain({x: (0.0, 1.0), y: (0.0, 1.0)}))


def test_jacobian_degenerate_on_domain_is_rejected():
    (x,) = sp.symbols("x", seq=True)
    with pytest.raises(SingularJacobian):
        PointTransformation("cube", (x,), (sp.Symbol("u"),), (x**3,), SampleDomain({x: (-1.0, 1.0)}))


def test_metric_validation():
    x, y = sp.symbols("x y")
    with pytest.raises(SingularMetric):
        MetricField.from_rows((x, y), [[1, x], [0, 1]])
    with pytest.raises(SingularMetric):
        MetricField.from_rows((x, y), [[1, 1], [1, 1]])


def test_flat_christoffels_vanish():
    assert all(v == 0 for v in ChristoffelField.flat(sp.symbols("x y z")).components().values())


def test_rank_mismatch():
    T = polar()
    with pytest.raises(RankMismatch):
        contract(T.metric.as_tensor(), 0, 1)
