"""The computations behind each CLI command, independent of output format."""

from __future__ import annotations

import itertools

import sympy as sp

from ..core import DEFAULT_ORDER, MomentumPoly
from ..errors import ModelError
from ..geometry import ChristoffelField
from ..morphisms import Morphism, build_S_curved, build_S_T
from ..quantize import (
    ConfigOperator,
    minimal_quantize_cubic,
    minimal_quantize_quadratic,
    momentum_operators,
    momentum_tensor,
    quantize_cubic_covariant,
    quantize_cubic_curved,
    quantize_quadratic_covariant,
    quantize_quadratic_curved,
    s_order,
    weyl_order,
)
from ..star import StarProduct
from .model import Chart, Hamiltonian, Model


def christoffel_table(gamma: ChristoffelField) -> list[tuple[int, int, int, sp.Expr]]:
    """Nonzero ``Gamma^i_{jk}`` with ``j <= k``, simplified."""
    n = gamma.dim
    rows = []
    for i, j, k in itertools.product(range(n), repeat=3):
        if j > k:
            continue
        c = sp.simplify(gamma.gamma[i, j, k])
        if c != 0:
            rows.append((i, j, k, c))
    return rows


def star_product(model: Model, name: str, order: int) -> StarProduct:
    return model.product(name, order)


def morphism(model: Model, name: str, curved: bool = False, alpha=None, order: int = DEFAULT_ORDER) -> Morphism:
    chart = model.chart(name)
    if curved or not chart.flat:
        a = sp.S.Zero if alpha is None else sp.sympify(alpha)
        return build_S_curved(chart.gamma, chart.curvature, a, order)
    if alpha is not None:
        raise ModelError("--alpha only applies together with --curved")
    return build_S_T(chart.gamma, order)


def split_hamiltonian(ham: Hamiltonian, coords) -> tuple:
    """``(K2, V, K3)`` with ``H = K2 pp / 2 + V + K3 ppp``; other shapes are rejected."""
    series = ham.series(coords)
    if any(not c.is_zero() for c in series.coeffs[1:]):
        raise ModelError(f"hamiltonian {ham.name!r} carries hbar corrections; covariant forms need classical data",
                         ham.pos.line, ham.pos.column)
    A = series.coeffs[0]
    degrees = {sum(k) for k in A.terms}
    if degrees - {0, 2, 3}:
        raise ModelError(f"hamiltonian {ham.name!r} has momentum degrees {sorted(degrees)}; "
                         "covariant forms exist for degrees 0, 2 and 3", ham.pos.line, ham.pos.column)
    K2 = momentum_tensor(A.homogeneous(2) * 2, 2) if 2 in degrees else None
    K3 = momentum_tensor(A.homogeneous(3), 3) if 3 in degrees else None
    V = A.homogeneous(0).coefficient((0,) * A.dim)
    return K2, V, K3


def _assemble(parts: list[ConfigOperator], coords) -> ConfigOperator:
    out = ConfigOperator.zero(coords)
    for p in parts:
        out = out + p
    return out


def quantize(model: Model, ham_name: str, method: str, alpha=None, transform: str | None = None,
             order: int = DEFAULT_ORDER) -> ConfigOperator:
    ham = model.hamiltonian(ham_name)
    chart: Chart = model.chart(transform) if transform else ham.chart
    if tuple(c.name for c in chart.coords) != tuple(c.name for c in ham.chart.coords):
        raise ModelError(f"{chart.name!r} does not use the variables of hamiltonian {ham_name!r}")
    coords, gamma = chart.coords, chart.gamma
    if method == "weyl":
        return weyl_order(ham.series(coords, order), momentum_operators(gamma))
    if method == "s_order":
        if not chart.flat:
            raise ModelError(f"{chart.name!r} is curved; use curved(alpha)")
        return s_order(ham.series(coords, order), build_S_T(gamma, order), momentum_operators(gamma))
    K2, V, K3 = split_hamiltonian(ham, coords)
    parts: list[ConfigOperator] = []
    if method == "covariant":
        if K2 is not None or V != 0:
            parts.append(quantize_quadratic_covariant(K2 if K2 is not None else _zero_k(coords, 2), V, gamma))
        if K3 is not None:
            parts.append(quantize_cubic_covariant(K3, gamma))
    elif method == "curved":
        if alpha is None:
            raise ModelError("curved quantization needs alpha")
        g = chart.metric
        if K2 is not None or V != 0:
            parts.append(quantize_quadratic_curved(K2 if K2 is not None else _zero_k(coords, 2), V, g, alpha,
                                                   gamma, chart.curvature))
        if K3 is not None:
            parts.append(quantize_cubic_curved(K3, g, alpha, gamma, chart.curvature))
    elif method == "minimal":
        if K2 is not None or V != 0:
            parts.append(minimal_quantize_quadratic(K2 if K2 is not None else _zero_k(coords, 2), V, gamma))
        if K3 is not None:
            parts.append(minimal_quantize_cubic(K3, gamma))
    else:
        raise ModelError(f"unknown quantization method {method!r}")
    return _assemble(parts, coords)


def _zero_k(coords, rank: int):
    return momentum_tensor(MomentumPoly.zero(coords), rank)
