"""Closed forms that the paper-examples suite reproduces.

Each function returns the expected object written out by hand, independent
of the construction that the suite compares it against.
"""

from __future__ import annotations

import sympy as sp

from ..core import HBAR, MomentumPoly
from ..morphisms import Morphism
from ..phase import PhaseDiffOp
from ..quantize import ConfigOperator

r, theta, phi, x = sp.symbols("r theta phi x")
p_r, p_theta, p_phi, p_x = sp.symbols("p_r p_theta p_phi p_x")
SPHERICAL = (r, theta, phi)


def _op(coords, entries) -> PhaseDiffOp:
    """``entries``: ``(coefficient, {slot name: power})`` with slots ``x.. then p_x..``."""
    slots = [c.name for c in coords] + [f"p_{c.name}" for c in coords]
    items = []
    for coeff, powers in entries:
        mu = tuple(powers.get(s, 0) for s in slots)
        items.append((mu, MomentumPoly.from_expr(coeff, coords)))
    return PhaseDiffOp.from_terms(coords, items)


def spherical_s_t_hbar2() -> PhaseDiffOp:
    """The hbar^2 part of ``S_T`` for spherical coordinates.

    The term ``p_phi d_{p_r}^2 d_{p_phi} / r^2`` is printed in the source
    display with ``d_r^2`` in place of ``d_{p_r}^2``; that reading would make
    the operator inhomogeneous in momenta and is corrected here.
    """
    s, c, t = sp.sin(theta), sp.cos(theta), sp.tan(theta)
    entries = [
        (1 / r**2, {"p_r": 2}),
        (1 / (2 * t**2) - 1, {"p_theta": 2}),
        (-1, {"p_phi": 2}),
        (1 / (r * t), {"p_r": 1, "p_theta": 1}),
        (p_theta / r**2, {"p_r": 2, "p_theta": 1}),
        (-p_r / 2, {"p_r": 1, "p_theta": 2}),
        (2 * p_phi / (r * t), {"p_r": 1, "p_theta": 1, "p_phi": 1}),
        (-(p_r * s**2 / 2 + p_theta * s * c / r), {"p_r": 1, "p_phi": 2}),
        (-p_theta / 3, {"p_theta": 3}),
        (p_phi / t**2, {"p_theta": 2, "p_phi": 1}),
        (-p_theta / 2, {"p_theta": 1, "p_phi": 2}),
        (-p_phi / 3, {"p_phi": 3}),
        (p_phi / r**2, {"p_r": 2, "p_phi": 1}),
        (-r / 2, {"r": 1, "p_theta": 2}),
        (-r * s**2 / 2, {"r": 1, "p_phi": 2}),
        (1 / r, {"theta": 1, "p_r": 1, "p_theta": 1}),
        (-s * c / 2, {"theta": 1, "p_phi": 2}),
        (1 / r, {"phi": 1, "p_r": 1, "p_phi": 1}),
        (1 / t, {"phi": 1, "p_theta": 1, "p_phi": 1}),
    ]
    return _op(SPHERICAL, entries).scale(sp.Rational(1, 4))


def example1_morphism(order: int = 2) -> Morphism:
    """``id + (hbar^2/4)(2 x^-2 d_p^2 + x^-2 p d_p^3 - x^-1 d_x d_p^2)`` on the line."""
    coords = (x,)
    h2 = _op(coords, [
        (2 / x**2, {"p_x": 2}),
        (p_x / x**2, {"p_x": 3}),
        (-1 / x, {"x": 1, "p_x": 2}),
    ]).scale(sp.Rational(1, 4))
    return Morphism(coords, [PhaseDiffOp.identity(coords), PhaseDiffOp.zero(coords), h2], order, "S_example1")


def example1_fields():
    """Pairs ``(X, Y)`` and ``(X', Y')`` decomposing the same Poisson tensor."""
    from ..phase import PhaseVectorField

    coords = (x,)
    X = PhaseVectorField(coords, [1], [0])
    Y = PhaseVectorField(coords, [0], [1])
    Xt = PhaseVectorField(coords, [x**2], [-2 * x * p_x])
    Yt = PhaseVectorField(coords, [0], [x**-2])
    return (X, Y), (Xt, Yt)


def spherical_momentum_operators() -> list[ConfigOperator]:
    """``-i hbar (d_r + 1/r)``, ``-i hbar (d_theta + 1/(2 tan theta))``, ``-i hbar d_phi``."""
    def op(j, shift):
        alpha = tuple(int(i == j) for i in range(3))
        return ConfigOperator(SPHERICAL, {(1, alpha): -sp.I, (1, (0, 0, 0)): -sp.I * shift})

    return [op(0, 1 / r), op(1, 1 / (2 * sp.tan(theta))), op(2, 0)]


def hydrogen_hamiltonian() -> sp.Expr:
    m, e, eps0 = sp.symbols("m e eps0")
    return (p_r**2 + p_theta**2 / r**2 + p_phi**2 / (r**2 * sp.sin(theta) ** 2)) / (2 * m) - e**2 / (4 * sp.pi * eps0 * r)


def hydrogen_intermediate() -> sp.Expr:
    """``S_T^-1 H'`` with its hbar^2 correction, hbar kept as a symbol."""
    m = sp.Symbol("m")
    return hydrogen_hamiltonian() - HBAR**2 / (8 * m * r**2) * (1 / sp.sin(theta) ** 2 + 1)


def hydrogen_operator() -> ConfigOperator:
    """``-(hbar^2/2m)`` times the spherical Laplacian, minus the Coulomb term."""
    m, e, eps0 = sp.symbols("m e eps0")
    lap = {
        (0, (2, 0, 0)): 1,
        (0, (1, 0, 0)): 2 / r,
        (0, (0, 2, 0)): 1 / r**2,
        (0, (0, 1, 0)): 1 / (r**2 * sp.tan(theta)),
        (0, (0, 0, 2)): 1 / (r**2 * sp.sin(theta) ** 2),
    }
    kinetic = ConfigOperator(SPHERICAL, lap).scale(-1 / (2 * m), 2)
    return kinetic + ConfigOperator.multiplication(SPHERICAL, -e**2 / (4 * sp.pi * eps0 * r))


def example22_observable(sigma, beta) -> sp.Expr:
    """``x p^2 + hbar beta x - 2 i hbar sigma p``."""
    return x * p_x**2 + HBAR * beta * x - 2 * sp.I * HBAR * sigma * p_x
