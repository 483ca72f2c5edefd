"""Verification suites run by ``invquant verify``.

A suite is a list of checks, each a residual compared with a tolerance.  All
randomness (sample points, random tensors, random observables) is derived from
the suite seed, so a report is a pure function of ``(suite, seed)``.
"""

from __future__ import annotations

import dataclasses
import itertools
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np
import sympy as sp

from ..core import HBAR, MomentumPoly, PhaseFunction, SampleDomain, canon, residual
from ..geometry import ChristoffelField, christoffel_from_metric, curvature, random_symmetric_tensor
from ..morphisms import (
    Morphism,
    build_S_sigma,
    build_S_T,
    corpus_pairs,
    monomial_corpus,
    verify_intertwining,
)
from ..quantize import (
    ConfigOperator,
    formal_adjoint,
    hamiltonian,
    minimal_observable_map,
    minimal_quantize_cubic,
    minimal_quantize_quadratic,
    momentum_operators,
    quantize_cubic_covariant,
    quantize_quadratic_covariant,
    quantize_quadratic_curved,
    s_order,
    weyl_exponential,
    weyl_order,
)
from ..star import moyal, sigma_product, star_from_vectorfields, transformed_moyal
from . import references
from .commands import quantize
from .presets import load_preset

TOL_EXACT = 1e-9
TOL_SERIES = 1e-8
BOUND = {"m": 1.7, "e": 0.9, "eps0": 0.3}


@dataclass(frozen=True)
class Check:
    id: str
    residual: float
    tolerance: float
    hbar_order: int | None = None

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.tolerance

    def to_json(self) -> dict:
        return {"id": self.id, "hbar_order": self.hbar_order, "residual": float(f"{self.residual:.6e}"),
                "tolerance": self.tolerance, "pass": self.passed}


@dataclass(frozen=True)
class Report:
    suite: str
    seed: int
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"kind": "report", "suite": self.suite, "seed": self.seed, "passed": self.passed,
                "checks": [c.to_json() for c in self.checks]}


def _transform(name: str):
    return load_preset(name).chart(name).transform


def _chart(preset: str, name: str | None = None):
    return load_preset(preset).chart(name or preset)


#: Samples keep every singular factor at least this far from zero: near the
#: singular set float64 cancellation costs several digits per inverse power.
MARGIN = 0.1


def _domain(dom: SampleDomain, seed: int, coords=()) -> SampleDomain:
    return dataclasses.replace(dom, eps=max(dom.eps, MARGIN)).reseeded(seed).with_momenta(coords)


# ---------------------------------------------------------------------------
# geometry

def christoffel_checks(seed: int) -> list[Check]:
    out = []
    for name in ("polar", "spherical", "parabolic"):
        T = _transform(name)
        r = residual(T.christoffel, christoffel_from_metric(T.metric), _domain(T.domain, seed))
        out.append(Check(f"christoffel/{name}", r, TOL_EXACT))
    return out


def flatness_checks(seed: int) -> list[Check]:
    out = []
    for name in ("polar", "spherical", "parabolic", "inversion"):
        preset = "example1" if name == "inversion" else name
        chart = _chart(preset, name)
        curv = curvature(chart.gamma, chart.metric)
        r = residual(curv.riemann, {}, _domain(chart.domain, seed))
        out.append(Check(f"flatness/{name}", r, TOL_EXACT))
    sphere = _chart("sphere2")
    dom = _domain(sphere.domain, seed)
    R = sphere.curvature.scalar
    out.append(Check("sphere2/scalar-curvature", residual(R, 2, dom), TOL_EXACT))
    alpha = sp.Symbol("alpha")
    term = -(HBAR**2 / 2) * (-(1 - alpha) * R / 4)
    dom_a = dataclasses.replace(dom, intervals={**dom.intervals, alpha: (-2.0, 2.0), HBAR: (0.1, 1.0)})
    out.append(Check("sphere2/curvature-term", residual(term, HBAR**2 * (1 - alpha) / 4, dom_a), TOL_EXACT))
    return out


def density_checks(seed: int) -> list[Check]:
    out = []
    for preset, name in (("identity", None), ("polar", None), ("spherical", None), ("parabolic", None),
                         ("example1", "inversion"), ("sphere2", None)):
        chart = _chart(preset, name)
        g, gamma = chart.metric, chart.gamma
        lhs = {j: gamma.contracted(j) for j in range(chart.dim)}
        rhs = {j: g.log_density_gradient(j) for j in range(chart.dim)}
        out.append(Check(f"density/{chart.name}", residual(lhs, rhs, _domain(chart.domain, seed)), TOL_EXACT))
    return out


# ---------------------------------------------------------------------------
# morphisms and products

def spherical_display_checks(seed: int) -> list[Check]:
    T = _transform("spherical")
    S = build_S_T(T.christoffel, 2)
    r = residual(S.ops[2], references.spherical_s_t_hbar2(), _domain(T.domain, seed, T.coords))
    return [Check("s_t/spherical-display", r, TOL_EXACT, 2)]


def _intertwining(label: str, S: Morphism, star1, star2, corpus, dom: SampleDomain) -> list[Check]:
    rep = verify_intertwining(S, star1, star2, corpus, 2, dom)
    worst = [0.0] * 3
    for pair in rep["pairs"]:
        for rec in pair["orders"]:
            worst[rec["hbar_order"]] = max(worst[rec["hbar_order"]], rec["residual"])
    return [Check(f"intertwining/{label}", w, TOL_SERIES, h) for h, w in enumerate(worst)]


def _sigma_params():
    params = load_preset("sigma_demo").params
    return params["sigma"], params["alpha"], params["beta"]


def intertwining_checks(seed: int) -> list[Check]:
    out = []
    for name in ("polar", "spherical"):
        T = _transform(name)
        r, th = T.coords[:2]
        corpus = corpus_pairs(monomial_corpus(T.coords, 3, (1, r, sp.sin(th))))
        out += _intertwining(name, build_S_T(T.christoffel, 2), moyal(T.coords, 2), transformed_moyal(T, 2),
                             corpus, _domain(T.domain, seed))
    line = _chart("sigma_demo", "line")
    (x,) = line.coords
    sigma, alpha, beta = _sigma_params()
    corpus = corpus_pairs(monomial_corpus(line.coords, 3, (1, x, x**2)))
    out += _intertwining("sigma", build_S_sigma(line.coords, sigma, alpha, beta, 2), moyal(line.coords, 2),
                         sigma_product(line.coords, sigma, alpha, beta, 2), corpus, _domain(line.domain, seed))
    inv = _chart("example1", "inversion")
    _, (Xt, Yt) = references.example1_fields()
    twisted = star_from_vectorfields([Xt], [Yt], 2, inv.domain)
    corpus = corpus_pairs(monomial_corpus(inv.coords, 3, (1, x, x**2)))
    out += _intertwining("example1", references.example1_morphism(2), moyal(inv.coords, 2), twisted, corpus,
                         _domain(inv.domain, seed))
    return out


def _random_observable(coords, rng: np.random.Generator, degree: int = 3) -> MomentumPoly:
    """Complex polynomial of momentum degree <= ``degree`` with polynomial position dependence."""
    n = len(coords)
    terms = {}
    for key in itertools.product(range(degree + 1), repeat=n):
        if sum(key) > degree or rng.random() < 0.4:
            continue
        coeff = sum(int(rng.integers(-3, 4)) * c**int(rng.integers(0, 3)) for c in coords)
        coeff += sp.I * int(rng.integers(-3, 4))
        terms[key] = coeff
    return MomentumPoly(tuple(coords), terms)


def involution_checks(seed: int, pairs: int = 8) -> list[Check]:
    out = []
    sigma, alpha, beta = _sigma_params()
    rng = np.random.default_rng([seed, 22])
    for chart_name, coords in (("line", sp.symbols("x", seq=True)), ("plane", sp.symbols("x y"))):
        prod = sigma_product(coords, sigma, alpha, beta, 2)
        dom = _domain(SampleDomain({c: (-2.0, 2.0) for c in coords}), seed, coords)
        worst = [0.0] * 3
        for _ in range(pairs):
            f, g = _random_observable(coords, rng), _random_observable(coords, rng)
            lhs = prod.apply_involution(prod.star(f, g))
            rhs = prod.star(prod.apply_involution(g), prod.apply_involution(f))
            for h in range(3):
                worst[h] = max(worst[h], residual(lhs[h], rhs[h], dom))
        out += [Check(f"involution/sigma-{chart_name}", w, TOL_SERIES, h) for h, w in enumerate(worst)]
    line = _chart("sigma_demo", "line")
    A = load_preset("sigma_demo").hamiltonian("A")
    prod = sigma_product(line.coords, sigma, alpha, beta, 3)
    series = A.series(order=3)
    star_A = prod.apply_involution(series)
    exact = all(canon(a.to_expr() - b.to_expr()) == 0 for a, b in zip(star_A.coeffs, series.coeffs))
    r = 0.0 if exact else residual(star_A, series, _domain(line.domain, seed, line.coords))
    out.append(Check("involution/sigma-observable", r, TOL_EXACT))
    return out


# ---------------------------------------------------------------------------
# operators

def momentum_checks(seed: int) -> list[Check]:
    T = _transform("spherical")
    ops = momentum_operators(T.christoffel)
    dom = _domain(T.domain, seed)
    names = ("p_r", "p_theta", "p_phi")
    return [Check(f"momentum/{n}", residual(a, b, dom), TOL_EXACT, 1)
            for n, a, b in zip(names, ops, references.spherical_momentum_operators())]


def hydrogen_checks(seed: int) -> list[Check]:
    T = _transform("spherical")
    dom = _domain(T.domain, seed, T.coords).bind(**BOUND)
    S = build_S_T(T.christoffel, 3)
    H = PhaseFunction.from_expr(references.hydrogen_hamiltonian(), T.coords, 3)
    expected = PhaseFunction.from_expr(references.hydrogen_intermediate(), T.coords, 3)
    out = [Check("hydrogen/intermediate", residual(S.invert().apply(H), expected, dom), TOL_EXACT)]
    op = quantize(load_preset("spherical"), "hydrogen", "s_order")
    out.append(Check("hydrogen/operator", residual(op, references.hydrogen_operator(), dom), TOL_EXACT))
    return out


def _random_k(coords, rank: int, seed: int, i: int):
    return random_symmetric_tensor(coords, rank, seed * 100 + i)


def pipeline_checks(seed: int, count: int = 5) -> list[Check]:
    out = []
    for name in ("polar", "spherical"):
        T = _transform(name)
        gamma, dom = T.christoffel, _domain(T.domain, seed)
        S, p_hat = build_S_T(gamma, 3), momentum_operators(gamma)
        V = T.coords[0] ** 2
        for i in range(count):
            K2 = _random_k(T.coords, 2, seed, i)
            r2 = residual(s_order(hamiltonian(K2, V), S, p_hat), quantize_quadratic_covariant(K2, V, gamma), dom)
            out.append(Check(f"pipeline/{name}/quadratic-{i}", r2, TOL_SERIES))
        for i in range(count):
            K3 = _random_k(T.coords, 3, seed, i)
            r3 = residual(s_order(hamiltonian(K3=K3, coords=T.coords), S, p_hat), quantize_cubic_covariant(K3, gamma),
                          dom)
            out.append(Check(f"pipeline/{name}/cubic-{i}", r3, TOL_SERIES))
    return out


def minimal_checks(seed: int, count: int = 2) -> list[Check]:
    out = []
    for name in ("polar", "spherical"):
        T = _transform(name)
        gamma, dom = T.christoffel, _domain(T.domain, seed)
        S, p_hat = build_S_T(gamma, 3), momentum_operators(gamma)
        V = T.coords[0] ** 2
        for i in range(count):
            K2 = _random_k(T.coords, 2, seed, i)
            A_Q = minimal_observable_map(hamiltonian(K2, V), gamma)
            r = residual(s_order(A_Q, S, p_hat), minimal_quantize_quadratic(K2, V, gamma), dom)
            out.append(Check(f"minimal/{name}/quadratic-{i}", r, TOL_SERIES))
        for i in range(count):
            K3 = _random_k(T.coords, 3, seed, i)
            A_Q = minimal_observable_map(hamiltonian(K3=K3, coords=T.coords), gamma)
            r = residual(s_order(A_Q, S, p_hat), minimal_quantize_cubic(K3, gamma), dom)
            out.append(Check(f"minimal/{name}/cubic-{i}", r, TOL_SERIES))
        g = T.metric.as_tensor()
        r = residual(quantize_quadratic_covariant(g, V, gamma), minimal_quantize_quadratic(g, V, gamma), dom)
        out.append(Check(f"minimal/{name}/metric-compatible", r, TOL_SERIES))
    return out


def _self_adjoint(label: str, op: ConfigOperator, density, dom) -> Check:
    return Check(f"hermiticity/{label}", residual(formal_adjoint(op, density), op, dom), TOL_EXACT)


def hermiticity_checks(seed: int) -> list[Check]:
    out = []
    for preset, name in (("polar", None), ("spherical", None), ("parabolic", None), ("example1", "inversion")):
        chart = _chart(preset, name)
        rho, dom = chart.metric.volume_density, _domain(chart.domain, seed)
        for x, op in zip(chart.coords, momentum_operators(chart.gamma)):
            out.append(_self_adjoint(f"{chart.name}/p_{x.name}", op, rho, dom))
    sph = _chart("spherical")
    dom = _domain(sph.domain, seed).bind(**BOUND)
    out.append(_self_adjoint("spherical/hydrogen", quantize(load_preset("spherical"), "hydrogen", "s_order"),
                             sph.metric.volume_density, dom))
    pol = _chart("polar")
    dom = _domain(pol.domain, seed).bind(**BOUND)
    out.append(_self_adjoint("polar/oscillator", quantize(load_preset("polar"), "oscillator", "s_order"),
                             pol.metric.volume_density, dom))
    K3 = _random_k(pol.coords, 3, seed, 0)
    out.append(_self_adjoint("polar/cubic", quantize_cubic_covariant(K3, pol.gamma), pol.metric.volume_density, dom))
    s2 = _chart("sphere2")
    dom = _domain(s2.domain, seed)
    op = quantize_quadratic_curved(s2.metric.as_tensor(), 0, s2.metric, sp.Rational(1, 2), s2.gamma, s2.curvature)
    out.append(_self_adjoint("sphere2/free", op, s2.metric.volume_density, dom))
    return out


def weyl_checks(seed: int, x_degree: int = 2) -> list[Check]:
    """Subset rule against the exponential formula for momentum degree <= 3."""
    out = []
    charts = [("cartesian-1", ChristoffelField.flat(sp.symbols("x", seq=True)), None),
              ("cartesian-2", ChristoffelField.flat(sp.symbols("x y")), None),
              ("cartesian-3", ChristoffelField.flat(sp.symbols("x y z")), None),
              ("polar", _transform("polar").christoffel, _transform("polar").domain)]
    for label, gamma, dom in charts:
        coords = gamma.coords
        dom = _domain(dom or SampleDomain({c: (-2.0, 2.0) for c in coords}), seed)
        p_hat = momentum_operators(gamma)
        worst = 0.0
        for alpha in _multi_indices(len(coords), 3):
            for beta in _multi_indices(len(coords), x_degree):
                mono = sp.Mul(*(c**b for c, b in zip(coords, beta))) * \
                    sp.Mul(*(sp.Symbol(f"p_{c.name}") ** a for c, a in zip(coords, alpha)))
                A = PhaseFunction.lift(MomentumPoly.from_expr(mono, coords), coords, 3)
                worst = max(worst, residual(weyl_order(A, p_hat), weyl_exponential(beta, alpha, p_hat), dom))
        out.append(Check(f"weyl/{label}", worst, TOL_EXACT))
    return out


def _multi_indices(n: int, degree: int) -> Iterable[tuple[int, ...]]:
    for key in itertools.product(range(degree + 1), repeat=n):
        if sum(key) <= degree:
            yield key


# ---------------------------------------------------------------------------

SuiteFn = Callable[[int], list[Check]]

SUITES: dict[str, tuple[SuiteFn, ...]] = {
    "intertwining": (intertwining_checks,),
    "pipeline-vs-covariant": (pipeline_checks,),
    "involution": (involution_checks,),
    "hermiticity": (hermiticity_checks, density_checks),
    "paper-examples": (
        christoffel_checks, spherical_display_checks, momentum_checks, hydrogen_checks, intertwining_checks,
        pipeline_checks, flatness_checks, involution_checks, minimal_checks, hermiticity_checks, density_checks,
        weyl_checks,
    ),
}


def run_suite(name: str, seed: int) -> Report:
    if name not in SUITES:
        raise KeyError(name)
    checks: list[Check] = []
    for fn in SUITES[name]:
        checks.extend(fn(seed))
    return Report(name, seed, tuple(checks))
