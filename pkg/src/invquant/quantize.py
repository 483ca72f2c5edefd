"""Operator side: configuration-space differential operators and the orderings.

A :class:`ConfigOperator` is ``sum hbar^h c_{h,alpha}(x) d^alpha`` with all
derivatives to the right.  Covariant operators such as ``nabla_i K^{ij}
nabla_j`` are assembled from operator-valued tensors whose components are
``ConfigOperator`` instances; there ``d_k`` of a component means the
composition ``d_k o component``.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import sympy as sp
from sympy.utilities.iterables import multiset_permutations

from .core import (
    DEFAULT_ORDER,
    HBAR,
    MomentumPoly,
    PhaseFunction,
    SampleDomain,
    canon,
    conjugate,
    equals_numeric,
    residual,
    total,
)
from .errors import RankMismatch, TruncationMismatch
from .geometry import (
    ChristoffelField,
    CurvatureData,
    MetricField,
    Tensor,
    christoffel_from_metric,
    contract,
    covariant_derivative,
    curvature,
    divergence,
)
from .morphisms import Morphism
from .phase import MultiIndex, add_index, binom_index, index_from_slots, sub_index, sub_indices


class ConfigOperator:
    """``sum_{h, alpha} hbar^h c(x) d^alpha`` in normal form."""

    __slots__ = ("coords", "terms")

    def __init__(self, coords: Sequence[sp.Symbol], terms: Mapping[tuple[int, MultiIndex], Any] | None = None):
        self.coords = tuple(coords)
        n = len(self.coords)
        clean = {}
        for (h, alpha), c in (terms or {}).items():
            if len(alpha) != n:
                raise RankMismatch(f"multi-index {alpha} on a chart of dimension {n}")
            c = canon(c)
            if c != 0:
                clean[(int(h), tuple(alpha))] = c
        self.terms = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, coords) -> ConfigOperator:
        return cls(coords)

    @classmethod
    def multiplication(cls, coords, f: Any, h: int = 0) -> ConfigOperator:
        return cls(coords, {(h, (0,) * len(coords)): f})

    @classmethod
    def identity(cls, coords) -> ConfigOperator:
        return cls.multiplication(coords, 1)

    @classmethod
    def partial(cls, coords, i: int) -> ConfigOperator:
        return cls(coords, {(0, index_from_slots(len(coords), [i])): 1})

    @classmethod
    def collect(cls, coords, items: Iterable[tuple[tuple[int, MultiIndex], Any]]) -> ConfigOperator:
        acc: dict = defaultdict(list)
        for key, c in items:
            acc[key].append(c)
        return cls(coords, {k: total(v) for k, v in acc.items()})

    # -- structure --------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        """Differential order."""
        return max((sum(a) for _, a in self.terms), default=-1)

    def hbar_orders(self) -> list[int]:
        return sorted({h for h, _ in self.terms})

    def coefficient(self, h: int, alpha: Sequence[int]) -> sp.Expr:
        return self.terms.get((h, tuple(alpha)), sp.S.Zero)

    def components(self) -> dict:
        return dict(self.terms)

    def map(self, fn) -> ConfigOperator:
        return ConfigOperator(self.coords, {k: fn(v) for k, v in self.terms.items()})

    def simplify(self) -> ConfigOperator:
        return self.map(sp.simplify)

    # -- algebra ----------------------------------------------------------
    def _check(self, other: ConfigOperator) -> None:
        if self.coords != other.coords:
            raise TruncationMismatch(f"chart mismatch: {self.coords} vs {other.coords}")

    def __add__(self, other: ConfigOperator) -> ConfigOperator:
        if not isinstance(other, ConfigOperator):
            other = ConfigOperator.multiplication(self.coords, other)
        self._check(other)
        return ConfigOperator.collect(self.coords, itertools.chain(self.terms.items(), other.terms.items()))

    __radd__ = __add__

    def __neg__(self) -> ConfigOperator:
        return self.map(lambda c: -c)

    def __sub__(self, other: ConfigOperator) -> ConfigOperator:
        if not isinstance(other, ConfigOperator):
            other = ConfigOperator.multiplication(self.coords, other)
        return self + (-other)

    def scale(self, c: Any, h: int = 0) -> ConfigOperator:
        """Left multiplication by the scalar ``c hbar^h``."""
        c = canon(c)
        return ConfigOperator(self.coords, {(k + h, a): c * v for (k, a), v in self.terms.items()})

    def __mul__(self, c: Any) -> ConfigOperator:
        if isinstance(c, ConfigOperator):
            return self.compose(c)
        return self.scale(c)

    __rmul__ = scale

    def compose(self, other: ConfigOperator) -> ConfigOperator:
        """``self o other`` through the Leibniz rule."""
        self._check(other)
        n = self.dim
        derivs: dict = {}

        def d(expr: sp.Expr, lam: MultiIndex) -> sp.Expr:
            key = (expr, lam)
            if key not in derivs:
                if not any(lam):
                    derivs[key] = expr
                else:
                    s = next(i for i, k in enumerate(lam) if k)
                    derivs[key] = sp.diff(d(expr, sub_index(lam, index_from_slots(n, [s]))), self.coords[s])
            return derivs[key]

        items = []
        for (h1, a), ca in self.terms.items():
            for (h2, b), cb in other.terms.items():
                for lam in sub_indices(a):
                    db = d(cb, lam)
                    if db != 0:
                        items.append(((h1 + h2, add_index(sub_index(a, lam), b)), binom_index(a, lam) * ca * db))
        return ConfigOperator.collect(self.coords, items)

    __matmul__ = compose

    def derivative(self, var: sp.Symbol) -> ConfigOperator:
        """``d_var o self`` (how tensor calculus differentiates operator components)."""
        i = self.coords.index(var)
        return ConfigOperator.partial(self.coords, i).compose(self)

    def apply(self, psi: Any) -> sp.Expr:
        """Action on a test function, with hbar restored as a symbol."""
        psi = canon(psi)
        out = []
        for (h, a), c in self.terms.items():
            dpsi = psi
            for i, k in enumerate(a):
                if k:
                    dpsi = sp.diff(dpsi, self.coords[i], k)
            out.append(HBAR**h * c * dpsi)
        return total(out)

    def conjugate(self) -> ConfigOperator:
        return self.map(conjugate)

    def __repr__(self) -> str:
        return f"ConfigOperator({len(self.terms)} terms)"


def _op_tensor(T: Tensor, fn) -> Tensor:
    return T.map(fn)


def coordinate_derivatives(coords: Sequence[sp.Symbol]) -> Tensor:
    """The covector of operators ``D_k = d_k`` (first covariant derivative of a function)."""
    coords = tuple(coords)
    return Tensor.from_function(coords, 0, 1, lambda k: ConfigOperator.partial(coords, k))


def multiplication_tensor(T: Tensor) -> Tensor:
    """Promote a scalar tensor to multiplication operators."""
    return _op_tensor(T, lambda c: ConfigOperator.multiplication(T.coords, c))


def operator_sum(ops: Iterable[ConfigOperator], coords) -> ConfigOperator:
    items = []
    for op in ops:
        items.extend(op.terms.items())
    return ConfigOperator.collect(tuple(coords), items)


# ---------------------------------------------------------------------------
# momentum operators and orderings

def momentum_operator(gamma: ChristoffelField, j: int) -> ConfigOperator:
    """``-i hbar (d_j + Gamma^k_{jk}/2)``."""
    coords = gamma.coords
    op = ConfigOperator.partial(coords, j) + ConfigOperator.multiplication(coords, gamma.contracted(j) / 2)
    return op.scale(-sp.I, 1)


def momentum_operators(gamma: ChristoffelField) -> list[ConfigOperator]:
    return [momentum_operator(gamma, j) for j in range(gamma.dim)]


class _PowerCache:
    """``p_hat^l`` for commuting momentum operators."""

    def __init__(self, p_hat: Sequence[ConfigOperator]):
        self.p_hat = list(p_hat)
        coords = self.p_hat[0].coords
        self.cache: dict[MultiIndex, ConfigOperator] = {(0,) * len(coords): ConfigOperator.identity(coords)}

    def __getitem__(self, l: MultiIndex) -> ConfigOperator:
        hit = self.cache.get(l)
        if hit is not None:
            return hit
        s = next(i for i, k in enumerate(l) if k)
        out = self.p_hat[s].compose(self[sub_index(l, index_from_slots(len(l), [s]))])
        self.cache[l] = out
        return out


def _as_series(A: Any, coords, order: int = DEFAULT_ORDER) -> PhaseFunction:
    if isinstance(A, PhaseFunction):
        return A
    if isinstance(A, MomentumPoly):
        return PhaseFunction.lift(A, order=order)
    return PhaseFunction.from_expr(A, coords, order)


def weyl_order(A: Any, p_hat: Sequence[ConfigOperator]) -> ConfigOperator:
    """Symmetric ordering by the subset rule.

    ``f p_{i_1}...p_{i_m}`` becomes ``2^-m sum_L p_L f p_(L^c)``; subsets with
    equal index counts are grouped with binomial weights.
    """
    coords = p_hat[0].coords
    A = _as_series(A, coords)
    if A.coords != coords:
        raise TruncationMismatch("observable and momentum operators live on different charts")
    powers = _PowerCache(p_hat)
    parts = []
    for h, poly in enumerate(A.coeffs):
        for alpha, f in poly.terms.items():
            m = sum(alpha)
            fop = ConfigOperator.multiplication(coords, f)
            for lam in sub_indices(alpha):
                w = sp.Rational(binom_index(alpha, lam), 2**m)
                term = powers[lam].compose(fop).compose(powers[sub_index(alpha, lam)])
                parts.append(term.scale(w, h))
    return operator_sum(parts, coords)


def weyl_exponential(x_exp: Sequence[int], p_exp: Sequence[int], p_hat: Sequence[ConfigOperator]) -> ConfigOperator:
    """Weyl quantization of ``x^beta p^alpha`` from the exponential generating formula.

    ``A(-i hbar d_xi, i hbar d_eta) exp((i/hbar)(xi q - eta p))`` at ``xi = eta = 0``
    picks the coefficient of ``xi^beta eta^alpha`` in the expansion of the
    exponential of the operator ``xi q - eta p``: a sum over all distinct words
    in ``beta`` position and ``alpha`` momentum letters with one common weight.
    """
    coords = p_hat[0].coords
    n_x, n_p = sum(x_exp), sum(p_exp)
    n = n_x + n_p
    letters = [("q", i) for i, k in enumerate(x_exp) for _ in range(k)]
    letters += [("p", i) for i, k in enumerate(p_exp) for _ in range(k)]
    fact = math.prod(math.factorial(k) for k in (*x_exp, *p_exp))
    # derivative prefactors (-i hbar)^|beta| (i hbar)^|alpha|, exponential (i/hbar)^n / n!,
    # (-1)^|alpha| from the -eta p letters, and beta! alpha! from differentiating monomials
    phase = (-sp.I) ** n_x * sp.I**n_p * sp.I**n * (-1) ** n_p
    weight = sp.Rational(fact, math.factorial(n)) * phase
    ops = {("q", i): ConfigOperator.multiplication(coords, coords[i]) for i in range(len(coords))}
    ops.update({("p", i): p for i, p in enumerate(p_hat)})
    total_op = ConfigOperator.zero(coords)
    for word in multiset_permutations(letters):
        acc = ConfigOperator.identity(coords)
        for letter in word:
            acc = acc.compose(ops[tuple(letter)])
        total_op = total_op + acc
    return total_op.scale(weight)


def s_order(A: Any, S: Morphism, p_hat: Sequence[ConfigOperator]) -> ConfigOperator:
    """``A_S = (S^-1 A)_W``."""
    A = _as_series(A, S.coords, S.order)
    return weyl_order(S.invert().apply(A), p_hat)


# ---------------------------------------------------------------------------
# covariant operators

def _check_rank(K: Tensor, rank: int) -> None:
    if K.up != rank or K.down != 0:
        raise RankMismatch(f"expected a contravariant rank-{rank} tensor, got ({K.up},{K.down})")


def _scalar_operator(coords, f: Any) -> ConfigOperator:
    return ConfigOperator.multiplication(coords, f)


def _contract_with_D(T: Tensor, D: Tensor) -> Tensor:
    """``T^{i...j} D_j`` with the last contravariant slot of ``T`` contracted."""
    n, r = T.dim, T.up

    def fill(*idx):
        items = [D.comps[j].scale(T.comps[idx + (j,)]) for j in range(n) if T.comps[idx + (j,)] != 0]
        return operator_sum(items, T.coords)

    return Tensor.from_function(T.coords, r - 1, 0, fill)


def pseudo_laplacian(K: Tensor, gamma: ChristoffelField) -> ConfigOperator:
    """``nabla_i K^{ij} nabla_j``."""
    _check_rank(K, 2)
    V = _contract_with_D(K, coordinate_derivatives(K.coords))
    return divergence(V, gamma).comps[()]


def second_covariant_derivative(K: Tensor, gamma: ChristoffelField) -> sp.Expr:
    """``K^{ij}_{;ij}``: differentiate on ``i`` and contract, then on ``j``."""
    _check_rank(K, 2)
    return canon(divergence(divergence(K, gamma), gamma).comps[()])


def double_divergence_vector(K: Tensor, gamma: ChristoffelField) -> Tensor:
    """``U^k = K^{ijk}_{;ij}``."""
    _check_rank(K, 3)
    return divergence(divergence(K, gamma), gamma)


def _hessian_operators(coords, gamma: ChristoffelField) -> Tensor:
    return covariant_derivative(coordinate_derivatives(coords), gamma)


def _cubic_core_terms(K: Tensor, gamma: ChristoffelField) -> tuple[ConfigOperator, ConfigOperator]:
    """``nabla_i K^{ijk} nabla_j nabla_k`` and ``nabla_i nabla_j K^{ijk} nabla_k``."""
    coords, n = K.coords, K.dim
    hess = _hessian_operators(coords, gamma)

    def vfill(i):
        items = [hess.comps[k, j].scale(K.comps[i, j, k]) for j in range(n) for k in range(n) if K.comps[i, j, k] != 0]
        return operator_sum(items, coords)

    V = Tensor.from_function(coords, 1, 0, vfill)
    t1 = divergence(V, gamma).comps[()]
    W = _contract_with_D(K, coordinate_derivatives(coords))
    t2 = divergence(divergence(W, gamma), gamma).comps[()]
    return t1, t2


def _div_times(U: Tensor, gamma: ChristoffelField) -> ConfigOperator:
    """``nabla_k U^k`` as an operator (``psi -> nabla_k (U^k psi)``)."""
    return divergence(multiplication_tensor(U), gamma).comps[()]


def _dot_D(U: Tensor) -> ConfigOperator:
    """``U^k nabla_k``."""
    coords = U.coords
    return operator_sum((ConfigOperator.partial(coords, k).scale(U.comps[k]) for k in range(U.dim)), coords)


def quantize_quadratic_covariant(K: Tensor, V: Any, gamma: ChristoffelField) -> ConfigOperator:
    """``-(hbar^2/2)(nabla_i K^{ij} nabla_j + K^{ij}_{;ij}/4) + V``."""
    coords = K.coords
    inner = pseudo_laplacian(K, gamma) + _scalar_operator(coords, second_covariant_derivative(K, gamma) / 4)
    return inner.scale(sp.Rational(-1, 2), 2) + _scalar_operator(coords, V)


def quantize_cubic_covariant(K: Tensor, gamma: ChristoffelField) -> ConfigOperator:
    """``(i hbar^3/2)(T1 + T2 + nabla_k U^k/4 + U^k nabla_k/4)`` with ``U^k = K^{ijk}_{;ij}``."""
    _check_rank(K, 3)
    t1, t2 = _cubic_core_terms(K, gamma)
    U = double_divergence_vector(K, gamma)
    inner = t1 + t2 + _div_times(U, gamma).scale(sp.Rational(1, 4)) + _dot_D(U).scale(sp.Rational(1, 4))
    return inner.scale(sp.I / 2, 3)


def quantize_quadratic_curved(K: Tensor, V: Any, g: MetricField, alpha: Any,
                              gamma: ChristoffelField | None = None, curv: CurvatureData | None = None) -> ConfigOperator:
    """Quadratic operator with the ``-(1 - alpha) K^{ij} R_ij / 4`` curvature term."""
    gamma = gamma or christoffel_from_metric(g)
    curv = curv or curvature(gamma, g)
    n, coords = K.dim, K.coords
    kr = total(K.comps[i, j] * curv.ricci[i, j] for i in range(n) for j in range(n))
    scalar = second_covariant_derivative(K, gamma) / 4 - (1 - canon(alpha)) * kr / 4
    inner = pseudo_laplacian(K, gamma) + _scalar_operator(coords, scalar)
    return inner.scale(sp.Rational(-1, 2), 2) + _scalar_operator(coords, V)


def quantize_cubic_curved(K: Tensor, g: MetricField, alpha: Any,
                          gamma: ChristoffelField | None = None, curv: CurvatureData | None = None) -> ConfigOperator:
    """Cubic operator with the ``-(3/4)(1 - alpha)`` curvature corrections."""
    _check_rank(K, 3)
    gamma = gamma or christoffel_from_metric(g)
    curv = curv or curvature(gamma, g)
    n, coords = K.dim, K.coords
    t1, t2 = _cubic_core_terms(K, gamma)
    U = double_divergence_vector(K, gamma)
    W = Tensor.from_function(coords, 1, 0, lambda i: total(
        K.comps[i, j, k] * curv.ricci[j, k] for j in range(n) for k in range(n)))
    c = -sp.Rational(3, 4) * (1 - canon(alpha))
    inner = (t1 + t2 + _div_times(U, gamma).scale(sp.Rational(1, 4)) + _dot_D(U).scale(sp.Rational(1, 4))
             + _div_times(W, gamma).scale(c) + _dot_D(W).scale(c))
    return inner.scale(sp.I / 2, 3)


def minimal_quantize_quadratic(K: Tensor, V: Any, gamma: ChristoffelField) -> ConfigOperator:
    """``-(hbar^2/2) nabla_i K^{ij} nabla_j + V``."""
    return pseudo_laplacian(K, gamma).scale(sp.Rational(-1, 2), 2) + _scalar_operator(K.coords, V)


def minimal_quantize_cubic(K: Tensor, gamma: ChristoffelField) -> ConfigOperator:
    """``(i hbar^3/2)(nabla_i K^{ijk} nabla_j nabla_k + nabla_i nabla_j K^{ijk} nabla_k)``."""
    _check_rank(K, 3)
    t1, t2 = _cubic_core_terms(K, gamma)
    return (t1 + t2).scale(sp.I / 2, 3)


def laplace_beltrami(g: MetricField, gamma: ChristoffelField | None = None) -> ConfigOperator:
    """``nabla_i g^{ij} nabla_j``."""
    gamma = gamma or christoffel_from_metric(g)
    return pseudo_laplacian(g.as_tensor(), gamma)


# ---------------------------------------------------------------------------
# observables with tensorial coefficients

def momentum_tensor(poly: MomentumPoly, m: int) -> Tensor:
    """Symmetric ``K`` with ``sum K^{i_1..i_m} p_{i_1}..p_{i_m}`` equal to the degree-``m`` part."""
    coords, n = poly.coords, poly.dim

    def fill(*idx):
        alpha = index_from_slots(n, idx)
        c = poly.coefficient(alpha)
        if c == 0:
            return sp.S.Zero
        return c * math.prod(math.factorial(a) for a in alpha) / math.factorial(m)

    return Tensor.from_function(coords, m, 0, fill)


def tensor_to_poly(T: Tensor) -> MomentumPoly:
    """Inverse of :func:`momentum_tensor`."""
    n, m = T.dim, T.up
    terms = {}
    for slots in itertools.combinations_with_replacement(range(n), m):
        alpha = index_from_slots(n, slots)
        mult = math.factorial(m) // math.prod(math.factorial(a) for a in alpha)
        terms[alpha] = mult * T.comps[slots]
    return MomentumPoly(T.coords, terms)


def _laplace_type_step(T: Tensor, gamma: ChristoffelField) -> Tensor:
    """``T^{kj...}_{;jk}`` times ``m(m-1)``: one application of ``nabla_k nabla_j d_{p_k} d_{p_j}``."""
    m = T.up
    first = contract(covariant_derivative(T, gamma), 1, 0)
    second = contract(covariant_derivative(first, gamma), 0, 0)
    return second.map(lambda c: m * (m - 1) * canon(c))


def minimal_observable_map(A_C: Any, gamma: ChristoffelField, order: int | None = None) -> PhaseFunction:
    """``exp((hbar^2/8) sum nabla_k nabla_j d_{p_k} d_{p_j}) A_C``."""
    coords = gamma.coords
    A = _as_series(A_C, coords, DEFAULT_ORDER if order is None else order)
    out = [MomentumPoly.zero(coords) for _ in range(A.order + 1)]
    for h, poly in enumerate(A.coeffs):
        degrees = sorted({sum(k) for k in poly.terms})
        for m in degrees:
            T = momentum_tensor(poly.homogeneous(m), m)
            step = 0
            while T.up >= 0 and h + 2 * step <= A.order:
                piece = tensor_to_poly(T) * (sp.Rational(1, 8**step) / math.factorial(step))
                out[h + 2 * step] = out[h + 2 * step] + piece
                if T.up < 2:
                    break
                T = _laplace_type_step(T, gamma)
                step += 1
    return PhaseFunction(coords, out, A.order)


# ---------------------------------------------------------------------------
# adjoints and comparison

def formal_adjoint(op: ConfigOperator, density: Any) -> ConfigOperator:
    """Adjoint for the weight ``density``: ``(a d^alpha)^+ = density^-1 (-1)^|alpha| d^alpha o (density conj(a))``."""
    coords = op.coords
    rho = canon(density)
    parts = []
    for (h, alpha), a in op.terms.items():
        d = ConfigOperator(coords, {(0, alpha): (-1) ** sum(alpha)})
        inner = d.compose(ConfigOperator.multiplication(coords, rho * conjugate(a)))
        parts.append(inner.scale(1 / rho, h))
    return operator_sum(parts, coords)


def operator_residual(A: ConfigOperator, B: ConfigOperator, dom: SampleDomain) -> float:
    return residual(A, B, dom)


def operator_equals(A: ConfigOperator, B: ConfigOperator, dom: SampleDomain, tol: float = 1e-9) -> bool:
    return equals_numeric(A, B, dom, tol)


def leading_symbol(op: ConfigOperator) -> dict[MultiIndex, sp.Expr]:
    """Top-order coefficients with the ``(-i hbar)^m`` of each derivative stripped."""
    m = op.order()
    out: dict = defaultdict(list)
    for (h, alpha), c in op.terms.items():
        if sum(alpha) == m and h == m:
            out[alpha].append(c / (-sp.I) ** m)
    return {k: total(v) for k, v in out.items()}


def hamiltonian(K2: Tensor | None = None, V: Any = 0, K3: Tensor | None = None, coords=None,
                order: int = DEFAULT_ORDER) -> PhaseFunction:
    """``K^{ij} p_i p_j / 2 + V + K^{ijk} p_i p_j p_k`` as a series."""
    coords = tuple(coords if coords is not None else (K2 or K3).coords)
    poly = MomentumPoly.constant(coords, V)
    if K2 is not None:
        poly = poly + tensor_to_poly(K2) * sp.Rational(1, 2)
    if K3 is not None:
        poly = poly + tensor_to_poly(K3)
    return PhaseFunction.lift(poly, order=order)
