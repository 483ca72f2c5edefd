"""Star products as truncated exponentials of commuting vector fields.

Every product here has the form ``f exp(E) g`` with
``E = sum c hbar^h <-Z^alpha ->Z^beta`` for a fixed family ``Z`` of ``2N``
pairwise commuting fields and constant coefficients ``c``.  The exponential
is expanded into a table ``{(h, alpha, beta): c}``; applying the product only
needs the words ``Z^alpha f``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from collections.abc import Mapping, Sequence
from typing import Any

import sympy as sp

from .core import (
    DEFAULT_ORDER,
    MomentumPoly,
    NumericContext,
    PhaseFunction,
    SampleDomain,
    canon,
    numeric_product,
    poisson_bracket,
    poly_sum,
    residual,
    total,
)
from .errors import NonCommutingFields, TruncationMismatch, WrongPoissonTensor
from .geometry import PointTransformation
from .morphisms import Morphism, PPolynomial
from .phase import (
    FieldWordCache,
    MultiIndex,
    PhaseDiffOp,
    PhaseVectorField,
    add_index,
    binom_index,
    index_from_slots,
    sub_index,
    sub_indices,
)

Exponent = Mapping[tuple[int, MultiIndex, MultiIndex], Any]


def _exp_table(exponent: Exponent, order: int) -> dict[tuple[int, MultiIndex, MultiIndex], sp.Expr]:
    zero_key = None
    for _, a, _ in exponent:
        zero_key = (0,) * len(a)
        break
    if zero_key is None:
        raise ValueError("empty exponent")
    if any(h < 1 for h, _, _ in exponent):
        raise ValueError("every exponent term must carry a positive power of hbar")
    table = {(0, zero_key, zero_key): sp.S.One}
    power = dict(table)
    for n in range(1, order + 1):
        nxt: dict = defaultdict(list)
        for (h1, a1, b1), c1 in power.items():
            for (h2, a2, b2), c2 in exponent.items():
                if h1 + h2 <= order:
                    nxt[(h1 + h2, add_index(a1, a2), add_index(b1, b2))].append(c1 * canon(c2))
        power = {k: sp.expand(total(v) / n) for k, v in nxt.items()}
        for k, v in power.items():
            table[k] = table.get(k, sp.S.Zero) + v
    return {k: sp.expand(v) for k, v in table.items() if sp.expand(v) != 0}


def moyal_exponent(n: int) -> dict:
    """``(i/2) sum_k (<-X_k ->Y_k - <-Y_k ->X_k)`` on fields ordered ``(X.., Y..)``."""
    exp = {}
    for k in range(n):
        x, y = index_from_slots(2 * n, [k]), index_from_slots(2 * n, [n + k])
        exp[(1, x, y)] = sp.I / 2
        exp[(1, y, x)] = -sp.I / 2
    return exp


class StarProduct:
    """``f * g = sum_{h, alpha, beta} hbar^h c (Z^alpha f)(Z^beta g)`` truncated at ``order``."""

    def __init__(self, coords: Sequence[sp.Symbol], fields: Sequence[PhaseVectorField], exponent: Exponent,
                 order: int = DEFAULT_ORDER, name: str = "", involution: str = "conjugation",
                 involution_morphism: Morphism | None = None):
        self.coords = tuple(coords)
        self.fields = tuple(fields)
        if len(self.fields) != 2 * len(self.coords):
            raise ValueError("a star product needs 2N vector fields")
        self.order = order
        self.name = name
        self.exponent = {k: canon(v) for k, v in exponent.items()}
        self.table = _exp_table(self.exponent, order)
        self.involution = involution
        self.involution_morphism = involution_morphism

    @property
    def dim(self) -> int:
        return len(self.coords)

    def terms(self, h: int) -> list[tuple[sp.Expr, MultiIndex, MultiIndex]]:
        return sorted(((c, a, b) for (k, a, b), c in self.table.items() if k == h), key=lambda t: (t[1], t[2]))

    def lift(self, f: Any, order: int | None = None) -> PhaseFunction:
        if isinstance(f, PhaseFunction):
            return f
        return PhaseFunction.lift(f, self.coords, self.order if order is None else order)

    def star(self, f: Any, g: Any) -> PhaseFunction:
        order = f.order if isinstance(f, PhaseFunction) else (g.order if isinstance(g, PhaseFunction) else self.order)
        f, g = self.lift(f, order), self.lift(g, order)
        if f.order != g.order:
            raise TruncationMismatch(f"truncation orders differ: {f.order} vs {g.order}")
        if f.order > self.order:
            raise TruncationMismatch(f"series of order {f.order} exceeds product order {self.order}")
        if f.coords != self.coords or g.coords != self.coords:
            raise TruncationMismatch("chart mismatch")
        return self.star_words(f, g, self.words(f), self.words(g))

    def words(self, f: PhaseFunction) -> list[FieldWordCache]:
        """Reusable field-word caches for repeated products with ``f``."""
        return [FieldWordCache(self.fields, c) for c in f.coeffs]

    def star_words(self, f: PhaseFunction, g: PhaseFunction, fw: Sequence[FieldWordCache],
                   gw: Sequence[FieldWordCache]) -> PhaseFunction:
        order = f.order
        parts: list[list[MomentumPoly]] = [[] for _ in range(order + 1)]
        for (h, a, b), c in self.table.items():
            for i in range(order + 1 - h):
                if f.coeffs[i].is_zero():
                    continue
                for j in range(order + 1 - h - i):
                    if g.coeffs[j].is_zero():
                        continue
                    fa = fw[i][a]
                    if fa.is_zero():
                        break
                    gb = gw[j][b]
                    if not gb.is_zero():
                        parts[h + i + j].append(fa.mul(gb, scale=c))
        coeffs = [poly_sum(p, self.coords) if p else MomentumPoly.zero(self.coords) for p in parts]
        return PhaseFunction(self.coords, coeffs, order)

    def star_numeric(self, f: PhaseFunction, g: PhaseFunction, fw: Sequence[FieldWordCache],
                     gw: Sequence[FieldWordCache], ctx: NumericContext) -> list[dict]:
        """The product evaluated on ``ctx``'s points, one numeric polynomial per order."""
        order = f.order
        out: list[dict] = [{} for _ in range(order + 1)]
        for (h, a, b), c in self.table.items():
            scale = complex(c)
            for i in range(order + 1 - h):
                if f.coeffs[i].is_zero():
                    continue
                for j in range(order + 1 - h - i):
                    if g.coeffs[j].is_zero():
                        continue
                    numeric_product(ctx.poly(fw[i][a]), ctx.poly(gw[j][b]), scale, out[h + i + j])
        return out

    def word_images(self, f: PhaseFunction, fw: Sequence[FieldWordCache], order: int) -> list[MomentumPoly]:
        """Every field word of ``f`` that a product through ``order`` can touch."""
        out = []
        for (h, a, b) in self.table:
            for i in range(order + 1 - h):
                if not f.coeffs[i].is_zero():
                    out.append(fw[i][a])
                    out.append(fw[i][b])
        return out

    __call__ = star

    def expanded_terms(self, h: int) -> list[tuple[MomentumPoly, MultiIndex, MultiIndex]]:
        """Order-``h`` bidifferential terms in coordinate derivatives."""
        words: dict[MultiIndex, PhaseDiffOp] = {}

        def word(alpha: MultiIndex) -> PhaseDiffOp:
            if alpha in words:
                return words[alpha]
            if not any(alpha):
                op = PhaseDiffOp.identity(self.coords)
            else:
                s = next(i for i, k in enumerate(alpha) if k)
                unit = index_from_slots(len(alpha), [s])
                op = self.fields[s].as_operator().compose(word(sub_index(alpha, unit)))
            words[alpha] = op
            return op

        acc: dict = defaultdict(list)
        for c, a, b in self.terms(h):
            for mu, ca in word(a).terms.items():
                for nu, cb in word(b).terms.items():
                    acc[(mu, nu)].append(ca.mul(cb, scale=c))
        out = [(poly_sum(v, self.coords), mu, nu) for (mu, nu), v in acc.items()]
        return sorted(((c, mu, nu) for c, mu, nu in out if not c.is_zero()), key=lambda t: (t[1], t[2]))

    def apply_involution(self, f: Any) -> PhaseFunction:
        f = self.lift(f)
        if self.involution_morphism is None:
            return f.conjugate()
        return self.involution_morphism.apply(f.conjugate())

    def __repr__(self) -> str:
        return f"StarProduct({self.name or '?'}, N={self.dim}, order={self.order})"


def coordinate_fields(coords: Sequence[sp.Symbol]) -> tuple[PhaseVectorField, ...]:
    n = len(coords)
    return tuple(PhaseVectorField.coordinate(coords, s) for s in range(2 * n))


def moyal(coords: Sequence[sp.Symbol], order: int = DEFAULT_ORDER) -> StarProduct:
    coords = tuple(coords)
    return StarProduct(coords, coordinate_fields(coords), moyal_exponent(len(coords)), order, "moyal")


def check_vector_fields(Xs: Sequence[PhaseVectorField], Ys: Sequence[PhaseVectorField], domain: SampleDomain,
                        tol: float = 1e-9) -> None:
    """Raise unless the fields commute and ``sum X_k ^ Y_k`` is canonical."""
    fields = list(Xs) + list(Ys)
    coords = fields[0].coords
    n = len(coords)
    dom = domain.with_momenta(coords)
    for u, v in itertools.combinations(range(len(fields)), 2):
        br = fields[u].bracket(fields[v])
        if residual(br, {}, dom) > tol:
            raise NonCommutingFields(f"[Z_{u}, Z_{v}] does not vanish")
    probes = [MomentumPoly.position(coords, i) for i in range(n)] + [MomentumPoly.momentum(coords, i) for i in range(n)]
    for f, g in itertools.product(probes, repeat=2):
        lhs = poly_sum([X.apply(f).mul(Y.apply(g)) - Y.apply(f).mul(X.apply(g)) for X, Y in zip(Xs, Ys)], coords)
        if residual(lhs, poisson_bracket(f, g), dom) > tol:
            raise WrongPoissonTensor("sum X_k ^ Y_k is not the canonical Poisson tensor")


def star_from_vectorfields(Xs: Sequence[PhaseVectorField], Ys: Sequence[PhaseVectorField], order: int = DEFAULT_ORDER,
                           domain: SampleDomain | None = None, name: str = "") -> StarProduct:
    """``f exp((i hbar/2) sum_k (<-X_k ->Y_k - <-Y_k ->X_k)) g``."""
    if len(Xs) != len(Ys) or not Xs:
        raise ValueError("need the same positive number of X and Y fields")
    if domain is not None:
        check_vector_fields(Xs, Ys, domain)
    coords = Xs[0].coords
    return StarProduct(coords, tuple(Xs) + tuple(Ys), moyal_exponent(len(coords)), order, name)


def transformed_fields(T: PointTransformation) -> tuple[list[PhaseVectorField], list[PhaseVectorField]]:
    """The fields ``D_{x'^i}`` and ``D_{p'_i}`` of flat ``d/dx^i`` and ``d/dp_i``."""
    n, J, Jinv, H = T.dim, T.jacobian, T.inverse_jacobian, T.hessian
    coords = T.coords
    zero = MomentumPoly.zero(coords)
    ps = [MomentumPoly.momentum(coords, r) for r in range(n)]
    DX, DP = [], []
    for i in range(n):
        a = [MomentumPoly.constant(coords, Jinv[j, i]) for j in range(n)]
        b = []
        for l in range(n):
            terms = []
            for r in range(n):
                c = total(Jinv[j, i] * Jinv[r, k] * H[k, l, j] for j in range(n) for k in range(n))
                if c != 0:
                    terms.append(ps[r] * c)
            b.append(poly_sum(terms, coords) if terms else zero)
        DX.append(PhaseVectorField(coords, a, b))
        DP.append(PhaseVectorField(coords, [zero] * n, [MomentumPoly.constant(coords, J[i, j]) for j in range(n)]))
    return DX, DP


def transformed_moyal(T: PointTransformation, order: int = DEFAULT_ORDER) -> StarProduct:
    DX, DP = transformed_fields(T)
    return StarProduct(T.coords, tuple(DX) + tuple(DP), moyal_exponent(T.dim), order, f"moyal[{T.name}]")


def sigma_exponent(n: int, sigma: Any, alpha: Any, beta: Any) -> dict:
    sigma, alpha, beta = canon(sigma), canon(alpha), canon(beta)
    exp: dict = defaultdict(lambda: sp.S.Zero)
    for k in range(n):
        x, y = index_from_slots(2 * n, [k]), index_from_slots(2 * n, [n + k])
        exp[(1, x, y)] += sp.I * (sp.Rational(1, 2) - sigma)
        exp[(1, y, x)] += -sp.I * (sp.Rational(1, 2) + sigma)
        exp[(1, x, x)] += alpha
        exp[(1, y, y)] += beta
    return {k: v for k, v in exp.items() if v != 0}


def sigma_involution_morphism(coords, sigma: Any, order: int = DEFAULT_ORDER) -> Morphism:
    """``exp(-2 i hbar sigma XY)`` (applied after complex conjugation)."""
    n = len(coords)
    gen = {(1, index_from_slots(2 * n, [k, n + k])): -2 * sp.I * canon(sigma) for k in range(n)}
    if canon(sigma) == 0:
        return Morphism.identity(coords, order)
    return Morphism.exponential(coords, gen, order, "sigma_involution")


def sigma_product(coords: Sequence[sp.Symbol], sigma: Any, alpha: Any, beta: Any,
                  order: int = DEFAULT_ORDER) -> StarProduct:
    """The (sigma, alpha, beta) family with ``X_k = d/dx^k``, ``Y_k = d/dp_k``.

    For ``N > 1`` the exponent is summed diagonally over ``k``.
    """
    coords = tuple(coords)
    n = len(coords)
    inv = sigma_involution_morphism(coords, sigma, order)
    tag = "conjugation" if canon(sigma) == 0 else "sigma-twisted"
    return StarProduct(coords, coordinate_fields(coords), sigma_exponent(n, sigma, alpha, beta), order,
                       f"sigma({sigma},{alpha},{beta})", tag, inv if tag != "conjugation" else None)


def sigma_involution(f: PhaseFunction, sigma: Any) -> PhaseFunction:
    """``f* = exp(-2 i hbar sigma XY) conj(f)``."""
    return sigma_involution_morphism(f.coords, sigma, f.order).apply(f.conjugate())


def p_family_exponent(P: PPolynomial) -> dict:
    """Moyal exponent plus ``P(<- + ->) - P(<-) - P(->)``."""
    exp: dict = defaultdict(lambda: sp.S.Zero, moyal_exponent(P.n))
    for (h, v), c in P.terms.items():
        for lam in sub_indices(v):
            rest = sub_index(v, lam)
            if not any(lam) or not any(rest):
                continue
            exp[(h, lam, rest)] += c * binom_index(v, lam)
    return {k: v for k, v in exp.items() if v != 0}


def p_family_product(coords: Sequence[sp.Symbol], P: PPolynomial, order: int = DEFAULT_ORDER) -> StarProduct:
    coords = tuple(coords)
    if P.n != len(coords):
        raise ValueError("P is defined for a different dimension")
    P.check_reality()
    return StarProduct(coords, coordinate_fields(coords), p_family_exponent(P), order, "p_family")


def quantum_bracket(star: StarProduct, f: Any, g: Any) -> PhaseFunction:
    """``(f*g - g*f) / (i hbar)``; the result is truncated one order lower."""
    diff = star.star(f, g) - star.star(g, f)
    if not diff.coeffs[0].is_zero():
        raise ValueError("commutator has a classical part")
    return diff.shift(-1).scale(-sp.I)
