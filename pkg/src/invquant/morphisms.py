"""Equivalence morphisms ``S = id + sum_k hbar^k S_k`` between star products.

Convention: a morphism built here satisfies ``S(f *1 g) = (S f) *2 (S g)``
where ``*1`` is the Moyal product of the chart and ``*2`` the product it is
paired with (transformed Moyal, the sigma-family, the P-family).
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import sympy as sp

from .core import (
    DEFAULT_ORDER,
    MomentumPoly,
    NumericContext,
    PhaseFunction,
    SampleDomain,
    canon,
    numeric_residual,
    poly_sum,
    total,
)
from .errors import NotUnital, RealityViolation, TruncationMismatch
from .geometry import ChristoffelField, CurvatureData
from .phase import DerivativeCache, MultiIndex, PhaseDiffOp, add_index, index_from_slots


class Morphism:
    """Truncated hbar-series of phase-space differential operators."""

    __slots__ = ("coords", "order", "ops", "name")

    def __init__(self, coords: Sequence[sp.Symbol], ops: Sequence[PhaseDiffOp], order: int = DEFAULT_ORDER, name: str = ""):
        self.coords = tuple(coords)
        self.order = order
        self.name = name
        out = []
        for k in range(order + 1):
            op = ops[k] if k < len(ops) else PhaseDiffOp.zero(self.coords)
            if op.coords != self.coords:
                raise TruncationMismatch(f"chart mismatch: {op.coords} vs {self.coords}")
            out.append(op)
        self.ops = tuple(out)

    @classmethod
    def identity(cls, coords, order: int = DEFAULT_ORDER) -> Morphism:
        return cls(coords, [PhaseDiffOp.identity(coords)], order, "id")

    @classmethod
    def exponential(cls, coords, generator: Mapping[tuple[int, MultiIndex], Any], order: int = DEFAULT_ORDER,
                    name: str = "") -> Morphism:
        """``exp(G)`` for ``G = sum c hbar^h d^mu`` with constant ``c`` and ``h >= 1``.

        Constant-coefficient operators commute, so the exponential is a
        polynomial computation on ``(h, mu)`` keys.
        """
        if any(h < 1 for h, _ in generator):
            raise ValueError("every generator term must carry a positive power of hbar")
        coords = tuple(coords)
        zero = (0,) * (2 * len(coords))
        series = {(0, zero): sp.S.One}
        power = {(0, zero): sp.S.One}
        for n in range(1, order + 1):
            nxt: dict = defaultdict(list)
            for (h1, m1), c1 in power.items():
                for (h2, m2), c2 in generator.items():
                    if h1 + h2 <= order:
                        nxt[(h1 + h2, add_index(m1, m2))].append(c1 * canon(c2))
            power = {k: total(v) / n for k, v in nxt.items()}
            for k, v in power.items():
                series[k] = series.get(k, sp.S.Zero) + v
        ops: list[dict] = [dict() for _ in range(order + 1)]
        for (h, mu), c in series.items():
            c = sp.expand(c)
            if c != 0:
                ops[h][mu] = MomentumPoly.constant(coords, c)
        return cls(coords, [PhaseDiffOp(coords, t) for t in ops], order, name)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def components(self) -> dict:
        return {(h,) + k: v for h, op in enumerate(self.ops) for k, v in op.components().items()}

    def is_unital(self) -> bool:
        return self.ops[0].terms == PhaseDiffOp.identity(self.coords).terms

    def apply(self, f: Any) -> PhaseFunction:
        if not isinstance(f, PhaseFunction):
            f = PhaseFunction.lift(f, self.coords, self.order)
        if f.coords != self.coords:
            raise TruncationMismatch(f"chart mismatch: {f.coords} vs {self.coords}")
        if f.order > self.order:
            raise TruncationMismatch(f"series of order {f.order} exceeds morphism order {self.order}")
        caches = [DerivativeCache(c) for c in f.coeffs]
        out = []
        for k in range(f.order + 1):
            parts = [self.ops[j].apply(caches[k - j]) for j in range(k + 1) if not self.ops[j].is_zero()]
            out.append(poly_sum(parts, self.coords) if parts else MomentumPoly.zero(self.coords))
        return PhaseFunction(self.coords, out, f.order)

    __call__ = apply

    def compose(self, other: Morphism) -> Morphism:
        """``self o other``."""
        if self.coords != other.coords or self.order != other.order:
            raise TruncationMismatch("morphisms differ in chart or truncation order")
        ops = []
        for k in range(self.order + 1):
            acc = PhaseDiffOp.zero(self.coords)
            for j in range(k + 1):
                if not self.ops[j].is_zero() and not other.ops[k - j].is_zero():
                    acc = acc + self.ops[j].compose(other.ops[k - j])
            ops.append(acc)
        return Morphism(self.coords, ops, self.order, f"{self.name}.{other.name}")

    __matmul__ = compose

    def invert(self) -> Morphism:
        """Neumann series ``sum_n (id - S)^n``."""
        if not self.is_unital():
            raise NotUnital(f"{self.name or 'morphism'} does not start with the identity")
        neg = Morphism(self.coords, [PhaseDiffOp.zero(self.coords)] + [-op for op in self.ops[1:]], self.order)
        result = Morphism.identity(self.coords, self.order)
        power = Morphism.identity(self.coords, self.order)
        for _ in range(self.order):
            power = power.compose(neg)
            result = Morphism(self.coords, [a + b for a, b in zip(result.ops, power.ops)], self.order)
        return Morphism(self.coords, result.ops, self.order, f"{self.name}^-1" if self.name else "")

    def __repr__(self) -> str:
        return f"Morphism({self.name or '?'}, order={self.order})"


def invert(S: Morphism) -> Morphism:
    return S.invert()


def apply(S: Morphism, f: Any) -> PhaseFunction:
    return S.apply(f)


# ---------------------------------------------------------------------------
# the canonical morphisms

def _p_index(n: int, slots: Iterable[int]) -> MultiIndex:
    return index_from_slots(2 * n, [n + s for s in slots])


def _s_t_terms(gamma: ChristoffelField, ricci=None, alpha: Any = 0) -> PhaseDiffOp:
    """The hbar^2 operator of S_T, optionally with the Ricci shift."""
    coords, n, G = gamma.coords, gamma.dim, gamma.gamma
    rng = range(n)
    items = []
    for j, k in itertools.product(rng, rng):
        c = total(G[i, l, j] * G[l, i, k] for i in rng for l in rng)
        if ricci is not None:
            c = c + canon(alpha) * ricci[j, k]
        items.append((_p_index(n, (j, k)), MomentumPoly.constant(coords, 3 * c)))
    for i, j, k in itertools.product(rng, rng, rng):
        mu = add_index(index_from_slots(2 * n, [i]), _p_index(n, (j, k)))
        items.append((mu, MomentumPoly.constant(coords, 3 * G[i, j, k])))
    for j, k, l in itertools.product(rng, rng, rng):
        for i in rng:
            c = total(2 * G[i, m, l] * G[m, j, k] for m in rng) - gamma.derivative(i, j, k, l)
            items.append((_p_index(n, (j, k, l)), MomentumPoly.momentum(coords, i) * c))
    op = PhaseDiffOp.from_terms(coords, items)
    return op.scale(sp.Rational(1, 24))


def build_S_T(gamma: ChristoffelField, order: int = DEFAULT_ORDER) -> Morphism:
    """The morphism intertwining Moyal with the transformed Moyal product through hbar^2."""
    if order < 2:
        return Morphism.identity(gamma.coords, order)
    ops = [PhaseDiffOp.identity(gamma.coords), PhaseDiffOp.zero(gamma.coords), _s_t_terms(gamma)]
    return Morphism(gamma.coords, ops, order, "S_T")


def build_S_curved(gamma: ChristoffelField, curv: CurvatureData, alpha: Any, order: int = DEFAULT_ORDER) -> Morphism:
    """``S_T`` with ``Gamma Gamma`` replaced by ``Gamma Gamma + alpha Ric`` in the second-order term."""
    if order < 2:
        return Morphism.identity(gamma.coords, order)
    ops = [PhaseDiffOp.identity(gamma.coords), PhaseDiffOp.zero(gamma.coords),
           _s_t_terms(gamma, curv.ricci, alpha)]
    return Morphism(gamma.coords, ops, order, f"S_curved({alpha})")


def sigma_generator(n: int, sigma: Any, alpha: Any, beta: Any) -> dict:
    """``-i sigma XY + alpha/2 XX + beta/2 YY`` summed diagonally over the chart."""
    gen: dict = defaultdict(lambda: sp.S.Zero)
    for k in range(n):
        gen[(1, index_from_slots(2 * n, [k, n + k]))] += -sp.I * canon(sigma)
        gen[(1, index_from_slots(2 * n, [k, k]))] += canon(alpha) / 2
        gen[(1, index_from_slots(2 * n, [n + k, n + k]))] += canon(beta) / 2
    return {key: v for key, v in gen.items() if v != 0}


def build_S_sigma(coords, sigma: Any, alpha: Any, beta: Any, order: int = DEFAULT_ORDER) -> Morphism:
    return Morphism.exponential(coords, sigma_generator(len(coords), sigma, alpha, beta), order, "S_sigma")


class PPolynomial:
    """Constant-coefficient polynomial ``P(X_1..X_N, Y_1..Y_N; hbar)``.

    ``terms`` maps ``(h, v)`` to the coefficient of ``hbar^h X^a Y^b`` where
    ``v = a + b`` is a multi-index of length ``2N``.
    """

    def __init__(self, n: int, terms: Mapping[tuple[int, MultiIndex], Any]):
        self.n = n
        self.terms = {(int(h), tuple(v)): canon(c) for (h, v), c in terms.items() if canon(c) != 0}
        for (h, v) in self.terms:
            if len(v) != 2 * n:
                raise ValueError(f"field multi-index {v} has the wrong length")
            if h < 1:
                raise ValueError("P must vanish at hbar = 0")

    @classmethod
    def minimal(cls, n: int) -> PPolynomial:
        """``-(hbar^2/8) sum_{k,j} X_k X_j Y_k Y_j``."""
        acc: dict = defaultdict(lambda: sp.S.Zero)
        for k, j in itertools.product(range(n), repeat=2):
            acc[(2, index_from_slots(2 * n, [k, j, n + k, n + j]))] += sp.Rational(-1, 8)
        return cls(n, acc)

    def swap(self, v: MultiIndex) -> MultiIndex:
        return v[self.n:] + v[: self.n]

    def check_reality(self) -> None:
        for (h, v), c in self.terms.items():
            partner = self.terms.get((h, self.swap(v)), sp.S.Zero)
            if sp.expand(c.xreplace({sp.I: -sp.I}) - partner) != 0:
                raise RealityViolation(f"conj P(X, Y) != P(Y, X) at hbar^{h} term {v}")


def build_S_P(coords, P: PPolynomial, order: int = DEFAULT_ORDER) -> Morphism:
    """``exp(P)`` with ``X_k = d/dx^k`` and ``Y_k = d/dp_k``."""
    P.check_reality()
    return Morphism.exponential(coords, P.terms, order, "S_P")


# ---------------------------------------------------------------------------
# verification

def verify_intertwining(S: Morphism, star1, star2, corpus: Sequence[tuple[str, Any, Any]], order: int,
                        domain: SampleDomain) -> dict:
    """Residuals of ``S(f *1 g) - (S f) *2 (S g)`` per pair and hbar order.

    The left side is built symbolically.  The right side multiplies the
    symbolic field words of ``S f`` and ``S g`` on the sample points, which
    keeps large corpora cheap.  Residuals are coefficient-wise (per momentum
    monomial) relative errors, maximised over the sample points.
    """
    dom = domain.with_momenta(S.coords)
    Sm = S if S.order == order else Morphism(S.coords, S.ops[: order + 1], order, S.name)
    prepared: dict[int, tuple] = {}

    def prepare(f):
        key = id(f)
        if key not in prepared:
            lifted = PhaseFunction.lift(f, S.coords, order)
            image = Sm.apply(lifted)
            prepared[key] = (f, lifted, star1.words(lifted), image, star2.words(image))
        return prepared[key][1:]

    lhs_all = []
    for pair_id, f, g in corpus:
        f1, fw1, _, _ = prepare(f)
        g1, gw1, _, _ = prepare(g)
        lhs_all.append(Sm.apply(star1.star_words(f1, g1, fw1, gw1)))
    exprs = [v for lhs in lhs_all for v in lhs.components().values()]
    for _, _, _, image, words in prepared.values():
        exprs.extend(v for w in star2.word_images(image, words, order) for v in w.terms.values())
    ctx = NumericContext(dom.sample(exprs), dom.n)

    records = []
    worst = 0.0
    for (pair_id, f, g), lhs in zip(corpus, lhs_all):
        _, _, Sf, fw2 = prepare(f)
        _, _, Sg, gw2 = prepare(g)
        rhs = star2.star_numeric(Sf, Sg, fw2, gw2, ctx)
        per_order = []
        for h in range(order + 1):
            r = numeric_residual(ctx.poly(lhs[h]), rhs[h])
            worst = max(worst, r)
            per_order.append({"hbar_order": h, "residual": r})
        records.append({"pair": pair_id, "orders": per_order})
    return {"morphism": S.name, "order": order, "max_residual": worst, "pairs": records}


def monomial_corpus(coords: Sequence[sp.Symbol], degree: int = 3, coefficients: Sequence[Any] = (1,)) -> list:
    """Momentum monomials of degree <= ``degree`` times each coefficient."""
    coords = tuple(coords)
    n = len(coords)
    out = []
    for d in range(degree + 1):
        for slots in itertools.combinations_with_replacement(range(n), d):
            key = index_from_slots(n, slots)
            for c in coefficients:
                label = f"{c}*" + "*".join(f"p_{coords[s]}" for s in slots) if slots else f"{c}"
                out.append((label, MomentumPoly.monomial(coords, key, c)))
    return out


def corpus_pairs(items: Sequence[tuple[str, MomentumPoly]]) -> list[tuple[str, MomentumPoly, MomentumPoly]]:
    return [(f"{a}|{b}", f, g) for (a, f), (b, g) in itertools.product(items, repeat=2)]
