"""Differential operators and vector fields on phase space ``(x, p)``.

Multi-indices have length ``2N``: the first ``N`` slots count ``d/dx^i``, the
last ``N`` count ``d/dp_i``.  Coefficients sit to the left of derivatives.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import sympy as sp

from .core import MomentumPoly, canon, poly_sum
from .errors import TruncationMismatch

MultiIndex = tuple[int, ...]


def unit(n: int, i: int) -> MultiIndex:
    out = [0] * n
    out[i] = 1
    return tuple(out)


def add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def sub_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def sub_indices(a: MultiIndex) -> Iterable[MultiIndex]:
    return itertools.product(*(range(k + 1) for k in a))


def binom_index(a: MultiIndex, b: MultiIndex) -> int:
    return math.prod(math.comb(x, y) for x, y in zip(a, b))


def index_from_slots(n: int, slots: Iterable[int]) -> MultiIndex:
    out = [0] * n
    for s in slots:
        out[s] += 1
    return tuple(out)


class DerivativeCache:
    """Memoized ``d^mu F`` for one momentum polynomial."""

    def __init__(self, F: MomentumPoly):
        self.F = F
        self.n = F.dim
        self.cache: dict[MultiIndex, MomentumPoly] = {(0,) * (2 * self.n): F}

    def __getitem__(self, mu: MultiIndex) -> MomentumPoly:
        hit = self.cache.get(mu)
        if hit is not None:
            return hit
        s = next(i for i, k in enumerate(mu) if k)
        prev = self[sub_index(mu, unit(2 * self.n, s))]
        out = prev.diff_x(s) if s < self.n else prev.diff_p(s - self.n)
        self.cache[mu] = out
        return out


class PhaseDiffOp:
    """``sum_mu c_mu(x, p) d^mu`` with momentum-polynomial coefficients."""

    __slots__ = ("coords", "terms")

    def __init__(self, coords: Sequence[sp.Symbol], terms: Mapping[MultiIndex, MomentumPoly] | None = None):
        self.coords = tuple(coords)
        clean = {}
        for mu, c in (terms or {}).items():
            if not isinstance(c, MomentumPoly):
                c = MomentumPoly.from_expr(c, self.coords)
            if len(mu) != 2 * len(self.coords):
                raise ValueError(f"multi-index {mu} has the wrong length")
            if not c.is_zero():
                clean[tuple(mu)] = c
        self.terms = clean

    @classmethod
    def identity(cls, coords) -> PhaseDiffOp:
        return cls(coords, {(0,) * (2 * len(coords)): MomentumPoly.constant(coords, 1)})

    @classmethod
    def zero(cls, coords) -> PhaseDiffOp:
        return cls(coords)

    @classmethod
    def from_terms(cls, coords, items: Iterable[tuple[MultiIndex, MomentumPoly]]) -> PhaseDiffOp:
        """Collect ``(mu, coefficient)`` pairs, summing repeated indices."""
        acc: dict = defaultdict(list)
        for mu, c in items:
            acc[tuple(mu)].append(c)
        return cls(coords, {mu: poly_sum(cs, tuple(coords)) for mu, cs in acc.items()})

    @property
    def dim(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((sum(mu) for mu in self.terms), default=-1)

    def apply(self, F: MomentumPoly | DerivativeCache) -> MomentumPoly:
        cache = F if isinstance(F, DerivativeCache) else DerivativeCache(F)
        return poly_sum((c.mul(cache[mu]) for mu, c in self.terms.items()), self.coords)

    def __add__(self, other: PhaseDiffOp) -> PhaseDiffOp:
        self._check(other)
        return PhaseDiffOp.from_terms(self.coords, itertools.chain(self.terms.items(), other.terms.items()))

    def __neg__(self) -> PhaseDiffOp:
        return PhaseDiffOp(self.coords, {mu: -c for mu, c in self.terms.items()})

    def __sub__(self, other: PhaseDiffOp) -> PhaseDiffOp:
        return self + (-other)

    def scale(self, c: Any) -> PhaseDiffOp:
        c = canon(c)
        return PhaseDiffOp(self.coords, {mu: v * c for mu, v in self.terms.items()})

    def compose(self, other: PhaseDiffOp) -> PhaseDiffOp:
        """``self o other`` via the Leibniz rule."""
        self._check(other)
        items = []
        caches = {nu: DerivativeCache(b) for nu, b in other.terms.items()}
        for mu, a in self.terms.items():
            for lam in sub_indices(mu):
                w = binom_index(mu, lam)
                rest = sub_index(mu, lam)
                for nu, cache in caches.items():
                    db = cache[lam]
                    if not db.is_zero():
                        items.append((add_index(rest, nu), a.mul(db, scale=w)))
        return PhaseDiffOp.from_terms(self.coords, items)

    __matmul__ = compose

    def _check(self, other: PhaseDiffOp) -> None:
        if self.coords != other.coords:
            raise TruncationMismatch(f"chart mismatch: {self.coords} vs {other.coords}")

    def components(self) -> dict:
        return {mu + key: v for mu, c in self.terms.items() for key, v in c.terms.items()}

    def __repr__(self) -> str:
        return f"PhaseDiffOp({ {mu: c.to_expr() for mu, c in self.terms.items()} })"


class PhaseVectorField:
    """``a^i d/dx^i + b_i d/dp_i``."""

    __slots__ = ("coords", "a", "b", "_coordinate_slot")

    def __init__(self, coords: Sequence[sp.Symbol], a: Sequence[Any], b: Sequence[Any]):
        self.coords = tuple(coords)
        n = len(self.coords)
        if len(a) != n or len(b) != n:
            raise ValueError("vector field components do not match the chart")

        def lift(c):
            return c if isinstance(c, MomentumPoly) else MomentumPoly.from_expr(c, self.coords)

        self.a = tuple(lift(c) for c in a)
        self.b = tuple(lift(c) for c in b)
        self._coordinate_slot = self._detect_coordinate_slot()

    @classmethod
    def coordinate(cls, coords, slot: int) -> PhaseVectorField:
        """``d/dx^slot`` for ``slot < N``, else ``d/dp_(slot - N)``."""
        n = len(coords)
        comps = [0] * (2 * n)
        comps[slot] = 1
        return cls(coords, comps[:n], comps[n:])

    def _detect_coordinate_slot(self) -> int | None:
        comps = self.a + self.b
        nonzero = [i for i, c in enumerate(comps) if not c.is_zero()]
        if len(nonzero) == 1:
            c = comps[nonzero[0]]
            if c.terms == {(0,) * len(self.coords): sp.S.One}:
                return nonzero[0]
        return None

    @property
    def dim(self) -> int:
        return len(self.coords)

    def apply(self, F: MomentumPoly) -> MomentumPoly:
        n = self.dim
        s = self._coordinate_slot
        if s is not None:
            return F.diff_x(s) if s < n else F.diff_p(s - n)
        parts = []
        for i in range(n):
            if not self.a[i].is_zero():
                parts.append(self.a[i].mul(F.diff_x(i)))
            if not self.b[i].is_zero():
                parts.append(self.b[i].mul(F.diff_p(i)))
        return poly_sum(parts, self.coords) if parts else MomentumPoly.zero(self.coords)

    __call__ = apply

    def as_operator(self) -> PhaseDiffOp:
        n = self.dim
        return PhaseDiffOp(self.coords, {unit(2 * n, s): c for s, c in enumerate(self.a + self.b)})

    def bracket(self, other: PhaseVectorField) -> PhaseVectorField:
        """Lie bracket ``[self, other]``."""
        a = [self.apply(other.a[i]) - other.apply(self.a[i]) for i in range(self.dim)]
        b = [self.apply(other.b[i]) - other.apply(self.b[i]) for i in range(self.dim)]
        return PhaseVectorField(self.coords, a, b)

    def components(self) -> dict:
        out = {}
        for s, c in enumerate(self.a + self.b):
            out.update({(s,) + k: v for k, v in c.terms.items()})
        return out

    def __repr__(self) -> str:
        parts = [f"({c.to_expr()})*d_{x}" for c, x in zip(self.a, self.coords) if not c.is_zero()]
        parts += [f"({c.to_expr()})*d_p_{x}" for c, x in zip(self.b, self.coords) if not c.is_zero()]
        return "PhaseVectorField(" + " + ".join(parts or ["0"]) + ")"


class FieldWordCache:
    """Memoized ``Z^alpha F`` for a family of commuting vector fields ``Z``."""

    def __init__(self, fields: Sequence[PhaseVectorField], F: MomentumPoly):
        self.fields = tuple(fields)
        self.cache: dict[MultiIndex, MomentumPoly] = {(0,) * len(self.fields): F}

    def __getitem__(self, alpha: MultiIndex) -> MomentumPoly:
        hit = self.cache.get(alpha)
        if hit is not None:
            return hit
        s = next(i for i, k in enumerate(alpha) if k)
        out = self.fields[s].apply(self[sub_index(alpha, unit(len(self.fields), s))])
        self.cache[alpha] = out
        return out
