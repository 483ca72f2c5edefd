"""Symbolic kernel.

Scalars are plain sympy expressions over configuration variables and named
constants.  On top of them this module provides

* :class:`MomentumPoly` -- a polynomial in the momenta ``p_i`` whose
  coefficients are scalars,
* :class:`PhaseFunction` -- a truncated series in hbar with
  :class:`MomentumPoly` coefficients (hbar is a grading index only and never
  appears inside a scalar),
* :class:`SampleDomain` and :func:`equals_numeric` -- the seeded numerical
  equality oracle used in place of symbolic simplification.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import zlib
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import numpy as np
import sympy as sp

from .errors import (
    DivisionByZero,
    DomainExhausted,
    NonPolynomialMomenta,
    TruncationMismatch,
    UnboundVariable,
)

Scalar = sp.Expr

#: Default truncation order of hbar-series.
DEFAULT_ORDER = 3

#: Symbol used for hbar at the text/expression boundary only.
HBAR = sp.Symbol("hbar")

#: Physical constants that evaluate to 1 unless a domain binds them.
NAMED_CONSTANTS: dict[sp.Symbol, complex] = {
    sp.Symbol("m"): 1.0,
    sp.Symbol("e"): 1.0,
    sp.Symbol("eps0"): 1.0,
}

S0 = sp.S.Zero
S1 = sp.S.One


def coordinate(name: str) -> sp.Symbol:
    return sp.Symbol(name)


def momentum(var: sp.Symbol) -> sp.Symbol:
    """Momentum symbol conjugate to the configuration variable ``var``."""
    return sp.Symbol(f"p_{var.name}")


def canon(expr: Any) -> sp.Expr:
    """Canonical form of a scalar.

    sympy already flattens and sorts ``Add``/``Mul`` arguments on
    construction, so structurally equal trees compare equal.
    """
    return sp.sympify(expr)


def differentiate(f: Any, var: sp.Symbol) -> sp.Expr:
    return sp.diff(canon(f), var)


def conjugate(expr: Any) -> sp.Expr:
    """Complex conjugate, valid because every variable is real."""
    return canon(expr).xreplace({sp.I: -sp.I})


def total(terms: Iterable[Any]) -> sp.Expr:
    """Sum a batch of scalars in one ``Add`` (much faster than repeated ``+``)."""
    terms = [t for t in terms if t is not S0]
    if not terms:
        return S0
    if len(terms) == 1:
        return sp.sympify(terms[0])
    return sp.Add(*terms)


# ---------------------------------------------------------------------------
# numerical evaluation

def _sign(z):
    return np.sign(np.real(z)).astype(complex)


_FUNCS = {
    sp.sin: np.sin,
    sp.cos: np.cos,
    sp.tan: np.tan,
    sp.cot: lambda z: 1.0 / np.tan(z),
    sp.sec: lambda z: 1.0 / np.cos(z),
    sp.csc: lambda z: 1.0 / np.sin(z),
    sp.exp: np.exp,
    sp.log: np.log,
    sp.sinh: np.sinh,
    sp.cosh: np.cosh,
    sp.tanh: np.tanh,
    sp.Abs: lambda z: np.abs(z).astype(complex),
    sp.sign: _sign,
}


def _numeric(expr: sp.Basic, env: Mapping[sp.Symbol, Any], memo: dict) -> Any:
    hit = memo.get(expr)
    if hit is not None:
        return hit
    if expr.is_Symbol:
        if expr in env:
            value = env[expr]
        elif expr in NAMED_CONSTANTS:
            value = NAMED_CONSTANTS[expr]
        else:
            raise UnboundVariable(f"no value bound for {expr}")
    elif expr.is_Number or expr.is_NumberSymbol or expr is sp.I:
        value = complex(expr)
    elif expr.is_Add:
        args = [_numeric(a, env, memo) for a in expr.args]
        value = args[0]
        for a in args[1:]:
            value = value + a
    elif expr.is_Mul:
        args = [_numeric(a, env, memo) for a in expr.args]
        value = args[0]
        for a in args[1:]:
            value = value * a
    elif expr.is_Pow:
        base = _numeric(expr.base, env, memo)
        if expr.exp.is_Integer:
            n = int(expr.exp)
            value = base**n if n >= 0 else 1.0 / base ** (-n)
        else:
            value = np.power(base, _numeric(expr.exp, env, memo))
    elif expr.func in _FUNCS:
        value = _FUNCS[expr.func](_numeric(expr.args[0], env, memo))
    else:
        raise TypeError(f"cannot evaluate node {expr.func.__name__}")
    memo[expr] = value
    return value


@functools.lru_cache(maxsize=1 << 18)
def _singular_of(node: sp.Basic) -> frozenset:
    if node.is_Atom:
        return frozenset()
    own = set()
    if node.is_Pow and node.exp.is_Number and node.exp < 0:
        own.add(node.base)
    elif node.func in (sp.tan, sp.sec):
        own.add(sp.cos(node.args[0]))
    elif node.func in (sp.cot, sp.csc):
        own.add(sp.sin(node.args[0]))
    elif node.func is sp.log:
        own.add(node.args[0])
    for arg in node.args:
        own |= _singular_of(arg)
    return frozenset(own)


def singular_factors(exprs: Iterable[Any]) -> set[sp.Expr]:
    """Subexpressions whose vanishing makes one of ``exprs`` singular."""
    out: set[sp.Expr] = set()
    for e in exprs:
        out |= _singular_of(sp.sympify(e))
    return out


def evaluate(f: Any, point: Mapping[Any, Any], eps: float = 1e-12) -> complex:
    """Evaluate a scalar (or :class:`MomentumPoly`) at a single point.

    ``point`` maps symbols (or their names) to numbers.  Named constants that
    are not bound default to 1.
    """
    env = {(sp.Symbol(k) if isinstance(k, str) else k): complex(v) for k, v in point.items()}
    if isinstance(f, MomentumPoly):
        f = f.to_expr()
    f = canon(f)
    memo: dict = {}
    for factor in singular_factors([f]):
        if abs(_numeric(factor, env, memo)) < eps:
            raise DivisionByZero(f"{factor} vanishes at {point}")
    return complex(_numeric(f, env, memo))


# ---------------------------------------------------------------------------
# sampling domain and the numerical equality oracle

@dataclasses.dataclass(frozen=True)
class SampleDomain:
    """Where numerical equality is decided.

    ``intervals`` maps configuration variables and momenta to open real
    intervals; ``constants`` binds named constants.  Sampling is a pure
    function of ``seed`` (each variable draws from its own stream, so adding a
    variable never perturbs the others).
    """

    intervals: Mapping[sp.Symbol, tuple[float, float]]
    constants: Mapping[sp.Symbol, complex] = dataclasses.field(default_factory=dict)
    eps: float = 1e-3
    seed: int = 0
    n: int = 64
    max_batches: int = 40

    def merged(self, other: SampleDomain | None) -> SampleDomain:
        if other is None:
            return self
        intervals = {**other.intervals, **self.intervals}
        constants = {**other.constants, **self.constants}
        return dataclasses.replace(self, intervals=intervals, constants=constants)

    def with_momenta(self, coords: Sequence[sp.Symbol], interval=(-2.0, 2.0)) -> SampleDomain:
        extra = {momentum(x): interval for x in coords if momentum(x) not in self.intervals}
        return dataclasses.replace(self, intervals={**self.intervals, **extra})

    def bind(self, **values: complex) -> SampleDomain:
        constants = {**self.constants, **{sp.Symbol(k): v for k, v in values.items()}}
        return dataclasses.replace(self, constants=constants)

    def reseeded(self, seed: int) -> SampleDomain:
        return dataclasses.replace(self, seed=seed)

    def _key(self) -> tuple:
        return (
            tuple(sorted((s.name, tuple(v)) for s, v in self.intervals.items())),
            tuple(sorted((s.name, complex(v)) for s, v in self.constants.items())),
            self.eps, self.seed, self.n, self.max_batches,
        )

    def sample(self, exprs: Iterable[Any]) -> dict[sp.Symbol, np.ndarray]:
        """``n`` admissible points for every interval variable.

        A point is admissible when every singular factor of every expression
        has modulus at least ``eps`` there.  Points depend only on the domain
        and on the set of singular factors.
        """
        factors = frozenset(singular_factors(exprs))
        key = (self._key(), factors)
        hit = _POINT_CACHE.get(key)
        if hit is None:
            hit = self._draw(sorted(factors, key=sp.default_sort_key))
            if len(_POINT_CACHE) > 256:
                _POINT_CACHE.clear()
            _POINT_CACHE[key] = hit
        return dict(hit)

    def _draw(self, factors: list[sp.Expr]) -> dict[sp.Symbol, np.ndarray]:
        variables = sorted(self.intervals, key=lambda s: s.name)
        env: dict[sp.Symbol, Any] = {s: complex(v) for s, v in self.constants.items()}
        rngs = {s: np.random.default_rng([self.seed, zlib.crc32(s.name.encode())]) for s in variables}
        batch = 4 * self.n
        kept: dict[sp.Symbol, list[np.ndarray]] = {s: [] for s in variables}
        count = 0
        for _ in range(self.max_batches):
            cand = dict(env)
            for s in variables:
                lo, hi = self.intervals[s]
                cand[s] = rngs[s].uniform(lo, hi, batch).astype(complex)
            mask = np.ones(batch, dtype=bool)
            memo: dict = {}
            for factor in factors:
                value = np.broadcast_to(_numeric(factor, cand, memo), (batch,))
                mask &= np.isfinite(value) & (np.abs(value) >= self.eps)
            for s in variables:
                kept[s].append(cand[s][mask])
            count += int(mask.sum())
            if count >= self.n:
                break
        if count < self.n:
            raise DomainExhausted(f"only {count} of {self.n} admissible points found")
        points = dict(env)
        for s in variables:
            points[s] = np.concatenate(kept[s])[: self.n]
        return points


_POINT_CACHE: dict = {}


def components(obj: Any) -> dict[Any, sp.Expr]:
    """Flatten a scalar-carrying object into ``{key: scalar}``."""
    if isinstance(obj, (MomentumPoly, PhaseFunction)):
        return obj.components()
    if isinstance(obj, Mapping):
        return dict(obj)
    if isinstance(obj, np.ndarray):
        return {idx: v for idx, v in np.ndenumerate(obj)}
    if hasattr(obj, "components") and callable(obj.components):
        return obj.components()
    return {(): canon(obj)}


def _finite_or_inf(values: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(values), values, np.inf)


def residual(a: Any, b: Any, dom: SampleDomain) -> float:
    """Max over keys and sample points of ``|a-b| / (1 + max(|a|, |b|))``."""
    ca, cb = components(a), components(b)
    keys = sorted(set(ca) | set(cb), key=repr)
    pairs = [(ca.get(k, S0), cb.get(k, S0)) for k in keys]
    pairs = [(x, y) for x, y in pairs if x != y]
    if not pairs:
        return 0.0
    points = dom.sample([e for pair in pairs for e in pair])
    memo: dict = {}
    worst = 0.0
    for x, y in pairs:
        vx = np.broadcast_to(_numeric(x, points, memo), (dom.n,))
        vy = np.broadcast_to(_numeric(y, points, memo), (dom.n,))
        scale = 1.0 + np.maximum(np.abs(vx), np.abs(vy))
        err = _finite_or_inf(np.abs(vx - vy)) / _finite_or_inf(scale)
        err = np.where(np.isnan(err), np.inf, err)
        worst = max(worst, float(np.max(err)))
    return worst


class NumericContext:
    """Memoized evaluation of scalars and momentum polynomials on fixed points.

    A polynomial evaluates to ``{momentum exponent: array over the points}``.
    """

    def __init__(self, points: Mapping[sp.Symbol, Any], n: int):
        self.points = points
        self.n = n
        self.memo: dict = {}
        self._polys: dict[int, tuple[MomentumPoly, dict]] = {}

    def scalar(self, expr: Any) -> np.ndarray:
        if len(self.memo) > 500_000:
            self.memo.clear()
        return np.broadcast_to(_numeric(canon(expr), self.points, self.memo), (self.n,))

    def poly(self, p: MomentumPoly) -> dict[tuple[int, ...], np.ndarray]:
        hit = self._polys.get(id(p))
        if hit is not None and hit[0] is p:
            return hit[1]
        out = {k: self.scalar(v) for k, v in p.terms.items()}
        self._polys[id(p)] = (p, out)
        return out


def numeric_product(a: Mapping, b: Mapping, scale: complex, into: dict) -> None:
    """Accumulate ``scale * a * b`` for numeric momentum polynomials into ``into``."""
    for ka, va in a.items():
        for kb, vb in b.items():
            key = _key_add(ka, kb)
            term = scale * va * vb
            if key in into:
                into[key] = into[key] + term
            else:
                into[key] = term


def numeric_residual(a: Mapping, b: Mapping) -> float:
    """Coefficient-wise relative residual of two numeric polynomials."""
    worst = 0.0
    for k in set(a) | set(b):
        va = a.get(k, 0.0)
        vb = b.get(k, 0.0)
        scale = 1.0 + np.maximum(np.abs(va), np.abs(vb))
        err = _finite_or_inf(np.abs(np.asarray(va) - vb)) / _finite_or_inf(scale)
        err = np.where(np.isnan(err), np.inf, err)
        worst = max(worst, float(np.max(err)))
    return worst


def equals_numeric(a: Any, b: Any, dom: SampleDomain, tol: float = 1e-9) -> bool:
    """Seeded numerical equality of scalars, momentum polynomials or series.

    Structured objects are compared key by key (monomial, hbar order, ...),
    which is stricter than comparing them as functions of the momenta.
    """
    return residual(a, b, dom) <= tol


# ---------------------------------------------------------------------------
# momentum polynomials

def _key_add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def _same_chart(a: MomentumPoly, b: MomentumPoly) -> None:
    if a.coords != b.coords:
        raise TruncationMismatch(f"chart mismatch: {a.coords} vs {b.coords}")


class MomentumPoly:
    """Finitely supported map ``momentum exponent vector -> scalar``.

    Immutable: every operation returns a new instance.  Structurally zero
    coefficients are dropped on construction.
    """

    __slots__ = ("coords", "terms")

    def __init__(self, coords: Sequence[sp.Symbol], terms: Mapping[tuple[int, ...], Any] | None = None):
        self.coords = tuple(coords)
        clean = {}
        n = len(self.coords)
        for key, value in (terms or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != n:
                raise ValueError(f"exponent {key} does not match chart of dimension {n}")
            value = sp.sympify(value)
            if value != 0:
                clean[key] = value
        self.terms = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, coords) -> MomentumPoly:
        return cls(coords)

    @classmethod
    def constant(cls, coords, c) -> MomentumPoly:
        return cls(coords, {(0,) * len(coords): c})

    @classmethod
    def monomial(cls, coords, exponents, coeff=1) -> MomentumPoly:
        return cls(coords, {tuple(exponents): coeff})

    @classmethod
    def momentum(cls, coords, i: int) -> MomentumPoly:
        key = [0] * len(coords)
        key[i] = 1
        return cls(coords, {tuple(key): 1})

    @classmethod
    def position(cls, coords, i: int) -> MomentumPoly:
        return cls.constant(coords, coords[i])

    @classmethod
    def from_expr(cls, expr: Any, coords: Sequence[sp.Symbol]) -> MomentumPoly:
        """Read an expression polynomial in ``p_<coord>`` symbols."""
        coords = tuple(coords)
        expr = canon(expr)
        if not coords:
            return cls(coords, {(): expr})
        ps = [momentum(x) for x in coords]
        if not (expr.free_symbols & set(ps)):
            return cls.constant(coords, expr)
        try:
            poly = sp.Poly(expr, *ps)
        except sp.PolynomialError as exc:
            raise NonPolynomialMomenta(str(exc)) from exc
        return cls(coords, {k: v for k, v in poly.terms()})

    # -- structure --------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponents) -> sp.Expr:
        return self.terms.get(tuple(exponents), S0)

    def homogeneous(self, m: int) -> MomentumPoly:
        return MomentumPoly(self.coords, {k: v for k, v in self.terms.items() if sum(k) == m})

    def components(self) -> dict:
        return dict(self.terms)

    def map(self, fn) -> MomentumPoly:
        return MomentumPoly(self.coords, {k: fn(v) for k, v in self.terms.items()})

    def to_expr(self) -> sp.Expr:
        ps = [momentum(x) for x in self.coords]
        return total(v * sp.Mul(*[p**e for p, e in zip(ps, k)]) for k, v in self.terms.items())

    def free_symbols(self) -> set:
        out = set()
        for v in self.terms.values():
            out |= v.free_symbols
        return out

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> MomentumPoly:
        if isinstance(other, MomentumPoly):
            _same_chart(self, other)
            return other
        return MomentumPoly.constant(self.coords, other)

    def __add__(self, other) -> MomentumPoly:
        return poly_sum([self, self._coerce(other)])

    __radd__ = __add__

    def __neg__(self) -> MomentumPoly:
        return self.map(lambda v: -v)

    def __sub__(self, other) -> MomentumPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> MomentumPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> MomentumPoly:
        if not isinstance(other, MomentumPoly):
            c = sp.sympify(other)
            return self.map(lambda v: c * v)
        _same_chart(self, other)
        return self.mul(other)

    __rmul__ = __mul__

    def mul(self, other: MomentumPoly, scale: Any = 1) -> MomentumPoly:
        acc: dict = defaultdict(list)
        scale = sp.sympify(scale)
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                acc[_key_add(ka, kb)].append(scale * va * vb)
        return MomentumPoly(self.coords, {k: total(v) for k, v in acc.items()})

    def __pow__(self, n: int) -> MomentumPoly:
        result = MomentumPoly.constant(self.coords, 1)
        for _ in range(n):
            result = result.mul(self)
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentumPoly):
            return NotImplemented
        return self.coords == other.coords and self.terms == other.terms

    def __hash__(self):
        return hash((self.coords, frozenset(self.terms.items())))

    # -- calculus ---------------------------------------------------------
    def diff_x(self, i: int) -> MomentumPoly:
        x = self.coords[i]
        return MomentumPoly(self.coords, {k: sp.diff(v, x) for k, v in self.terms.items()})

    def diff_p(self, i: int) -> MomentumPoly:
        out = {}
        for k, v in self.terms.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                out[tuple(kk)] = k[i] * v
        return MomentumPoly(self.coords, out)

    def diff(self, var: sp.Symbol) -> MomentumPoly:
        if var in self.coords:
            return self.diff_x(self.coords.index(var))
        for i, x in enumerate(self.coords):
            if momentum(x) == var:
                return self.diff_p(i)
        return MomentumPoly(self.coords, {k: sp.diff(v, var) for k, v in self.terms.items()})

    def conjugate(self) -> MomentumPoly:
        return self.map(conjugate)

    def evaluate(self, point: Mapping[Any, Any]) -> complex:
        return evaluate(self.to_expr(), point)

    def __repr__(self) -> str:
        return f"MomentumPoly({self.to_expr()})"


def poly_sum(polys: Iterable[MomentumPoly], coords=None) -> MomentumPoly:
    """Sum many momentum polynomials with one ``Add`` per monomial."""
    acc: dict = defaultdict(list)
    for p in polys:
        if coords is None:
            coords = p.coords
        elif p.coords != coords:
            raise TruncationMismatch(f"chart mismatch: {p.coords} vs {coords}")
        for k, v in p.terms.items():
            acc[k].append(v)
    if coords is None:
        raise ValueError("cannot infer the chart of an empty sum")
    return MomentumPoly(coords, {k: total(v) for k, v in acc.items()})


def poisson_bracket(f: MomentumPoly, g: MomentumPoly) -> MomentumPoly:
    """Canonical Poisson bracket ``sum_k f_{,x^k} g_{,p_k} - f_{,p_k} g_{,x^k}``."""
    _same_chart(f, g)
    parts = []
    for k in range(f.dim):
        parts.append(f.diff_x(k).mul(g.diff_p(k)))
        parts.append(f.diff_p(k).mul(g.diff_x(k), scale=-1))
    return poly_sum(parts, f.coords)


# ---------------------------------------------------------------------------
# truncated hbar series

class PhaseFunction:
    """Element of ``C^inf(M)[[hbar]]`` truncated after ``hbar**order``.

    ``coeffs[k]`` is the :class:`MomentumPoly` multiplying ``hbar**k``.
    Anything above ``order`` is discarded on construction and by every
    arithmetic operation.
    """

    __slots__ = ("coords", "order", "coeffs")

    def __init__(self, coords: Sequence[sp.Symbol], coeffs: Sequence[Any], order: int | None = None):
        self.coords = tuple(coords)
        if order is None:
            order = max(len(coeffs) - 1, 0)
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        self.order = order
        out = []
        for k in range(order + 1):
            c = coeffs[k] if k < len(coeffs) else MomentumPoly.zero(self.coords)
            if not isinstance(c, MomentumPoly):
                c = MomentumPoly.from_expr(c, self.coords)
            elif c.coords != self.coords:
                raise TruncationMismatch(f"chart mismatch: {c.coords} vs {self.coords}")
            out.append(c)
        self.coeffs = tuple(out)

    @classmethod
    def lift(cls, f: Any, coords=None, order: int = DEFAULT_ORDER) -> PhaseFunction:
        """Classical observable (no hbar corrections) as a series."""
        if isinstance(f, PhaseFunction):
            return f
        if isinstance(f, MomentumPoly):
            return cls(f.coords, [f], order)
        return cls(coords, [MomentumPoly.from_expr(f, coords)], order)

    @classmethod
    def from_expr(cls, expr: Any, coords: Sequence[sp.Symbol], order: int = DEFAULT_ORDER) -> PhaseFunction:
        """Split an expression polynomial in :data:`HBAR` into graded parts."""
        expr = canon(expr)
        if HBAR not in expr.free_symbols:
            return cls(coords, [MomentumPoly.from_expr(expr, coords)], order)
        try:
            poly = sp.Poly(expr, HBAR)
        except sp.PolynomialError as exc:
            raise NonPolynomialMomenta(f"not polynomial in hbar: {exc}") from exc
        coeffs = [S0] * (order + 1)
        for (k,), v in poly.terms():
            if k <= order:
                coeffs[k] = v
        return cls(coords, [MomentumPoly.from_expr(c, coords) for c in coeffs], order)

    @classmethod
    def zero(cls, coords, order: int = DEFAULT_ORDER) -> PhaseFunction:
        return cls(coords, [], order)

    def __getitem__(self, k: int) -> MomentumPoly:
        return self.coeffs[k]

    @property
    def dim(self) -> int:
        return len(self.coords)

    def components(self) -> dict:
        return {(k,) + key: v for k, c in enumerate(self.coeffs) for key, v in c.terms.items()}

    def truncate(self, order: int) -> PhaseFunction:
        return PhaseFunction(self.coords, self.coeffs[: order + 1], order)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def to_expr(self) -> sp.Expr:
        return total(HBAR**k * c.to_expr() for k, c in enumerate(self.coeffs))

    def _check(self, other: PhaseFunction) -> None:
        if self.order != other.order:
            raise TruncationMismatch(f"truncation orders differ: {self.order} vs {other.order}")
        if self.coords != other.coords:
            raise TruncationMismatch(f"chart mismatch: {self.coords} vs {other.coords}")

    def _coerce(self, other) -> PhaseFunction:
        if isinstance(other, PhaseFunction):
            self._check(other)
            return other
        return PhaseFunction.lift(MomentumPoly.constant(self.coords, other) if not isinstance(other, MomentumPoly) else other,
                                  order=self.order)

    def __add__(self, other) -> PhaseFunction:
        other = self._coerce(other)
        return PhaseFunction(self.coords, [a + b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    __radd__ = __add__

    def __neg__(self) -> PhaseFunction:
        return PhaseFunction(self.coords, [-c for c in self.coeffs], self.order)

    def __sub__(self, other) -> PhaseFunction:
        return self + (-self._coerce(other))

    def __mul__(self, other) -> PhaseFunction:
        if not isinstance(other, (PhaseFunction, MomentumPoly)):
            return self.scale(other)
        other = self._coerce(other)
        out = []
        for k in range(self.order + 1):
            out.append(poly_sum((self.coeffs[j].mul(other.coeffs[k - j]) for j in range(k + 1)), self.coords))
        return PhaseFunction(self.coords, out, self.order)

    __rmul__ = __mul__

    def scale(self, c: Any) -> PhaseFunction:
        c = sp.sympify(c)
        return PhaseFunction(self.coords, [p * c for p in self.coeffs], self.order)

    def shift(self, k: int) -> PhaseFunction:
        """Multiply by ``hbar**k`` (negative ``k`` divides, dropping the order)."""
        if k >= 0:
            coeffs = [MomentumPoly.zero(self.coords)] * k + list(self.coeffs)
            return PhaseFunction(self.coords, coeffs, self.order)
        for c in self.coeffs[:-k]:
            if not c.is_zero():
                raise ValueError(f"series is not divisible by hbar**{-k}")
        return PhaseFunction(self.coords, self.coeffs[-k:], self.order + k)

    def conjugate(self) -> PhaseFunction:
        return PhaseFunction(self.coords, [c.conjugate() for c in self.coeffs], self.order)

    def map(self, fn) -> PhaseFunction:
        return PhaseFunction(self.coords, [fn(c) for c in self.coeffs], self.order)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhaseFunction):
            return NotImplemented
        return self.coords == other.coords and self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.coords, self.order, self.coeffs))

    def __repr__(self) -> str:
        return f"PhaseFunction(order={self.order}, {self.to_expr()})"


def series_add(a: PhaseFunction, b: PhaseFunction) -> PhaseFunction:
    return a + b


def series_mul(a: PhaseFunction, b: PhaseFunction) -> PhaseFunction:
    return a * b


def series_scale(a: PhaseFunction, c: Any) -> PhaseFunction:
    return a.scale(c)


def multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out
