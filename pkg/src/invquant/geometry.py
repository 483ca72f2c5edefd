"""Point transformations and the Riemannian data they induce.

Index conventions: ``J[i, j] = d phi^i / d x'^j``, ``H[i][j][k] = d^2 phi^i /
d x'^j d x'^k`` and ``gamma[i, j, k] = Gamma^i_{jk}``.  Tensors produced by
:func:`covariant_derivative` append the new lower index after the existing
ones, so ``K^{ij}_{;k}`` is stored as ``[i, j, k]``.
"""

from __future__ import annotations

import dataclasses
import itertools
from collections.abc import Callable, Sequence
from functools import cached_property
from typing import Any

import numpy as np
import sympy as sp

from .core import (
    S0,
    MomentumPoly,
    SampleDomain,
    canon,
    momentum,
    poisson_bracket,
    total,
    _numeric,
)
from .errors import RankMismatch, SingularJacobian, SingularMetric


def _simplify(e: Any) -> sp.Expr:
    e = canon(e)
    if e.is_number or e.is_Symbol:
        return e
    return sp.simplify(e)


def _obj_array(shape: tuple[int, ...], fill: Callable[..., Any]) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    for idx in itertools.product(*(range(n) for n in shape)):
        out[idx] = fill(*idx)
    return out


def _probe_values(expr: sp.Expr, dom: SampleDomain) -> np.ndarray:
    points = dom.sample([expr])
    return np.broadcast_to(_numeric(expr, points, {}), (dom.n,))


# ---------------------------------------------------------------------------
# generic component tensors

def _add_all(items: list) -> Any:
    if not items:
        return S0
    if all(isinstance(x, sp.Basic) for x in items):
        return total(items)
    acc = items[0]
    for x in items[1:]:
        acc = acc + x
    return acc


def _scale(c: sp.Expr, comp: Any) -> Any:
    if c == 0:
        return S0
    if isinstance(comp, sp.Basic):
        return c * comp
    return comp.scale(c)


def _derive(comp: Any, var: sp.Symbol) -> Any:
    if isinstance(comp, sp.Basic):
        return sp.diff(comp, var)
    return comp.derivative(var)


def _is_zero(comp: Any) -> bool:
    if isinstance(comp, sp.Basic):
        return comp == 0
    return comp.is_zero()


@dataclasses.dataclass(frozen=True, eq=False)
class Tensor:
    """Component tensor field with ``up`` contravariant then ``down`` covariant slots.

    Components are scalars, or any object with ``+``, ``scale`` and
    ``derivative`` (configuration operators use this to build operator-valued
    covariant expressions).
    """

    coords: tuple[sp.Symbol, ...]
    comps: np.ndarray
    up: int
    down: int = 0

    def __post_init__(self):
        if self.comps.ndim != self.up + self.down:
            raise RankMismatch(f"{self.comps.ndim} slots for a ({self.up},{self.down}) tensor")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def rank(self) -> int:
        return self.up + self.down

    def __getitem__(self, idx):
        return self.comps[idx]

    def indices(self):
        return itertools.product(range(self.dim), repeat=self.rank)

    def components(self) -> dict:
        out = {}
        for idx in self.indices():
            comp = self.comps[idx]
            if isinstance(comp, sp.Basic):
                out[idx] = comp
            else:
                out.update({idx + k: v for k, v in comp.components().items()})
        return out

    def map(self, fn) -> Tensor:
        return Tensor(self.coords, _obj_array(self.comps.shape, lambda *i: fn(self.comps[i])), self.up, self.down)

    def is_symmetric(self) -> bool:
        for idx in self.indices():
            for perm in itertools.permutations(idx[: self.up]):
                if canon(self.comps[perm + idx[self.up:]] - self.comps[idx]) != 0:
                    return False
        return True

    @classmethod
    def scalar(cls, coords, value) -> Tensor:
        arr = np.empty((), dtype=object)
        arr[()] = value
        return cls(tuple(coords), arr, 0, 0)

    @classmethod
    def from_function(cls, coords, up: int, down: int, fill) -> Tensor:
        n = len(coords)
        return cls(tuple(coords), _obj_array((n,) * (up + down), fill), up, down)


def symmetric_tensor(coords: Sequence[sp.Symbol], rank: int, comps: dict[tuple[int, ...], Any]) -> Tensor:
    """Contravariant symmetric tensor from components on sorted index tuples."""
    def fill(*idx):
        return canon(comps.get(tuple(sorted(idx)), 0))

    return Tensor.from_function(coords, rank, 0, fill)


def covariant_derivative(T: Tensor, gamma: ChristoffelField) -> Tensor:
    """``T^{i..}_{j..;k}`` with the new index appended last."""
    if gamma.dim != T.dim:
        raise RankMismatch(f"connection of dimension {gamma.dim} on a tensor of dimension {T.dim}")
    G = gamma.gamma
    n = T.dim

    def fill(*idx):
        base, k = idx[:-1], idx[-1]
        parts = [_derive(T.comps[base], T.coords[k])]
        for slot in range(T.rank):
            for m in range(n):
                moved = base[:slot] + (m,) + base[slot + 1:]
                if slot < T.up:
                    c = G[base[slot], k, m]
                else:
                    c = -G[m, k, base[slot]]
                if c != 0 and not _is_zero(T.comps[moved]):
                    parts.append(_scale(c, T.comps[moved]))
        return _add_all([p for p in parts if not _is_zero(p)])

    return Tensor(T.coords, _obj_array((n,) * (T.rank + 1), fill), T.up, T.down + 1)


def contract(T: Tensor, upper: int, lower: int) -> Tensor:
    """Trace the ``upper``-th contravariant slot against the ``lower``-th covariant slot."""
    if not (0 <= upper < T.up and 0 <= lower < T.down):
        raise RankMismatch(f"cannot contract slots ({upper}, {lower}) of a ({T.up},{T.down}) tensor")
    a, b = upper, T.up + lower
    keep = [s for s in range(T.rank) if s not in (a, b)]
    n = T.dim

    def fill(*idx):
        items = []
        for m in range(n):
            full = [0] * T.rank
            for s, v in zip(keep, idx):
                full[s] = v
            full[a] = full[b] = m
            items.append(T.comps[tuple(full)])
        return _add_all([x for x in items if not _is_zero(x)])

    return Tensor(T.coords, _obj_array((n,) * len(keep), fill), T.up - 1, T.down - 1)


def divergence(T: Tensor, gamma: ChristoffelField) -> Tensor:
    """``T^{i...}_{;i}``: differentiate, then trace the first upper slot with the new one."""
    if T.up < 1:
        raise RankMismatch("divergence needs a contravariant slot")
    return contract(covariant_derivative(T, gamma), 0, T.down)


def lower_index(T: Tensor, g: MetricField, slot: int = 0) -> Tensor:
    n = T.dim

    def fill(*idx):
        rest = idx[1:]
        items = []
        for m in range(n):
            full = list(rest[: T.up - 1])
            full.insert(slot, m)
            items.append(g.g[idx[0], m] * T.comps[tuple(full) + tuple(rest[T.up - 1:])])
        return total(items)

    return Tensor(T.coords, _obj_array((n,) * T.rank, fill), T.up - 1, T.down + 1)


def random_symmetric_tensor(coords: Sequence[sp.Symbol], rank: int, seed: int, terms: int = 3) -> Tensor:
    """Seeded random symmetric tensor with small rational coefficients.

    Each independent component is a combination of low-degree monomials and
    sines/cosines of the coordinates.
    """
    rng = np.random.default_rng([seed, rank, len(coords)])
    coords = tuple(coords)
    atoms = [sp.S.One, *coords, *(x**2 for x in coords), *(sp.cos(x) for x in coords), *(sp.sin(x) for x in coords)]
    comps = {}
    for idx in itertools.combinations_with_replacement(range(len(coords)), rank):
        picks = rng.choice(len(atoms), size=terms, replace=False)
        coeffs = rng.integers(-4, 5, size=terms)
        comps[idx] = total(sp.Rational(int(c), 2) * atoms[int(a)] for c, a in zip(coeffs, picks))
    return symmetric_tensor(coords, rank, comps)


# ---------------------------------------------------------------------------
# metric and connection

@dataclasses.dataclass(frozen=True, eq=False)
class MetricField:
    coords: tuple[sp.Symbol, ...]
    g: np.ndarray
    domain: SampleDomain | None = None
    name: str = ""

    def __post_init__(self):
        n = len(self.coords)
        if self.g.shape != (n, n):
            raise RankMismatch(f"metric of shape {self.g.shape} on {n} coordinates")
        for i, j in itertools.combinations(range(n), 2):
            if canon(self.g[i, j] - self.g[j, i]) != 0:
                raise SingularMetric(f"metric is not symmetric in ({i},{j})")
        if self.det == 0:
            raise SingularMetric("metric determinant vanishes identically")

    @classmethod
    def from_rows(cls, coords, rows, domain=None, name="") -> MetricField:
        n = len(coords)
        return cls(tuple(coords), _obj_array((n, n), lambda i, j: canon(rows[i][j])), domain, name)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @cached_property
    def matrix(self) -> sp.Matrix:
        return sp.Matrix(self.g.tolist())

    @cached_property
    def det(self) -> sp.Expr:
        return _simplify(self.matrix.det())

    @cached_property
    def inverse(self) -> np.ndarray:
        adj = self.matrix.adjugate()
        n = self.dim
        return _obj_array((n, n), lambda i, j: _simplify(adj[i, j] / self.det))

    @cached_property
    def det_sign(self) -> int:
        """Sign of ``det g`` on the domain (must be constant there)."""
        if self.det.is_number:
            return 1 if complex(self.det).real > 0 else -1
        if self.domain is None:
            raise SingularMetric("a domain is needed to fix the sign of det g")
        vals = _probe_values(self.det, self.domain).real
        if np.all(vals > 0):
            return 1
        if np.all(vals < 0):
            return -1
        raise SingularMetric("det g changes sign on the domain")

    @cached_property
    def volume_density(self) -> sp.Expr:
        return sp.sqrt(self.det_sign * self.det)

    def log_density_gradient(self, j: int) -> sp.Expr:
        """``d_j ln sqrt|det g|``, written without the square root."""
        return _simplify(sp.diff(self.det, self.coords[j]) / (2 * self.det))

    def as_tensor(self, contravariant: bool = True) -> Tensor:
        arr = self.inverse if contravariant else self.g
        return Tensor(self.coords, arr.copy(), 2 if contravariant else 0, 0 if contravariant else 2)

    def components(self) -> dict:
        return {idx: self.g[idx] for idx in itertools.product(range(self.dim), repeat=2)}


@dataclasses.dataclass(frozen=True, eq=False)
class ChristoffelField:
    coords: tuple[sp.Symbol, ...]
    gamma: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __getitem__(self, idx) -> sp.Expr:
        return self.gamma[idx]

    def contracted(self, j: int) -> sp.Expr:
        """``Gamma^k_{jk}``."""
        return total(self.gamma[k, j, k] for k in range(self.dim))

    def components(self) -> dict:
        return {idx: self.gamma[idx] for idx in itertools.product(range(self.dim), repeat=3)}

    def is_torsion_free(self) -> bool:
        n = self.dim
        return all(canon(self.gamma[i, j, k] - self.gamma[i, k, j]) == 0
                   for i in range(n) for j in range(n) for k in range(n))

    def derivative(self, i: int, j: int, k: int, l: int) -> sp.Expr:
        """``d_l Gamma^i_{jk}``."""
        return sp.diff(self.gamma[i, j, k], self.coords[l])

    @classmethod
    def flat(cls, coords) -> ChristoffelField:
        n = len(coords)
        return cls(tuple(coords), _obj_array((n, n, n), lambda *_: S0))


def christoffel_from_metric(g: MetricField) -> ChristoffelField:
    """Levi-Civita connection of ``g``."""
    n, x, ginv = g.dim, g.coords, g.inverse
    dg = _obj_array((n, n, n), lambda a, b, c: sp.diff(g.g[a, b], x[c]))

    def fill(i, j, k):
        return _simplify(total(ginv[i, l] * (dg[l, k, j] + dg[l, j, k] - dg[j, k, l]) for l in range(n)) / 2)

    return ChristoffelField(g.coords, _obj_array((n, n, n), fill))


@dataclasses.dataclass(frozen=True, eq=False)
class CurvatureData:
    coords: tuple[sp.Symbol, ...]
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: sp.Expr

    def components(self) -> dict:
        out = {("R",): self.scalar}
        out.update({("Ric",) + idx: v for idx, v in np.ndenumerate(self.ricci)})
        out.update({("Riem",) + idx: v for idx, v in np.ndenumerate(self.riemann)})
        return out


def curvature(gamma: ChristoffelField, g: MetricField) -> CurvatureData:
    n, G = gamma.dim, gamma.gamma

    def riem(i, j, k, l):
        return _simplify(total([
            gamma.derivative(i, j, l, k),
            -gamma.derivative(i, j, k, l),
            *(G[i, k, m] * G[m, j, l] - G[i, l, m] * G[m, j, k] for m in range(n)),
        ]))

    R = _obj_array((n, n, n, n), riem)
    ric = _obj_array((n, n), lambda j, k: _simplify(total(R[i, j, i, k] for i in range(n))))
    scal = _simplify(total(g.inverse[j, k] * ric[j, k] for j in range(n) for k in range(n)))
    return CurvatureData(gamma.coords, R, ric, scal)


# ---------------------------------------------------------------------------
# point transformations

@dataclasses.dataclass(frozen=True, eq=False)
class PointTransformation:
    """``x = phi(x')`` from curvilinear ``coords`` (x') to flat ``targets`` (x)."""

    name: str
    coords: tuple[sp.Symbol, ...]
    targets: tuple[sp.Symbol, ...]
    phi: tuple[sp.Expr, ...]
    domain: SampleDomain
    signature: tuple[int, int] | None = None

    def __post_init__(self):
        n = len(self.coords)
        if len(self.phi) != n or len(self.targets) != n:
            raise RankMismatch(f"{self.name}: {len(self.phi)} components for {n} coordinates")
        object.__setattr__(self, "phi", tuple(canon(f) for f in self.phi))
        if self.signature is None:
            object.__setattr__(self, "signature", (n, 0))
        if sum(self.signature) != n:
            raise RankMismatch(f"{self.name}: signature {self.signature} does not match dimension {n}")
        if self.det_jacobian == 0:
            raise SingularJacobian(f"{self.name}: Jacobian determinant vanishes identically")
        if not self.det_jacobian.is_number:
            vals = np.abs(_probe_values(self.det_jacobian, self.domain))
            if not np.all(vals >= self.domain.eps):
                raise SingularJacobian(f"{self.name}: Jacobian degenerates on the sample domain")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @cached_property
    def jacobian(self) -> np.ndarray:
        n = self.dim
        return _obj_array((n, n), lambda i, j: sp.diff(self.phi[i], self.coords[j]))

    @cached_property
    def det_jacobian(self) -> sp.Expr:
        return _simplify(sp.Matrix(self.jacobian.tolist()).det())

    @cached_property
    def inverse_jacobian(self) -> np.ndarray:
        adj = sp.Matrix(self.jacobian.tolist()).adjugate()
        n = self.dim
        return _obj_array((n, n), lambda i, j: _simplify(adj[i, j] / self.det_jacobian))

    @cached_property
    def hessian(self) -> np.ndarray:
        n = self.dim
        J = self.jacobian
        return _obj_array((n, n, n), lambda i, j, k: sp.diff(J[i, j], self.coords[k]))

    @cached_property
    def eta(self) -> tuple[int, ...]:
        r, s = self.signature
        return (1,) * r + (-1,) * s

    @cached_property
    def metric(self) -> MetricField:
        """Pullback ``J^T eta J`` of the flat target metric."""
        n, J = self.dim, self.jacobian

        def fill(i, j):
            return _simplify(total(self.eta[a] * J[a, i] * J[a, j] for a in range(n)))

        return MetricField(self.coords, _obj_array((n, n), fill), self.domain, self.name)

    @cached_property
    def christoffel(self) -> ChristoffelField:
        """``Gamma^i_{jk} = [J^{-1}]^i_r H^r_{jk}``."""
        n, Jinv, H = self.dim, self.inverse_jacobian, self.hessian

        def fill(i, j, k):
            return _simplify(total(Jinv[i, r] * H[r, j, k] for r in range(n)))

        return ChristoffelField(self.coords, _obj_array((n, n, n), fill))

    def pull_back(self, expr: Any) -> sp.Expr:
        """Scalar on the flat chart rewritten in the curvilinear chart."""
        return canon(expr).xreplace(dict(zip(self.targets, self.phi)))

    @cached_property
    def momentum_map(self) -> tuple[MomentumPoly, ...]:
        """Flat momenta ``p_i = [J^{-1}]^j_i p'_j`` as polynomials in ``p'``."""
        n, Jinv = self.dim, self.inverse_jacobian
        ps = [MomentumPoly.momentum(self.coords, j) for j in range(n)]
        return tuple(sum((ps[j] * Jinv[j, i] for j in range(n)), MomentumPoly.zero(self.coords)) for i in range(n))

    def pull_back_observable(self, expr: Any) -> MomentumPoly:
        """Phase-space polynomial in ``(targets, p_targets)`` moved to ``(coords, p')``."""
        expr = self.pull_back(expr)
        flat_ps = [momentum(t) for t in self.targets]
        poly = MomentumPoly.from_expr(expr, self.targets) if set(flat_ps) & expr.free_symbols else None
        if poly is None:
            return MomentumPoly.constant(self.coords, expr)
        out = MomentumPoly.zero(self.coords)
        for key, c in poly.terms.items():
            term = MomentumPoly.constant(self.coords, self.pull_back(c))
            for i, e in enumerate(key):
                term = term * self.momentum_map[i] ** e
            out = out + term
        return out

    def bracket_table(self) -> dict[str, MomentumPoly]:
        """Canonical brackets of the induced phase-space coordinates ``(Q, P)``."""
        n = self.dim
        Q = [MomentumPoly.constant(self.coords, f) for f in self.phi]
        P = self.momentum_map
        out = {}
        for i in range(n):
            for j in range(n):
                out[f"Q{i}Q{j}"] = poisson_bracket(Q[i], Q[j])
                out[f"Q{i}P{j}"] = poisson_bracket(Q[i], P[j])
                out[f"P{i}P{j}"] = poisson_bracket(P[i], P[j])
        return out


# ---------------------------------------------------------------------------
# presets

def _sym(names: str) -> tuple[sp.Symbol, ...]:
    return tuple(sp.Symbol(n) for n in names.split())


PI = float(np.pi)


def _domain(intervals: dict[str, tuple[float, float]], seed: int = 0) -> SampleDomain:
    return SampleDomain({sp.Symbol(k): v for k, v in intervals.items()}, seed=seed)


def cartesian(n: int = 3) -> PointTransformation:
    names = ["x", "y", "z"][:n] if n <= 3 else [f"x{i}" for i in range(1, n + 1)]
    xs = tuple(sp.Symbol(s) for s in names)
    targets = tuple(sp.Symbol(s + "0") for s in names)
    return PointTransformation("identity", xs, targets, xs, _domain({s: (-2.0, 2.0) for s in names}))


def polar() -> PointTransformation:
    r, th = _sym("r theta")
    return PointTransformation(
        "polar", (r, th), _sym("x y"), (r * sp.cos(th), r * sp.sin(th)),
        _domain({"r": (0.2, 3.0), "theta": (0.0, 2 * PI)}),
    )


def spherical() -> PointTransformation:
    r, th, ph = _sym("r theta phi")
    return PointTransformation(
        "spherical", (r, th, ph), _sym("x y z"),
        (r * sp.sin(th) * sp.cos(ph), r * sp.sin(th) * sp.sin(ph), r * sp.cos(th)),
        _domain({"r": (0.2, 3.0), "theta": (0.0, PI), "phi": (0.0, 2 * PI)}),
    )


def parabolic() -> PointTransformation:
    """Three-dimensional parabolic coordinates ``(u, v, phi)``."""
    u, v, ph = _sym("u v phi")
    return PointTransformation(
        "parabolic", (u, v, ph), _sym("x y z"),
        (u * v * sp.cos(ph), u * v * sp.sin(ph), (u**2 - v**2) / 2),
        _domain({"u": (0.2, 2.5), "v": (0.2, 2.5), "phi": (0.0, 2 * PI)}),
    )


def inversion() -> PointTransformation:
    """One-dimensional ``x = -1/x'``, inducing ``p = x'^2 p'``."""
    (x,) = _sym("x")
    return PointTransformation("inversion", (x,), _sym("y"), (-1 / x,), _domain({"x": (0.2, 3.0)}))


def unit_sphere_metric() -> MetricField:
    th, ph = _sym("theta phi")
    return MetricField.from_rows(
        (th, ph), [[1, 0], [0, sp.sin(th) ** 2]],
        _domain({"theta": (0.0, PI), "phi": (0.0, 2 * PI)}), "sphere2",
    )


TRANSFORMS: dict[str, Callable[[], PointTransformation]] = {
    "identity": cartesian,
    "polar": polar,
    "spherical": spherical,
    "parabolic": parabolic,
    "inversion": inversion,
}
