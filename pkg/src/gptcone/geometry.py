"""Polyhedral cones in generator (V) and inequality (H) form.

The workhorse is :func:`dd_convert`, a double description implementation that
turns inequality normals into extreme rays.  Because the extreme rays of the
dual of ``cone(R)`` are exactly the irredundant facet normals of ``cone(R)``,
the same routine serves both directions.

Exact cones run on coprime integer vectors, so every DD step is integer
arithmetic; float cones use unit vectors and the global tolerance.

Only pointed, full-dimensional cones are supported.  Anything else raises
:class:`~gptcone.errors.Lineality`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from . import linalg
from .errors import DimensionMismatch, DomainError, Lineality, ZeroVector
from .scalar import all_exact, epsilon, is_exact, sign, to_scalar


# ---------------------------------------------------------------------------
# canonical rays
# ---------------------------------------------------------------------------


def _int_ray(v: Sequence) -> tuple[int, ...]:
    """Coprime integer multiple of an exact vector (positive scaling only)."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        raise ZeroVector("the zero vector does not span a ray")
    return tuple(x // g for x in ints)


def _unit_ray(v: Sequence) -> tuple[float, ...]:
    arr = np.asarray([float(x) for x in v])
    norm = float(np.linalg.norm(arr))
    if norm <= epsilon():
        raise ZeroVector("the zero vector does not span a ray")
    arr = arr / norm
    arr[np.abs(arr) <= epsilon()] = 0.0
    return tuple(float(x) + 0.0 for x in arr)


def canonical_ray(v: Sequence) -> tuple:
    """Unique representative of the ray ``{t*v : t > 0}``.

    Exact vectors become coprime integers (as Fractions); float vectors are
    scaled to unit Euclidean length.  Only positive scalings are used, so a ray
    and its opposite stay distinct.
    """
    v = tuple(to_scalar(x) for x in v)
    if is_exact(v):
        return tuple(Fraction(x) for x in _int_ray(v))
    return _unit_ray(v)


def _close(a: Sequence[float], b: Sequence[float]) -> bool:
    eps = epsilon()
    return all(abs(x - y) <= eps for x, y in zip(a, b))


def _dedup(rays: list[tuple], exact: bool) -> tuple:
    if exact:
        return tuple(sorted(set(rays)))
    out: list[tuple] = []
    for r in sorted(rays):
        if not any(_close(r, s) for s in out):
            out.append(r)
    return tuple(out)


def _prepare(vectors: Iterable, dim: int | None, what: str) -> tuple[int, tuple]:
    vectors = [tuple(to_scalar(x) for x in v) for v in vectors]
    if dim is None:
        if not vectors:
            raise DomainError(f"cannot infer dimension of an empty {what} list")
        dim = len(vectors[0])
    if dim < 1:
        raise DomainError("dimension must be positive")
    for v in vectors:
        if len(v) != dim:
            raise DimensionMismatch(f"{what} of length {len(v)} in dimension {dim}")
    exact = all_exact(vectors)
    if not exact:
        vectors = [tuple(float(x) for x in v) for v in vectors]
    canon = [canonical_ray(v) for v in vectors]
    return dim, _dedup(canon, exact)


@dataclass(frozen=True)
class ConeV:
    """Cone generated by ``rays`` (stored canonical, deduplicated, sorted)."""

    dim: int
    rays: tuple

    def __init__(self, rays: Iterable, dim: int | None = None):
        dim, rays = _prepare(rays, dim, "ray")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rays", rays)

    @property
    def exact(self) -> bool:
        return all_exact(self.rays)

    def __len__(self) -> int:
        return len(self.rays)


@dataclass(frozen=True)
class ConeH:
    """Cone ``{x : f.x >= 0 for every facet normal f}``."""

    dim: int
    facets: tuple

    def __init__(self, facets: Iterable, dim: int | None = None):
        dim, facets = _prepare(facets, dim, "facet")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "facets", facets)

    @property
    def exact(self) -> bool:
        return all_exact(self.facets)

    def __len__(self) -> int:
        return len(self.facets)


Cone = Union[ConeV, ConeH]


# ---------------------------------------------------------------------------
# double description
# ---------------------------------------------------------------------------


def _initial_basis(rows: list[tuple], dim: int, exact: bool) -> list[int]:
    """Indices of the first ``dim`` linearly independent rows, in order."""
    chosen: list[int] = []
    if exact:
        echelon: list[list[Fraction]] = []  # rows with distinct leading pivots
        pivots: list[int] = []
        for idx, row in enumerate(rows):
            r = [Fraction(x) for x in row]
            for e, p in zip(echelon, pivots):
                if r[p] != 0:
                    f = r[p] / e[p]
                    r = [x - f * y for x, y in zip(r, e)]
            lead = next((i for i, x in enumerate(r) if x != 0), None)
            if lead is None:
                continue
            echelon.append(r)
            pivots.append(lead)
            chosen.append(idx)
            if len(chosen) == dim:
                break
    else:
        basis: list[tuple] = []
        for idx, row in enumerate(rows):
            if linalg.rank(basis + [row]) > len(basis):
                basis.append(row)
                chosen.append(idx)
                if len(chosen) == dim:
                    break
    if len(chosen) < dim:
        raise Lineality("inequalities do not define a pointed cone")
    return chosen


def _extreme_rays(rows: tuple, dim: int, exact: bool) -> list[tuple]:
    """Extreme rays of ``{x : a.x >= 0 for a in rows}`` (pointed cones only).

    Rows are processed in their given (sorted canonical) order.  The first
    ``dim`` independent rows seed a simplicial cone whose rays are the columns
    of the inverse; every further row splits the current rays into positive,
    zero and negative parts, and adjacent positive/negative pairs are combined
    onto the new hyperplane.  Adjacency uses the combinatorial test: the two
    zero sets share at least ``dim - 2`` rows and no third ray's zero set
    contains that intersection.
    """
    if not rows:
        raise Lineality("an empty inequality system describes the whole space")
    if exact:
        rows = [tuple(int(x) for x in _int_ray(r)) for r in rows]
    else:
        rows = [tuple(float(x) for x in r) for r in rows]
    basis = _initial_basis(rows, dim, exact)
    inv = linalg.inverse(tuple(rows[i] for i in basis) if not exact
                         else tuple(tuple(Fraction(x) for x in rows[i]) for i in basis))
    rays: list[tuple] = []
    zeros: list[int] = []
    full = 0
    for pos in range(dim):
        full |= 1 << pos
    for k in range(dim):
        col = [inv[i][k] for i in range(dim)]
        rays.append(_int_ray(col) if exact else _unit_ray(col))
        zeros.append(full & ~(1 << k))
    order = basis + [i for i in range(len(rows)) if i not in set(basis)]
    eps = epsilon()
    for step in range(dim, len(order)):
        a = rows[order[step]]
        bit = 1 << step
        vals = [sum(x * y for x, y in zip(a, r)) for r in rays]
        if exact:
            sgn = [(v > 0) - (v < 0) for v in vals]
        else:
            sgn = [0 if abs(v) <= eps else (1 if v > 0 else -1) for v in vals]
        pos_idx = [i for i, s in enumerate(sgn) if s > 0]
        neg_idx = [i for i, s in enumerate(sgn) if s < 0]
        zero_idx = [i for i, s in enumerate(sgn) if s == 0]
        if not neg_idx:
            for i in zero_idx:
                zeros[i] |= bit
            continue
        new_rays: list[tuple] = []
        new_zeros: list[int] = []
        need = dim - 2
        for p in pos_idx:
            zp = zeros[p]
            for n in neg_idx:
                common = zp & zeros[n]
                if common.bit_count() < need:
                    continue
                adjacent = True
                for j, zj in enumerate(zeros):
                    if j != p and j != n and zj & common == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vp, vn = vals[p], vals[n]
                comb = tuple(vp * y - vn * x for x, y in zip(rays[p], rays[n]))
                new_rays.append(_int_ray(comb) if exact else _unit_ray(comb))
                new_zeros.append(common | bit)
        keep = pos_idx + zero_idx
        rays = [rays[i] for i in keep] + new_rays
        zeros = [zeros[i] | (bit if sgn[i] == 0 else 0) for i in keep] + new_zeros
    return rays


@lru_cache(maxsize=512)
def _dd(rows: tuple, dim: int) -> tuple:
    exact = all_exact(rows)
    raw = _extreme_rays(rows, dim, exact)
    if exact:
        canon = [tuple(Fraction(x) for x in r) for r in raw]
    else:
        canon = [_unit_ray(r) for r in raw]
    return _dedup(canon, exact)


def _require_full_dimensional(vectors: tuple, dim: int, what: str) -> None:
    if linalg.rank(vectors) < dim:
        raise Lineality(f"{what} span a proper subspace; the dual cone is not pointed")


def dd_convert(cone: Cone) -> Cone:
    """Switch representation: V -> H (irredundant facets) or H -> V (extreme rays)."""
    if isinstance(cone, ConeH):
        _require_full_dimensional(cone.facets, cone.dim, "facet normals")
        return ConeV(_dd(cone.facets, cone.dim), dim=cone.dim)
    if isinstance(cone, ConeV):
        _require_full_dimensional(cone.rays, cone.dim, "generators")
        out = _dd(cone.rays, cone.dim)
        # facet normals that do not span the space: the generators contain a
        # line (e.g. a ray and its opposite)
        if linalg.rank(out) < cone.dim:
            raise Lineality("generators contain a line; the cone is not pointed")
        return ConeH(out, dim=cone.dim)
    raise TypeError(f"not a cone: {cone!r}")


def dual_cone(cone: ConeV) -> ConeV:
    """Generators of ``{f : f.r >= 0 for every ray r}``."""
    return dd_convert(ConeH(cone.rays, dim=cone.dim))


def _tight_rank_filter(candidates: tuple, others: tuple, dim: int) -> tuple:
    """Keep candidates whose tight set among ``others`` has rank ``dim - 1``."""
    keep = []
    for c in candidates:
        tight = [o for o in others if sign(sum(x * y for x, y in zip(c, o))) == 0]
        if linalg.rank(tight) == dim - 1:
            keep.append(c)
    return tuple(keep)


def minimize_rays(cone: ConeV) -> ConeV:
    """Drop generators that are not extreme rays."""
    facets = dd_convert(cone).facets
    return ConeV(_tight_rank_filter(cone.rays, facets, cone.dim), dim=cone.dim)


def minimize_facets(cone: ConeH) -> ConeH:
    """Drop redundant inequalities."""
    rays = dd_convert(cone).rays
    _require_full_dimensional(rays, cone.dim, "extreme rays")
    return ConeH(_tight_rank_filter(cone.facets, rays, cone.dim), dim=cone.dim)


def _check_dim(dim: int, v: Sequence) -> None:
    if len(v) != dim:
        raise DimensionMismatch(f"vector of length {len(v)} in dimension {dim}")


def cone_intersect(a: ConeH, b: ConeH) -> ConeH:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")
    return minimize_facets(ConeH(a.facets + b.facets, dim=a.dim))


def cone_contains(cone: ConeH, v: Sequence) -> bool:
    """``f.v >= 0`` for every facet (within tolerance in float mode)."""
    _check_dim(cone.dim, v)
    v = tuple(to_scalar(x) for x in v)
    return all(sign(sum(x * y for x, y in zip(f, v))) >= 0 for f in cone.facets)


def violated_facets(cone: ConeH, v: Sequence) -> list[tuple]:
    _check_dim(cone.dim, v)
    v = tuple(to_scalar(x) for x in v)
    return [f for f in cone.facets if sign(sum(x * y for x, y in zip(f, v))) < 0]


def as_h(cone: Cone) -> ConeH:
    return cone if isinstance(cone, ConeH) else dd_convert(cone)


def as_v(cone: Cone) -> ConeV:
    return cone if isinstance(cone, ConeV) else dd_convert(cone)


def ray_sets_equal(a: tuple, b: tuple) -> bool:
    if len(a) != len(b):
        return False
    if all_exact(a) and all_exact(b):
        return set(a) == set(b)
    fa = [_unit_ray(r) for r in a]
    fb = [_unit_ray(r) for r in b]
    return all(any(_close(x, y) for y in fb) for x in fa) and \
        all(any(_close(y, x) for x in fa) for y in fb)


def cone_equal(a: ConeV, b: ConeV) -> bool:
    """Same cone: the canonical extreme-ray sets agree."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")
    return ray_sets_equal(minimize_rays(a).rays, minimize_rays(b).rays)


def cone_subset(a: ConeV, b: Cone) -> bool:
    """Every generator of ``a`` lies in ``b``."""
    hb = as_h(b)
    return all(cone_contains(hb, r) for r in a.rays)


def polytope_vertices(inequalities: Iterable[tuple[Sequence, object]], dim: int) -> list[tuple]:
    """Vertices of the bounded polytope ``{x : a.x + b >= 0}``.

    The polytope is homogenized to the cone ``{(x, t) : a.x + b t >= 0, t >= 0}``
    whose extreme rays with ``t > 0`` are the vertices.
    """
    rows = []
    for a, b in inequalities:
        _check_dim(dim, a)
        row = tuple(to_scalar(x) for x in a) + (to_scalar(b),)
        if any(x != 0 for x in row):
            rows.append(row)
    zero = Fraction(0) if all_exact(rows) else 0.0
    rows.append(tuple(zero for _ in range(dim)) + (zero + 1,))
    hom = ConeH(rows, dim=dim + 1)
    out = []
    for r in dd_convert(hom).rays:
        t = r[-1]
        if sign(t) <= 0:
            raise DomainError("polytope is unbounded")
        out.append(tuple(x / t for x in r[:-1]))
    return sorted(out)


# ---------------------------------------------------------------------------
# linear optimization over a normalized slice
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SliceOptimum:
    """``max c.x`` over ``{x in cone : n.x = 1}``.

    ``point`` attains ``value``; ``multipliers`` ``y >= 0`` satisfy
    ``sum_i y_i f_i = value * n - c`` over the facets ``f_i``, which proves
    no feasible point does better (``c.x = value - sum_i y_i f_i.x``).
    In exact mode both facts are verified in rational arithmetic.
    """

    value: object
    point: tuple
    multipliers: tuple


def _full_rank_rows(candidates: Sequence[int], rows: Sequence, extra: tuple, dim: int) -> list[int]:
    chosen: list[int] = []
    basis = [extra]
    for i in candidates:
        if linalg.rank(basis + [rows[i]]) > len(basis):
            basis.append(rows[i])
            chosen.append(i)
            if len(basis) == dim:
                break
    return chosen


def maximize_on_slice(cone: ConeH, objective: Sequence, normal: Sequence) -> SliceOptimum:
    """Maximize a linear functional over the slice ``n.x = 1`` of a cone.

    Solved in floating point by the HiGHS simplex, then (for exact input)
    re-derived exactly from the optimal basis: the primal point from its
    tight facets, the dual multipliers from complementary slackness.  Both
    are checked exactly; a failed check raises DomainError rather than
    returning an uncertified value.
    """
    from scipy.optimize import linprog  # deferred: only needed here

    dim = cone.dim
    F = cone.facets
    c = tuple(to_scalar(x) for x in objective)
    n = tuple(to_scalar(x) for x in normal)
    _check_dim(dim, c)
    _check_dim(dim, n)
    Ff = np.array([[float(x) for x in f] for f in F])
    res = linprog(-np.array([float(x) for x in c]), A_ub=-Ff, b_ub=np.zeros(len(F)),
                  A_eq=np.array([[float(x) for x in n]]), b_eq=np.array([1.0]),
                  bounds=[(None, None)] * dim, method="highs")
    if res.status == 2:
        raise DomainError("the slice is empty")
    if res.status != 0:
        raise DomainError(f"linear program failed: {res.message}")
    x = res.x
    y = -np.asarray(res.ineqlin.marginals)
    exact = cone.exact and all_exact([c, n])
    if not exact:
        return SliceOptimum(float(-res.fun), tuple(float(v) for v in x), tuple(float(v) for v in y))

    scale = max(1.0, float(np.abs(y).max()))
    support = [i for i in range(len(F)) if y[i] > 1e-9 * scale]
    slack = Ff @ x
    tight = [i for i in np.argsort(slack) if slack[i] <= 1e-7 * max(1.0, np.abs(slack).max())]
    # primal: tight facets (support first) plus the normalization
    rows_idx = _full_rank_rows(support + [i for i in tight if i not in support], F, n, dim)
    point = linalg.solve([F[i] for i in rows_idx] + [n], [0] * len(rows_idx) + [1])
    if point is None or any(sign(sum(a * b for a, b in zip(f, point))) < 0 for f in F):
        raise DomainError("could not certify the optimal point exactly")
    value = sum(a * b for a, b in zip(c, point))
    # dual: sum_{i in S} y_i f_i = value * n - c on a tight set S
    for cand in (support, tight):
        cols = list(cand)
        coeff_rows = [tuple(F[i][k] for i in cols) for k in range(dim)]
        rhs = [value * n[k] - c[k] for k in range(dim)]
        ys = linalg.solve(coeff_rows, rhs)
        if ys is not None and all(v >= 0 for v in ys):
            mult = [Fraction(0)] * len(F)
            for i, v in zip(cols, ys):
                mult[i] = v
            return SliceOptimum(value, point, tuple(mult))
    raise DomainError("could not certify optimality exactly")
