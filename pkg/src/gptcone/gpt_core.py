"""Single and bipartite GPT semantics.

A :class:`System` is a state cone, an effect cone and a unit effect.  The
normalized effect polytope ``E = E+ ∩ (u - E+)`` is derived on demand.

Joint states are ``n x m`` matrices ``w``; a product effect ``eA ⊗ eB`` acts as
``eA^T . w . eB``.  The ``side`` argument of the conditioning helpers names the
subsystem whose state is returned; the effect acts on the other subsystem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Literal, Optional, Sequence

from . import linalg
from .errors import (DimensionMismatch, DomainError, NotAMeasurement,
                     ZeroProbability)
from .geometry import (ConeH, ConeV, cone_contains, dd_convert, dual_cone,
                       minimize_rays, polytope_vertices)
from .scalar import (add, all_exact, dot, is_exact, scale, sign, sub, to_scalar,
                     vec, vec_eq)

if TYPE_CHECKING:
    from .models import ModelSpec

Side = Literal["A", "B"]


def standard_unit(n: int) -> tuple:
    """``u = (0, ..., 0, 1)``."""
    return tuple(Fraction(int(i == n - 1)) for i in range(n))


def normalize(state: Sequence, unit: Sequence) -> tuple:
    """Scale ``state`` so that ``unit . state = 1``."""
    p = dot(unit, state)
    if sign(p) <= 0:
        raise ZeroProbability("state has zero (or negative) normalization")
    return tuple(x / p for x in state)


def effect_polytope_vertices(effect_cone: ConeV, unit: Sequence) -> list[tuple]:
    """Extreme points of ``E+ ∩ (u - E+)``, including the zero effect and ``u``."""
    facets = dd_convert(effect_cone).facets
    ineqs = [(f, 0) for f in facets] + [(tuple(-x for x in f), dot(f, unit)) for f in facets]
    return polytope_vertices(ineqs, effect_cone.dim)


@dataclass(frozen=True)
class System:
    state_cone: ConeV
    effect_cone: ConeV
    unit: tuple
    label: str = ""
    spec: Optional["ModelSpec"] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "unit", vec(self.unit))
        n = self.state_cone.dim
        if self.effect_cone.dim != n or len(self.unit) != n:
            raise DimensionMismatch("state cone, effect cone and unit disagree in dimension")

    @property
    def dim(self) -> int:
        return self.state_cone.dim

    @property
    def exact(self) -> bool:
        return self.state_cone.exact and self.effect_cone.exact and is_exact(self.unit)

    @cached_property
    def state_facets(self) -> ConeH:
        return dd_convert(self.state_cone)

    @cached_property
    def effect_facets(self) -> ConeH:
        return dd_convert(self.effect_cone)

    @cached_property
    def dual_state_cone(self) -> ConeV:
        """``A*+``: every functional nonnegative on the states."""
        return dual_cone(self.state_cone)

    @cached_property
    def pure_states(self) -> tuple:
        return tuple(normalize(r, self.unit) for r in minimize_rays(self.state_cone).rays)

    @cached_property
    def effect_vertices(self) -> tuple:
        """Extreme points of the normalized effect polytope."""
        return tuple(effect_polytope_vertices(self.effect_cone, self.unit))

    def contains_state(self, v: Sequence) -> bool:
        return cone_contains(self.state_facets, v)

    def contains_effect(self, e: Sequence) -> bool:
        """``e`` lies in ``E+ ∩ (u - E+)``."""
        return cone_contains(self.effect_facets, e) and \
            cone_contains(self.effect_facets, sub(self.unit, e))

    def is_normalized_state(self, v: Sequence) -> bool:
        return self.contains_state(v) and sign(dot(self.unit, v) - 1) == 0


# ---------------------------------------------------------------------------
# single-system probabilities
# ---------------------------------------------------------------------------


def _check_len(n: int, *vectors: Sequence) -> None:
    for v in vectors:
        if len(v) != n:
            raise DimensionMismatch(f"vector of length {len(v)} where {n} expected")


def probability(e: Sequence, w: Sequence, system: System | None = None):
    """``p(e|w) = e . w``; with ``system`` given, both inputs are validated."""
    e, w = vec(e), vec(w)
    _check_len(len(e), w)
    if system is not None:
        _check_len(system.dim, e)
        if not system.contains_effect(e):
            raise DomainError(f"{e} is not an allowed effect")
        if not system.is_normalized_state(w):
            raise DomainError(f"{w} is not a normalized state")
    return dot(e, w)


# ---------------------------------------------------------------------------
# joint states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointState:
    """Bipartite state as an ``n x m`` matrix (A indexes rows)."""

    matrix: tuple

    def __init__(self, matrix):
        rows = linalg.matrix(matrix)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatch("joint state must be a rectangular matrix")
        object.__setattr__(self, "matrix", rows)

    @classmethod
    def from_flat(cls, flat: Sequence, n: int, m: int) -> "JointState":
        return cls(linalg.reshape(tuple(flat), n, m))

    @classmethod
    def product(cls, wa: Sequence, wb: Sequence) -> "JointState":
        return cls(linalg.outer(vec(wa), vec(wb)))

    @classmethod
    def combination(cls, terms: Iterable[tuple[object, Sequence, Sequence]]) -> "JointState":
        """``sum c * wa ⊗ wb`` over ``(c, wa, wb)`` terms."""
        total = None
        for c, wa, wb in terms:
            term = linalg.outer(scale(to_scalar(c), vec(wa)), vec(wb))
            total = term if total is None else tuple(add(r, s) for r, s in zip(total, term))
        return cls(total)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.matrix), len(self.matrix[0])

    @property
    def flat(self) -> tuple:
        return linalg.flatten(self.matrix)

    @property
    def exact(self) -> bool:
        return all_exact(self.matrix)

    def transpose(self) -> "JointState":
        return JointState(linalg.transpose(self.matrix))

    def scaled(self, c) -> "JointState":
        c = to_scalar(c)
        return JointState(tuple(scale(c, r) for r in self.matrix))

    def __add__(self, other: "JointState") -> "JointState":
        return JointState(tuple(add(r, s) for r, s in zip(self.matrix, other.matrix)))


def joint_probability(w: JointState, ea: Sequence, eb: Sequence):
    """``eA^T . w . eB``."""
    n, m = w.shape
    ea, eb = vec(ea), vec(eb)
    _check_len(n, ea)
    _check_len(m, eb)
    return dot(ea, linalg.matvec(w.matrix, eb))


def conditional_state(w: JointState, e: Sequence, side: Side) -> tuple:
    """Unnormalized state of ``side`` after outcome ``e`` on the other subsystem."""
    e = vec(e)
    n, m = w.shape
    if side == "A":
        _check_len(m, e)
        return linalg.matvec(w.matrix, e)
    if side == "B":
        _check_len(n, e)
        return linalg.vecmat(e, w.matrix)
    raise ValueError(f"side must be 'A' or 'B', not {side!r}")


def _side_dim(w: JointState, side: Side) -> int:
    return w.shape[0] if side == "A" else w.shape[1]


def normalized_conditional(w: JointState, e: Sequence, side: Side,
                           unit: Sequence | None = None) -> tuple:
    """Conditional state rescaled to unit normalization.

    ``unit`` is the unit effect of ``side`` (defaults to ``(0, ..., 0, 1)``).
    Raises :class:`ZeroProbability` when the outcome never occurs.
    """
    cond = conditional_state(w, e, side)
    unit = vec(unit) if unit is not None else standard_unit(len(cond))
    if sign(dot(unit, cond)) == 0:
        raise ZeroProbability(f"outcome {tuple(e)} has probability zero")
    return normalize(cond, unit)


def marginal_state(w: JointState, side: Side, partner_unit: Sequence | None = None) -> tuple:
    n, m = w.shape
    partner = m if side == "A" else n
    u = vec(partner_unit) if partner_unit is not None else standard_unit(partner)
    return conditional_state(w, u, side)


def check_no_signalling(w: JointState, measurement: Sequence[Sequence], side: Side,
                        partner_unit: Sequence | None = None) -> bool:
    """Coarse-grained conditionals of ``side`` equal its marginal.

    ``measurement`` acts on the partner of ``side`` and must sum to its unit.
    """
    n, m = w.shape
    partner = m if side == "A" else n
    u = vec(partner_unit) if partner_unit is not None else standard_unit(partner)
    effects = [vec(e) for e in measurement]
    if not effects:
        raise NotAMeasurement("empty measurement")
    total = effects[0]
    for e in effects[1:]:
        total = add(total, e)
    if not vec_eq(total, u):
        raise NotAMeasurement(f"effects sum to {total}, not the unit {u}")
    conditional_sum = conditional_state(w, effects[0], side)
    for e in effects[1:]:
        conditional_sum = add(conditional_sum, conditional_state(w, e, side))
    return vec_eq(conditional_sum, marginal_state(w, side, u))


# ---------------------------------------------------------------------------
# equivalence transforms
# ---------------------------------------------------------------------------


def equivalence_transform(system: System, L) -> System:
    """States ``w -> L^-1 w``, effects and unit ``e -> L^T e``."""
    L = linalg.matrix(L)
    if len(L) != system.dim:
        raise DimensionMismatch(f"{len(L)}x{len(L)} transform on a {system.dim}-dim system")
    inv = linalg.inverse(L)
    lt = linalg.transpose(L)
    states = ConeV([linalg.matvec(inv, r) for r in system.state_cone.rays], dim=system.dim)
    effects = ConeV([linalg.matvec(lt, r) for r in system.effect_cone.rays], dim=system.dim)
    return System(states, effects, linalg.matvec(lt, system.unit), system.label, system.spec)


# ---------------------------------------------------------------------------
# consistency
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)


@dataclass
class ConsistencyReport:
    checks: dict[str, CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, name: str) -> CheckResult:
        return self.checks[name]

    def failures(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]


def validate_system(system: System, transformations: Sequence = ()) -> ConsistencyReport:
    """Check the single-system consistency conditions.

    * ``unit``: u is an allowed effect.
    * ``normalizable``: u is strictly positive on every state ray.
    * ``complement``: every extreme effect ray reaches a nonzero point of
      ``E+ ∩ (u - E+)``, i.e. it has an allowed complement.  A failing ray lies
      on a facet of ``E+`` that also contains u.
    * ``coarse_graining``: sums of effect-polytope vertices that stay below u
      are allowed effects.
    * ``positivity``: every effect ray is nonnegative on every state ray.
    * ``transformations``: each supplied matrix maps states into states and
      its adjoint maps effects into effects.
    """
    checks: dict[str, CheckResult] = {}
    u = system.unit
    ef = system.effect_facets

    checks["unit"] = CheckResult("unit", cone_contains(ef, u), [] if cone_contains(ef, u) else [u])

    bad = [r for r in system.state_cone.rays if sign(dot(u, r)) <= 0]
    checks["normalizable"] = CheckResult("normalizable", not bad, bad)

    no_complement = []
    for r in minimize_rays(system.effect_cone).rays:
        if any(sign(dot(f, r)) > 0 and sign(dot(f, u)) <= 0 for f in ef.facets):
            no_complement.append(r)
    checks["complement"] = CheckResult("complement", not no_complement, no_complement)

    coarse = []
    if checks["unit"].passed:
        verts = system.effect_vertices
        for i, e in enumerate(verts):
            for f in verts[i + 1:]:
                s = add(e, f)
                if cone_contains(ef, sub(u, s)) and not system.contains_effect(s):
                    coarse.append((e, f))
    checks["coarse_graining"] = CheckResult("coarse_graining", not coarse, coarse)

    negative = [(f, w) for f in system.effect_cone.rays for w in system.state_cone.rays
                if sign(dot(f, w)) < 0]
    checks["positivity"] = CheckResult("positivity", not negative, negative)

    broken = []
    for T in transformations:
        T = linalg.matrix(T)
        tt = linalg.transpose(T)
        if not all(system.contains_state(linalg.matvec(T, r)) for r in system.state_cone.rays) or \
                not all(cone_contains(ef, linalg.matvec(tt, r)) for r in system.effect_cone.rays):
            broken.append(T)
    checks["transformations"] = CheckResult("transformations", not broken, broken)
    return ConsistencyReport(checks)
