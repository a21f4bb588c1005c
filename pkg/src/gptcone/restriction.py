"""Constructions that choose a system's effect set."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg
from .errors import DegenerateUnit, DomainError, EmbeddingInvalid
from .geometry import (ConeV, as_h, cone_contains, cone_equal, cone_intersect,
                       cone_subset, dd_convert, dual_cone, minimize_rays)
from .gpt_core import System, equivalence_transform
from .scalar import dot, is_zero, scale, sign, to_scalar, vec, vec_eq


def unrestricted_effects(state_cone: ConeV, unit: Sequence) -> ConeV:
    """Effect cone under the no-restriction hypothesis: the dual of the states.

    The normalized effects are then ``E = A*+ ∩ (u - A*+)``; its extreme points
    are available as ``System.effect_vertices``.
    """
    unit = vec(unit)
    for r in state_cone.rays:
        if sign(dot(unit, r)) <= 0:
            raise DegenerateUnit(f"unit vanishes on state ray {r}")
    return dual_cone(state_cone)


def noisy_restriction(system: System, lam, target: Optional[Sequence] = None) -> System:
    """Mix every extreme effect other than 0 and u with ``target`` (default u/2).

    ``e -> lam * e + (1 - lam) * target``.
    """
    lam = to_scalar(lam)
    if not (sign(lam) > 0 and sign(lam - 1) <= 0):
        raise DomainError(f"noise parameter must lie in (0, 1], got {lam}")
    u = system.unit
    target = vec(target) if target is not None else scale(Fraction(1, 2) if isinstance(lam, Fraction) else 0.5, u)
    mixed = []
    for e in system.effect_vertices:
        if all(is_zero(x) for x in e) or vec_eq(e, u):
            continue
        mixed.append(tuple(lam * x + (1 - lam) * t for x, t in zip(e, target)))
    cone = minimize_rays(ConeV(mixed + [u], dim=system.dim))
    label = f"{system.label} (noise lambda={lam})" if system.label else f"noise lambda={lam}"
    return System(system.state_cone, cone, u, label, system.spec)


@dataclass(frozen=True)
class SelfDualizationResult:
    transform: tuple
    system: System
    discarded_rays: tuple


def default_embedding(system: System):
    """The known scaling ``L`` for built-in models, or None."""
    from .models import Family, polygon_radius  # local: models imports this module

    spec = system.spec
    if spec is None:
        return None
    if spec.family == Family.POLYGON:
        r = polygon_radius(spec.params["n"])
        return linalg.diag([r, r, 1.0])
    if spec.family in (Family.BOXWORLD, Family.SPEKKENS_UNRESTRICTED, Family.SPEKKENS,
                       Family.SELF_DUAL_POLYGON, Family.CLASSICAL):
        return linalg.identity(system.dim)
    return None


def self_dualize(system: System, embed=None) -> SelfDualizationResult:
    """Embed the states in the effect cone and truncate effects to the states.

    ``embed`` is the ``L`` of the equivalence transform (states map by
    ``L^-1``, effects by ``L^T``).  After the transform the effect cone is
    intersected with the state cone, so the two coincide.
    """
    if embed is None:
        embed = default_embedding(system)
        if embed is None:
            raise EmbeddingInvalid("no canonical embedding known; pass embed explicitly")
    embed = linalg.matrix(embed)
    moved = equivalence_transform(system, embed)
    if not cone_subset(moved.state_cone, moved.effect_facets):
        raise EmbeddingInvalid("transformed state cone is not inside the transformed effect cone")
    truncated = dd_convert(cone_intersect(moved.effect_facets, moved.state_facets))
    kept = as_h(truncated)
    discarded = tuple(r for r in minimize_rays(moved.effect_cone).rays if not cone_contains(kept, r))
    label = f"self-dualized {system.label}".strip()
    sd = System(moved.state_cone, truncated, moved.unit, label, system.spec)
    return SelfDualizationResult(embed, sd, discarded)


def is_strongly_self_dual_rep(system: System) -> bool:
    """State cone equals effect cone in the current representation."""
    return cone_equal(system.state_cone, system.effect_cone)


@dataclass(frozen=True)
class BitPair:
    state: tuple
    partner: Optional[tuple]
    effect: Optional[tuple]

    @property
    def found(self) -> bool:
        return self.partner is not None


def check_bit_symmetry_pairs(system: System) -> list[BitPair]:
    """For each pure state, a perfectly distinguishable pure partner.

    Returns ``(w, w_bar, e)`` with ``e(w) = 1`` and ``e(w_bar) = 0`` for an
    extreme effect ``e``; partner and effect are None when no pair exists.
    """
    u = system.unit
    effects = [e for e in system.effect_vertices
               if not vec_eq(e, u) and not all(is_zero(x) for x in e)]
    pures = system.pure_states
    out = []
    for w in pures:
        hit = None
        for e in effects:
            if sign(dot(e, w) - 1) != 0:
                continue
            partner = next((v for v in pures if sign(dot(e, v)) == 0), None)
            if partner is not None:
                hit = BitPair(w, partner, e)
                break
        out.append(hit or BitPair(w, None, None))
    return out


def _close_orbit(seed, generators, act):
    orbit = {seed}
    frontier = [seed]
    while frontier:
        x = frontier.pop()
        for g in generators:
            y = act(g, x)
            if y not in orbit:
                orbit.add(y)
                frontier.append(y)
    return orbit


def pairs_transitive(system: System, generators: Sequence) -> bool:
    """Whether the group generated by ``generators`` acts transitively on the
    distinguishable pairs found by :func:`check_bit_symmetry_pairs`.

    Exact systems only (pairs are matched by exact equality).
    """
    pairs = {(p.state, p.partner) for p in check_bit_symmetry_pairs(system) if p.found}
    if not pairs:
        return False
    gens = [linalg.matrix(g) for g in generators]

    def act(g, pair):
        return tuple(tuple(linalg.matvec(g, v)) for v in pair)

    orbit = _close_orbit(min(pairs), gens, act)
    return pairs <= orbit
