"""CHSH statistics for bipartite systems.

Outcome 0 of a measurement is its first effect.  For a binary measurement
``{e0, e1}`` the observable is ``e0 - e1``, and the correlator of a joint
state ``M`` is ``C = aA^T M aB``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg
from .errors import NotAMeasurement
from .gpt_core import JointState, joint_probability
from .scalar import add, dot, is_zero, sign, sub, vec, vec_eq

TSIRELSON = 2 * math.sqrt(2)
CLASSICAL_BOUND = 2
ALGEBRAIC_BOUND = 4


@dataclass(frozen=True)
class Measurement:
    """Two-outcome perfect measurement ``(e0, e1)`` with ``e0 + e1 = u``."""

    e0: tuple
    e1: tuple
    unit: tuple

    def __post_init__(self):
        e0, e1, u = vec(self.e0), vec(self.e1), vec(self.unit)
        if not (len(e0) == len(e1) == len(u)):
            raise NotAMeasurement("effects and unit have different lengths")
        if not vec_eq(add(e0, e1), u):
            raise NotAMeasurement(f"effects {e0} and {e1} do not sum to the unit {u}")
        object.__setattr__(self, "e0", e0)
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "unit", u)

    @classmethod
    def binary(cls, e: Sequence, unit: Sequence) -> "Measurement":
        """``{e, u - e}``."""
        e, unit = vec(e), vec(unit)
        return cls(e, sub(unit, e), unit)

    @property
    def effects(self) -> tuple:
        return self.e0, self.e1

    @property
    def observable(self) -> tuple:
        return sub(self.e0, self.e1)

    def check_allowed(self, system) -> None:
        for e in self.effects:
            if not system.contains_effect(e):
                raise NotAMeasurement(f"effect {e} is not allowed in {system.label or 'the system'}")


def outcome_table(w: JointState, ma: Measurement, mb: Measurement) -> dict:
    """``P(a, b)`` for ``a, b in {0, 1}``."""
    return {(a, b): joint_probability(w, ea, eb)
            for a, ea in enumerate(ma.effects) for b, eb in enumerate(mb.effects)}


def correlator(w: JointState, ma: Measurement, mb: Measurement):
    """``P(a = b) - P(a != b)``."""
    p = outcome_table(w, ma, mb)
    return p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0]


@dataclass(frozen=True)
class ChshResult:
    S: object
    state: JointState
    measurements: tuple
    correlators: tuple

    def recomputed(self):
        c00, c01, c10, c11 = self.correlators
        return abs(c00 + c01 + c10 - c11)


def chsh(w: JointState, ma0: Measurement, ma1: Measurement,
         mb0: Measurement, mb1: Measurement) -> ChshResult:
    """``S = |C00 + C01 + C10 - C11|``."""
    cs = (correlator(w, ma0, mb0), correlator(w, ma0, mb1),
          correlator(w, ma1, mb0), correlator(w, ma1, mb1))
    c00, c01, c10, c11 = cs
    return ChshResult(abs(c00 + c01 + c10 - c11), w, (ma0, ma1, mb0, mb1), cs)


def _binary_effects(vertices: Sequence, unit: tuple, include_trivial: bool) -> list[tuple]:
    # Vertices of E = E+ ∩ (u - E+); u - e is again a vertex, so every
    # vertex yields a valid binary measurement.  The trivial measurements
    # {0, u} and {u, 0} give S = 2 on every state, so they are left out unless
    # asked for: the interesting quantity is what genuine measurements reach.
    out = sorted(set(vertices))
    if not include_trivial:
        out = [e for e in out if not all(is_zero(x) for x in e) and not vec_eq(e, unit)]
    return out or sorted(set(vertices))


def max_chsh(joint, states: Optional[Sequence[JointState]] = None, *,
             include_trivial: bool = False, method: str = "auto") -> ChshResult:
    """Maximize S over extremal joint states and extremal binary measurements.

    Why vertices suffice: for fixed measurements, ``C00 + C01 + C10 - C11``
    is linear in the joint state, and for a fixed state and the other three
    measurements it is affine in each single effect (``e -> 2e - u`` is
    affine).  The absolute value of an affine function on a polytope is
    convex, so its maximum over each factor is attained at a vertex.
    Optimizing one variable at a time over vertices therefore loses nothing,
    and enumerating extremal states times extremal effects finds the global
    optimum.

    For each state ``M`` and Alice pair ``(a0, a1)`` Bob's choice decouples:
    ``S = |c0 . b0 + c1 . b1|`` with ``c0 = (a0 + a1)^T M`` and
    ``c1 = (a0 - a1)^T M``, maximized over each ``b`` separately for both
    signs.  Ties keep the first witness in canonical order.

    By default only non-trivial measurements (neither effect is 0 or u) are
    used; ``include_trivial=True`` adds the deterministic ones, which lift
    every result to at least 2.

    ``method="lp"`` replaces the state enumeration by one certified linear
    program per measurement choice (see :func:`max_chsh_lp`); ``"auto"``
    uses it when the extremal states are not already known and the joint
    space is larger than 3 x 3, where enumeration can explode.
    """
    if method not in ("auto", "vertices", "lp"):
        raise ValueError(f"unknown method {method!r}")
    if states is None and (method == "lp" or (method == "auto" and _prefer_lp(joint))):
        return max_chsh_lp(joint, include_trivial=include_trivial)
    if states is None:
        states = joint.extremal_states
    ua, ub = joint.a.unit, joint.b.unit
    eas = _binary_effects(joint.local_effect_vertices("A"), ua, include_trivial)
    ebs = _binary_effects(joint.local_effect_vertices("B"), ub, include_trivial)
    obs_a = [sub(add(e, e), ua) for e in eas]
    obs_b = [sub(add(e, e), ub) for e in ebs]

    best = None
    best_key = None
    for si, w in enumerate(states):
        M = w.matrix
        for i, a0 in enumerate(obs_a):
            for j, a1 in enumerate(obs_a):
                c0 = linalg.vecmat(add(a0, a1), M)
                c1 = linalg.vecmat(sub(a0, a1), M)
                for s in (1, -1):
                    k0 = max(range(len(obs_b)), key=lambda k: (s * dot(c0, obs_b[k]), -k))
                    k1 = max(range(len(obs_b)), key=lambda k: (s * dot(c1, obs_b[k]), -k))
                    value = s * (dot(c0, obs_b[k0]) + dot(c1, obs_b[k1]))
                    if best is None or sign(value - best) > 0:
                        best = value
                        best_key = (si, i, j, k0, k1)
    si, i, j, k0, k1 = best_key
    ms = (Measurement.binary(eas[i], ua), Measurement.binary(eas[j], ua),
          Measurement.binary(ebs[k0], ub), Measurement.binary(ebs[k1], ub))
    return chsh(states[si], *ms)


def _prefer_lp(joint) -> bool:
    return joint.dim > 9 and "state_cone" not in joint.__dict__ and joint.terms


def _chsh_objectives(eas, ebs, ua, ub):
    """Yield ``(i, j, k, l, c)`` with ``c . w`` the CHSH sum for measurements
    built from effects ``(eas[i], eas[j], ebs[k], ebs[l])``."""
    obs_a = [sub(add(e, e), ua) for e in eas]
    obs_b = [sub(add(e, e), ub) for e in ebs]
    for i, a0 in enumerate(obs_a):
        for j, a1 in enumerate(obs_a):
            for k, b0 in enumerate(obs_b):
                for l, b1 in enumerate(obs_b):
                    c = add(add(linalg.kron(a0, b0), linalg.kron(a0, b1)),
                            sub(linalg.kron(a1, b0), linalg.kron(a1, b1)))
                    yield i, j, k, l, c


def max_chsh_lp(joint, *, include_trivial: bool = False) -> ChshResult:
    """Maximize S by linear programming over the joint state cone.

    For fixed measurements S is the absolute value of a linear functional
    of the state, so its maximum over normalized states is a linear program
    over the inequality description; each optimum is certified exactly (see
    :func:`gptcone.geometry.maximize_on_slice`).  The measurement choices
    are enumerated over extremal effects as in :func:`max_chsh`.
    """
    from .geometry import maximize_on_slice

    ua, ub = joint.a.unit, joint.b.unit
    eas = _binary_effects(joint.local_effect_vertices("A"), ua, include_trivial)
    ebs = _binary_effects(joint.local_effect_vertices("B"), ub, include_trivial)
    n, m = joint.shape
    facets = joint.state_facets
    seen = {}
    best = None
    for i, j, k, l, c in _chsh_objectives(eas, ebs, ua, ub):
        for s in (1, -1):
            obj = tuple(s * x for x in c)
            if obj not in seen:
                seen[obj] = maximize_on_slice(facets, obj, joint.unit)
            opt = seen[obj]
            if best is None or sign(opt.value - best[0]) > 0:
                best = (opt.value, opt.point, (i, j, k, l))
    _, point, (i, j, k, l) = best
    ms = (Measurement.binary(eas[i], ua), Measurement.binary(eas[j], ua),
          Measurement.binary(ebs[k], ub), Measurement.binary(ebs[l], ub))
    return chsh(JointState.from_flat(point, n, m), *ms)


def spekkens_pr_measurements() -> tuple:
    """First effects ``(A0, A1, B0, B1)`` of the commonly quoted cube
    measurements for the entangled octahedron state."""
    h = Fraction(1, 2)
    e0 = (h, h, -h, h)
    e1 = (-h, -h, -h, h)
    e2 = (-h, -h, h, h)
    return e0, e1, e0, e2
