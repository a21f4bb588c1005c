"""Constructors for the systems used throughout the package.

Exact coordinates are used wherever they exist: boxworld and its noisy
variants (for rational noise), the self-dualized square, the Spekkens
octahedron and classical simplices.  General polygons carry the irrational
radius ``sqrt(sec(pi/n))`` and are built in float mode.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import linalg
from .errors import DomainError
from .geometry import ConeV
from .gpt_core import System, standard_unit
from .restriction import noisy_restriction, self_dualize, unrestricted_effects
from .scalar import format_scalar, parse_scalar, to_scalar


class Family(str, enum.Enum):
    CLASSICAL = "classical"
    BOXWORLD = "boxworld"
    NOISY_BOXWORLD = "noisy-boxworld"
    POLYGON = "polygon"
    SELF_DUAL_POLYGON = "self-dual-polygon"
    SPEKKENS = "spekkens"
    SPEKKENS_UNRESTRICTED = "spekkens-unrestricted"


@dataclass(frozen=True)
class ModelSpec:
    family: Family
    params: dict[str, Any] = field(default_factory=dict, hash=False)

    def to_json(self) -> dict:
        return {"family": self.family.value,
                "params": {k: format_scalar(v) if isinstance(v, (Fraction, float)) else v
                           for k, v in self.params.items()}}

    @classmethod
    def from_json(cls, doc: dict) -> "ModelSpec":
        params = {}
        for k, v in doc.get("params", {}).items():
            params[k] = parse_scalar(v) if isinstance(v, str) else v
        return cls(Family(doc["family"]), params)


def _require_int(value, name: str, low: int) -> int:
    if isinstance(value, bool) or int(value) != value or value < low:
        raise DomainError(f"{name} must be an integer >= {low}, got {value!r}")
    return int(value)


def classical(d: int, representation: str = "standard") -> System:
    """Classical simplex with ``d + 1`` pure states.

    ``standard``: states ``(b_i, 1)`` for the basis vectors ``b_i`` of R^d plus
    ``(0, ..., 0, 1)``, with unit ``(0, ..., 0, 1)``.
    ``orthant``: states are the basis vectors of R^(d+1), unit ``(1, ..., 1)``;
    here states and effects coincide.
    """
    d = _require_int(d, "d", 1)
    n = d + 1
    if representation == "standard":
        states = [tuple(Fraction(int(i == j)) for j in range(d)) + (Fraction(1),) for i in range(d)]
        states.append(standard_unit(n))
        unit = standard_unit(n)
    elif representation == "orthant":
        states = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
        unit = tuple(Fraction(1) for _ in range(n))
    else:
        raise DomainError(f"unknown representation {representation!r}")
    cone = ConeV(states, dim=n)
    spec = ModelSpec(Family.CLASSICAL, {"d": d, "representation": representation})
    return System(cone, unrestricted_effects(cone, unit), unit, f"classical d={d}", spec)


BOXWORLD_STATES = ((1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1))
BOXWORLD_EFFECTS = tuple(tuple(Fraction(x, 2) for x in e)
                         for e in ((1, 1, 1), (-1, 1, 1), (-1, -1, 1), (1, -1, 1)))


def boxworld_states() -> tuple:
    """``w_1 .. w_4`` in the boxworld chart (``w_1 = (1, 0, 1)``)."""
    return tuple(tuple(Fraction(x) for x in w) for w in BOXWORLD_STATES)


def boxworld() -> System:
    cone = ConeV(BOXWORLD_STATES)
    unit = standard_unit(3)
    return System(cone, unrestricted_effects(cone, unit), unit, "boxworld",
                  ModelSpec(Family.BOXWORLD))


def noisy_boxworld(lam) -> System:
    lam = to_scalar(lam)
    sys = noisy_restriction(boxworld(), lam)
    return System(sys.state_cone, sys.effect_cone, sys.unit, f"noisy boxworld lambda={lam}",
                  ModelSpec(Family.NOISY_BOXWORLD, {"lambda": lam}))


def polygon_radius(n: int) -> float:
    """``r_n = sqrt(sec(pi/n))``."""
    return math.sqrt(1.0 / math.cos(math.pi / n))


def polygon_states(n: int, radius: float | None = None) -> tuple:
    """``w_i = (r cos(2 pi i/n), r sin(2 pi i/n), 1)`` for ``i = 1..n``."""
    r = polygon_radius(n) if radius is None else radius
    return tuple((r * math.cos(2 * math.pi * i / n), r * math.sin(2 * math.pi * i / n), 1.0)
                 for i in range(1, n + 1))


def polygon_effects_formula(n: int) -> tuple:
    """Ray-extremal effects of the unrestricted polygon, from the closed forms."""
    r = polygon_radius(n)
    if n % 2 == 0:
        return tuple((0.5 * r * math.cos((2 * i - 1) * math.pi / n),
                      0.5 * r * math.sin((2 * i - 1) * math.pi / n), 0.5) for i in range(1, n + 1))
    c = 1.0 / (1.0 + r * r)
    return tuple((c * r * math.cos(2 * math.pi * i / n), c * r * math.sin(2 * math.pi * i / n), c)
                 for i in range(1, n + 1))


def polygon(n: int) -> System:
    n = _require_int(n, "n", 3)
    cone = ConeV(polygon_states(n), dim=3)
    unit = (0.0, 0.0, 1.0)
    return System(cone, unrestricted_effects(cone, unit), unit, f"polygon n={n}",
                  ModelSpec(Family.POLYGON, {"n": n}))


def square_states() -> tuple:
    """Self-dualized square in polygon indexing: ``w_i`` at angle ``pi i / 2``."""
    return ((Fraction(0), Fraction(1), Fraction(1)), (Fraction(-1), Fraction(0), Fraction(1)),
            (Fraction(0), Fraction(-1), Fraction(1)), (Fraction(1), Fraction(0), Fraction(1)))


def self_dual_polygon(n: int) -> System:
    """Polygon shrunk to circumradius 1 with effects truncated to the states.

    ``n = 4`` is built exactly in the boxworld chart, which is already the
    shrunk square.
    """
    n = _require_int(n, "n", 3)
    spec = ModelSpec(Family.SELF_DUAL_POLYGON, {"n": n})
    if n == 4:
        sd = self_dualize(boxworld(), linalg.identity(3)).system
    else:
        sd = self_dualize(polygon(n)).system
    return System(sd.state_cone, sd.effect_cone, sd.unit, f"self-dualized polygon n={n}", spec)


def spekkens_states() -> tuple:
    square = [(0, 1), (-1, 0), (0, -1), (1, 0)]  # cos/sin of 2 pi i / 4, i = 1..4
    states = [(Fraction(c), Fraction(s), Fraction(0), Fraction(1)) for c, s in square]
    states += [(Fraction(0), Fraction(0), Fraction(z), Fraction(1)) for z in (1, -1)]
    return tuple(states)


def spekkens() -> System:
    """Octahedron states with the identical octahedron as effect cone."""
    cone = ConeV(spekkens_states())
    return System(cone, cone, standard_unit(4), "spekkens", ModelSpec(Family.SPEKKENS))


def spekkens_unrestricted() -> System:
    """Octahedron states with the full (cube) dual as effect cone."""
    cone = ConeV(spekkens_states())
    unit = standard_unit(4)
    return System(cone, unrestricted_effects(cone, unit), unit, "spekkens (unrestricted)",
                  ModelSpec(Family.SPEKKENS_UNRESTRICTED))


def square_symmetries() -> tuple:
    """Generators of the dihedral group of the square (rotation, reflection)."""
    rot = linalg.matrix([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    ref = linalg.matrix([[1, 0, 0], [0, -1, 0], [0, 0, 1]])
    return rot, ref


def polygon_symmetries(n: int) -> tuple:
    """Float generators of the dihedral group of the regular n-gon."""
    t = 2 * math.pi / n
    rot = linalg.matrix([[math.cos(t), -math.sin(t), 0.0], [math.sin(t), math.cos(t), 0.0],
                         [0.0, 0.0, 1.0]])
    ref = linalg.matrix([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    return rot, ref


def build(spec: ModelSpec) -> System:
    p = spec.params
    if spec.family == Family.CLASSICAL:
        return classical(p.get("d", 1), p.get("representation", "standard"))
    if spec.family == Family.BOXWORLD:
        return boxworld()
    if spec.family == Family.NOISY_BOXWORLD:
        lam = p.get("lambda")
        if lam is None:
            raise DomainError("noisy-boxworld needs a lambda parameter")
        return noisy_boxworld(lam)
    if spec.family == Family.POLYGON:
        return polygon(p.get("n", 0))
    if spec.family == Family.SELF_DUAL_POLYGON:
        return self_dual_polygon(p.get("n", 0))
    if spec.family == Family.SPEKKENS:
        return spekkens()
    if spec.family == Family.SPEKKENS_UNRESTRICTED:
        return spekkens_unrestricted()
    raise DomainError(f"unknown family {spec.family}")


def symmetries_for(system: System):
    """Local symmetry generators for built-in square-type systems, else None."""
    spec = system.spec
    if spec is None:
        return None
    if spec.family in (Family.BOXWORLD, Family.NOISY_BOXWORLD) or \
            (spec.family == Family.SELF_DUAL_POLYGON and spec.params.get("n") == 4):
        return square_symmetries()
    if spec.family in (Family.POLYGON, Family.SELF_DUAL_POLYGON):
        return polygon_symmetries(spec.params["n"])
    return None
