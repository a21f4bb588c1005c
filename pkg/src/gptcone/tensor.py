"""Bipartite composition: minimal, traditional maximal and generalized maximal
tensor products.

Joint vectors are flattened row-major with A as the major index, so
``kron(wa, wb)`` is the flattening of the matrix ``wa wb^T``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

from . import linalg
from .errors import DimensionMismatch, DomainError, InvalidSymmetry, ZeroProbability
from .geometry import ConeH, ConeV, cone_equal, dd_convert, dual_cone
from .gpt_core import (JointState, System, conditional_state, effect_polytope_vertices,
                       normalize)
from .models import Family, boxworld_states
from .scalar import dot, sign, to_scalar


class TensorKind(str, enum.Enum):
    MIN = "min"
    MAX_TRADITIONAL = "max-traditional"
    MAX_GENERALIZED = "max-generalized"


@dataclass(frozen=True)
class FacetTerm:
    """Product inequality ``(left ⊗ right) . w >= 0``.

    ``constrains`` names the subsystem whose conditional state the inequality
    polices: a term ``eA ⊗ f`` with ``eA`` an effect of A and ``f`` a dual ray
    of B's state cone asks that the conditional state of B after ``eA`` lie
    in B's state cone.
    """

    left: tuple
    right: tuple
    constrains: str

    @property
    def normal(self) -> tuple:
        return linalg.kron(self.left, self.right)


class JointSystem:
    """Composite of two systems.

    The joint state cone is held either by its generators (minimal product)
    or by its product inequalities (maximal products); the other
    representation is computed on first use.
    """

    def __init__(self, a: System, b: System, kind: TensorKind, *,
                 state_rays: Optional[ConeV] = None, terms: Sequence[FacetTerm] = (),
                 effect_cone: ConeV, local_effects: tuple[ConeV, ConeV]):
        self.a = a
        self.b = b
        self.kind = kind
        self.terms = tuple(terms)
        self._state_rays = state_rays
        self.effect_cone = effect_cone
        self.local_effects = local_effects
        self.unit = linalg.kron(a.unit, b.unit)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.dim, self.b.dim

    @property
    def dim(self) -> int:
        return self.a.dim * self.b.dim

    @cached_property
    def state_facets(self) -> ConeH:
        if self.terms:
            return ConeH([t.normal for t in self.terms], dim=self.dim)
        return dd_convert(self._state_rays)

    @cached_property
    def state_cone(self) -> ConeV:
        """Extreme rays of the joint state cone (canonical order)."""
        if self._state_rays is not None:
            return self._state_rays
        return dd_convert(self.state_facets)

    @cached_property
    def extremal_states(self) -> tuple:
        """Normalized extremal joint states as matrices."""
        n, m = self.shape
        return tuple(JointState.from_flat(normalize(r, self.unit), n, m)
                     for r in self.state_cone.rays)

    def local_effect_vertices(self, side: str) -> tuple:
        cone, sys = (self.local_effects[0], self.a) if side == "A" else (self.local_effects[1], self.b)
        return tuple(effect_polytope_vertices(cone, sys.unit))


def _products(left: Sequence, right: Sequence) -> list[tuple]:
    return [linalg.kron(x, y) for x in left for y in right]


def min_tensor(a: System, b: System) -> JointSystem:
    """Mixtures of product states.

    Products of extreme rays of two pointed cones are extreme in their
    minimal tensor product, so no minimization pass is needed.
    """
    states = ConeV(_products(a.state_cone.rays, b.state_cone.rays), dim=a.dim * b.dim)
    effects = ConeV(_products(a.effect_cone.rays, b.effect_cone.rays), dim=a.dim * b.dim)
    return JointSystem(a, b, TensorKind.MIN, state_rays=states, effect_cone=effects,
                       local_effects=(a.effect_cone, b.effect_cone))


def virtual_system(system: System) -> System:
    """States extended to the dual of the effect cone (no-restriction holds)."""
    label = f"virtual {system.label}".strip()
    return System(dual_cone(system.effect_cone), system.effect_cone, system.unit, label, system.spec)


def max_tensor_traditional(a: System, b: System) -> JointSystem:
    """``(A*+ ⊗min B*+)*`` built from the state cones' duals only."""
    da, db = a.dual_state_cone.rays, b.dual_state_cone.rays
    terms = [FacetTerm(x, y, "B") for x in da for y in db]
    effects = ConeV(_products(da, db), dim=a.dim * b.dim)
    return JointSystem(a, b, TensorKind.MAX_TRADITIONAL, terms=terms, effect_cone=effects,
                       local_effects=(a.dual_state_cone, b.dual_state_cone))


def gen_max_tensor(a: System, b: System) -> JointSystem:
    """``(E^A+ ⊗min B*+)* ∩ (A*+ ⊗min E^B+)*``.

    Built from generator products only: the dual of a minimal tensor product
    depends on generators alone.
    """
    ea, eb = a.effect_cone.rays, b.effect_cone.rays
    da, db = a.dual_state_cone.rays, b.dual_state_cone.rays
    terms = [FacetTerm(x, y, "B") for x in ea for y in db]
    terms += [FacetTerm(x, y, "A") for x in da for y in eb]
    effects = ConeV(_products(ea, eb), dim=a.dim * b.dim)
    return JointSystem(a, b, TensorKind.MAX_GENERALIZED, terms=terms, effect_cone=effects,
                       local_effects=(a.effect_cone, b.effect_cone))


def tensor(a: System, b: System, kind: TensorKind) -> JointSystem:
    kind = TensorKind(kind)
    if kind == TensorKind.MIN:
        return min_tensor(a, b)
    if kind == TensorKind.MAX_TRADITIONAL:
        return max_tensor_traditional(a, b)
    return gen_max_tensor(a, b)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """A violated product inequality.

    ``effect`` is the local effect ray whose conditional state ``conditional``
    (of subsystem ``side``) leaves that subsystem's state cone;
    ``normalized`` is its unit-normalized form when the outcome can occur.
    """

    facet: tuple
    side: Optional[str] = None
    effect: Optional[tuple] = None
    conditional: Optional[tuple] = None
    normalized: Optional[tuple] = None


@dataclass
class Membership:
    member: bool
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.member

    @property
    def witness(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None


def _as_joint(joint: JointSystem, w) -> JointState:
    if not isinstance(w, JointState):
        w = JointState(w)
    if w.shape != joint.shape:
        raise DimensionMismatch(f"joint state of shape {w.shape}, expected {joint.shape}")
    return w


def membership(joint: JointSystem, w) -> Membership:
    """Joint-cone membership with witnesses for every violated inequality."""
    w = _as_joint(joint, w)
    flat = w.flat
    if not joint.terms:
        bad = [f for f in joint.state_facets.facets if sign(dot(f, flat)) < 0]
        return Membership(not bad, [Violation(f) for f in bad])
    violations = []
    for t in joint.terms:
        if sign(dot(t.normal, flat)) >= 0:
            continue
        if t.constrains == "B":
            effect, side, sys = t.left, "B", joint.b
        else:
            effect, side, sys = t.right, "A", joint.a
        cond = conditional_state(w, effect, side)
        try:
            normed = normalize(cond, sys.unit)
        except ZeroProbability:
            normed = None
        violations.append(Violation(t.normal, side, effect, cond, normed))
    return Membership(not violations, violations)


def conditionals_valid(joint: JointSystem, w) -> bool:
    """Brute-force check of the conditional-state criterion.

    Every vertex of each local effect polytope is applied to one side and the
    resulting conditional state is tested against the other side's facets.
    Zero-probability outcomes must give the zero conditional.
    """
    w = _as_joint(joint, w)
    for e in joint.local_effect_vertices("A"):
        if not joint.b.contains_state(conditional_state(w, e, "B")):
            return False
    for e in joint.local_effect_vertices("B"):
        if not joint.a.contains_state(conditional_state(w, e, "A")):
            return False
    return True


def locally_positive(joint: JointSystem, w) -> bool:
    w = _as_joint(joint, w)
    va, vb = joint.local_effect_vertices("A"), joint.local_effect_vertices("B")
    return all(sign(dot(ea, linalg.matvec(w.matrix, eb))) >= 0 for ea in va for eb in vb)


# ---------------------------------------------------------------------------
# boxworld-family entangled states
# ---------------------------------------------------------------------------


def _boxworld_family_lambda(system: System):
    spec = system.spec
    square = ConeV(boxworld_states())
    if system.dim != 3 or not cone_equal(system.state_cone, square):
        raise DomainError("maximally entangled states are defined for the square state space only")
    if spec is not None and spec.family == Family.NOISY_BOXWORLD:
        return to_scalar(spec.params["lambda"])
    return Fraction(1)


def pr_box_state() -> JointState:
    """``Phi = 1/2 (w1⊗w2 - w2⊗w2 + w2⊗w3 + w3⊗w1)`` in the boxworld chart."""
    w1, w2, w3, _ = boxworld_states()
    h = Fraction(1, 2)
    return JointState.combination([(h, w1, w2), (-h, w2, w2), (h, w2, w3), (h, w3, w1)])


def maximally_entangled(system: System, lam=None) -> JointState:
    """``Phi^lam = diag(1/lam, 1/lam, 1) . Phi``."""
    fam_lam = _boxworld_family_lambda(system)
    lam = fam_lam if lam is None else to_scalar(lam)
    if not (sign(lam) > 0 and sign(lam - 1) <= 0):
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    d = linalg.diag([1 / lam, 1 / lam, 1])
    return JointState(linalg.matmul(d, pr_box_state().matrix))


def entangled_class_coefficients(lam) -> tuple:
    """``alpha = (1 - lam)/(4 lam)``, ``beta = (1 + lam)/(4 lam)``."""
    lam = to_scalar(lam)
    return (1 - lam) / (4 * lam), (1 + lam) / (4 * lam)


# (A index, B index) pairs, 1-based, carrying coefficients (-alpha, beta, beta, -alpha)
ENTANGLED_CLASS_PATTERNS = (
    ((2, 2), (2, 4), (4, 2), (4, 4)),
    ((2, 2), (2, 3), (4, 2), (4, 3)),
    ((2, 2), (2, 4), (3, 2), (3, 4)),
    ((3, 2), (3, 3), (4, 2), (4, 3)),
)
# Commonly quoted form of the fifth class; it is not a valid joint state.
# Replacing its second term w4⊗w1 by w3⊗w3 gives the pattern above.
ENT5_QUOTED_PATTERN = ((3, 2), (4, 1), (4, 2), (4, 3))


def _class_state(lam, pattern) -> JointState:
    al, be = entangled_class_coefficients(lam)
    w = boxworld_states()
    return JointState.combination([(c, w[i - 1], w[j - 1])
                                   for c, (i, j) in zip((-al, be, be, -al), pattern)])


def entangled_class_states(lam) -> list[JointState]:
    """Representatives of the four non-maximally entangled classes of the
    noisy square (boxworld indexing)."""
    lam = to_scalar(lam)
    if not (sign(lam) > 0 and sign(lam - 1) < 0):
        raise DomainError(f"classes are defined for 0 < lambda < 1, got {lam}")
    return [_class_state(lam, p) for p in ENTANGLED_CLASS_PATTERNS]


def self_dual_square_class_state() -> JointState:
    """``1/4 (-w1⊗w1 + w1⊗w3 + 2 w2⊗w4 + w3⊗w1 - w3⊗w3 + 2 w4⊗w2)``.

    Often quoted as the representative of the large entangled class of two
    self-dualized squares.  It evaluates to ``diag(-1, -1, 1)``, the rotation
    by pi, so it actually lies in the orbit of the identity map.
    """
    w1, w2, w3, w4 = boxworld_states()
    q = Fraction(1, 4)
    return JointState.combination([(-q, w1, w1), (q, w1, w3), (2 * q, w2, w4),
                                   (q, w3, w1), (-q, w3, w3), (2 * q, w4, w2)])


def counterexample_state() -> JointState:
    """Joint state of two self-dualized squares (polygon indexing) that is
    positive on all product effects but steers A outside its state space."""
    return JointState([[1, -1, 0], [1, 1, 0], [0, 0, 1]])


def spekkens_entangled_state() -> JointState:
    """Entangled state of two octahedron systems with valid conditionals for
    both the octahedron and the cube effect sets."""
    h = Fraction(1, 2)
    return JointState([[0, 0, 0, 0], [0, -h, -h, 0], [0, -h, h, 0], [0, 0, 0, 1]])


def reference_states(a: System, b: System) -> list[tuple[str, JointState]]:
    """Named class representatives for built-in square-type pairs, used to
    label orbits.  Empty when none are known."""
    sa, sb = a.spec, b.spec
    if sa is None or sb is None or sa != sb:
        return []
    if sa.family == Family.NOISY_BOXWORLD:
        lam = sa.params["lambda"]
        refs = [("ent-1", maximally_entangled(a, lam))]
        if sign(lam - 1) < 0:
            refs += [(f"ent-{k}", w) for k, w in enumerate(entangled_class_states(lam), start=2)]
        return refs
    if sa.family == Family.BOXWORLD:
        return [("ent-1", maximally_entangled(a))]
    if sa.family == Family.SELF_DUAL_POLYGON and sa.params.get("n") == 4:
        return [("ent-1", JointState(linalg.identity(3)))]
    return []


# ---------------------------------------------------------------------------
# orbit classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitClass:
    representative: JointState
    orbit_size: int
    label: str


@dataclass
class ExtremalClassification:
    classes: list

    @property
    def sizes(self) -> list[int]:
        return [c.orbit_size for c in self.classes]

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def size_of(self, label: str) -> int:
        return sum(c.orbit_size for c in self.classes if c.label == label)


def _preserves(system: System, g) -> bool:
    return all(system.contains_state(linalg.matvec(g, r)) for r in system.state_cone.rays)


def classify_extremals(joint: JointSystem, local_symmetries, *, include_swap: bool = False,
                       references: Sequence[tuple[str, JointState]] = ()) -> ExtremalClassification:
    """Partition extremal joint rays into orbits of the local symmetry group.

    ``local_symmetries`` is a list of generators used on both factors, or a
    pair ``(generators_A, generators_B)``.  Each generator ``g`` acts on a
    joint state as ``w -> g w`` (A) or ``w -> w g^T`` (B).  ``include_swap``
    adds the factor exchange ``w -> w^T`` (only for identical factors).
    Orbits containing a ray of one of ``references`` take its label; product
    orbits are labelled ``local``; the rest ``class-k``.
    """
    if isinstance(local_symmetries, tuple) and len(local_symmetries) == 2 and \
            isinstance(local_symmetries[0], (list, tuple)) and local_symmetries[0] and \
            isinstance(local_symmetries[0][0], (list, tuple)) and \
            isinstance(local_symmetries[0][0][0], (list, tuple)):
        gens_a, gens_b = local_symmetries
    else:
        gens_a = gens_b = local_symmetries
    gens_a = [linalg.matrix(g) for g in gens_a]
    gens_b = [linalg.matrix(g) for g in gens_b]
    for g in gens_a:
        if not _preserves(joint.a, g):
            raise InvalidSymmetry("generator does not preserve the state cone of A")
    for g in gens_b:
        if not _preserves(joint.b, g):
            raise InvalidSymmetry("generator does not preserve the state cone of B")
    n, m = joint.shape
    rays = joint.state_cone.rays
    if not joint.state_cone.exact:
        raise DomainError("orbit classification needs an exact joint cone")
    index = {r: i for i, r in enumerate(rays)}
    from .geometry import canonical_ray

    actions = []
    for g in gens_a:
        actions.append(lambda M, g=g: linalg.matmul(g, M))
    for g in gens_b:
        actions.append(lambda M, g=g: linalg.matmul(M, linalg.transpose(g)))
    if include_swap:
        if n != m:
            raise InvalidSymmetry("factor swap needs equal local dimensions")
        actions.append(linalg.transpose)

    def image(i, act):
        M = linalg.reshape(rays[i], n, m)
        r = canonical_ray(linalg.flatten(act(M)))
        if r not in index:
            raise InvalidSymmetry("a generator does not map extremal rays to extremal rays")
        return index[r]

    seen = [False] * len(rays)
    orbits = []
    for start in range(len(rays)):
        if seen[start]:
            continue
        seen[start] = True
        orbit = [start]
        frontier = [start]
        while frontier:
            i = frontier.pop()
            for act in actions:
                j = image(i, act)
                if not seen[j]:
                    seen[j] = True
                    orbit.append(j)
                    frontier.append(j)
        orbits.append(sorted(orbit))

    ref_rays = [(label, canonical_ray(w.flat)) for label, w in references]
    classes = []
    unnamed = 0
    for orbit in orbits:
        members = {rays[i] for i in orbit}
        label = next((lab for lab, r in ref_rays if r in members), None)
        if label is None:
            if linalg.rank(linalg.reshape(rays[orbit[0]], n, m)) == 1:
                label = "local"
            else:
                unnamed += 1
                label = f"class-{unnamed}"
        rep = JointState.from_flat(normalize(rays[orbit[0]], joint.unit), n, m)
        classes.append(OrbitClass(rep, len(orbit), label))
    return ExtremalClassification(classes)
