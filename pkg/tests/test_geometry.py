import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gptcone.errors import DimensionMismatch, DomainError, Lineality, ZeroVector
from gptcone.geometry import (ConeH, ConeV, canonical_ray, cone_contains, cone_equal,
                              cone_intersect, dd_convert, dual_cone, minimize_facets,
                              minimize_rays, polytope_vertices, violated_facets)
from gptcone.models import polygon_states

import oracles

SQUARE = [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)]
SQUARE_FACETS = [(1, 1, 1), (-1, 1, 1), (-1, -1, 1), (1, -1, 1)]


def ints(rays):
    return {tuple(int(x) for x in r) for r in rays}


class TestCanonicalRay:
    def test_scaling(self):
        assert canonical_ray((2, 0, 2)) == (1, 0, 1)

    def test_gcd_reduction_keeps_direction(self):
        assert canonical_ray((0, -3, 3)) == (0, -1, 1)

    def test_clears_denominators(self):
        assert canonical_ray((F(1, 2), F(1, 2), F(1, 2))) == (1, 1, 1)

    def test_opposite_rays_stay_distinct(self):
        assert canonical_ray((1, -1)) != canonical_ray((-1, 1))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            canonical_ray((0, 0, 0))
        with pytest.raises(ZeroVector):
            canonical_ray((0.0, 0.0))

    def test_float_mode_unit_norm(self):
        r = canonical_ray((3.0, 4.0))
        assert r == pytest.approx((0.6, 0.8))

    @given(st.lists(st.integers(-20, 20), min_size=2, max_size=5).filter(any),
           st.integers(1, 50))
    def test_positive_scaling_invariance(self, v, k):
        assert canonical_ray(v) == canonical_ray([k * x for x in v])
        assert math.gcd(*[int(x) for x in canonical_ray(v)]) == 1


class TestDDConvert:
    def test_square_to_facets(self):
        assert ints(dd_convert(ConeV(SQUARE)).facets) == set(SQUARE_FACETS)

    def test_facets_to_square(self):
        assert ints(dd_convert(ConeH(SQUARE_FACETS)).rays) == set(SQUARE)

    def test_orthant_self_dual(self):
        basis = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
        assert ints(dd_convert(ConeV(basis)).facets) == set(basis)

    def test_square_facets_by_brute_force(self):
        # each facet vanishes on two adjacent rays and is positive on the rest
        for f in SQUARE_FACETS:
            values = sorted(sum(a * b for a, b in zip(f, r)) for r in SQUARE)
            assert values == [0, 0, 2, 2]

    def test_redundant_generators_removed(self):
        rays = SQUARE + [(0, 0, 1), (1, 1, 3)]
        assert ints(minimize_rays(ConeV(rays)).rays) == set(SQUARE)

    def test_redundant_facets_removed(self):
        facets = SQUARE_FACETS + [(0, 0, 1)]
        assert ints(minimize_facets(ConeH(facets)).facets) == set(SQUARE_FACETS)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ConeV([(1, 0, 1), (1, 0)])

    def test_lineality_rejected(self):
        with pytest.raises(Lineality):
            dd_convert(ConeH([(1, 0, 0), (0, 1, 0)]))
        with pytest.raises(Lineality):
            dd_convert(ConeV([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, 0, 1)]))

    def test_lp_oracle_agrees_on_pentagon(self):
        cone = ConeV(polygon_states(5))
        H = dd_convert(cone)
        assert len(H.facets) == 5
        brute = oracles.brute_extreme_rays_from_facets(H.facets, 3)
        assert oracles.same_rays(brute, cone.rays, tol=1e-6)

    def test_cube_and_octahedron(self):
        octa = [(1, 0, 0, 1), (-1, 0, 0, 1), (0, 1, 0, 1), (0, -1, 0, 1), (0, 0, 1, 1), (0, 0, -1, 1)]
        cube = dual_cone(ConeV(octa))
        assert len(cube.rays) == 8
        assert ints(cube.rays) == {(a, b, c, 1) for a in (1, -1) for b in (1, -1) for c in (1, -1)}
        assert cone_equal(dual_cone(cube), ConeV(octa))


def random_cone(rng, n_rays, dim):
    """Pointed full-dimensional cone: random integer points lifted to height > 0."""
    while True:
        pts = rng.integers(-4, 5, size=(n_rays, dim - 1))
        rays = [tuple(int(x) for x in p) + (int(rng.integers(1, 4)),) for p in pts]
        if np.linalg.matrix_rank(np.array(rays, dtype=float)) == dim:
            return ConeV(rays)


class TestDualityProperties:
    @pytest.mark.parametrize("seed", range(12))
    def test_double_dual_and_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        dim = 3 + seed % 3
        cone = random_cone(rng, dim + 3 + seed % 4, dim)
        minimal = minimize_rays(cone)
        assert cone_equal(dual_cone(dual_cone(cone)), minimal)
        assert cone_equal(dd_convert(dd_convert(minimal)), minimal)

    @pytest.mark.parametrize("seed", range(8))
    def test_minimal_rays_are_extreme(self, seed):
        rng = np.random.default_rng(100 + seed)
        cone = minimize_rays(random_cone(rng, 9, 4))
        for i in range(len(cone.rays)):
            assert oracles.is_extreme_lp(cone.rays, i)

    @pytest.mark.parametrize("seed", range(8))
    def test_membership_matches_lp(self, seed):
        rng = np.random.default_rng(200 + seed)
        cone = random_cone(rng, 7, 4)
        H = dd_convert(cone)
        for _ in range(40):
            v = tuple(int(x) for x in rng.integers(-5, 6, size=4))
            assert cone_contains(H, v) == oracles.in_cone_lp(cone.rays, v)

    @pytest.mark.parametrize("seed", range(6))
    def test_facets_are_irredundant(self, seed):
        # dropping any facet enlarges the cone: some ray of the smaller
        # description violates the dropped facet
        rng = np.random.default_rng(300 + seed)
        H = dd_convert(random_cone(rng, 8, 4))
        for i, f in enumerate(H.facets):
            rest = ConeH([g for j, g in enumerate(H.facets) if j != i])
            bigger = dd_convert(rest)
            assert any(sum(a * b for a, b in zip(f, r)) < 0 for r in bigger.rays)


class TestIntersectionAndMembership:
    def test_idempotent(self):
        H = ConeH(SQUARE_FACETS)
        assert set(cone_intersect(H, H).facets) == set(H.facets)

    def test_hexagon_cone_meets_its_dual_in_a_dodecagon(self):
        # without rescaling the hexagon and its dual are rotated copies that
        # cut each other into a 12-gon
        states = ConeV(polygon_states(6))
        effects = dual_cone(states)
        inter = dd_convert(cone_intersect(dd_convert(states), dd_convert(effects)))
        assert len(inter.rays) == 12
        for r in inter.rays:
            assert oracles.satisfies(dd_convert(states).facets, r)
            assert oracles.satisfies(dd_convert(effects).facets, r)

    def test_contains(self):
        H = dd_convert(ConeV(SQUARE))
        assert cone_contains(H, (1, 0, 1))
        assert not cone_contains(H, (-1, 1, 1))
        assert cone_contains(H, (0, 0, 0))
        assert (1, -1, 1) in {tuple(int(x) for x in f) for f in violated_facets(H, (-1, 1, 1))}

    def test_contains_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cone_contains(ConeH(SQUARE_FACETS), (1, 0))

    def test_cone_equal(self):
        assert cone_equal(ConeV(SQUARE), ConeV([tuple(3 * x for x in r) for r in SQUARE]))
        rotated = [(1, 1, 1), (-1, 1, 1), (-1, -1, 1), (1, -1, 1)]
        assert not cone_equal(ConeV(SQUARE), ConeV(rotated))
        assert not cone_contains(dd_convert(ConeV(SQUARE)), rotated[0])

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_odd_polygon_dual_is_scaled_states(self, n):
        states = ConeV(polygon_states(n))
        assert cone_equal(dual_cone(states), states)


class TestPolytopeVertices:
    def test_unit_square(self):
        ineq = [((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)]
        assert {tuple(v) for v in polytope_vertices(ineq, 2)} == {(0, 0), (1, 0), (0, 1), (1, 1)}

    def test_unbounded_rejected(self):
        with pytest.raises(DomainError):
            polytope_vertices([((1, 0), 0), ((0, 1), 0)], 2)
