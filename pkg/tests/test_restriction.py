import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest

from gptcone import linalg
from gptcone.errors import DegenerateUnit, DomainError, EmbeddingInvalid
from gptcone.geometry import ConeV, cone_equal
from gptcone.gpt_core import probability, standard_unit, validate_system
from gptcone.models import (boxworld, boxworld_states, classical, noisy_boxworld, polygon,
                            polygon_effects_formula, self_dual_polygon, square_symmetries)
from gptcone.restriction import (check_bit_symmetry_pairs, is_strongly_self_dual_rep,
                                 noisy_restriction, pairs_transitive, self_dualize,
                                 unrestricted_effects)

import oracles

H = F(1, 2)
Q = F(1, 4)
U3 = standard_unit(3)


def fl(v):
    return np.array([float(x) for x in v])


def effect_set(system):
    return {tuple(e) for e in system.effect_vertices}


class TestUnrestrictedEffects:
    def test_boxworld(self):
        expected = {(0, 0, 0), (0, 0, 1)} | {(a * H, b * H, H) for a in (1, -1) for b in (1, -1)}
        assert effect_set(boxworld()) == expected

    def test_even_polygon_closed_form(self):
        s = polygon(6)
        rays = [e for e in s.effect_vertices if e[2] > 1e-9 and abs(e[2] - 1) > 1e-9]
        assert oracles.same_rays(rays, polygon_effects_formula(6), tol=1e-7)
        for e in polygon_effects_formula(6):
            assert any(np.allclose(e, v, atol=1e-9) for v in rays)

    def test_odd_polygon_has_complements(self):
        s = polygon(3)
        formula = polygon_effects_formula(3)
        verts = [fl(v) for v in s.effect_vertices
                 if not np.allclose(fl(v), 0) and not np.allclose(fl(v), fl(U3))]
        assert len(verts) == 6
        for e in formula:
            assert any(np.allclose(fl(e), v, atol=1e-9) for v in verts)
            assert any(np.allclose(fl(U3) - fl(e), v, atol=1e-9) for v in verts)

    def test_matches_brute_force_polytope(self):
        # E = {e : 0 <= e.w <= 1 on all pure states}, vertices by brute force
        s = boxworld()
        ineq = [w for w in s.pure_states] + [tuple(-x for x in w) for w in s.pure_states]
        rhs = [0] * 4 + [1] * 4
        found = set()

        for rows in itertools.combinations(range(8), 3):
            A = np.array([[float(x) for x in ineq[r]] for r in rows])
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            e = np.linalg.solve(A, np.array([-float(rhs[r]) for r in rows]))
            if all(np.dot([float(x) for x in ineq[k]], e) + rhs[k] >= -1e-9 for k in range(8)):
                found.add(tuple(np.round(e, 9)))
        assert found == {tuple(np.round(fl(v), 9)) for v in s.effect_vertices}

    def test_degenerate_unit(self):
        cone = ConeV([(1, 0, 1), (0, 1, 0), (-1, 0, 1)])
        with pytest.raises(DegenerateUnit):
            unrestricted_effects(cone, U3)


class TestNoisyRestriction:
    def test_identity_at_one(self):
        assert cone_equal(noisy_restriction(boxworld(), 1).effect_cone, boxworld().effect_cone)

    def test_half(self):
        s = noisy_boxworld(H)
        assert (Q, Q, H) in effect_set(s)
        assert max(probability((Q, Q, H), w) for w in s.pure_states) == F(3, 4)

    @pytest.mark.parametrize("lam", [F(1, 3), F(1, 2), F(3, 4)])
    def test_max_probability_is_lambda(self, lam):
        s = noisy_boxworld(lam)
        for e in s.effect_vertices:
            if e in ((0, 0, 0), (0, 0, 1)):
                continue
            assert max(probability(e, w) for w in s.pure_states) == (1 + lam) / 2

    def test_range(self):
        with pytest.raises(DomainError):
            noisy_boxworld(0)
        with pytest.raises(DomainError):
            noisy_boxworld(F(3, 2))

    def test_valid_system(self):
        assert validate_system(noisy_boxworld(H)).passed

    def test_monotone(self):
        small, large = noisy_boxworld(F(1, 3)), noisy_boxworld(F(2, 3))
        for e in small.effect_vertices:
            assert large.contains_effect(e)

    def test_biased_target(self):
        s = noisy_restriction(boxworld(), H, target=(Q, 0, H))
        assert validate_system(s)["unit"].passed


class TestSelfDualize:
    def test_square_effects_are_half_states(self):
        sd = self_dual_polygon(4)
        expected = {tuple(x / 2 for x in w) for w in boxworld_states()} | {(0, 0, 0), U3}
        assert effect_set(sd) == expected
        assert cone_equal(sd.state_cone, sd.effect_cone)

    def test_discarded_rays_outside_states(self):
        res = self_dualize(boxworld(), linalg.identity(3))
        assert len(res.discarded_rays) == 4
        for r in res.discarded_rays:
            assert not res.system.contains_state(r)

    def test_hexagon(self):
        res = self_dualize(polygon(6))
        sd = res.system
        assert cone_equal(sd.state_cone, sd.effect_cone)
        expected = [(0.5 * math.cos(2 * math.pi * i / 6), 0.5 * math.sin(2 * math.pi * i / 6), 0.5)
                    for i in range(1, 7)]
        verts = [v for v in sd.effect_vertices if abs(v[2] - 0.5) < 1e-9]
        assert oracles.same_rays(verts, expected, tol=1e-7)

    def test_odd_polygon_nothing_discarded(self):
        res = self_dualize(polygon(5), linalg.identity(3))
        assert res.discarded_rays == ()
        assert is_strongly_self_dual_rep(res.system)

    def test_invalid_embedding(self):
        with pytest.raises(EmbeddingInvalid):
            self_dualize(boxworld(), linalg.diag([F(1, 2), F(1, 2), 1]))

    def test_subset_of_unrestricted(self):
        sd = self_dual_polygon(4)
        for e in sd.effect_vertices:
            assert boxworld().contains_effect(e)


class TestSelfDualityDiagnostics:
    def test_strong_self_duality(self):
        assert is_strongly_self_dual_rep(self_dual_polygon(4))
        assert not is_strongly_self_dual_rep(boxworld())
        assert is_strongly_self_dual_rep(classical(2, "orthant"))

    def test_bit_pairs_self_dual_square(self):
        pairs = {p.state: p for p in check_bit_symmetry_pairs(self_dual_polygon(4))}
        w1, _, w3, _ = boxworld_states()
        p = pairs[w1]
        assert p.found and p.partner == w3 and p.effect == tuple(x / 2 for x in w1)

    def test_bit_pairs_classical(self):
        s = classical(1, "orthant")
        for p in check_bit_symmetry_pairs(s):
            assert p.found
            assert probability(p.effect, p.state) == 1 and probability(p.effect, p.partner) == 0

    def test_noisy_has_no_pairs(self):
        assert not any(p.found for p in check_bit_symmetry_pairs(noisy_boxworld(H)))

    def test_pairs_transitive(self):
        assert pairs_transitive(self_dual_polygon(4), square_symmetries())
        assert not pairs_transitive(self_dual_polygon(4), [linalg.identity(3)])
