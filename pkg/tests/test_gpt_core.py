from fractions import Fraction as F

import numpy as np
import pytest

from gptcone import linalg
from gptcone.errors import (DimensionMismatch, DomainError, NotAMeasurement, SingularMatrix,
                            ZeroProbability)
from gptcone.geometry import ConeV
from gptcone.gpt_core import (JointState, System, check_no_signalling, conditional_state,
                              equivalence_transform, joint_probability, marginal_state,
                              normalized_conditional, probability, standard_unit,
                              validate_system)
from gptcone.models import (boxworld, boxworld_states, classical, noisy_boxworld, polygon,
                            polygon_radius, self_dual_polygon, spekkens, spekkens_unrestricted)
from gptcone.tensor import counterexample_state, maximally_entangled, spekkens_entangled_state

H = F(1, 2)
E1 = (H, H, H)
U3 = standard_unit(3)
W1, W2, W3, W4 = boxworld_states()


def phi():
    return maximally_entangled(boxworld())


class TestProbability:
    def test_boxworld_certain_outcome(self):
        assert probability(E1, W1) == 1
        assert probability((H, -H, H), W1) == 1

    def test_unit_on_any_state(self):
        for w in boxworld_states():
            assert probability(U3, w) == 1

    def test_self_dualized_effect_on_opposite_state(self):
        # e'_1 = w1 / 2 on w3
        assert probability(tuple(x / 2 for x in W1), W3) == 0

    def test_checks_membership_when_system_given(self):
        with pytest.raises(DomainError):
            probability((1, 1, 1), W1, boxworld())
        with pytest.raises(DomainError):
            probability(E1, (2, 0, 1), boxworld())

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            probability((1, 1), W1)

    def test_range_on_all_vertex_pairs(self):
        for system in (boxworld(), noisy_boxworld(F(1, 3)), self_dual_polygon(4), spekkens(),
                       spekkens_unrestricted(), classical(3)):
            for e in system.effect_vertices:
                for w in system.pure_states:
                    p = probability(e, w)
                    assert 0 <= p <= 1


class TestJointStates:
    def test_product_factorizes(self):
        w = JointState.product(W1, W1)
        assert joint_probability(w, E1, E1) == 1

    def test_phi_normalized_with_mixed_marginals(self):
        assert joint_probability(phi(), U3, U3) == 1
        assert marginal_state(phi(), "A") == (0, 0, 1)
        assert marginal_state(phi(), "B") == (0, 0, 1)

    def test_phi_coefficients(self):
        w = JointState.combination([(H, W1, W2), (-H, W2, W2), (H, W2, W3), (H, W3, W1)])
        assert w.matrix == phi().matrix

    def test_spekkens_state(self):
        w = spekkens_entangled_state()
        u = standard_unit(4)
        assert joint_probability(w, u, u) == 1
        assert marginal_state(w, "A") == (0, 0, 0, 1)
        assert marginal_state(w, "B") == (0, 0, 0, 1)

    def test_flat_is_row_major(self):
        w = JointState([[1, 2], [3, 4]])
        assert w.flat == (1, 2, 3, 4)
        assert JointState.from_flat(w.flat, 2, 2).matrix == w.matrix
        assert linalg.kron((1, 2), (3, 4)) == JointState.product((1, 2), (3, 4)).flat


class TestConditionals:
    def test_marginal_of_phi(self):
        assert conditional_state(phi(), U3, "A") == (0, 0, 1)

    def test_product_conditional(self):
        w = JointState.product(W1, W2)
        assert conditional_state(w, E1, "A") == tuple(probability(E1, W2) * x for x in W1)
        assert normalized_conditional(w, E1, "A") == W1

    def test_counterexample_steers_outside(self):
        # polygon indexing: e'_1 = (0, 1, 1) / 2
        e = (0, H, H)
        assert normalized_conditional(counterexample_state(), e, "A") == (-1, 1, 1)
        assert not self_dual_polygon(4).contains_state((-1, 1, 1))

    def test_phi_conditional_is_pure(self):
        cond = normalized_conditional(phi(), E1, "A")
        assert cond in boxworld_states()

    def test_zero_probability(self):
        w = JointState.product(W1, W3)
        with pytest.raises(ZeroProbability):
            normalized_conditional(w, (H, H, H), "A")

    def test_steering_is_linear(self):
        rng = np.random.default_rng(7)
        w = phi()
        for _ in range(20):
            e, f = [tuple(F(int(x), 4) for x in rng.integers(-4, 5, size=3)) for _ in range(2)]
            a, b = F(int(rng.integers(1, 5))), F(int(rng.integers(1, 5)))
            combo = tuple(a * x + b * y for x, y in zip(e, f))
            lhs = conditional_state(w, combo, "B")
            ce, cf = conditional_state(w, e, "B"), conditional_state(w, f, "B")
            assert lhs == tuple(a * x + b * y for x, y in zip(ce, cf))


class TestNoSignalling:
    def test_phi(self):
        assert check_no_signalling(phi(), [E1, tuple(u - x for u, x in zip(U3, E1))], "A")

    def test_products(self):
        w = JointState.product(W2, W4)
        m = [(H, H, H), (-H, -H, H)]
        assert check_no_signalling(w, m, "A") and check_no_signalling(w, m, "B")

    def test_imperfect_measurement(self):
        with pytest.raises(NotAMeasurement):
            check_no_signalling(phi(), [E1], "A")

    def test_random_mixtures(self):
        rng = np.random.default_rng(11)
        w1 = phi()
        w2 = JointState.product(W1, W4)
        m = [(H, -H, H), (-H, H, H)]
        for _ in range(50):
            p = F(int(rng.integers(0, 9)), 8)
            w = w1.scaled(p) + w2.scaled(1 - p)
            for side in ("A", "B"):
                assert check_no_signalling(w, m, side)


class TestEquivalenceTransform:
    def test_identity(self):
        s = boxworld()
        t = equivalence_transform(s, linalg.identity(3))
        assert t.state_cone == s.state_cone and t.effect_cone == s.effect_cone

    def test_polygon_shrink(self):
        n = 6
        r = polygon_radius(n)
        s = polygon(n)
        t = equivalence_transform(s, linalg.diag([r, r, 1.0]))
        for w in t.pure_states:
            assert np.hypot(float(w[0]), float(w[1])) == pytest.approx(1.0)

    def test_probabilities_preserved(self):
        s = noisy_boxworld(F(2, 3))
        L = linalg.matrix([[2, 1, 0], [0, 1, 0], [1, 0, 3]])
        t = equivalence_transform(s, L)
        inv = linalg.inverse(L)
        lt = linalg.transpose(L)
        for e in s.effect_vertices:
            for w in s.pure_states:
                assert probability(linalg.matvec(lt, e), linalg.matvec(inv, w)) == probability(e, w)
        assert validate_system(t).passed

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            equivalence_transform(boxworld(), [[1, 0, 0], [0, 0, 0], [0, 0, 1]])


class TestValidateSystem:
    @pytest.mark.parametrize("build", [boxworld, lambda: noisy_boxworld(H), spekkens,
                                       spekkens_unrestricted, lambda: classical(2),
                                       lambda: self_dual_polygon(4), lambda: polygon(5)])
    def test_builtins_pass(self, build):
        report = validate_system(build())
        assert report.passed, report.failures()

    def test_missing_effect_breaks_complement(self):
        s = boxworld()
        effects = ConeV([(-H, H, H), (-H, -H, H), (H, -H, H), U3])
        broken = System(s.state_cone, effects, U3, "boxworld without e1")
        report = validate_system(broken)
        assert not report["complement"].passed
        assert report["unit"].passed

    def test_unit_not_allowed(self):
        # effects generated by e1, e4 and (1, 0, 0): u = (0, 0, 1) is outside
        s = boxworld()
        report = validate_system(System(s.state_cone, ConeV([(1, 1, 1), (1, -1, 1), (1, 0, 0)]),
                                        U3, "tilted"))
        assert not report["unit"].passed

    def test_negative_effect(self):
        s = boxworld()
        bad = System(s.state_cone, ConeV([(1, 1, 0), (-1, 1, 0), (0, 0, 1), (0, -1, 1)]), U3)
        assert not validate_system(bad)["positivity"].passed

    def test_transformations(self):
        s = boxworld()
        rot = [[0, -1, 0], [1, 0, 0], [0, 0, 1]]
        shear = [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
        assert validate_system(s, [rot])["transformations"].passed
        assert not validate_system(s, [shear])["transformations"].passed
