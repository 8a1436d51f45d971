import numpy as np
import pytest

from cyclectx.ncycle import odd_ncycle_behavior
from cyclectx.quantum import (
    NoncommutingError,
    PairDistribution,
    QuantumRealization,
    RealizationError,
    behavior_from_realization,
    born_pair,
    kcbs_realization,
    realization_from_doc,
    realization_to_doc,
    verify_compatibility,
)
from cyclectx.scenario import (
    Scenario,
    check_no_disturbance,
    make_cycle_scenario,
    possibilistic_collapse,
    supports_within,
)


class TestKcbsRealization:
    def test_normalization(self, kcbs):
        assert abs(np.linalg.norm(kcbs.state) - 1) < 1e-12
        for i in range(1, 6):
            assert abs(np.linalg.norm(kcbs.vectors[i]) - 1) < 1e-12

    def test_adjacent_orthogonality(self, kcbs):
        v = kcbs.vectors
        for i in range(1, 6):
            j = i % 5 + 1
            assert abs(np.vdot(v[i], v[j])) < 1e-15

    def test_state_overlap_with_v1(self, kcbs):
        assert abs(np.vdot(kcbs.vectors[1], kcbs.state) - 1 / 3) < 1e-15

    def test_outcome_marginals(self, kcbs):
        expected = {1: 1 / 9, 2: 2 / 3, 3: 1 / 3, 4: 1 / 3, 5: 2 / 3}
        for i, want in expected.items():
            got = abs(np.vdot(kcbs.vectors[i], kcbs.state)) ** 2
            assert abs(got - want) < 1e-12


class TestBornPair:
    def test_forbidden_entries(self, kcbs):
        assert born_pair(kcbs, 1, 2)[(1, 1)] <= 1e-15
        assert born_pair(kcbs, 2, 3)[(0, 0)] <= 1e-15
        assert born_pair(kcbs, 3, 4)[(1, 1)] <= 1e-15
        assert born_pair(kcbs, 4, 5)[(0, 0)] <= 1e-15

    def test_closing_pair_in_argument_order(self, kcbs):
        # distribution keys follow (a_5, a_1) when called as (5, 1)
        assert abs(born_pair(kcbs, 5, 1)[(0, 1)] - 1 / 9) < 1e-12
        assert abs(born_pair(kcbs, 1, 5)[(1, 0)] - 1 / 9) < 1e-12

    def test_full_table_context_12(self, kcbs):
        # frozen from the independent trace computation
        table = born_pair(kcbs, 1, 2)
        assert abs(table[(0, 0)] - 2 / 9) < 1e-12
        assert abs(table[(0, 1)] - 2 / 3) < 1e-12
        assert abs(table[(1, 0)] - 1 / 9) < 1e-12
        assert table[(1, 1)] <= 1e-15

    def test_noncommuting_pair_rejected(self, kcbs):
        with pytest.raises(NoncommutingError):
            born_pair(kcbs, 1, 3)

    def test_marginals_independent_of_partner(self, kcbs):
        # sum_b p(a_i=1, b) equals |<v_i|state>|^2 for both neighbors
        for i in range(1, 6):
            want = abs(np.vdot(kcbs.vectors[i], kcbs.state)) ** 2
            left, right = (i - 2) % 5 + 1, i % 5 + 1
            for j in (left, right):
                t = born_pair(kcbs, i, j)
                got = t[(1, 0)] + t[(1, 1)]
                assert abs(got - want) < 1e-12


class TestBehaviorFromRealization:
    def test_collapse_consistent_with_alternating_pattern(self, kcbs, cycle5):
        b = behavior_from_realization(kcbs, cycle5)
        pb = possibilistic_collapse(b)
        target = odd_ncycle_behavior(5)
        assert supports_within(pb, target)
        assert pb.possible(*target.required)

    def test_no_disturbance(self, kcbs, cycle5):
        assert check_no_disturbance(behavior_from_realization(kcbs, cycle5), 1e-12)

    def test_tables_normalized(self, kcbs, cycle5):
        b = behavior_from_realization(kcbs, cycle5)
        for c in cycle5.contexts:
            assert abs(sum(b.tables[c].values()) - 1) < 1e-12


class TestVerifyCompatibility:
    def test_kcbs_contexts_commute(self, kcbs, cycle5):
        rep = verify_compatibility(kcbs, cycle5)
        assert rep.passed
        assert all(v <= 1e-12 for v in rep.context_norms.values())

    def test_noncontext_pairs_reported(self, kcbs, cycle5):
        rep = verify_compatibility(kcbs, cycle5)
        assert rep.noncontext_norms[(1, 3)] > 0.1
        assert set(rep.noncontext_norms) == {(1, 3), (1, 4), (2, 4), (2, 5), (3, 5)}

    def test_single_measurement_scenario(self, kcbs):
        s = Scenario((1,), ((1,),))
        rep = verify_compatibility(kcbs, s)
        assert rep.passed and rep.context_norms == {} and rep.noncontext_norms == {}


class TestPairDistribution:
    def test_tiny_negative_clamped(self):
        d = PairDistribution((1, 2), {(0, 0): 1.0, (0, 1): -1e-16, (1, 0): 0.0, (1, 1): 0.0})
        assert d[(0, 1)] == 0.0

    def test_large_negative_rejected(self):
        with pytest.raises(RealizationError):
            PairDistribution((1, 2), {(0, 0): 1.0, (0, 1): -1e-3})

    def test_bad_sum_rejected(self):
        with pytest.raises(RealizationError):
            PairDistribution((1, 2), {(0, 0): 0.5, (0, 1): 0.1})


class TestRealizationValidation:
    def test_unnormalized_state(self):
        with pytest.raises(RealizationError):
            QuantumRealization(3, np.array([1.0, 1.0, 0.0]),
                               {1: np.eye(3)[:, :1]})

    def test_non_orthonormal_frame(self):
        f = np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(RealizationError):
            QuantumRealization(3, np.array([1.0, 0, 0]), {1: f})

    def test_vectors_view_requires_rank_one(self, kcbs):
        frames = dict(kcbs.frames)
        frames[1] = np.eye(3, dtype=complex)[:, :2]
        r = QuantumRealization(3, kcbs.state, frames)
        with pytest.raises(RealizationError):
            _ = r.vectors


class TestSerialization:
    def test_rank_one_uses_vectors_key(self, kcbs):
        doc = realization_to_doc(kcbs)
        assert "vectors" in doc and "frames" not in doc
        assert doc["dim"] == 3
        assert doc["state"][0] == [pytest.approx(1 / np.sqrt(3)), 0.0]
        back = realization_from_doc(doc)
        for i in range(1, 6):
            np.testing.assert_allclose(back.vectors[i], kcbs.vectors[i], atol=0)

    def test_multirank_round_trip(self, kcbs):
        frames = dict(kcbs.frames)
        frames[1] = np.eye(3, dtype=complex)[:, :2]
        r = QuantumRealization(3, kcbs.state, frames)
        doc = realization_to_doc(r)
        assert "frames" in doc and "vectors" not in doc
        back = realization_from_doc(doc)
        np.testing.assert_allclose(back.projector(1), r.projector(1), atol=1e-15)
        np.testing.assert_allclose(back.projector(2), r.projector(2), atol=1e-15)
