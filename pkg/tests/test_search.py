import numpy as np
import pytest

from cyclectx.ncycle import (
    even_ncycle_behavior,
    odd_ncycle_behavior,
    unified_ncycle_behavior,
)
from cyclectx.quantum import (
    _PenaltyProblem,
    _descend,
    SearchFailure,
    behavior_from_realization,
    find_quantum_realization,
    realization_to_doc,
)
from cyclectx.scenario import (
    PossibilisticBehavior,
    make_cycle_scenario,
    possibilistic_collapse,
    supports_within,
)


def unified_problem(n, dim, ranks):
    forb = tuple(((i, i + 1), (0, 1)) for i in range(1, n))
    req = (((1, n), (0, 1)),)
    ctxs = tuple((i, i + 1) for i in range(1, n)) + ((1, n),)
    return _PenaltyProblem(n, dim, ranks, forb, req, ctxs)


class TestGradient:
    @pytest.mark.parametrize("dim,ranks", [(3, (1, 1, 1, 1, 1)), (4, (2, 1, 2, 1, 3))])
    def test_matches_finite_differences(self, dim, ranks):
        prob = unified_problem(5, dim, ranks)
        rng = np.random.default_rng(11)
        x = rng.standard_normal(prob.num_params())
        val, grad = prob.objective_and_grad(x)
        h = 1e-6
        num = np.zeros_like(x)
        for k in range(len(x)):
            xp = x.copy(); xp[k] += h
            xm = x.copy(); xm[k] -= h
            num[k] = (prob.objective(xp) - prob.objective(xm)) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(num))))
        assert np.max(np.abs(grad - num)) / scale < 1e-6


class TestDescent:
    def test_log_is_monotone(self):
        prob = unified_problem(5, 3, (1, 1, 1, 1, 1))
        x0 = np.random.default_rng(3).standard_normal(prob.num_params())
        _, _, log, _ = _descend(prob, x0, 300)
        assert all(log[k + 1] <= log[k] for k in range(len(log) - 1))

    def test_iteration_budget_respected(self):
        prob = unified_problem(5, 3, (1, 1, 1, 1, 1))
        x0 = np.random.default_rng(4).standard_normal(prob.num_params())
        _, _, _, used = _descend(prob, x0, 25)
        assert used <= 25


class TestFind:
    def test_alternating_five_cycle_dim3(self):
        s = make_cycle_scenario(5)
        target = odd_ncycle_behavior(5)
        r = find_quantum_realization(s, target, 3, seed=1)
        assert not isinstance(r, SearchFailure)
        assert all(r.rank(i) == 1 for i in r.frames)
        pb = possibilistic_collapse(behavior_from_realization(r, s))
        assert supports_within(pb, target)
        assert pb.possible(*target.required)

    def test_unified_four_cycle_dim4(self):
        s = make_cycle_scenario(4)
        target = unified_ncycle_behavior(4)
        r = find_quantum_realization(s, target, 4, seed=1)
        assert not isinstance(r, SearchFailure)
        b = behavior_from_realization(r, s)
        pb = possibilistic_collapse(b)
        assert supports_within(pb, target)
        assert pb.possible(*target.required)
        from cyclectx.scenario import check_no_disturbance

        assert check_no_disturbance(b, 1e-12)

    def test_unified_odd_cycle_uses_complement_frames(self):
        s = make_cycle_scenario(5)
        r = find_quantum_realization(s, unified_ncycle_behavior(5), 3, seed=1)
        assert not isinstance(r, SearchFailure)
        assert sorted(r.rank(i) for i in r.frames) == [1, 1, 2, 2, 2]

    def test_even_form_target(self):
        s = make_cycle_scenario(6)
        target = even_ncycle_behavior(6)
        r = find_quantum_realization(s, target, 4, seed=1)
        assert not isinstance(r, SearchFailure)
        pb = possibilistic_collapse(behavior_from_realization(r, s))
        assert supports_within(pb, target)
        assert pb.possible(*target.required)

    def test_dim2_five_cycle_fails_with_budget_report(self):
        s = make_cycle_scenario(5)
        out = find_quantum_realization(s, odd_ncycle_behavior(5), 2, seed=1, budget=1500)
        assert isinstance(out, SearchFailure)
        assert np.isfinite(out.best_objective)
        assert out.iterations_used <= 1500
        assert out.attempts >= 1

    def test_infeasible_target_rejected_in_preprocessing(self):
        s = make_cycle_scenario(4)
        target = unified_ncycle_behavior(4)
        broken = dict(target.supports)
        broken[(1, 2)] = frozenset()
        # bypass the constructor invariant to exercise the defensive check
        bad = object.__new__(PossibilisticBehavior)
        object.__setattr__(bad, "scenario", target.scenario)
        object.__setattr__(bad, "supports", broken)
        object.__setattr__(bad, "kind", None)
        object.__setattr__(bad, "required", None)
        out = find_quantum_realization(s, bad, 4, seed=1)
        assert isinstance(out, SearchFailure)
        assert "infeasible" in out.message

    def test_deterministic_given_seed(self):
        s = make_cycle_scenario(4)
        target = unified_ncycle_behavior(4)
        a = find_quantum_realization(s, target, 4, seed=7)
        b = find_quantum_realization(s, target, 4, seed=7)
        assert realization_to_doc(a) == realization_to_doc(b)

    def test_scenario_mismatch_rejected(self):
        from cyclectx.quantum import RealizationError

        with pytest.raises(RealizationError):
            find_quantum_realization(make_cycle_scenario(4),
                                     unified_ncycle_behavior(5), 3)
