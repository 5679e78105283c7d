import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccsubmod.fitness import (Dominance, Formulation, ObjectivePair, Subset,
                              constraint_evaluator, dominates, eval_g1,
                              eval_g1_hat, eval_g2)
from ccsubmod.weights import BoundKind, WeightModel


def uniform_model(n, a=1.0, delta=0.5, C=20.0, alpha=0.1):
    return WeightModel.uniform(n, a, dispersion=delta, bound=C, alpha=alpha)


def prefix(n, k):
    return Subset(n, (1 << k) - 1)


class TestSubset:
    def test_cardinality_tracks_popcount(self):
        assert Subset(8, 0b1011).card == 3

    def test_empty(self):
        s = Subset(5)
        assert s.card == 0 and s.indices() == []

    def test_from_indices_roundtrip(self):
        s = Subset.from_indices(10, [1, 4, 9])
        assert s.indices() == [1, 4, 9]
        assert 4 in s and 5 not in s

    def test_rejects_out_of_range_mask(self):
        with pytest.raises(ValueError):
            Subset(3, 0b1000)

    def test_rejects_out_of_range_index(self):
        with pytest.raises(ValueError):
            Subset.from_indices(3, [3])

    def test_flipped(self):
        assert Subset(4, 0b0011).flipped(0b0110).mask == 0b0101

    def test_hex_encoding(self):
        assert Subset(16, 0xbeef).to_hex() == "beef"

    @given(st.integers(1, 64), st.data())
    def test_card_equals_popcount(self, n, data):
        mask = data.draw(st.integers(0, (1 << n) - 1))
        assert Subset(n, mask).card == bin(mask).count("1")


class TestG1:
    def test_empty_set_is_certainly_feasible(self):
        assert eval_g1(Subset(30), uniform_model(30), BoundKind.CHEBYSHEV) == -20.0

    def test_overweight_case(self):
        m = uniform_model(30)
        assert eval_g1(prefix(30, 25), m, BoundKind.CHEBYSHEV) == 6.0

    def test_tail_bound_case(self):
        m = uniform_model(20, delta=0.5, C=20.0)
        assert eval_g1(prefix(20, 16), m,
                       BoundKind.CHEBYSHEV) == pytest.approx(4.0 / 52.0)

    def test_expected_weight_at_budget_with_zero_dispersion_is_safe(self):
        # worst-case draw equals the budget exactly, so violation is impossible
        m = uniform_model(20, delta=0.0, C=20.0)
        assert eval_g1(prefix(20, 20), m, BoundKind.CHEBYSHEV) == 0.0

    def test_expected_weight_at_budget_with_dispersion_is_not(self):
        m = uniform_model(20, delta=0.5, C=16.0)
        assert eval_g1(prefix(20, 16), m, BoundKind.CHEBYSHEV) == 1.0

    @pytest.mark.parametrize("kind", list(BoundKind))
    @pytest.mark.parametrize("delta,alpha", [(0.5, 0.1), (1.0, 0.1),
                                             (0.5, 0.001), (1.0, 0.001)])
    def test_identical_weights_collapse_to_cardinality(self, kind, delta, alpha):
        m = uniform_model(12, delta=delta, C=6.0, alpha=alpha)
        for k in range(13):
            reference = eval_g1(prefix(12, k), m, kind)
            scattered = Subset.from_indices(12, range(12 - k, 12))
            assert eval_g1(scattered, m, kind) == reference

    @pytest.mark.parametrize("kind", list(BoundKind))
    def test_strictly_increasing_in_cardinality(self, kind):
        m = uniform_model(25, delta=0.5, C=10.0)
        values = [eval_g1(prefix(25, k), m, kind) for k in range(26)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @given(st.integers(1, 20), st.data(),
           st.sampled_from(list(BoundKind)))
    @settings(max_examples=150, deadline=None)
    def test_closure_matches_public_evaluation(self, n, data, kind):
        weights = tuple(data.draw(st.floats(0.5, 3.0)) for _ in range(n))
        delta = data.draw(st.floats(0.0, min(weights)))
        C = data.draw(st.floats(0.5, 2.0 * n))
        mask = data.draw(st.integers(0, (1 << n) - 1))
        m = WeightModel(weights, delta, C, 0.1)
        X = Subset(n, mask)
        g1, ew = constraint_evaluator(m, kind)(mask, X.card)
        assert g1 == eval_g1(X, m, kind)
        assert ew == pytest.approx(m.expected_of_mask(mask, X.card))


class TestG2:
    def test_empty_set_scores_its_value(self):
        assert eval_g2(0.0, -20.0, 0.1) == 0.0

    def test_infeasible_branch(self):
        assert eval_g2(300.0, 0.61, 0.1) == -1.0

    def test_feasible_branch(self):
        assert eval_g2(300.0, 0.02, 0.1) == 300.0

    @given(st.floats(0.0, 1e6), st.floats(-50.0, 50.0), st.floats(0.001, 0.5))
    def test_never_lands_strictly_between_minus_one_and_zero(self, f, g1, alpha):
        val = eval_g2(f, g1, alpha)
        assert val == -1.0 or val >= 0.0


class TestG1Hat:
    def test_empty(self):
        assert eval_g1_hat(Subset(5), uniform_model(5)) == 0.0

    def test_uniform_counts(self):
        assert eval_g1_hat(prefix(10, 7), uniform_model(10)) == 7.0

    def test_general_sum(self):
        m = WeightModel((2.0, 3.0), 0.0, 10.0, 0.1)
        assert eval_g1_hat(Subset(2, 0b11), m) == 5.0


def pair(o1, o2, form=Formulation.G):
    return ObjectivePair(o1, o2, form)


class TestDominance:
    def test_feasible_beats_infeasible(self):
        assert dominates(pair(0.02, 300.0), pair(0.61, -1.0)) is Dominance.STRONG

    def test_reflexive_weak(self):
        p = pair(0.02, 300.0)
        assert dominates(p, p) is Dominance.WEAK

    def test_incomparable(self):
        assert dominates(pair(0.02, 300.0), pair(0.01, 310.0)) is Dominance.NONE

    def test_formulation_mismatch_raises(self):
        with pytest.raises(ValueError):
            dominates(pair(1.0, 1.0), pair(1.0, 1.0, Formulation.G_HAT))

    @given(st.tuples(st.floats(-5, 5), st.floats(-1, 5)),
           st.tuples(st.floats(-5, 5), st.floats(-1, 5)),
           st.tuples(st.floats(-5, 5), st.floats(-1, 5)))
    @settings(max_examples=300)
    def test_transitivity(self, a, b, c):
        pa, pb, pc = pair(*a), pair(*b), pair(*c)
        if (dominates(pa, pb) is not Dominance.NONE
                and dominates(pb, pc) is not Dominance.NONE):
            assert dominates(pa, pc) is not Dominance.NONE

    @given(st.tuples(st.floats(-5, 5), st.floats(-1, 5)))
    def test_strong_is_irreflexive(self, a):
        assert dominates(pair(*a), pair(*a)) is Dominance.WEAK

    @pytest.mark.parametrize("kind", list(BoundKind))
    def test_any_feasible_strongly_dominates_any_infeasible(self, kind):
        m = uniform_model(20, delta=0.5, C=10.0)
        feasible, infeasible = [], []
        for k in range(21):
            X = prefix(20, k)
            g1 = eval_g1(X, m, kind)
            g2 = eval_g2(float(k * 3), g1, m.alpha)  # any monotone f stand-in
            (feasible if g1 <= m.alpha else infeasible).append(pair(g1, g2))
        assert feasible and infeasible
        for good in feasible:
            for bad in infeasible:
                assert dominates(good, bad) is Dominance.STRONG
