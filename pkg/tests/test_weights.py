import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccsubmod.fitness import Subset
from ccsubmod.oracle import empirical_violation_probability
from ccsubmod.weights import (BoundKind, WeightModel, chebyshev_bound,
                              chernoff_bound, expected_weight, sample_weight,
                              sample_total_weights,
                              surrogate_violation_probability)


def uniform_model(n, a=1.0, delta=0.5, C=20.0, alpha=0.1):
    return WeightModel.uniform(n, a, dispersion=delta, bound=C, alpha=alpha)


def prefix(n, k):
    return Subset(n, (1 << k) - 1)


class TestWeightModel:
    def test_rejects_dispersion_above_smallest_weight(self):
        with pytest.raises(ValueError, match="dispersion"):
            WeightModel((1.0, 0.4), 0.5, 10.0, 0.1)

    def test_rejects_negative_expected_weight(self):
        with pytest.raises(ValueError):
            WeightModel((1.0, -0.1), 0.0, 10.0, 0.1)

    def test_rejects_nonpositive_budget(self):
        with pytest.raises(ValueError):
            WeightModel((1.0,), 0.0, 0.0, 0.1)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_rejects_alpha_outside_open_interval(self, alpha):
        with pytest.raises(ValueError):
            WeightModel((1.0,), 0.0, 10.0, alpha)

    def test_uniform_value_detection(self):
        assert uniform_model(5).uniform_value == 1.0
        assert WeightModel((1.0, 2.0), 0.5, 10.0, 0.1).uniform_value is None


class TestExpectedWeight:
    def test_empty_set_is_zero(self):
        assert expected_weight(Subset(5), uniform_model(5)) == 0.0

    def test_uniform_unit_weights_count_elements(self):
        m = uniform_model(30)
        assert expected_weight(prefix(30, 20), m) == 20.0

    def test_hand_summation(self):
        m = WeightModel((0.5, 1.5, 2.0), 0.0, 10.0, 0.1)
        assert expected_weight(Subset.from_indices(3, [0, 2]), m) == 2.5

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError, match="elements"):
            expected_weight(Subset(4), uniform_model(5))


class TestChebyshevBound:
    def test_hand_evaluated_quarter(self):
        # delta^2 |X| / (delta^2 |X| + 3 slack^2) = 4 / (4 + 12)
        m = uniform_model(10, a=1.5, delta=1.0, C=8.0)
        assert chebyshev_bound(prefix(10, 4), m) == pytest.approx(0.25)

    def test_hand_evaluated_sixteen_of_twenty(self):
        # 0.25*16 / (0.25*16 + 3*16) = 4/52
        m = uniform_model(20, delta=0.5, C=20.0)
        assert chebyshev_bound(prefix(20, 16), m) == pytest.approx(4.0 / 52.0)

    def test_zero_dispersion_gives_zero(self):
        m = uniform_model(10, delta=0.0, C=5.0)
        assert chebyshev_bound(prefix(10, 3), m) == 0.0

    def test_rejects_expected_weight_at_budget(self):
        m = uniform_model(10, delta=0.5, C=4.0)
        with pytest.raises(ValueError):
            chebyshev_bound(prefix(10, 4), m)

    def test_rejects_empty_set(self):
        with pytest.raises(ValueError):
            chebyshev_bound(Subset(10), uniform_model(10))

    @pytest.mark.parametrize("delta_pair", [(0.2, 0.4), (0.5, 1.0)])
    def test_nondecreasing_in_dispersion_at_fixed_slack(self, delta_pair):
        lo, hi = delta_pair
        m_lo = uniform_model(12, delta=lo, C=10.0)
        m_hi = uniform_model(12, delta=hi, C=10.0)
        X = prefix(12, 8)
        assert chebyshev_bound(X, m_lo) <= chebyshev_bound(X, m_hi)

    def test_nondecreasing_in_cardinality_at_fixed_slack(self):
        # same slack C - E_W: grow the set while growing C in lockstep
        for k in range(2, 10):
            m_k = uniform_model(12, delta=0.5, C=k + 2.0)
            m_next = uniform_model(12, delta=0.5, C=k + 3.0)
            assert (chebyshev_bound(prefix(12, k), m_k)
                    <= chebyshev_bound(prefix(12, k + 1), m_next))


class TestChernoffBound:
    def test_zero_slack_gives_one(self):
        m = uniform_model(10, delta=0.5, C=4.0)
        assert chernoff_bound(prefix(10, 4), m) == 1.0

    def test_hand_evaluated_e_over_four(self):
        # u = 1, |X| = 2: (e/4)^1
        m = uniform_model(10, delta=1.0, C=4.0)
        assert chernoff_bound(prefix(10, 2), m) == pytest.approx(math.e / 4.0)

    def test_matches_direct_power_form(self):
        # log-space evaluation against the direct expression
        for k in (1, 2, 5, 17):
            for C in (k + 0.3, k + 1.0, 2.0 * k):
                m = uniform_model(20, delta=1.0, C=C)
                u = (C - k) / k
                direct = (math.exp(u) / (1 + u) ** (1 + u)) ** (k / 2)
                assert chernoff_bound(prefix(20, k), m) == pytest.approx(direct)

    def test_large_sets_stay_finite(self):
        m = uniform_model(5000, delta=1.0, C=5100.0)
        val = chernoff_bound(prefix(5000, 5000), m)
        assert 0.0 <= val <= 1.0

    def test_strictly_decreasing_in_budget_until_clamp(self):
        k = 6
        previous = None
        for C in np.linspace(6.0, 11.5, 40):
            m = uniform_model(12, delta=1.0, C=float(C))
            val = chernoff_bound(prefix(12, k), m)
            if previous is not None and previous < 1.0:
                assert val < previous
            previous = val

    def test_rejects_zero_dispersion(self):
        m = uniform_model(10, delta=0.0, C=5.0)
        with pytest.raises(ValueError):
            chernoff_bound(prefix(10, 2), m)

    def test_rejects_overweight_set(self):
        m = uniform_model(10, delta=0.5, C=2.0)
        with pytest.raises(ValueError):
            chernoff_bound(prefix(10, 5), m)


class TestSurrogate:
    def test_empty_set(self):
        assert surrogate_violation_probability(
            Subset(10), uniform_model(10), BoundKind.CHEBYSHEV) == 0.0

    def test_certainty_condition(self):
        # slack 5 >= delta*|X| = 5: no draw can exceed the budget
        m = uniform_model(10, delta=1.0, C=10.0)
        assert surrogate_violation_probability(
            prefix(10, 5), m, BoundKind.CHEBYSHEV) == 0.0

    def test_dispatches_to_chebyshev(self):
        m = uniform_model(20, delta=0.5, C=20.0)
        val = surrogate_violation_probability(prefix(20, 19), m,
                                              BoundKind.CHEBYSHEV)
        assert val == pytest.approx(4.75 / 7.75)

    def test_saturates_when_overweight(self):
        m = uniform_model(10, delta=0.5, C=3.0)
        assert surrogate_violation_probability(
            prefix(10, 5), m, BoundKind.CHERNOFF) == 1.0

    def test_deterministic_weights_at_budget_are_safe(self):
        m = uniform_model(10, delta=0.0, C=4.0)
        assert surrogate_violation_probability(
            prefix(10, 4), m, BoundKind.CHEBYSHEV) == 0.0

    @given(st.integers(1, 16), st.integers(0, 16),
           st.floats(0.0, 1.0), st.floats(0.5, 40.0),
           st.sampled_from(list(BoundKind)))
    @settings(max_examples=200, deadline=None)
    def test_always_a_probability(self, n, card, delta, C, kind):
        card = min(card, n)
        m = WeightModel.uniform(n, 1.0, dispersion=delta, bound=C, alpha=0.1)
        val = surrogate_violation_probability(prefix(n, card), m, kind)
        assert 0.0 <= val <= 1.0

    @given(st.permutations(list(range(6))), st.integers(1, 63),
           st.sampled_from(list(BoundKind)))
    @settings(max_examples=80, deadline=None)
    def test_permutation_invariance(self, perm, mask, kind):
        weights = (0.5, 0.8, 1.1, 1.4, 1.7, 2.0)
        m = WeightModel(weights, 0.4, 4.0, 0.1)
        permuted = WeightModel(tuple(weights[perm[i]] for i in range(6)),
                               0.4, 4.0, 0.1)
        X = Subset(6, mask)
        X_perm = Subset.from_indices(
            6, [i for i in range(6) if perm[i] in X])
        assert (surrogate_violation_probability(X, m, kind)
                == pytest.approx(surrogate_violation_probability(
                    X_perm, permuted, kind)))


class TestSampling:
    def test_zero_dispersion_returns_expected_weight(self):
        m = uniform_model(10, delta=0.0, C=5.0)
        rng = np.random.default_rng(0)
        assert sample_weight(prefix(10, 4), m, rng) == 4.0

    def test_single_element_support(self):
        m = uniform_model(1, delta=1.0, C=5.0)
        rng = np.random.default_rng(1)
        for _ in range(200):
            assert 0.0 <= sample_weight(Subset(1, 1), m, rng) <= 2.0

    def test_mean_matches_expected_weight(self):
        m = uniform_model(9, delta=1.0, C=100.0)
        X = prefix(9, 9)
        totals = sample_total_weights(X, m, 1_000_000, np.random.default_rng(3))
        tolerance = 3.0 * 1.0 * math.sqrt(9) / math.sqrt(3.0 * 1_000_000)
        assert abs(totals.mean() - 9.0) < tolerance

    def test_certainty_region_never_violates(self):
        m = uniform_model(10, delta=1.0, C=10.0)
        X = prefix(10, 5)
        totals = sample_total_weights(X, m, 20_000, np.random.default_rng(5))
        assert np.all(totals <= m.bound)

    @pytest.mark.parametrize("kind", list(BoundKind))
    def test_bounds_dominate_empirical_frequency(self, kind):
        rng = np.random.default_rng(11)
        for trial in range(20):
            n = int(rng.integers(2, 20))
            a = rng.uniform(0.5, 2.0, size=n)
            delta = float(rng.uniform(0.05, a.min()))
            card = int(rng.integers(1, n + 1))
            X = Subset.from_indices(n, (int(v) for v in
                                        rng.choice(n, card, replace=False)))
            ew = sum(a[i] for i in X.indices())
            C = float(ew + rng.uniform(0.05, 1.2) * delta * card)
            m = WeightModel(tuple(a), delta, C, 0.1)
            surrogate = surrogate_violation_probability(X, m, kind)
            empirical = empirical_violation_probability(X, m, 100_000, trial)
            slack = 3.0 * math.sqrt(empirical * (1 - empirical) / 100_000)
            assert empirical <= surrogate + slack
