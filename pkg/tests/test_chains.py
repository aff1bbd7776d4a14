"""Chain construction: validation, adoption-table expectations, and the
closed-form entries of the voter, sampled, full-knowledge and mirror chains."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opinionlab.chains import (
    BirthDeathChain,
    Boundary,
    FullKnowledgeRule,
    MemorylessRule,
    binomial_expectation,
    chi_window,
    full_knowledge_chain,
    mirror_chain,
    sample_chain_from_rule,
    voter_chain,
)
from opinionlab.dynamics import majority_rule, mean_rule, voter_rule


def _chain(up, down, low=1, boundary=Boundary.ABSORBING):
    up = np.asarray(up, dtype=float)
    return BirthDeathChain(low, low + len(up) - 1, up, np.asarray(down, dtype=float), boundary)


def _voter_like(n):
    g = np.arange(n + 1) / n
    return FullKnowledgeRule(n, g, g)


class TestBirthDeathChainValidation:
    def test_accepts_valid_absorbing_chain(self):
        chain = _chain([0.3, 0.2, 0.0], [0.0, 0.1, 0.0])
        assert chain.states == range(1, 4)
        assert chain.p(1) == 0.3 and chain.q(2) == 0.1
        assert chain.r(2) == pytest.approx(0.7)

    def test_low_state_must_be_positive(self):
        with pytest.raises(ValueError, match="low state"):
            _chain([0.3, 0.0], [0.0, 0.0], low=0)

    def test_high_must_exceed_low(self):
        with pytest.raises(ValueError, match="exceed"):
            BirthDeathChain(2, 2, np.array([0.0]), np.array([0.0]), Boundary.ABSORBING)

    def test_array_length_checked(self):
        with pytest.raises(ValueError, match="length 3"):
            _chain([0.3, 0.2, 0.0], [0.0, 0.0])

    def test_negative_probability_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            _chain([0.3, -0.1, 0.0], [0.0, 0.1, 0.0])

    def test_row_sum_above_one_rejected(self):
        with pytest.raises(ValueError, match="exceed 1"):
            _chain([0.3, 0.7, 0.0], [0.0, 0.4, 0.0])

    def test_top_must_not_ascend(self):
        with pytest.raises(ValueError, match="top state must be 0"):
            _chain([0.3, 0.2, 0.1], [0.0, 0.1, 0.0])

    def test_bottom_must_not_descend(self):
        with pytest.raises(ValueError, match="bottom state"):
            _chain([0.3, 0.2, 0.0], [0.1, 0.1, 0.0])

    def test_absorbing_top_needs_zero_down(self):
        with pytest.raises(ValueError, match="absorbing"):
            _chain([0.3, 0.2, 0.0], [0.0, 0.1, 0.2])

    def test_reflecting_top_needs_unit_down(self):
        with pytest.raises(ValueError, match="reflecting"):
            _chain([0.3, 0.2, 0.0], [0.0, 0.1, 0.5], boundary=Boundary.REFLECTING)
        _chain([0.3, 0.2, 0.0], [0.0, 0.1, 1.0], boundary=Boundary.REFLECTING)

    def test_truncated_top_keeps_any_down(self):
        chain = _chain([0.3, 0.2, 0.0], [0.0, 0.1, 0.4], boundary=Boundary.TRUNCATED)
        assert chain.q(3) == 0.4

    def test_arrays_are_frozen(self):
        chain = _chain([0.3, 0.2, 0.0], [0.0, 0.1, 0.0])
        with pytest.raises(ValueError):
            chain.up[0] = 0.5


class TestRuleValidation:
    def test_tables_must_span_sample_counts(self):
        with pytest.raises(ValueError, match="length 3"):
            MemorylessRule(2, np.array([0.0, 1.0]), np.array([0.0, 0.5, 1.0]))

    def test_no_support_means_no_adoption(self):
        with pytest.raises(ValueError, match=r"g0\(0\)"):
            MemorylessRule(1, np.array([0.2, 1.0]), np.array([0.0, 1.0]))

    def test_full_support_means_adoption(self):
        with pytest.raises(ValueError, match=r"g1\(1\)"):
            MemorylessRule(1, np.array([0.0, 1.0]), np.array([0.0, 0.9]))

    def test_entries_outside_unit_interval_rejected(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            MemorylessRule(2, np.array([0.0, 1.2, 1.0]), np.array([0.0, 0.5, 1.0]))

    def test_sample_size_must_be_positive(self):
        with pytest.raises(ValueError, match="sample size"):
            MemorylessRule(0, np.array([0.0]), np.array([0.0]))

    def test_full_knowledge_needs_two_agents(self):
        with pytest.raises(ValueError, match="population size"):
            FullKnowledgeRule(1, np.array([0.0, 1.0]), np.array([0.0, 1.0]))


class TestBinomialExpectation:
    def test_mean_table_reproduces_the_parameter(self):
        g = np.arange(8) / 7
        assert binomial_expectation(g, 7, 0.3) == pytest.approx(0.3, rel=1e-14)

    def test_two_draw_indicator(self):
        # P(S = 2) for S ~ Binomial(2, 1/2)
        g = np.array([0.0, 0.0, 1.0])
        assert binomial_expectation(g, 2, 0.5) == pytest.approx(0.25, rel=1e-14)

    def test_majority_of_three_at_even_odds(self):
        g0 = majority_rule(3).g0
        assert binomial_expectation(g0, 3, 0.5) == pytest.approx(0.5, rel=1e-14)

    def test_degenerate_parameters_read_the_endpoints(self):
        g = np.array([0.7, 0.1, 0.9])
        assert binomial_expectation(g, 2, 0.0) == 0.7
        assert binomial_expectation(g, 2, 1.0) == 0.9

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length 4"):
            binomial_expectation(np.array([0.0, 1.0]), 3, 0.5)

    def test_parameter_outside_unit_interval_rejected(self):
        with pytest.raises(ValueError, match="prob"):
            binomial_expectation(np.array([0.0, 1.0]), 1, 1.5)

    def test_large_sample_sizes_stay_finite(self):
        g = np.arange(501) / 500
        assert binomial_expectation(g, 500, 0.013) == pytest.approx(0.013, rel=1e-12)

    @given(
        ell=st.integers(1, 20),
        prob=st.floats(0.01, 0.99),
        data=st.data(),
    )
    def test_matches_direct_pmf_sum(self, ell, prob, data):
        g = np.array(
            data.draw(
                st.lists(st.floats(0.0, 1.0), min_size=ell + 1, max_size=ell + 1)
            )
        )
        direct = sum(
            math.comb(ell, s) * prob**s * (1 - prob) ** (ell - s) * g[s]
            for s in range(ell + 1)
        )
        assert binomial_expectation(g, ell, prob) == pytest.approx(direct, abs=1e-12)


class TestVoterChain:
    def test_four_agent_entries(self):
        chain = voter_chain(4, 1)
        np.testing.assert_allclose(chain.up, [3 / 16, 4 / 16, 3 / 16, 0.0], rtol=1e-15)
        np.testing.assert_allclose(chain.down, [0.0, 2 / 16, 2 / 16, 0.0], rtol=1e-15)

    def test_two_agent_chain(self):
        chain = voter_chain(2, 1)
        assert chain.states == range(1, 3)
        assert chain.p(1) == pytest.approx(0.25)
        assert chain.q(1) == 0.0 and chain.p(2) == 0.0 and chain.q(2) == 0.0

    def test_reflecting_variant_descends_from_the_top(self):
        chain = voter_chain(8, 1, Boundary.REFLECTING)
        assert chain.q(8) == 1.0
        np.testing.assert_allclose(chain.up, voter_chain(8, 1).up)

    def test_source_count_bounds(self):
        with pytest.raises(ValueError, match="n > z >= 1"):
            voter_chain(4, 4)
        with pytest.raises(ValueError, match="n > z >= 1"):
            voter_chain(4, 0)

    def test_truncated_boundary_rejected(self):
        with pytest.raises(ValueError, match="full chain"):
            voter_chain(4, 1, Boundary.TRUNCATED)

    def test_matches_sampled_single_draw_chain(self):
        for n in (4, 7, 12):
            for z in (1, 2):
                sampled = sample_chain_from_rule(voter_rule(), n, z, Boundary.ABSORBING)
                closed = voter_chain(n, z)
                np.testing.assert_allclose(sampled.up, closed.up, rtol=1e-12, atol=1e-15)
                np.testing.assert_allclose(sampled.down, closed.down, rtol=1e-12, atol=1e-15)


class TestSampledChains:
    def test_majority_of_three_midpoint(self):
        chain = sample_chain_from_rule(majority_rule(3), 4, 1, Boundary.ABSORBING)
        assert chain.p(2) == pytest.approx(0.25, rel=1e-14)

    def test_mean_rule_collapses_to_the_voter(self):
        for ell in range(1, 9):
            for n in (4, 16, 32):
                for z in (1, 2):
                    mean = sample_chain_from_rule(mean_rule(ell), n, z, Boundary.ABSORBING)
                    vote = voter_chain(n, z)
                    np.testing.assert_allclose(mean.up, vote.up, atol=1e-12, rtol=0)
                    np.testing.assert_allclose(mean.down, vote.down, atol=1e-12, rtol=0)

    def test_rows_remain_stochastic(self):
        chain = sample_chain_from_rule(majority_rule(5), 12, 2, Boundary.ABSORBING)
        for i in chain.states:
            assert chain.p(i) >= 0.0 and chain.q(i) >= 0.0
            assert chain.p(i) + chain.q(i) <= 1.0 + 1e-12
            assert chain.p(i) + chain.q(i) + chain.r(i) == pytest.approx(1.0)

    def test_truncated_boundary_rejected(self):
        with pytest.raises(ValueError, match="full chains"):
            sample_chain_from_rule(voter_rule(), 4, 1, Boundary.TRUNCATED)


class TestWindow:
    def test_middle_window(self):
        assert chi_window(8) == (2, 6)
        assert chi_window(64) == (16, 48)

    def test_needs_divisibility_by_four(self):
        with pytest.raises(ValueError, match="divisible by 4"):
            chi_window(10)


class TestFullKnowledgeChains:
    def test_always_adopt_tables_give_pure_ascent(self):
        n = 8
        g_up = np.ones(n + 1)
        g_up[0] = 0.0
        rule = FullKnowledgeRule(n, g_up, g_up)
        chain = full_knowledge_chain(rule, 1)
        assert chain.states == range(2, 7)
        assert chain.p(2) == pytest.approx(6 / 8)
        assert all(chain.q(i) == 0.0 for i in chain.states)
        assert chain.p(6) == 0.0

    def test_truncated_window_shape(self):
        chain = full_knowledge_chain(_voter_like(16), 1)
        assert chain.boundary is Boundary.TRUNCATED
        assert chain.low == 4 and chain.high == 12
        assert chain.up[-1] == 0.0 and chain.down[0] == 0.0
        assert chain.down[-1] > 0.0  # formula value survives truncation

    def test_entries_follow_the_tables(self):
        n = 16
        rng = np.random.Generator(np.random.PCG64(3))
        g0 = rng.uniform(size=n + 1)
        g1 = rng.uniform(size=n + 1)
        g0[0] = g1[0] = 0.0
        g0[n] = g1[n] = 1.0
        rule = FullKnowledgeRule(n, g0, g1)
        chain = full_knowledge_chain(rule, 1)
        for i in range(chain.low, chain.high):
            assert chain.p(i) == pytest.approx((n - i) / n * g0[i], rel=1e-15)
        for i in range(chain.low + 1, chain.high + 1):
            assert chain.q(i) == pytest.approx((i - 1) / n * (1 - g1[i]), rel=1e-15)

    def test_mirror_swaps_roles_of_the_tables(self):
        n = 16
        rng = np.random.Generator(np.random.PCG64(4))
        g0 = rng.uniform(size=n + 1)
        g1 = rng.uniform(size=n + 1)
        g0[0] = g1[0] = 0.0
        g0[n] = g1[n] = 1.0
        rule = FullKnowledgeRule(n, g0, g1)
        chain = mirror_chain(rule, 1)
        for i in range(chain.low, chain.high):
            assert chain.p(i) == pytest.approx((n - i) / n * (1 - g1[n - i]), rel=1e-15)
        for i in range(chain.low + 1, chain.high + 1):
            assert chain.q(i) == pytest.approx((i - 1) / n * g0[n - i], rel=1e-15)

    def test_self_complementary_rule_equals_its_mirror(self):
        # g0(i) = 1 - g1(n - i) makes both window chains identical.
        rule = _voter_like(24)
        forward = full_knowledge_chain(rule, 1)
        mirrored = mirror_chain(rule, 1)
        np.testing.assert_allclose(forward.up, mirrored.up, rtol=1e-15)
        np.testing.assert_allclose(forward.down, mirrored.down, rtol=1e-15)

    def test_custom_window_bounds_are_validated(self):
        with pytest.raises(ValueError, match="window"):
            full_knowledge_chain(_voter_like(8), 1, window=(0, 6))
        with pytest.raises(ValueError, match="window"):
            mirror_chain(_voter_like(8), 1, window=(2, 9))
