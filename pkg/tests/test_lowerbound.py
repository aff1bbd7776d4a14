"""Lower-bound machinery: interval product sums, the AM-GM dichotomy, the
reflection pairing identity, and the two-chain window certificate."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opinionlab.chains import (
    BirthDeathChain,
    Boundary,
    FullKnowledgeRule,
    voter_chain,
)
from opinionlab.hitting import hitting_time_oracle
from opinionlab.lowerbound import (
    CERTIFICATE_CSV_HEADER,
    Branch,
    CertificateFailureError,
    CertificatePreconditionError,
    Dichotomy,
    LowerBoundCertificate,
    a_coefficients,
    amgm_dichotomy,
    certificate_csv_row,
    full_knowledge_certificate,
    hitting_lower_bound,
    interval_product_sum,
    pair_products,
    random_full_knowledge_rule,
    size_requirement_holds,
)


def _voter_like(n):
    g = np.arange(n + 1) / n
    return FullKnowledgeRule(n, g, g)


def _brute_force_sum(a, include_singletons):
    total = 0.0
    for i in range(len(a)):
        start = i if include_singletons else i + 1
        for j in range(start, len(a)):
            total += float(np.prod(a[i : j + 1]))
    return total


class TestDescentRatios:
    def test_four_agent_voter_ratios(self):
        a = a_coefficients(voter_chain(4, 1))
        np.testing.assert_allclose(a, [2 / 3, 1 / 2, 0.0], rtol=1e-15)

    def test_blocked_ascent_is_reported(self):
        chain = BirthDeathChain(
            1, 4,
            np.array([0.3, 0.0, 0.3, 0.0]),
            np.array([0.0, 0.1, 0.1, 0.0]),
            Boundary.ABSORBING,
        )
        with pytest.raises(ZeroDivisionError, match="p = 0 at state 2"):
            a_coefficients(chain)


class TestIntervalProductSum:
    def test_all_ones_counts_strict_pairs(self):
        m = 5
        assert interval_product_sum(np.ones(m)) == pytest.approx(m * (m - 1) / 2, rel=1e-12)

    def test_all_ones_counts_nonstrict_pairs(self):
        m = 5
        total = interval_product_sum(np.ones(m), include_singletons=True)
        assert total == pytest.approx(m * (m + 1) / 2, rel=1e-12)

    def test_two_entry_example(self):
        assert interval_product_sum(np.array([2.0, 0.5])) == pytest.approx(1.0, rel=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.Generator(np.random.PCG64(11))
        for _ in range(30):
            m = int(rng.integers(1, 25))
            a = rng.uniform(0.1, 6.0, m)
            for singles in (False, True):
                got = interval_product_sum(a, include_singletons=singles)
                want = _brute_force_sum(a, singles)
                assert got == pytest.approx(want, rel=1e-10)

    def test_zeros_drop_their_products(self):
        a = np.array([0.5, 0.0, 2.0, 3.0])
        got = interval_product_sum(a, allow_zero=True)
        assert got == pytest.approx(_brute_force_sum(a, False), rel=1e-12)

    def test_zero_rejected_unless_allowed(self):
        with pytest.raises(ValueError, match="index 1"):
            interval_product_sum(np.array([0.5, 0.0, 2.0]))

    def test_negative_always_rejected(self):
        with pytest.raises(ValueError, match="index 2"):
            interval_product_sum(np.array([0.5, 1.0, -0.1]), allow_zero=True)

    def test_wide_dynamic_range_stays_finite(self):
        a = np.full(400, 1.3)
        got = interval_product_sum(a)
        assert math.isfinite(math.log(got))
        # dominated by the full product 1.3^400
        assert math.log(got) > 400 * math.log(1.3)


class TestHittingLowerBound:
    def test_unit_ratio_chain_attains_the_pair_count(self):
        size = 11  # m = 10 descent ratios, all equal to 1
        up = np.full(size, 0.3)
        down = np.full(size, 0.3)
        up[-1] = 0.0
        down[0] = 0.0
        chain = BirthDeathChain(1, size, up, down, Boundary.TRUNCATED)
        m = size - 1
        assert hitting_lower_bound(chain) == pytest.approx(m * (m - 1) / 2, rel=1e-12)

    def test_bounds_the_voter_from_below(self):
        for n in (4, 8, 16, 32):
            chain = voter_chain(n, 1)
            bound = hitting_lower_bound(chain)
            exact = hitting_time_oracle(chain, 1)
            assert bound <= exact * (1 + 1e-12)


class TestDichotomy:
    def test_small_entries_push_the_inverse_sum(self):
        xs = np.array([0.5, 0.5, 0.5])
        assert amgm_dichotomy(xs, 3) is Dichotomy.INVERSE_SUM_LARGE
        assert np.sum(1.0 / xs) >= 3

    def test_large_entries_push_the_sum(self):
        assert amgm_dichotomy(np.array([2.0, 2.0]), 3) is Dichotomy.SUM_LARGE

    def test_nonpositive_entries_rejected(self):
        with pytest.raises(ValueError, match="index 1"):
            amgm_dichotomy(np.array([1.0, 0.0]), 2)

    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=50))
    def test_one_side_always_reaches_the_count(self, values):
        xs = np.array(values)
        branch = amgm_dichotomy(xs, len(xs))
        if branch is Dichotomy.SUM_LARGE:
            assert np.sum(xs) >= len(xs)
        else:
            assert np.sum(1.0 / xs) >= len(xs) * (1 - 1e-12)


class TestPairIdentity:
    def test_closed_form_smallest_window(self):
        products, targets = pair_products(_voter_like(8), 1)
        assert targets[0] == pytest.approx(5 / 9, rel=1e-15)
        np.testing.assert_allclose(products, targets, atol=1e-12)

    def test_table_factors_cancel_for_random_rules(self):
        for seed in range(5):
            rng = np.random.Generator(np.random.PCG64(seed))
            rule = random_full_knowledge_rule(64, rng)
            products, targets = pair_products(rule, 1)
            np.testing.assert_allclose(products, targets, atol=1e-12)

    def test_targets_dominate_the_rough_bound(self):
        for n, z in ((64, 1), (64, 2), (256, 1)):
            _, targets = pair_products(_voter_like(n), z)
            assert np.all(targets >= (1 - 4 * z / n) ** 2)


class TestSizeRequirement:
    def test_threshold_cases(self):
        assert not size_requirement_holds(8, 1)
        assert size_requirement_holds(64, 1)
        assert not size_requirement_holds(4, 1)  # n <= 4z


class TestCertificate:
    def test_voter_like_frozen_values(self):
        cert = full_knowledge_certificate(_voter_like(64), 1)
        assert cert.n == 64 and cert.z == 1 and cert.seed == -1
        assert cert.chi == (16, 48)
        assert cert.pair_count == 528
        assert cert.c == pytest.approx(math.exp(-4) / 2, rel=1e-15)
        assert cert.sum_a == pytest.approx(374.631818, rel=1e-8)
        assert cert.sum_a_prime == pytest.approx(cert.sum_a, rel=1e-12)
        assert cert.hit_c == pytest.approx(1688.25894, rel=1e-8)
        assert cert.hit_c_prime == pytest.approx(cert.hit_c, rel=1e-12)
        assert cert.branch is Branch.C_PRIME_SLOW
        assert max(cert.hit_c, cert.hit_c_prime) >= cert.c * cert.pair_count

    def test_sums_bound_the_crossing_times(self):
        for seed in range(20):
            rng = np.random.Generator(np.random.PCG64(100 + seed))
            cert = full_knowledge_certificate(random_full_knowledge_rule(64, rng), 1)
            if math.isfinite(cert.sum_a):
                assert cert.sum_a <= cert.hit_c * (1 + 1e-9)
            if math.isfinite(cert.sum_a_prime):
                assert cert.sum_a_prime <= cert.hit_c_prime * (1 + 1e-9)

    def test_needs_divisibility_by_four(self):
        with pytest.raises(CertificatePreconditionError, match="4 | n"):
            full_knowledge_certificate(_voter_like(62), 1)

    def test_needs_a_large_population(self):
        with pytest.raises(CertificatePreconditionError, match="too small"):
            full_knowledge_certificate(_voter_like(8), 1)

    def test_needs_a_source(self):
        with pytest.raises(CertificatePreconditionError, match="z >= 1"):
            full_knowledge_certificate(_voter_like(64), 0)

    def test_eager_rule_certifies_the_mirror_slow(self):
        # Always adopting 1 makes the forward window chain a pure ascent
        # (sum 0) and blocks the mirror completely (sum and hit infinite).
        n = 64
        g_up = np.ones(n + 1)
        g_up[0] = 0.0
        cert = full_knowledge_certificate(FullKnowledgeRule(n, g_up, g_up), 1)
        assert cert.branch is Branch.C_PRIME_SLOW
        assert cert.sum_a == 0.0
        assert math.isinf(cert.sum_a_prime)
        assert math.isinf(cert.hit_c_prime)

    def test_blocked_forward_window_takes_the_first_branch(self):
        n = 64
        g = np.arange(n + 1) / n
        g0 = g.copy()
        g0[20] = 0.0  # no ascent out of an interior window state
        cert = full_knowledge_certificate(FullKnowledgeRule(n, g0, g), 1)
        assert cert.branch is Branch.C_SLOW
        assert math.isinf(cert.sum_a)
        assert math.isinf(cert.hit_c)


class TestRandomRules:
    def test_tables_are_valid_and_reproducible(self):
        rule_a = random_full_knowledge_rule(16, np.random.Generator(np.random.PCG64(5)))
        rule_b = random_full_knowledge_rule(16, np.random.Generator(np.random.PCG64(5)))
        np.testing.assert_array_equal(rule_a.g0, rule_b.g0)
        np.testing.assert_array_equal(rule_a.g1, rule_b.g1)
        assert rule_a.g0[0] == 0.0 and rule_a.g0[16] == 1.0
        assert rule_a.g1[0] == 0.0 and rule_a.g1[16] == 1.0


class TestCsvOutput:
    def test_header_is_pinned(self):
        assert CERTIFICATE_CSV_HEADER == "n,z,seed,sum_a,sum_a_prime,N,c,hit_C,hit_Cprime,branch"

    def test_row_formatting(self):
        cert = LowerBoundCertificate(
            n=64,
            z=1,
            seed=7,
            chi=(16, 48),
            sum_a=374.5,
            sum_a_prime=float("inf"),
            pair_count=528,
            c=0.25,
            hit_c=1688.258943,
            hit_c_prime=12.0,
            branch=Branch.C_SLOW,
        )
        assert certificate_csv_row(cert) == "64,1,7,374.5,inf,528,0.25,1688.25894,12,CSlow"
