import itertools

import numpy as np
import pytest

from serialsum import (
    BudgetExceededError,
    CollisionError,
    FiniteSumSpec,
    RootMultiset,
    ShiftSpec,
    conjecture_probe,
    f2_equal_reference,
    f3_triple_reference,
    f_distinct,
    f_general,
    finite_sum,
    finite_sum_direct,
    linear_coefficient,
    series_oracle,
)
from _gen import draw_multiset, draw_roots

# Values frozen from independent brute-force summations (plain nested-loop
# lattice sums and hand enumeration) computed before the evaluators existed.
F3_053002_S2 = 0.8676122931442086      # F({0.5,0.3,0.2}; S=2)
F3_04_04_07_S0 = 3.5352733686067164    # F({0.4 x2, 0.7}; S=0)
F2EQ_09_S4 = 8.874615789473687         # two equal roots 0.9, S=4
F3EQ_05_S2 = 2.6666666666666665        # triple root 0.5, S=2
F5_05_S0 = 23.716049382716044          # F({0.5 x5}; S=0)
T50_SLOPE_CASE = 66.8605988600234      # finite sum, (0.5,0.3,0.2), s=(1,-1,1), n=50
T100_SLOPE_CASE = 135.74531586738303   # same at n=100


def ms(*lams):
    return RootMultiset.from_lambdas(lams)


class TestRootMultiset:
    def test_clustering_merges_close_roots(self):
        r = RootMultiset.from_lambdas([0.5, 0.5 + 1e-9, 0.3])
        assert sorted(m for _, m in r.entries) == [1, 2]
        assert r.ell == 3

    def test_rejects_roots_on_or_outside_disk(self):
        with pytest.raises(ValueError):
            ms(1.0, 0.3)
        with pytest.raises(ValueError):
            ms(0.8 + 0.7j, 0.3)

    def test_rejects_bad_arity(self):
        with pytest.raises(ValueError):
            ms(0.5)
        with pytest.raises(ValueError):
            ms(*[0.1 * k for k in range(1, 8)])

    def test_rejects_unmerged_near_duplicates(self):
        with pytest.raises(ValueError):
            RootMultiset(((0.5, 1), (0.5 + 1e-9, 1)))

    def test_conjugate_closed(self):
        assert ms(0.3 + 0.2j, 0.3 - 0.2j).is_conjugate_closed()
        assert not ms(0.3 + 0.2j, 0.1).is_conjugate_closed()
        assert ms(0.5, 0.3).is_conjugate_closed()


class TestShiftSpec:
    @pytest.mark.parametrize(
        "shifts,S", [((0, 0), 0), ((2, -1), 1), ((-1, 2), 1), ((-2, -1), 3)]
    )
    def test_aggregate(self, shifts, S):
        assert ShiftSpec(shifts).S == S


class TestFDistinct:
    def test_pair_s0(self):
        got = f_distinct(ms(0.5, 0.3), 0)
        assert got.value == pytest.approx((1 + 0.15) / (1 - 0.15), rel=1e-13)
        assert got.is_real_certified

    def test_pair_s1(self):
        assert f_distinct(ms(0.5, 0.3), 1).value == pytest.approx(16 / 17, rel=1e-13)

    @pytest.mark.parametrize("S", [0, 1, 3])
    def test_absorbing_zero(self, S):
        got = f_distinct(ms(0.5, 0.0), S)
        assert got.value == pytest.approx(0.5**S, rel=1e-13)

    def test_triple_s2_frozen(self):
        got = f_distinct(ms(0.5, 0.3, 0.2), 2)
        assert got.value == pytest.approx(F3_053002_S2, rel=1e-12)

    def test_rejects_repeated_roots(self):
        with pytest.raises(CollisionError):
            f_distinct(ms(0.5, 0.5), 1)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            ell = int(rng.integers(2, 5))
            roots = draw_roots(rng, ell, 0.8)
            S = int(rng.integers(0, 7))
            ref = f_distinct(RootMultiset.from_lambdas(roots), S).value
            rng.shuffle(roots)
            got = f_distinct(RootMultiset.from_lambdas(roots), S).value
            assert abs(got - ref) <= 1e-12 * (1 + abs(ref))


class TestFGeneral:
    def test_double_root_half_s1(self):
        # printed two-equal-roots value at lambda=0.5, S=1 is 4/3
        got = f_general(ms(0.5, 0.5), 1)
        assert got.value == pytest.approx(4 / 3, rel=1e-13)

    @pytest.mark.parametrize("lam", [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9])
    @pytest.mark.parametrize("S", range(6))
    def test_matches_f2_reference(self, lam, S):
        got = f_general(RootMultiset(((lam, 2),)), S)
        assert got.value == pytest.approx(f2_equal_reference(lam, S), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("lam", [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9])
    @pytest.mark.parametrize("S", range(6))
    def test_matches_f3_reference(self, lam, S):
        got = f_general(RootMultiset(((lam, 3),)), S)
        assert got.value == pytest.approx(f3_triple_reference(lam, S), rel=1e-12, abs=1e-12)

    def test_triple_zero_root(self):
        assert f_general(RootMultiset(((0.0, 3),)), 0).value == pytest.approx(1.0)
        for S in (1, 2, 5):
            assert abs(f_general(RootMultiset(((0.0, 3),)), S).value) < 1e-15

    def test_mixed_multiplicity_frozen(self):
        got = f_general(RootMultiset(((0.4, 2), (0.7, 1))), 0)
        assert got.value == pytest.approx(F3_04_04_07_S0, rel=1e-11)

    def test_mixed_multiplicity_is_distinct_limit(self):
        target = f_general(RootMultiset(((0.4, 2), (0.7, 1))), 0).value
        prev = None
        for eps in (1e-3, 1e-4, 1e-5):
            got = f_distinct(ms(0.4, 0.4 + eps, 0.7), 0).value
            err = abs(got - target)
            if prev is not None:
                assert err < prev
            prev = err
        assert prev < 1e-4

    def test_distinct_inputs_match_f_distinct(self):
        # the G-based confluent path must reproduce the direct formula
        rng = np.random.default_rng(23)
        for _ in range(40):
            ell = int(rng.integers(2, 5))
            roots = draw_multiset(rng, ell, 0.8)
            S = int(rng.integers(0, 7))
            a = f_distinct(roots, S).value
            b = f_general(roots, S).value
            assert abs(a - b) <= 1e-11 * (1 + abs(a))

    def test_permutation_invariance_confluent(self):
        entries = [(0.4, 2), (-0.3, 1), (0.6, 1)]
        S = 2
        ref = f_general(RootMultiset(tuple(entries)), S).value
        for perm in itertools.permutations(entries):
            got = f_general(RootMultiset(perm), S).value
            assert abs(got - ref) <= 1e-12 * (1 + abs(ref))

    def test_realness_certified_for_conjugate_pairs(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            roots = draw_multiset(rng, 4, 0.8)
            S = int(rng.integers(0, 5))
            got = f_general(roots, S)
            assert abs(got.value.imag) <= 1e-10 * (1 + abs(got.value))
            assert got.is_real_certified


class TestReferences:
    def test_f2_trivials(self):
        assert f2_equal_reference(0.5, 1) == pytest.approx(4 / 3)
        assert f2_equal_reference(0.0, 0) == pytest.approx(1.0)

    def test_f2_frozen(self):
        assert f2_equal_reference(0.9, 4) == pytest.approx(F2EQ_09_S4, rel=1e-13)

    def test_f3_trivials(self):
        assert f3_triple_reference(0.0, 0) == pytest.approx(1.0)
        for S in (1, 2, 4):
            assert f3_triple_reference(0.0, S) == 0

    def test_f3_frozen(self):
        assert f3_triple_reference(0.5, 2) == pytest.approx(F3EQ_05_S2, rel=1e-13)


class TestSeriesOracle:
    def test_pair_s1(self):
        got = series_oracle([0.5, 0.3], 1, 1e-12)
        assert abs(got.value - 16 / 17) <= 1e-12 + got.err_estimate
        assert got.err_estimate < 1e-12

    def test_zero_root_pins_index(self):
        got = series_oracle([0.5, 0.0], 3, 1e-10)
        assert got.value == pytest.approx(0.5**3, rel=1e-13)

    def test_all_zero(self):
        assert series_oracle([0.0, 0.0], 0, 1e-10).value == pytest.approx(1.0)
        assert series_oracle([0.0, 0.0], 2, 1e-10).value == 0

    def test_ell5_conjecture_probe_value(self):
        got = series_oracle([0.5] * 5, 0, 1e-8)
        assert abs(got.value - F5_05_S0) <= 1e-8 + got.err_estimate
        closed = f_general(RootMultiset(((0.5, 5),)), 0)
        assert abs(got.value - closed.value) <= got.err_estimate + 1e-10

    def test_tail_bound_dominates(self):
        # doubling J never moves the value by more than the reported bound
        rng = np.random.default_rng(3)
        for _ in range(15):
            ell = int(rng.integers(2, 5))
            lams = draw_roots(rng, ell, 0.8)
            S = int(rng.integers(0, 5))
            a = series_oracle(lams, S, 1e-6)
            b = series_oracle(lams, S, 1e-13)
            assert abs(a.value - b.value) <= a.err_estimate

    def test_budget_exceeded_carries_achievable_bound(self):
        with pytest.raises(BudgetExceededError) as exc:
            series_oracle([0.9, 0.9, 0.9, 0.9], 0, 1e-12, budget=500)
        assert exc.value.achievable_bound > 1e-12

    def test_complex_conjugate_pair_is_real(self):
        got = series_oracle([0.3 + 0.2j, 0.3 - 0.2j, 0.4], 2, 1e-10)
        assert abs(got.value.imag) <= 1e-12
        assert got.is_real_certified


class TestFiniteSum:
    def test_hand_enumeration_n2(self):
        spec = FiniteSumSpec((0.5, 0.3), (0, 0), 2)
        assert finite_sum(spec) == pytest.approx(2.3, rel=1e-13)
        assert finite_sum_direct(spec) == pytest.approx(2.3, rel=1e-13)

    def test_adjusted_upper_limit(self):
        spec = FiniteSumSpec((0.5, 0.3), (0, 0), 2, (0, -1))
        assert finite_sum(spec) == pytest.approx(1.15, rel=1e-13)
        assert finite_sum_direct(spec) == pytest.approx(1.15, rel=1e-13)

    @pytest.mark.parametrize("n", [1, 3, 7])
    def test_zero_partner_counts_diagonal(self, n):
        spec = FiniteSumSpec((0.5, 0.0), (0, 0), n)
        assert finite_sum(spec) == pytest.approx(float(n), rel=1e-13)

    def test_slope_approaches_limit(self):
        s50 = FiniteSumSpec((0.5, 0.3, 0.2), (1, -1, 1), 50)
        s100 = FiniteSumSpec((0.5, 0.3, 0.2), (1, -1, 1), 100)
        t50, t100 = finite_sum(s50), finite_sum(s100)
        assert t50 == pytest.approx(T50_SLOPE_CASE, rel=1e-12)
        assert t100 == pytest.approx(T100_SLOPE_CASE, rel=1e-12)
        slope = (t100 - t50) / 50
        limit = f_distinct(ms(0.5, 0.3, 0.2), 1).value
        assert abs(slope - limit) < 0.02

    def test_reduction_matches_enumeration_sampled(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            ell = int(rng.integers(2, 5))
            lams = tuple(rng.uniform(-0.9, 0.9, size=ell).tolist())
            shifts = tuple(int(s) for s in rng.integers(-2, 3, size=ell))
            n = int(rng.integers(1, 13))
            adjust = tuple(
                int(d) for d in rng.integers(-min(2, n - 1), 1, size=ell)
            )
            spec = FiniteSumSpec(lams, shifts, n, adjust)
            a, b = finite_sum(spec), finite_sum_direct(spec)
            assert abs(a - b) <= 1e-12 * (1 + abs(b))

    def test_rejects_positive_adjust(self):
        with pytest.raises(ValueError):
            FiniteSumSpec((0.5, 0.3), (0, 0), 2, (1, 0))

    def test_rejects_empty_range(self):
        with pytest.raises(ValueError):
            FiniteSumSpec((0.5, 0.3), (0, 0), 2, (0, -2))


class TestLinearCoefficient:
    def test_pair_matches_limit(self):
        got = linear_coefficient([0.5, 0.3], [0, 0], 200)
        assert abs(got.value - (1 + 0.15) / (1 - 0.15)) <= 1e-10
        assert got.err_estimate < 1e-10

    def test_zero_partner_slope_one(self):
        got = linear_coefficient([0.5, 0.0], [1, -1], 200)
        assert got.value == pytest.approx(1.0, abs=1e-12)

    def test_depends_only_on_aggregated_shift(self):
        results = [
            linear_coefficient([0.6, 0.4], shifts, 200)
            for shifts in [(2, -1), (-1, 2), (0, 1)]
        ]
        for a, b in itertools.combinations(results, 2):
            assert abs(a.value - b.value) <= a.err_estimate + b.err_estimate

    def test_adjustment_invariance(self):
        base = linear_coefficient([0.5, 0.3, 0.2], (1, 0, 0), 200)
        for adjust in [(-1, 0, 0), (0, -2, -1), (-3, -3, -3)]:
            other = linear_coefficient([0.5, 0.3, 0.2], (1, 0, 0), 200, adjust)
            assert abs(base.value - other.value) <= (
                base.err_estimate + other.err_estimate
            )

    def test_rejects_insufficient_n_base(self):
        with pytest.raises(ValueError):
            linear_coefficient([0.9, 0.3], [0, 0], 50)


class TestConjectureProbe:
    def test_all_equal_half(self):
        # the oracle itself supplies the value; the closed form must track it
        got = series_oracle([0.5] * 5, 0, 1e-8)
        closed = f_general(RootMultiset(((0.5, 5),)), 0)
        assert abs(got.value - closed.value) <= 1e-8 + got.err_estimate

    def test_zero_slot_still_passes(self):
        # a zero root pins its lattice index; both paths must still agree
        lams = [0.0, 0.3, -0.2, 0.45, 0.1]
        for S in (0, 2):
            got = series_oracle(lams, S, 1e-10)
            closed = f_distinct(RootMultiset.from_lambdas(lams), S)
            assert abs(got.value - closed.value) <= 1e-10 + got.err_estimate

    def test_ell6_with_conjugate_pair(self):
        lams = [0.3 + 0.2j, 0.3 - 0.2j, 0.1, -0.25, 0.45, -0.4]
        got = series_oracle(lams, 1, 1e-8)
        closed = f_distinct(RootMultiset.from_lambdas(lams), 1)
        assert abs(got.value - closed.value) <= 1e-8 + got.err_estimate
        assert abs(closed.value.imag) <= 1e-10 * (1 + abs(closed.value))

    def test_probe_report(self):
        report = conjecture_probe(5, 8, seed=42, tol=1e-8)
        assert report.passed == 8
        assert report.failed == 0
        assert report.skipped == 0
        assert report.ok

    def test_probe_rejects_proven_cases(self):
        with pytest.raises(ValueError):
            conjecture_probe(4, 1, seed=0, tol=1e-8)

    def test_budget_exhaustion_is_skip_not_pass(self):
        report = conjecture_probe(6, 3, seed=1, tol=1e-8, budget=100)
        assert report.passed == 0
        assert report.skipped == 3
        assert report.ok  # skips do not fail the probe, they just never pass
