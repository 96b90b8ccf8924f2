import numpy as np
import pytest

from mortsim.domain import ConfigError, money_from_dollars, substream
from mortsim.population import (
    BUCKETS,
    DistributionConfig,
    default_distribution,
    income_bucket_cutoffs,
    sample_population,
    validate_distribution,
)


def draw(n, seed=17):
    return sample_population(default_distribution(), n, substream(seed, "population", "eval"))


class TestSampling:
    def test_quintile_partition_near_equal(self):
        for n in (1_000, 997, 23):
            profiles = draw(n)
            counts = [sum(1 for p in profiles if p.quintile == q) for q in range(1, 6)]
            assert sum(counts) == n
            assert max(counts) - min(counts) <= 1

    def test_payment_burden_declines_up_the_ladder(self):
        profiles = draw(2_000)
        means = []
        for q in range(1, 6):
            ratios = [
                p.loan.scheduled_payment / p.monthly_income
                for p in profiles
                if p.quintile == q
            ]
            means.append(sum(ratios) / len(ratios))
        assert means[0] > means[4]
        assert means[0] > 0.30 and means[4] < 0.30

    def test_deterministic_for_same_stream(self):
        a = draw(300, seed=5)
        b = draw(300, seed=5)
        for pa, pb in zip(a, b):
            assert pa == pb

    def test_different_seeds_differ(self):
        a = draw(300, seed=5)
        b = draw(300, seed=6)
        assert any(pa.monthly_income != pb.monthly_income for pa, pb in zip(a, b))

    def test_income_matches_configured_law(self):
        # One-sample KS against the piecewise-linear income CDF at n = 10,000.
        config = default_distribution()
        profiles = sample_population(config, 10_000, substream(3, "population", "eval"))
        xs = np.sort([p.monthly_income / 100.0 for p in profiles])
        qs = np.array([q for q, _ in config.income_quantiles])
        vs = np.array([v for _, v in config.income_quantiles])
        model = np.interp(xs, vs, qs)
        n = len(xs)
        hi = np.abs(np.arange(1, n + 1) / n - model).max()
        lo = np.abs(np.arange(0, n) / n - model).max()
        assert max(hi, lo) < 0.05

    def test_savings_track_income(self):
        profiles = draw(4_000)
        incomes = np.array([p.monthly_income for p in profiles], dtype=float)
        savings = np.array([p.savings for p in profiles], dtype=float)
        assert np.corrcoef(incomes, savings)[0, 1] > 0.0

    def test_field_ranges(self):
        config = default_distribution()
        lo_inc = money_from_dollars(config.income_quantiles[0][1])
        hi_inc = money_from_dollars(config.income_quantiles[-1][1])
        for p in draw(1_500):
            assert lo_inc <= p.monthly_income <= hi_inc
            assert p.savings >= 0
            assert p.nonhousing_expense > 0
            assert 0.0 <= p.gamma <= 1.0
            assert config.rate_range[0] <= p.loan.annual_rate <= config.rate_range[1]
            assert p.bucket in BUCKETS and p.quintile in BUCKETS

    def test_loan_backsolve_matches_drawn_ratio(self):
        for p in draw(800):
            target = round(p.payment_ratio * p.monthly_income)
            assert abs(p.loan.scheduled_payment - target) <= 1

    def test_aged_loans_are_ledger_consistent(self):
        saw_aged = False
        for p in draw(500):
            loan = p.loan
            age = loan.term_months - loan.months_remaining
            assert 0 <= age <= loan.term_months // 2
            assert loan.payments_made_total == age * loan.scheduled_payment
            assert loan.arrears == 0 and loan.months_delinquent == 0
            if age > 0:
                saw_aged = True
                assert loan.balance < loan.original_principal
        assert saw_aged

    def test_bucket_and_realized_quintile_mostly_agree(self):
        profiles = draw(5_000)
        agree = sum(1 for p in profiles if p.bucket == p.quintile)
        assert agree / len(profiles) > 0.9

    def test_bucket_cutoffs_monotone(self):
        cuts = income_bucket_cutoffs(default_distribution())
        assert cuts == sorted(cuts) and len(cuts) == 4

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ConfigError):
            sample_population(default_distribution(), 0, substream(1, "population"))


class TestValidation:
    def test_default_is_clean(self):
        assert validate_distribution(default_distribution()) == []

    def test_bad_income_table(self):
        config = default_distribution()
        config.income_quantiles = ((0.0, 2_000.0), (0.9, 1_500.0))
        problems = validate_distribution(config)
        assert any("income_quantiles" in p for p in problems)

    def test_missing_bucket(self):
        config = default_distribution()
        del config.payment_ratio[3]
        assert any("payment_ratio" in p for p in validate_distribution(config))

    def test_ratio_out_of_range(self):
        config = default_distribution()
        config.expense_ratio[2] = (0.0, 1.2)
        assert any("expense_ratio[2]" in p for p in validate_distribution(config))

    def test_bad_gamma_and_rate(self):
        config = default_distribution()
        config.gamma_beta = (0.0, 2.0)
        config.rate_range = (0.05, 0.02)
        problems = validate_distribution(config)
        assert any("gamma_beta" in p for p in problems)
        assert any("rate_range" in p for p in problems)

    def test_bad_terms_and_age(self):
        config = default_distribution()
        config.term_choices = ((360, -1.0),)
        config.max_age_fraction = 1.0
        problems = validate_distribution(config)
        assert any("term_choices" in p for p in problems)
        assert any("max_age_fraction" in p for p in problems)

    def test_sampling_refuses_bad_config(self):
        config = default_distribution()
        config.rate_range = (0.9, 0.99)
        with pytest.raises(ConfigError):
            sample_population(config, 10, substream(1, "population"))
