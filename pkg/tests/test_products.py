import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mortsim.domain import ConfigError
from mortsim.products import (
    ProductConfig,
    ReserveAccount,
    draw,
    enroll_matched,
    upfront_account,
    validate_product_config,
)


class TestAccounts:
    def test_upfront_grant(self):
        acct = upfront_account(500_000)
        assert acct.balance == 500_000
        assert acct.granted == 500_000
        assert acct.contributed == 0
        acct.check()

    def test_matched_doubles_at_full_match(self):
        acct = enroll_matched(250_000, match_rate=1.0)
        assert acct.balance == 500_000
        assert acct.contributed == 250_000
        assert acct.matched == 250_000
        acct.check()

    def test_partial_match_rate(self):
        acct = enroll_matched(100_000, match_rate=0.5)
        assert acct.balance == 150_000
        assert acct.matched == 50_000

    def test_bad_inputs(self):
        with pytest.raises(ConfigError):
            upfront_account(-1)
        with pytest.raises(ConfigError):
            enroll_matched(0)
        with pytest.raises(ConfigError):
            enroll_matched(100, match_rate=-0.1)


class TestDraws:
    def test_covers_reference_payment(self):
        acct = upfront_account(500_000)  # $5,000
        paid = draw(acct, 119_910)
        assert paid == 119_910
        assert acct.balance == 380_090  # $3,800.90 left
        acct.check()

    def test_partial_cover_leaves_gap(self):
        acct = upfront_account(50_000)  # $500
        paid = draw(acct, 119_910)
        assert paid == 50_000
        assert acct.balance == 0
        assert 119_910 - paid == 69_910  # the rest still goes delinquent
        acct.check()

    def test_zero_shortfall_draws_nothing(self):
        acct = upfront_account(500_000)
        assert draw(acct, 0) == 0
        assert acct.balance == 500_000

    def test_negative_shortfall_rejected(self):
        with pytest.raises(ConfigError):
            draw(upfront_account(100), -1)

    @given(
        grant=st.integers(min_value=0, max_value=1_000_000),
        gaps=st.lists(st.integers(min_value=0, max_value=200_000), max_size=24),
    )
    @settings(max_examples=150, deadline=None)
    def test_draws_conserve_and_never_overdraw(self, grant, gaps):
        acct = upfront_account(grant)
        for gap in gaps:
            paid = draw(acct, gap)
            assert 0 <= paid <= gap
            assert acct.balance >= 0
            acct.check()
        assert acct.drawn + acct.balance == grant


class TestConfig:
    def test_default_is_disabled_but_clean(self):
        config = ProductConfig()
        assert not config.enabled
        assert validate_product_config(config) == []

    def test_enabled_logic(self):
        assert ProductConfig(kind="upfront", upfront_amount=500_000).enabled
        assert not ProductConfig(kind="upfront", upfront_amount=0).enabled
        assert ProductConfig(kind="matched").enabled
        assert not ProductConfig(kind="matched", enroll_menu=()).enabled

    def test_violations(self):
        config = ProductConfig(
            kind="windfall", upfront_amount=-1, match_rate=-2.0, enroll_menu=(500, 100)
        )
        problems = validate_product_config(config)
        assert len(problems) == 4
