import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mortsim.domain import ConfigError, substream
from mortsim.policy import (
    Action,
    ActionSpace,
    ScriptedPolicy,
    TabularQLearner,
    encode_observation,
    restore_learner,
    scripted,
)


def learner(n_actions=2, seed=0, **kw):
    return TabularQLearner(n_actions, substream(seed, "policy"), **kw)


class TestActionSpace:
    def test_layout(self):
        space = ActionSpace(enroll_menu=(100_000, 250_000))
        assert space.n_actions == 8
        assert space.enroll_action(0) == 6
        assert space.is_enroll(7) and not space.is_enroll(5)
        assert space.enroll_amount(7) == 250_000

    def test_enroll_amount_guards(self):
        space = ActionSpace(enroll_menu=(100_000,))
        with pytest.raises(ConfigError):
            space.enroll_amount(int(Action.MISS))

    def test_empty_menu(self):
        space = ActionSpace()
        assert space.n_actions == 6
        assert not space.is_enroll(6)


class TestObservation:
    def test_typical_current_borrower(self):
        obs = encode_observation(
            housing_due=119_910,
            income=520_000,
            savings=1_200_000,
            nonhousing=230_000,
            months_delinquent=0,
            offer_code=0,
            h=1.0,
            product_open=False,
        )
        # burden 0.2306 -> bucket 0, runway 3 months, h at par
        assert obs == (0, 3, 0, 0, 1, 0)

    def test_zero_income_is_worst_burden(self):
        obs = encode_observation(
            housing_due=100_000,
            income=0,
            savings=50_000,
            nonhousing=100_000,
            months_delinquent=2,
            offer_code=1,
            h=0.9,
            product_open=True,
        )
        assert obs == (7, 0, 2, 1, 0, 1)

    def test_clamps(self):
        obs = encode_observation(
            housing_due=500_000,
            income=100_000,
            savings=100_000_000,
            nonhousing=100_000,
            months_delinquent=11,
            offer_code=3,
            h=1.4,
            product_open=False,
        )
        assert obs == (7, 12, 6, 3, 2, 0)

    def test_forbearance_month_has_zero_burden(self):
        obs = encode_observation(
            housing_due=0,
            income=300_000,
            savings=0,
            nonhousing=150_000,
            months_delinquent=2,
            offer_code=0,
            h=1.0,
            product_open=False,
        )
        assert obs[0] == 0 and obs[1] == 0


class TestTabularQ:
    def test_empty_table_greedy_takes_lowest_index(self):
        q = learner(n_actions=5)
        assert q.act((0,), [3, 1, 4], explore=False) == 1

    def test_value_ties_break_low(self):
        q = learner(n_actions=3)
        q.learn((0,), 1, 0.5, None, True)
        q.learn((0,), 2, 0.5, None, True)
        # identical learned values at actions 1 and 2
        assert q.act((0,), [1, 2], explore=False) == 1

    def test_learns_toy_chain_to_value_iteration_optimum(self):
        # Two decision states. Action 0 cashes out 0.5 and ends; action 1
        # advances for free, paying 1.0 from the last state. With discount
        # 0.9 value iteration gives Q*(s1) = (0.5, 1.0), Q*(s0) = (0.5, 0.9).
        q = learner(n_actions=2, seed=3, alpha=0.1, epsilon_start=0.4, epsilon_end=0.05)
        steps = 0
        while steps < 20_000:
            state = 0
            while True:
                obs = ("s", state)
                a = q.act(obs, [0, 1], explore=True)
                steps += 1
                if a == 0:
                    q.learn(obs, 0, 0.5, None, True, next_legal=[0, 1])
                    break
                if state == 0:
                    q.learn(obs, 1, 0.0, ("s", 1), False, next_legal=[0, 1])
                    state = 1
                else:
                    q.learn(obs, 1, 1.0, None, True, next_legal=[0, 1])
                    break
            q.set_progress(steps)
        assert q.act(("s", 0), [0, 1], explore=False) == 1
        assert q.act(("s", 1), [0, 1], explore=False) == 1
        table = q.snapshot()["table"]
        assert table[("s", 1)][1] == pytest.approx(1.0, abs=0.1)
        assert table[("s", 0)][1] == pytest.approx(0.9, abs=0.1)
        assert table[("s", 1)][0] == pytest.approx(0.5, abs=0.1)

    def test_bandit_margin_across_seeds(self):
        # Two-armed Bernoulli bandit, means 0.8 and 0.2. After 2,000 pulls
        # the learned gap clears 0.1 on every seed.
        for seed in range(5):
            q = learner(n_actions=2, seed=seed, alpha=0.05, epsilon_start=0.3)
            rewards = substream(seed, "bandit")
            obs = ("slot",)
            for t in range(2_000):
                a = q.act(obs, [0, 1], explore=True)
                p = 0.8 if a == 0 else 0.2
                r = 1.0 if rewards.random() < p else 0.0
                q.learn(obs, a, r, None, True)
                q.set_progress(t + 1)
            row = q.snapshot()["table"][obs]
            assert row[0] - row[1] >= 0.1, f"seed {seed}: {row}"

    def test_multi_month_return_bootstraps_with_power_of_discount(self):
        # with alpha 1 a repeated terminal update pins the cell in both
        # internal tables, making the bootstrap arithmetic exact
        q = learner(n_actions=2, alpha=1.0, discount=0.9)
        for _ in range(12):
            q.learn(("next",), 0, 2.0, None, True)
        for _ in range(12):
            q.learn(("cur",), 1, 0.7, ("next",), False, next_legal=[0, 1], steps=3)
        row = q.snapshot()["table"][("cur",)]
        assert row[1] == pytest.approx(0.7 + 0.9**3 * 2.0)

    def test_bootstrap_respects_legal_mask(self):
        q = learner(n_actions=3, alpha=1.0, discount=0.5)
        for _ in range(12):
            q.learn(("next",), 0, 5.0, None, True)
            q.learn(("next",), 2, 1.0, None, True)
        # action 0 is illegal downstream, so the bootstrap must use 1.0
        for _ in range(12):
            q.learn(("cur",), 0, 0.0, ("next",), False, next_legal=[1, 2])
        assert q.snapshot()["table"][("cur",)][0] == pytest.approx(0.5)

    def test_terminal_update_ignores_next_state(self):
        q = learner(n_actions=2, alpha=1.0)
        for _ in range(12):
            q.learn(("next",), 0, 9.0, None, True)
            q.learn(("cur",), 0, 0.25, ("next",), True, next_legal=[0, 1])
        assert q.snapshot()["table"][("cur",)][0] == pytest.approx(0.25)

    def test_epsilon_decays_linearly_to_floor(self):
        q = learner(epsilon_start=0.3, epsilon_end=0.05, epsilon_decay_months=100)
        assert q.epsilon == pytest.approx(0.3)
        q.set_progress(50)
        assert q.epsilon == pytest.approx(0.175)
        q.set_progress(100)
        assert q.epsilon == pytest.approx(0.05)
        q.set_progress(1_000)
        assert q.epsilon == pytest.approx(0.05)

    def test_rejects_bad_params(self):
        with pytest.raises(ConfigError):
            learner(n_actions=0)
        with pytest.raises(ConfigError):
            learner(alpha=0.0)
        with pytest.raises(ConfigError):
            learner(discount=1.0)
        with pytest.raises(ConfigError):
            learner().act((0,), [], explore=False)

    @given(
        values=st.lists(
            st.floats(min_value=-5, max_value=5, allow_nan=False),
            min_size=6,
            max_size=6,
        ),
        legal=st.sets(st.integers(min_value=0, max_value=5), min_size=1),
        explore=st.booleans(),
    )
    @settings(max_examples=200, deadline=None)
    def test_action_always_legal_and_greedy_is_masked_argmax(
        self, values, legal, explore
    ):
        q = learner(n_actions=6, seed=7, alpha=1.0, epsilon_start=1.0)
        obs = ("x",)
        for a, v in enumerate(values):
            q.learn(obs, a, v, None, True)
        choice = q.act(obs, list(legal), explore=explore)
        assert choice in legal
        if not explore:
            best = max(values[a] for a in legal)
            assert values[choice] == pytest.approx(best)


class TestSnapshots:
    def test_round_trip_preserves_behavior(self):
        q = learner(n_actions=4, seed=2)
        rng = substream(9, "probe")
        for _ in range(500):
            obs = (int(rng.integers(3)),)
            a = q.act(obs, [0, 1, 2, 3], explore=True)
            q.learn(obs, a, float(rng.random()), None, True)
        state = q.snapshot()
        clone = restore_learner(state, substream(0, "other"))
        for s in range(3):
            assert clone.act((s,), [0, 1, 2, 3], explore=False) == q.act(
                (s,), [0, 1, 2, 3], explore=False
            )
        assert clone.snapshot() == state

    def test_restore_rejects_wrong_shape_or_kind(self):
        state = learner(n_actions=3).snapshot()
        with pytest.raises(ConfigError):
            learner(n_actions=2).restore(state)
        state["kind"] = "neural"
        with pytest.raises(ConfigError):
            restore_learner(state, substream(0, "x"))

    def test_scripted_round_trip(self):
        policy = scripted("prudent")
        state = policy.snapshot()
        clone = restore_learner(state, substream(0, "x"))
        assert isinstance(clone, ScriptedPolicy)
        assert clone.preference == policy.preference


class TestScripted:
    def test_prudent_prefers_paying_and_accepting(self):
        policy = scripted("prudent")
        assert policy.act((), [0, 1, 2], False) == Action.PAY_FULL
        assert policy.act((), [1, 2], False) == Action.PAY_SAVINGS
        assert policy.act((), [3, 4], False) == Action.ACCEPT_RELIEF
        assert policy.act((), [5, 6], False) == Action.DECLINE_PRODUCT

    def test_decliner_refuses_relief(self):
        assert scripted("decliner").act((), [3, 4], False) == Action.DECLINE_RELIEF

    def test_distressed_misses_even_when_able(self):
        assert scripted("distressed").act((), [0, 1, 2], False) == Action.MISS

    def test_unknown_behavior_rejected(self):
        with pytest.raises(ConfigError):
            scripted("yolo")

    def test_falls_back_to_first_legal_for_unranked_actions(self):
        policy = ScriptedPolicy([0])
        assert policy.act((), [6, 7], False) == 6
