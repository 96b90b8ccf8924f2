"""Borrower decision policies.

Borrowers pick from a small discrete action set under a legality mask the
simulation computes each month. The default learner is tabular Q-learning
over a coarse six-field observation; a scripted policy with a fixed
preference order is available for baselines and tests.

Action indices are frozen: ties in value break toward the lowest index, so
the ordering doubles as the prior for indifferent states (pay before miss,
accept relief before declining it, decline a savings product before
enrolling).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .domain import Cents, ConfigError

SNAPSHOT_VERSION = 1

OBS_FIELDS = (
    "payment_burden",
    "savings_months",
    "months_delinquent",
    "relief_offer",
    "equity_band",
    "product_open",
)


class Action(enum.IntEnum):
    PAY_FULL = 0      # pay this month's due out of current income
    PAY_SAVINGS = 1   # cover the due by drawing down savings
    MISS = 2          # pay nothing toward the mortgage
    ACCEPT_RELIEF = 3
    DECLINE_RELIEF = 4
    DECLINE_PRODUCT = 5


ENROLL_BASE = len(Action)  # enrollment tiers occupy indices 6, 7, ...


@dataclass(frozen=True, slots=True)
class ActionSpace:
    """Fixed actions plus one enrollment action per product tier."""

    enroll_menu: tuple[Cents, ...] = ()

    @property
    def n_actions(self) -> int:
        return ENROLL_BASE + len(self.enroll_menu)

    def enroll_action(self, tier: int) -> int:
        return ENROLL_BASE + tier

    def is_enroll(self, action: int) -> bool:
        return ENROLL_BASE <= action < self.n_actions

    def enroll_amount(self, action: int) -> Cents:
        if not self.is_enroll(action):
            raise ConfigError(f"action {action} is not an enrollment tier")
        return self.enroll_menu[action - ENROLL_BASE]


def encode_observation(
    *,
    housing_due: Cents,
    income: Cents,
    savings: Cents,
    nonhousing: Cents,
    months_delinquent: int,
    offer_code: int,
    h: float,
    product_open: bool,
) -> tuple[int, int, int, int, int, int]:
    """Discretize one borrower-month into the learner's state tuple."""
    if income <= 0:
        burden = 7
    else:
        burden = min(7, int((housing_due / income) / 0.25))
    outflow = housing_due + nonhousing
    runway = 12 if outflow <= 0 else min(12, savings // outflow)
    if h < 0.95:
        band = 0
    elif h <= 1.05:
        band = 1
    else:
        band = 2
    return (
        burden,
        int(runway),
        min(6, months_delinquent),
        offer_code,
        band,
        1 if product_open else 0,
    )


class PolicyLearner(Protocol):
    def act(self, obs: tuple, legal_actions: list[int], explore: bool) -> int: ...

    def learn(
        self,
        obs: tuple,
        action: int,
        reward: float,
        next_obs: tuple | None,
        done: bool,
        *,
        next_legal: list[int] | None = None,
        steps: int = 1,
    ) -> None: ...

    def snapshot(self) -> dict: ...

    def restore(self, state: dict) -> None: ...


class TabularQLearner:
    """Double Q-learning on dict-backed tables with linear epsilon decay.

    Two tables are kept and each update flips a coin: one table picks the
    best next action, the other prices it. A single max-bootstrapped table
    systematically overvalues actions that lead into thinly visited, noisy
    states, which here means every detour off the pay-every-month path.
    Decoupling selection from valuation removes that bias. Acting uses the
    sum of both tables.

    `learn` accepts multi-month returns: `reward` is the discounted sum
    already rolled up by the caller and `steps` the number of months it
    spans, so the bootstrap term is discount**steps.

    `q_init` seeds every table cell, and stands in as the bootstrap value
    for states not seen yet.
    """

    def __init__(
        self,
        n_actions: int,
        rng: np.random.Generator,
        *,
        alpha: float = 0.05,
        alpha_decay_visits: int = 0,
        discount: float = 0.96,
        epsilon_start: float = 0.25,
        epsilon_end: float = 0.01,
        epsilon_decay_months: int = 600,
        q_init: float = 0.0,
        tie_margin: float = 0.0,
    ) -> None:
        if n_actions < 1:
            raise ConfigError("need at least one action")
        if not 0.0 < alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {alpha}")
        if alpha_decay_visits < 0:
            raise ConfigError(f"alpha_decay_visits must be >= 0, got {alpha_decay_visits}")
        if not 0.0 <= discount < 1.0:
            raise ConfigError(f"discount must be in [0, 1), got {discount}")
        if tie_margin < 0.0:
            raise ConfigError(f"tie_margin must be >= 0, got {tie_margin}")
        self.n_actions = n_actions
        self.alpha = alpha
        self.alpha_decay_visits = alpha_decay_visits
        self.discount = discount
        self.epsilon_start = epsilon_start
        self.epsilon_end = epsilon_end
        self.epsilon_decay_months = max(1, epsilon_decay_months)
        self.q_init = q_init
        self.tie_margin = tie_margin
        self._rng = rng
        self._months_seen = 0
        self._tables: tuple[dict[tuple, list[float]], dict[tuple, list[float]]] = ({}, {})
        self._visits: tuple[dict[tuple, list[int]], dict[tuple, list[int]]] = ({}, {})

    @property
    def epsilon(self) -> float:
        frac = min(1.0, self._months_seen / self.epsilon_decay_months)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac

    def set_progress(self, months_seen: int) -> None:
        self._months_seen = months_seen

    def _value(self, obs: tuple, action: int) -> float:
        total = 0.0
        for table in self._tables:
            row = table.get(obs)
            total += self.q_init if row is None else row[action]
        return total

    def _greedy(self, obs: tuple, legal_actions: list[int]) -> int:
        """Highest-value legal action, ties resolved to the lowest index.

        A tie is any value within `tie_margin` of the best (the stored sum
        of two tables, so the threshold spans 2x the margin in averaged
        units). Action order encodes a preference: meeting the contract
        outranks alternatives the table cannot tell apart, so estimation
        noise never tips a borrower into skipping or declining for fun.
        Genuinely better options clear the margin and still win.
        """
        ordered = sorted(legal_actions)
        values = {a: self._value(obs, a) for a in ordered}
        best_value = max(values.values())
        threshold = best_value - 2.0 * self.tie_margin
        for a in ordered:
            if values[a] >= threshold:
                return a
        return ordered[0]

    def act(self, obs: tuple, legal_actions: list[int], explore: bool) -> int:
        if not legal_actions:
            raise ConfigError("no legal actions")
        if explore and self._rng.random() < self.epsilon:
            ordered = sorted(legal_actions)
            return ordered[int(self._rng.integers(len(ordered)))]
        return self._greedy(obs, legal_actions)

    def learn(
        self,
        obs: tuple,
        action: int,
        reward: float,
        next_obs: tuple | None,
        done: bool,
        *,
        next_legal: list[int] | None = None,
        steps: int = 1,
    ) -> None:
        side = int(self._rng.integers(2))
        table, other = self._tables[side], self._tables[1 - side]
        row = table.get(obs)
        if row is None:
            row = [self.q_init] * self.n_actions
            table[obs] = row
            self._visits[side][obs] = [0] * self.n_actions
        target = reward
        if not done and next_obs is not None:
            candidates = sorted(next_legal) if next_legal else range(self.n_actions)
            sel_row = table.get(next_obs)
            if sel_row is None:
                chosen = next(iter(candidates))
            else:
                chosen = max(candidates, key=lambda a: (sel_row[a], -a))
            eval_row = other.get(next_obs)
            bootstrap = self.q_init if eval_row is None else eval_row[chosen]
            target += self.discount**steps * bootstrap
        counts = self._visits[side].setdefault(obs, [0] * self.n_actions)
        counts[action] += 1
        # Visit-decayed step size keeps heavily-seen cells from wandering
        # on within-state reward variance while new cells still move fast.
        step = self.alpha
        if self.alpha_decay_visits > 0:
            step *= self.alpha_decay_visits / (self.alpha_decay_visits + counts[action] - 1)
        row[action] += step * (target - row[action])

    def _merged_table(self) -> dict[tuple, list[float]]:
        keys = set(self._tables[0]) | set(self._tables[1])
        return {obs: [self._value(obs, a) / 2.0 for a in range(self.n_actions)] for obs in keys}

    def _merged_visits(self) -> dict[tuple, list[int]]:
        merged: dict[tuple, list[int]] = {}
        for visits in self._visits:
            for obs, counts in visits.items():
                acc = merged.setdefault(obs, [0] * self.n_actions)
                for a, c in enumerate(counts):
                    acc[a] += c
        return merged

    def snapshot(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "kind": "tabular_q",
            "n_actions": self.n_actions,
            "alpha": self.alpha,
            "alpha_decay_visits": self.alpha_decay_visits,
            "discount": self.discount,
            "epsilon_start": self.epsilon_start,
            "epsilon_end": self.epsilon_end,
            "epsilon_decay_months": self.epsilon_decay_months,
            "q_init": self.q_init,
            "tie_margin": self.tie_margin,
            "months_seen": self._months_seen,
            # Averaged view: greedy play and inspection read this one.
            "table": self._merged_table(),
            "visits": self._merged_visits(),
            "tables": [
                {obs: list(row) for obs, row in t.items()} for t in self._tables
            ],
        }

    def restore(self, state: dict) -> None:
        if state.get("version") != SNAPSHOT_VERSION or state.get("kind") != "tabular_q":
            raise ConfigError(
                f"incompatible policy snapshot: {state.get('kind')!r} "
                f"v{state.get('version')!r}"
            )
        if state["n_actions"] != self.n_actions:
            raise ConfigError(
                f"snapshot has {state['n_actions']} actions, learner has "
                f"{self.n_actions}"
            )
        self.alpha = state["alpha"]
        self.alpha_decay_visits = state["alpha_decay_visits"]
        self.discount = state["discount"]
        self.epsilon_start = state["epsilon_start"]
        self.epsilon_end = state["epsilon_end"]
        self.epsilon_decay_months = state["epsilon_decay_months"]
        self.q_init = state["q_init"]
        self.tie_margin = state.get("tie_margin", 0.0)
        self._months_seen = state["months_seen"]
        if "tables" in state:
            self._tables = tuple(
                {tuple(obs): list(row) for obs, row in t.items()} for t in state["tables"]
            )
        else:
            # Merged-only snapshot: load it one-sided. The empty side adds
            # the same q_init to every action, so greedy play is unchanged.
            self._tables = ({tuple(obs): list(row) for obs, row in state["table"].items()}, {})
        self._visits = (
            {tuple(obs): list(row) for obs, row in state["visits"].items()},
            {},
        )


class ScriptedPolicy:
    """Fixed preference order, no learning. For baselines and tests."""

    def __init__(self, preference: list[int]) -> None:
        self.preference = list(preference)

    def act(self, obs: tuple, legal_actions: list[int], explore: bool) -> int:
        allowed = set(legal_actions)
        for a in self.preference:
            if a in allowed:
                return a
        return legal_actions[0]

    def learn(self, *args, **kwargs) -> None:
        return None

    def snapshot(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "kind": "scripted",
            "preference": list(self.preference),
        }

    def restore(self, state: dict) -> None:
        if state.get("kind") != "scripted":
            raise ConfigError("incompatible policy snapshot")
        self.preference = list(state["preference"])


SCRIPTED_BEHAVIORS = {
    # Pays when possible, takes relief, never enrolls in products.
    "prudent": [
        Action.PAY_FULL,
        Action.PAY_SAVINGS,
        Action.ACCEPT_RELIEF,
        Action.DECLINE_PRODUCT,
        Action.MISS,
        Action.DECLINE_RELIEF,
    ],
    # Pays when possible but refuses every offer.
    "decliner": [
        Action.PAY_FULL,
        Action.PAY_SAVINGS,
        Action.DECLINE_RELIEF,
        Action.DECLINE_PRODUCT,
        Action.MISS,
        Action.ACCEPT_RELIEF,
    ],
    # Never pays; accepts relief when offered.
    "distressed": [
        Action.MISS,
        Action.ACCEPT_RELIEF,
        Action.DECLINE_PRODUCT,
        Action.PAY_FULL,
        Action.PAY_SAVINGS,
        Action.DECLINE_RELIEF,
    ],
}


def scripted(name: str) -> ScriptedPolicy:
    if name not in SCRIPTED_BEHAVIORS:
        raise ConfigError(
            f"unknown scripted behavior {name!r}; "
            f"choose from {sorted(SCRIPTED_BEHAVIORS)}"
        )
    return ScriptedPolicy([int(a) for a in SCRIPTED_BEHAVIORS[name]])


def restore_learner(state: dict, rng: np.random.Generator) -> PolicyLearner:
    """Rebuild a policy from its snapshot dict."""
    kind = state.get("kind")
    if kind == "tabular_q":
        learner = TabularQLearner(state["n_actions"], rng)
        learner.restore(state)
        return learner
    if kind == "scripted":
        policy = ScriptedPolicy([])
        policy.restore(state)
        return policy
    raise ConfigError(f"unknown policy snapshot kind {kind!r}")
