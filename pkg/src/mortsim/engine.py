"""The monthly simulation loop tying all the pieces together.

Each month runs in fixed order: the economy moves, borrowers decide and
cash flows, reserve accounts auto-draw, the servicer posts payments and
works its relief ladder, learners get their rewards, and the books are
asserted to balance to the cent.

Training runs several episodes of a freshly drawn population under random
income shocks and carries the learned tables across episodes. Evaluation
freezes the tables, draws a fresh population from a seed stream that is
identical across scenario cells (so shock sizes and products are compared
on the same households), and applies one deterministic shock.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .domain import Cents, ConfigError, round_cents, substream
from .economy import (
    EconomyState,
    EvalShockSpec,
    IncomeShockEvent,
    eval_shock_events,
    sample_train_shocks,
    shocked_income,
    step_hpi,
)
from .finance import (
    LoanStatus,
    equity_component,
    liquidity_component,
    month_due,
    apply_payment,
    utility,
)
from .policy import (
    Action,
    ActionSpace,
    PolicyLearner,
    TabularQLearner,
    encode_observation,
    restore_learner,
    scripted,
)
from .population import BorrowerProfile, sample_population
from .products import ReserveAccount, draw, enroll_matched, upfront_account
from .scenario import ScenarioConfig
from .servicing import (
    ReliefKind,
    ReliefState,
    ServicerBook,
    accept_pending,
    advance_missed_payment,
    decline_pending,
    fee_amount,
    foreclose_loan,
    incentive_for,
    installment_due,
    ladder_spent,
    make_offer,
    next_offer,
    plan_after_payment,
    recover_advances_from_cash,
    settle_advances_at_par,
)

EXIT_FORECLOSED = "foreclosed"
EXIT_PAID_OFF = "paid_off"


@dataclass(slots=True)
class BorrowerState:
    """One household's full runtime state."""

    id: int
    quintile: int
    bucket: int
    gamma: float
    income: Cents
    income_at_start: Cents
    nonhousing: Cents
    savings: Cents
    loan: object
    relief: ReliefState
    reserve: ReserveAccount | None = None
    income_reverts: list = field(default_factory=list)
    shocked: bool = False
    exited: bool = False
    exit_month: int | None = None
    exit_reason: str = ""
    first_miss_month: int | None = None
    miss_months: int = 0
    enrolled_amount: Cents = 0
    fees_paid: Cents = 0
    offers_received: int = 0
    offers_accepted: int = 0
    modified: bool = False
    forborne: bool = False
    repaid_plan: bool = False
    pay_full_months: int = 0
    pay_savings_months: int = 0
    miss_actions: int = 0
    discounted_utility: float = 0.0  # realized return from month 0, welfare metric
    # open learning transitions: each decision stays buffered until n later
    # decisions (or a terminal) close it, accruing monthly rewards meanwhile
    pend: list["PendEntry"] = field(default_factory=list)
    last_due: Cents = 0


@dataclass(slots=True)
class PendEntry:
    obs: tuple
    action: int
    ret: float = 0.0       # discounted reward rolled up since the decision
    months: int = 0        # months the rollup spans
    decisions: int = 0     # later decision points seen so far


@dataclass(slots=True)
class MonthFlows:
    """Cash that moved this month, for the conservation check."""

    income_in: Cents = 0
    consumption_out: Cents = 0
    borrower_mortgage_cash: Cents = 0   # net of refunds
    reserve_contrib: Cents = 0
    reserve_draws: Cents = 0
    grants_in: Cents = 0
    match_in: Cents = 0
    fees: Cents = 0
    incentives: Cents = 0
    settlements: Cents = 0
    advances: Cents = 0
    arrears_to_servicer: Cents = 0
    cash_to_owner: Cents = 0
    foreclosure_recovery_in: Cents = 0


@dataclass
class EvalResult:
    seed: int
    n_borrowers: int
    months: int
    shock_size: float
    product_kind: str
    product_detail: str
    borrowers: list[BorrowerState]
    book: ServicerBook
    net_cash_by_month: list[Cents]
    h_by_month: list[float]
    digest: str
    owner_cash: Cents
    fund_cash: Cents


@dataclass
class TrainResult:
    seed: int
    scope: str
    snapshots: dict
    episode_mean_reward: list[float]
    action_space: ActionSpace


def _product_detail(scenario: ScenarioConfig) -> str:
    p = scenario.product
    if p.kind == "upfront":
        return f"upfront:{p.upfront_amount}"
    if p.kind == "matched":
        return f"matched:{p.match_rate}:{','.join(str(m) for m in p.enroll_menu)}"
    return "none"


def build_action_space(scenario: ScenarioConfig) -> ActionSpace:
    if scenario.product.kind == "matched":
        return ActionSpace(enroll_menu=tuple(scenario.product.enroll_menu))
    return ActionSpace()


def build_learners(scenario: ScenarioConfig, space: ActionSpace, seed: int) -> dict:
    """Fresh learners keyed by scope (quintile number, 'global', or borrower id)."""
    cfg = scenario.learning
    if cfg.kind.startswith("scripted:"):
        behavior = cfg.kind.split(":", 1)[1]
        if cfg.scope == "global":
            return {"global": scripted(behavior)}
        return {q: scripted(behavior) for q in range(1, 6)}
    rng = substream(seed, "policy")
    total = scenario.training.episodes * scenario.training.months
    decay = max(1, int(cfg.epsilon_decay_fraction * total))

    def fresh():
        return TabularQLearner(
            space.n_actions,
            rng,
            alpha=cfg.alpha,
            alpha_decay_visits=cfg.alpha_decay_visits,
            discount=cfg.discount,
            epsilon_start=cfg.epsilon_start,
            epsilon_end=cfg.epsilon_end,
            epsilon_decay_months=decay,
            q_init=cfg.q_init,
            tie_margin=cfg.tie_margin,
        )

    if cfg.scope == "global":
        return {"global": fresh()}
    if cfg.scope == "quintile":
        return {q: fresh() for q in range(1, 6)}
    return {"_factory": fresh}  # individual scope: filled in lazily per borrower


class World:
    """One simulated cohort, training episode or evaluation cell."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        *,
        seed: int,
        train: bool,
        months: int,
        profiles: list[BorrowerProfile],
        learners: dict,
        economy: EconomyState,
        economy_rng,
        eval_shock: EvalShockSpec | None = None,
        month_offset: int = 0,
        collect_digest: bool = False,
    ) -> None:
        self.scenario = scenario
        self.seed = seed
        self.train = train
        self.months = months
        self.learners = learners
        self.economy = economy
        self.economy_rng = economy_rng
        self.eval_shock = eval_shock
        self.month_offset = month_offset
        self.space = build_action_space(scenario)
        self.book = ServicerBook()
        self.owner_cash: Cents = 0
        self.fund_cash: Cents = 0
        self.month = 0
        self.net_cash_by_month: list[Cents] = []
        self.h_by_month: list[float] = []
        self.reward_sum = 0.0
        self.reward_count = 0
        self._hasher = hashlib.sha256() if collect_digest else None
        self.borrowers = [
            BorrowerState(
                id=p.id,
                quintile=p.quintile,
                bucket=p.bucket,
                gamma=p.gamma,
                income=p.monthly_income,
                income_at_start=p.monthly_income,
                nonhousing=p.nonhousing_expense,
                savings=p.savings,
                loan=p.loan,
                relief=ReliefState(),
            )
            for p in profiles
        ]

    # -- learner plumbing ---------------------------------------------------

    def _learner_for(self, b: BorrowerState) -> PolicyLearner:
        scope = self.scenario.learning.scope
        if scope == "global":
            return self.learners["global"]
        if scope == "quintile":
            return self.learners[b.quintile]
        learner = self.learners.get(b.id)
        if learner is None:
            factory = self.learners.get("_factory")
            if factory is None:
                raise ConfigError("individual-scope learners missing factory")
            learner = factory()
            self.learners[b.id] = learner
        return learner

    def _decide(self, b: BorrowerState, obs: tuple, legal: list[int]) -> int:
        learner = self._learner_for(b)
        action = learner.act(obs, legal, explore=self.train)
        if self.train:
            # An exploratory action invalidates the greedy continuation the
            # older open transitions assume, so they close here; bootstrapping
            # at this state stays sound because max-Q ignores the detour.
            cut = action != learner.act(obs, legal, explore=False)
            n = self.scenario.learning.n_step
            keep = []
            for e in b.pend:
                e.decisions += 1
                if e.decisions >= n or cut:
                    learner.learn(
                        e.obs, e.action, e.ret, obs, False,
                        next_legal=legal, steps=e.months,
                    )
                else:
                    keep.append(e)
            keep.append(PendEntry(obs, action))
            b.pend = keep
        return action

    def _finish_pending(self, b: BorrowerState) -> None:
        if not self.train or not b.pend:
            return
        learner = self._learner_for(b)
        discount = self.scenario.learning.discount
        for e in b.pend:
            ret = e.ret
            if b.exit_reason == EXIT_PAID_OFF:
                # A retired loan is an absorbing state worth gamma + (1-gamma)*h
                # per month (no payment, full equity). Fold its closed-form
                # value into the return so payoff is not mistaken for the
                # reward stream simply ending.
                monthly = b.gamma + (1.0 - b.gamma) * self.economy.h
                ret += discount**e.months * monthly / (1.0 - discount)
            learner.learn(e.obs, e.action, ret, None, True, steps=e.months)
        b.pend = []

    # -- observation helpers ------------------------------------------------

    def _forbearing(self, b: BorrowerState) -> bool:
        return b.relief.active_kind is ReliefKind.FORBEARANCE

    def _month_due(self, b: BorrowerState) -> Cents:
        """The statement amount: what the borrower must pay to stay (or get)
        current this month.

        A repayment plan bills the scheduled amount plus one installment;
        forbearance bills nothing. Outside active relief the statement
        demands the scheduled amount plus everything past due, so a
        delinquent borrower faces the full cure bill until relief or cash
        resolves it.
        """
        if self._forbearing(b):
            return 0
        if b.relief.active_kind is ReliefKind.REPAYMENT:
            return month_due(b.loan) + installment_due(b.relief, b.loan)
        return month_due(b.loan) + b.loan.arrears

    def _reward_bill(self, b: BorrowerState) -> Cents:
        """Month-end statement for the liquidity reward.

        Same shape as the decision-time statement, except forbearance
        prices the contract payment rather than the paused zero: the pause
        stops collection, it does not make the housing cost disappear.
        """
        if self._forbearing(b):
            return month_due(b.loan)
        return self._month_due(b)

    def _observe(self, b: BorrowerState, due: Cents, offer_code: int, window_open: bool) -> tuple:
        product_open = window_open or (b.reserve is not None and b.reserve.balance > 0)
        return encode_observation(
            housing_due=due,
            income=b.income,
            savings=b.savings,
            nonhousing=b.nonhousing,
            months_delinquent=b.loan.months_delinquent,
            offer_code=offer_code,
            h=self.economy.h,
            product_open=product_open,
        )

    # -- the monthly loop ---------------------------------------------------

    def run(self) -> None:
        for _ in range(self.months):
            self.step_month()
        for b in self.borrowers:
            if not b.exited:
                self._finish_pending(b)

    def step_month(self) -> None:
        m = self.month
        flows = MonthFlows()
        savings_before = sum(b.savings for b in self.borrowers)
        servicer_before = self.book.net_cash
        owner_before = self.owner_cash
        fund_before = self.fund_cash

        # 1. economy moves; shocks land
        if m > 0:
            step_hpi(self.economy, self.economy_rng)
        self._apply_income_events(m)

        # product grant / enrollment window at the first month
        window_open = False
        if m == 0:
            window_open = self._open_products(flows)

        if self.train:
            for learner in self.learners.values():
                if hasattr(learner, "set_progress"):
                    learner.set_progress(self.month_offset + m)

        # 2. borrower decisions and cash
        month_cash: dict[int, Cents] = {}
        for b in self.borrowers:
            if b.exited:
                continue
            flows.income_in += b.income
            b.savings += b.income
            consumed = min(b.savings, b.nonhousing)
            b.savings -= consumed
            flows.consumption_out += consumed

            if b.relief.pending_offer is not None:
                self._relief_decision(b, flows)
            if window_open and b.reserve is None:
                self._enroll_decision(b, flows)

            due = self._month_due(b)
            # decision-time statement; _service_loan reprices it at month end
            b.last_due = due if not self._forbearing(b) else month_due(b.loan)
            cash = 0
            if due > 0:
                income_cover = max(0, b.income - consumed)
                legal = [int(Action.MISS)]
                if income_cover >= due:
                    legal.append(int(Action.PAY_FULL))
                elif b.savings >= due:
                    legal.append(int(Action.PAY_SAVINGS))
                legal.sort()
                obs = self._observe(b, due, 0, False)
                action = self._decide(b, obs, legal)
                if action == Action.PAY_FULL:
                    b.pay_full_months += 1
                    cash = due
                elif action == Action.PAY_SAVINGS:
                    b.pay_savings_months += 1
                    cash = due
                else:
                    b.miss_actions += 1
                b.savings -= cash
                flows.borrower_mortgage_cash += cash

            # 3. reserve auto-draw against any remaining gap
            if due > cash and b.reserve is not None and b.reserve.balance > 0:
                paid = draw(b.reserve, due - cash)
                self.fund_cash -= paid
                flows.reserve_draws += paid
                cash += paid
            month_cash[b.id] = cash

        # 4. servicer posts the month
        for b in self.borrowers:
            if b.exited:
                continue
            self._service_loan(b, month_cash[b.id], flows, m)

        # 5. rewards and learning
        equity_mode = self.scenario.learning.equity_denominator
        discount = self.scenario.learning.discount
        for b in self.borrowers:
            if b.exited and b.exit_month != m:
                continue
            liquidity = liquidity_component(b.last_due, b.income)
            equity = equity_component(b.loan, equity_mode)
            reward = utility(b.gamma, liquidity, equity, self.economy.h)
            self.reward_sum += reward
            self.reward_count += 1
            b.discounted_utility += discount**m * reward
            if self.train:
                for e in b.pend:
                    e.ret += discount**e.months * reward
                    e.months += 1
            if b.exited:
                self._finish_pending(b)

        # 6. books must balance to the cent
        self._assert_conserved(
            flows, savings_before, servicer_before, owner_before, fund_before
        )
        self.net_cash_by_month.append(self.book.net_cash - servicer_before)
        self.h_by_month.append(self.economy.h)
        if self._hasher is not None:
            self._update_digest(m)
        self.month += 1

    # -- sub-steps ------------------------------------------------------

    def _apply_income_events(self, m: int) -> None:
        for b in self.borrowers:
            if b.income_reverts:
                due_now = [ev for ev in b.income_reverts if ev[0] <= m]
                if due_now:
                    b.income = due_now[-1][1]
                    b.income_reverts = [ev for ev in b.income_reverts if ev[0] > m]
        if self.train:
            events = sample_train_shocks(
                self.scenario.training.shock, len(self.borrowers), self.economy_rng
            )
        elif self.eval_shock is not None and m == self.eval_shock.month:
            events = eval_shock_events(
                self.eval_shock, len(self.borrowers), self.economy_rng
            )
        else:
            events = []
        for ev in events:
            b = self.borrowers[ev.borrower_index]
            if b.exited:
                continue
            old = b.income
            # Training arrivals re-level from the borrower's base income, so
            # a long run of events stays a bounded process rather than a
            # multiplicative walk into ruin. The one-off evaluation shock
            # scales whatever the borrower currently earns.
            ref = b.income_at_start if self.train else b.income
            b.income = shocked_income(ref, ev)
            b.shocked = True
            if ev.duration_months is not None:
                b.income_reverts.append((m + ev.duration_months, old))

    def _open_products(self, flows: MonthFlows) -> bool:
        product = self.scenario.product
        if product.kind == "upfront" and product.upfront_amount > 0:
            for b in self.borrowers:
                b.reserve = upfront_account(product.upfront_amount)
                self.fund_cash += product.upfront_amount
                flows.grants_in += product.upfront_amount
            return False
        return product.kind == "matched" and bool(product.enroll_menu)

    def _relief_decision(self, b: BorrowerState, flows: MonthFlows) -> None:
        offer = b.relief.pending_offer
        # the burden shown is the statement relief would replace
        obs = self._observe(b, month_due(b.loan) + b.loan.arrears, int(offer), False)
        legal = [int(Action.ACCEPT_RELIEF), int(Action.DECLINE_RELIEF)]
        action = self._decide(b, obs, legal)
        if action == Action.ACCEPT_RELIEF:
            b.offers_accepted += 1
            kind = accept_pending(self.scenario.servicer, b.relief, b.loan)
            incentive = incentive_for(self.scenario.servicer, kind)
            self.book.incentives_received += incentive
            self.owner_cash -= incentive
            flows.incentives += incentive
            if kind is ReliefKind.MODIFICATION:
                b.modified = True
                settled = settle_advances_at_par(self.book, b.id)
                self.owner_cash -= settled
                flows.settlements += settled
            elif kind is ReliefKind.FORBEARANCE:
                b.forborne = True
            else:
                b.repaid_plan = True
        else:
            decline_pending(b.relief)

    def _enroll_decision(self, b: BorrowerState, flows: MonthFlows) -> None:
        product = self.scenario.product
        legal = [int(Action.DECLINE_PRODUCT)]
        for tier, amount in enumerate(self.space.enroll_menu):
            if amount <= b.savings:
                legal.append(self.space.enroll_action(tier))
        obs = self._observe(b, month_due(b.loan), 0, True)
        action = self._decide(b, obs, legal)
        if self.space.is_enroll(action):
            contribution = self.space.enroll_amount(action)
            b.savings -= contribution
            b.reserve = enroll_matched(contribution, product.match_rate)
            b.enrolled_amount = contribution
            match = b.reserve.matched
            self.book.match_paid += match
            self.fund_cash += contribution + match
            flows.reserve_contrib += contribution
            flows.match_in += match

    def _service_loan(self, b: BorrowerState, cash: Cents, flows: MonthFlows, m: int) -> None:
        loan = b.loan
        config = self.scenario.servicer
        paused = self._forbearing(b)
        due_total = b.last_due
        out = apply_payment(loan, cash, payment_paused=paused)

        fee = fee_amount(config, loan)
        self.book.fees_collected += fee
        self.owner_cash -= fee
        b.fees_paid += fee
        flows.fees += fee

        if out.toward_arrears > 0:
            to_servicer = recover_advances_from_cash(self.book, b.id, out.toward_arrears)
            flows.arrears_to_servicer += to_servicer
            to_owner = out.toward_arrears - to_servicer
            self.owner_cash += to_owner
            flows.cash_to_owner += to_owner
        self.owner_cash += out.toward_schedule + out.prepayment
        flows.cash_to_owner += out.toward_schedule + out.prepayment
        if out.refund > 0:
            b.savings += out.refund
            flows.borrower_mortgage_cash -= out.refund

        if out.shortfall > 0:
            advanced = advance_missed_payment(self.book, config, b.id, out.shortfall, loan)
            if advanced > 0:
                self.owner_cash += advanced
                flows.advances += advanced
            if not paused:
                b.miss_months += 1
                if b.first_miss_month is None:
                    b.first_miss_month = m

        plan_after_payment(b.relief, loan, max(0, due_total - cash))

        if loan.status is LoanStatus.PAID_OFF:
            b.last_due = 0
            b.exited = True
            b.exit_month = m
            b.exit_reason = EXIT_PAID_OFF
            return

        if (
            loan.months_delinquent >= config.foreclosure_trigger_months
            and ladder_spent(b.relief, loan.months_delinquent)
        ):
            # the exit month still prices the unpayable statement
            recovered, _ = foreclose_loan(self.book, loan, b.id, self.economy.h)
            flows.foreclosure_recovery_in += recovered
            b.exited = True
            b.exit_month = m
            b.exit_reason = EXIT_FORECLOSED
            return

        offer = next_offer(b.relief, loan.months_delinquent)
        if offer is not None:
            make_offer(b.relief, offer)
            b.offers_received += 1

        # Utility prices the statement the borrower carries out of the
        # month, so a miss shows up in the same month's reward instead of
        # arriving a bootstrap step late.
        b.last_due = self._reward_bill(b)

    def _assert_conserved(
        self,
        flows: MonthFlows,
        savings_before: Cents,
        servicer_before: Cents,
        owner_before: Cents,
        fund_before: Cents,
    ) -> None:
        savings_now = sum(b.savings for b in self.borrowers)
        assert savings_now - savings_before == (
            flows.income_in
            - flows.consumption_out
            - flows.borrower_mortgage_cash
            - flows.reserve_contrib
        ), "borrower savings do not reconcile"
        assert self.fund_cash - fund_before == (
            flows.grants_in + flows.reserve_contrib + flows.match_in - flows.reserve_draws
        ), "reserve fund does not reconcile"
        assert self.book.net_cash - servicer_before == (
            flows.fees
            + flows.incentives
            + flows.settlements
            + flows.arrears_to_servicer
            + flows.foreclosure_recovery_in
            - flows.advances
            - flows.match_in
        ), "servicer cash does not reconcile"
        assert self.owner_cash - owner_before == (
            flows.cash_to_owner
            + flows.advances
            - flows.fees
            - flows.incentives
            - flows.settlements
        ), "loan owner cash does not reconcile"
        assert (
            flows.borrower_mortgage_cash + flows.reserve_draws
            == flows.cash_to_owner + flows.arrears_to_servicer
        ), "loan pass-through leaks cash"
        total_delta = (
            (savings_now - savings_before)
            + (self.fund_cash - fund_before)
            + (self.book.net_cash - servicer_before)
            + (self.owner_cash - owner_before)
        )
        external = (
            flows.income_in
            - flows.consumption_out
            + flows.grants_in
            + flows.foreclosure_recovery_in
        )
        assert total_delta == external, "system cash leak"
        self.book.check()

    def _update_digest(self, m: int) -> None:
        h = self._hasher
        h.update(f"m{m}:h{self.economy.h:.12e}".encode())
        for b in self.borrowers:
            h.update(
                (
                    f"{b.id},{b.savings},{b.income},{b.loan.balance},"
                    f"{b.loan.arrears},{b.loan.months_delinquent},"
                    f"{b.loan.status.value},{int(b.exited)},"
                    f"{b.reserve.balance if b.reserve else -1}\n"
                ).encode()
            )
        h.update(
            (
                f"book,{self.book.net_cash},{self.book.advanced_total},"
                f"{self.owner_cash},{self.fund_cash}\n"
            ).encode()
        )

    @property
    def digest(self) -> str:
        if self._hasher is None:
            return ""
        return self._hasher.hexdigest()


# ---------------------------------------------------------------------------
# entry points

def run_training(scenario: ScenarioConfig, seed: int) -> TrainResult:
    """Train the configured learners across episodes; returns their snapshots."""
    space = build_action_space(scenario)
    learners = build_learners(scenario, space, seed)
    episode_rewards = []
    for episode in range(scenario.training.episodes):
        profiles = sample_population(
            scenario.population,
            scenario.training.n_borrowers,
            substream(seed, "population", "train", episode),
        )
        economy = EconomyState(scenario.training.hpi)
        world = World(
            scenario,
            seed=seed,
            train=True,
            months=scenario.training.months,
            profiles=profiles,
            learners=learners,
            economy=economy,
            economy_rng=substream(seed, "economy", "train", episode),
            month_offset=episode * scenario.training.months,
        )
        world.run()
        episode_rewards.append(
            world.reward_sum / world.reward_count if world.reward_count else 0.0
        )
    snapshots = {
        key: learner.snapshot()
        for key, learner in learners.items()
        if key != "_factory"
    }
    return TrainResult(
        seed=seed,
        scope=scenario.learning.scope,
        snapshots=snapshots,
        episode_mean_reward=episode_rewards,
        action_space=space,
    )


def _frozen_learners(scenario: ScenarioConfig, snapshots: dict, seed: int) -> dict:
    rng = substream(seed, "policy", "eval")
    learners = {key: restore_learner(snap, rng) for key, snap in snapshots.items()}
    if scenario.learning.scope == "individual":
        cfg = scenario.learning
        space = build_action_space(scenario)

        def fresh():
            return TabularQLearner(space.n_actions, rng, alpha=cfg.alpha, discount=cfg.discount)

        learners["_factory"] = fresh
    return learners


def run_evaluation(
    scenario: ScenarioConfig,
    seed: int,
    snapshots: dict,
    *,
    shock_size: float | None = None,
    collect_digest: bool = True,
) -> EvalResult:
    """One evaluation cell: frozen policies, fresh cohort, one shock."""
    ev = scenario.evaluation
    profiles = sample_population(
        scenario.population, ev.n_borrowers, substream(seed, "population", "eval")
    )
    spec = ev.shock_spec(shock_size)
    world = World(
        scenario,
        seed=seed,
        train=False,
        months=ev.months,
        profiles=profiles,
        learners=_frozen_learners(scenario, snapshots, seed),
        economy=EconomyState(ev.hpi),
        economy_rng=substream(seed, "economy", "eval"),
        eval_shock=spec if spec.size > 0 else None,
        collect_digest=collect_digest,
    )
    world.run()
    return EvalResult(
        seed=seed,
        n_borrowers=ev.n_borrowers,
        months=ev.months,
        shock_size=spec.size,
        product_kind=scenario.product.kind,
        product_detail=_product_detail(scenario),
        borrowers=world.borrowers,
        book=world.book,
        net_cash_by_month=world.net_cash_by_month,
        h_by_month=world.h_by_month,
        digest=world.digest,
        owner_cash=world.owner_cash,
        fund_cash=world.fund_cash,
    )
