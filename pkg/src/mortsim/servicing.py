"""Servicer operations: fees, advances, loss mitigation, foreclosure.

The servicer strips a monthly fee from collections, advances missed
scheduled payments to the investor up to a per-loan cap, and walks
delinquent borrowers up a fixed relief ladder (repayment plan, then
forbearance, then modification), each rung offered at most once per loan.
Foreclosure fires only when the borrower is seriously delinquent and the
ladder is spent.

Cash from curing borrowers repays the servicer's outstanding advances
before anything flows to the investor; a modification settles them at par;
foreclosure recovers them from the sale haircut and writes off the rest.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .domain import Cents, ConfigError, round_cents
from .finance import Loan, LoanStatus, scheduled_payment


@dataclass(slots=True)
class ServicerConfig:
    monthly_fee_rate: float = 0.0025
    advance_cap_payments: int = 4
    incentive_repayment: Cents = 50_000
    incentive_forbearance: Cents = 50_000
    incentive_modification: Cents = 100_000
    foreclosure_trigger_months: int = 4
    repayment_spread_months: int = 6
    forbearance_max_months: int = 6
    modification_term_extension_months: int = 120


def validate_servicer_config(config: ServicerConfig) -> list[str]:
    problems = []
    if not 0.0 <= config.monthly_fee_rate < 0.05:
        problems.append(f"monthly_fee_rate {config.monthly_fee_rate} not in [0, 0.05)")
    if config.advance_cap_payments < 0:
        problems.append("advance_cap_payments must be >= 0")
    for name in ("incentive_repayment", "incentive_forbearance", "incentive_modification"):
        if getattr(config, name) < 0:
            problems.append(f"{name} must be >= 0")
    if config.foreclosure_trigger_months < 1:
        problems.append("foreclosure_trigger_months must be >= 1")
    if config.repayment_spread_months < 1:
        problems.append("repayment_spread_months must be >= 1")
    if config.forbearance_max_months < 1:
        problems.append("forbearance_max_months must be >= 1")
    if config.modification_term_extension_months < 0:
        problems.append("modification_term_extension_months must be >= 0")
    return problems


class ReliefKind(enum.IntEnum):
    REPAYMENT = 1
    FORBEARANCE = 2
    MODIFICATION = 3


@dataclass(slots=True)
class ReliefState:
    """Per-loan loss-mitigation ladder state."""

    pending_offer: ReliefKind | None = None
    active_kind: ReliefKind | None = None
    plan_months_left: int = 0
    plan_installment: Cents = 0
    repayment_offered: bool = False
    forbearance_offered: bool = False
    modification_offered: bool = False
    repayment_failed: bool = False
    forbearance_exhausted: bool = False  # ran its full course; gates modification
    modification_done: bool = False

    def was_offered(self, kind: ReliefKind) -> bool:
        return {
            ReliefKind.REPAYMENT: self.repayment_offered,
            ReliefKind.FORBEARANCE: self.forbearance_offered,
            ReliefKind.MODIFICATION: self.modification_offered,
        }[kind]

    def mark_offered(self, kind: ReliefKind) -> None:
        if kind is ReliefKind.REPAYMENT:
            self.repayment_offered = True
        elif kind is ReliefKind.FORBEARANCE:
            self.forbearance_offered = True
        else:
            self.modification_offered = True


@dataclass(slots=True)
class AdvanceAccount:
    advanced_total: Cents = 0
    outstanding: Cents = 0
    recovered: Cents = 0
    written_off: Cents = 0
    count: int = 0

    def check(self) -> None:
        assert self.outstanding >= 0
        assert self.advanced_total == self.outstanding + self.recovered + self.written_off


@dataclass
class ServicerBook:
    """Servicer-side cash and receivables across the whole portfolio."""

    accounts: dict[int, AdvanceAccount] = field(default_factory=dict)
    fees_collected: Cents = 0
    incentives_received: Cents = 0
    advanced_total: Cents = 0
    recovered_from_cures: Cents = 0
    recovered_from_settlements: Cents = 0
    recovered_from_foreclosures: Cents = 0
    written_off_total: Cents = 0
    match_paid: Cents = 0

    def account(self, loan_id: int) -> AdvanceAccount:
        acct = self.accounts.get(loan_id)
        if acct is None:
            acct = AdvanceAccount()
            self.accounts[loan_id] = acct
        return acct

    @property
    def outstanding_total(self) -> Cents:
        return sum(a.outstanding for a in self.accounts.values())

    @property
    def recovered_total(self) -> Cents:
        return (
            self.recovered_from_cures
            + self.recovered_from_settlements
            + self.recovered_from_foreclosures
        )

    @property
    def net_cash(self) -> Cents:
        """Cash the servicer has kept: receipts less advances and match paid.

        Written-off advances already depress this through the cash that went
        out and never came back; they are reported separately, not deducted
        again.
        """
        return (
            self.fees_collected
            + self.incentives_received
            + self.recovered_total
            - self.advanced_total
            - self.match_paid
        )

    def check(self) -> None:
        total = AdvanceAccount()
        for acct in self.accounts.values():
            acct.check()
            total.advanced_total += acct.advanced_total
            total.outstanding += acct.outstanding
            total.recovered += acct.recovered
            total.written_off += acct.written_off
        assert total.advanced_total == self.advanced_total
        assert total.recovered == self.recovered_from_cures + self.recovered_from_settlements + self.recovered_from_foreclosures
        assert total.written_off == self.written_off_total
        assert self.advanced_total == self.outstanding_total + self.recovered_total + self.written_off_total


def fee_amount(config: ServicerConfig, loan: Loan) -> Cents:
    """Monthly servicing strip on an active loan."""
    return round_cents(config.monthly_fee_rate * loan.scheduled_payment)


def advance_missed_payment(
    book: ServicerBook, config: ServicerConfig, loan_id: int, shortfall: Cents, loan: Loan
) -> Cents:
    """Advance the uncovered part of this month's scheduled amount.

    Returns the cash the servicer sends the investor, zero once the per-loan
    cap is exhausted. Partial payments are topped up, not double-advanced.
    """
    if shortfall <= 0:
        return 0
    acct = book.account(loan_id)
    if acct.count >= config.advance_cap_payments:
        return 0
    amount = min(shortfall, loan.scheduled_payment)
    acct.count += 1
    acct.advanced_total += amount
    acct.outstanding += amount
    book.advanced_total += amount
    return amount


def recover_advances_from_cash(book: ServicerBook, loan_id: int, cash: Cents) -> Cents:
    """Route arrears cash to outstanding advances first; returns the cut kept."""
    if cash <= 0:
        return 0
    acct = book.account(loan_id)
    taken = min(cash, acct.outstanding)
    acct.outstanding -= taken
    acct.recovered += taken
    book.recovered_from_cures += taken
    return taken


def settle_advances_at_par(book: ServicerBook, loan_id: int) -> Cents:
    """Capitalizing arrears repays the servicer's advances in full."""
    acct = book.account(loan_id)
    amount = acct.outstanding
    acct.outstanding = 0
    acct.recovered += amount
    book.recovered_from_settlements += amount
    return amount


def foreclose_loan(
    book: ServicerBook, loan: Loan, loan_id: int, h: float
) -> tuple[Cents, Cents]:
    """Terminate the loan; recover advances from the sale at min(h, 1)."""
    if loan.status in (LoanStatus.PAID_OFF, LoanStatus.FORECLOSED):
        raise ConfigError(f"cannot foreclose a {loan.status.value} loan")
    acct = book.account(loan_id)
    recovered = round_cents(min(h, 1.0) * acct.outstanding)
    written_off = acct.outstanding - recovered
    acct.outstanding = 0
    acct.recovered += recovered
    acct.written_off += written_off
    book.recovered_from_foreclosures += recovered
    book.written_off_total += written_off
    loan.status = LoanStatus.FORECLOSED
    return recovered, written_off


def incentive_for(config: ServicerConfig, kind: ReliefKind) -> Cents:
    return {
        ReliefKind.REPAYMENT: config.incentive_repayment,
        ReliefKind.FORBEARANCE: config.incentive_forbearance,
        ReliefKind.MODIFICATION: config.incentive_modification,
    }[kind]


def next_offer(relief: ReliefState, months_delinquent: int) -> ReliefKind | None:
    """The next rung of the relief ladder, or None if none is reachable.

    Each rung is offered once per loan. The ladder is gated, not a free
    escalator: forbearance needs a failed repayment plan or two months of
    delinquency, and a modification is only reachable after a forbearance
    actually ran its course. Declining a rung therefore closes everything
    above it; there is no shortcut to a recast loan.
    """
    if relief.pending_offer is not None or relief.active_kind is not None:
        return None
    if months_delinquent < 1:
        return None
    if not relief.repayment_offered:
        return ReliefKind.REPAYMENT
    if not relief.forbearance_offered and (
        relief.repayment_failed or months_delinquent >= 2
    ):
        return ReliefKind.FORBEARANCE
    if not relief.modification_offered and relief.forbearance_exhausted:
        return ReliefKind.MODIFICATION
    return None


def ladder_spent(relief: ReliefState, months_delinquent: int) -> bool:
    """True when no relief is pending, active, or ever coming."""
    return (
        relief.pending_offer is None
        and relief.active_kind is None
        and next_offer(relief, months_delinquent) is None
    )


def make_offer(relief: ReliefState, kind: ReliefKind) -> None:
    relief.pending_offer = kind
    relief.mark_offered(kind)


def decline_pending(relief: ReliefState) -> None:
    if relief.pending_offer is None:
        raise ConfigError("no pending relief offer to decline")
    relief.pending_offer = None


def apply_modification(config: ServicerConfig, loan: Loan) -> None:
    """Capitalize arrears, stretch the term, recast to a level payment."""
    if loan.status in (LoanStatus.PAID_OFF, LoanStatus.FORECLOSED):
        raise ConfigError(f"cannot modify a {loan.status.value} loan")
    loan.balance += loan.arrears
    loan.arrears = 0
    loan.months_delinquent = 0
    loan.months_remaining += config.modification_term_extension_months
    # keep the contract total in step so the equity denominator re-anchors
    loan.term_months += config.modification_term_extension_months
    if loan.months_remaining < 1:
        raise ConfigError("modified loan must have at least one month remaining")
    loan.scheduled_payment = scheduled_payment(
        loan.balance, loan.annual_rate, loan.months_remaining
    )
    loan.status = LoanStatus.CURRENT


def accept_pending(config: ServicerConfig, relief: ReliefState, loan: Loan) -> ReliefKind:
    """Activate the pending offer; returns the kind it was."""
    kind = relief.pending_offer
    if kind is None:
        raise ConfigError("no pending relief offer to accept")
    relief.pending_offer = None
    if kind is ReliefKind.REPAYMENT:
        months = config.repayment_spread_months
        # ceil so the final installment clears the arrears exactly
        relief.plan_installment = -(-loan.arrears // months)
        relief.plan_months_left = months
        relief.active_kind = kind
        loan.status = LoanStatus.IN_RELIEF
    elif kind is ReliefKind.FORBEARANCE:
        relief.plan_months_left = config.forbearance_max_months
        relief.plan_installment = 0
        relief.active_kind = kind
        loan.status = LoanStatus.IN_RELIEF
    else:
        apply_modification(config, loan)
        relief.modification_done = True
    return kind


def installment_due(relief: ReliefState, loan: Loan) -> Cents:
    """Extra amount due this month under an active repayment plan."""
    if relief.active_kind is not ReliefKind.REPAYMENT:
        return 0
    return min(relief.plan_installment, loan.arrears)


def plan_after_payment(relief: ReliefState, loan: Loan, shortfall_total: Cents) -> None:
    """Monthly plan bookkeeping once the payment has posted.

    `shortfall_total` is the gap against the combined due (scheduled amount
    plus plan installment). A repayment plan completes when arrears reach
    zero and fails on any such gap. Forbearance simply counts down; when it
    lapses the loan is delinquent again and the ladder moves on.
    """
    kind = relief.active_kind
    if kind is None:
        return
    if kind is ReliefKind.REPAYMENT:
        if loan.arrears == 0:
            relief.active_kind = None
            relief.plan_months_left = 0
            relief.plan_installment = 0
            if loan.status is LoanStatus.IN_RELIEF:
                loan.status = LoanStatus.CURRENT
        elif shortfall_total > 0:
            relief.active_kind = None
            relief.plan_months_left = 0
            relief.plan_installment = 0
            relief.repayment_failed = True
            loan.status = LoanStatus.DELINQUENT
        else:
            relief.plan_months_left -= 1
    elif kind is ReliefKind.FORBEARANCE:
        relief.plan_months_left -= 1
        if relief.plan_months_left <= 0:
            relief.active_kind = None
            relief.plan_installment = 0
            relief.forbearance_exhausted = True
            loan.status = (
                LoanStatus.DELINQUENT if loan.arrears > 0 else LoanStatus.CURRENT
            )
