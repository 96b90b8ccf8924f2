"""Fixed-rate loan ledger: amortization, payment application, borrower utility.

The ledger convention: the schedule always advances for an active loan. Each
month interest accrues on the balance and the scheduled amount amortizes it,
whether or not cash arrived; whatever part of the scheduled amount the
borrower did not cover is booked to ``arrears`` as a receivable. This mirrors
a servicer advancing missed payments to the owner: the note stays on
schedule, and arrears are what the borrower owes against those advances.
Missed months therefore cost the borrower exactly the unpaid interest, and
arrears themselves never compound.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .domain import Cents, ConfigError, Rate, monthly_rate, round_cents


class LoanStatus(enum.Enum):
    CURRENT = "current"
    DELINQUENT = "delinquent"
    IN_RELIEF = "in_relief"
    PAID_OFF = "paid_off"
    FORECLOSED = "foreclosed"


# Statuses past which the ledger refuses further postings.
TERMINAL_STATUSES = frozenset({LoanStatus.PAID_OFF, LoanStatus.FORECLOSED})


@dataclass(slots=True)
class Loan:
    original_principal: Cents
    annual_rate: Rate
    term_months: int
    scheduled_payment: Cents
    balance: Cents
    months_remaining: int
    payments_made_total: Cents = 0
    arrears: Cents = 0
    months_delinquent: int = 0
    status: LoanStatus = LoanStatus.CURRENT

    @property
    def active(self) -> bool:
        return self.status not in TERMINAL_STATUSES


@dataclass(slots=True)
class PaymentOutcome:
    """Exact cash decomposition of one monthly posting.

    amount == toward_schedule + toward_arrears + prepayment + refund, always.
    """

    interest: Cents
    scheduled_due: Cents
    toward_schedule: Cents
    toward_arrears: Cents
    prepayment: Cents
    refund: Cents
    shortfall: Cents
    cured: bool
    paid_off: bool

    @property
    def cash_applied(self) -> Cents:
        return self.toward_schedule + self.toward_arrears + self.prepayment


def _pow1p(rate: float, n: int) -> float:
    # (1 + rate)^n by binary exponentiation: float multiplies only, so the
    # result is bit-identical across platforms (libm pow is not).
    base = 1.0 + rate
    out = 1.0
    while n:
        if n & 1:
            out *= base
        base *= base
        n >>= 1
    return out


def _check_loan_terms(principal: Cents, annual_rate: Rate, term_months: int) -> None:
    if principal <= 0:
        raise ConfigError(f"loan principal must be positive cents, got {principal}")
    if not 0.0 <= annual_rate <= 1.0:
        raise ConfigError(f"annual rate must be in [0, 1], got {annual_rate}")
    if term_months < 1:
        raise ConfigError(f"loan term must be at least one month, got {term_months}")


def scheduled_payment(principal: Cents, annual_rate: Rate, term_months: int) -> Cents:
    """Level monthly payment for a fixed-rate loan, in cents.

    Closed-form annuity, rounded half-even. The final scheduled month absorbs
    the rounding residual (see apply_payment), so the ledger retires exactly.
    """
    _check_loan_terms(principal, annual_rate, term_months)
    r = monthly_rate(annual_rate)
    if r < 1e-12:
        return round_cents(principal / term_months)
    growth = _pow1p(r, term_months)
    return round_cents(principal * r * growth / (growth - 1.0))


def principal_for_payment(payment: Cents, annual_rate: Rate, term_months: int) -> Cents:
    """Inverse annuity: the principal a given level payment supports."""
    if payment <= 0:
        raise ConfigError(f"payment must be positive cents, got {payment}")
    r = monthly_rate(annual_rate)
    if r < 1e-12:
        return payment * term_months
    growth = _pow1p(r, term_months)
    return round_cents(payment * (growth - 1.0) / (r * growth))


def new_loan(principal: Cents, annual_rate: Rate, term_months: int) -> Loan:
    return Loan(
        original_principal=principal,
        annual_rate=annual_rate,
        term_months=term_months,
        scheduled_payment=scheduled_payment(principal, annual_rate, term_months),
        balance=principal,
        months_remaining=term_months,
    )


def accrued_interest(loan: Loan) -> Cents:
    return round_cents(loan.balance * monthly_rate(loan.annual_rate))


def month_due(loan: Loan) -> Cents:
    """This month's scheduled amount, before any relief-plan add-on.

    Payoff-capped: the last month (or a nearly retired balance) owes exactly
    balance plus interest, so rounding residue lands on the final payment.
    """
    if not loan.active:
        return 0
    interest = accrued_interest(loan)
    payoff = loan.balance + interest
    if loan.months_remaining <= 1:
        return payoff
    return min(loan.scheduled_payment, payoff)


def apply_payment(loan: Loan, amount: Cents, *, payment_paused: bool = False) -> PaymentOutcome:
    """Post one month against the loan and advance the schedule.

    Cash waterfall: this month's scheduled amount first, then arrears, then
    prepayment of principal; anything beyond payoff is refunded. An uncovered
    scheduled shortfall is booked to arrears and (outside a payment pause,
    i.e. forbearance) increments months_delinquent. Clearing arrears resets
    months_delinquent to zero.
    """
    if loan.status in TERMINAL_STATUSES:
        raise ConfigError(f"cannot post a payment to a {loan.status.value} loan")
    if amount < 0:
        raise ConfigError(f"payment amount must be >= 0 cents, got {amount}")

    interest = accrued_interest(loan)
    sched = month_due(loan)

    toward_schedule = min(amount, sched)
    rem = amount - toward_schedule
    toward_arrears = min(rem, loan.arrears)
    rem -= toward_arrears
    # After the scheduled amortization the balance stands at
    # balance + interest - sched; extra cash can retire up to that much.
    room = loan.balance + interest - sched
    prepayment = min(rem, room)
    refund = rem - prepayment

    shortfall = sched - toward_schedule
    had_arrears = loan.arrears > 0 or shortfall > 0

    loan.arrears -= toward_arrears
    loan.arrears += shortfall
    if shortfall > 0 and not payment_paused:
        loan.months_delinquent += 1
    loan.balance = loan.balance + interest - sched - prepayment
    loan.months_remaining = max(0, loan.months_remaining - 1)
    loan.payments_made_total += toward_schedule + toward_arrears + prepayment

    cured = had_arrears and loan.arrears == 0
    if loan.arrears == 0:
        loan.months_delinquent = 0

    if loan.balance == 0 and loan.arrears == 0:
        loan.status = LoanStatus.PAID_OFF
    elif loan.status is LoanStatus.CURRENT and loan.arrears > 0:
        loan.status = LoanStatus.DELINQUENT
    elif loan.status is LoanStatus.DELINQUENT and loan.arrears == 0:
        loan.status = LoanStatus.CURRENT

    return PaymentOutcome(
        interest=interest,
        scheduled_due=sched,
        toward_schedule=toward_schedule,
        toward_arrears=toward_arrears,
        prepayment=prepayment,
        refund=refund,
        shortfall=shortfall,
        cured=cured,
        paid_off=loan.status is LoanStatus.PAID_OFF,
    )


def liquidity_component(housing_due: Cents, income: Cents) -> float:
    """Share of income left after the housing obligation, in [0, 1].

    Zero or negative income means no slack at all, not a division blow-up.
    """
    if income <= 0:
        return 0.0
    return 1.0 - min(1.0, housing_due / income)


def equity_component(loan: Loan, denominator: str = "scheduled_total") -> float:
    """Fraction of the loan the borrower has paid, in [0, 1].

    scheduled_total: cash paid over the contract's total scheduled value,
    scheduled_payment * term_months. The denominator is fixed between
    contract changes, so only actual cash moves E. A modification re-anchors
    it to the recast payment and stretched term; the stretch inflates the
    denominator, which is what makes a modification expensive in equity
    terms even though the monthly payment falls.

    principal: cash paid over original principal, capped at 1. A cruder
    yardstick kept as a sensitivity knob.
    """
    paid = loan.payments_made_total
    if loan.status is LoanStatus.FORECLOSED:
        return 0.0
    if denominator == "principal":
        return min(1.0, paid / loan.original_principal)
    if denominator != "scheduled_total":
        raise ConfigError(f"unknown equity denominator {denominator!r}")
    total = loan.scheduled_payment * loan.term_months
    if total <= 0:
        return 1.0 if loan.status is LoanStatus.PAID_OFF else 0.0
    # Cash above the anchored schedule (cured arrears interest) caps at 1.
    return min(1.0, paid / total)


def utility(gamma: float, liquidity: float, equity: float, h: float) -> float:
    """Monthly borrower utility: gamma * L + (1 - gamma) * h * E."""
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must be in [0, 1], got {gamma}")
    if not 0.0 <= liquidity <= 1.0:
        raise ConfigError(f"liquidity must be in [0, 1], got {liquidity}")
    if not 0.0 <= equity <= 1.0:
        raise ConfigError(f"equity must be in [0, 1], got {equity}")
    if h < 0.0:
        raise ConfigError(f"house price index must be >= 0, got {h}")
    return gamma * liquidity + (1.0 - gamma) * h * equity
