"""Mortgage reserve accounts: earmarked cash that auto-covers shortfalls.

Two funding variants of the same account. "upfront" seeds every borrower
with the same grant at evaluation start; "matched" lets each borrower
commit savings from a fixed menu during a one-month enrollment window, and
the servicer matches the contribution. Either way the account pays out
automatically toward any gap in the month's housing due before the miss is
booked, and does nothing else: it is not withdrawable cash.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import Cents, ConfigError, round_cents

PRODUCT_KINDS = ("none", "upfront", "matched")


@dataclass(slots=True)
class ProductConfig:
    kind: str = "none"
    upfront_amount: Cents = 0
    match_rate: float = 1.0
    enroll_menu: tuple[Cents, ...] = (50_000, 100_000, 250_000, 500_000)

    @property
    def enabled(self) -> bool:
        if self.kind == "upfront":
            return self.upfront_amount > 0
        if self.kind == "matched":
            return bool(self.enroll_menu)
        return False


def validate_product_config(config: ProductConfig) -> list[str]:
    problems = []
    if config.kind not in PRODUCT_KINDS:
        problems.append(f"kind {config.kind!r} not one of {PRODUCT_KINDS}")
    if config.upfront_amount < 0:
        problems.append("upfront_amount must be >= 0")
    if config.match_rate < 0.0:
        problems.append("match_rate must be >= 0")
    if any(m <= 0 for m in config.enroll_menu):
        problems.append("enroll_menu amounts must be positive")
    if list(config.enroll_menu) != sorted(config.enroll_menu):
        problems.append("enroll_menu must be sorted ascending")
    return problems


@dataclass(slots=True)
class ReserveAccount:
    balance: Cents = 0
    contributed: Cents = 0   # borrower's own savings put in
    matched: Cents = 0       # servicer match added on top
    granted: Cents = 0       # external grant (upfront variant)
    drawn: Cents = 0

    def check(self) -> None:
        assert self.balance >= 0
        assert self.contributed + self.matched + self.granted == self.balance + self.drawn


def upfront_account(amount: Cents) -> ReserveAccount:
    if amount < 0:
        raise ConfigError(f"grant must be >= 0 cents, got {amount}")
    return ReserveAccount(balance=amount, granted=amount)


def enroll_matched(contribution: Cents, match_rate: float = 1.0) -> ReserveAccount:
    if contribution <= 0:
        raise ConfigError(f"contribution must be positive, got {contribution}")
    if match_rate < 0.0:
        raise ConfigError(f"match rate must be >= 0, got {match_rate}")
    match = round_cents(match_rate * contribution)
    return ReserveAccount(
        balance=contribution + match, contributed=contribution, matched=match
    )


def draw(account: ReserveAccount, shortfall: Cents) -> Cents:
    """Pay out toward an uncovered due; returns the cash released."""
    if shortfall < 0:
        raise ConfigError(f"shortfall must be >= 0 cents, got {shortfall}")
    amount = min(account.balance, shortfall)
    account.balance -= amount
    account.drawn += amount
    return amount
