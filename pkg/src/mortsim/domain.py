"""Shared kernel: exact money arithmetic, rates, quintiles, and the clock.

All ledger quantities in the simulator are integer cents (``Cents``). Floats
appear only inside closed-form pricing and utility math; anything that lands
on a ledger is rounded half-even at the boundary and stays an int thereafter.
"""

from __future__ import annotations

import enum
import math
import zlib
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN

import numpy as np

# Money is a signed fixed-point amount in cents. Plain ints keep arithmetic
# exact, associative, and cheap in the monthly loop.
Cents = int

# Rates are float fractions; the period is part of the name (annual_rate,
# monthly_fee_rate), never implied.
Rate = float

QUINTILES = (1, 2, 3, 4, 5)

_MAX_ABS_DOLLARS = Decimal(10) ** 12
_CENT = Decimal("0.01")


class ConfigError(ValueError):
    """A configuration value is out of contract."""


class LedgerError(RuntimeError):
    """An exact-cents accounting identity failed; always a bug, never data."""


class Phase(enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass(slots=True)
class SimClock:
    """Month index within the current phase. Month 0 is the first step."""

    month: int = 0
    phase: Phase = Phase.EVAL

    def tick(self) -> None:
        self.month += 1


def money_from_dollars(dollars: float | int | str | Decimal) -> Cents:
    """Convert a dollar amount to cents, rounding half-even.

    Accepts ints, floats, numeric strings, and Decimals. Floats go through
    their shortest decimal repr so 0.1 means a dime, not its binary neighbor.
    """
    if isinstance(dollars, bool):
        raise ConfigError("money amount must be a number, got bool")
    try:
        if isinstance(dollars, float):
            if math.isnan(dollars) or math.isinf(dollars):
                raise ConfigError(f"money amount must be finite, got {dollars!r}")
            dec = Decimal(repr(dollars))
        else:
            dec = Decimal(dollars)
    except (InvalidOperation, ValueError, TypeError) as exc:
        raise ConfigError(f"not a money amount: {dollars!r}") from exc
    if not dec.is_finite():
        raise ConfigError(f"money amount must be finite, got {dollars!r}")
    if abs(dec) > _MAX_ABS_DOLLARS:
        raise ConfigError(f"money amount out of range: {dollars!r}")
    return int(dec.quantize(_CENT, rounding=ROUND_HALF_EVEN) * 100)


def round_cents(amount: float) -> Cents:
    """Round a float cent amount to an int, half to even.

    Used at every float-to-ledger boundary (interest accrual, fees). Python's
    round() is banker's rounding, which is exactly the contract.
    """
    return int(round(amount))


def dollars(cents: Cents) -> float:
    """Float dollars for display and plotting only; never fed back in."""
    return cents / 100.0


def format_money(cents: Cents) -> str:
    """Exact decimal string for a cent amount, e.g. -123456 -> '-1234.56'."""
    sign = "-" if cents < 0 else ""
    mag = abs(cents)
    return f"{sign}{mag // 100}.{mag % 100:02d}"


def monthly_rate(annual_rate: Rate) -> float:
    """Nominal annual rate to the monthly rate used in amortization."""
    return annual_rate / 12.0


def substream(seed: int, *names: object) -> np.random.Generator:
    """Named RNG substream derived from the run seed.

    Every random draw in a run flows from (seed, name...) so that worlds are
    replayable and populations can be paired across scenario cells. Names are
    hashed with crc32 (stable across processes, unlike hash()).
    """
    entropy = [seed & 0xFFFFFFFF] + [
        zlib.crc32(str(name).encode("utf-8")) for name in names
    ]
    return np.random.default_rng(np.random.SeedSequence(entropy))
