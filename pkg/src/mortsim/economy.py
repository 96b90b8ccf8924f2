"""Exogenous economy: house price index path and the income shock process.

The economy never looks at borrower decisions. Training uses a memoryless
per-month Bernoulli arrival (mean one shock a year at the default 1/12);
evaluation applies one deterministic shock to a seeded coverage sample so
scenario cells stay paired across shock sizes and relief products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import ConfigError, round_cents

HPI_PATHS = ("constant", "drift", "walk")
SHOCK_DIRECTIONS = ("reduce", "increase")


@dataclass(slots=True)
class HpiPath:
    kind: str = "constant"
    level: float = 1.0          # starting index, 1.0 = baseline
    drift: float = 0.0          # per-month relative drift
    vol: float = 0.0            # per-month relative shock scale (walk only)


@dataclass(slots=True)
class TrainShockProcess:
    monthly_prob: float = 1.0 / 12.0
    size_lo: float = 0.1
    size_hi: float = 0.5
    directions: tuple[str, ...] = ("reduce", "increase")
    duration_months: int | None = None  # None = permanent level change


@dataclass(slots=True)
class EvalShockSpec:
    month: int = 1
    size: float = 0.3
    direction: str = "reduce"
    coverage: float = 1.0
    duration_months: int | None = None


@dataclass(slots=True)
class IncomeShockEvent:
    borrower_index: int
    multiplier: float           # income scales by this, >= 0
    duration_months: int | None


@dataclass(slots=True)
class EconomyState:
    hpi: HpiPath = field(default_factory=HpiPath)
    h: float = 1.0

    def __post_init__(self) -> None:
        self.h = self.hpi.level


def step_hpi(state: EconomyState, rng: np.random.Generator) -> None:
    """Advance the house price index one month in place.

    The walk uses a multiplicative normal step (no exp/log, so paths replay
    bit-identically across platforms); h is floored well above zero.
    """
    kind = state.hpi.kind
    if kind == "constant":
        return
    if kind == "drift":
        state.h *= 1.0 + state.hpi.drift
    elif kind == "walk":
        z = rng.standard_normal()
        state.h *= 1.0 + state.hpi.drift + state.hpi.vol * z
    else:
        raise ConfigError(f"unknown hpi path {kind!r}")
    state.h = max(state.h, 0.01)


def sample_train_shocks(
    process: TrainShockProcess, n_borrowers: int, rng: np.random.Generator
) -> list[IncomeShockEvent]:
    """One month of random income shocks: independent Bernoulli per borrower."""
    if process.monthly_prob <= 0.0:
        return []
    hits = np.flatnonzero(rng.random(n_borrowers) < process.monthly_prob)
    if hits.size == 0:
        return []
    sizes = rng.uniform(process.size_lo, process.size_hi, hits.size)
    dirs = rng.integers(0, len(process.directions), hits.size)
    events = []
    for idx, size, d in zip(hits.tolist(), sizes.tolist(), dirs.tolist()):
        direction = process.directions[d]
        mult = 1.0 - size if direction == "reduce" else 1.0 + size
        events.append(IncomeShockEvent(idx, mult, process.duration_months))
    return events


def eval_shock_events(
    spec: EvalShockSpec, n_borrowers: int, rng: np.random.Generator
) -> list[IncomeShockEvent]:
    """The deterministic evaluation shock, hitting a seeded coverage sample."""
    if not 0.0 <= spec.coverage <= 1.0:
        raise ConfigError(f"shock coverage must be in [0, 1], got {spec.coverage}")
    if spec.direction not in SHOCK_DIRECTIONS:
        raise ConfigError(f"shock direction must be one of {SHOCK_DIRECTIONS}")
    if spec.direction == "reduce" and not 0.0 <= spec.size <= 1.0:
        raise ConfigError(f"reduction size must be in [0, 1], got {spec.size}")
    if spec.size == 0.0:
        return []
    k = int(round(spec.coverage * n_borrowers))
    if k <= 0:
        return []
    chosen = sorted(rng.choice(n_borrowers, size=k, replace=False).tolist())
    mult = 1.0 - spec.size if spec.direction == "reduce" else 1.0 + spec.size
    return [IncomeShockEvent(i, mult, spec.duration_months) for i in chosen]


def shocked_income(income: int, event: IncomeShockEvent) -> int:
    """New income level in cents after an event; never negative."""
    return max(0, round_cents(income * event.multiplier))
