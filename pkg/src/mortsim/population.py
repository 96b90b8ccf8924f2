"""Synthetic borrower population.

Households are sampled income-first from piecewise-linear quantile tables,
then every conditional attribute (payment burden, other spending, liquid
savings) is drawn from the range attached to the income's distribution
bucket. The mortgage is back-solved so the scheduled payment matches the
drawn payment-to-income ratio, then aged by replaying scheduled payments
through the real ledger so starting balances and equity are consistent.

The shipped tables are a stylized illustrative distribution, not census or
survey data. Swap in your own via the population section of the scenario
config.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import Cents, ConfigError, money_from_dollars, round_cents
from .finance import Loan, apply_payment, month_due, new_loan, principal_for_payment

BUCKETS = (1, 2, 3, 4, 5)

# (quantile, monthly dollars) knots; inverse-CDF sampled.
_INCOME_QUANTILES = (
    (0.00, 1_800.0),
    (0.10, 2_600.0),
    (0.25, 3_600.0),
    (0.40, 4_600.0),
    (0.50, 5_200.0),
    (0.60, 5_900.0),
    (0.75, 7_200.0),
    (0.90, 9_800.0),
    (0.97, 14_000.0),
    (1.00, 20_000.0),
)

# Payment-to-income ranges by income bucket: heavier burden down-bucket.
_PAYMENT_RATIO = {
    1: (0.32, 0.46),
    2: (0.28, 0.42),
    3: (0.24, 0.38),
    4: (0.20, 0.33),
    5: (0.16, 0.28),
}

# Non-housing spending as a share of income.
_EXPENSE_RATIO = {
    1: (0.42, 0.54),
    2: (0.40, 0.53),
    3: (0.38, 0.52),
    4: (0.36, 0.51),
    5: (0.34, 0.50),
}

# Liquid savings quantile tables (dollars) by income bucket.
_SAVINGS_QUANTILES = {
    1: ((0.0, 0.0), (0.25, 400.0), (0.5, 1_200.0), (0.75, 2_800.0), (0.9, 4_200.0), (1.0, 6_000.0)),
    2: ((0.0, 0.0), (0.25, 900.0), (0.5, 2_400.0), (0.75, 5_200.0), (0.9, 8_000.0), (1.0, 12_000.0)),
    3: ((0.0, 200.0), (0.25, 1_800.0), (0.5, 4_500.0), (0.75, 9_000.0), (0.9, 14_000.0), (1.0, 24_000.0)),
    4: ((0.0, 600.0), (0.25, 3_500.0), (0.5, 8_000.0), (0.75, 16_000.0), (0.9, 26_000.0), (1.0, 48_000.0)),
    5: ((0.0, 4_000.0), (0.25, 9_000.0), (0.5, 18_000.0), (0.75, 34_000.0), (0.9, 56_000.0), (1.0, 90_000.0)),
}


@dataclass
class DistributionConfig:
    income_quantiles: tuple[tuple[float, float], ...] = _INCOME_QUANTILES
    payment_ratio: dict[int, tuple[float, float]] = field(
        default_factory=lambda: dict(_PAYMENT_RATIO)
    )
    expense_ratio: dict[int, tuple[float, float]] = field(
        default_factory=lambda: dict(_EXPENSE_RATIO)
    )
    savings_quantiles: dict[int, tuple[tuple[float, float], ...]] = field(
        default_factory=lambda: dict(_SAVINGS_QUANTILES)
    )
    gamma_beta: tuple[float, float] = (2.0, 2.0)
    rate_range: tuple[float, float] = (0.028, 0.070)
    term_choices: tuple[tuple[int, float], ...] = ((360, 0.80), (180, 0.15), (240, 0.05))
    max_age_fraction: float = 0.5


def default_distribution() -> DistributionConfig:
    return DistributionConfig()


@dataclass(slots=True)
class BorrowerProfile:
    id: int
    monthly_income: Cents
    nonhousing_expense: Cents
    savings: Cents
    gamma: float
    bucket: int           # income bucket under the configured distribution
    quintile: int         # realized rank quintile within the drawn sample
    payment_ratio: float  # drawn target; realized ratio differs by < a cent
    loan: Loan

    @property
    def housing_expense(self) -> Cents:
        return self.loan.scheduled_payment


def _check_quantile_table(name: str, table, problems: list[str]) -> None:
    qs = [q for q, _ in table]
    vs = [v for _, v in table]
    if len(table) < 2:
        problems.append(f"{name}: needs at least two knots")
        return
    if qs[0] != 0.0 or qs[-1] != 1.0:
        problems.append(f"{name}: quantile knots must span 0.0 to 1.0")
    if any(b <= a for a, b in zip(qs, qs[1:])):
        problems.append(f"{name}: quantile knots must be strictly increasing")
    if any(b < a for a, b in zip(vs, vs[1:])):
        problems.append(f"{name}: values must be non-decreasing")
    if any(v < 0 for v in vs):
        problems.append(f"{name}: values must be non-negative")


def _check_ratio_ranges(name: str, ranges, problems: list[str]) -> None:
    if sorted(ranges) != list(BUCKETS):
        problems.append(f"{name}: must define exactly buckets 1..5")
        return
    for b in BUCKETS:
        lo, hi = ranges[b]
        if not (0.0 < lo <= hi < 1.0):
            problems.append(f"{name}[{b}]: range ({lo}, {hi}) not inside (0, 1)")


def validate_distribution(config: DistributionConfig) -> list[str]:
    """Return a list of human-readable violations; empty means usable."""
    problems: list[str] = []
    _check_quantile_table("income_quantiles", config.income_quantiles, problems)
    _check_ratio_ranges("payment_ratio", config.payment_ratio, problems)
    _check_ratio_ranges("expense_ratio", config.expense_ratio, problems)
    if sorted(config.savings_quantiles) != list(BUCKETS):
        problems.append("savings_quantiles: must define exactly buckets 1..5")
    else:
        for b in BUCKETS:
            _check_quantile_table(
                f"savings_quantiles[{b}]", config.savings_quantiles[b], problems
            )
    a, b = config.gamma_beta
    if a <= 0 or b <= 0:
        problems.append(f"gamma_beta: parameters must be positive, got ({a}, {b})")
    lo, hi = config.rate_range
    if not (0.0 < lo <= hi <= 0.25):
        problems.append(f"rate_range: ({lo}, {hi}) not inside (0, 0.25]")
    if not config.term_choices:
        problems.append("term_choices: must not be empty")
    else:
        for months, weight in config.term_choices:
            if not (isinstance(months, int) and months >= 12):
                problems.append(f"term_choices: term {months!r} must be an int >= 12")
            if weight <= 0:
                problems.append(f"term_choices: weight for {months} must be positive")
    if not 0.0 <= config.max_age_fraction < 1.0:
        problems.append(f"max_age_fraction: {config.max_age_fraction} not in [0, 1)")
    return problems


def _inverse_cdf(table, u: np.ndarray) -> np.ndarray:
    qs = np.array([q for q, _ in table])
    vs = np.array([v for _, v in table])
    return np.interp(u, qs, vs)


def income_bucket_cutoffs(config: DistributionConfig) -> list[Cents]:
    """Bucket boundaries in cents at the 20/40/60/80 points of the income law."""
    cuts = _inverse_cdf(config.income_quantiles, np.array([0.2, 0.4, 0.6, 0.8]))
    return [money_from_dollars(float(c)) for c in cuts]


def _bucket_of(income: Cents, cutoffs: list[Cents]) -> int:
    for k, cut in enumerate(cutoffs):
        if income < cut:
            return k + 1
    return 5


def sample_population(
    config: DistributionConfig, n: int, rng: np.random.Generator
) -> list[BorrowerProfile]:
    """Draw n households; deterministic for a given generator state."""
    if n <= 0:
        raise ConfigError(f"population size must be positive, got {n}")
    problems = validate_distribution(config)
    if problems:
        raise ConfigError("bad population distribution: " + "; ".join(problems))

    # One vectorized draw per field keeps the stream layout stable.
    u_income = rng.random(n)
    u_payment = rng.random(n)
    u_expense = rng.random(n)
    u_savings = rng.random(n)
    gammas = rng.beta(*config.gamma_beta, size=n)
    u_rate = rng.random(n)
    weights = np.array([w for _, w in config.term_choices], dtype=float)
    term_idx = rng.choice(len(config.term_choices), size=n, p=weights / weights.sum())
    u_age = rng.random(n)

    incomes_dollars = _inverse_cdf(config.income_quantiles, u_income)
    incomes = [money_from_dollars(float(d)) for d in incomes_dollars]
    cutoffs = income_bucket_cutoffs(config)

    rate_lo, rate_hi = config.rate_range
    profiles: list[BorrowerProfile] = []
    for i in range(n):
        income = incomes[i]
        bucket = _bucket_of(income, cutoffs)

        lo, hi = config.payment_ratio[bucket]
        payment_ratio = lo + (hi - lo) * float(u_payment[i])
        target_payment = round_cents(payment_ratio * income)

        lo, hi = config.expense_ratio[bucket]
        nonhousing = round_cents((lo + (hi - lo) * float(u_expense[i])) * income)

        savings_dollars = float(
            _inverse_cdf(config.savings_quantiles[bucket], u_savings[i : i + 1])[0]
        )
        savings = money_from_dollars(savings_dollars)

        rate = rate_lo + (rate_hi - rate_lo) * float(u_rate[i])
        term = config.term_choices[int(term_idx[i])][0]
        principal = principal_for_payment(target_payment, rate, term)
        loan = new_loan(principal, rate, term)

        max_age = int(config.max_age_fraction * term)
        age = int(u_age[i] * (max_age + 1))
        for _ in range(min(age, max_age)):
            apply_payment(loan, month_due(loan))

        profiles.append(
            BorrowerProfile(
                id=i,
                monthly_income=income,
                nonhousing_expense=nonhousing,
                savings=savings,
                gamma=float(gammas[i]),
                bucket=bucket,
                quintile=0,
                payment_ratio=payment_ratio,
                loan=loan,
            )
        )

    # Realized quintiles: rank the drawn incomes, ties broken by id.
    order = sorted(range(n), key=lambda i: (profiles[i].monthly_income, i))
    for rank, i in enumerate(order):
        profiles[i].quintile = rank * 5 // n + 1
    return profiles
