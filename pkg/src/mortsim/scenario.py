"""Scenario configuration: schema, YAML loading, overrides, digests.

A scenario is one fully-specified experiment: population law, servicer
terms, relief product, training regimen, and the evaluation cell. Money
appears in config files in dollars and is converted to integer cents at
parse time; everything downstream is cents.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import yaml

from .domain import ConfigError, dollars, money_from_dollars
from .economy import EvalShockSpec, HpiPath, TrainShockProcess, HPI_PATHS, SHOCK_DIRECTIONS
from .population import DistributionConfig, default_distribution, validate_distribution
from .products import ProductConfig, validate_product_config
from .servicing import ServicerConfig, validate_servicer_config

LEARNER_KINDS = ("tabular_q", "scripted:prudent", "scripted:decliner", "scripted:distressed")
LEARNER_SCOPES = ("quintile", "global", "individual")
EQUITY_DENOMINATORS = ("scheduled_total", "principal")


@dataclass
class LearningConfig:
    kind: str = "tabular_q"
    scope: str = "quintile"
    alpha: float = 0.1
    # Without decay the step size sets a permanent noise floor on each
    # cell, and heavily-visited states keep wandering by more than the
    # pay-versus-miss value gap there. Decay on visit count converges
    # the busy cells while fresh ones still move at full speed.
    alpha_decay_visits: int = 1000
    discount: float = 0.96
    epsilon_start: float = 0.25
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.8  # of total training months
    # Table cells start at zero: values grow from below as paths are
    # actually experienced, so a thinly visited detour can never outrank
    # the well-trodden healthy loop mid-training. Unseen rows bootstrap
    # this same value.
    q_init: float = 0.0
    # Transitions close n decision points downstream. Left at 1 because a
    # longer lookahead folds the behavior policy's follow-up choices into
    # the target: in a state temporarily locked on the wrong action, the
    # alternatives inherit that action's returns and the lock deepens. A
    # 1-step target always prices the best known continuation instead.
    n_step: int = 1
    # Width of the indifference zone in the greedy argmax: options whose
    # values sit within this band of the best resolve to the lowest action
    # index, i.e. toward honoring the contract. Households overwhelmingly
    # keep paying when the ledger difference is marginal; skipping needs a
    # clear win, not a noise-sized one.
    tie_margin: float = 1.0
    equity_denominator: str = "scheduled_total"


@dataclass
class TrainingConfig:
    episodes: int = 12
    months: int = 120
    n_borrowers: int = 500
    shock: TrainShockProcess = field(default_factory=TrainShockProcess)
    hpi: HpiPath = field(default_factory=HpiPath)


@dataclass
class EvaluationConfig:
    months: int = 24
    n_borrowers: int = 1000
    shock_month: int = 1
    shock_size: float = 0.3
    shock_direction: str = "reduce"
    shock_coverage: float = 1.0
    shock_duration_months: int | None = None
    hpi: HpiPath = field(default_factory=HpiPath)

    def shock_spec(self, size: float | None = None) -> EvalShockSpec:
        return EvalShockSpec(
            month=self.shock_month,
            size=self.shock_size if size is None else size,
            direction=self.shock_direction,
            coverage=self.shock_coverage,
            duration_months=self.shock_duration_months,
        )


@dataclass
class ScenarioConfig:
    name: str = "baseline"
    seed: int = 1
    population: DistributionConfig = field(default_factory=default_distribution)
    servicer: ServicerConfig = field(default_factory=ServicerConfig)
    product: ProductConfig = field(default_factory=ProductConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    learning: LearningConfig = field(default_factory=LearningConfig)


def default_scenario() -> ScenarioConfig:
    return ScenarioConfig()


# ---------------------------------------------------------------------------
# dict <-> dataclass plumbing

def _hpi_to_dict(hpi: HpiPath) -> dict:
    return {"kind": hpi.kind, "level": hpi.level, "drift": hpi.drift, "vol": hpi.vol}


def _hpi_from_dict(d: dict, where: str) -> HpiPath:
    _reject_unknown(d, ("kind", "level", "drift", "vol"), where)
    return HpiPath(
        kind=str(d.get("kind", "constant")),
        level=float(d.get("level", 1.0)),
        drift=float(d.get("drift", 0.0)),
        vol=float(d.get("vol", 0.0)),
    )


def _reject_unknown(d: dict, known: tuple, where: str) -> None:
    for key in d:
        if key not in known:
            raise ConfigError(f"unknown config key {where}.{key}")


def scenario_to_dict(s: ScenarioConfig) -> dict:
    """Plain nested dict with YAML-safe types; money back in dollars."""
    return {
        "name": s.name,
        "seed": s.seed,
        "population": {
            "income_quantiles": [[q, v] for q, v in s.population.income_quantiles],
            "payment_ratio": {b: list(r) for b, r in sorted(s.population.payment_ratio.items())},
            "expense_ratio": {b: list(r) for b, r in sorted(s.population.expense_ratio.items())},
            "savings_quantiles": {
                b: [[q, v] for q, v in t] for b, t in sorted(s.population.savings_quantiles.items())
            },
            "gamma_beta": list(s.population.gamma_beta),
            "rate_range": list(s.population.rate_range),
            "term_choices": [[m, w] for m, w in s.population.term_choices],
            "max_age_fraction": s.population.max_age_fraction,
        },
        "servicer": {
            "monthly_fee_rate": s.servicer.monthly_fee_rate,
            "advance_cap_payments": s.servicer.advance_cap_payments,
            "incentive_repayment": dollars(s.servicer.incentive_repayment),
            "incentive_forbearance": dollars(s.servicer.incentive_forbearance),
            "incentive_modification": dollars(s.servicer.incentive_modification),
            "foreclosure_trigger_months": s.servicer.foreclosure_trigger_months,
            "repayment_spread_months": s.servicer.repayment_spread_months,
            "forbearance_max_months": s.servicer.forbearance_max_months,
            "modification_term_extension_months": s.servicer.modification_term_extension_months,
        },
        "product": {
            "kind": s.product.kind,
            "upfront_amount": dollars(s.product.upfront_amount),
            "match_rate": s.product.match_rate,
            "enroll_menu": [dollars(m) for m in s.product.enroll_menu],
        },
        "training": {
            "episodes": s.training.episodes,
            "months": s.training.months,
            "n_borrowers": s.training.n_borrowers,
            "shock": {
                "monthly_prob": s.training.shock.monthly_prob,
                "size_lo": s.training.shock.size_lo,
                "size_hi": s.training.shock.size_hi,
                "directions": list(s.training.shock.directions),
                "duration_months": s.training.shock.duration_months,
            },
            "hpi": _hpi_to_dict(s.training.hpi),
        },
        "evaluation": {
            "months": s.evaluation.months,
            "n_borrowers": s.evaluation.n_borrowers,
            "shock_month": s.evaluation.shock_month,
            "shock_size": s.evaluation.shock_size,
            "shock_direction": s.evaluation.shock_direction,
            "shock_coverage": s.evaluation.shock_coverage,
            "shock_duration_months": s.evaluation.shock_duration_months,
            "hpi": _hpi_to_dict(s.evaluation.hpi),
        },
        "learning": {
            "kind": s.learning.kind,
            "scope": s.learning.scope,
            "alpha": s.learning.alpha,
            "alpha_decay_visits": s.learning.alpha_decay_visits,
            "discount": s.learning.discount,
            "epsilon_start": s.learning.epsilon_start,
            "epsilon_end": s.learning.epsilon_end,
            "epsilon_decay_fraction": s.learning.epsilon_decay_fraction,
            "q_init": s.learning.q_init,
            "n_step": s.learning.n_step,
            "tie_margin": s.learning.tie_margin,
            "equity_denominator": s.learning.equity_denominator,
        },
    }


def _population_from_dict(d: dict) -> DistributionConfig:
    base = default_distribution()
    known = (
        "income_quantiles",
        "payment_ratio",
        "expense_ratio",
        "savings_quantiles",
        "gamma_beta",
        "rate_range",
        "term_choices",
        "max_age_fraction",
    )
    _reject_unknown(d, known, "population")
    if "income_quantiles" in d:
        base.income_quantiles = tuple((float(q), float(v)) for q, v in d["income_quantiles"])
    if "payment_ratio" in d:
        base.payment_ratio = {
            int(b): (float(r[0]), float(r[1])) for b, r in d["payment_ratio"].items()
        }
    if "expense_ratio" in d:
        base.expense_ratio = {
            int(b): (float(r[0]), float(r[1])) for b, r in d["expense_ratio"].items()
        }
    if "savings_quantiles" in d:
        base.savings_quantiles = {
            int(b): tuple((float(q), float(v)) for q, v in t)
            for b, t in d["savings_quantiles"].items()
        }
    if "gamma_beta" in d:
        base.gamma_beta = (float(d["gamma_beta"][0]), float(d["gamma_beta"][1]))
    if "rate_range" in d:
        base.rate_range = (float(d["rate_range"][0]), float(d["rate_range"][1]))
    if "term_choices" in d:
        base.term_choices = tuple((int(m), float(w)) for m, w in d["term_choices"])
    if "max_age_fraction" in d:
        base.max_age_fraction = float(d["max_age_fraction"])
    return base


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build a scenario from a nested dict, filling defaults, rejecting junk."""
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a mapping")
    _reject_unknown(
        data,
        ("name", "seed", "population", "servicer", "product", "training", "evaluation", "learning"),
        "scenario",
    )
    s = default_scenario()
    s.name = str(data.get("name", s.name))
    s.seed = int(data.get("seed", s.seed))

    if "population" in data:
        s.population = _population_from_dict(data["population"] or {})

    sv = data.get("servicer") or {}
    known = (
        "monthly_fee_rate",
        "advance_cap_payments",
        "incentive_repayment",
        "incentive_forbearance",
        "incentive_modification",
        "foreclosure_trigger_months",
        "repayment_spread_months",
        "forbearance_max_months",
        "modification_term_extension_months",
    )
    _reject_unknown(sv, known, "servicer")
    cfg = s.servicer
    if "monthly_fee_rate" in sv:
        cfg.monthly_fee_rate = float(sv["monthly_fee_rate"])
    if "advance_cap_payments" in sv:
        cfg.advance_cap_payments = int(sv["advance_cap_payments"])
    for name in ("incentive_repayment", "incentive_forbearance", "incentive_modification"):
        if name in sv:
            setattr(cfg, name, money_from_dollars(sv[name]))
    for name in (
        "foreclosure_trigger_months",
        "repayment_spread_months",
        "forbearance_max_months",
        "modification_term_extension_months",
    ):
        if name in sv:
            setattr(cfg, name, int(sv[name]))

    pr = data.get("product") or {}
    _reject_unknown(pr, ("kind", "upfront_amount", "match_rate", "enroll_menu"), "product")
    if "kind" in pr:
        s.product.kind = str(pr["kind"])
    if "upfront_amount" in pr:
        s.product.upfront_amount = money_from_dollars(pr["upfront_amount"])
    if "match_rate" in pr:
        s.product.match_rate = float(pr["match_rate"])
    if "enroll_menu" in pr:
        s.product.enroll_menu = tuple(money_from_dollars(m) for m in pr["enroll_menu"])

    tr = data.get("training") or {}
    _reject_unknown(tr, ("episodes", "months", "n_borrowers", "shock", "hpi"), "training")
    if "episodes" in tr:
        s.training.episodes = int(tr["episodes"])
    if "months" in tr:
        s.training.months = int(tr["months"])
    if "n_borrowers" in tr:
        s.training.n_borrowers = int(tr["n_borrowers"])
    if "shock" in tr:
        sh = tr["shock"] or {}
        _reject_unknown(
            sh,
            ("monthly_prob", "size_lo", "size_hi", "directions", "duration_months"),
            "training.shock",
        )
        proc = s.training.shock
        if "monthly_prob" in sh:
            proc.monthly_prob = float(sh["monthly_prob"])
        if "size_lo" in sh:
            proc.size_lo = float(sh["size_lo"])
        if "size_hi" in sh:
            proc.size_hi = float(sh["size_hi"])
        if "directions" in sh:
            proc.directions = tuple(str(x) for x in sh["directions"])
        if "duration_months" in sh:
            proc.duration_months = (
                None if sh["duration_months"] is None else int(sh["duration_months"])
            )
    if "hpi" in tr:
        s.training.hpi = _hpi_from_dict(tr["hpi"] or {}, "training.hpi")

    ev = data.get("evaluation") or {}
    known = (
        "months",
        "n_borrowers",
        "shock_month",
        "shock_size",
        "shock_direction",
        "shock_coverage",
        "shock_duration_months",
        "hpi",
    )
    _reject_unknown(ev, known, "evaluation")
    if "months" in ev:
        s.evaluation.months = int(ev["months"])
    if "n_borrowers" in ev:
        s.evaluation.n_borrowers = int(ev["n_borrowers"])
    if "shock_month" in ev:
        s.evaluation.shock_month = int(ev["shock_month"])
    if "shock_size" in ev:
        s.evaluation.shock_size = float(ev["shock_size"])
    if "shock_direction" in ev:
        s.evaluation.shock_direction = str(ev["shock_direction"])
    if "shock_coverage" in ev:
        s.evaluation.shock_coverage = float(ev["shock_coverage"])
    if "shock_duration_months" in ev:
        s.evaluation.shock_duration_months = (
            None if ev["shock_duration_months"] is None else int(ev["shock_duration_months"])
        )
    if "hpi" in ev:
        s.evaluation.hpi = _hpi_from_dict(ev["hpi"] or {}, "evaluation.hpi")

    le = data.get("learning") or {}
    known = (
        "kind",
        "scope",
        "alpha",
        "alpha_decay_visits",
        "discount",
        "epsilon_start",
        "epsilon_end",
        "epsilon_decay_fraction",
        "q_init",
        "n_step",
        "tie_margin",
        "equity_denominator",
    )
    _reject_unknown(le, known, "learning")
    for name in known:
        if name in le:
            value = le[name]
            if name in ("kind", "scope", "equity_denominator"):
                setattr(s.learning, name, str(value))
            elif name in ("alpha_decay_visits", "n_step"):
                setattr(s.learning, name, int(value))
            else:
                setattr(s.learning, name, float(value))
    return s


# ---------------------------------------------------------------------------
# validation

def validate_scenario(s: ScenarioConfig) -> list[str]:
    problems = []
    problems += validate_distribution(s.population)
    problems += validate_servicer_config(s.servicer)
    problems += validate_product_config(s.product)
    if s.seed < 0:
        problems.append("seed must be >= 0")
    if s.training.episodes < 1:
        problems.append("training.episodes must be >= 1")
    if s.training.months < 1:
        problems.append("training.months must be >= 1")
    if s.training.n_borrowers < 5:
        problems.append("training.n_borrowers must be >= 5")
    if not 0.0 <= s.training.shock.monthly_prob <= 1.0:
        problems.append("training.shock.monthly_prob must be in [0, 1]")
    if not 0.0 <= s.training.shock.size_lo <= s.training.shock.size_hi < 1.0:
        problems.append("training.shock sizes must satisfy 0 <= lo <= hi < 1")
    if any(d not in SHOCK_DIRECTIONS for d in s.training.shock.directions):
        problems.append(f"training.shock.directions must be among {SHOCK_DIRECTIONS}")
    for where, hpi in (("training.hpi", s.training.hpi), ("evaluation.hpi", s.evaluation.hpi)):
        if hpi.kind not in HPI_PATHS:
            problems.append(f"{where}.kind {hpi.kind!r} not one of {HPI_PATHS}")
        if hpi.level <= 0:
            problems.append(f"{where}.level must be positive")
    if s.evaluation.months < 1:
        problems.append("evaluation.months must be >= 1")
    if s.evaluation.n_borrowers < 5:
        problems.append("evaluation.n_borrowers must be >= 5")
    if not 0 <= s.evaluation.shock_month < s.evaluation.months:
        problems.append("evaluation.shock_month must fall inside the horizon")
    if not 0.0 <= s.evaluation.shock_size < 1.0:
        problems.append("evaluation.shock_size must be in [0, 1)")
    if s.evaluation.shock_direction not in SHOCK_DIRECTIONS:
        problems.append(f"evaluation.shock_direction must be one of {SHOCK_DIRECTIONS}")
    if not 0.0 <= s.evaluation.shock_coverage <= 1.0:
        problems.append("evaluation.shock_coverage must be in [0, 1]")
    if s.learning.kind not in LEARNER_KINDS:
        problems.append(f"learning.kind {s.learning.kind!r} not one of {LEARNER_KINDS}")
    if s.learning.scope not in LEARNER_SCOPES:
        problems.append(f"learning.scope {s.learning.scope!r} not one of {LEARNER_SCOPES}")
    if not 0.0 < s.learning.alpha <= 1.0:
        problems.append("learning.alpha must be in (0, 1]")
    if s.learning.alpha_decay_visits < 0:
        problems.append("learning.alpha_decay_visits must be >= 0")
    if not 0.0 <= s.learning.discount < 1.0:
        problems.append("learning.discount must be in [0, 1)")
    for name in ("epsilon_start", "epsilon_end"):
        if not 0.0 <= getattr(s.learning, name) <= 1.0:
            problems.append(f"learning.{name} must be in [0, 1]")
    if not 0.0 < s.learning.epsilon_decay_fraction <= 1.0:
        problems.append("learning.epsilon_decay_fraction must be in (0, 1]")
    if s.learning.n_step < 1:
        problems.append("learning.n_step must be >= 1")
    if s.learning.tie_margin < 0.0:
        problems.append("learning.tie_margin must be >= 0")
    if s.learning.equity_denominator not in EQUITY_DENOMINATORS:
        problems.append(
            f"learning.equity_denominator must be one of {EQUITY_DENOMINATORS}"
        )
    return problems


# ---------------------------------------------------------------------------
# files, overrides, digests

def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    return scenario_from_dict(data)


def apply_overrides(s: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    """Apply dotted-path overrides like evaluation.shock_size=0.4.

    Values parse as YAML, so numbers, booleans, nulls, and lists all work.
    """
    data = scenario_to_dict(s)
    for item in overrides:
        path, sep, raw = item.partition("=")
        if not sep or not path:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        keys = path.split(".")
        node = data
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                raise ConfigError(f"override path {path!r} does not exist")
            node = node[key]
        leaf = keys[-1]
        if leaf not in node:
            raise ConfigError(f"override path {path!r} does not exist")
        node[leaf] = yaml.safe_load(raw)
    return scenario_from_dict(data)


def config_digest(s: ScenarioConfig) -> str:
    """Stable content hash of the fully-resolved scenario."""
    canonical = json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def dump_scenario(s: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(s), fh, sort_keys=True)
