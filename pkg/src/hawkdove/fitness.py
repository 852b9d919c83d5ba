"""Multi-criteria fitness of a trade matrix.

score = (alpha*payoff + beta*stable + gamma*bonus - delta*penalty) / f_max
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .domain import Scenario, SurplusFloorPolicy, settle, stable_mask
from .genome import adjust

#: Top tier of the stability bonus, as a fraction of n.
BONUS_MAX = 0.5


@dataclass(frozen=True)
class FitnessWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    w4: float = 1.0
    mu: float = 0.8
    n_max: int = 3
    payoff_stable: float = 2.5
    payoff_other: float = 1.2
    payoff_keyed_to: str = "buyer"

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "w1", "w2", "w3", "w4", "payoff_other"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= self.mu <= 1:
            raise ValueError("mu must lie in [0, 1]")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.payoff_stable < self.payoff_other:
            raise ValueError("payoff_stable must be >= payoff_other")
        if self.payoff_keyed_to not in ("buyer", "seller"):
            raise ValueError("payoff_keyed_to must be 'buyer' or 'seller'")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FitnessBreakdown:
    payoff: float
    stable_count: int
    bonus: float
    p_stability: float
    p_strategy: float
    p_no_cycles: float
    p_overhead: float
    p_total: float
    f_max: float
    score: float

    def to_dict(self) -> dict:
        return asdict(self)


def payoff(scenario: Scenario, adjusted: np.ndarray, finals: np.ndarray, weights: FitnessWeights) -> float:
    """Traded energy, each unit priced by whether the buyer (or seller) ends stable."""
    stable = stable_mask(scenario, finals)
    coeff = np.where(stable, weights.payoff_stable, weights.payoff_other)
    if weights.payoff_keyed_to == "buyer":
        flow = np.where(scenario.buyer_flag, adjusted.sum(axis=0), 0.0)
    else:
        flow = np.where(scenario.seller_flag, adjusted.sum(axis=1), 0.0)
    return float(flow @ coeff)


def stability_bonus(stable_count: int, n: int) -> float:
    # integer comparisons keep the tier edges exact
    if 10 * stable_count >= 9 * n:
        return 0.5 * n
    if 10 * stable_count >= 8 * n:
        return 0.3 * n
    if 10 * stable_count >= 7 * n:
        return 0.1 * n
    return 0.0


def penalty_stability(scenario: Scenario, finals: np.ndarray) -> float:
    centre = (scenario.bt + scenario.st) / 2
    dev = np.abs(finals - centre) / scenario.capacity
    return float(np.where(stable_mask(scenario, finals), 0.0, dev).sum())


def penalty_strategy(scenario: Scenario, adjusted: np.ndarray, weights: FitnessWeights | None = None) -> float:
    """Dove sellers dealing with more than ``n_max`` distinct buyers."""
    n_max = (weights or FitnessWeights()).n_max
    if scenario.doves.size == 0:
        return 0.0
    partners = (adjusted[scenario.doves] > 0).sum(axis=1)
    excess = np.maximum(partners - n_max, 0)
    return float(excess.sum() / n_max)


def cycles_consumed(scenario: Scenario, adjusted: np.ndarray) -> np.ndarray:
    """Equivalent full cycles discharged by each seller (zero for the rest)."""
    sold = np.where(scenario.seller_flag, adjusted.sum(axis=1), 0.0)
    return sold / scenario.capacity


def penalty_cycles(scenario: Scenario, adjusted: np.ndarray) -> float:
    return float((cycles_consumed(scenario, adjusted) / scenario.cycles_max).sum())


def penalty_overhead(scenario: Scenario, adjusted: np.ndarray, weights: FitnessWeights | None = None) -> float:
    mu = (weights or FitnessWeights()).mu
    total = adjusted.sum(axis=1) + adjusted.sum(axis=0)
    over = total > mu * scenario.line_limit
    return float(np.where(over, total / scenario.line_limit, 0.0).sum())


def f_max(scenario: Scenario, weights: FitnessWeights) -> float:
    n = scenario.n
    if n == 0:
        raise ValueError("f_max undefined for an empty community")
    return (
        weights.alpha * n * scenario.thv * weights.payoff_stable
        + weights.beta * n
        + weights.gamma * BONUS_MAX * n
    )


def evaluate_adjusted(scenario: Scenario, adjusted: np.ndarray, weights: FitnessWeights) -> FitnessBreakdown:
    """Breakdown for a matrix that has already been through :func:`adjust`."""
    finals = settle(scenario, adjusted)
    stable = int(stable_mask(scenario, finals).sum())
    pay = payoff(scenario, adjusted, finals, weights)
    bonus = stability_bonus(stable, scenario.n)
    p_stab = penalty_stability(scenario, finals)
    p_strat = penalty_strategy(scenario, adjusted, weights)
    p_cyc = penalty_cycles(scenario, adjusted)
    p_over = penalty_overhead(scenario, adjusted, weights)
    p_total = weights.w1 * p_stab + weights.w2 * p_strat + weights.w3 * p_cyc + weights.w4 * p_over
    fm = f_max(scenario, weights)
    score = (weights.alpha * pay + weights.beta * stable + weights.gamma * bonus - weights.delta * p_total) / fm
    return FitnessBreakdown(
        payoff=pay,
        stable_count=stable,
        bonus=bonus,
        p_stability=p_stab,
        p_strategy=p_strat,
        p_no_cycles=p_cyc,
        p_overhead=p_over,
        p_total=p_total,
        f_max=fm,
        score=score,
    )


def evaluate(
    scenario: Scenario,
    trades: np.ndarray,
    weights: FitnessWeights | None = None,
    policy: SurplusFloorPolicy = SurplusFloorPolicy.BUY_THRESHOLD,
) -> FitnessBreakdown:
    """Adjust ``trades``, settle them and score the result."""
    weights = weights or FitnessWeights()
    return evaluate_adjusted(scenario, adjust(scenario, trades, policy), weights)
