"""Exhaustive grid search over tiny instances, as a reference optimum for the GA."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .domain import Microgrid, Role, Scenario, SurplusFloorPolicy
from .fitness import FitnessBreakdown, FitnessWeights, evaluate_adjusted
from .genome import adjust, validity_mask


class OracleRefused(ValueError):
    """Instance has more valid positions than the oracle will enumerate."""


@dataclass(frozen=True)
class OracleSpec:
    grid_step: float | None = None  # default THV / 8
    max_cells: int = 6

    def __post_init__(self):
        if self.grid_step is not None and not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        if self.max_cells < 0:
            raise ValueError("max_cells must be non-negative")

    def step_for(self, scenario: Scenario) -> float:
        return self.grid_step if self.grid_step is not None else scenario.thv / 8


def grid_values(thv: float, step: float) -> list[float]:
    """``0, step, 2*step, ...`` up to and including ``thv``."""
    k = int(np.floor(thv / step + 1e-9))
    values = [min(i * step, thv) for i in range(k + 1)]
    if values[-1] < thv:
        values.append(thv)
    return values


def exhaustive_best(
    scenario: Scenario,
    spec: OracleSpec | None = None,
    weights: FitnessWeights | None = None,
    policy: SurplusFloorPolicy = SurplusFloorPolicy.BUY_THRESHOLD,
) -> tuple[np.ndarray, FitnessBreakdown]:
    """Best adjusted matrix over the grid; ties go to the first in lexicographic order.

    ``scenario`` must already carry roles.
    """
    spec = spec or OracleSpec()
    weights = weights or FitnessWeights()
    cells = np.argwhere(validity_mask(scenario))  # row-major
    if len(cells) > spec.max_cells:
        raise OracleRefused(f"{len(cells)} valid positions exceed max_cells={spec.max_cells}")
    values = grid_values(scenario.thv, spec.step_for(scenario))

    rows, cols = cells[:, 0], cells[:, 1]
    trial = np.zeros((scenario.n, scenario.n))
    best = best_bd = None
    for combo in itertools.product(values, repeat=len(cells)):
        trial[rows, cols] = combo
        adjusted = adjust(scenario, trial, policy)
        bd = evaluate_adjusted(scenario, adjusted, weights)
        if best_bd is None or bd.score > best_bd.score:
            best, best_bd = adjusted, bd
    return best, best_bd


def tiny_scenario(rng: np.random.Generator, n: int | None = None, thv: float = 5.0,
                  line_limit: float = 10.0) -> Scenario:
    """Random role-assigned community of 2-4 microgrids for oracle comparisons."""
    n = int(rng.integers(2, 5)) if n is None else n
    mgs = []
    for i in range(n):
        capacity = float(rng.uniform(10, 15))
        kind = rng.choice(["buyer", "hawk", "dove"])
        if kind == "buyer":
            bt = float(rng.uniform(0.4, 0.7) * capacity)
            st = float(rng.uniform(bt, 0.9 * capacity))
            energy = float(rng.uniform(0.05, 0.95) * bt)
            role = Role.BUYER
        else:
            bt = float(rng.uniform(0.1, 0.35) * capacity)
            st = float(rng.uniform(bt, 0.6 * capacity))
            energy = float(rng.uniform(st + 0.05 * capacity, capacity))
            role = Role.HAWK_SELLER if kind == "hawk" else Role.DOVE_SELLER
        mgs.append(Microgrid(i, energy, bt, st, capacity, int(rng.integers(1000, 6001)), 6000, role))
    return Scenario(tuple(mgs), thv=thv, line_limit=line_limit)
