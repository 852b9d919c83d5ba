"""Trade-matrix individuals: validity mask, random initialisation, clamping and
the feasibility adjustment that turns proposed transfers into executable ones.

A trade matrix is a plain ``(n, n)`` float64 array; entry ``[i, j]`` is the
energy (kWh) microgrid ``i`` sells to microgrid ``j``.
"""

from __future__ import annotations

import numpy as np

from .domain import Scenario, SurplusFloorPolicy
from .kernels import adjust_into


def validity_mask(scenario: Scenario) -> np.ndarray:
    """Boolean ``(n, n)`` mask, true exactly on seller-row / buyer-column pairs."""
    mask = np.zeros((scenario.n, scenario.n), dtype=bool)
    mask[np.ix_(scenario.sellers, scenario.buyers)] = True
    return mask


def zeros(scenario: Scenario) -> np.ndarray:
    return np.zeros((scenario.n, scenario.n))


def random_individual(scenario: Scenario, mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform draws on ``[0, THV]`` at valid positions, zero elsewhere."""
    trades = np.zeros(mask.shape)
    trades[mask] = rng.uniform(0.0, scenario.thv, size=int(mask.sum()))
    return trades


def clamp(trades: np.ndarray, thv: float) -> np.ndarray:
    return np.minimum(np.maximum(trades, 0.0), thv)


def adjust(
    scenario: Scenario,
    trades: np.ndarray,
    policy: SurplusFloorPolicy = SurplusFloorPolicy.BUY_THRESHOLD,
) -> np.ndarray:
    """Real-transactions matrix for the proposed ``trades``.

    Valid pairs are visited in row-major order (seller id, then buyer id).
    Each transfer is ``min(residual surplus, residual deficit, proposal, THV)``
    and both residuals shrink by the amount granted, so no seller is drained
    past its floor and no buyer is filled past BT. Negative proposals count
    as zero and every invalid position comes out zero.
    """
    proposed = np.ascontiguousarray(trades, dtype=np.float64)
    if proposed.shape != (scenario.n, scenario.n):
        raise ValueError(f"expected a {scenario.n}x{scenario.n} matrix, got {proposed.shape}")
    out = np.zeros_like(proposed)
    surplus = np.array(scenario.surplus(policy))
    deficit = np.array(scenario.deficit)
    adjust_into(proposed, surplus, deficit, scenario.sellers, scenario.buyers, float(scenario.thv), out)
    return out
