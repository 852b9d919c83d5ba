"""Synthetic microgrid communities.

Two threshold rules are available:

``targeted`` (default)
    The lowest-energy ``round(target * n)`` microgrids are given a buy
    threshold above their charge (``BT = E + deficit``); the rest get a band
    below their charge (``BT = E - surplus``, ``ST = E - excess``). Deficits and
    surpluses are drawn from configurable kWh ranges.
``fractional``
    Thresholds independent of charge: ``BT ~ U[0.25, 0.45] * capacity`` and
    ``ST ~ U[0.6, 0.85] * capacity``.

Either way the realised buyer fraction must land within
``buyer_tolerance`` of the target (or, for tiny communities, on the buyer
count nearest to it); threshold draws are repeated until it does, up to
``max_rounds``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .domain import Microgrid, Scenario

THRESHOLD_RULES = ("targeted", "fractional")


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenSpec:
    n: int = 100
    energy_range: tuple[float, float] = (2.0, 12.0)
    cycles_range: tuple[int, int] = (1000, 6000)
    capacity_range: tuple[float, float] = (10.0, 15.0)
    cycles_max: int = 6000
    threshold_rule: str = "targeted"
    target_buyer_fraction: float = 0.56
    buyer_tolerance: float = 0.05
    deficit_range: tuple[float, float] = (5.0, 8.0)
    band_range: tuple[float, float] = (1.0, 3.0)
    surplus_range: tuple[float, float] = (7.0, 10.0)
    excess_range: tuple[float, float] = (0.5, 3.0)
    bt_fraction_range: tuple[float, float] = (0.25, 0.45)
    st_fraction_range: tuple[float, float] = (0.6, 0.85)
    thv: float = 5.0
    line_limit: float = 10.0
    seed: int = 120
    max_rounds: int = 200

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for name in ("energy_range", "cycles_range", "capacity_range", "deficit_range",
                     "band_range", "surplus_range", "excess_range", "bt_fraction_range",
                     "st_fraction_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} is empty: ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))
        if self.energy_range[0] < 0 or self.deficit_range[0] <= 0 or self.surplus_range[0] <= 0:
            raise ValueError("energies must be >= 0; deficit and surplus ranges must be positive")
        if self.capacity_range[0] <= 0:
            raise ValueError("capacities must be positive")
        if not 0 <= self.cycles_range[0] <= self.cycles_range[1] <= self.cycles_max:
            raise ValueError("cycles_range must lie within [0, cycles_max]")
        if not 0 < self.target_buyer_fraction < 1:
            raise ValueError("target_buyer_fraction must lie in (0, 1)")
        if self.buyer_tolerance < 0:
            raise ValueError("buyer_tolerance must be non-negative")
        if self.threshold_rule not in THRESHOLD_RULES:
            raise ValueError(f"threshold_rule must be one of {THRESHOLD_RULES}")
        if self.thv <= 0 or self.line_limit <= 0:
            raise ValueError("thv and line_limit must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def _targeted(spec: GenSpec, energy: np.ndarray, rng: np.random.Generator):
    n = spec.n
    n_buyers = int(round(spec.target_buyer_fraction * n))
    buyer = np.zeros(n, dtype=bool)
    buyer[np.argsort(energy, kind="stable")[:n_buyers]] = True

    capacity = np.maximum(rng.uniform(*spec.capacity_range, size=n), energy)
    deficit = rng.uniform(*spec.deficit_range, size=n)
    band = rng.uniform(*spec.band_range, size=n)
    surplus = rng.uniform(*spec.surplus_range, size=n)
    excess = rng.uniform(*spec.excess_range, size=n)

    bt_buy = np.minimum(energy + deficit, capacity)
    st_buy = np.minimum(bt_buy + band, capacity)
    bt_sell = np.maximum(energy - surplus, 0.0)
    st_sell = np.maximum(energy - excess, bt_sell)
    bt = np.where(buyer, bt_buy, bt_sell)
    st = np.where(buyer, st_buy, st_sell)
    return capacity, bt, st


def _fractional(spec: GenSpec, energy: np.ndarray, rng: np.random.Generator):
    n = spec.n
    capacity = np.maximum(rng.uniform(*spec.capacity_range, size=n), energy)
    bt = rng.uniform(*spec.bt_fraction_range, size=n) * capacity
    st = np.maximum(rng.uniform(*spec.st_fraction_range, size=n) * capacity, bt)
    return capacity, bt, st


def generate(spec: GenSpec | None = None) -> Scenario:
    """Draw a community per ``spec``; roles are left for the run to assign."""
    spec = spec or GenSpec()
    rng = np.random.default_rng(spec.seed)
    energy = rng.uniform(*spec.energy_range, size=spec.n)
    cycles = rng.integers(spec.cycles_range[0], spec.cycles_range[1], size=spec.n, endpoint=True)
    draw = _targeted if spec.threshold_rule == "targeted" else _fractional

    for _ in range(spec.max_rounds):
        capacity, bt, st = draw(spec, energy, rng)
        count = int(np.sum(energy < bt))
        frac = count / spec.n
        # small communities cannot hit the band exactly; allow the nearest whole count
        slack = max(spec.buyer_tolerance * spec.n, 0.5)
        if abs(count - spec.target_buyer_fraction * spec.n) <= slack + 1e-9:
            break
    else:
        raise GenerationError(
            f"{spec.threshold_rule} thresholds missed buyer fraction "
            f"{spec.target_buyer_fraction:.2f}±{spec.buyer_tolerance:.2f} in {spec.max_rounds} "
            f"rounds (last draw: {frac:.2f})"
        )

    mgs = tuple(
        Microgrid(
            id=i,
            energy_initial=float(energy[i]),
            bt=float(bt[i]),
            st=float(st[i]),
            capacity=float(capacity[i]),
            cycles_remaining=int(cycles[i]),
            cycles_max=spec.cycles_max,
        )
        for i in range(spec.n)
    )
    return Scenario(mgs, thv=spec.thv, line_limit=spec.line_limit)
