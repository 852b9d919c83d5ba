"""Microgrids, trading roles, stability and post-trade settlement."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

#: Absolute slack used when comparing settled energies against thresholds.
#: Residual bookkeeping in ``adjust`` rounds differently from the additive
#: settlement, so a buyer filled to exactly its deficit can land a few ulps
#: under BT.
ENERGY_TOL = 1e-9


class Role(enum.Enum):
    HAWK_SELLER = "hawk_seller"
    DOVE_SELLER = "dove_seller"
    BUYER = "buyer"
    INACTIVE = "inactive"

    @property
    def is_seller(self) -> bool:
        return self in (Role.HAWK_SELLER, Role.DOVE_SELLER)


def role_admissible(role: Role, energy: float, bt: float, st: float) -> bool:
    """Whether ``role`` is one :func:`classify_role` could produce at ``energy``."""
    if role is Role.HAWK_SELLER:
        return energy > st
    if role is Role.DOVE_SELLER:
        return energy > bt
    if role is Role.BUYER:
        return energy < bt
    return bt <= energy <= st


class SurplusFloorPolicy(enum.Enum):
    """Floor below which a seller will not discharge.

    ``BUY_THRESHOLD`` lets sellers trade down to BT (default).
    ``SELL_THRESHOLD`` keeps them at or above ST.
    """

    BUY_THRESHOLD = "buy_threshold"
    SELL_THRESHOLD = "sell_threshold"


class InfeasibleSettlement(ValueError):
    """Settled energy left the battery's ``[0, capacity]`` range."""


@dataclass(frozen=True)
class Microgrid:
    id: int
    energy_initial: float
    bt: float
    st: float
    capacity: float
    cycles_remaining: float
    cycles_max: float
    role: Role | None = None

    def __post_init__(self):
        if not (0 <= self.bt <= self.st <= self.capacity):
            raise ValueError(
                f"microgrid {self.id}: thresholds must satisfy 0 <= bt <= st <= capacity "
                f"(got bt={self.bt}, st={self.st}, capacity={self.capacity})"
            )
        if not (0 <= self.energy_initial <= self.capacity):
            raise ValueError(
                f"microgrid {self.id}: energy {self.energy_initial} outside [0, {self.capacity}]"
            )
        if not (0 <= self.cycles_remaining <= self.cycles_max):
            raise ValueError(
                f"microgrid {self.id}: cycles_remaining {self.cycles_remaining} "
                f"outside [0, {self.cycles_max}]"
            )
        if self.role is not None and not role_admissible(self.role, self.energy_initial, self.bt, self.st):
            raise ValueError(
                f"microgrid {self.id}: role {self.role.value} not admissible at energy "
                f"{self.energy_initial} (bt={self.bt}, st={self.st})"
            )


@dataclass(frozen=True)
class Scenario:
    microgrids: tuple[Microgrid, ...]
    thv: float = 5.0
    line_limit: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "microgrids", tuple(self.microgrids))
        if not self.microgrids:
            raise ValueError("scenario needs at least one microgrid")
        if not self.thv > 0:
            raise ValueError(f"thv must be positive, got {self.thv}")
        if not self.line_limit > 0:
            raise ValueError(f"line_limit must be positive, got {self.line_limit}")
        ids = [mg.id for mg in self.microgrids]
        if ids != list(range(len(ids))):
            raise ValueError("microgrid ids must be 0..n-1 in order")

    @property
    def n(self) -> int:
        return len(self.microgrids)

    @property
    def has_roles(self) -> bool:
        return all(mg.role is not None for mg in self.microgrids)

    def with_roles(self, roles) -> Scenario:
        mgs = tuple(replace(mg, role=r) for mg, r in zip(self.microgrids, roles))
        return Scenario(mgs, thv=self.thv, line_limit=self.line_limit)

    @cached_property
    def energy(self) -> np.ndarray:
        return self._column("energy_initial")

    @cached_property
    def bt(self) -> np.ndarray:
        return self._column("bt")

    @cached_property
    def st(self) -> np.ndarray:
        return self._column("st")

    @cached_property
    def capacity(self) -> np.ndarray:
        return self._column("capacity")

    @cached_property
    def cycles_max(self) -> np.ndarray:
        return self._column("cycles_max")

    @cached_property
    def roles(self) -> tuple[Role, ...]:
        if not self.has_roles:
            raise ValueError("scenario roles not assigned; call assign_roles first")
        return tuple(mg.role for mg in self.microgrids)

    @cached_property
    def sellers(self) -> np.ndarray:
        return np.array([i for i, r in enumerate(self.roles) if r.is_seller], dtype=np.intp)

    @cached_property
    def buyers(self) -> np.ndarray:
        return np.array([i for i, r in enumerate(self.roles) if r is Role.BUYER], dtype=np.intp)

    @cached_property
    def seller_flag(self) -> np.ndarray:
        return np.array([r.is_seller for r in self.roles])

    @cached_property
    def buyer_flag(self) -> np.ndarray:
        return np.array([r is Role.BUYER for r in self.roles])

    @cached_property
    def doves(self) -> np.ndarray:
        return np.array([i for i, r in enumerate(self.roles) if r is Role.DOVE_SELLER], dtype=np.intp)

    @cached_property
    def deficit(self) -> np.ndarray:
        """Buy requirement per microgrid (zero for non-buyers)."""
        arr = np.array([buy_requirement(mg) for mg in self.microgrids])
        arr.flags.writeable = False
        return arr

    def surplus(self, policy: SurplusFloorPolicy = None) -> np.ndarray:
        """Sell capacity per microgrid under ``policy`` (zero for non-sellers)."""
        policy = SurplusFloorPolicy(policy or SurplusFloorPolicy.BUY_THRESHOLD)
        cache = self.__dict__.setdefault("_surplus_cache", {})
        if policy not in cache:
            arr = np.array([sell_capacity(mg, policy) for mg in self.microgrids])
            arr.flags.writeable = False
            cache[policy] = arr
        return cache[policy]

    def _column(self, name):
        arr = np.array([getattr(mg, name) for mg in self.microgrids], dtype=np.float64)
        arr.flags.writeable = False
        return arr


def classify_role(mg: Microgrid, hawk_assignment: bool) -> Role:
    """Trading role for ``mg`` given the seller coin flip (True = Hawk)."""
    if not (0 <= mg.bt <= mg.st <= mg.capacity):
        raise ValueError(f"microgrid {mg.id}: thresholds out of order")
    e = mg.energy_initial
    if e < mg.bt:
        return Role.BUYER
    if e > mg.bt:
        if hawk_assignment:
            return Role.HAWK_SELLER if e > mg.st else Role.INACTIVE
        return Role.DOVE_SELLER
    return Role.INACTIVE


def assign_roles(scenario: Scenario, rng: np.random.Generator) -> Scenario:
    """Fill in missing roles, flipping one fair coin per would-be seller.

    Coins are drawn in id order and only for microgrids above BT whose role
    is unset, so pre-assigned scenarios consume no randomness.
    """
    if scenario.has_roles:
        return scenario
    roles = []
    for mg in scenario.microgrids:
        if mg.role is not None:
            roles.append(mg.role)
        elif mg.energy_initial > mg.bt:
            roles.append(classify_role(mg, bool(rng.random() < 0.5)))
        else:
            roles.append(classify_role(mg, False))
    return scenario.with_roles(roles)


def is_stable(mg: Microgrid, energy: float) -> bool:
    return mg.bt - ENERGY_TOL <= energy <= mg.st + ENERGY_TOL


def stable_mask(scenario: Scenario, energies: np.ndarray) -> np.ndarray:
    """Vectorised :func:`is_stable` over the whole community."""
    return (energies >= scenario.bt - ENERGY_TOL) & (energies <= scenario.st + ENERGY_TOL)


def sell_capacity(mg: Microgrid, policy: SurplusFloorPolicy = SurplusFloorPolicy.BUY_THRESHOLD) -> float:
    if mg.role is not None and not mg.role.is_seller:
        return 0.0
    floor = mg.bt if policy is SurplusFloorPolicy.BUY_THRESHOLD else mg.st
    return max(0.0, mg.energy_initial - floor)


def buy_requirement(mg: Microgrid) -> float:
    if mg.role is not None and mg.role is not Role.BUYER:
        return 0.0
    return max(0.0, mg.bt - mg.energy_initial)


def settle(scenario: Scenario, trades: np.ndarray) -> np.ndarray:
    """Battery levels after applying the (already adjusted) trade matrix.

    Sellers lose their row sum, buyers gain their column sum and inactive
    microgrids keep their energy.
    """
    trades = np.asarray(trades, dtype=np.float64)
    finals = (
        scenario.energy
        - np.where(scenario.seller_flag, trades.sum(axis=1), 0.0)
        + np.where(scenario.buyer_flag, trades.sum(axis=0), 0.0)
    )
    bad = (finals < -ENERGY_TOL) | (finals > scenario.capacity + ENERGY_TOL)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InfeasibleSettlement(
            f"microgrid {i} settles at {finals[i]:.6g} kWh outside [0, {scenario.capacity[i]:.6g}]; "
            "were the trades adjusted?"
        )
    return finals
