"""Hawk/Dove peer-to-peer energy trading in microgrid communities, optimised
with a matrix-genome genetic algorithm."""

from .domain import (
    InfeasibleSettlement,
    Microgrid,
    Role,
    Scenario,
    SurplusFloorPolicy,
    assign_roles,
    buy_requirement,
    classify_role,
    is_stable,
    sell_capacity,
    settle,
)
from .evolution import GaConfig, GenerationStats, evolve
from .fitness import FitnessBreakdown, FitnessWeights, evaluate
from .genome import adjust, clamp, random_individual, validity_mask
from .kernels import BACKEND
from .scenario_gen import GenSpec, generate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FitnessBreakdown",
    "FitnessWeights",
    "GaConfig",
    "GenSpec",
    "GenerationStats",
    "InfeasibleSettlement",
    "Microgrid",
    "Role",
    "Scenario",
    "SurplusFloorPolicy",
    "adjust",
    "assign_roles",
    "buy_requirement",
    "clamp",
    "classify_role",
    "evaluate",
    "evolve",
    "generate",
    "is_stable",
    "random_individual",
    "sell_capacity",
    "settle",
    "validity_mask",
]
