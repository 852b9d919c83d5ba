"""Genetic search over trade matrices: elitist selection from a restricted
mating pool, row-block crossover, masked Gaussian mutation with a linearly
decaying rate, and per-generation diversity telemetry.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .domain import Scenario, SurplusFloorPolicy, assign_roles
from .fitness import FitnessBreakdown, FitnessWeights, evaluate_adjusted
from .genome import adjust, clamp, random_individual, validity_mask

MAX_MUTATION_RATE = 0.1


@dataclass(frozen=True)
class GaConfig:
    pop_size: int = 80
    generations: int = 500
    elite_size: int = 13
    mating_pool_size: int | None = None  # default pop_size // 4
    p_min: float = 0.005
    sigma: float | None = None  # default 0.1 * THV
    seed: int = 120
    init_seed: int | None = None  # separate stream for roles + initial population
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    policy: SurplusFloorPolicy = SurplusFloorPolicy.BUY_THRESHOLD
    store_adjusted: bool = False  # write adjusted matrices back into the population

    def __post_init__(self):
        object.__setattr__(self, "policy", SurplusFloorPolicy(self.policy))
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.elite_size < 0 or self.elite_size + 1 > self.pop_size:
            raise ValueError("need 0 <= elite_size and elite_size + 1 <= pop_size")
        if self.mating_pool < 2:
            raise ValueError("mating_pool_size must be >= 2")
        if not 0 < self.p_min <= MAX_MUTATION_RATE:
            raise ValueError(f"p_min must lie in (0, {MAX_MUTATION_RATE}]")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def mating_pool(self) -> int:
        if self.mating_pool_size is not None:
            return self.mating_pool_size
        return max(2, self.pop_size // 4)

    def sigma_for(self, scenario: Scenario) -> float:
        return self.sigma if self.sigma is not None else 0.1 * scenario.thv

    @property
    def config_id(self) -> str:
        return f"G{self.generations}_P{self.pop_size}_E{self.elite_size}_M{self.p_min:g}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["policy"] = self.policy.value
        d["mating_pool_size"] = self.mating_pool
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GaConfig":
        """Inverse of :meth:`to_dict` (as echoed in a run manifest)."""
        d = dict(d)
        d["weights"] = FitnessWeights(**d.get("weights", {}))
        return cls(**d)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    diversity: float
    mutation_rate: float
    exploration_pct: float
    exploitation_pct: float
    stable_count_best: int


@dataclass
class EvolutionResult:
    best: np.ndarray  # adjusted (executable) trades of the best individual
    best_breakdown: FitnessBreakdown
    stats: list[GenerationStats]
    scenario: Scenario  # with the roles used during the run
    best_proposal: np.ndarray | None = field(repr=False, default=None)
    initial_population: list[np.ndarray] = field(repr=False, default_factory=list)

    def __iter__(self):
        return iter((self.best, self.best_breakdown, self.stats))


def mutation_rate(generation: int, total: int, p_min: float) -> float:
    if total <= 0:
        raise ValueError("total generations must be positive")
    return max(MAX_MUTATION_RATE * (1 - generation / total), p_min)


def crossover(parent1: np.ndarray, parent2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Copy of ``parent1`` with a random contiguous block of rows taken from ``parent2``."""
    if parent1.shape != parent2.shape:
        raise ValueError("parents must have the same shape")
    n = parent1.shape[0]
    r1, r2 = sorted(int(r) for r in rng.integers(0, n, size=2))
    return splice_rows(parent1, parent2, r1, r2)


def splice_rows(parent1: np.ndarray, parent2: np.ndarray, r1: int, r2: int) -> np.ndarray:
    child = parent1.copy()
    child[r1 : r2 + 1] = parent2[r1 : r2 + 1]
    return child


def mutate(
    individual: np.ndarray,
    mask: np.ndarray,
    rate: float,
    sigma: float,
    thv: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Gaussian noise on a random subset of valid entries, then clamp to ``[0, THV]``.

    One uniform draw per valid entry (row-major) decides whether it mutates;
    the normal draws follow, one per selected entry.
    """
    if not 0 <= rate <= 1:
        raise ValueError("rate must lie in [0, 1]")
    out = individual.copy()
    flat = out.reshape(-1)
    valid = np.flatnonzero(mask)
    hit = valid[rng.random(valid.size) < rate]
    if hit.size:
        flat[hit] += rng.normal(0.0, sigma, size=hit.size)
    out = clamp(out, thv)
    out[~mask] = 0.0
    return out


def diversity(population) -> float:
    """Mean Euclidean distance over all unordered pairs of individuals."""
    vectors = np.array([np.ravel(p) for p in population], dtype=np.float64)
    if len(vectors) < 2:
        return 0.0
    return float(pdist(vectors).mean())


def exploration_split(diversity_value: float, diversity_max: float) -> tuple[float, float]:
    if diversity_max <= 0:
        return 0.0, 100.0
    exploration = 100.0 * diversity_value / diversity_max
    exploitation = 100.0 * abs(diversity_value - diversity_max) / diversity_max
    return exploration, exploitation


def rescale_exploration(stats: list[GenerationStats]) -> list[GenerationStats]:
    """Recompute the exploration split against the whole run's peak diversity."""
    peak = max((s.diversity for s in stats), default=0.0)
    out = []
    for s in stats:
        exp, expl = exploration_split(s.diversity, peak)
        out.append(GenerationStats(**{**asdict(s), "exploration_pct": exp, "exploitation_pct": expl}))
    return out


def initial_population(scenario: Scenario, pop_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    mask = validity_mask(scenario)
    return [random_individual(scenario, mask, rng) for _ in range(pop_size)]


def evolve(scenario: Scenario, config: GaConfig | None = None, progress=None) -> EvolutionResult:
    """Run the genetic search and return the best individual ever evaluated.

    Individuals are proposal matrices; each is adjusted before scoring. With
    ``config.store_adjusted`` the adjusted matrix replaces the proposal in the
    population instead. Roles still unset on ``scenario`` are assigned first from the run's
    random stream. With ``config.init_seed`` set, roles and the initial
    population come from that seed while the operators draw from
    ``config.seed``; otherwise a single stream serves both.
    """
    config = config or GaConfig()
    init_rng = np.random.default_rng(config.seed if config.init_seed is None else config.init_seed)
    rng = init_rng if config.init_seed is None else np.random.default_rng(config.seed)

    scenario = assign_roles(scenario, init_rng)
    mask = validity_mask(scenario)
    valid = np.flatnonzero(mask)
    weights, policy = config.weights, config.policy
    sigma = config.sigma_for(scenario)
    pop_size, n_elite = config.pop_size, config.elite_size

    population = initial_population(scenario, pop_size, init_rng)
    seeds = [p.copy() for p in population]
    scores: list[FitnessBreakdown | None] = [None] * pop_size
    adjusted: list[np.ndarray | None] = [None] * pop_size

    def score(individual):
        real = adjust(scenario, individual, policy)
        kept = real if config.store_adjusted else individual
        return kept, real, evaluate_adjusted(scenario, real, weights)

    best = best_prop = None
    best_bd: FitnessBreakdown | None = None
    div_max = 0.0
    stats: list[GenerationStats] = []

    for g in range(1, config.generations + 1):
        for k in range(pop_size):
            if scores[k] is None:
                population[k], adjusted[k], scores[k] = score(population[k])

        # stable sort: fitness descending, index ascending on ties
        order = sorted(range(pop_size), key=lambda k: -scores[k].score)
        elite = order[:n_elite]
        pool = order[n_elite:][: config.mating_pool]

        new_pop = [population[k] for k in elite]
        new_adj = [adjusted[k] for k in elite]
        new_scores = [scores[k] for k in elite]
        rate = mutation_rate(g, config.generations, config.p_min)
        while len(new_pop) < pop_size:
            p1 = population[pool[int(rng.integers(len(pool)))]]
            p2 = population[pool[int(rng.integers(len(pool)))]]
            child = crossover(p1, p2, rng)
            child = mutate(child, mask, rate, sigma, scenario.thv, rng)
            child, real, bd = score(child)
            new_pop.append(child)
            new_adj.append(real)
            new_scores.append(bd)
        population, adjusted, scores = new_pop, new_adj, new_scores

        for ind, real, bd in zip(population, adjusted, scores):
            if best_bd is None or bd.score > best_bd.score:
                best, best_prop, best_bd = real, ind, bd

        div = diversity(np.array([ind.reshape(-1)[valid] for ind in population]))
        div_max = max(div_max, div)
        exp, expl = exploration_split(div, div_max)
        stats.append(
            GenerationStats(
                generation=g,
                best_fitness=best_bd.score,
                mean_fitness=math.fsum(s.score for s in scores) / pop_size,
                diversity=div,
                mutation_rate=rate,
                exploration_pct=exp,
                exploitation_pct=expl,
                stable_count_best=best_bd.stable_count,
            )
        )
        if progress is not None:
            progress(stats[-1])

    return EvolutionResult(best.copy(), best_bd, stats, scenario, best_prop.copy(), seeds)
