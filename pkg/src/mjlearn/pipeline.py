"""End-to-end learning for one sample: patterns, relations, rule pool, evolution."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .evolution import EvolutionConfig, History, Individual, derive_seed, run
from .fitness import FitnessConfig
from .grid import Alphabet, check_window, scan_patterns
from .relations import RelationTable, build_relation_table
from .rules import DEFAULT_MAX_RULES, DEFAULT_WILDCARD_RATE, InitSpec, RulePool, build_rule_pool

logger = logging.getLogger(__name__)


@dataclass
class LearnParams:
    window: int = 2
    top_k: int = 1
    max_distance: float | None = None
    wildcard_rate: float = DEFAULT_WILDCARD_RATE
    max_rules: int = DEFAULT_MAX_RULES
    init: str = "blank"
    floor_rows: int = 1
    population_size: int = 32
    n_pairs: int = 16
    max_generations: int = 200
    target_fitness: float = -0.05
    elitism_threshold: float = 0.8
    n_evals: int = 1
    max_steps: int = 10_000
    windows: tuple[int, ...] = (2, 3, 4)
    w: float = 0.9
    epsilon: float = 1e-6

    def evolution_config(self, seed: int) -> EvolutionConfig:
        return EvolutionConfig(
            population_size=self.population_size, n_pairs=self.n_pairs,
            max_generations=self.max_generations, target_fitness=self.target_fitness,
            elitism_threshold=self.elitism_threshold, master_seed=seed, n_evals=self.n_evals,
            max_steps=self.max_steps,
            fitness=FitnessConfig(tuple(self.windows), self.w, self.epsilon))


@dataclass
class LearnResult:
    best: Individual
    history: History
    init: InitSpec
    seed: int
    pool: RulePool | None = field(default=None, repr=False)
    relations: RelationTable | None = field(default=None, repr=False)

    @property
    def grammar(self):
        return self.best.tree

    @property
    def fitness(self) -> float:
        return self.best.fitness


def prepare(sample: np.ndarray, alphabet: Alphabet, params: LearnParams, seed: int):
    """Initial environment, merged relation table and rule pool for ``sample``."""
    check_window(sample, params.window)
    for n in params.windows:
        check_window(sample, n)
    init = InitSpec.from_sample(sample, params.init, params.floor_rows)
    init_env = init.build(*sample.shape, alphabet)
    max_distance = params.max_distance or 2.0 * params.window
    table = build_relation_table(scan_patterns(sample, params.window), params.top_k, max_distance)
    table = table.merge(build_relation_table(scan_patterns(init_env, params.window),
                                             params.top_k, max_distance))
    pool = build_rule_pool(table, alphabet, np.random.default_rng(derive_seed(seed, 0x9001)),
                           params.wildcard_rate, init_env, params.max_rules)
    return init, init_env, table, pool


def learn_grammar(sample: np.ndarray, alphabet: Alphabet, params: LearnParams, seed: int,
                  callback=None) -> LearnResult:
    init, init_env, table, pool = prepare(sample, alphabet, params, seed)
    logger.info("rule pool: %d rules (%d anchoring)", len(pool), len(pool.anchoring()))
    best, history = run(sample, params.evolution_config(seed), pool, init_env, callback)
    return LearnResult(best, history, init, seed, pool, table)
