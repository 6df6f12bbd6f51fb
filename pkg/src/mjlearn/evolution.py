"""Genetic programming over grammar trees.

Selection is a roulette wheel on min-max rescaled fitness in which every
individual above ``elitism_threshold`` is guaranteed a pair. Crossover
swaps first-level subtrees at one cut point per parent, mutation replaces,
deletes or adds a first-level node, and survivors are the best ``mu`` of
parents and children together.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fitness import FitnessConfig, Scorer
from .interpreter import (DEFAULT_MAX_STEPS, MAX_CHILDREN, SEQUENCE, ExecutionBudget, Node,
                          execute_grammar)
from .rules import MAX_ITERATIONS, RulePool, sample_rule_node, sample_ruleset_node

logger = logging.getLogger(__name__)

ROULETTE_FLOOR = 1e-9
MUTATIONS = ("replace", "delete", "add")


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from integer parts; touches no global RNG state."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


@dataclass
class EvolutionConfig:
    population_size: int = 32
    n_pairs: int = 16
    max_generations: int = 200
    target_fitness: float | None = -0.05
    elitism_threshold: float = 0.8
    mutation_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    master_seed: int = 0
    n_evals: int = 1
    max_steps: int = DEFAULT_MAX_STEPS
    ruleset_prob: float = 0.5
    fitness: FitnessConfig = field(default_factory=FitnessConfig)

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        if not 0 < self.elitism_threshold < 1:
            raise ValueError("elitism_threshold must be in (0, 1)")
        if self.n_evals < 1:
            raise ValueError("n_evals must be >= 1")

    def stops_at(self, best: float) -> bool:
        target = self.target_fitness
        return target is not None and math.isfinite(target) and best >= target


@dataclass(eq=False)
class Individual:
    tree: Node
    uid: int = 0
    fitness: float | None = None
    eval_seed: int = 0
    output: np.ndarray | None = field(default=None, repr=False)

    def __repr__(self):
        return f"Individual(uid={self.uid}, fitness={self.fitness})"


class _Ids:
    def __init__(self, start=0):
        self.next = start

    def __call__(self) -> int:
        self.next += 1
        return self.next - 1


def _random_node(pool: RulePool, rng: np.random.Generator, ruleset_prob: float) -> Node:
    if rng.random() < ruleset_prob:
        return sample_ruleset_node(pool, rng, allow_markov=True, depth_remaining=2)
    return sample_rule_node(pool, rng)


def random_tree(pool: RulePool, rng: np.random.Generator, ruleset_prob: float = 0.5) -> Node:
    n = int(rng.integers(1, MAX_CHILDREN + 1))
    children = [_random_node(pool, rng, ruleset_prob) for _ in range(n)]
    return Node(SEQUENCE, children, int(rng.integers(1, MAX_ITERATIONS + 1)))


def init_population(pool: RulePool, cfg: EvolutionConfig, rng: np.random.Generator,
                    ids: Callable[[], int] | None = None) -> list[Individual]:
    ids = ids or _Ids()
    return [Individual(random_tree(pool, rng, cfg.ruleset_prob), ids())
            for _ in range(cfg.population_size)]


def relative_fitness(pop: list[Individual]) -> np.ndarray:
    f = np.array([ind.fitness for ind in pop], dtype=float)
    lo, hi = f.min(), f.max()
    if hi == lo:
        return np.full(len(f), 0.5)
    return (f - lo) / (hi - lo)


def select_parents(pop: list[Individual], rng: np.random.Generator, n_pairs: int,
                   threshold: float = 0.8) -> list[tuple[int, int]]:
    """Index pairs into ``pop``; every individual above ``threshold`` is in one.

    When there are more elites than pairs, surplus elites fill the mate slot
    of earlier elite pairs instead of a roulette draw.
    """
    rel = relative_fitness(pop)
    weights = np.where(rel > 0, rel, ROULETTE_FLOOR)
    probs = weights / weights.sum()
    n = len(pop)

    def spin() -> int:
        return int(rng.choice(n, p=probs))

    def mate_for(i: int) -> int:
        j = spin()
        for _ in range(10):
            if j != i:
                break
            j = spin()
        return j

    elites = [int(i) for i in np.argsort(-rel, kind="stable") if rel[i] > threshold]
    leaders, surplus = elites[:n_pairs], elites[n_pairs:2 * n_pairs]
    pairs = []
    for k, i in enumerate(leaders):
        pairs.append((i, surplus[k] if k < len(surplus) else mate_for(i)))
    while len(pairs) < n_pairs:
        i = spin()
        pairs.append((i, mate_for(i)))
    return pairs


def crossover(a: Individual, b: Individual, pool: RulePool, rng: np.random.Generator,
              ids: Callable[[], int] | None = None, cuts: tuple[int, int] | None = None):
    """One-point crossover on the root's children; ``cuts`` overrides the random cut points."""
    ids = ids or _Ids()
    ka, kb = a.tree.children, b.tree.children
    if cuts is None:
        ca = int(rng.integers(0, len(ka) + 1))
        cb = int(rng.integers(0, len(kb) + 1))
    else:
        ca, cb = cuts
        if not (0 <= ca <= len(ka) and 0 <= cb <= len(kb)):
            raise ValueError(f"cuts {cuts} out of range")
    out = []
    for head, tail, parent in ((ka[:ca], kb[cb:], a), (kb[:cb], ka[ca:], b)):
        children = [c.copy() for c in head + tail][:MAX_CHILDREN]
        if not children:
            children = [sample_rule_node(pool, rng)]
        out.append(Individual(Node(SEQUENCE, children, parent.tree.iterations), ids()))
    return out[0], out[1]


def mutate(ind: Individual, pool: RulePool, rng: np.random.Generator,
           weights=(1.0, 1.0, 1.0), ruleset_prob: float = 0.5) -> Individual:
    """Apply one first-level mutation in place of a copy; returns the new individual."""
    tree = ind.tree.copy()
    w = np.asarray(weights, dtype=float)
    op = MUTATIONS[int(rng.choice(len(MUTATIONS), p=w / w.sum()))]
    target = int(rng.integers(len(tree.children)))
    if op == "delete" and len(tree.children) == 1:
        op = "replace"
    if op == "add" and len(tree.children) >= MAX_CHILDREN:
        op = "replace"
    if op == "replace":
        tree.children[target] = _random_node(pool, rng, ruleset_prob)
    elif op == "delete":
        del tree.children[target]
    else:
        tree.children.insert(target + 1, _random_node(pool, rng, ruleset_prob))
    return Individual(tree, ind.uid)


def evaluate(ind: Individual, scorer: Scorer, init_env: np.ndarray, cfg: EvolutionConfig,
             generation: int, index: int) -> Individual:
    scores = []
    for k in range(cfg.n_evals):
        seed = derive_seed(cfg.master_seed, generation, index, k)
        out = execute_grammar(init_env, ind.tree, ExecutionBudget(cfg.max_steps, seed))
        scores.append(scorer(out))
        if k == 0:
            ind.eval_seed, ind.output = seed, out
    ind.fitness = float(np.mean(scores))
    return ind


def _ranked(pop: list[Individual]) -> list[Individual]:
    return sorted(pop, key=lambda ind: (-ind.fitness, ind.uid))


def step_generation(pop: list[Individual], pool: RulePool, scorer: Scorer, init_env: np.ndarray,
                    cfg: EvolutionConfig, rng: np.random.Generator, generation: int,
                    ids: Callable[[], int]) -> list[Individual]:
    children = []
    for i, j in select_parents(pop, rng, cfg.n_pairs, cfg.elitism_threshold):
        for child in crossover(pop[i], pop[j], pool, rng, ids):
            children.append(mutate(child, pool, rng, cfg.mutation_weights, cfg.ruleset_prob))
    for index, child in enumerate(children):
        evaluate(child, scorer, init_env, cfg, generation, index)
    return _ranked(pop + children)[:cfg.population_size]


@dataclass
class History:
    best: list[float] = field(default_factory=list)
    mean: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.best)

    def record(self, pop: list[Individual]) -> None:
        f = [ind.fitness for ind in pop]
        self.best.append(float(max(f)))
        self.mean.append(float(np.mean(f)))

    def to_list(self) -> list[dict]:
        return [{"generation": g, "best": b, "mean": m}
                for g, (b, m) in enumerate(zip(self.best, self.mean))]


def run(sample: np.ndarray, cfg: EvolutionConfig, pool: RulePool, init_env: np.ndarray,
        callback: Callable[[int, list[Individual]], None] | None = None):
    """Evolve grammars for ``sample``. Returns (best individual, history).

    Generation 0 evaluates the initial population; every later generation is
    one :func:`step_generation`. Stops at ``target_fitness`` or after
    ``max_generations`` generations, whichever comes first; a target of
    ``None`` or an infinite one never stops the run early.
    """
    rng = np.random.default_rng(derive_seed(cfg.master_seed, 0x6A))
    ids = _Ids()
    scorer = Scorer(sample, cfg.fitness)
    history = History()
    pop: list[Individual] = []
    for generation in range(cfg.max_generations):
        if generation == 0:
            pop = init_population(pool, cfg, rng, ids)
            for index, ind in enumerate(pop):
                evaluate(ind, scorer, init_env, cfg, 0, index)
            pop = _ranked(pop)
        else:
            pop = step_generation(pop, pool, scorer, init_env, cfg, rng, generation, ids)
        history.record(pop)
        if callback:
            callback(generation, pop)
        logger.debug("generation %d best %.5f mean %.5f", generation, history.best[-1], history.mean[-1])
        if cfg.stops_at(pop[0].fitness):
            break
    return pop[0], history
