"""Scikit-learn style wrapper around grammar learning."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .fitness import FitnessConfig, Scorer
from .grid import infer_alphabet
from .interpreter import ExecutionBudget, execute_grammar
from .pipeline import LearnParams, learn_grammar
from .relations import classify_neutral
from .serialize import grammar_document
from .validation import check_grid, check_rows, check_seed, check_windows


class GrammarLearner(BaseEstimator, TransformerMixin):
    """Learn a rewrite grammar from one example grid.

    ``fit`` takes the example (rows of single-character symbols) and evolves
    a grammar that regrows similar content from the initial environment.
    ``generate`` runs it on a fresh environment; ``transform`` runs it on a
    grid you supply. Outputs are 2-D arrays of single characters.

    Example::

        learner = GrammarLearner(max_generations=50, random_state=0).fit(rows)
        level = learner.generate(seed=1)
    """

    def __init__(self, window=2, top_k=1, max_distance=None, wildcard_rate=0.05, max_rules=5000,
                 init="blank", floor_rows=1, neutral=None, population_size=32, n_pairs=16,
                 max_generations=200, target_fitness=-0.05, elitism_threshold=0.8, n_evals=1,
                 max_steps=10_000, windows=(2, 3, 4), w=0.9, epsilon=1e-6, random_state=0):
        self.window = window
        self.top_k = top_k
        self.max_distance = max_distance
        self.wildcard_rate = wildcard_rate
        self.max_rules = max_rules
        self.init = init
        self.floor_rows = floor_rows
        self.neutral = neutral
        self.population_size = population_size
        self.n_pairs = n_pairs
        self.max_generations = max_generations
        self.target_fitness = target_fitness
        self.elitism_threshold = elitism_threshold
        self.n_evals = n_evals
        self.max_steps = max_steps
        self.windows = windows
        self.w = w
        self.epsilon = epsilon
        self.random_state = random_state

    def _params(self, shape) -> LearnParams:
        return LearnParams(
            window=self.window, top_k=self.top_k, max_distance=self.max_distance,
            wildcard_rate=self.wildcard_rate, max_rules=self.max_rules, init=self.init,
            floor_rows=self.floor_rows, population_size=self.population_size, n_pairs=self.n_pairs,
            max_generations=self.max_generations, target_fitness=self.target_fitness,
            elitism_threshold=self.elitism_threshold, n_evals=self.n_evals, max_steps=self.max_steps,
            windows=check_windows(self.windows, shape), w=self.w, epsilon=self.epsilon)

    def fit(self, X, y=None, callback=None):
        rows = check_rows(X)
        alphabet = infer_alphabet(rows)
        sample = alphabet.encode(rows)
        alphabet = classify_neutral(alphabet, self.neutral, sample)
        params = self._params(sample.shape)
        seed = check_seed(self.random_state)
        result = learn_grammar(sample, alphabet, params, seed, callback)

        self.alphabet_ = alphabet
        self.sample_ = sample
        self.seed_ = seed
        self.grammar_ = result.grammar
        self.init_ = result.init
        self.history_ = result.history
        self.best_fitness_ = result.fitness
        self.n_rules_ = len(result.pool)
        return self

    def _run(self, env: np.ndarray, seed) -> np.ndarray:
        out = execute_grammar(env, self.grammar_, ExecutionBudget(self.max_steps, check_seed(seed)))
        return np.array([list(r) for r in self.alphabet_.decode(out)])

    def generate(self, shape=None, seed=0) -> np.ndarray:
        """Run the grammar on a fresh initial environment (sample shape by default)."""
        check_is_fitted(self, "grammar_")
        height, width = shape or self.sample_.shape
        return self._run(self.init_.build(height, width, self.alphabet_), seed)

    def transform(self, X, seed=0) -> np.ndarray:
        """Run the grammar with ``X`` as the starting environment."""
        check_is_fitted(self, "grammar_")
        return self._run(check_grid(X, self.alphabet_), seed)

    def score(self, X, y=None, seed=0) -> float:
        """Fitness of a generated grid of ``X``'s shape against ``X`` (higher is better, max 0)."""
        check_is_fitted(self, "grammar_")
        ref = check_grid(X, self.alphabet_)
        out = self.alphabet_.encode(["".join(r) for r in self.generate(ref.shape, seed)])
        cfg = FitnessConfig(check_windows(self.windows, ref.shape), self.w, self.epsilon)
        return Scorer(ref, cfg)(out)

    def to_document(self) -> dict:
        check_is_fitted(self, "grammar_")
        return grammar_document(self.grammar_, self.alphabet_, self.init_,
                                shape=list(self.sample_.shape), seed=self.seed_,
                                fitness=self.best_fitness_, history=self.history_.to_list())
