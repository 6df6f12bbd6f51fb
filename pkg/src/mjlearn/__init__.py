"""Learn Markov Junior style rewrite grammars from a single example grid."""

__version__ = "0.1.0"

from .estimator import GrammarLearner
from .fitness import FitnessConfig, fitness, kl_divergence, pattern_distribution
from .grid import Alphabet, infer_alphabet, scan_patterns
from .interpreter import ExecutionBudget, Node, Rule, execute_grammar, validate_tree
from .pipeline import LearnParams, learn_grammar

__all__ = [
    "Alphabet", "ExecutionBudget", "FitnessConfig", "GrammarLearner", "LearnParams", "Node", "Rule",
    "execute_grammar", "fitness", "infer_alphabet", "kl_divergence", "learn_grammar",
    "pattern_distribution", "scan_patterns", "validate_tree",
]
