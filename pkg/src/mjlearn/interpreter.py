"""Markov Junior style grammar execution on 2-D grids.

A grammar is a tree of :class:`Node` objects. Leaves hold a :class:`Rule`
applied in ``one`` or ``all`` mode; inner nodes are ``sequence`` (run the
children in order for a fixed number of iterations) or ``markov`` (repeat
the first child that changes the grid until none does).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grid import WILDCARD

logger = logging.getLogger(__name__)

ONE = "one"
ALL = "all"
RULE = "rule"
SEQUENCE = "sequence"
MARKOV = "markov"

MAX_DEPTH = 3
MAX_CHILDREN = 5
DEFAULT_MAX_STEPS = 10_000


@dataclass(eq=False)
class Rule:
    """Equal-shape rewrite. Wildcards match anything / leave the cell unchanged."""

    antecedent: np.ndarray
    consequent: np.ndarray
    mode: str = ONE

    def __post_init__(self):
        self.antecedent = np.array(self.antecedent, dtype=np.int16)
        self.consequent = np.array(self.consequent, dtype=np.int16)
        self.antecedent.setflags(write=False)
        self.consequent.setflags(write=False)
        if self.mode not in (ONE, ALL):
            raise ValueError(f"unknown rule mode {self.mode!r}")
        self._layouts = {}

    @property
    def shape(self) -> tuple[int, int]:
        return self.antecedent.shape

    @cached_property
    def _cells(self):
        reads = np.nonzero(self.antecedent != WILDCARD)
        writes = np.nonzero(self.consequent != WILDCARD)
        return reads, self.antecedent[reads], writes, self.consequent[writes]

    def _layout(self, grid_shape):
        """Flat top-left bases and read/write offsets for one grid shape (cached)."""
        layout = self._layouts.get(grid_shape)
        if layout is None:
            H, W = grid_shape
            h, w = self.antecedent.shape
            (rr, rc), _, (wr, wc), _ = self._cells
            if h > H or w > W:
                bases = np.empty(0, dtype=np.intp)
            else:
                bases = (np.arange(H - h + 1)[:, None] * W + np.arange(W - w + 1)).ravel()
            layout = (bases, rr * W + rc, wr * W + wc)
            self._layouts[grid_shape] = layout
        return layout

    def with_mode(self, mode: str) -> "Rule":
        return Rule(self.antecedent, self.consequent, mode)

    def match_positions(self, grid: np.ndarray) -> np.ndarray:
        """Flat indices of the top-left cells where the antecedent matches, ascending."""
        bases, reads, _ = self._layout(grid.shape)
        if len(bases) == 0 or len(reads) == 0:
            return bases
        vals = self._cells[1]
        hit = (grid.ravel()[bases[:, None] + reads] == vals).all(axis=1)
        return bases[hit]

    def matches(self, grid: np.ndarray) -> np.ndarray:
        """Row-major (N, 2) array of positions where the antecedent matches."""
        pos = self.match_positions(grid)
        return np.stack(np.divmod(pos, grid.shape[1]), axis=1) if len(pos) else np.empty((0, 2), dtype=np.intp)

    def write(self, grid: np.ndarray, base: int) -> bool:
        """Write the consequent in place at flat top-left index ``base``.

        Returns whether any cell actually changed.
        """
        idx = base + self._layout(grid.shape)[2]
        flat = grid.reshape(-1)
        vals = self._cells[3]
        changed = bool(np.any(flat[idx] != vals))
        flat[idx] = vals
        return changed

    def __eq__(self, other):
        return (isinstance(other, Rule) and self.mode == other.mode
                and np.array_equal(self.antecedent, other.antecedent)
                and np.array_equal(self.consequent, other.consequent))

    def __hash__(self):
        return hash((self.mode, self.antecedent.tobytes(), self.consequent.tobytes(), self.shape))

    def __repr__(self):
        return f"Rule({self.antecedent.tolist()} -> {self.consequent.tolist()}, {self.mode})"


@dataclass(eq=False)
class Node:
    kind: str
    children: list["Node"] = field(default_factory=list)
    iterations: int = 1
    rule: Rule | None = None

    @classmethod
    def leaf(cls, rule: Rule) -> "Node":
        return cls(RULE, rule=rule)

    @classmethod
    def sequence(cls, children, iterations: int = 1) -> "Node":
        return cls(SEQUENCE, list(children), iterations)

    @classmethod
    def markov(cls, children) -> "Node":
        return cls(MARKOV, list(children))

    @property
    def is_rule(self) -> bool:
        return self.kind == RULE

    def copy(self) -> "Node":
        # rules are immutable and shared
        return Node(self.kind, [c.copy() for c in self.children], self.iterations, self.rule)

    def walk(self, depth: int = 0):
        """Yield (node, depth) pairs depth-first, pre-order."""
        yield self, depth
        for child in self.children:
            yield from child.walk(depth + 1)

    def depth(self) -> int:
        return max(d for _, d in self.walk())

    def __eq__(self, other):
        return (isinstance(other, Node) and self.kind == other.kind
                and self.iterations == other.iterations and self.rule == other.rule
                and self.children == other.children)

    __hash__ = None


@dataclass(frozen=True)
class ExecutionBudget:
    max_steps: int = DEFAULT_MAX_STEPS
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


class StepCounter:
    """Shared countdown of rule applications for one grammar execution."""

    def __init__(self, max_steps: int = DEFAULT_MAX_STEPS):
        self.left = max_steps
        self.truncated = False

    @property
    def exhausted(self) -> bool:
        return self.left <= 0

    def take(self) -> bool:
        if self.left <= 0:
            self.truncated = True
            return False
        self.left -= 1
        return True


def apply_one(grid: np.ndarray, rule: Rule, rng: np.random.Generator):
    """Rewrite one uniformly chosen occurrence. Returns (grid, changed)."""
    pos = rule.match_positions(grid)
    if len(pos) == 0:
        return grid, False
    out = grid.copy()
    changed = rule.write(out, int(pos[rng.integers(len(pos))]))
    return out, changed


def apply_all(grid: np.ndarray, rule: Rule):
    """Rewrite a greedy row-major set of non-overlapping occurrences."""
    pos = rule.match_positions(grid)
    if len(pos) == 0:
        return grid, False
    h, w = rule.shape
    width = grid.shape[1]
    taken = np.zeros(grid.shape, dtype=bool)
    out = grid.copy()
    changed = False
    for base in pos.tolist():
        r, c = divmod(base, width)
        box = taken[r:r + h, c:c + w]
        if box.any():
            continue
        box[...] = True
        changed |= rule.write(out, base)
    return out, changed


def execute_node(grid: np.ndarray, node: Node, steps: StepCounter, rng: np.random.Generator):
    """Run ``node`` on ``grid``. Returns (grid, changed); never mutates the input."""
    if node.kind == RULE:
        if not steps.take():
            return grid, False
        if node.rule.mode == ONE:
            return apply_one(grid, node.rule, rng)
        return apply_all(grid, node.rule)

    start = grid
    if node.kind == SEQUENCE:
        for _ in range(node.iterations):
            for child in node.children:
                if steps.exhausted:
                    steps.truncated = True
                    return grid, not np.array_equal(grid, start)
                grid, _ = execute_node(grid, child, steps, rng)
    elif node.kind == MARKOV:
        progress = True
        while progress and not steps.exhausted:
            progress = False
            for child in node.children:
                grid, progress = execute_node(grid, child, steps, rng)
                if progress or steps.exhausted:
                    break
    else:
        raise ValueError(f"unknown node kind {node.kind!r}")
    return grid, not np.array_equal(grid, start)


def validate_tree(root: Node) -> list[str]:
    """Structural violations of a grammar tree; empty when valid."""
    problems = []
    if root.kind != SEQUENCE:
        problems.append("root must be a sequence node")

    def visit(node: Node, depth: int, in_markov: bool):
        if depth > MAX_DEPTH:
            problems.append(f"max depth exceeded at depth {depth}")
        if node.kind == RULE:
            if node.children:
                problems.append("rule node has children")
            rule = node.rule
            if rule is None:
                problems.append("rule node without rule")
                return
            if rule.antecedent.shape != rule.consequent.shape:
                problems.append("rule shapes differ")
                return
            writes = rule.consequent != WILDCARD
            if not np.any(writes & (rule.consequent != rule.antecedent)):
                problems.append("rule cannot change the grid")
            return
        if node.kind not in (SEQUENCE, MARKOV):
            problems.append(f"unknown node kind {node.kind!r}")
            return
        if node.kind == MARKOV and in_markov:
            problems.append("markov node inside markov node")
        if not 1 <= len(node.children) <= MAX_CHILDREN:
            problems.append(f"{node.kind} node has {len(node.children)} children")
        if node.kind == SEQUENCE and node.iterations < 1:
            problems.append("sequence iterations must be >= 1")
        for child in node.children:
            visit(child, depth + 1, in_markov or node.kind == MARKOV)

    visit(root, 0, False)
    return problems


def execute_grammar(env: np.ndarray, root: Node, budget: ExecutionBudget | None = None) -> np.ndarray:
    """Run a grammar on a copy of ``env``; deterministic in ``budget.rng_seed``."""
    budget = budget or ExecutionBudget()
    problems = validate_tree(root)
    if problems:
        raise ValueError("invalid grammar: " + "; ".join(problems))
    rng = np.random.default_rng(budget.rng_seed)
    steps = StepCounter(budget.max_steps)
    out, _ = execute_node(np.array(env, dtype=np.int16), root, steps, rng)
    if steps.truncated:
        logger.debug("grammar execution truncated after %d steps", budget.max_steps)
    return out
