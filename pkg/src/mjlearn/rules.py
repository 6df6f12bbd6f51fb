"""Relation-bounded rule synthesis and random grammar-node sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import DTYPE, WILDCARD, Alphabet, Pattern
from .interpreter import ALL, MARKOV, ONE, SEQUENCE, Node, Rule
from .relations import RelationTable

ANCHORING = "anchoring"
PROGRESSIVE = "progressive"
INIT_POLICIES = ("blank", "floor", "copy-border")

ONE_WEIGHT = 3
ALL_WEIGHT = 1
MAX_ITERATIONS = 10
NESTED_PROB = 0.25
DEFAULT_MAX_RULES = 5000
DEFAULT_WILDCARD_RATE = 0.05


@dataclass(frozen=True)
class InitSpec:
    """How to build an initial environment; ``template`` is kept so grammars
    can be run later without the sample."""

    policy: str = "blank"
    template: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def from_sample(cls, sample: np.ndarray, policy: str = "blank", floor_rows: int = 1) -> "InitSpec":
        if policy not in INIT_POLICIES:
            raise ValueError(f"unknown init policy {policy!r}")
        if sample.size == 0:
            raise ValueError("empty sample")
        if policy == "floor":
            if not 1 <= floor_rows <= sample.shape[0]:
                raise ValueError("floor_rows out of range")
            tpl = sample[-floor_rows:]
        elif policy == "copy-border":
            tpl = sample[:, :1]
        else:
            tpl = np.empty((0, 0), dtype=DTYPE)
        return cls(policy, tuple(tuple(int(v) for v in row) for row in tpl))

    def build(self, height: int, width: int, alphabet: Alphabet) -> np.ndarray:
        if not alphabet.neutral:
            raise ValueError(f"init policy {self.policy!r} needs a neutral symbol")
        env = np.full((height, width), min(alphabet.neutral), dtype=DTYPE)
        tpl = np.array(self.template, dtype=DTYPE)
        if self.policy == "floor":
            rows = min(len(tpl), height)
            cols = np.arange(width) % tpl.shape[1]
            env[height - rows:] = tpl[len(tpl) - rows:][:, cols]
        elif self.policy == "copy-border":
            env[:, 0] = tpl[np.arange(height) % tpl.shape[0], 0]
        return env


def init_environment(sample: np.ndarray, alphabet: Alphabet, policy: str = "blank",
                     shape: tuple[int, int] | None = None, floor_rows: int = 1) -> np.ndarray:
    """Initial environment built from ``sample``; ``shape`` defaults to the sample's."""
    height, width = shape or sample.shape
    return InitSpec.from_sample(sample, policy, floor_rows).build(height, width, alphabet)


@dataclass(frozen=True)
class RelationBoundedRule:
    rule: Rule
    source: tuple  # (Q, P, P', offset) as pattern indices into the relation table
    distance: float
    kind: str = PROGRESSIVE


@dataclass
class RulePool:
    rules: list[RelationBoundedRule]
    one_weight: int = ONE_WEIGHT
    all_weight: int = ALL_WEIGHT
    patterns: list[Pattern] = field(default_factory=list)

    def __len__(self):
        return len(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    @property
    def p_one(self) -> float:
        return self.one_weight / (self.one_weight + self.all_weight)

    def anchoring(self) -> list[RelationBoundedRule]:
        return [r for r in self.rules if r.kind == ANCHORING]


def _compose(q: np.ndarray, p: np.ndarray, p2: np.ndarray, off):
    """Antecedent Q+P and consequent Q+P' on their bounding box, or None on conflict.

    Q sits at the origin and P at ``-off`` since the offset is q - p.
    """
    pr, pc = -off[0], -off[1]
    (qh, qw), (ph, pw) = q.shape, p.shape
    top, left = min(0, pr), min(0, pc)
    h = max(qh, pr + ph) - top
    w = max(qw, pc + pw) - left
    ante = np.full((h, w), WILDCARD, dtype=DTYPE)
    qr, qc = -top, -left
    ante[qr:qr + qh, qc:qc + qw] = q
    prr, pcc = pr - top, pc - left
    q_mask = np.zeros((h, w), dtype=bool)
    q_mask[qr:qr + qh, qc:qc + qw] = True
    region = (slice(prr, prr + ph), slice(pcc, pcc + pw))
    overlap = q_mask[region]
    if np.any(ante[region][overlap] != p[overlap]) or np.any(ante[region][overlap] != p2[overlap]):
        return None
    ante[region] = p
    cons = ante.copy()
    cons[region] = p2
    p_mask = np.zeros((h, w), dtype=bool)
    p_mask[region] = True
    return ante, cons, p_mask


def build_rule_pool(table: RelationTable, alphabet: Alphabet, rng: np.random.Generator,
                    wildcard_rate: float = DEFAULT_WILDCARD_RATE,
                    init_env: np.ndarray | None = None,
                    max_rules: int = DEFAULT_MAX_RULES) -> RulePool:
    """Turn (Q, P, P') triples sharing one positioning offset into rewrite rules.

    The antecedent is Q with P at the offset, the consequent swaps P for P'.
    Rules that would overwrite a non-neutral cell, or whose footprints
    conflict, are skipped. Identical rules are kept once, nearest first, up
    to ``max_rules``. Antecedent cells outside P may then turn into
    wildcards, and each rule gets a One/All mode at 3:1.
    """
    if not 0 <= wildcard_rate <= 1:
        raise ValueError("wildcard_rate must be in [0, 1]")
    neutral = np.zeros(len(alphabet) + 1, dtype=bool)
    for i in alphabet.neutral:
        neutral[i] = True
    arrays = [p.array() for p in table.patterns]
    groups = table.offsets()

    candidates = []
    for (qi, off), targets in sorted(groups.items()):
        if len(targets) < 2:
            continue
        for pi in sorted(targets):
            for pj in sorted(targets):
                if pi != pj:
                    candidates.append((targets[pi], qi, off, pi, pj))
    candidates.sort()

    seen = set()
    built = []
    for dist, qi, off, pi, pj in candidates:
        composed = _compose(arrays[qi], arrays[pi], arrays[pj], off)
        if composed is None:
            continue
        ante, cons, p_mask = composed
        changed = cons != ante
        if not np.any(changed) or not np.all(neutral[ante[changed]]):
            continue
        key = (ante.shape, ante.tobytes(), cons.tobytes())
        if key in seen:
            continue
        seen.add(key)
        built.append((dist, (qi, pi, pj, off), ante, cons, p_mask))
        if len(built) >= max_rules:
            break

    if not built:
        raise ValueError(
            f"sample yields no admissible rules ({len(table.patterns)} patterns, "
            f"{len(table)} relations, {len(candidates)} triples)")

    rules = []
    p_one = ONE_WEIGHT / (ONE_WEIGHT + ALL_WEIGHT)
    for dist, source, ante, cons, p_mask in built:
        ante = ante.copy()
        cons = cons.copy()
        if wildcard_rate > 0:
            # only Q-only cells may become wildcards; P's footprint stays literal
            free = (ante != WILDCARD) & ~p_mask
            drop = free & (rng.random(ante.shape) < wildcard_rate)
            ante[drop] = WILDCARD
            cons[drop] = WILDCARD
        mode = ONE if rng.random() < p_one else ALL
        rule = Rule(ante, cons, mode)
        kind = classify_rule(rule, init_env) if init_env is not None else PROGRESSIVE
        rules.append(RelationBoundedRule(rule, source, dist, kind))
    return RulePool(rules, patterns=list(table.patterns))


def classify_rule(rule, init_env: np.ndarray) -> str:
    """Anchoring iff the antecedent occurs in the initial environment."""
    if isinstance(rule, RelationBoundedRule):
        rule = rule.rule
    return ANCHORING if len(rule.matches(init_env)) else PROGRESSIVE


def sample_rule_node(pool: RulePool, rng: np.random.Generator) -> Node:
    if not len(pool):
        raise ValueError("empty rule pool")
    entry = pool.rules[rng.integers(len(pool))]
    mode = ONE if rng.random() < pool.p_one else ALL
    return Node.leaf(entry.rule.with_mode(mode))


def sample_ruleset_node(pool: RulePool, rng: np.random.Generator, allow_markov: bool = True,
                        depth_remaining: int = 2) -> Node:
    """Random Sequence or Markov node with 1-5 children.

    Children nest further rule-set nodes only while ``depth_remaining > 1``,
    and a Markov node never gets a Markov descendant.
    """
    if depth_remaining < 1:
        raise ValueError("depth_remaining must be >= 1")
    markov = allow_markov and rng.random() < 0.5
    children = []
    for _ in range(rng.integers(1, 6)):
        if depth_remaining > 1 and rng.random() < NESTED_PROB:
            children.append(sample_ruleset_node(pool, rng, allow_markov and not markov,
                                                depth_remaining - 1))
        else:
            children.append(sample_rule_node(pool, rng))
    if markov:
        return Node(MARKOV, children)
    return Node(SEQUENCE, children, int(rng.integers(1, MAX_ITERATIONS + 1)))

