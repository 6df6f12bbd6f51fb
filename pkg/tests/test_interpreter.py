import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mjlearn.interpreter import (ALL, ONE, ExecutionBudget, Node, Rule, StepCounter, apply_all,
                                 apply_one, execute_grammar, execute_node, validate_tree)

import oracles

A, B = 0, 1
a_to_b = Rule([[A]], [[B]], ONE)
aa_to_bb = Rule([[A, A]], [[B, B]], ALL)


def row(*cells):
    return np.array([cells], dtype=np.int16)


def test_apply_one_rewrites_exactly_one():
    out, changed = apply_one(row(A, A), a_to_b, np.random.default_rng(0))
    assert changed and sorted(out[0].tolist()) == [A, B]


def test_apply_one_no_match():
    g = row(B, B)
    out, changed = apply_one(g, a_to_b, np.random.default_rng(0))
    assert not changed and np.array_equal(out, g)


@pytest.mark.parametrize("seed", [0, 1, 7, 12345])
def test_apply_one_uses_seeded_uniform_draw(seed):
    out, _ = apply_one(row(A, A, A), a_to_b, np.random.default_rng(seed))
    expected = int(np.random.default_rng(seed).integers(3))
    assert out[0].tolist().index(B) == expected


def test_apply_all_even_row():
    out, changed = apply_all(row(A, A, A, A), aa_to_bb)
    assert changed and out[0].tolist() == [B, B, B, B]


def test_apply_all_odd_row():
    out, _ = apply_all(row(A, A, A), aa_to_bb)
    assert out[0].tolist() == [B, B, A]


def test_apply_all_no_match():
    out, changed = apply_all(row(B, A, B), aa_to_bb)
    assert not changed and out[0].tolist() == [B, A, B]


def test_wildcard_consequent_leaves_cell():
    rule = Rule([[A, -1]], [[B, -1]], ALL)
    out, _ = apply_all(row(A, B, A, A), rule)
    assert out[0].tolist() == [B, B, B, A]


def test_inputs_are_not_mutated():
    g = row(A, A)
    apply_one(g, a_to_b, np.random.default_rng(0))
    apply_all(g, aa_to_bb)
    assert g[0].tolist() == [A, A]


@pytest.mark.parametrize("k", [1, 4, 9])
def test_markov_fills_then_stops(k):
    steps = StepCounter(1000)
    out, changed = execute_node(np.zeros((1, k), dtype=np.int16), Node.markov([Node.leaf(a_to_b)]),
                                steps, np.random.default_rng(0))
    assert changed and out.tolist() == [[B] * k]
    assert 1000 - steps.left == k + 1  # k rewrites plus the pass that found nothing


def test_sequence_iterations():
    root = Node.sequence([Node.leaf(a_to_b)], iterations=2)
    out = execute_grammar(row(A, A), root)
    assert out.tolist() == [[B, B]]


def test_never_matching_node_reports_no_change():
    never = Rule([[B, B]], [[A, A]], ONE)
    out, changed = execute_node(row(A, A), Node.sequence([Node.leaf(never)], 3), StepCounter(),
                                np.random.default_rng(0))
    assert not changed and out.tolist() == [[A, A]]


def test_budget_truncates_markov():
    steps = StepCounter(3)
    out, _ = execute_node(np.zeros((1, 5), dtype=np.int16), Node.markov([Node.leaf(a_to_b)]),
                          steps, np.random.default_rng(0))
    assert int((out == B).sum()) == 3
    assert steps.exhausted


def test_budget_truncates_sequence():
    root = Node.sequence([Node.leaf(a_to_b)], iterations=10)
    out = execute_grammar(np.zeros((1, 10), dtype=np.int16), root, ExecutionBudget(max_steps=4))
    assert int((out == B).sum()) == 4


def test_grammar_without_matches_is_identity():
    env = np.full((3, 3), B, dtype=np.int16)
    root = Node.sequence([Node.leaf(a_to_b), Node.markov([Node.leaf(aa_to_bb)])])
    assert np.array_equal(execute_grammar(env, root), env)


def test_same_seed_same_output_and_symbols_stay_in_alphabet():
    env = np.zeros((6, 6), dtype=np.int16)
    root = Node.sequence([Node.leaf(Rule([[A, A]], [[A, B]], ONE)),
                          Node.leaf(Rule([[A], [A]], [[2], [A]], ONE))], iterations=5)
    first = execute_grammar(env, root, ExecutionBudget(rng_seed=3))
    assert np.array_equal(first, execute_grammar(env, root, ExecutionBudget(rng_seed=3)))
    outputs = {execute_grammar(env, root, ExecutionBudget(rng_seed=s)).tobytes() for s in range(100)}
    assert len(outputs) > 1
    for blob in outputs:
        assert set(np.frombuffer(blob, dtype=np.int16).tolist()) <= {A, B, 2}


def _chain(depth):
    node = Node.leaf(a_to_b)
    for _ in range(depth):
        node = Node.sequence([node])
    return node


def test_validate_depth():
    assert validate_tree(_chain(3)) == []
    assert any("max depth exceeded" in v for v in validate_tree(_chain(5)))


def test_validate_markov_in_markov():
    root = Node.sequence([Node.markov([Node.sequence([Node.markov([Node.leaf(a_to_b)])])])])
    assert "markov node inside markov node" in validate_tree(root)


def test_validate_other_violations():
    assert "root must be a sequence node" in validate_tree(Node.markov([Node.leaf(a_to_b)]))
    assert any("children" in v for v in validate_tree(Node.sequence([Node.leaf(a_to_b)] * 6)))
    assert any("children" in v for v in validate_tree(Node.sequence([])))
    bad = Rule([[A, A]], [[B]], ONE)
    assert "rule shapes differ" in validate_tree(Node.sequence([Node.leaf(bad)]))
    noop = Rule([[A]], [[A]], ONE)
    assert "rule cannot change the grid" in validate_tree(Node.sequence([Node.leaf(noop)]))


def test_validate_well_formed_tree():
    # root sequence holding a rule, a markov over a rule and a sequence, and a nested sequence
    root = Node.sequence([
        Node.leaf(a_to_b),
        Node.markov([Node.leaf(aa_to_bb), Node.sequence([Node.leaf(a_to_b)], 3)]),
        Node.sequence([Node.leaf(aa_to_bb), Node.sequence([Node.leaf(a_to_b)])], 2),
    ], iterations=4)
    assert validate_tree(root) == []


def test_invalid_tree_raises_before_running():
    with pytest.raises(ValueError, match="invalid grammar"):
        execute_grammar(row(A), Node.markov([Node.leaf(a_to_b)]))


rules = st.tuples(st.integers(1, 3), st.integers(1, 3)).flatmap(
    lambda s: st.tuples(arrays(np.int16, s, elements=st.integers(-1, 2)),
                        arrays(np.int16, s, elements=st.integers(-1, 2))))
small_grids = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.int16, s, elements=st.integers(0, 2)))


@given(small_grids, rules, st.integers(0, 2**32 - 1))
def test_apply_matches_oracle(g, rule, seed):
    ante, cons = rule
    r_one, r_all = Rule(ante, cons, ONE), Rule(ante, cons, ALL)
    lg, la, lc = oracles.to_lists(g), oracles.to_lists(ante), oracles.to_lists(cons)
    out, changed = apply_one(g, r_one, np.random.default_rng(seed))
    ref, ref_changed = oracles.apply_one(lg, la, lc, np.random.default_rng(seed))
    assert out.tolist() == ref and changed == ref_changed
    out, changed = apply_all(g, r_all)
    ref, ref_changed = oracles.apply_all(lg, la, lc)
    assert out.tolist() == ref and changed == ref_changed
