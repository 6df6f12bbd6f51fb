import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mjlearn.evolution import random_tree
from mjlearn.grid import infer_alphabet
from mjlearn.pipeline import LearnParams, prepare
from mjlearn.relations import classify_neutral
from mjlearn.rules import InitSpec
from mjlearn.serialize import (bundle_document, dumps, grammar_document, load, parse_bundle,
                               parse_grammar, save)

from samples import FLOWERS, LEVEL48


@pytest.fixture(scope="module")
def pool_and_alpha():
    alpha = infer_alphabet(FLOWERS)
    sample = alpha.encode(FLOWERS)
    alpha = classify_neutral(alpha, None, sample)
    _, _, _, pool = prepare(sample, alpha, LearnParams(window=3, top_k=2, wildcard_rate=0.3), 0)
    return pool, alpha


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_grammar_roundtrip(pool_and_alpha, seed):
    pool, alpha = pool_and_alpha
    root = random_tree(pool, np.random.default_rng(seed))
    doc = json.loads(dumps(grammar_document(root, alpha)))
    back, alpha2, init = parse_grammar(doc)
    assert back == root
    assert alpha2 == alpha
    assert init == InitSpec()


def test_document_keeps_init_and_meta(tmp_path):
    alpha = classify_neutral(infer_alphabet(LEVEL48), ["-"])
    sample = alpha.encode(LEVEL48)
    init = InitSpec.from_sample(sample, "floor")
    _, _, _, pool = prepare(sample, alpha, LearnParams(init="floor"), 0)
    root = random_tree(pool, np.random.default_rng(0))
    save(grammar_document(root, alpha, init, shape=[12, 48], seed=5), tmp_path / "g.json")
    doc = load(tmp_path / "g.json")
    assert doc["seed"] == 5 and doc["alphabet"] == {"symbols": "-?BEPX", "neutral": "-"}
    back, alpha2, init2 = parse_grammar(doc)
    assert init2 == init and back == root
    assert alpha2.decode(init2.build(12, 48, alpha2))[-1] == "X" * 48


def test_wrong_format_rejected():
    with pytest.raises(ValueError, match="not a grammar document"):
        parse_grammar({"format": "something-else"})
    with pytest.raises(ValueError, match="not a bundle document"):
        parse_bundle({"format": "something-else"})


def test_bundle_roundtrip(pool_and_alpha):
    pool, alpha = pool_and_alpha
    trees = [random_tree(pool, np.random.default_rng(s)) for s in range(2)]
    entries = [{"grammar": t, "init": InitSpec(), "fitness": -1.0} for t in trees]
    doc = json.loads(dumps(bundle_document(entries, [(0, 8), (8, 16)], 14, 8, alpha)))
    grammars, inits, bounds, height, width, alpha2 = parse_bundle(doc)
    assert grammars == trees and bounds == [(0, 8), (8, 16)] and height == 14 and width == 8
    assert doc["chunks"][0]["fitness"] == -1.0
