import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mjlearn.grid import Pattern, infer_alphabet, scan_patterns
from mjlearn.relations import build_relation_table, classify_neutral, distance, offset

import oracles
from samples import LEVEL48


def test_distance_examples():
    assert distance((2, 2), (2, 2)) == 0
    assert distance((3, 4), (0, 0)) == 5.0
    assert distance((1, 2), (4, 6)) == 5.0


def test_offset_examples():
    assert offset((1, 1), (1, 1)) == (0, 0)
    assert offset((3, 4), (1, 1)) == (2, 3)


@given(st.tuples(st.integers(-50, 50), st.integers(-50, 50)),
       st.tuples(st.integers(-50, 50), st.integers(-50, 50)))
def test_offset_antisymmetric_distance_symmetric(q, p):
    assert offset(q, p) == tuple(-v for v in offset(p, q))
    assert distance(q, p) == distance(p, q) == math.hypot(*offset(q, p))


def test_single_occurrence_has_no_self_relation():
    pat = Pattern.from_array(np.array([[0]]), [(0, 0)])
    assert len(build_relation_table([pat], top_k=3, max_distance=10)) == 0


def test_nearest_p_and_offset():
    q = Pattern.from_array(np.array([[0]]), [(0, 0)])
    p = Pattern.from_array(np.array([[1]]), [(0, 1), (0, 5)])
    table = build_relation_table([q, p], top_k=1, max_distance=3)
    rels = table.relations[(0, 1)]
    assert len(rels) == 1
    assert rels[0].offset == (0, -1) and rels[0].distance == 1.0


def test_max_distance_filters():
    q = Pattern.from_array(np.array([[0]]), [(0, 0)])
    p = Pattern.from_array(np.array([[1]]), [(0, 1), (0, 5)])
    assert (0, 1) not in build_relation_table([q, p], top_k=1, max_distance=0.5).relations


def test_ties_go_to_row_major_order():
    q = Pattern.from_array(np.array([[0]]), [(1, 1)])
    p = Pattern.from_array(np.array([[1]]), [(2, 1), (1, 2), (1, 0), (0, 1)])
    rels = build_relation_table([q, p], top_k=2, max_distance=5).relations[(0, 1)]
    assert [r.p for r in rels] == [(0, 1), (1, 0)]


def test_empty_pattern_is_skipped_with_warning(caplog):
    q = Pattern.from_array(np.array([[0]]), [(0, 0)])
    ghost = Pattern.from_array(np.array([[1]]), [])
    with caplog.at_level("WARNING"):
        table = build_relation_table([q, ghost], top_k=1, max_distance=5)
    assert len(table) == 0
    assert "no occurrences" in caplog.text


@given(arrays(np.int16, st.tuples(st.integers(2, 7), st.integers(2, 7)), elements=st.integers(0, 2)),
       st.integers(1, 2), st.integers(1, 4), st.floats(0.5, 6))
def test_relations_match_brute_force(g, n, top_k, max_distance):
    pats = scan_patterns(g, n)
    table = build_relation_table(pats, top_k, max_distance)
    for qi, q in enumerate(pats):
        for pi, p in enumerate(pats):
            expected = oracles.nearest_relations(list(q.occurrences), list(p.occurrences),
                                                 qi == pi, top_k, max_distance)
            got = [(r.q, r.p, r.distance, r.offset) for r in table.relations.get((qi, pi), [])]
            assert got == expected


def test_merge_unifies_patterns_by_cells():
    a = scan_patterns(np.array([[0, 0, 1]], dtype=np.int16), 1)
    b = scan_patterns(np.array([[1, 1, 2]], dtype=np.int16), 1)
    merged = build_relation_table(a, 1, 2).merge(build_relation_table(b, 1, 2))
    assert [p.cells for p in merged.patterns] == [((0,),), ((1,),), ((2,),)]
    assert len(merged) == len(build_relation_table(a, 1, 2)) + len(build_relation_table(b, 1, 2))


def test_classify_neutral_from_config():
    alpha = infer_alphabet(LEVEL48)
    alpha = classify_neutral(alpha, ["-"])
    assert alpha.neutral_chars == ["-"]
    assert alpha.id_of("X") not in alpha.neutral


def test_classify_neutral_most_frequent():
    rows = ["-" * 9 + "X"] * 10  # 90% air
    alpha = infer_alphabet(rows)
    assert classify_neutral(alpha, None, alpha.encode(rows)).neutral_chars == ["-"]


def test_classify_neutral_unknown_symbol():
    with pytest.raises(ValueError, match="not in the alphabet"):
        classify_neutral(infer_alphabet(["ab"]), ["z"])
