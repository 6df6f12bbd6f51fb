import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mjlearn.grid import (WILDCARD, Alphabet, find_occurrences, infer_alphabet, match_at,
                          scan_patterns)

import oracles
from samples import LEVEL48


def grids(max_side=8, symbols=3):
    shape = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shape.flatmap(lambda s: arrays(np.int16, s, elements=st.integers(0, symbols - 1)))


def test_infer_alphabet_two_symbols():
    a = infer_alphabet(["ab", "ba"])
    assert a.symbols == ("a", "b") and len(a) == 2
    assert a.neutral == frozenset()


def test_infer_alphabet_uniform():
    assert infer_alphabet(["aaaaa"] * 5).symbols == ("a",)


def test_infer_alphabet_level_matches_character_scan():
    expected = len(set("".join(LEVEL48)))  # independent one-line scan
    assert len(infer_alphabet(LEVEL48)) == expected == 6


def test_wildcard_is_not_a_symbol():
    a = infer_alphabet(["ab"])
    assert WILDCARD not in range(len(a))
    assert a.id_of("*") == WILDCARD
    with pytest.raises(ValueError):
        infer_alphabet(["a*"])


@pytest.mark.parametrize("empty", ["", [], [""]])
def test_empty_sample(empty):
    with pytest.raises(ValueError, match="empty sample"):
        infer_alphabet(empty)


def test_encode_decode_roundtrip():
    a = infer_alphabet(["ab", "ba"])
    g = a.encode(["ab", "ba"])
    assert g.tolist() == [[0, 1], [1, 0]]
    assert a.decode(g) == ["ab", "ba"]


def test_encode_rejects_foreign_symbol():
    with pytest.raises(ValueError, match="not in the alphabet"):
        Alphabet(("a",)).encode(["ab"])


def test_scan_3x3_has_four_windows():
    g = np.arange(9, dtype=np.int16).reshape(3, 3)
    assert sum(len(p.occurrences) for p in scan_patterns(g, 2)) == 4


def test_scan_uniform_one_pattern():
    assert len(scan_patterns(np.zeros((4, 5), dtype=np.int16), 2)) == 1


def test_scan_checker_counts():
    g = np.array([[0, 1, 0, 1], [1, 0, 1, 0]], dtype=np.int16)
    pats = scan_patterns(g, 2)
    # brute-force enumeration of the 3 windows
    assert [p.occurrences for p in pats] == [((0, 0), (0, 2)), ((0, 1),)]


def test_scan_window_too_large():
    with pytest.raises(ValueError, match="window exceeds grid"):
        scan_patterns(np.zeros((2, 5), dtype=np.int16), 3)


def test_match_at_wildcards():
    g = np.array([[0, 1]], dtype=np.int16)
    assert match_at(g, [[0, WILDCARD]], (0, 0))
    assert match_at(g, [[WILDCARD, WILDCARD]], (0, 0))
    assert not match_at(np.array([[1, 0, 1]], dtype=np.int16), [[0, WILDCARD]], (0, 0))
    with pytest.raises(IndexError):
        match_at(g, [[0, 1]], (0, 1))


def test_find_occurrences_examples():
    assert find_occurrences(np.array([[0, 0, 0]], dtype=np.int16), [[0, 0]]) == [(0, 0), (0, 1)]
    assert find_occurrences(np.zeros((2, 3), dtype=np.int16), [[0]]) == [
        (0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert find_occurrences(np.zeros((2, 3), dtype=np.int16), [[1]]) == []


@given(grids(), st.integers(1, 3))
def test_scan_partitions_every_window(g, n):
    if n > min(g.shape):
        return
    pats = scan_patterns(g, n)
    positions = [o for p in pats for o in p.occurrences]
    assert len(positions) == len(set(positions)) == (g.shape[0] - n + 1) * (g.shape[1] - n + 1)
    assert len(set(pats)) == len(pats)
    for p in pats:
        assert all(match_at(g, p, o) for o in p.occurrences)


@given(grids(6), st.data())
def test_find_occurrences_matches_oracle(g, data):
    h = data.draw(st.integers(1, g.shape[0]))
    w = data.draw(st.integers(1, g.shape[1]))
    pat = data.draw(arrays(np.int16, (h, w), elements=st.integers(-1, 2)))
    assert find_occurrences(g, pat) == oracles.occurrences(oracles.to_lists(g), oracles.to_lists(pat))
