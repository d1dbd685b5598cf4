import random

import pytest
from hypothesis import given, settings, strategies as st

from nestedwalk.nested_words import (LMARK, RMARK, AlphabetMismatch, NestedWord, NotWellNested,
                                     StructuredAlphabet, UnknownSymbol, concat, decompose, empty,
                                     enumerate_nested_words, parse_nested_word, random_nested_word,
                                     serialize, wrap)

ONE = StructuredAlphabet(("c",), ("r",))
TWO = StructuredAlphabet(("a", "b"), ("x", "y"))


def catalan(n):
    out = 1
    for k in range(n):
        out = out * 2 * (2 * k + 1) // (k + 2)
    return out


def test_parse_and_serialize_roundtrip():
    w = parse_nested_word("a b x y", TWO)
    assert serialize(w) == "a b x y"
    assert w.matching == {1: 4, 2: 3}
    assert w.max_depth == 2
    assert w.marked() == (LMARK, "a", "b", "x", "y", RMARK)


def test_unmatched_return_reports_position():
    with pytest.raises(NotWellNested) as e:
        parse_nested_word("a x x", TWO)
    assert e.value.position == 3


def test_unmatched_call_reports_position():
    with pytest.raises(NotWellNested) as e:
        parse_nested_word("a a x", TWO)
    assert e.value.position == 1


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        parse_nested_word("a q x", TWO)


def test_markers_are_reserved():
    with pytest.raises(ValueError):
        StructuredAlphabet((LMARK,), ("r",))
    with pytest.raises(ValueError):
        StructuredAlphabet(("a",), ("a",))


def test_one_based_access_and_depth():
    w = parse_nested_word("c c r r c r", ONE)
    assert w[1] == "c" and w[6] == "r"
    with pytest.raises(IndexError):
        w[0]
    assert w.depth_at(2) == 1
    assert w.depth_at(5) == 0
    assert w.height_after(2) == 2


@pytest.mark.parametrize("n", range(0, 7))
def test_enumeration_counts_are_catalan(n):
    words = [w for w in enumerate_nested_words(ONE, 2 * n) if len(w) == 2 * n]
    assert len(words) == catalan(n)
    assert len(set(w.symbols for w in words)) == len(words)


def test_enumeration_count_two_letter_alphabet():
    # (#calls * #returns)^n * Catalan(n) summed over 2n <= 8
    assert sum(1 for _ in enumerate_nested_words(TWO, 8)) == sum(4 ** n * catalan(n) for n in range(5))


def test_enumeration_is_ordered_by_length():
    lengths = [len(w) for w in enumerate_nested_words(TWO, 6)]
    assert lengths == sorted(lengths)


def test_concat_and_wrap():
    u = parse_nested_word("a x", TWO)
    v = parse_nested_word("b y", TWO)
    assert concat(u, v).symbols == ("a", "x", "b", "y")
    assert wrap("b", u, "y").symbols == ("b", "a", "x", "y")
    assert concat(empty(TWO), u) == u
    with pytest.raises(AlphabetMismatch):
        concat(u, parse_nested_word("c r", ONE))
    with pytest.raises(UnknownSymbol):
        wrap("x", u, "y")


def _rebuild(blocks):
    out = []
    for c, inner, r in blocks:
        out += [c] + _rebuild(inner) + [r]
    return out


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.integers(0, 6))
def test_random_words_respect_bounds(seed, max_len, max_depth):
    w = random_nested_word(TWO, random.Random(seed), max_len, max_depth)
    assert len(w) <= max_len
    assert w.max_depth <= max_depth
    assert len(w) % 2 == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decompose_rebuilds_the_word(seed):
    w = random_nested_word(TWO, random.Random(seed), 24, 5)
    assert tuple(_rebuild(decompose(w))) == w.symbols
    assert NestedWord(TWO, w.symbols).matching == w.matching
