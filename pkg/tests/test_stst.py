import random

import pytest
from hypothesis import given, settings, strategies as st

from nestedwalk.catalog import (double_copy_transducer, echo_transducer, sorting_alphabet,
                                sorting_transducer)
from nestedwalk.nested_words import NestedWord, StructuredAlphabet, enumerate_nested_words, random_nested_word
from nestedwalk.stst import (NoFinalOutput, Reg, Stst, copy_stst, d2vpt_to_stst, evaluate_stst,
                             exponential_stst, fold_output_matrix, matrix_support,
                             output_matrix_oracle, run_stst)
from nestedwalk.twovpa import fold_traversal
from nestedwalk.twovpt import Rejected, TwoVpt, run_d2vpt

AX = StructuredAlphabet(("a", "b"), ("x",))
S2 = sorting_alphabet(2)


@pytest.mark.parametrize("n", range(0, 13))
def test_exponential_output(n):
    s = exponential_stst()
    w = NestedWord(s.alphabet, ("c", "r") * n)
    assert evaluate_stst(s, w) == ("a",) * (2 ** n - 1)


def test_exponential_is_not_copyless():
    assert not exponential_stst().is_copyless()
    assert copy_stst(AX).is_copyless()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_copy_outputs_its_input(seed):
    w = random_nested_word(AX, random.Random(seed), 20, 5)
    assert evaluate_stst(copy_stst(AX), w) == w.symbols


def test_stst_errors():
    bare = Stst(AX, ("a",), ("q", "z"), "q", ("g",), ("X",),
                {("q", "a"): ("z", "g", {})}, {("z", "x", "g"): ("z", {})}, {"q": ()})
    with pytest.raises(NoFinalOutput):
        evaluate_stst(bare, NestedWord(AX, ("a", "x")))
    with pytest.raises(Rejected):
        evaluate_stst(bare, NestedWord(AX, ("b", "x")))
    assert run_stst(bare, NestedWord(AX, ())) == ()
    with pytest.raises(ValueError, match="primed"):
        Stst(AX, ("a",), ("q",), "q", ("g",), ("X",), {}, {}, {"q": (Reg("X", True),)})
    with pytest.raises(ValueError, match="undeclared"):
        Stst(AX, ("a",), ("q",), "q", ("g",), ("X",), {("q", "a"): ("q", "g", {"Y": ()})}, {}, {})


def test_unset_registers_hold_the_empty_word():
    y = Reg("Y")
    s = Stst(AX, ("a",), ("q",), "q", ("g",), ("X", "Y"),
             {("q", "a"): ("q", "g", {"X": ("a",)})},
             {("q", "x", "g"): ("q", {"X": (Reg("X", True), Reg("X"))})}, {"q": (y, Reg("X"), y)})
    assert evaluate_stst(s, NestedWord(AX, ("a", "a", "x", "x"))) == ("a", "a")


@pytest.mark.parametrize("build", [lambda: sorting_transducer(2), lambda: echo_transducer(AX)])
def test_output_matrix_fold_matches_simulation(build):
    t = build()
    alphabet = t.alphabet
    n = len(t.automaton.states)
    for w in enumerate_nested_words(alphabet, 6):
        m = fold_output_matrix(t, w)
        assert m == output_matrix_oracle(t, w)
        assert matrix_support(m, n) == tuple(fold_traversal(t.automaton, w))


@pytest.mark.parametrize("build,alphabet,max_len", [
    (lambda: sorting_transducer(2), S2, 8),
    (lambda: echo_transducer(AX), AX, 8),
    (lambda: double_copy_transducer(AX, distinct=False), AX, 6),
])
def test_translation_preserves_the_function(build, alphabet, max_len):
    t = build()
    s = d2vpt_to_stst(t)
    for w in enumerate_nested_words(alphabet, max_len):
        assert run_stst(s, w) == run_d2vpt(t, w)


def test_translation_stack_is_the_nesting_depth():
    t = sorting_transducer(2)
    s = d2vpt_to_stst(t)
    stats = {}
    w = NestedWord(S2, ("1",) * 7 + ("r",) * 7)
    evaluate_stst(s, w, stats)
    assert stats["peak_stack"] == 7


def test_orientation_matters():
    # concatenating the inner matrix before the stacked prefix breaks sorting
    t = sorting_transducer(2)
    wrong = d2vpt_to_stst(t, orientation="prefix-current")
    words = list(enumerate_nested_words(S2, 6))
    assert any(run_stst(wrong, w) != run_d2vpt(t, w) for w in words)
    with pytest.raises(ValueError):
        d2vpt_to_stst(t, orientation="sideways")


def test_silent_transducer_translates_to_empty_outputs():
    echo = echo_transducer(AX)
    silent = TwoVpt(echo.automaton, [()] * len(echo.output), echo.output_alphabet)
    s = d2vpt_to_stst(silent)
    for w in enumerate_nested_words(AX, 6):
        assert run_stst(s, w) == ()
