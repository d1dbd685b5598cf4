import random

import pytest
from hypothesis import given, settings, strategies as st

from nestedwalk.catalog import (echo_transducer, guarded_echo_transducer, parity_relabeler,
                                sorting_alphabet, sorting_transducer, subhedge_annotator,
                                swap_relabeler)
from nestedwalk.compose import (NotDeterministicFirstStage, NotLetterToLetter, annotator,
                                compose_hu, compose_hu_codet, compose_relabeling, remove_lookaround)
from nestedwalk.generators import random_vpa
from nestedwalk.nested_words import NestedWord, StructuredAlphabet, enumerate_nested_words
from nestedwalk.twovpt import evaluate_d2vpt, materialize, run_d2vpt
from nestedwalk.vpa import Vpt, evaluate_vpt, is_unambiguous

AX = StructuredAlphabet(("a", "b"), ("x",))
S2 = sorting_alphabet(2)


def sequential(first, second, w):
    """Reference: run the first stage, then the second on its output."""
    outs = evaluate_vpt(first, w)
    if len(outs) != 1:
        return None
    mid = NestedWord(second.alphabet, next(iter(outs)))
    return run_d2vpt(second, mid)


def agree(composed, first, second, alphabet, max_len):
    for w in enumerate_nested_words(alphabet, max_len):
        assert run_d2vpt(composed, w) == sequential(first, second, w), w.symbols


def test_deterministic_first_stage():
    a, b = swap_relabeler(S2, "1", "2"), sorting_transducer(2)
    agree(compose_hu(a, b), a, b, S2, 8)


def test_codeterministic_first_stage():
    a, b = parity_relabeler(S2, "1", "2"), sorting_transducer(2)
    agree(compose_hu_codet(a, b), a, b, S2, 8)


def test_unambiguous_relabeling():
    a = subhedge_annotator(AX)
    b = echo_transducer(a.output_alphabet)
    agree(compose_relabeling(b, a), a, b, AX, 8)


def test_composition_is_streaming():
    a, b = swap_relabeler(S2, "1", "2"), sorting_transducer(2)
    c = compose_hu(a, b)
    w = NestedWord(S2, ("2", "1", "r", "2", "r", "r", "1", "r"))
    stats = {}
    assert evaluate_d2vpt(c, w, "streaming", stats) == sequential(a, b, w)
    assert stats["peak_memory"] <= w.max_depth + 3 + 2


def test_remove_lookaround():
    t = guarded_echo_transducer(AX)
    plain = remove_lookaround(t)
    assert plain.lookaround is None
    for w in enumerate_nested_words(AX, 8):
        assert run_d2vpt(plain, w) == evaluate_d2vpt(t, w, "checked")


def test_guarded_echo_example():
    out = evaluate_d2vpt(guarded_echo_transducer(AX), NestedWord(AX, ("a", "b", "x", "x")), "checked")
    assert out[:4] == ("<L>", "a", "N", "b")


def test_materialized_composition_matches_lazy():
    a, b = parity_relabeler(S2, "1", "2"), sorting_transducer(2)
    lazy = compose_hu_codet(a, b)
    m = materialize(lazy)
    for w in enumerate_nested_words(S2, 8):
        assert run_d2vpt(m, w) == run_d2vpt(lazy, w)


def test_first_stage_requirements():
    b = sorting_transducer(2)
    with pytest.raises(NotDeterministicFirstStage):
        compose_hu(parity_relabeler(S2, "1", "2"), b)
    with pytest.raises(NotDeterministicFirstStage):
        ann = subhedge_annotator(S2)
        compose_hu_codet(ann, echo_transducer(ann.output_alphabet))
    doubling = swap_relabeler(S2, "1", "2")
    doubling = Vpt(doubling.automaton, tuple(o + o for o in doubling.output), S2)
    with pytest.raises(NotLetterToLetter):
        compose_hu(doubling, b)


def test_annotator_tags_checker_states():
    ann = annotator(subhedge_annotator(AX).automaton)
    (out,) = evaluate_vpt(ann, NestedWord(AX, ("a", "x")))
    assert len(out) == 2 and out[0].startswith("a~") and out[1].startswith("x~")


def _random_l2l(rng, det):
    auto = random_vpa(rng, S2, n_states=3, density=0.7, deterministic=det)
    outs = []
    for rule in auto.rules:
        outs.append((rng.choice(S2.calls) if rule[0] == "push" else "r",))
    return Vpt(auto, tuple(outs), S2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_random_deterministic_first_stages(seed):
    a = _random_l2l(random.Random(seed), det=True)
    b = sorting_transducer(2)
    agree(compose_hu(a, b), a, b, S2, 6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_random_unambiguous_relabelings(seed):
    a = _random_l2l(random.Random(seed), det=False)
    if not is_unambiguous(a.automaton):
        return
    b = sorting_transducer(2)
    agree(compose_relabeling(b, a), a, b, S2, 6)
