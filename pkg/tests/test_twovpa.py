import random

import pytest
from hypothesis import given, settings, strategies as st

from nestedwalk.catalog import subhedge_annotator
from nestedwalk.generators import random_two_vpa
from nestedwalk.nested_words import LMARK, RMARK, NestedWord, StructuredAlphabet, concat, enumerate_nested_words, wrap
from nestedwalk.twovpa import (BW, FW, LookAround, NoAcceptingRun, TwoVpa, accepts_2vpa,
                               check_lookaround_run, compute_algebra, concat_traversal, fold_traversal,
                               is_empty_2vpa, traversal_oracle, two_vpa_to_dvpa, wrap_traversal)
from nestedwalk.vpa import accepts_vpa

AX = StructuredAlphabet(("a", "b"), ("x",))
WORDS5 = list(enumerate_nested_words(AX, 5))


def machine(seed, **kw):
    kw.setdefault("n_states", 3)
    kw.setdefault("density", 0.4)
    return random_two_vpa(random.Random(seed), AX, **kw)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_fold_matches_configuration_search(seed):
    a = machine(seed)
    for w in WORDS5:
        assert fold_traversal(a, w) == traversal_oracle(a, w)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_membership_methods_agree(seed):
    a = machine(seed)
    for w in WORDS5:
        assert accepts_2vpa(a, w, "algebra") == accepts_2vpa(a, w)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_traversals_compose(seed, wseed):
    a = machine(seed)
    rng = random.Random(wseed)
    u, v = rng.choice(WORDS5), rng.choice(WORDS5)
    tu, tv = traversal_oracle(a, u), traversal_oracle(a, v)
    assert concat_traversal(a, tu, tv) == traversal_oracle(a, concat(u, v))
    for c in AX.calls:
        assert wrap_traversal(a, c, tu, "x") == traversal_oracle(a, wrap(c, u, "x"))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_algebra_dvpa_recognizes_the_language(seed):
    a = machine(seed)
    alg = compute_algebra(a, 5000)
    d = two_vpa_to_dvpa(a, 5000).to_vpa()
    for w in enumerate_nested_words(AX, 6):
        assert alg.evaluate(w) == alg.index[fold_traversal(a, w)]
        assert accepts_vpa(d, w) == accepts_2vpa(a, w)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_algebra_witnesses_realize_their_element(seed):
    alg = compute_algebra(machine(seed), 5000)
    for i in range(len(alg)):
        assert alg.index[fold_traversal(alg.machine, alg.witness(i))] == i


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_emptiness_against_enumeration(seed):
    a = machine(seed, density=0.5)
    empty, witness = is_empty_2vpa(a, 5000)
    if empty:
        assert not any(accepts_2vpa(a, w) for w in enumerate_nested_words(AX, 8))
    else:
        assert accepts_2vpa(a, witness)


def test_fixture_emptiness(load):
    for i in range(1, 11):
        empty, witness = is_empty_2vpa(load(f"empty{i:02d}.2vpa"))
        assert empty == (i <= 7)


def test_one_pass_machine():
    rules = [("push", "s", FW, LMARK, "s", FW, "m"), ("pop", "s", FW, RMARK, "m", "f", FW)]
    rules += [("push", "s", FW, c, "s", FW, "g") for c in AX.calls]
    rules += [("pop", "s", FW, "x", "g", "s", FW)]
    a = TwoVpa(AX, ("s", "f"), "s", {"f"}, ("m", "g"), tuple(rules))
    assert a.is_deterministic
    assert all(accepts_2vpa(a, w) for w in WORDS5)
    assert is_empty_2vpa(a) == (False, NestedWord(AX, ()))


def test_rule_validation():
    with pytest.raises(ValueError, match="push"):
        TwoVpa(AX, ("s",), "s", (), ("g",), (("push", "s", FW, "x", "s", FW, "g"),))
    with pytest.raises(ValueError, match="turn forward"):
        TwoVpa(AX, ("s",), "s", (), ("g",), (("pop", "s", BW, LMARK, "g", "s", BW),))
    with pytest.raises(ValueError, match="undeclared"):
        TwoVpa(AX, ("s",), "s", (), ("g",), (("push", "s", FW, "a", "t", FW, "g"),))


def test_lookaround_labels_follow_the_unique_run():
    checker = subhedge_annotator(AX).automaton
    la = LookAround(checker, {})
    labels = check_lookaround_run(la, NestedWord(AX, ("a", "b", "x", "x", "b", "x")))
    assert labels == {1: "n", 2: "e", 3: "s", 4: "s", 5: "e", 6: "s"}


def test_lookaround_without_accepting_run():
    from nestedwalk.vpa import Vpa
    checker = Vpa(AX, ("q",), frozenset(["q"]), frozenset(), (), ())
    with pytest.raises(NoAcceptingRun):
        check_lookaround_run(LookAround(checker, {}), NestedWord(AX, ("a", "x")))
