import pytest

from nestedwalk.catalog import (double_copy_transducer, echo_transducer, retry_transducer,
                                shared_echo_transducer, sort_oracle, sorting_alphabet,
                                sorting_transducer)
from nestedwalk.fsa import factor_free_nfa, prefix_nfa
from nestedwalk.nested_words import LMARK, RMARK, NestedWord, StructuredAlphabet, enumerate_nested_words
from nestedwalk.twovpa import BW, FW, TwoVpa, accepts_2vpa
from nestedwalk.twovpt import (Diverged, NotDeterministic, Rejected, SingleUseIllFormed,
                               StepLimitExceeded, TwoVpt, evaluate_2vpt_all, evaluate_d2vpt,
                               inverse_image, is_single_use, is_single_use_auto, materialize,
                               producing_states, run_d2vpt, single_use_violations,
                               single_use_violations_simple, type_check)
from nestedwalk.vpa import Vpa

AX = StructuredAlphabet(("a", "b"), ("x",))
S2 = sorting_alphabet(2)


def marked(symbols):
    return (LMARK,) + tuple(symbols) + (RMARK,)


@pytest.mark.parametrize("n,max_len", [(2, 8), (3, 6)])
def test_sorting_matches_oracle(n, max_len):
    t = sorting_transducer(n)
    assert t.is_deterministic
    for w in enumerate_nested_words(sorting_alphabet(n), max_len):
        expected = marked(sort_oracle(w.symbols))
        assert evaluate_d2vpt(t, w, "streaming") == expected
        assert evaluate_d2vpt(t, w, "checked") == expected


def test_sorting_example():
    w = NestedWord(sorting_alphabet(3), ("2", "2", "r", "1", "r", "r", "1", "r", "3", "r"))
    out = evaluate_d2vpt(sorting_transducer(3), w)
    assert out == marked(("1", "r", "2", "1", "r", "2", "r", "r", "3", "r"))


def test_echo_and_double_copy():
    w = NestedWord(AX, ("a", "b", "x", "x"))
    assert evaluate_d2vpt(echo_transducer(AX), w) == marked(w.symbols) + ("x", "x", "b", "a")
    same = evaluate_d2vpt(double_copy_transducer(AX, distinct=False), w)
    assert same.count("a") == 2


def test_unknown_mode():
    with pytest.raises(ValueError):
        evaluate_d2vpt(echo_transducer(AX), NestedWord(AX, ()), mode="fast")


def _bouncer(final_reachable=False):
    rules = [("push", "s", FW, LMARK, "s", FW, "m"), ("pop", "s", FW, RMARK, "m", "t", BW),
             ("push", "t", BW, RMARK, "t", BW, "m"), ("pop", "t", BW, LMARK, "m", "s", FW)]
    for c in AX.calls:
        rules += [("push", "s", FW, c, "s", FW, "g"), ("pop", "t", BW, c, "g", "t", BW)]
    for r in AX.returns:
        rules += [("pop", "s", FW, r, "g", "s", FW), ("push", "t", BW, r, "t", BW, "g")]
    auto = TwoVpa(AX, ("s", "t", "f"), "s", {"f"}, ("m", "g"), tuple(rules))
    return TwoVpt(auto, [()] * len(rules), ())


def test_divergence_detection():
    t = _bouncer()
    w = NestedWord(AX, ("a", "x"))
    with pytest.raises(Diverged):
        evaluate_d2vpt(t, w, "checked")
    with pytest.raises(StepLimitExceeded):
        evaluate_d2vpt(t, w, "streaming")
    assert run_d2vpt(t, w) is None


def test_rejection_and_nondeterminism():
    rules = [("push", "s", FW, LMARK, "s", FW, "m")]
    auto = TwoVpa(AX, ("s",), "s", (), ("m",), tuple(rules))
    with pytest.raises(Rejected) as info:
        evaluate_d2vpt(TwoVpt(auto, [()], ()), NestedWord(AX, ()))
    assert (info.value.position, info.value.reason) == (1, "stuck")
    with pytest.raises(NotDeterministic):
        evaluate_d2vpt(retry_transducer(AX), NestedWord(AX, ()))


def test_all_runs_of_retry():
    outs, cyclic = evaluate_2vpt_all(retry_transducer(AX), NestedWord(AX, ("a", "x")))
    assert outs == {marked(("a", "x"))} or set(outs) == {marked(("a", "x"))}
    assert cyclic


def test_all_runs_of_deterministic_machine():
    w = NestedWord(S2, ("2", "1", "r", "r"))
    outs, cyclic = evaluate_2vpt_all(sorting_transducer(2), w)
    assert set(outs) == {evaluate_d2vpt(sorting_transducer(2), w)}
    assert not cyclic


def test_output_symbols_must_be_declared():
    auto = TwoVpa(AX, ("s",), "s", (), ("m",), (("push", "s", FW, LMARK, "s", FW, "m"),))
    with pytest.raises(ValueError, match="not declared"):
        TwoVpt(auto, [("z",)], ("a",))
    with pytest.raises(ValueError, match="one output"):
        TwoVpt(auto, [], ("a",))


@pytest.mark.parametrize("language", ["prefix", "factor"])
def test_inverse_image(language):
    t = sorting_transducer(2)
    symbols = (LMARK,) + S2.symbols + (RMARK,)
    m = prefix_nfa(symbols, (LMARK, "1")) if language == "prefix" else factor_free_nfa(symbols, ("r", "r"))
    inv = inverse_image(t, m)
    for w in enumerate_nested_words(S2, 8):
        assert accepts_2vpa(inv, w) == m.accepts(evaluate_d2vpt(t, w))


def test_type_check_sorting():
    t = sorting_transducer(2)
    symbols = (LMARK,) + S2.symbols + (RMARK,)
    universal = Vpa(S2, ("u",), {"u"}, {"u"}, ("g",),
                    tuple([("push", "u", c, "u", "g") for c in S2.calls] + [("pop", "u", "r", "g", "u")]))
    ok, counter = type_check(t, universal, prefix_nfa(symbols, (LMARK, "1")))
    assert not ok
    assert not prefix_nfa(symbols, (LMARK, "1")).accepts(evaluate_d2vpt(t, counter))
    # two 1-children in a row already produce the factor "r 1"
    ok, counter = type_check(t, universal, factor_free_nfa(symbols, ("r", "1")))
    assert not ok
    assert "1" in evaluate_d2vpt(t, counter)
    ok, _ = type_check(t, universal, factor_free_nfa(symbols, (RMARK, RMARK)))
    assert ok


def test_type_check_with_domain(load):
    t = load("sorting2.d2vpt")
    ok, counter = type_check(t, load("top1_sorting2.vpa"), load("prefix_L1.fsa"))
    assert ok and counter is None


# ------------------------------------------------------------ single use

SU_WORDS = list(enumerate_nested_words(AX, 4))


def _simple_oracle_single_use(t, words):
    prod = producing_states(t)
    return all(not single_use_violations_simple(t, w, prod) for w in words)


@pytest.mark.parametrize("build,expected", [
    (lambda: echo_transducer(AX), True),
    (lambda: double_copy_transducer(AX, distinct=False), False),
    (lambda: double_copy_transducer(AX, distinct=True), True),
    (lambda: shared_echo_transducer(AX), False),
])
def test_single_use_checker_against_oracles(build, expected):
    t = build()
    verdict, witness = is_single_use_auto(t)
    assert verdict == expected
    assert _simple_oracle_single_use(t, SU_WORDS) == expected
    if not verdict:
        word, head, state = witness
        assert (head, state) in single_use_violations(t, word, producing_states(t))


def test_retry_oracles_disagree():
    # a restart revisits configurations, so only the reachability oracle sees it
    t = retry_transducer(AX)
    verdict, (word, head, state) = is_single_use_auto(t)
    assert not verdict
    assert single_use_violations(t, word, producing_states(t))
    assert _simple_oracle_single_use(t, SU_WORDS)


def test_single_use_ill_formed():
    t = echo_transducer(AX)
    with pytest.raises(SingleUseIllFormed):
        is_single_use(t, producing=["b"])


def test_materialize_keeps_the_function():
    t = sorting_transducer(2)
    m = materialize(t)
    assert len(m.states) <= len(t.states)
    for w in enumerate_nested_words(S2, 6):
        assert evaluate_d2vpt(m, w) == evaluate_d2vpt(t, w)
