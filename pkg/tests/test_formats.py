import os
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES
from nestedwalk.catalog import guarded_echo_transducer, sorting_transducer
from nestedwalk.formats import (FormatError, kind_of, load_machine, parse_machine,
                                serialize_machine, structurally_equal)
from nestedwalk.generators import random_two_vpa, random_vpa
from nestedwalk.nested_words import StructuredAlphabet, enumerate_nested_words
from nestedwalk.stst import d2vpt_to_stst, run_stst
from nestedwalk.twovpa import accepts_2vpa
from nestedwalk.vpa import is_empty_vpa

AX = StructuredAlphabet(("a", "b"), ("x",))
MACHINE_FILES = sorted(f for f in os.listdir(FIXTURES) if not f.endswith(".txt"))


@pytest.mark.parametrize("name", MACHINE_FILES)
def test_fixture_round_trip(name):
    m = load_machine(os.path.join(FIXTURES, name))
    ext = name.rsplit(".", 1)[1]
    assert kind_of(m) in (ext, "d" + ext)
    again = parse_machine(serialize_machine(m))
    assert structurally_equal(m, again)
    assert serialize_machine(again) == serialize_machine(m)


def test_built_machines_round_trip():
    for m in (sorting_transducer(2), guarded_echo_transducer(AX), d2vpt_to_stst(sorting_transducer(2))):
        assert structurally_equal(m, parse_machine(serialize_machine(m)))


def test_translated_stst_survives_serialization():
    s = d2vpt_to_stst(sorting_transducer(2))
    s2 = parse_machine(serialize_machine(s))
    alpha = s.alphabet
    for w in enumerate_nested_words(alpha, 6):
        assert run_stst(s2, w) == run_stst(s, w)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_two_way_round_trip(seed):
    a = random_two_vpa(random.Random(seed), AX)
    b = parse_machine(serialize_machine(a))
    assert structurally_equal(a, b)
    for w in enumerate_nested_words(AX, 4):
        assert accepts_2vpa(a, w) == accepts_2vpa(b, w)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_one_way_round_trip(seed):
    a = random_vpa(random.Random(seed), AX)
    assert structurally_equal(a, parse_machine(serialize_machine(a)))


HEAD = "calls: a b\nreturns: x\nstates: q\ninitial: q\nfinal: q\nstack: g\n"


def test_vpa_without_rules_is_valid():
    a = parse_machine("kind: vpa\n" + HEAD)
    assert a.rules == ()
    assert is_empty_vpa(a)[1] == ()


def test_comments_and_quotes():
    text = ("kind: vpt  # one-way\n" + HEAD + "output-alphabet: a x\n"
            'push q a -> q g / "a"   # copy\npop q x g -> q / "x"\n')
    t = parse_machine(text)
    assert t.output == (("a",), ("x",))


@pytest.mark.parametrize("text,line", [
    ("kind: 2vpa\n" + HEAD + "push q a -> q g\n", 8),
    ("kind: vpa\n" + HEAD + "push q x -> q g\n", 8),
    ("kind: vpa\n" + HEAD + "push q a -> nowhere g\n", 8),
    ("kind: robot\n" + HEAD, 1),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(FormatError) as info:
        parse_machine(text)
    assert info.value.line in (line, 0)


def test_missing_header():
    with pytest.raises(FormatError, match="states"):
        parse_machine("kind: vpa\ncalls: a\nreturns: x\ninitial: q\nfinal: q\nstack: g\n")


def test_lookaround_only_on_two_way():
    text = "kind: vpa\n" + HEAD + "la-checker: begin\n" + "kind: vpa\n" + HEAD + "la-checker: end\n"
    with pytest.raises(FormatError):
        parse_machine(text)

