"""Regenerate the machine files under fixtures/.

Random machines are drawn from fixed seeds and kept only when they meet the
stated shape (non-trivial language, small algebra), so the output is stable.
"""
from __future__ import annotations

import os
import random
import sys

from nestedwalk.catalog import (double_copy_transducer, echo_transducer, even_swap_relabeler,
                                guarded_echo_transducer, parity_relabeler, retry_transducer,
                                shared_echo_transducer, sorting_alphabet, sorting_transducer,
                                subhedge_annotator, swap_relabeler, top_call_vpa, universal_vpa)
from nestedwalk.formats import serialize_machine
from nestedwalk.fsa import factor_free_nfa, prefix_nfa
from nestedwalk.generators import random_two_vpa
from nestedwalk.nested_words import LMARK, RMARK, NestedWord, StructuredAlphabet, enumerate_nested_words
from nestedwalk.stst import copy_stst, exponential_stst
from nestedwalk.twovpa import BW, FW, TwoVpa, accepts_2vpa, compute_algebra

AB = StructuredAlphabet(("a", "b"), ("x", "y"))
AX = StructuredAlphabet(("a", "b"), ("x",))


def _write(root: str, name: str, machine) -> None:
    with open(os.path.join(root, name), "w", encoding="utf-8") as fh:
        fh.write(serialize_machine(machine))


def _count_accepted(a, max_len: int) -> tuple:
    words = list(enumerate_nested_words(a.alphabet, max_len))
    return sum(accepts_2vpa(a, w) for w in words), len(words)


def morphism_machines(k: int = 3) -> list:
    rng = random.Random(2024)
    out = []
    while len(out) < k:
        a = random_two_vpa(rng, AB, n_states=4, n_gammas=2, density=0.5)
        acc, total = _count_accepted(a, 6)
        if 0 < acc < total and len(compute_algebra(a, 400)) <= 400:
            out.append(a)
    return out


def _drop_finals(a: TwoVpa) -> TwoVpa:
    return TwoVpa(a.alphabet, a.states, a.initial, frozenset(), a.stack_symbols, a.rules)


def _stuck_at_end(a: TwoVpa) -> TwoVpa:
    rules = tuple(r for r in a.rules if not (r[0] == "pop" and r[3] == RMARK))
    return TwoVpa(a.alphabet, a.states, a.initial, a.finals, a.stack_symbols, rules)


def _unreachable_final() -> TwoVpa:
    rules = [("push", "s", FW, LMARK, "s", FW, "m"), ("pop", "s", FW, RMARK, "m", "s", FW)]
    rules += [("push", "s", FW, c, "s", FW, "g") for c in AX.calls]
    rules += [("pop", "s", FW, r, "g", "s", FW) for r in AX.returns]
    rules += [("pop", "f", FW, RMARK, "m", "f", FW)]
    return TwoVpa(AX, ("s", "f"), "s", frozenset(["f"]), ("m", "g"), tuple(rules))


def _bounce_forever() -> TwoVpa:
    """Walks to the right marker and back without end: every run is stuck or loops."""
    rules = [("push", "s", FW, LMARK, "s", FW, "m"), ("pop", "s", FW, RMARK, "m", "t", BW),
             ("push", "t", BW, RMARK, "t", BW, "m"), ("pop", "t", BW, LMARK, "m", "s", FW)]
    for c in AX.calls:
        rules += [("push", "s", FW, c, "s", FW, "g"), ("pop", "t", BW, c, "g", "t", BW)]
    for r in AX.returns:
        rules += [("pop", "s", FW, r, "g", "s", FW), ("push", "t", BW, r, "t", BW, "g")]
    return TwoVpa(AX, ("s", "t", "f"), "s", frozenset(["f"]), ("m", "g"), tuple(rules))


def emptiness_machines() -> list:
    rng = random.Random(77)
    picked: dict = {"empty": [], "nonempty": []}
    while len(picked["empty"]) < 3 or len(picked["nonempty"]) < 3:
        a = random_two_vpa(rng, AX, n_states=3, n_gammas=2, density=0.45)
        acc, _ = _count_accepted(a, 8)
        if acc and accepts_2vpa(a, NestedWord(AX, ())):
            continue  # keep witnesses longer than the empty word
        key = "nonempty" if acc else "empty"
        if len(picked[key]) < 3:
            picked[key].append(a)
    base = picked["nonempty"][0]
    return ([_drop_finals(base), _unreachable_final(), _stuck_at_end(base), _bounce_forever()]
            + picked["empty"] + picked["nonempty"])


def main(root: str) -> None:
    os.makedirs(root, exist_ok=True)
    s2 = sorting_alphabet(2)
    _write(root, "sorting3.d2vpt", sorting_transducer(3))
    _write(root, "sorting2.d2vpt", sorting_transducer(2))
    for i, a in enumerate(morphism_machines(), start=1):
        _write(root, f"morphism{i}.2vpa", a)
    for i, a in enumerate(emptiness_machines(), start=1):
        _write(root, f"empty{i:02d}.2vpa", a)
    # one-way first stages and two-way second stages
    _write(root, "swap12.vpt", swap_relabeler(s2, "1", "2"))
    _write(root, "parity12.vpt", parity_relabeler(s2, "1", "2"))
    _write(root, "even_swap12.vpt", even_swap_relabeler(s2, "1", "2"))
    sub = subhedge_annotator(AX)
    _write(root, "subhedge.vpt", sub)
    _write(root, "echo_annotated.d2vpt", echo_transducer(sub.output_alphabet))
    _write(root, "guarded_echo.d2vpt", guarded_echo_transducer(AX))
    # deterministic two-way transducers
    _write(root, "echo.d2vpt", echo_transducer(AX))
    _write(root, "double_copy_same.d2vpt", double_copy_transducer(AX, distinct=False))
    _write(root, "double_copy_distinct.d2vpt", double_copy_transducer(AX, distinct=True))
    _write(root, "double_copy_sorting.d2vpt", double_copy_transducer(s2, distinct=False))
    _write(root, "shared_echo.d2vpt", shared_echo_transducer(AX))
    _write(root, "retry.2vpt", retry_transducer(AX))
    # type checking
    _write(root, "universal_sorting2.vpa", universal_vpa(s2))
    _write(root, "top1_sorting2.vpa", top_call_vpa(s2, "1"))
    _write(root, "universal_ax.vpa", universal_vpa(AX))
    out_s2 = (LMARK,) + s2.symbols + (RMARK,)
    out_ax = (LMARK,) + AX.symbols + (RMARK,)
    _write(root, "prefix_L1.fsa", prefix_nfa(out_s2, (LMARK, "1")))
    _write(root, "no_2_1.fsa", factor_free_nfa(out_s2, ("2", "1")))
    _write(root, "no_RR.fsa", factor_free_nfa(out_ax, (RMARK, RMARK)))
    _write(root, "no_xx.fsa", factor_free_nfa(out_ax, ("x", "x")))
    # streaming transducers
    _write(root, "exponential.stst", exponential_stst())
    _write(root, "copy.stst", copy_stst(AX))
    with open(os.path.join(root, "golden_inputs.txt"), "w", encoding="utf-8") as fh:
        fh.write("<L> 2 2 r 1 r r 1 r 3 r <R>\n<L> 2 3 r 1 r 2 r r 2 r 3 r 1 r <R>\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "fixtures"))
