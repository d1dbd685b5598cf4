"""Reference machines used by fixtures, tests and the command line."""
from __future__ import annotations

from .nested_words import LMARK, RMARK, StructuredAlphabet
from .twovpa import BW, FW, LookAround, TwoVpa
from .twovpt import TwoVpt
from .vpa import Vpa, Vpt, reverse_vpt


def sorting_alphabet(n: int) -> StructuredAlphabet:
    return StructuredAlphabet(tuple(str(i) for i in range(1, n + 1)), ("r",))


def sorting_transducer(n: int) -> TwoVpt:
    """Deterministic two-way transducer that stably sorts the children of every
    node by label (labels 1..n, single return symbol r).

    At each level it makes one left-to-right sweep per label i. A child
    labelled i is output and its subtree processed recursively; other children
    are skipped along the matching relation. After the sweep for i < n the
    head goes back to the start of the level (beyond the enclosing call, which
    is then re-read silently).
    """
    alpha = sorting_alphabet(n)
    labels = list(range(1, n + 1))
    parents = ["bot"] + [f"p{j}" for j in labels]
    rules: list = []

    def q(i):
        return f"q{i}"

    def emit(rule, out=()):
        rules.append((rule, tuple(out)))

    emit(("push", "start", FW, LMARK, q(1), FW, "bot"), [LMARK])
    for i in labels:
        for j in labels:
            c = str(j)
            if j == i:
                emit(("push", q(i), FW, c, q(1), FW, f"p{i}"), [c])
            else:
                emit(("push", q(i), FW, c, "skip", FW, f"s{i}"))
        if i == n:
            for j in labels:
                emit(("pop", q(n), FW, "r", f"p{j}", q(j), FW), ["r"])
            emit(("pop", q(n), FW, RMARK, "bot", "fin", BW), [RMARK])
        else:
            for pj in parents:
                end = RMARK if pj == "bot" else "r"
                emit(("pop", q(i), FW, end, pj, f"up{i}_{pj}", BW))
                emit(("push", f"up{i}_{pj}", BW, end, f"back{i}", BW, pj))
                start = LMARK if pj == "bot" else None
                for c in ([start] if start else [str(k) for k in labels]):
                    emit(("pop", f"back{i}", BW, c, pj, f"re{i}_{pj}", FW))
                    emit(("push", f"re{i}_{pj}", FW, c, q(i + 1), FW, pj))
            for c in (str(k) for k in labels):
                emit(("pop", f"back{i}", BW, c, "x", f"back{i}", BW))
            emit(("push", f"back{i}", BW, "r", f"back{i}", BW, "x"))
    # skipping a subtree along the matching relation
    for c in (str(k) for k in labels):
        emit(("push", "skip", FW, c, "skip", FW, "x"))
    emit(("pop", "skip", FW, "r", "x", "skip", FW))
    for i in labels:
        emit(("pop", "skip", FW, "r", f"s{i}", q(i), FW))
    states = []
    for rule, _ in rules:
        for s in (rule[1], rule[4] if rule[0] == "push" else rule[5]):
            if s not in states:
                states.append(s)
    gammas = parents + [f"s{i}" for i in labels] + ["x"]
    auto = TwoVpa(alpha, tuple(states), "start", frozenset(["fin"]), tuple(gammas),
                  tuple(r for r, _ in rules))
    out_alpha = (LMARK,) + alpha.calls + alpha.returns + (RMARK,)
    return TwoVpt(auto, tuple(o for _, o in rules), out_alpha)


def sort_oracle(symbols: tuple) -> tuple:
    """Stable recursive sort of children by label, on an unmarked word."""
    def hedge(i):
        blocks = []
        while i < len(symbols) and symbols[i] != "r":
            label = symbols[i]
            inner, i = hedge(i + 1)
            blocks.append((label, inner))
            i += 1
        blocks.sort(key=lambda b: int(b[0]))
        out = []
        for label, inner in blocks:
            out += [label] + inner + ["r"]
        return out, i

    return tuple(hedge(0)[0])


def echo_transducer(alphabet: StructuredAlphabet) -> TwoVpt:
    """Deterministic two-way transducer writing w, then w mirrored (read right
    to left), then walking silently to the end."""
    rules: list = []

    def emit(rule, out=()):
        rules.append((rule, tuple(out)))

    emit(("push", "f", FW, LMARK, "f", FW, "m"), [LMARK])
    emit(("pop", "f", FW, RMARK, "m", "b", BW), [RMARK])
    emit(("push", "b", BW, RMARK, "b", BW, "m"))
    emit(("pop", "b", BW, LMARK, "m", "z", FW))
    emit(("push", "z", FW, LMARK, "z", FW, "m"))
    emit(("pop", "z", FW, RMARK, "m", "fin", FW))
    for c in alphabet.calls:
        emit(("push", "f", FW, c, "f", FW, "x"), [c])
        emit(("pop", "b", BW, c, "x", "b", BW), [c])
        emit(("push", "z", FW, c, "z", FW, "x"))
    for r in alphabet.returns:
        emit(("pop", "f", FW, r, "x", "f", FW), [r])
        emit(("push", "b", BW, r, "b", BW, "x"), [r])
        emit(("pop", "z", FW, r, "x", "z", FW))
    auto = TwoVpa(alphabet, ("f", "b", "z", "fin"), "f", frozenset(["fin"]), ("m", "x"),
                  tuple(r for r, _ in rules))
    return TwoVpt(auto, tuple(o for _, o in rules), (LMARK,) + alphabet.symbols + (RMARK,))


def subhedge_annotator(alphabet: StructuredAlphabet) -> Vpt:
    """Unambiguous (not deterministic) letter-to-letter VPT tagging every call
    with E when its subhedge is empty and N otherwise."""
    out = StructuredAlphabet(tuple(f"{c}{t}" for c in alphabet.calls for t in "EN"), alphabet.returns)
    rules: list = []
    outs: list = []
    for src in ("s", "n"):
        for c in alphabet.calls:
            rules.append(("push", src, c, "e", "g"))
            outs.append((f"{c}E",))
            rules.append(("push", src, c, "n", "g"))
            outs.append((f"{c}N",))
    for src in ("s", "e"):
        for r in alphabet.returns:
            rules.append(("pop", src, r, "g", "s"))
            outs.append((r,))
    auto = Vpa(alphabet, ("s", "e", "n"), frozenset(["s"]), frozenset(["s"]), ("g",), tuple(rules))
    return Vpt(auto, tuple(outs), out)


def guarded_echo_transducer(alphabet: StructuredAlphabet) -> TwoVpt:
    """The echo transducer with look-around: on the forward sweep each call
    is followed by E if its subhedge is empty and by N otherwise."""
    base = echo_transducer(alphabet)
    checker = subhedge_annotator(alphabet).automaton
    rules, outs, guard = [], [], {}
    for rule, out in zip(base.automaton.rules, base.output):
        if rule[0] == "push" and rule[1] == "f" and rule[3] in alphabet.calls:
            for tag, state in (("E", "e"), ("N", "n")):
                guard[len(rules)] = state
                rules.append(rule)
                outs.append(out + (tag,))
        else:
            rules.append(rule)
            outs.append(out)
    a = base.automaton
    auto = TwoVpa(alphabet, a.states, a.initial, a.finals, a.stack_symbols, tuple(rules))
    return TwoVpt(auto, tuple(outs), base.output_alphabet + ("E", "N"), LookAround(checker, guard))


def double_copy_transducer(alphabet: StructuredAlphabet, distinct: bool) -> TwoVpt:
    """Copies w, walks back silently, copies w again. With ``distinct`` the
    two copies use different states; otherwise one state does both."""
    second = "g" if distinct else "f"
    rules: list = []

    def emit(rule, out=()):
        rules.append((rule, tuple(out)))

    emit(("push", "i", FW, LMARK, "f", FW, "m"))
    emit(("pop", "f", FW, RMARK, "m", "b", BW))
    emit(("push", "b", BW, RMARK, "b", BW, "m"))
    emit(("pop", "b", BW, LMARK, "m", "j", FW))
    emit(("push", "j", FW, LMARK, second, FW, "n"))
    emit(("pop", second, FW, RMARK, "n", "fin", FW))
    for c in alphabet.calls:
        emit(("push", "f", FW, c, "f", FW, "x"), [c])
        emit(("pop", "b", BW, c, "x", "b", BW))
        if distinct:
            emit(("push", "g", FW, c, "g", FW, "x"), [c])
    for r in alphabet.returns:
        emit(("pop", "f", FW, r, "x", "f", FW), [r])
        emit(("push", "b", BW, r, "b", BW, "x"))
        if distinct:
            emit(("pop", "g", FW, r, "x", "g", FW), [r])
    states = ("i", "f", "b", "j") + (("g",) if distinct else ()) + ("fin",)
    auto = TwoVpa(alphabet, states, "i", frozenset(["fin"]), ("m", "n", "x"), tuple(r for r, _ in rules))
    return TwoVpt(auto, tuple(o for _, o in rules), alphabet.symbols)


def shared_echo_transducer(alphabet: StructuredAlphabet) -> TwoVpt:
    """Like the echo transducer but the backward copy runs in the forward
    state, so every position is visited twice in that producing state."""
    base = echo_transducer(alphabet)
    rename = {"b": "f"}
    rules = []
    for rule in base.automaton.rules:
        if rule[0] == "push":
            _, q, d, a, q2, d2, g = rule
            rules.append(("push", rename.get(q, q), d, a, rename.get(q2, q2), d2, g))
        else:
            _, q, d, a, g, q2, d2 = rule
            rules.append(("pop", rename.get(q, q), d, a, g, rename.get(q2, q2), d2))
    a = base.automaton
    auto = TwoVpa(alphabet, ("f", "z", "fin"), "f", a.finals, a.stack_symbols, tuple(rules))
    return TwoVpt(auto, base.output, base.output_alphabet)


def retry_transducer(alphabet: StructuredAlphabet) -> TwoVpt:
    """Nondeterministic: copies w, then at the right marker either accepts or
    walks back and starts over in the same producing state."""
    rules: list = []

    def emit(rule, out=()):
        rules.append((rule, tuple(out)))

    emit(("push", "i", FW, LMARK, "c", FW, "m"), [LMARK])
    emit(("pop", "c", FW, RMARK, "m", "f", BW), [RMARK])
    emit(("pop", "c", FW, RMARK, "m", "k", BW))
    emit(("push", "k", BW, RMARK, "k", BW, "m"))
    emit(("pop", "k", BW, LMARK, "m", "i", FW))
    for c in alphabet.calls:
        emit(("push", "c", FW, c, "c", FW, "x"), [c])
        emit(("pop", "k", BW, c, "x", "k", BW))
    for r in alphabet.returns:
        emit(("pop", "c", FW, r, "x", "c", FW), [r])
        emit(("push", "k", BW, r, "k", BW, "x"))
    auto = TwoVpa(alphabet, ("i", "c", "f", "k"), "i", frozenset(["f"]), ("m", "x"),
                  tuple(r for r, _ in rules))
    return TwoVpt(auto, tuple(o for _, o in rules), (LMARK,) + alphabet.symbols + (RMARK,))


def swap_relabeler(alphabet: StructuredAlphabet, a: str, b: str) -> Vpt:
    """Deterministic letter-to-letter VPT exchanging the calls a and b."""
    swap = {a: b, b: a}
    rules = [("push", "q", c, "q", "g") for c in alphabet.calls]
    rules += [("pop", "q", r, "g", "q") for r in alphabet.returns]
    outs = [(swap.get(c, c),) for c in alphabet.calls] + [(r,) for r in alphabet.returns]
    auto = Vpa(alphabet, ("q",), frozenset(["q"]), frozenset(["q"]), ("g",), tuple(rules))
    return Vpt(auto, tuple(outs), alphabet)


def even_swap_relabeler(alphabet: StructuredAlphabet, a: str, b: str) -> Vpt:
    """Deterministic partial relabeler: exchanges a and b, and is defined only
    when the top level has an even number of blocks."""
    swap = {a: b, b: a}
    rules, outs = [], []
    for q in ("e", "o"):
        for c in alphabet.calls:
            rules.append(("push", q, c, "e", q))
            outs.append((swap.get(c, c),))
        for r in alphabet.returns:
            for g in ("e", "o"):
                rules.append(("pop", q, r, g, "o" if g == "e" else "e"))
                outs.append((r,))
    auto = Vpa(alphabet, ("e", "o"), frozenset(["e"]), frozenset(["e"]), ("e", "o"), tuple(rules))
    return Vpt(auto, tuple(outs), alphabet)


def parity_relabeler(alphabet: StructuredAlphabet, a: str, b: str) -> Vpt:
    """Co-deterministic letter-to-letter VPT exchanging a and b on every call
    that is followed, at its own level, by an odd number of siblings."""
    rev = StructuredAlphabet(alphabet.returns, alphabet.calls)
    swap = {a: b, b: a}
    rules, outs = [], []
    # read right to left: the state is the parity of siblings seen so far
    for q in ("e", "o"):
        for r in alphabet.returns:
            rules.append(("push", q, r, "e", q))
            outs.append((r,))
        for c in alphabet.calls:
            for g in ("e", "o"):
                rules.append(("pop", q, c, g, "o" if g == "e" else "e"))
                outs.append((swap.get(c, c) if g == "o" else c,))
    auto = Vpa(rev, ("e", "o"), frozenset(["e"]), frozenset(["e", "o"]), ("e", "o"), tuple(rules))
    return reverse_vpt(Vpt(auto, tuple(outs), rev))


def universal_vpa(alphabet: StructuredAlphabet) -> Vpa:
    rules = [("push", "u", c, "u", "g") for c in alphabet.calls]
    rules += [("pop", "u", r, "g", "u") for r in alphabet.returns]
    return Vpa(alphabet, ("u",), frozenset(["u"]), frozenset(["u"]), ("g",), tuple(rules))


def top_call_vpa(alphabet: StructuredAlphabet, call: str) -> Vpa:
    """Words with a top-level child labelled ``call``."""
    rules = []
    for q in ("n", "y"):
        for c in alphabet.calls:
            tag = "hit" if c == call else q
            rules.append(("push", q, c, "in", tag))
    for c in alphabet.calls:
        rules.append(("push", "in", c, "in", "deep"))
    for r in alphabet.returns:
        rules.append(("pop", "in", r, "hit", "y"))
        rules.append(("pop", "in", r, "n", "n"))
        rules.append(("pop", "in", r, "y", "y"))
        rules.append(("pop", "in", r, "deep", "in"))
    return Vpa(alphabet, ("n", "y", "in"), frozenset(["n"]), frozenset(["y"]),
               ("hit", "n", "y", "deep"), tuple(rules))
