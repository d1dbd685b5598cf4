"""One-way visibly pushdown automata and transducers.

Rules are tuples ``("push", q, c, q2, g)`` and ``("pop", q, r, g, q2)``; a
rule's id is its index in ``rules``. Besides the explicit ``Vpa`` there is a
``LazyVpa`` whose transitions are computed on demand; every algorithm here
only uses the shared read interface (``initial``, ``is_final``,
``push_moves``, ``pop_moves``).
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable

from .fsa import Nfa
from .nested_words import NestedWord, StructuredAlphabet


class NotUnambiguous(ValueError):
    pass


class ResourceLimit(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Vpa:
    alphabet: StructuredAlphabet
    states: tuple
    initial: frozenset
    finals: frozenset
    stack_symbols: tuple
    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "finals", frozenset(self.finals))
        states = set(self.states)
        gammas = set(self.stack_symbols)
        push: dict = {}
        pop: dict = {}
        for rid, rule in enumerate(self.rules):
            if rule[0] == "push":
                _, q, c, q2, g = rule
                if c not in self.alphabet.calls:
                    raise ValueError(f"rule {rid + 1}: {c!r} is not a call")
                push.setdefault((q, c), []).append((q2, g, rid))
            elif rule[0] == "pop":
                _, q, r, g, q2 = rule
                if r not in self.alphabet.returns:
                    raise ValueError(f"rule {rid + 1}: {r!r} is not a return")
                pop.setdefault((q, r, g), []).append((q2, rid))
            else:
                raise ValueError(f"rule {rid + 1}: bad kind {rule[0]!r}")
            if q not in states or q2 not in states:
                raise ValueError(f"rule {rid + 1}: undeclared state")
            if g not in gammas:
                raise ValueError(f"rule {rid + 1}: undeclared stack symbol {g!r}")
        if not self.initial <= states or not self.finals <= states:
            raise ValueError("initial/final states must be declared")
        object.__setattr__(self, "_push", push)
        object.__setattr__(self, "_pop", pop)

    def push_moves(self, q, c) -> list:
        return [(q2, g) for q2, g, _ in self._push.get((q, c), ())]

    def pop_moves(self, q, r, g) -> list:
        return [q2 for q2, _ in self._pop.get((q, r, g), ())]

    def push_rules_from(self, q, c) -> list:
        return self._push.get((q, c), [])

    def pop_rules_from(self, q, r, g) -> list:
        return self._pop.get((q, r, g), [])

    def is_final(self, q) -> bool:
        return q in self.finals

    @property
    def is_deterministic(self) -> bool:
        return (len(self.initial) <= 1
                and all(len(v) <= 1 for v in self._push.values())
                and all(len(v) <= 1 for v in self._pop.values()))

    @property
    def is_codeterministic(self) -> bool:
        if len(self.finals) > 1:
            return False
        seen_push = set()
        seen_pop = set()
        for rule in self.rules:
            if rule[0] == "push":
                key = (rule[3], rule[2], rule[4])
                bucket = seen_push
            else:
                key = (rule[4], rule[2])
                bucket = seen_pop
            if key in bucket:
                return False
            bucket.add(key)
        return True


class LazyVpa:
    """A VPA given by transition callbacks; states are discovered on demand."""

    def __init__(self, alphabet: StructuredAlphabet, initial: Iterable,
                 is_final: Callable, push_moves: Callable, pop_moves: Callable):
        self.alphabet = alphabet
        self.initial = frozenset(initial)
        self._is_final = is_final
        self._push_fn = push_moves
        self._pop_fn = pop_moves
        self._push_cache: dict = {}
        self._pop_cache: dict = {}

    def is_final(self, q) -> bool:
        return self._is_final(q)

    def push_moves(self, q, c) -> list:
        key = (q, c)
        if key not in self._push_cache:
            self._push_cache[key] = list(self._push_fn(q, c))
        return self._push_cache[key]

    def pop_moves(self, q, r, g) -> list:
        key = (q, r, g)
        if key not in self._pop_cache:
            self._pop_cache[key] = list(self._pop_fn(q, r, g))
        return self._pop_cache[key]


def materialize_vpa(a, max_states: int = 200_000) -> Vpa:
    """Explicit ``Vpa`` holding the part of ``a`` reachable from its initial states."""
    if isinstance(a, Vpa):
        return a
    states = list(a.initial)
    seen = set(states)
    gammas: list = []
    gseen: set = set()
    rules = []
    todo = list(states)
    done_pop: set = set()

    def add_state(s):
        if s not in seen:
            seen.add(s)
            states.append(s)
            todo.append(s)
            if len(states) > max_states:
                raise ResourceLimit(f"more than {max_states} states")

    while todo:
        while todo:
            q = todo.pop()
            for c in a.alphabet.calls:
                for q2, g in a.push_moves(q, c):
                    rules.append(("push", q, c, q2, g))
                    add_state(q2)
                    if g not in gseen:
                        gseen.add(g)
                        gammas.append(g)
        # pop rules for every known (state, stack symbol) pair
        for q in list(states):
            for g in list(gammas):
                for r in a.alphabet.returns:
                    if (q, r, g) in done_pop:
                        continue
                    done_pop.add((q, r, g))
                    for q2 in a.pop_moves(q, r, g):
                        rules.append(("pop", q, r, g, q2))
                        add_state(q2)
    finals = frozenset(q for q in states if a.is_final(q))
    return Vpa(a.alphabet, tuple(states), a.initial, finals, tuple(gammas), tuple(rules))


# ---------------------------------------------------------------- runs


def run_vpa(a, w: NestedWord) -> set:
    """States reachable at the end of w with empty stack, from some initial state."""
    # summaries: pairs (state at the start of the current level, current state)
    level = {(q, q) for q in a.initial}
    stack: list = []
    for s in w.symbols:
        if s in a.alphabet.calls:
            stack.append((level, s))
            starts = {q2 for _, q in level for q2, _ in a.push_moves(q, s)}
            level = {(q, q) for q in starts}
        else:
            below, c = stack.pop()
            inner: dict = {}
            for q1, q2 in level:
                inner.setdefault(q1, set()).add(q2)
            new = set()
            for p, q in below:
                for q1, g in a.push_moves(q, c):
                    for q2 in inner.get(q1, ()):
                        for q3 in a.pop_moves(q2, s, g):
                            new.add((p, q3))
            level = new
        if not level:
            return set()
    return {q for _, q in level}


def accepts_vpa(a, w: NestedWord) -> bool:
    return any(a.is_final(q) for q in run_vpa(a, w))


# ------------------------------------------------------------ emptiness


def is_empty_vpa(a, max_facts: int = 5_000_000) -> tuple:
    """Return (True, None) if L(a) is empty, else (False, witness symbols).

    Facts are pairs (p, q) with p the state at the start of a level and q a
    state reachable from p over a nested word. A fact is extended to the
    right one block c u r at a time. Facts are settled in order of witness
    length, so the witness returned is a shortest one.
    """
    heap: list = []
    counter = itertools.count()
    best: dict = {}
    dist: dict = {}
    settled: dict = {}
    ends_at: dict = {}        # q -> level starts p with (p, q) settled
    from_start: dict = {}     # q1 -> states q2 with (q1, q2) settled
    pushes_from: dict = {}    # q -> [(c, q1, g)]
    pushers_into: dict = {}   # q1 -> [(q, c, g)]
    starts: set = set()

    def offer(fact, length, deriv):
        if fact in settled:
            return
        if fact not in best or length < best[fact][0]:
            best[fact] = (length, deriv)
            heapq.heappush(heap, (length, next(counter), fact))

    def add_start(q):
        if q not in starts:
            starts.add(q)
            offer((q, q), 0, ("eps",))

    def close(p, q, c, g, q1, q2):
        n = dist[(p, q)] + dist[(q1, q2)] + 2
        for r in a.alphabet.returns:
            for q3 in a.pop_moves(q2, r, g):
                offer((p, q3), n, ("block", (p, q), c, (q1, q2), r))

    for q in a.initial:
        add_start(q)

    while heap:
        length, _, fact = heapq.heappop(heap)
        if fact in settled or best[fact][0] != length:
            continue
        settled[fact] = best[fact][1]
        dist[fact] = length
        if len(settled) > max_facts:
            raise ResourceLimit(f"more than {max_facts} summary facts")
        p, q = fact
        if p in a.initial and a.is_final(q):
            return False, _rebuild(settled, fact)
        if q not in pushes_from:
            moves = [(c, q1, g) for c in a.alphabet.calls for q1, g in a.push_moves(q, c)]
            pushes_from[q] = moves
            for c, q1, g in moves:
                pushers_into.setdefault(q1, []).append((q, c, g))
                add_start(q1)
        ends_at.setdefault(q, []).append(p)
        # the new fact as the hedge before a block
        for c, q1, g in pushes_from[q]:
            for q2 in from_start.get(q1, ()):
                close(p, q, c, g, q1, q2)
        # the new fact as the inside of a block
        from_start.setdefault(p, []).append(q)
        for q0, c, g in pushers_into.get(p, ()):
            for p0 in ends_at.get(q0, ()):
                close(p0, q0, c, g, p, q)
    return True, None


def _rebuild(settled, fact) -> tuple:
    out: list = []

    def go(f):
        deriv = settled[f]
        if deriv[0] == "eps":
            return
        _, outer, c, inner, r = deriv
        go(outer)
        out.append(c)
        go(inner)
        out.append(r)

    go(fact)
    return tuple(out)


# -------------------------------------------------- determinization etc.


def determinize_vpa(a) -> LazyVpa:
    """Summary-set construction. States are frozensets of pairs (level start, current)."""
    init = frozenset((q, q) for q in a.initial)

    def push(S, c):
        starts = frozenset((q2, q2) for _, q in S for q2, _ in a.push_moves(q, c))
        return [(starts, (S, c))]

    def pop(S, r, g):
        below, c = g
        inner: dict = {}
        for q1, q2 in S:
            inner.setdefault(q1, set()).add(q2)
        new = set()
        for p, q in below:
            for q1, gg in a.push_moves(q, c):
                for q2 in inner.get(q1, ()):
                    for q3 in a.pop_moves(q2, r, gg):
                        new.add((p, q3))
        return [frozenset(new)]

    def final(S):
        return any(a.is_final(q) for _, q in S)

    return LazyVpa(a.alphabet, [init], final, push, pop)


def complement_dvpa(a) -> LazyVpa:
    """Complement of a deterministic VPA (missing moves go to a rejecting sink)."""
    if len(a.initial) > 1:
        raise ValueError("complement needs a deterministic automaton")
    sink = ("__sink__",)
    init = next(iter(a.initial)) if a.initial else sink

    def push(q, c):
        if q == sink:
            return [(sink, sink)]
        moves = a.push_moves(q, c)
        if len(moves) > 1:
            raise ValueError("complement needs a deterministic automaton")
        return moves or [(sink, sink)]

    def pop(q, r, g):
        if q == sink or g == sink:
            return [sink]
        moves = a.pop_moves(q, r, g)
        if len(moves) > 1:
            raise ValueError("complement needs a deterministic automaton")
        return moves or [sink]

    return LazyVpa(a.alphabet, [init], lambda q: q != sink and not a.is_final(q), push, pop)


def intersect_vpa(a, b) -> LazyVpa:
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    init = [(p, q) for p in a.initial for q in b.initial]

    def push(s, c):
        p, q = s
        return [((p2, q2), (g1, g2)) for p2, g1 in a.push_moves(p, c) for q2, g2 in b.push_moves(q, c)]

    def pop(s, r, g):
        p, q = s
        g1, g2 = g
        return [(p2, q2) for p2 in a.pop_moves(p, r, g1) for q2 in b.pop_moves(q, r, g2)]

    return LazyVpa(a.alphabet, init, lambda s: a.is_final(s[0]) and b.is_final(s[1]), push, pop)


def product_vpa_fsa(a, m: Nfa) -> LazyVpa:
    """Synchronized product reading the input symbols in both machines."""
    init = [(q, p) for q in a.initial for p in m.initial]

    def push(s, c):
        q, p = s
        return [((q2, p2), g) for q2, g in a.push_moves(q, c) for p2 in m.successors(p, c)]

    def pop(s, r, g):
        q, p = s
        return [(q2, p2) for q2 in a.pop_moves(q, r, g) for p2 in m.successors(p, r)]

    return LazyVpa(a.alphabet, init, lambda s: a.is_final(s[0]) and s[1] in m.finals, push, pop)


def is_unambiguous(a) -> bool:
    """No word has two distinct accepting runs.

    Self-product whose state carries a flag recording that the two runs have
    already used different rules (or started in different states).
    """
    if not isinstance(a, Vpa):
        a = materialize_vpa(a)
    init = [(p, q, p != q) for p in a.initial for q in a.initial]

    def push(s, c):
        p, q, flag = s
        return [((p2, q2, flag or r1 != r2), (g1, g2))
                for p2, g1, r1 in a.push_rules_from(p, c)
                for q2, g2, r2 in a.push_rules_from(q, c)]

    def pop(s, r, g):
        p, q, flag = s
        return [(p2, q2, flag or r1 != r2)
                for p2, r1 in a.pop_rules_from(p, r, g[0])
                for q2, r2 in a.pop_rules_from(q, r, g[1])]

    prod = LazyVpa(a.alphabet, init, lambda s: s[2] and a.is_final(s[0]) and a.is_final(s[1]), push, pop)
    return is_empty_vpa(prod)[0]


# ------------------------------------------------------------ transducers


@dataclass(frozen=True, eq=False)
class Vpt:
    automaton: Vpa
    output: tuple  # per rule: tuple of output symbols
    output_alphabet: object  # StructuredAlphabet or tuple of plain symbols

    def __post_init__(self):
        object.__setattr__(self, "output", tuple(tuple(o) for o in self.output))
        if len(self.output) != len(self.automaton.rules):
            raise ValueError("one output word per rule is required")
        symbols = _symbols_of(self.output_alphabet)
        for rid, o in enumerate(self.output):
            for s in o:
                if s not in symbols:
                    raise ValueError(f"rule {rid + 1}: output symbol {s!r} not declared")

    @property
    def alphabet(self) -> StructuredAlphabet:
        return self.automaton.alphabet

    @property
    def letter_to_letter(self) -> bool:
        out = self.output_alphabet
        if not isinstance(out, StructuredAlphabet):
            return False
        for rule, o in zip(self.automaton.rules, self.output):
            if len(o) != 1:
                return False
            if rule[0] == "push" and o[0] not in out.calls:
                return False
            if rule[0] == "pop" and o[0] not in out.returns:
                return False
        return True

    @property
    def is_deterministic(self) -> bool:
        return self.automaton.is_deterministic

    def push_steps(self, q, c) -> list:
        return [(q2, g, self.output[rid]) for q2, g, rid in self.automaton.push_rules_from(q, c)]

    def pop_steps(self, q, r, g) -> list:
        return [(q2, self.output[rid]) for q2, rid in self.automaton.pop_rules_from(q, r, g)]


def _symbols_of(alpha) -> set:
    if isinstance(alpha, StructuredAlphabet):
        return set(alpha.symbols)
    return set(alpha)


def evaluate_vpt(t, w: NestedWord, limit: int = 100_000) -> set:
    """Outputs of all accepting runs of t on w."""
    confs = {(q, (), ()) for q in t.automaton.initial}
    for s in w.symbols:
        new = set()
        if s in t.alphabet.calls:
            for q, stack, out in confs:
                for q2, g, o in t.push_steps(q, s):
                    new.add((q2, stack + (g,), out + o))
        else:
            for q, stack, out in confs:
                for q2, o in t.pop_steps(q, s, stack[-1]):
                    new.add((q2, stack[:-1], out + o))
        confs = new
        if len(confs) > limit:
            raise ResourceLimit("too many simultaneous runs")
    return {out for q, _, out in confs if t.automaton.is_final(q)}


def apply_dvpt(t, w: NestedWord):
    """Output of a deterministic VPT on w, or None when w is rejected."""
    outs = evaluate_vpt(t, w)
    if len(outs) > 1:
        raise ValueError("transducer is not functional on this input")
    return next(iter(outs)) if outs else None


def reverse_vpt(t: Vpt) -> Vpt:
    """The transducer read right to left: calls and returns swap roles, every
    rule is turned around, initial and final states swap. Outputs stay the
    same letters. A co-deterministic transducer becomes a deterministic one
    (apart from its initial states when it has several finals)."""
    a = t.automaton
    alpha = StructuredAlphabet(a.alphabet.returns, a.alphabet.calls)
    rules = []
    for rule in a.rules:
        if rule[0] == "push":
            _, q, c, q2, g = rule
            rules.append(("pop", q2, c, g, q))
        else:
            _, q, r, g, q2 = rule
            rules.append(("push", q2, r, q, g))
    out = t.output_alphabet
    if isinstance(out, StructuredAlphabet):
        out = StructuredAlphabet(out.returns, out.calls)
    auto = Vpa(alpha, a.states, a.finals, a.initial, a.stack_symbols, tuple(rules))
    return Vpt(auto, t.output, out)


def _compose_rel(s1: frozenset, s2: frozenset) -> frozenset:
    by_src: dict = {}
    for x, y in s2:
        by_src.setdefault(x, []).append(y)
    return frozenset((x, z) for x, y in s1 for z in by_src.get(y, ()))


def codeterminize_l2l(t: Vpt, max_relations: int = 5000) -> tuple:
    """Split an unambiguous letter-to-letter VPT t into (t1, t2) with
    t = t1 after t2: t2 is letter-to-letter and co-deterministic, t1 is
    letter-to-letter and deterministic.

    t2 annotates every call with the relation of its inner hedge and the
    relation of the rest of its level (its state is the relation of the rest
    of the current level, which is known right to left), and every return
    with the rest-of-level relation it resumes. t1 then follows the unique
    accepting run of t, choosing at each call the only rule compatible with
    the annotations and the set K of states allowed at the end of the level.
    """
    if not t.letter_to_letter:
        raise ValueError("transducer is not letter-to-letter")
    if not is_unambiguous(t.automaton):
        raise NotUnambiguous("transducer is ambiguous")
    a = t.automaton
    alpha = a.alphabet
    states = a.states
    ident = frozenset((q, q) for q in states)
    id_f = frozenset((q, q) for q in a.finals)
    upd_cache: dict = {}

    def upd(c, s, r):
        key = (c, s, r)
        if key not in upd_cache:
            inner: dict = {}
            for x, y in s:
                inner.setdefault(x, []).append(y)
            pairs = set()
            for q in states:
                for q1, g, _ in a.push_rules_from(q, c):
                    for q2 in inner.get(q1, ()):
                        for q3, _ in a.pop_rules_from(q2, r, g):
                            pairs.add((q, q3))
            upd_cache[key] = frozenset(pairs)
        return upd_cache[key]

    # realizable hedge relations
    hedge = [ident]
    known = {ident}
    changed = True
    while changed:
        changed = False
        for s1 in list(hedge):
            for s2 in list(hedge):
                for c in alpha.calls:
                    for r in alpha.returns:
                        s = _compose_rel(upd(c, s1, r), s2)
                        if s not in known:
                            known.add(s)
                            hedge.append(s)
                            changed = True
                            if len(hedge) > max_relations:
                                raise ResourceLimit("too many hedge relations")
    rel_index = {s: i for i, s in enumerate(hedge)}
    tops: list = []
    top_index: dict = {}
    for s in hedge:
        s_top = _compose_rel(s, id_f)
        if s_top not in top_index:
            top_index[s_top] = len(tops)
            tops.append(s_top)

    def key(state):
        tag, s = state
        return f"i{rel_index[s]}" if tag == "in" else f"t{top_index[s]}"

    # t2: co-deterministic annotator
    t2_states = [("in", s) for s in hedge] + [("top", s) for s in tops]
    push_rules: list = []
    pop_rules: list = []
    gammas: set = set()
    call_tokens: dict = {}
    ret_tokens: dict = {}
    for tag, rests in (("in", hedge), ("top", tops)):
        for rest in rests:
            rest_state = (tag, rest)
            for r in alpha.returns:
                g = (r, rest_state)
                gammas.add(g)
                tok = f"{r}~{key(rest_state)}"
                ret_tokens[tok] = (r, rest_state)
                pop_rules.append((("pop", ("in", ident), r, g, rest_state), tok))
                for c in alpha.calls:
                    for inner in hedge:
                        src = (tag, _compose_rel(upd(c, inner, r), rest))
                        ctok = f"{c}~{r}~{rel_index[inner]}~{key(rest_state)}"
                        call_tokens[ctok] = (c, r, inner, rest_state)
                        push_rules.append((("push", src, c, ("in", inner), g), ctok))
    t2_states = list(dict.fromkeys(t2_states + [rule[1] for rule, _ in push_rules]))
    initial = [s for s in t2_states if s[0] == "top" and any(x in a.initial and y in a.finals for x, y in s[1])]
    t2_out = StructuredAlphabet(tuple(call_tokens), tuple(ret_tokens))
    rules2 = [r for r, _ in push_rules] + [r for r, _ in pop_rules]
    outs2 = [(o,) for _, o in push_rules] + [(o,) for _, o in pop_rules]
    t2 = _trim_vpt(Vpt(Vpa(alpha, tuple(t2_states), frozenset(initial), frozenset([("top", id_f)]),
                           tuple(sorted(gammas, key=repr)), tuple(rules2)), tuple(outs2), t2_out))

    # t1: deterministic run chooser over the annotated alphabet
    finals_t = frozenset(a.finals)
    used_calls = [o[0] for rule, o in zip(t2.automaton.rules, t2.output) if rule[0] == "push"]
    used_rets = [o[0] for rule, o in zip(t2.automaton.rules, t2.output) if rule[0] == "pop"]
    used_calls = list(dict.fromkeys(used_calls))
    used_rets = list(dict.fromkeys(used_rets))
    # a trimmed split may never emit one kind of token; keep the alphabet well formed
    used_calls = used_calls or list(call_tokens)[:1]
    used_rets = used_rets or list(ret_tokens)[:1]

    def call_step(state, tok):
        c, r, inner, (_, rest) = call_tokens[tok]
        if state == "init":
            sources, k_set = [q for q in states if q in a.initial], finals_t
        else:
            (q, k_set) = state
            sources = [q]
        rest_ok = {x for x, y in rest if y in k_set}
        found = []
        for q in sources:
            for q1, g, rid in a.push_rules_from(q, c):
                ends = frozenset(q2 for x, q2 in inner if x == q1
                                 if any(q3 in rest_ok for q3, _ in a.pop_rules_from(q2, r, g)))
                if ends:
                    found.append(((q1, ends), (g, k_set), t.output[rid]))
        return found[0] if len(found) == 1 else None

    def ret_step(state, tok, gamma):
        if state == "init":
            return None
        r, (_, rest) = ret_tokens[tok]
        q2, _ = state
        g, k_set = gamma
        rest_ok = {x for x, y in rest if y in k_set}
        found = [(q3, t.output[rid]) for q3, rid in a.pop_rules_from(q2, r, g) if q3 in rest_ok]
        if len(found) != 1:
            return None
        return (found[0][0], k_set), found[0][1]

    t1_states = ["init"]
    seen = {"init"}
    t1_gammas: list = []
    gseen: set = set()
    rules1: list = []
    outs1: list = []
    done_pop: set = set()
    todo = ["init"]
    while todo:
        while todo:
            s = todo.pop()
            for tok in used_calls:
                step = call_step(s, tok)
                if step is None:
                    continue
                s2, g, o = step
                rules1.append(("push", s, tok, s2, g))
                outs1.append(o)
                if g not in gseen:
                    gseen.add(g)
                    t1_gammas.append(g)
                if s2 not in seen:
                    seen.add(s2)
                    t1_states.append(s2)
                    todo.append(s2)
        for s in list(t1_states):
            for g in list(t1_gammas):
                for tok in used_rets:
                    if (s, tok, g) in done_pop:
                        continue
                    done_pop.add((s, tok, g))
                    step = ret_step(s, tok, g)
                    if step is None:
                        continue
                    s2, o = step
                    rules1.append(("pop", s, tok, g, s2))
                    outs1.append(o)
                    if s2 not in seen:
                        seen.add(s2)
                        t1_states.append(s2)
                        todo.append(s2)
    t1_finals = [s for s in t1_states if s != "init" and s[1] == finals_t and s[0] in finals_t]
    if a.initial & a.finals:
        t1_finals.append("init")
    t1_alpha = StructuredAlphabet(tuple(used_calls), tuple(used_rets))
    t1 = Vpt(Vpa(t1_alpha, tuple(t1_states), frozenset(["init"]), frozenset(t1_finals),
                 tuple(t1_gammas), tuple(rules1)), tuple(outs1), t.output_alphabet)
    t2 = Vpt(t2.automaton, t2.output, t1_alpha)
    return t1, t2


def _trim_vpt(t: Vpt) -> Vpt:
    """Keep the states reachable from the initial ones (stack symbols included)."""
    a = t.automaton
    reach = set(a.initial)
    gam: set = set()
    changed = True
    while changed:
        changed = False
        for rule in a.rules:
            if rule[0] == "push" and rule[1] in reach:
                if rule[3] not in reach or rule[4] not in gam:
                    reach.add(rule[3])
                    gam.add(rule[4])
                    changed = True
            elif rule[0] == "pop" and rule[1] in reach and rule[3] in gam and rule[4] not in reach:
                reach.add(rule[4])
                changed = True
    keep = [i for i, rule in enumerate(a.rules)
            if rule[1] in reach and (rule[0] == "pop" and rule[3] in gam or rule[0] == "push")]
    rules = tuple(a.rules[i] for i in keep)
    outs = tuple(t.output[i] for i in keep)
    states = tuple(s for s in a.states if s in reach)
    gammas = tuple(g for g in a.stack_symbols if g in gam)
    used = {o[0] for o in outs}
    out_alpha = t.output_alphabet
    if isinstance(out_alpha, StructuredAlphabet):
        out_alpha = StructuredAlphabet(tuple(x for x in out_alpha.calls if x in used) or out_alpha.calls[:1],
                                       tuple(x for x in out_alpha.returns if x in used) or out_alpha.returns[:1])
    return Vpt(Vpa(a.alphabet, states, a.initial & reach, a.finals & reach, gammas, rules), outs, out_alpha)
