"""Two-way visibly pushdown transducers."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable

from .fsa import Nfa
from .nested_words import LMARK, RMARK, NestedWord, StructuredAlphabet
from .twovpa import (BW, FW, Configuration, LookAround, TwoVpa, _calls_of, _heights,
                     check_lookaround_run, is_empty_2vpa, read_symbol, successors,
                     two_vpa_to_dvpa, validate_guards)
from .vpa import LazyVpa, ResourceLimit, intersect_vpa, is_empty_vpa


class Rejected(ValueError):
    def __init__(self, position: int, reason: str):
        super().__init__(f"rejected at head {position}: {reason}")
        self.position = position
        self.reason = reason


class Diverged(ValueError):
    pass


class StepLimitExceeded(RuntimeError):
    pass


class NotDeterministic(ValueError):
    pass


class SingleUseIllFormed(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwoVpt:
    automaton: TwoVpa
    output: tuple
    output_alphabet: object  # tuple of symbols or StructuredAlphabet
    lookaround: LookAround | None = None

    def __post_init__(self):
        object.__setattr__(self, "output", tuple(tuple(o) for o in self.output))
        if len(self.output) != len(self.automaton.rules):
            raise ValueError("one output word per rule is required")
        symbols = set(self.output_symbols)
        for rid, o in enumerate(self.output):
            for s in o:
                if s not in symbols:
                    raise ValueError(f"rule {rid + 1}: output symbol {s!r} not declared")
        if self.lookaround is not None:
            validate_guards(self.automaton.rules, self.lookaround)

    @property
    def output_symbols(self) -> tuple:
        out = self.output_alphabet
        return out.symbols if isinstance(out, StructuredAlphabet) else tuple(out)

    @property
    def alphabet(self) -> StructuredAlphabet:
        return self.automaton.alphabet

    @property
    def initial(self):
        return self.automaton.initial

    @property
    def states(self) -> tuple:
        return self.automaton.states

    @property
    def stack_symbols(self) -> tuple:
        return self.automaton.stack_symbols

    def is_final(self, q) -> bool:
        return q in self.automaton.finals

    @property
    def is_deterministic(self) -> bool:
        if self.lookaround is None:
            return self.automaton.is_deterministic
        return True  # guard disjointness is checked at construction

    def push_moves(self, q, d, a, label=None) -> list:
        rules = self.automaton.push_rules_from(q, d, a)
        la = self.lookaround
        return [(q2, d2, g, self.output[rid]) for q2, d2, g, rid in rules
                if la is None or la.label_ok(rid, label)]

    def pop_moves(self, q, d, a, g, label=None) -> list:
        rules = self.automaton.pop_rules_from(q, d, a, g)
        la = self.lookaround
        return [(q2, d2, self.output[rid]) for q2, d2, rid in rules
                if la is None or la.label_ok(rid, label)]


class LazyTwoVpt:
    """A two-way transducer whose moves are generated on demand and cached."""

    def __init__(self, alphabet: StructuredAlphabet, output_alphabet, initial,
                 is_final: Callable, push_fn: Callable, pop_fn: Callable,
                 deterministic: bool):
        self.alphabet = alphabet
        self.output_alphabet = output_alphabet
        self.initial = initial
        self._is_final = is_final
        self._push_fn = push_fn
        self._pop_fn = pop_fn
        self._push: dict = {}
        self._pop: dict = {}
        self.lookaround = None
        self.deterministic = deterministic

    @property
    def is_deterministic(self) -> bool:
        return self.deterministic

    @property
    def output_symbols(self) -> tuple:
        out = self.output_alphabet
        return out.symbols if isinstance(out, StructuredAlphabet) else tuple(out)

    def is_final(self, q) -> bool:
        return self._is_final(q)

    def push_moves(self, q, d, a, label=None) -> list:
        key = (q, d, a)
        if key not in self._push:
            self._push[key] = list(self._push_fn(q, d, a))
        return self._push[key]

    def pop_moves(self, q, d, a, g, label=None) -> list:
        key = (q, d, a, g)
        if key not in self._pop:
            self._pop[key] = list(self._pop_fn(q, d, a, g))
        return self._pop[key]


def materialize(m, max_states: int = 1_000_000) -> TwoVpt:
    """Explicit transducer holding the part of m reachable from its initial state.

    Exploration runs over pairs (state, stack top) and remembers which stack
    symbols may lie below each pushed symbol, so a pop is only tried where
    its symbol can be on top. Marker moves happen at the bottom of the stack
    and inner moves above it. A backward read of the left marker that does
    not turn forward would be stuck at head 0, so such rules are dropped.
    """
    if isinstance(m, TwoVpt):
        return m
    alpha = m.alphabet
    states = [m.initial]
    seen = {m.initial}
    gammas: list = []
    below: dict = {}  # stack symbol -> symbols found under it (None = empty stack)
    by_top: dict = {}  # stack symbol -> states reached with it on top
    nodes: set = set()
    todo: deque = deque()
    rules: list = []
    outputs: list = []
    push_cache: dict = {}
    pop_cache: dict = {}

    def add_node(q, top):
        if q not in seen:
            seen.add(q)
            states.append(q)
            if len(states) > max_states:
                raise ResourceLimit(f"more than {max_states} states")
        if (q, top) not in nodes:
            nodes.add((q, top))
            todo.append((q, top))

    def push_from(q, bottom: bool) -> list:
        key = (q, bottom)
        if key not in push_cache:
            found = []
            syms = ((FW, (LMARK,)), (BW, (RMARK,))) if bottom else ((FW, alpha.calls), (BW, alpha.returns))
            for d, letters in syms:
                for a in letters:
                    for q2, d2, g, o in m.push_moves(q, d, a):
                        rules.append(("push", q, d, a, q2, d2, g))
                        outputs.append(o)
                        found.append((q2, g))
            push_cache[key] = found
        return push_cache[key]

    def pop_from(q, g, bottom: bool) -> list:
        key = (q, g, bottom)
        if key not in pop_cache:
            found = []
            syms = ((BW, (LMARK,)), (FW, (RMARK,))) if bottom else ((BW, alpha.calls), (FW, alpha.returns))
            for d, letters in syms:
                for a in letters:
                    for q2, d2, o in m.pop_moves(q, d, a, g):
                        if a == LMARK and d2 != FW:
                            continue
                        rules.append(("pop", q, d, a, g, q2, d2))
                        outputs.append(o)
                        found.append(q2)
            pop_cache[key] = found
        return pop_cache[key]

    add_node(m.initial, None)
    while todo:
        q, top = todo.popleft()
        for q2, g in push_from(q, top is None):
            if g not in below:
                below[g] = set()
                gammas.append(g)
            if top not in below[g]:
                below[g].add(top)
                # a new symbol under g: states already seen with g on top can pop onto it
                for q3 in list(by_top.get(g, ())):
                    for q4 in pop_from(q3, g, top is None):
                        add_node(q4, top)
            add_node(q2, g)
        if top is not None:
            by_top.setdefault(top, set()).add(q)
            for t in list(below[top]):
                for q2 in pop_from(q, top, t is None):
                    add_node(q2, t)
    finals = frozenset(q for q in states if m.is_final(q))
    auto = TwoVpa(alpha, tuple(states), m.initial, finals, tuple(gammas), tuple(rules))
    return TwoVpt(auto, tuple(outputs), m.output_alphabet)


# ------------------------------------------------------------- evaluation


def _step_cap(m, w: NestedWord) -> int:
    n_states = len(m.states) if hasattr(m, "states") else 10_000
    n_gammas = len(m.stack_symbols) if hasattr(m, "stack_symbols") else 64
    return n_states * 2 * (len(w) + 3) * max(1, n_gammas) ** (w.max_depth + 1)


def evaluate_d2vpt(t, w: NestedWord, mode: str = "streaming", stats: dict | None = None) -> tuple:
    """Output of the unique accepting run of a deterministic transducer on w.

    Streaming mode keeps only the current state, direction, head and stack.
    Checked mode also remembers every configuration to detect divergence and
    supports look-around. ``stats['peak_memory']`` receives the peak number
    of stored items (stack entries plus state, direction and head).
    """
    if mode not in ("streaming", "checked"):
        raise ValueError(f"unknown mode {mode!r}")
    la = getattr(t, "lookaround", None)
    if la is not None and mode == "streaming":
        raise ValueError("look-around needs checked mode (or remove it first)")
    labels = check_lookaround_run(la, w) if la is not None else None
    symbols = w.marked()
    calls = _calls_of(t.alphabet)
    end = len(symbols)
    q, i, d = t.initial, 0, FW
    stack: list = []
    out: list = []
    peak = 3
    steps = 0
    cap = _step_cap(t, w)
    visited: set | None = set() if mode == "checked" else None
    while True:
        if i == end:
            if t.is_final(q):
                break
            if d == FW:
                raise Rejected(i, "nonFinalEnd")
        a = read_symbol(symbols, d, i)
        if a is None:
            raise Rejected(i, "stuck")
        if visited is not None:
            conf = (q, i, d, tuple(stack))
            if conf in visited:
                raise Diverged(f"configuration repeated at head {i}")
            visited.add(conf)
        steps += 1
        if steps > cap:
            raise StepLimitExceeded(f"more than {cap} steps")
        label = None
        if labels is not None:
            label = labels.get(i if d == FW else i - 1)
        j = i + 1 if d == FW else i - 1
        if (a in calls) == (d == FW):
            moves = t.push_moves(q, d, a, label) if labels is not None else t.push_moves(q, d, a)
            if not moves:
                raise Rejected(i, "stuck")
            if len(moves) > 1:
                raise NotDeterministic(f"{len(moves)} moves from {(q, d, a)}")
            q, d, g, o = moves[0]
            stack.append(g)
        else:
            if not stack:
                raise Rejected(i, "stuck")
            g = stack[-1]
            moves = t.pop_moves(q, d, a, g, label) if labels is not None else t.pop_moves(q, d, a, g)
            if not moves:
                raise Rejected(i, "stuck")
            if len(moves) > 1:
                raise NotDeterministic(f"{len(moves)} moves from {(q, d, a, g)}")
            q, d, o = moves[0]
            stack.pop()
        i = j
        out.extend(o)
        if len(stack) + 3 > peak:
            peak = len(stack) + 3
    if stats is not None:
        stats["peak_memory"] = peak
        stats["steps"] = steps
    return tuple(out)


def run_d2vpt(t, w: NestedWord, mode: str = "checked"):
    """Output word, or None if the transducer has no accepting run on w."""
    try:
        return evaluate_d2vpt(t, w, mode)
    except (Rejected, Diverged):
        return None


def _output_graph(t, w: NestedWord, limit: int = 500_000):
    symbols = w.marked()
    calls = _calls_of(t.alphabet)
    heights = _heights(symbols, calls)
    labels = None
    la = getattr(t, "lookaround", None)
    if la is not None:
        labels = check_lookaround_run(la, w)
    end = len(symbols)
    start = Configuration(t.initial, 0, FW, ())
    edges: dict = {}
    queue = deque([start])
    seen = {start}
    while queue:
        c = queue.popleft()
        assert len(c.stack) == heights[c.pos]
        if c.pos == end and (c.dir == FW or t.is_final(c.state)):
            edges[c] = []
            continue
        if labels is None:
            succ = successors(t, symbols, calls, c)
        else:
            succ = _labeled_successors(t, symbols, calls, c, labels)
        edges[c] = succ
        for s, _ in succ:
            if s not in seen:
                seen.add(s)
                if len(seen) > limit:
                    raise ResourceLimit("configuration graph too large")
                queue.append(s)
    accepting = {c for c in edges if c.pos == end and t.is_final(c.state)}
    return start, edges, accepting


def _labeled_successors(t, symbols, calls, c, labels):
    a = read_symbol(symbols, c.dir, c.pos)
    if a is None:
        return []
    label = labels.get(c.pos if c.dir == FW else c.pos - 1)
    j = c.pos + 1 if c.dir == FW else c.pos - 1
    out = []
    if (a in calls) == (c.dir == FW):
        for q2, d2, g, o in t.push_moves(c.state, c.dir, a, label):
            out.append((Configuration(q2, j, d2, c.stack + (g,)), o))
    elif c.stack:
        for q2, d2, o in t.pop_moves(c.state, c.dir, a, c.stack[-1], label):
            out.append((Configuration(q2, j, d2, c.stack[:-1]), o))
    return out


def evaluate_2vpt_all(t, w: NestedWord, max_paths: int = 100_000) -> tuple:
    """(outputs of accepting runs without repeated configurations, cyclic flag).

    The flag is set when an output-producing edge lies on a cycle of the
    part of the configuration graph that is reachable and co-reachable.
    """
    start, edges, accepting = _output_graph(t, w)
    # co-reachability
    preds: dict = {}
    for c, succ in edges.items():
        for s, _ in succ:
            preds.setdefault(s, set()).add(c)
    useful = set(accepting)
    stack = list(accepting)
    while stack:
        c = stack.pop()
        for p in preds.get(c, ()):
            if p not in useful:
                useful.add(p)
                stack.append(p)
    outputs: set = set()
    if start in useful:
        count = 0
        on_path = {start}
        # iterative DFS over simple paths inside the useful subgraph
        frames = [(start, iter(edges[start]), ())]
        if start in accepting:
            outputs.add(())
        while frames:
            c, it, out = frames[-1]
            nxt = next(it, None)
            if nxt is None:
                frames.pop()
                on_path.discard(c)
                continue
            s, o = nxt
            if s not in useful or s in on_path:
                continue
            new_out = out + tuple(o)
            if s in accepting:
                outputs.add(new_out)
                count += 1
                if count > max_paths:
                    raise ResourceLimit("too many accepting paths")
            on_path.add(s)
            frames.append((s, iter(edges[s]), new_out))
    flag = _producing_cycle(edges, useful)
    return outputs, flag


def _producing_cycle(edges: dict, useful: set) -> bool:
    """Is some non-empty-output edge inside a strongly connected component?"""
    comp = _scc({c: [s for s, _ in edges[c] if s in useful] for c in useful})
    for c in useful:
        for s, o in edges[c]:
            if o and s in useful and comp[c] == comp[s]:
                return True
    return False


def _scc(graph: dict) -> dict:
    index: dict = {}
    low: dict = {}
    comp: dict = {}
    stack: list = []
    on_stack: set = set()
    counter = 0
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            nxt = next(it, None)
            if nxt is not None:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(graph[nxt])))
                elif nxt in on_stack:
                    low[v] = min(low[v], index[nxt])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp[x] = v
                    if x == v:
                        break
    return comp


# ------------------------------------------------- inverse image, typing


def _subset_dfa(m: Nfa):
    """Deterministic view of an NFA: states are frozensets of NFA states."""
    def step(S, word):
        for a in word:
            S = m.step_set(S, a)
        return S
    return frozenset(m.initial), step


def inverse_image(t: TwoVpt, m: Nfa) -> TwoVpa:
    """2VPA accepting the words w on which t is defined and t(w) is in L(m).

    States pair a state of t with the subset of m's states reached on the
    output produced so far.
    """
    if t.lookaround is not None:
        raise ValueError("remove look-around first")
    init, step = _subset_dfa(m)
    a = t.automaton
    states = [(a.initial, init)]
    seen = set(states)
    rules = []
    todo = list(states)
    gammas = tuple(a.stack_symbols)
    while todo:
        q, S = todo.pop()
        for rid, rule in enumerate(a.rules):
            if rule[1] != q:
                continue
            S2 = step(S, t.output[rid])
            if rule[0] == "push":
                _, _, d, sym, q2, d2, g = rule
                new = ("push", (q, S), d, sym, (q2, S2), d2, g)
            else:
                _, _, d, sym, g, q2, d2 = rule
                new = ("pop", (q, S), d, sym, g, (q2, S2), d2)
            rules.append(new)
            target = (q2, S2)
            if target not in seen:
                seen.add(target)
                states.append(target)
                todo.append(target)
    finals = frozenset(s for s in states if s[0] in a.finals and s[1] & m.finals)
    return TwoVpa(a.alphabet, tuple(states), (a.initial, init), finals, gammas, tuple(rules))


def type_check(t: TwoVpt, a1, a2: Nfa, max_elements: int = 1 << 20) -> tuple:
    """(True, None) when t maps every word of L(a1) into L(a2) (t must be
    defined on all of L(a1)); otherwise (False, counterexample word)."""
    inv = inverse_image(t, a2)
    dvpa = two_vpa_to_dvpa(inv, max_elements)
    # the algebra automaton is complete, so complementing flips the finals
    compl = LazyVpa(dvpa.alphabet, dvpa.initial, lambda s: not dvpa.is_final(s),
                    dvpa.push_moves, dvpa.pop_moves)
    empty, witness = is_empty_vpa(intersect_vpa(a1, compl))
    if empty:
        return True, None
    return False, NestedWord(t.alphabet, witness)


# -------------------------------------------------------------- single use


def producing_states(t: TwoVpt) -> frozenset:
    """States with some outgoing rule that outputs a non-empty word."""
    return frozenset(rule[1] for rule, o in zip(t.automaton.rules, t.output) if o)


def single_use_violations(t, w: NestedWord, producing: Iterable) -> list:
    """Oracle: (head, state) pairs visited twice in a producing state by some run
    from the initial configuration on the marked word of w."""
    producing = set(producing)
    symbols = w.marked()
    calls = _calls_of(t.alphabet)
    end = len(symbols)
    start = Configuration(t.initial, 0, FW, ())
    graph: dict = {}
    queue = deque([start])
    seen = {start}
    while queue:
        c = queue.popleft()
        terminal = c.pos == end and (c.dir == FW or t.is_final(c.state))
        succ = [] if terminal else [s for s, _ in successors(t, symbols, calls, c)]
        graph[c] = succ
        for s in succ:
            if s not in seen:
                seen.add(s)
                queue.append(s)
    found = set()
    for c in graph:
        if c.state not in producing or (c.pos, c.state) in found:
            continue
        # is some configuration at the same head and state reachable in >= 1 step?
        todo = list(graph[c])
        reached = set(todo)
        while todo:
            x = todo.pop()
            if x.state == c.state and x.pos == c.pos:
                found.add((c.pos, c.state))
                break
            for y in graph[x]:
                if y not in reached:
                    reached.add(y)
                    todo.append(y)
    return sorted(found, key=repr)


def single_use_violations_simple(t, w: NestedWord, producing: Iterable, max_paths: int = 200_000) -> list:
    """Oracle by run enumeration: (head, state) pairs visited twice in a
    producing state by some run from the initial configuration that never
    repeats a configuration."""
    producing = set(producing)
    symbols = w.marked()
    calls = _calls_of(t.alphabet)
    end = len(symbols)
    start = Configuration(t.initial, 0, FW, ())
    found = set()
    budget = [max_paths]

    def dfs(c, on_path: set, visits: set):
        budget[0] -= 1
        if budget[0] < 0:
            raise ResourceLimit("too many runs to enumerate")
        key = (c.pos, c.state)
        if c.state in producing:
            if key in visits:
                found.add(key)
            visits = visits | {key}
        if c.pos == end and (c.dir == FW or t.is_final(c.state)):
            return
        for s, _ in successors(t, symbols, calls, c):
            if s not in on_path:
                on_path.add(s)
                dfs(s, on_path, visits)
                on_path.discard(s)

    dfs(start, {start}, frozenset())
    return sorted(found, key=repr)


MARK_SEP = "@"


def marked_alphabet(alphabet: StructuredAlphabet) -> StructuredAlphabet:
    return StructuredAlphabet(tuple(f"{c}{MARK_SEP}{b}" for c in alphabet.calls for b in (0, 1)),
                              tuple(f"{r}{MARK_SEP}{b}" for r in alphabet.returns for b in (0, 1)))


def _unmark(s: str) -> tuple:
    if s in (LMARK, RMARK):
        return s, 0
    base, bit = s.rsplit(MARK_SEP, 1)
    return base, int(bit)


SIGNATURES = ("mark", "L0", "L1", "END")


def single_use_checker(t: TwoVpt, producing: Iterable, only_state=None, only_signature=None) -> TwoVpa:
    """2VPA over the marked alphabet accepting the marked words on which some run
    of t visits one head twice in the same producing state.

    The target head is named either by a marked input symbol (the head right
    after it; at most one mark is allowed), or by an end marker: L0 is the
    head before <L>, L1 the head after <L>, END the head after <R>. The
    checker first sweeps the word to count marks, rewinds, picks a producing
    state p and simulates t. Each time t lands in p at the target it may
    count the visit; a visit reached by a forward move is recognised from the
    symbol just read, one reached by a backward move is confirmed by a peek
    at the symbol on its left. The second counted visit leads to a sweep to
    the right end and acceptance. Restricting ``only_state`` /
    ``only_signature`` yields one component of the union.
    """
    a = t.automaton
    alpha = a.alphabet
    malpha = marked_alphabet(alpha)
    producing = [p for p in a.states if p in set(producing)]
    if only_state is not None:
        producing = [p for p in producing if p == only_state]
    sigs = SIGNATURES if only_signature is None else (only_signature,)
    ext_calls = set(malpha.extended_calls)
    PK, SW = ("peek",), ("sweep",)
    gammas = list(a.stack_symbols) + [PK, SW]
    rules: set = set()

    def variants(s):
        if s in (LMARK, RMARK):
            return [s]
        return [f"{s}{MARK_SEP}0", f"{s}{MARK_SEP}1"]

    # mark count sweep, then rewind
    for k in (0, 1):
        chk = ("chk", k)
        if k == 0:
            rules.add(("push", ("init",), FW, LMARK, chk, FW, SW))
        for s in malpha.symbols:
            _, bit = _unmark(s)
            if k + bit > 1:
                continue
            nxt = ("chk", k + bit)
            if s in ext_calls:
                rules.add(("push", chk, FW, s, nxt, FW, SW))
            else:
                rules.add(("pop", chk, FW, s, SW, nxt, FW))
        rules.add(("pop", chk, FW, RMARK, SW, ("rew",), BW))
    rew = ("rew",)
    rules.add(("push", rew, BW, RMARK, rew, BW, SW))
    for s in malpha.symbols:
        if s in ext_calls:
            rules.add(("pop", rew, BW, s, SW, rew, BW))
        else:
            rules.add(("push", rew, BW, s, rew, BW, SW))

    def phases_after(ph, sig):
        """Phase after counting a visit with signature sig, or None."""
        if sig not in sigs:
            return None
        if ph == 0:
            return ("one", sig)
        return "accept" if ph == ("one", sig) else None

    all_phases = [0] + [("one", s) for s in sigs]
    for p in producing:
        def sim(q, ph):
            return ("sim", p, q, ph)

        # start: the initial configuration is itself a visit to head L0
        rules.add(("pop", rew, BW, LMARK, SW, sim(a.initial, 0), FW))
        if a.initial == p and "L0" in sigs:
            rules.add(("pop", rew, BW, LMARK, SW, sim(a.initial, ("one", "L0")), FW))
        acc = ("acc",)
        for ph in all_phases:
            for rid, rule in enumerate(a.rules):
                if rule[0] == "push":
                    _, q, d, s, q2, d2, g = rule
                else:
                    _, q, d, s, g, q2, d2 = rule
                for ms in variants(s):
                    _, bit = _unmark(ms)

                    def emit(target, direction):
                        if rule[0] == "push":
                            rules.add(("push", sim(q, ph), d, ms, target, direction, g))
                        else:
                            rules.add(("pop", sim(q, ph), d, ms, g, target, direction))

                    # arriving after the right marker in a final state ends the run
                    terminal = s == RMARK and d == FW and q2 in a.finals
                    if not terminal:
                        emit(sim(q2, ph), d2)
                    if q2 != p:
                        continue
                    # count the visit of head reached by this move
                    if d == FW:
                        sig = "L1" if s == LMARK else "END" if s == RMARK else ("mark" if bit else None)
                        if sig is None:
                            continue
                        nph = phases_after(ph, sig)
                        if nph == "accept":
                            emit(acc, FW)
                        elif nph is not None and not terminal:
                            emit(sim(q2, nph), d2)
                    elif s == LMARK:
                        nph = phases_after(ph, "L0")
                        if nph == "accept":
                            emit(acc, FW)
                        elif nph is not None:
                            emit(sim(q2, nph), d2)
                    else:
                        # land facing backward and peek at the left neighbour
                        emit(("pk", p, ph, d2), BW)
        # peeks: read the left neighbour backward, then forward again
        for ph in all_phases:
            for d2 in (FW, BW):
                pk = ("pk", p, ph, d2)
                for ms in malpha.extended_calls:
                    base, bit = _unmark(ms)
                    sig = "L1" if ms == LMARK else ("mark" if bit else None)
                    if sig is None:
                        continue
                    nph = phases_after(ph, sig)
                    if nph is None:
                        continue
                    for g in a.stack_symbols:
                        back = ("pkc", p, nph, d2, g)
                        rules.add(("pop", pk, BW, ms, g, back, FW))
                        if nph == "accept":
                            rules.add(("push", back, FW, ms, ("acc",), FW, g))
                        else:
                            rules.add(("push", back, FW, ms, sim(p, nph), d2, g))
                for ms in malpha.returns:
                    base, bit = _unmark(ms)
                    if not bit:
                        continue
                    nph = phases_after(ph, "mark")
                    if nph is None:
                        continue
                    back = ("pkr", p, nph, d2)
                    rules.add(("push", pk, BW, ms, back, FW, PK))
                    if nph == "accept":
                        rules.add(("pop", back, FW, ms, PK, ("acc",), FW))
                    else:
                        rules.add(("pop", back, FW, ms, PK, sim(p, nph), d2))
    # final sweep to the right end
    acc = ("acc",)
    for s in malpha.extended_calls:
        rules.add(("push", acc, FW, s, acc, FW, SW))
    for s in malpha.extended_returns:
        for g in gammas:
            rules.add(("pop", acc, FW, s, g, acc, FW))
    states = {("init",), rew, acc}
    for rule in rules:
        states.add(rule[1])
        states.add(rule[5] if rule[0] == "push" else rule[5])
    ordered = tuple(sorted(states, key=repr))
    return TwoVpa(malpha, ordered, ("init",), frozenset([acc]), tuple(gammas),
                  tuple(sorted(rules, key=repr)))


def is_single_use(t: TwoVpt, producing: Iterable | None = None, max_elements: int = 1 << 20) -> tuple:
    """(True, None) or (False, (word, head, state)).

    Emptiness of the checker is decided one component (state, signature) at a
    time; the checker's language is the union of the components.
    """
    if producing is None:
        producing = producing_states(t)
    producing = frozenset(producing)
    for rule, o in zip(t.automaton.rules, t.output):
        if o and rule[1] not in producing:
            raise SingleUseIllFormed(f"rule from non-producing state {rule[1]!r} outputs {o}")
    for p in sorted(producing, key=repr):
        for sig in SIGNATURES:
            checker = single_use_checker(t, producing, p, sig)
            empty, witness = is_empty_2vpa(checker, max_elements)
            if not empty:
                word = NestedWord(t.alphabet, tuple(_unmark(s)[0] for s in witness.symbols))
                hits = single_use_violations(t, word, producing)
                if not hits:
                    raise AssertionError("checker witness does not replay")
                head, state = hits[0]
                return False, (word, head, state)
    return True, None


def is_single_use_auto(t: TwoVpt, max_elements: int = 1 << 20) -> tuple:
    return is_single_use(t, producing_states(t), max_elements)
