"""Two-way visibly pushdown automata.

Head positions lie between symbols. On a word u of length n the head ranges
over 0..n; moving forward from i reads u[i+1], moving backward reads u[i]
(1-based). A call read forward or a return read backward pushes; a call read
backward or a return read forward pops. The stack height at head i is
therefore the number of pending calls in u[1..i], whatever the direction.

Acceptance runs on the marked word <L> w <R> (heads 0..n+2): the machine
starts in (q_I, 0, forward) with an empty stack and accepts when it leaves
the marked word on the right in a final state.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .nested_words import (LMARK, RMARK, NestedWord, StructuredAlphabet, decompose,
                           empty as empty_word, wrap as wrap_word, concat as concat_words)
from .relations import BoolOps, WrapAtoms, concat_formula, wrap_formula
from .vpa import ResourceLimit, Vpa, is_empty_vpa

FW = "fw"
BW = "bw"
DIRS = (FW, BW)


def flip(d: str) -> str:
    return BW if d == FW else FW


class NoAcceptingRun(ValueError):
    pass


class GuardsNotDisjoint(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwoVpa:
    """Rules are ``("push", q, d, a, q2, d2, g)`` and ``("pop", q, d, a, g, q2, d2)``."""
    alphabet: StructuredAlphabet
    states: tuple
    initial: object
    finals: frozenset
    stack_symbols: tuple
    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, "finals", frozenset(self.finals))
        states = set(self.states)
        gammas = set(self.stack_symbols)
        calls = set(self.alphabet.extended_calls)
        returns = set(self.alphabet.extended_returns)
        push: dict = {}
        pop: dict = {}
        for rid, rule in enumerate(self.rules):
            where = f"rule {rid + 1}"
            if rule[0] == "push":
                _, q, d, a, q2, d2, g = rule
                if not ((d == FW and a in calls) or (d == BW and a in returns)):
                    raise ValueError(f"{where}: a push reads a call forward or a return backward")
                push.setdefault((q, d, a), []).append((q2, d2, g, rid))
            elif rule[0] == "pop":
                _, q, d, a, g, q2, d2 = rule
                if not ((d == BW and a in calls) or (d == FW and a in returns)):
                    raise ValueError(f"{where}: a pop reads a call backward or a return forward")
                if a == LMARK and d2 != FW:
                    raise ValueError(f"{where}: reading {LMARK} backward must turn forward")
                pop.setdefault((q, d, a, g), []).append((q2, d2, rid))
            else:
                raise ValueError(f"{where}: bad rule kind {rule[0]!r}")
            if d not in DIRS or d2 not in DIRS:
                raise ValueError(f"{where}: bad direction")
            if q not in states or q2 not in states:
                raise ValueError(f"{where}: undeclared state")
            if g not in gammas:
                raise ValueError(f"{where}: undeclared stack symbol {g!r}")
        if self.initial not in states or not self.finals <= states:
            raise ValueError("initial/final states must be declared")
        object.__setattr__(self, "_push", push)
        object.__setattr__(self, "_pop", pop)
        object.__setattr__(self, "_kernel", None)

    def push_rules_from(self, q, d, a) -> list:
        return self._push.get((q, d, a), [])

    def pop_rules_from(self, q, d, a, g) -> list:
        return self._pop.get((q, d, a, g), [])

    def push_moves(self, q, d, a) -> list:
        return [(q2, d2, g, ()) for q2, d2, g, _ in self._push.get((q, d, a), ())]

    def pop_moves(self, q, d, a, g) -> list:
        return [(q2, d2, ()) for q2, d2, _ in self._pop.get((q, d, a, g), ())]

    def is_final(self, q) -> bool:
        return q in self.finals

    @property
    def is_deterministic(self) -> bool:
        return (all(len(v) <= 1 for v in self._push.values())
                and all(len(v) <= 1 for v in self._pop.values()))

    @property
    def index(self) -> dict:
        return {q: i for i, q in enumerate(self.states)}


class Configuration(NamedTuple):
    state: object
    pos: int
    dir: str
    stack: tuple


def read_symbol(symbols: tuple, d: str, i: int):
    """Symbol read when moving from head i in direction d, or None at the border."""
    if d == FW:
        return symbols[i] if i < len(symbols) else None
    return symbols[i - 1] if i > 0 else None


def successors(m, symbols: tuple, calls: frozenset, c: Configuration) -> list:
    """All (configuration, output) successors of c for any machine exposing moves."""
    a = read_symbol(symbols, c.dir, c.pos)
    if a is None:
        return []
    j = c.pos + 1 if c.dir == FW else c.pos - 1
    is_call = a in calls
    out = []
    if is_call == (c.dir == FW):
        for q2, d2, g, o in m.push_moves(c.state, c.dir, a):
            out.append((Configuration(q2, j, d2, c.stack + (g,)), o))
    elif c.stack:
        for q2, d2, o in m.pop_moves(c.state, c.dir, a, c.stack[-1]):
            out.append((Configuration(q2, j, d2, c.stack[:-1]), o))
    return out


def _calls_of(alphabet: StructuredAlphabet) -> frozenset:
    return frozenset(alphabet.extended_calls)


def step(a, w: NestedWord, c: Configuration) -> set:
    """Successor configurations of c on the marked word of w."""
    return {s for s, _ in successors(a, w.marked(), _calls_of(a.alphabet), c)}


def _heights(symbols: tuple, calls: frozenset) -> list:
    h = [0]
    for s in symbols:
        h.append(h[-1] + (1 if s in calls else -1))
    return h


def explore(m, symbols: tuple, start: Configuration, is_exit, limit: int = 2_000_000):
    """Breadth-first search of the configuration graph from start.

    Exit configurations are recorded and not expanded. Returns (seen, exits).
    Asserts the stack-height law on every visited configuration.
    """
    calls = _calls_of(m.alphabet)
    heights = _heights(symbols, calls)
    seen = {start}
    exits = []
    queue = deque([start])
    while queue:
        c = queue.popleft()
        assert len(c.stack) == heights[c.pos], "stack height differs from nesting depth"
        if is_exit(c):
            exits.append(c)
            continue
        for s, _ in successors(m, symbols, calls, c):
            if s not in seen:
                seen.add(s)
                if len(seen) > limit:
                    raise ResourceLimit("configuration graph too large")
                queue.append(s)
    return seen, exits


# ------------------------------------------------------------- traversals


class Traversal(NamedTuple):
    """Four relations over state indices, each a tuple of row bitmasks."""
    ll: tuple
    lr: tuple
    rl: tuple
    rr: tuple

    def pairs(self, states: tuple, rel: str) -> frozenset:
        rows = getattr(self, rel)
        return frozenset((states[i], states[j]) for i, row in enumerate(rows)
                         for j in range(len(states)) if row >> j & 1)


def traversal_oracle(a, w: NestedWord) -> Traversal:
    """Traversal of the unmarked word w by reachability in the configuration graph."""
    symbols = w.symbols
    n = len(symbols)
    idx = {q: i for i, q in enumerate(a.states)}
    k = len(a.states)
    rows = {rel: [0] * k for rel in ("ll", "lr", "rl", "rr")}

    def is_exit(c):
        return (c.pos == n and c.dir == FW) or (c.pos == 0 and c.dir == BW)

    for p in a.states:
        for d1, side in ((FW, "l"), (BW, "r")):
            start = Configuration(p, 0 if d1 == FW else n, d1, ())
            _, exits = explore(a, symbols, start, is_exit)
            for c in exits:
                rel = side + ("r" if c.dir == FW else "l")
                rows[rel][idx[p]] |= 1 << idx[c.state]
    return Traversal(*(tuple(rows[rel]) for rel in ("ll", "lr", "rl", "rr")))


class _Kernel:
    """Per-machine cache of the boolean wrap atoms."""

    def __init__(self, a: TwoVpa):
        self.ops = BoolOps(len(a.states))
        self.idx = a.index
        self.a = a
        self.atoms: dict = {}
        self.accept_atoms = build_atoms(a, self.ops, self.idx, LMARK, RMARK, accepting=True)
        self.unit = Traversal(self.ops.empty(), self.ops.identity(), self.ops.identity(), self.ops.empty())

    def wrap_atoms(self, c, r) -> WrapAtoms:
        key = (c, r)
        if key not in self.atoms:
            self.atoms[key] = build_atoms(self.a, self.ops, self.idx, c, r)
        return self.atoms[key]


def build_atoms(a, ops, idx: dict, c, r, output=None, accepting=False) -> WrapAtoms:
    """Rule relations used when wrapping with (c, r); ``output(rid)`` labels edges.

    With ``accepting``, a move that reads r forward into a final state is
    also taken as a forward exit, so arriving after the right marker in a
    final state counts whatever the new direction.
    """
    di = {FW: 0, BW: 1}
    push_c: dict = {}
    pop_c: dict = {}
    push_r: dict = {}
    pop_r: dict = {}

    def add(table, g, d, i, j, rid):
        table.setdefault(g, ([], []))[di[d]].append((i, j, output(rid) if output else ()))

    for rid, rule in enumerate(a.rules):
        if rule[0] == "push":
            _, q, d, s, q2, d2, g = rule
            if d == FW and s == c:
                add(push_c, g, d2, idx[q], idx[q2], rid)
            elif d == BW and s == r:
                add(push_r, g, d2, idx[q], idx[q2], rid)
        else:
            _, q, d, s, g, q2, d2 = rule
            if d == BW and s == c:
                add(pop_c, g, d2, idx[q], idx[q2], rid)
            elif d == FW and s == r:
                add(pop_r, g, d2, idx[q], idx[q2], rid)
                if accepting and d2 == BW and q2 in a.finals:
                    add(pop_r, g, FW, idx[q], idx[q2], rid)

    def conv(table):
        return {g: (ops.from_edges(f), ops.from_edges(b)) for g, (f, b) in table.items()}

    return WrapAtoms(ops, conv(push_c), conv(pop_c), conv(push_r), conv(pop_r))


def kernel(a: TwoVpa) -> _Kernel:
    if a._kernel is None:
        object.__setattr__(a, "_kernel", _Kernel(a))
    return a._kernel


def unit_traversal(a: TwoVpa) -> Traversal:
    return kernel(a).unit


def concat_traversal(a: TwoVpa, t1: Traversal, t2: Traversal) -> Traversal:
    return Traversal(*concat_formula(kernel(a).ops, t1, t2))


def wrap_traversal(a: TwoVpa, c: str, t: Traversal, r: str) -> Traversal:
    return Traversal(*wrap_formula(kernel(a).wrap_atoms(c, r), t))


def fold_traversal(a: TwoVpa, w: NestedWord) -> Traversal:
    """Traversal of w computed from its parse with the algebra operations."""
    def hedge(blocks) -> Traversal:
        t = unit_traversal(a)
        for c, inner, r in blocks:
            t = concat_traversal(a, t, wrap_traversal(a, c, hedge(inner), r))
        return t

    return hedge(decompose(w))


def is_accepting_traversal(a: TwoVpa, t: Traversal) -> bool:
    marked = Traversal(*wrap_formula(kernel(a).accept_atoms, t))
    idx = a.index
    row = marked.lr[idx[a.initial]]
    return any(row >> idx[f] & 1 for f in a.finals)


# ----------------------------------------------------------- the algebra


class TransitionAlgebra:
    """Traversal classes of all nested words, closed under concatenation and wrapping.

    Elements are numbered; 0 is the class of the empty word. ``wrap_table``
    maps (c, m, r) to the class of c w r, and ``block_mult`` maps (m, b) to
    the class of the product for every element m and every wrapped class b.
    Since every nested word is a product of wrapped blocks these two tables
    determine the algebra; the full concatenation table is computed on demand.
    """

    def __init__(self, machine: TwoVpa, elements: list, derivations: list,
                 wrap_table: dict, block_mult: dict, blocks: list, accepting: frozenset):
        self.machine = machine
        self.elements = elements
        self.derivations = derivations
        self.wrap_table = wrap_table
        self.block_mult = block_mult
        self.blocks = blocks
        self.accepting = accepting
        self.index = {t: i for i, t in enumerate(elements)}
        self.unit = 0
        self._concat: dict = {}
        self._witness: dict = {}

    def __len__(self) -> int:
        return len(self.elements)

    def concat(self, i: int, j: int) -> int:
        key = (i, j)
        if key not in self._concat:
            if (i, j) in self.block_mult:
                self._concat[key] = self.block_mult[(i, j)]
            else:
                t = concat_traversal(self.machine, self.elements[i], self.elements[j])
                self._concat[key] = self.index[t]
        return self._concat[key]

    def wrap(self, c: str, i: int, r: str) -> int:
        return self.wrap_table[(c, i, r)]

    def concat_table(self) -> dict:
        n = len(self.elements)
        return {(i, j): self.concat(i, j) for i in range(n) for j in range(n)}

    def evaluate(self, w: NestedWord) -> int:
        def hedge(blocks) -> int:
            m = self.unit
            for c, inner, r in blocks:
                m = self.block_mult[(m, self.wrap_table[(c, hedge(inner), r)])]
            return m

        return hedge(decompose(w))

    def witness(self, i: int) -> NestedWord:
        """A nested word whose traversal is element i."""
        if i not in self._witness:
            d = self.derivations[i]
            alpha = self.machine.alphabet
            if d[0] == "eps":
                w = empty_word(alpha)
            elif d[0] == "wrap":
                w = wrap_word(d[1], self.witness(d[2]), d[3])
            else:
                w = concat_words(self.witness(d[1]), self.witness(d[2]))
            self._witness[i] = w
        return self._witness[i]


def compute_algebra(a: TwoVpa, max_elements: int = 1 << 20) -> TransitionAlgebra:
    alpha = a.alphabet
    unit = unit_traversal(a)
    elements = [unit]
    derivations: list = [("eps",)]
    index = {unit: 0}
    wrap_table: dict = {}
    block_mult: dict = {}
    blocks: list = []
    is_block: set = set()
    queue = deque([0])

    def intern(t: Traversal, deriv) -> int:
        i = index.get(t)
        if i is None:
            i = len(elements)
            if i >= max_elements:
                raise ResourceLimit(f"transition algebra exceeds {max_elements} elements")
            index[t] = i
            elements.append(t)
            derivations.append(deriv)
            queue.append(i)
        return i

    while queue:
        x = queue.popleft()
        tx = elements[x]
        for c in alpha.calls:
            for r in alpha.returns:
                b = intern(wrap_traversal(a, c, tx, r), ("wrap", c, x, r))
                wrap_table[(c, x, r)] = b
                if b not in is_block:
                    is_block.add(b)
                    blocks.append(b)
                    for m in range(len(elements)):
                        if (m, b) not in block_mult:
                            block_mult[(m, b)] = intern(concat_traversal(a, elements[m], elements[b]),
                                                        ("cat", m, b))
        for b in blocks:
            if (x, b) not in block_mult:
                block_mult[(x, b)] = intern(concat_traversal(a, tx, elements[b]), ("cat", x, b))
        # elements created while scanning are handled when dequeued
    accepting = frozenset(i for i, t in enumerate(elements) if is_accepting_traversal(a, t))
    return TransitionAlgebra(a, elements, derivations, wrap_table, block_mult, blocks, accepting)


class AlgebraDvpa:
    """The deterministic VPA evaluating the algebra: states are element numbers,
    a call pushes (c, current element) and restarts from the unit; a return
    wraps the inner element and multiplies it onto the stacked one."""

    def __init__(self, alg: TransitionAlgebra):
        self.alg = alg
        self.alphabet = alg.machine.alphabet
        self.initial = frozenset([alg.unit])
        self.states = tuple(range(len(alg)))

    def is_final(self, m) -> bool:
        return m in self.alg.accepting

    def push_moves(self, m, c) -> list:
        return [(self.alg.unit, (c, m))]

    def pop_moves(self, m, r, g) -> list:
        c, below = g
        return [self.alg.block_mult[(below, self.alg.wrap_table[(c, m, r)])]]

    def to_vpa(self) -> Vpa:
        alg = self.alg
        gammas = tuple((c, m) for c in self.alphabet.calls for m in self.states)
        rules = [("push", m, c, alg.unit, (c, m)) for m in self.states for c in self.alphabet.calls]
        for (c, m, r), b in alg.wrap_table.items():
            for below in self.states:
                rules.append(("pop", m, r, (c, below), alg.block_mult[(below, b)]))
        return Vpa(self.alphabet, self.states, self.initial, alg.accepting, gammas, tuple(rules))


def algebra_to_dvpa(alg: TransitionAlgebra) -> AlgebraDvpa:
    return AlgebraDvpa(alg)


def two_vpa_to_dvpa(a: TwoVpa, max_elements: int = 1 << 20) -> AlgebraDvpa:
    return algebra_to_dvpa(compute_algebra(a, max_elements))


def accepts_2vpa(a, w: NestedWord, method: str = "oracle") -> bool:
    """Membership on the marked word; ``oracle`` searches the configuration
    graph, ``algebra`` folds the traversal and tests the accepting class."""
    if method == "algebra":
        return is_accepting_traversal(a, fold_traversal(a, w))
    symbols = w.marked()
    end = len(symbols)
    _, exits = explore(a, symbols, Configuration(a.initial, 0, FW, ()),
                       lambda c: c.pos == end and (c.dir == FW or a.is_final(c.state)))
    return any(a.is_final(c.state) for c in exits)


def is_empty_2vpa(a: TwoVpa, max_elements: int = 1 << 20) -> tuple:
    """(True, None) when L(a) is empty, else (False, witness word)."""
    dvpa = two_vpa_to_dvpa(a, max_elements)
    empty, symbols = is_empty_vpa(dvpa)
    if empty:
        return True, None
    return False, NestedWord(a.alphabet, symbols)


# ------------------------------------------------------------ look-around


@dataclass(frozen=True, eq=False)
class LookAround:
    """Guards: rule id -> checker state. Unguarded rules are absent from the map."""
    checker: Vpa
    guard: dict

    def label_ok(self, rid: int, label) -> bool:
        g = self.guard.get(rid)
        return g is None or g == label


def check_lookaround_run(la: LookAround, w: NestedWord) -> dict:
    """Map position p (1..|w|) to the checker's state right after reading w(p)
    in its unique accepting run."""
    b = la.checker
    layer = {(q, ()): None for q in b.initial}
    layers = [layer]
    for s in w.symbols:
        nxt: dict = {}
        for conf in layer:
            q, stack = conf
            if s in b.alphabet.calls:
                for q2, g in b.push_moves(q, s):
                    nxt.setdefault((q2, stack + (g,)), conf)
            elif stack:
                for q2 in b.pop_moves(q, s, stack[-1]):
                    nxt.setdefault((q2, stack[:-1]), conf)
        layer = nxt
        layers.append(layer)
    ends = [conf for conf in layer if b.is_final(conf[0])]
    if not ends:
        raise NoAcceptingRun(" ".join(w.symbols))
    if len(ends) > 1:
        raise ValueError("look-around checker has several accepting runs")
    labels = {}
    conf = ends[0]
    for p in range(len(w), 0, -1):
        labels[p] = conf[0]
        conf = layers[p][conf]
    return labels


def validate_guards(rules: tuple, la: LookAround) -> None:
    """Rules sharing a left-hand side must carry distinct, non-missing guards."""
    groups: dict = {}
    for rid, rule in enumerate(rules):
        lhs = rule[1:4] if rule[0] == "push" else rule[1:5]
        groups.setdefault((rule[0],) + tuple(lhs), []).append(rid)
    for rids in groups.values():
        if len(rids) > 1:
            guards = [la.guard.get(r) for r in rids]
            if None in guards or len(set(guards)) != len(guards):
                raise GuardsNotDisjoint(f"rules {[r + 1 for r in rids]} share a left-hand side")
