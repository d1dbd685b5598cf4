"""Streaming tree-to-string transducers and the translation from deterministic
two-way transducers through output matrices.

An STST reads a nested word once, left to right. It keeps a valuation of its
word registers. At a call it stacks (gamma, current valuation after the push
update) and restarts with all registers empty; at a return the pop update may
read the current registers X and the stacked ones X'. The output is the
final-output word of the last state under the last valuation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .nested_words import LMARK, RMARK, NestedWord, StructuredAlphabet, decompose
from .relations import INF, WordOps, concat_formula, wrap_formula
from .twovpa import BW, FW, build_atoms, compute_algebra
from .twovpt import Rejected


class NoFinalOutput(ValueError):
    def __init__(self, state):
        super().__init__(f"no final output in state {state!r}")
        self.state = state


class ProducingCycle(ValueError):
    """A needed output-matrix entry runs through a cycle that produces output."""

    def __init__(self, entries):
        super().__init__(f"output-producing cycle on entries {sorted(entries, key=repr)}")
        self.entries = entries


class Reg(NamedTuple):
    """Register reference inside an update word; ``primed`` reads the stacked copy."""
    name: str
    primed: bool = False

    def __str__(self) -> str:
        return self.name + ("'" if self.primed else "")


@dataclass(frozen=True, eq=False)
class Stst:
    """Deterministic STST. Update words are tuples of output symbols and Reg.

    A register missing from an update keeps its value (X <- X).
    """
    alphabet: StructuredAlphabet
    output_alphabet: tuple
    states: tuple
    initial: object
    stack_symbols: tuple
    registers: tuple
    push_delta: dict  # (q, c) -> (q2, g, update)
    pop_delta: dict  # (q, r, g) -> (q2, update)
    final_output: dict  # q -> word
    _regs: frozenset = field(default=frozenset(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_regs", frozenset(self.registers))
        outs = set(self.output_alphabet)
        if outs & self._regs:
            raise ValueError("register names clash with output symbols")
        states = set(self.states)
        if self.initial not in states:
            raise ValueError("initial state not declared")
        for (q, c), (q2, g, upd) in self.push_delta.items():
            if c not in self.alphabet.calls or q not in states or q2 not in states:
                raise ValueError(f"bad push rule from {(q, c)!r}")
            self._check_update(upd, primed_ok=False)
        for (q, r, g), (q2, upd) in self.pop_delta.items():
            if r not in self.alphabet.returns or q not in states or q2 not in states:
                raise ValueError(f"bad pop rule from {(q, r, g)!r}")
            self._check_update(upd, primed_ok=True)
        for q, word in self.final_output.items():
            if q not in states:
                raise ValueError(f"final output for undeclared state {q!r}")
            self._check_word(word, primed_ok=False)

    def _check_update(self, upd: dict, primed_ok: bool) -> None:
        for x, word in upd.items():
            if x not in self._regs:
                raise ValueError(f"update of undeclared register {x!r}")
            self._check_word(word, primed_ok)

    def _check_word(self, word, primed_ok: bool) -> None:
        outs = set(self.output_alphabet)
        for tok in word:
            if isinstance(tok, Reg):
                if tok.name not in self._regs:
                    raise ValueError(f"undeclared register {tok.name!r}")
                if tok.primed and not primed_ok:
                    raise ValueError(f"primed register {tok} outside a pop update")
            elif tok not in outs:
                raise ValueError(f"output symbol {tok!r} not declared")

    def is_copyless(self) -> bool:
        updates = [u for _, _, u in self.push_delta.values()] + [u for _, u in self.pop_delta.values()]
        for upd in updates:
            seen = set()
            # registers left out of the update implicitly copy themselves
            for x in self.registers:
                for tok in upd.get(x, (Reg(x),)):
                    if isinstance(tok, Reg):
                        if tok in seen:
                            return False
                        seen.add(tok)
        return True


def _subst(word, current: dict, stacked: dict | None) -> tuple:
    out: list = []
    for tok in word:
        if isinstance(tok, Reg):
            val = (stacked if tok.primed else current).get(tok.name, ())
            out.extend(val)
        else:
            out.append(tok)
    return tuple(out)


def _apply(upd: dict, current: dict, stacked: dict | None) -> dict:
    # registers absent from the valuation hold the empty word
    new = {}
    for x in set(upd) | set(current):
        word = upd.get(x)
        v = current.get(x, ()) if word is None else _subst(word, current, stacked)
        if v:
            new[x] = v
    return new


def evaluate_stst(s: Stst, w: NestedWord, stats: dict | None = None) -> tuple:
    q = s.initial
    val: dict = {}
    stack: list = []
    peak = 0
    for i, a in enumerate(w.symbols, start=1):
        if a in s.alphabet.calls:
            move = s.push_delta.get((q, a))
            if move is None:
                raise Rejected(i, "stuck")
            q, g, upd = move
            stack.append((g, _apply(upd, val, None)))
            val = {}
            peak = max(peak, len(stack))
        else:
            if not stack:
                raise Rejected(i, "stuck")
            g, saved = stack.pop()
            move = s.pop_delta.get((q, a, g))
            if move is None:
                raise Rejected(i, "stuck")
            q, upd = move
            val = _apply(upd, val, saved)
    word = s.final_output.get(q)
    if word is None:
        raise NoFinalOutput(q)
    if stats is not None:
        stats["peak_stack"] = peak
    return _subst(word, val, None)


def run_stst(s: Stst, w: NestedWord):
    """Output word, or None where the transducer is undefined."""
    try:
        return evaluate_stst(s, w)
    except (Rejected, NoFinalOutput):
        return None


def exponential_stst() -> Stst:
    """One state, one register: a call stacks aXX, a return restores the
    stacked value. On (cr)^n it outputs a^(2^n - 1)."""
    alpha = StructuredAlphabet(("c",), ("r",))
    x = Reg("X")
    return Stst(alpha, ("a",), ("q",), "q", ("g",), ("X",),
                {("q", "c"): ("q", "g", {"X": ("a", x, x)})},
                {("q", "r", "g"): ("q", {"X": (Reg("X", True),)})},
                {"q": (x,)})


def copy_stst(alphabet: StructuredAlphabet) -> Stst:
    """Outputs its input: the call is appended before stacking, the inner
    value and the return after popping."""
    x = Reg("X")
    push = {("q", c): ("q", "g", {"X": (x, c)}) for c in alphabet.calls}
    pop = {("q", r, "g"): ("q", {"X": (Reg("X", True), x, r)}) for r in alphabet.returns}
    return Stst(alphabet, alphabet.symbols, ("q",), "q", ("g",), ("X",), push, pop, {"q": (x,)})


# ------------------------------------------------------------ output matrices


class OutputMatrix(NamedTuple):
    """Outputs of the traversals of a word: ``ll[(i, j)]`` is the set of
    output words of runs entering on the left in state i and leaving on the
    left in state j (the other fields likewise). Absent keys mean no run."""
    ll: dict
    lr: dict
    rl: dict
    rr: dict

    def support(self, n: int) -> tuple:
        """Boolean rows, comparable with a Traversal over n states."""
        return matrix_support(self, n)


class _OutputKernel:
    def __init__(self, t):
        self.t = t
        a = t.automaton
        self.n = len(a.states)
        self.ops = WordOps(self.n)
        self.idx = a.index
        self.atoms: dict = {}
        self.accept_atoms = build_atoms(a, self.ops, self.idx, LMARK, RMARK,
                                        output=self._out, accepting=True)

    def _out(self, rid):
        return self.t.output[rid]

    def wrap_atoms(self, c, r):
        if (c, r) not in self.atoms:
            self.atoms[(c, r)] = build_atoms(self.t.automaton, self.ops, self.idx, c, r, output=self._out)
        return self.atoms[(c, r)]


_KERNELS: dict = {}


def _kernel(t) -> _OutputKernel:
    k = _KERNELS.get(id(t))
    if k is None or k.t is not t:
        k = _OutputKernel(t)
        _KERNELS[id(t)] = k
    return k


def _check_entries(m: tuple, what: str) -> OutputMatrix:
    bad = []
    for rel, name in zip(m, ("ll", "lr", "rl", "rr")):
        for key, v in rel.items():
            if v is INF:
                bad.append((name,) + key)
            else:
                assert len(v) == 1, f"{what}: entry {(name,) + key} has {len(v)} words"
    if bad:
        raise ProducingCycle(bad)
    return OutputMatrix(*m)


def unit_output_matrix(t) -> OutputMatrix:
    ops = _kernel(t).ops
    return OutputMatrix({}, ops.identity(), ops.identity(), {})


def concat_output_matrices(t, m1: OutputMatrix, m2: OutputMatrix) -> OutputMatrix:
    return _check_entries(concat_formula(_kernel(t).ops, m1, m2), "concat")


def wrap_output_matrix(t, c: str, m: OutputMatrix, r: str) -> OutputMatrix:
    return _check_entries(wrap_formula(_kernel(t).wrap_atoms(c, r), m), "wrap")


def fold_output_matrix(t, w: NestedWord) -> OutputMatrix:
    def hedge(blocks) -> OutputMatrix:
        m = unit_output_matrix(t)
        for c, inner, r in blocks:
            m = concat_output_matrices(t, m, wrap_output_matrix(t, c, hedge(inner), r))
        return m

    return hedge(decompose(w))


def matrix_support(m: OutputMatrix, n: int) -> tuple:
    """The four boolean relations of m as row bitmasks (a Traversal's layout)."""
    out = []
    for rel in m:
        rows = [0] * n
        for i, j in rel:
            rows[i] |= 1 << j
        out.append(tuple(rows))
    return tuple(out)


def output_matrix_oracle(t, w: NestedWord) -> OutputMatrix:
    """Direct simulation of the deterministic machine from every entry of the
    unmarked word w, accumulating output until it leaves the word."""
    a = t.automaton
    symbols = w.symbols
    n = len(symbols)
    calls = frozenset(t.alphabet.extended_calls)
    idx = a.index
    rels = {"ll": {}, "lr": {}, "rl": {}, "rr": {}}
    for p in a.states:
        for d0, side in ((FW, "l"), (BW, "r")):
            q, i, d = p, (0 if d0 == FW else n), d0
            stack: list = []
            out: list = []
            seen = set()
            while True:
                if (i == n and d == FW) or (i == 0 and d == BW):
                    rel = side + ("r" if d == FW else "l")
                    rels[rel][(idx[p], idx[q])] = frozenset([tuple(out)])
                    break
                conf = (q, i, d, tuple(stack))
                if conf in seen:
                    break
                seen.add(conf)
                s = symbols[i] if d == FW else symbols[i - 1]
                j = i + 1 if d == FW else i - 1
                if (s in calls) == (d == FW):
                    moves = t.push_moves(q, d, s)
                    if not moves:
                        break
                    q, d, g, o = moves[0]
                    stack.append(g)
                else:
                    if not stack:
                        break
                    moves = t.pop_moves(q, d, s, stack[-1])
                    if not moves:
                        break
                    q, d, o = moves[0]
                    stack.pop()
                out.extend(o)
                i = j
    return OutputMatrix(rels["ll"], rels["lr"], rels["rl"], rels["rr"])


# ----------------------------------------------------------------- translation

RELS = ("ll", "lr", "rl", "rr")
# which copy of the registers holds the prefix (left factor) at a return
ORIENTATIONS = ("prefix-stacked", "prefix-current")


def register_name(rel: str, i: int, j: int) -> str:
    return f"x.{rel}.{i}.{j}"


def _variable_matrix(trav, primed: bool) -> OutputMatrix:
    rels = []
    for rel, rows in zip(RELS, trav):
        entries = {}
        for i, row in enumerate(rows):
            j = 0
            while row >> j:
                if row >> j & 1:
                    entries[(i, j)] = frozenset([(Reg(register_name(rel, i, j), primed),)])
                j += 1
        rels.append(entries)
    return OutputMatrix(*rels)


def d2vpt_to_stst(t, orientation: str = "prefix-stacked", max_elements: int = 1 << 20) -> Stst:
    """Equivalent STST of a deterministic two-way transducer without look-around.

    States are traversal classes; register x.rel.i.j holds the output of the
    traversal entry (rel, i, j) of the current level's prefix. A return
    combines the stacked prefix matrix with the wrapped inner matrix.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"unknown orientation {orientation!r}")
    if getattr(t, "lookaround", None) is not None:
        raise ValueError("remove look-around before translating")
    a = t.automaton
    if not a.is_deterministic:
        raise ValueError("transducer is not deterministic")
    alg = compute_algebra(a, max_elements)
    k = _kernel(t)
    alpha = a.alphabet
    prefix_primed = orientation == "prefix-stacked"
    registers: dict = {}

    def regs_of(m: int) -> list:
        return [register_name(rel, i, j) for rel, rows in zip(RELS, alg.elements[m])
                for i, row in enumerate(rows) for j in range(k.n) if row >> j & 1]

    for m in range(len(alg)):
        for x in regs_of(m):
            registers[x] = None
    push_delta = {}
    pop_delta = {}
    gammas = []
    for m in range(len(alg)):
        for c in alpha.calls:
            g = (c, m)
            gammas.append(g)
            push_delta[(m, c)] = (alg.unit, g, {})
    for (c, inner, r), b in alg.wrap_table.items():
        wrapped = wrap_output_matrix(t, c, _variable_matrix(alg.elements[inner], not prefix_primed), r)
        for below in range(len(alg)):
            target = alg.block_mult[(below, b)]
            prod = concat_output_matrices(t, _variable_matrix(alg.elements[below], prefix_primed), wrapped)
            upd = {}
            for rel, entries in zip(RELS, prod):
                for (i, j), words in entries.items():
                    (word,) = words
                    upd[register_name(rel, i, j)] = word
            assert set(upd) == set(regs_of(target)), "output matrix support differs from traversal"
            for x in regs_of(inner):
                upd.setdefault(x, ())
            pop_delta[(inner, r, (c, below))] = (target, upd)
    final_output = {}
    init = a.index[a.initial]
    for m in alg.accepting:
        marked = wrap_formula(k.accept_atoms, _variable_matrix(alg.elements[m], False))
        words = set()
        for f in a.finals:
            v = marked[1].get((init, a.index[f]))
            if v is INF:
                raise ProducingCycle([("lr", init, a.index[f])])
            if v:
                words |= v
        assert len(words) == 1, f"class {m}: {len(words)} final outputs"
        final_output[m] = next(iter(words))
    outs = t.output_symbols
    return Stst(alpha, tuple(outs), tuple(range(len(alg))), alg.unit, tuple(gammas),
                tuple(registers), push_delta, pop_delta, final_output)
