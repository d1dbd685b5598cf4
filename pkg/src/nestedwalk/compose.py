"""Composition of two-way transducers with letter-to-letter relabelings.

The central construction runs a two-way transducer B on the output of a
deterministic letter-to-letter VPT A without ever storing that output. The
composed machine C keeps B's state together with A's state at the head.
Moving in A's direction is straightforward. Moving against it needs A's state
one block earlier, which is recovered Hopcroft-Ullman style, restricted to the
current hedge:

* ``main``      B's state and A's state at the head; every stack entry also
                stores A's state before the call (a local initial state).
* ``S``         reads a block backwards computing A's summary function of it.
* ``hu``        walks left block by block keeping, for every candidate A-state
                there, the A-state it leads to just before the block to rewind.
* ``end``/``fol`` the candidate became unique right before the block: follow A
                through it.
* ``cleared``/``rd``/``par`` candidates disagreed one block further right:
                skip that block and follow two A-runs forward until they meet,
                which happens exactly after the block to rewind.
* ``restart``   candidates still ambiguous at the start of the hedge: the stack
                entry of the enclosing call gives the true start state.
* ``fin``       A's state before the return is known: do B's move.

The same core works in the mirrored orientation, where A is co-deterministic
and followed right to left; there a prelude first walks to the right end.
"""
from __future__ import annotations

from .nested_words import LMARK, RMARK, StructuredAlphabet
from .twovpa import BW, FW, TwoVpa, flip
from .twovpt import LazyTwoVpt, TwoVpt
from .vpa import NotUnambiguous, Vpa, Vpt, codeterminize_l2l, is_unambiguous, reverse_vpt


class NotLetterToLetter(ValueError):
    pass


class NotDeterministicFirstStage(ValueError):
    pass


MARK_GAMMA = ("marker",)


class _FirstStage:
    """Deterministic letter-to-letter VPT (oriented), extended with markers:
    the left marker pushes from the initial state, the right marker pops from
    final states. States are handled by index."""

    def __init__(self, t: Vpt, lmark: str, rmark: str):
        a = t.automaton
        if len(a.initial) != 1:
            raise NotDeterministicFirstStage("first stage needs exactly one initial state")
        self.states = list(a.states)
        self.n = len(self.states)
        self.idx = {q: i for i, q in enumerate(self.states)}
        self.q0 = self.idx[next(iter(a.initial))]
        self.finals = frozenset(self.idx[q] for q in a.finals)
        self.lmark, self.rmark = lmark, rmark
        self.calls = frozenset(a.alphabet.calls) | {lmark}
        self._push: dict = {}
        self._pop: dict = {}
        for rule, o in zip(a.rules, t.output):
            if rule[0] == "push":
                _, q, c, q2, g = rule
                key, val, table = (self.idx[q], c), (self.idx[q2], g, o[0]), self._push
            else:
                _, q, r, g, q2 = rule
                key, val, table = (self.idx[q], r, g), (self.idx[q2], o[0]), self._pop
            if key in table:
                raise NotDeterministicFirstStage(f"two rules for {key}")
            table[key] = val
        self.ident = tuple(range(self.n))
        self._upd: dict = {}

    def push(self, q: int, c):
        """(state, stack symbol, output letter) or None."""
        if c == self.lmark:
            return (q, MARK_GAMMA, c) if q == self.q0 else None
        return self._push.get((q, c))

    def pop(self, q: int, r, g):
        """(state, output letter) or None."""
        if r == self.rmark:
            return (q, r) if g == MARK_GAMMA and q in self.finals else None
        return self._pop.get((q, r, g))

    def upd(self, c, s: tuple, r) -> tuple:
        """Summary function of the block c h r where s is the function of h."""
        key = (c, s, r)
        res = self._upd.get(key)
        if res is None:
            out = []
            for y in range(self.n):
                v = -1
                step = self.push(y, c)
                if step is not None and s[step[0]] >= 0:
                    back = self.pop(s[step[0]], r, step[1])
                    if back is not None:
                        v = back[0]
                out.append(v)
            res = self._upd[key] = tuple(out)
        return res


def _then(u: tuple, s: tuple) -> tuple:
    """The function 'u, then s'."""
    return tuple(s[x] if x >= 0 else -1 for x in u)


class _HuCore:
    """Moves of the composed machine in oriented terms: the first stage reads
    'forward', calls are the first stage's calls."""

    def __init__(self, first: _FirstStage, b, mirrored: bool):
        self.a = first
        self.b = b
        self.mirrored = mirrored

    # B seen in oriented directions
    def b_push(self, p, d, a):
        if self.mirrored:
            return [(p2, flip(d2), g, o) for p2, d2, g, o in self.b.push_moves(p, flip(d), a)]
        return self.b.push_moves(p, d, a)

    def b_pop(self, p, d, a, g):
        if self.mirrored:
            return [(p2, flip(d2), o) for p2, d2, o in self.b.pop_moves(p, flip(d), a, g)]
        return self.b.pop_moves(p, d, a, g)

    @property
    def initial(self):
        if self.mirrored:
            return ("pre",)
        return ("main", self.b.initial, self.a.q0)

    def is_final(self, s) -> bool:
        return s[0] == "main" and self.b.is_final(s[1])

    def push(self, s, d, x) -> list:
        """Moves that push: x is a call read forward or a return read backward."""
        A = self.a
        mode = s[0]
        if d == FW:  # x is a call
            if mode == "main":
                _, p, q = s
                step = A.push(q, x)
                if step is None:
                    return []
                q2, g, out = step
                return [(("main", p2, q2), d2, ("m", q, g, th), o)
                        for p2, d2, th, o in self.b_push(p, FW, out)]
            if mode == "end":
                _, p, X = s
                step = A.push(X, x)
                if step is None:
                    return []
                return [(("fol", step[0]), FW, ("endmark", p, X, step[1]), ())]
            if mode == "fol":
                step = A.push(s[1], x)
                if step is None:
                    return []
                return [(("fol", step[0]), FW, ("folent", step[1]), ())]
            if mode == "cleared":
                _, p, y1, y2 = s
                return [(("rd",), FW, ("readmark", p, y1, y2), ())]
            if mode == "rd":
                return [(("rd",), FW, ("rdx",), ())]
            if mode == "restart":
                _, p, entry, y1, y2 = s
                return [(("par", p, y1, y2), FW, entry, ())]
            if mode == "par":
                _, p, s1, s2 = s
                st1, st2 = A.push(s1, x), A.push(s2, x)
                if st1 is None or st2 is None:
                    return []
                return [(("par2", st1[0], st2[0]), FW, ("parmark", p, s1, st1[1], st2[1]), ())]
            if mode == "par2":
                _, s1, s2 = s
                st1, st2 = A.push(s1, x), A.push(s2, x)
                if st1 is None or st2 is None:
                    return []
                return [(("par2", st1[0], st2[0]), FW, ("parent", st1[1], st2[1]), ())]
            return []
        # d == BW, x is a return read backward
        if mode == "main":
            _, p, q = s
            return [(("S", A.ident), BW, ("hu0", p, q, x), ())]
        if mode == "S":
            return [(("S", A.ident), BW, ("sum", s[1], x), ())]
        if mode == "hu":
            _, p, g = s
            return [(("S", A.ident), BW, ("huent", p, g, x), ())]
        if mode == "fin":
            _, p, X, sq, g = s
            back = A.pop(sq, x, g)
            if back is None:
                return []
            out = back[1]
            return [(("main", p2, sq), d2, ("m", X, g, th), o)
                    for p2, d2, th, o in self.b_push(p, BW, out)]
        if mode == "pre":
            return [(("pre",), BW, ("pre",), ())]
        return []

    def pop(self, s, d, x, top) -> list:
        """Moves that pop: x is a return read forward or a call read backward."""
        A = self.a
        mode = s[0]
        if d == FW:  # x is a return
            if mode == "main":
                if top[0] != "m":
                    return []
                _, p, q = s
                _, _, g, th = top
                back = A.pop(q, x, g)
                if back is None:
                    return []
                q2, out = back
                return [(("main", p2, q2), d2, o) for p2, d2, o in self.b_pop(p, FW, out, th)]
            if mode == "fol":
                sq = s[1]
                if top[0] == "folent":
                    back = A.pop(sq, x, top[1])
                    return [] if back is None else [(("fol", back[0]), FW, ())]
                if top[0] == "endmark":
                    _, p, X, g = top
                    if A.pop(sq, x, g) is None:
                        return []
                    return [(("fin", p, X, sq, g), BW, ())]
                return []
            if mode == "rd":
                if top[0] == "rdx":
                    return [(("rd",), FW, ())]
                if top[0] == "readmark":
                    _, p, y1, y2 = top
                    return [(("par", p, y1, y2), FW, ())]
                return []
            if mode == "par2":
                _, s1, s2 = s
                if top[0] == "parent":
                    b1, b2 = A.pop(s1, x, top[1]), A.pop(s2, x, top[2])
                    if b1 is None or b2 is None:
                        return []
                    return [(("par2", b1[0], b2[0]), FW, ())]
                if top[0] == "parmark":
                    _, p, X, g1, g2 = top
                    b1, b2 = A.pop(s1, x, g1), A.pop(s2, x, g2)
                    if b1 is None or b2 is None:
                        return []
                    if b1[0] == b2[0]:
                        return [(("fin", p, X, s1, g1), BW, ())]
                    return [(("par", p, b1[0], b2[0]), FW, ())]
                return []
            return []
        # d == BW, x is a call read backward
        if mode == "main":
            if top[0] != "m":
                return []
            _, p, q = s
            _, qb, g, th = top
            step = A.push(qb, x)
            if step is None:
                return []
            return [(("main", p2, qb), d2, o) for p2, d2, o in self.b_pop(p, BW, step[2], th)]
        if mode == "S":
            inner = s[1]
            kind = top[0]
            if kind == "sum":
                _, outer, r = top
                return [(("S", _then(A.upd(x, inner, r), outer)), BW, ())]
            if kind == "hu0":
                _, p, q, r = top
                u = A.upd(x, inner, r)
                cands = [y for y in range(A.n) if u[y] == q]
                if x == A.lmark:
                    return [(("end", p, A.q0), FW, ())] if A.q0 in cands else []
                if len(cands) == 1:
                    return [(("end", p, cands[0]), FW, ())]
                if not cands:
                    return []
                g = tuple(y if u[y] == q else -1 for y in range(A.n))
                return [(("hu", p, g), BW, ())]
            if kind == "huent":
                _, p, g, r = top
                u = A.upd(x, inner, r)
                g2 = _then(u, g)
                image = {v for v in g2 if v >= 0}
                if not image:
                    return []
                if len(image) == 1:
                    X = image.pop()
                    y1 = next(y for y in range(A.n) if g[y] == X)
                    y2 = next(y for y in range(A.n) if g[y] >= 0 and g[y] != X)
                    return [(("cleared", p, y1, y2), FW, ())]
                return [(("hu", p, g2), BW, ())]
            return []
        if mode == "hu":
            if top[0] != "m":
                return []
            _, p, g = s
            _, qe, _, _ = top
            step = A.push(qe, x)
            if step is None or g[step[0]] < 0:
                return []
            start = step[0]
            X = g[start]
            other = [y for y in range(A.n) if g[y] >= 0 and g[y] != X]
            if not other:
                return []
            return [(("restart", p, top, start, other[0]), FW, ())]
        if mode == "pre":
            if top != ("pre",):
                return []
            if x == A.lmark:
                return [(("end", self.b.initial, A.q0), FW, ())]
            return [(("pre",), BW, ())]
        return []


def _check_first_stage(a: Vpt, b) -> None:
    if not a.letter_to_letter:
        raise NotLetterToLetter("first stage must be letter-to-letter")
    out = a.output_alphabet
    if set(out.symbols) - set(b.alphabet.symbols):
        raise ValueError("first stage output alphabet is not the input alphabet of the second")


def _lazy(core: _HuCore, alphabet: StructuredAlphabet, b, deterministic: bool) -> LazyTwoVpt:
    mirrored = core.mirrored

    def push_fn(s, d, x):
        od = flip(d) if mirrored else d
        return [(s2, flip(d2) if mirrored else d2, g, o) for s2, d2, g, o in core.push(s, od, x)]

    def pop_fn(s, d, x, g):
        od = flip(d) if mirrored else d
        return [(s2, flip(d2) if mirrored else d2, o) for s2, d2, o in core.pop(s, od, x, g)]

    return LazyTwoVpt(alphabet, b.output_alphabet, core.initial, core.is_final,
                      push_fn, pop_fn, deterministic)


def compose_hu(a: Vpt, b) -> LazyTwoVpt:
    """Two-way transducer for 'a, then b' (a deterministic letter-to-letter)."""
    _check_first_stage(a, b)
    if not a.is_deterministic:
        raise NotDeterministicFirstStage("first stage must be deterministic")
    core = _HuCore(_FirstStage(a, LMARK, RMARK), b, mirrored=False)
    return _lazy(core, a.alphabet, b, b.is_deterministic)


def compose_hu_codet(a: Vpt, b) -> LazyTwoVpt:
    """Two-way transducer for 'a, then b' (a co-deterministic letter-to-letter,
    with a single final state)."""
    _check_first_stage(a, b)
    if not a.automaton.is_codeterministic:
        raise NotDeterministicFirstStage("first stage must be co-deterministic with one final state")
    rev = reverse_vpt(a)
    # the reversed machine may still have several initial states only through
    # the original finals, which co-determinism limits to one
    core = _HuCore(_FirstStage(rev, RMARK, LMARK), b, mirrored=True)
    return _lazy(core, a.alphabet, b, b.is_deterministic)


def compose_relabeling(b, relab: Vpt) -> LazyTwoVpt:
    """Deterministic two-way transducer for 'relab, then b' where relab is an
    unambiguous letter-to-letter VPT."""
    if not relab.letter_to_letter:
        raise NotLetterToLetter("relabeling must be letter-to-letter")
    if not b.is_deterministic:
        raise ValueError("second stage must be deterministic")
    t1, t2 = codeterminize_l2l(relab)
    if not t2.automaton.initial:
        # relab accepts nothing, and neither does the composition
        return LazyTwoVpt(relab.alphabet, b.output_alphabet, "dead", lambda q: False,
                          lambda *key: [], lambda *key: [], True)
    return compose_hu_codet(t2, compose_hu(t1, b))


# ------------------------------------------------------------ look-around

ANNOT_SEP = "~"


def annotator(checker: Vpa) -> Vpt:
    """Letter-to-letter VPT copying each symbol paired with the checker's state
    right after reading it (in the checker's unique accepting run)."""
    if not is_unambiguous(checker):
        raise NotUnambiguous("look-around checker is ambiguous")
    idx = {q: i for i, q in enumerate(checker.states)}
    alpha = checker.alphabet

    def tok(a, q):
        return f"{a}{ANNOT_SEP}{idx[q]}"

    out_alpha = StructuredAlphabet(tuple(tok(c, q) for c in alpha.calls for q in checker.states),
                                   tuple(tok(r, q) for r in alpha.returns for q in checker.states))
    outs = []
    for rule in checker.rules:
        if rule[0] == "push":
            outs.append((tok(rule[2], rule[3]),))
        else:
            outs.append((tok(rule[2], rule[4]),))
    return Vpt(checker, tuple(outs), out_alpha)


def guards_to_annotations(t: TwoVpt) -> TwoVpt:
    """The transducer over the annotated alphabet that reads the checker state
    from the annotation instead of testing a guard."""
    la = t.lookaround
    checker = la.checker
    idx = {q: i for i, q in enumerate(checker.states)}
    a = t.automaton
    calls = tuple(f"{c}{ANNOT_SEP}{idx[q]}" for c in a.alphabet.calls for q in checker.states)
    rets = tuple(f"{r}{ANNOT_SEP}{idx[q]}" for r in a.alphabet.returns for q in checker.states)
    alpha = StructuredAlphabet(calls, rets)
    rules = []
    outs = []
    for rid, rule in enumerate(a.rules):
        sym = rule[3]
        if sym in (LMARK, RMARK):
            if rid in la.guard:
                continue  # no label at the markers: a guarded marker rule never fires
            rules.append(rule)
            outs.append(t.output[rid])
            continue
        guard = la.guard.get(rid)
        for q in checker.states:
            if guard is not None and guard != q:
                continue
            new = list(rule)
            new[3] = f"{sym}{ANNOT_SEP}{idx[q]}"
            rules.append(tuple(new))
            outs.append(t.output[rid])
    auto = TwoVpa(alpha, a.states, a.initial, a.finals, a.stack_symbols, tuple(rules))
    return TwoVpt(auto, tuple(outs), t.output_alphabet)


def remove_lookaround(t: TwoVpt) -> LazyTwoVpt:
    """Deterministic transducer without look-around computing the same function."""
    if t.lookaround is None:
        raise ValueError("transducer has no look-around")
    return compose_relabeling(guards_to_annotations(t), annotator(t.lookaround.checker))
