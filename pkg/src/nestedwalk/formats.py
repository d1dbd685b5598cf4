"""Line-oriented machine files.

One machine per file. Header lines are ``key: values``; rule lines start
with ``push``, ``pop``, ``upd-push``, ``upd-pop``, ``final-out`` or
``trans``. Tokens are separated by whitespace (``->``, ``/``, ``{``, ``}``,
``;`` and ``<-`` must stand alone); ``#`` starts a comment; transducer
outputs are double-quoted token lists. Rule ids are 1-based in file order.
A look-around checker is an inline vpa block between ``la-checker: begin``
and ``la-checker: end``; it inherits the machine's alphabet.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .fsa import Nfa
from .nested_words import StructuredAlphabet
from .stst import Reg, Stst
from .twovpa import DIRS, LookAround, TwoVpa
from .twovpt import LazyTwoVpt, TwoVpt, materialize
from .vpa import Vpa, Vpt

KINDS = ("vpa", "dvpa", "vpt", "2vpa", "2vpt", "d2vpt", "stst", "fsa")
_TOKEN = re.compile(r'"[^"]*"|\S+')
_SIMPLE = re.compile(r"[A-Za-z0-9_.:\[\]<>+*@~|-]+$")
_RESERVED = {"->", "/", "{", "}", ";", "<-"}


class FormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class _Lines:
    header: dict
    header_line: dict
    rules: list  # (line number, tokens)
    la: list | None


def _tokens(text: str) -> list:
    out = []
    for tok in _TOKEN.findall(text):
        if tok.startswith("#"):
            break
        out.append(tok)
    return out


def _split(text: str) -> _Lines:
    header: dict = {}
    header_line: dict = {}
    rules: list = []
    la = None
    in_la = False
    for n, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw)
        if not toks:
            continue
        if toks[0] == "la-checker:":
            if toks[1:] == ["begin"] and la is None:
                in_la, la = True, []
            elif toks[1:] == ["end"] and in_la:
                in_la = False
            else:
                raise FormatError(n, "expected 'la-checker: begin' ... 'la-checker: end'")
            continue
        if in_la:
            la.append((n, raw))
            continue
        if toks[0].endswith(":"):
            key = toks[0][:-1]
            if key == "la-guard":
                rules.append((n, toks))
                continue
            if key in header:
                raise FormatError(n, f"duplicate header {key!r}")
            header[key] = toks[1:]
            header_line[key] = n
        else:
            rules.append((n, toks))
    if in_la:
        raise FormatError(0, "unterminated la-checker block")
    return _Lines(header, header_line, rules, la)


def _need(lines: _Lines, key: str) -> list:
    if key not in lines.header:
        raise FormatError(0, f"missing header {key!r}")
    return lines.header[key]


def _output(tok: str, n: int) -> tuple:
    if not (len(tok) >= 2 and tok[0] == tok[-1] == '"'):
        raise FormatError(n, f"expected a quoted output, got {tok!r}")
    return tuple(tok[1:-1].split())


def _alphabet(lines: _Lines, inherit: StructuredAlphabet | None = None) -> StructuredAlphabet:
    if inherit is not None and "calls" not in lines.header:
        return inherit
    try:
        return StructuredAlphabet(tuple(_need(lines, "calls")), tuple(lines.header.get("returns", ())))
    except ValueError as e:
        raise FormatError(lines.header_line.get("calls", 0), str(e)) from None


def _output_alphabet(lines: _Lines):
    if "output-calls" in lines.header or "output-returns" in lines.header:
        return StructuredAlphabet(tuple(lines.header.get("output-calls", ())),
                                  tuple(lines.header.get("output-returns", ())))
    return tuple(lines.header.get("output-alphabet", ()))


def _expect(toks: list, n: int, pattern: str) -> None:
    """Check reserved tokens at the positions marked in pattern ('_' = any)."""
    parts = pattern.split()
    if len(toks) != len(parts):
        raise FormatError(n, f"expected '{pattern}', got {' '.join(toks)!r}")
    for t, p in zip(toks, parts):
        if p != "_" and t != p:
            raise FormatError(n, f"expected {p!r}, got {t!r}")


def _dir(tok: str, n: int) -> str:
    if tok not in DIRS:
        raise FormatError(n, f"bad direction {tok!r} (use fw or bw)")
    return tok


def parse_machine(text: str):
    """Parse a machine file; returns Vpa, Vpt, TwoVpa, TwoVpt, Stst or Nfa."""
    lines = _split(text)
    kind_toks = _need(lines, "kind")
    if len(kind_toks) != 1 or kind_toks[0] not in KINDS:
        raise FormatError(lines.header_line["kind"], f"kind must be one of {', '.join(KINDS)}")
    kind = kind_toks[0]
    if lines.la is not None and kind not in ("2vpa", "2vpt", "d2vpt"):
        raise FormatError(0, "look-around is only allowed on two-way machines")
    try:
        if kind == "fsa":
            return _parse_fsa(lines)
        if kind == "stst":
            return _parse_stst(lines)
        if kind in ("vpa", "dvpa", "vpt"):
            return _parse_one_way(lines, kind)
        return _parse_two_way(lines, kind)
    except FormatError:
        raise
    except ValueError as e:
        raise FormatError(0, str(e)) from None


def _parse_fsa(lines: _Lines) -> Nfa:
    trans = []
    for n, toks in lines.rules:
        if toks[0] != "trans":
            raise FormatError(n, f"unexpected {toks[0]!r} in an fsa")
        _expect(toks, n, "trans _ _ -> _")
        trans.append((toks[1], toks[2], toks[4]))
    return Nfa(tuple(_need(lines, "symbols")), tuple(_need(lines, "states")),
               frozenset(_need(lines, "initial")), frozenset(lines.header.get("final", ())), tuple(trans))


def _parse_one_way(lines: _Lines, kind: str, inherit: StructuredAlphabet | None = None):
    alpha = _alphabet(lines, inherit)
    rules, outs = [], []
    transducer = kind == "vpt"
    for n, toks in lines.rules:
        if transducer:
            if len(toks) < 2 or toks[-2] != "/":
                raise FormatError(n, "transducer rules end with / \"output\"")
            outs.append(_output(toks[-1], n))
            toks = toks[:-2]
        if len(toks) > 1 and toks[1] in DIRS:
            raise FormatError(n, "one-way rules take no direction")
        if toks[0] == "push":
            _expect(toks, n, "push _ _ -> _ _")
            rules.append(("push", toks[1], toks[2], toks[4], toks[5]))
        elif toks[0] == "pop":
            _expect(toks, n, "pop _ _ _ -> _")
            rules.append(("pop", toks[1], toks[2], toks[3], toks[5]))
        else:
            raise FormatError(n, f"unexpected {toks[0]!r} in a {kind}")
    try:
        a = Vpa(alpha, tuple(_need(lines, "states")), frozenset(_need(lines, "initial")),
                frozenset(lines.header.get("final", ())), tuple(lines.header.get("stack", ())), tuple(rules))
    except ValueError as e:
        raise FormatError(_rule_line(lines, e), str(e)) from None
    if kind == "dvpa" and not a.is_deterministic:
        raise FormatError(0, "dvpa is not deterministic")
    if transducer:
        return Vpt(a, tuple(outs), _output_alphabet(lines))
    return a


def _rule_line(lines: _Lines, e: Exception) -> int:
    m = re.match(r"rule (\d+)", str(e))
    if m and int(m.group(1)) <= len(lines.rules):
        return lines.rules[int(m.group(1)) - 1][0]
    return 0


def _parse_two_way(lines: _Lines, kind: str):
    alpha = _alphabet(lines)
    transducer = kind != "2vpa"
    rules, outs, guards = [], [], {}
    for n, toks in lines.rules:
        if toks[0] == "la-guard:":
            _expect(toks, n, "la-guard: _ _")
            try:
                guards[int(toks[1]) - 1] = toks[2]
            except ValueError:
                raise FormatError(n, f"bad rule id {toks[1]!r}") from None
            continue
        if transducer:
            if len(toks) < 2 or toks[-2] != "/":
                raise FormatError(n, "transducer rules end with / \"output\"")
            outs.append(_output(toks[-1], n))
            toks = toks[:-2]
        if toks[0] == "push":
            _expect(toks, n, "push _ _ _ -> _ _ _")
            rules.append(("push", toks[1], _dir(toks[2], n), toks[3], toks[5], _dir(toks[6], n), toks[7]))
        elif toks[0] == "pop":
            _expect(toks, n, "pop _ _ _ _ -> _ _")
            rules.append(("pop", toks[1], _dir(toks[2], n), toks[3], toks[4], toks[6], _dir(toks[7], n)))
        else:
            raise FormatError(n, f"unexpected {toks[0]!r} in a {kind}")
    initial = _need(lines, "initial")
    if len(initial) != 1:
        raise FormatError(lines.header_line["initial"], "two-way machines have one initial state")
    try:
        a = TwoVpa(alpha, tuple(_need(lines, "states")), initial[0], frozenset(lines.header.get("final", ())),
                   tuple(lines.header.get("stack", ())), tuple(rules))
    except ValueError as e:
        raise FormatError(_rule_line(lines, e), str(e)) from None
    la = None
    if lines.la is not None:
        sub = _split("\n".join(raw for _, raw in lines.la))
        checker = _parse_one_way(sub, "vpa", inherit=alpha)
        for rid, state in guards.items():
            if not 0 <= rid < len(rules):
                raise FormatError(0, f"la-guard on unknown rule {rid + 1}")
            if state not in checker.states:
                raise FormatError(0, f"la-guard names unknown checker state {state!r}")
        la = LookAround(checker, guards)
    elif guards:
        raise FormatError(0, "la-guard without la-checker")
    if not transducer:
        return a
    t = TwoVpt(a, tuple(outs), _output_alphabet(lines), la)
    if kind == "d2vpt" and not t.is_deterministic:
        raise FormatError(0, "d2vpt is not deterministic")
    return t


def _parse_update(toks: list, n: int, registers: set) -> dict:
    if not toks or toks[0] != "{" or toks[-1] != "}":
        raise FormatError(n, "update must be enclosed in { }")
    upd = {}
    body = toks[1:-1]
    groups, cur = [], []
    for t in body:
        if t == ";":
            groups.append(cur)
            cur = []
        else:
            cur.append(t)
    if cur:
        groups.append(cur)
    for g in groups:
        if len(g) < 2 or g[1] != "<-":
            raise FormatError(n, "register assignment is 'X <- word'")
        if g[0] not in registers:
            raise FormatError(n, f"undeclared register {g[0]!r}")
        if g[0] in upd:
            raise FormatError(n, f"register {g[0]!r} assigned twice")
        upd[g[0]] = _reg_word(g[2:], registers)
    return upd


def _reg_word(toks: list, registers: set) -> tuple:
    out = []
    for t in toks:
        if t.endswith("'") and t[:-1] in registers:
            out.append(Reg(t[:-1], True))
        elif t in registers:
            out.append(Reg(t))
        else:
            out.append(t)
    return tuple(out)


def _parse_stst(lines: _Lines) -> Stst:
    alpha = _alphabet(lines)
    registers = list(_need(lines, "registers"))
    regset = set(registers)
    push, pop, final = {}, {}, {}
    for n, toks in lines.rules:
        head = toks[0]
        if head == "upd-push":
            if len(toks) < 6 or toks[3] != "->":
                raise FormatError(n, "expected 'upd-push q c -> q2 g { ... }'")
            key = (toks[1], toks[2])
            if key in push:
                raise FormatError(n, "stst must be deterministic")
            push[key] = (toks[4], toks[5], _parse_update(toks[6:], n, regset))
        elif head == "upd-pop":
            if len(toks) < 6 or toks[4] != "->":
                raise FormatError(n, "expected 'upd-pop q r g -> q2 { ... }'")
            key = (toks[1], toks[2], toks[3])
            if key in pop:
                raise FormatError(n, "stst must be deterministic")
            pop[key] = (toks[5], _parse_update(toks[6:], n, regset))
        elif head == "final-out":
            if len(toks) < 3 or toks[2] != "->":
                raise FormatError(n, "expected 'final-out q -> word'")
            final[toks[1]] = _reg_word(toks[3:], regset)
        else:
            raise FormatError(n, f"unexpected {head!r} in an stst")
    initial = _need(lines, "initial")
    if len(initial) != 1:
        raise FormatError(lines.header_line["initial"], "an stst has one initial state")
    return Stst(alpha, tuple(_output_alphabet(lines)), tuple(_need(lines, "states")), initial[0],
                tuple(lines.header.get("stack", ())), tuple(registers), push, pop, final)


def load_machine(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_machine(fh.read())


# ----------------------------------------------------------------- writing


def _namer(items, prefix: str) -> dict:
    """Keep readable names when they are already plain unique tokens."""
    items = list(items)
    names = [str(x) for x in items]
    if (all(isinstance(x, str) for x in items) and len(set(names)) == len(names)
            and all(_SIMPLE.match(s) and s not in _RESERVED and not s.endswith(":") for s in names)):
        return dict(zip(items, names))
    return {x: f"{prefix}{i}" for i, x in enumerate(items)}


def _quote(word) -> str:
    return '"' + " ".join(word) + '"'


def _alpha_lines(alpha: StructuredAlphabet) -> list:
    return [f"calls: {' '.join(alpha.calls)}", f"returns: {' '.join(alpha.returns)}"]


def _out_alpha_lines(out) -> list:
    if isinstance(out, StructuredAlphabet):
        return [f"output-calls: {' '.join(out.calls)}", f"output-returns: {' '.join(out.returns)}"]
    return [f"output-alphabet: {' '.join(out)}"]


def kind_of(m) -> str:
    if isinstance(m, Nfa):
        return "fsa"
    if isinstance(m, Stst):
        return "stst"
    if isinstance(m, Vpt):
        return "vpt"
    if isinstance(m, Vpa):
        return "dvpa" if m.is_deterministic else "vpa"
    if isinstance(m, TwoVpt):
        return "d2vpt" if m.is_deterministic else "2vpt"
    if isinstance(m, TwoVpa):
        return "2vpa"
    raise TypeError(f"cannot serialize {type(m).__name__}")


def serialize_machine(m) -> str:
    if isinstance(m, LazyTwoVpt):
        m = materialize(m)
    kind = kind_of(m)
    if kind == "fsa":
        return _write_fsa(m)
    if kind == "stst":
        return _write_stst(m)
    if kind in ("vpa", "dvpa", "vpt"):
        return "\n".join(_write_one_way(m, kind)) + "\n"
    return _write_two_way(m, kind)


def _write_fsa(m: Nfa) -> str:
    st = _namer(m.states, "p")
    lines = ["kind: fsa", f"symbols: {' '.join(m.symbols)}", f"states: {' '.join(st[q] for q in m.states)}",
             f"initial: {' '.join(st[q] for q in m.states if q in m.initial)}",
             f"final: {' '.join(st[q] for q in m.states if q in m.finals)}"]
    lines += [f"trans {st[p]} {a} -> {st[p2]}" for p, a, p2 in m.transitions]
    return "\n".join(lines) + "\n"


def _write_one_way(m, kind: str, header: bool = True) -> list:
    a = m.automaton if kind == "vpt" else m
    st = _namer(a.states, "q")
    gs = _namer(a.stack_symbols, "g")
    lines = [f"kind: {kind}"] if header else ["kind: vpa"]
    if header:
        lines += _alpha_lines(a.alphabet)
    if kind == "vpt":
        lines += _out_alpha_lines(m.output_alphabet)
    lines += [f"states: {' '.join(st[q] for q in a.states)}",
              f"initial: {' '.join(st[q] for q in a.states if q in a.initial)}",
              f"final: {' '.join(st[q] for q in a.states if q in a.finals)}",
              f"stack: {' '.join(gs[g] for g in a.stack_symbols)}"]
    for rid, rule in enumerate(a.rules):
        if rule[0] == "push":
            _, q, c, q2, g = rule
            line = f"push {st[q]} {c} -> {st[q2]} {gs[g]}"
        else:
            _, q, r, g, q2 = rule
            line = f"pop {st[q]} {r} {gs[g]} -> {st[q2]}"
        if kind == "vpt":
            line += f" / {_quote(m.output[rid])}"
        lines.append(line)
    return lines


def _write_two_way(m, kind: str) -> str:
    a = m if kind == "2vpa" else m.automaton
    st = _namer(a.states, "q")
    gs = _namer(a.stack_symbols, "g")
    lines = [f"kind: {kind}"] + _alpha_lines(a.alphabet)
    if kind != "2vpa":
        lines += _out_alpha_lines(m.output_alphabet)
    lines += [f"states: {' '.join(st[q] for q in a.states)}", f"initial: {st[a.initial]}",
              f"final: {' '.join(st[q] for q in a.states if q in a.finals)}",
              f"stack: {' '.join(gs[g] for g in a.stack_symbols)}"]
    for rid, rule in enumerate(a.rules):
        if rule[0] == "push":
            _, q, d, s, q2, d2, g = rule
            line = f"push {st[q]} {d} {s} -> {st[q2]} {d2} {gs[g]}"
        else:
            _, q, d, s, g, q2, d2 = rule
            line = f"pop {st[q]} {d} {s} {gs[g]} -> {st[q2]} {d2}"
        if kind != "2vpa":
            line += f" / {_quote(m.output[rid])}"
        lines.append(line)
    la = getattr(m, "lookaround", None)
    if la is not None:
        lines.append("la-checker: begin")
        lines += ["  " + s for s in _write_one_way(la.checker, "vpa", header=False)]
        lines.append("la-checker: end")
        cs = _namer(la.checker.states, "q")
        lines += [f"la-guard: {rid + 1} {cs[s]}" for rid, s in sorted(la.guard.items())]
    return "\n".join(lines) + "\n"


def _write_stst(s: Stst) -> str:
    st = _namer(s.states, "m")
    gs = _namer(s.stack_symbols, "g")
    rs = _namer(s.registers, "X")

    def word(w) -> str:
        return " ".join(rs[t.name] + ("'" if t.primed else "") if isinstance(t, Reg) else t for t in w)

    def upd(u: dict) -> str:
        body = " ; ".join(f"{rs[x]} <- {word(w)}".rstrip() for x, w in u.items())
        return "{ " + body + " }" if body else "{ }"

    lines = ["kind: stst"] + _alpha_lines(s.alphabet) + _out_alpha_lines(tuple(s.output_alphabet))
    lines += [f"states: {' '.join(st[q] for q in s.states)}", f"initial: {st[s.initial]}",
              f"stack: {' '.join(gs[g] for g in s.stack_symbols)}",
              f"registers: {' '.join(rs[x] for x in s.registers)}"]
    for (q, c), (q2, g, u) in s.push_delta.items():
        lines.append(f"upd-push {st[q]} {c} -> {st[q2]} {gs[g]} {upd(u)}")
    for (q, r, g), (q2, u) in s.pop_delta.items():
        lines.append(f"upd-pop {st[q]} {r} {gs[g]} -> {st[q2]} {upd(u)}")
    for q, w in s.final_output.items():
        lines.append(f"final-out {st[q]} -> {word(w)}".rstrip())
    return "\n".join(lines) + "\n"


def canonical(m) -> tuple:
    """Structure of a machine as plain data, with states, stack symbols and
    registers named as on export; equal for m and parse(serialize(m))."""
    kind = kind_of(m)
    if kind == "fsa":
        st = _namer(m.states, "p")
        return (kind, m.symbols, tuple(st[q] for q in m.states), frozenset(st[q] for q in m.initial),
                frozenset(st[q] for q in m.finals), tuple((st[p], a, st[p2]) for p, a, p2 in m.transitions))
    if kind == "stst":
        st, gs, rs = _namer(m.states, "m"), _namer(m.stack_symbols, "g"), _namer(m.registers, "X")

        def word(w):
            return tuple(Reg(rs[t.name], t.primed) if isinstance(t, Reg) else t for t in w)

        def upd(u):
            return tuple((rs[x], word(w)) for x, w in u.items())

        return (kind, m.alphabet, tuple(m.output_alphabet), tuple(st[q] for q in m.states), st[m.initial],
                tuple(gs[g] for g in m.stack_symbols), tuple(rs[x] for x in m.registers),
                tuple(((st[q], c), (st[q2], gs[g], upd(u))) for (q, c), (q2, g, u) in m.push_delta.items()),
                tuple(((st[q], r, gs[g]), (st[q2], upd(u))) for (q, r, g), (q2, u) in m.pop_delta.items()),
                tuple((st[q], word(w)) for q, w in m.final_output.items()))
    a = m.automaton if kind in ("vpt", "2vpt", "d2vpt") else m
    st, gs = _namer(a.states, "q"), _namer(a.stack_symbols, "g")
    if kind in ("vpa", "dvpa", "vpt"):
        init = frozenset(st[q] for q in a.initial)
        rules = tuple(("push", st[r[1]], r[2], st[r[3]], gs[r[4]]) if r[0] == "push"
                      else ("pop", st[r[1]], r[2], gs[r[3]], st[r[4]]) for r in a.rules)
    else:
        init = st[a.initial]
        rules = tuple(("push", st[r[1]], r[2], r[3], st[r[4]], r[5], gs[r[6]]) if r[0] == "push"
                      else ("pop", st[r[1]], r[2], r[3], gs[r[4]], st[r[5]], r[6]) for r in a.rules)
    base = (kind, a.alphabet, tuple(st[q] for q in a.states), init, frozenset(st[q] for q in a.finals),
            tuple(gs[g] for g in a.stack_symbols), rules)
    if kind in ("vpa", "dvpa", "2vpa"):
        return base
    la = getattr(m, "lookaround", None)
    la_c = None
    if la is not None:
        cs = _namer(la.checker.states, "q")
        la_c = (canonical(la.checker), tuple(sorted((rid, cs[q]) for rid, q in la.guard.items())))
    return base + (m.output, _out_key(m.output_alphabet), la_c)


def structurally_equal(m1, m2) -> bool:
    return canonical(m1) == canonical(m2)


def _out_key(out):
    if isinstance(out, StructuredAlphabet):
        return ("structured", out.calls, out.returns)
    return ("plain", tuple(out))
