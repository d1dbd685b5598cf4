"""Command-line front end.

Exit codes: 0 success or true, 1 false or rejected, 2 error.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import random
import sys
import time

from .compose import compose_hu, compose_hu_codet, compose_relabeling, remove_lookaround
from .formats import FormatError, kind_of, load_machine, serialize_machine
from .fsa import Nfa
from .nested_words import (LMARK, RMARK, NestedWord, enumerate_nested_words, parse_nested_word,
                           random_nested_word)
from .stst import ProducingCycle, Stst, d2vpt_to_stst, run_stst
from .twovpa import (TwoVpa, accepts_2vpa, fold_traversal, is_empty_2vpa, traversal_oracle,
                     two_vpa_to_dvpa)
from .twovpt import (Diverged, Rejected, TwoVpt, evaluate_2vpt_all, evaluate_d2vpt,
                     is_single_use, materialize, producing_states, run_d2vpt, type_check)
from .vpa import Vpa, Vpt, accepts_vpa, evaluate_vpt, is_empty_vpa, is_unambiguous, run_vpa, ResourceLimit

PROPERTIES = ("morphism", "membership", "composition", "translation")


class CliError(Exception):
    pass


class Report:
    def __init__(self):
        self.lines: list = []
        self.summary: dict = {}

    def say(self, text: str = "") -> None:
        self.lines.append(text)
        print(text)

    def put(self, key: str, value) -> None:
        self.summary[key] = value


def _hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:12]


def _load(path: str, report: Report, role: str = "machine"):
    try:
        m = load_machine(path)
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}") from None
    except FormatError as e:
        raise CliError(f"{path}: {e}") from None
    report.put(f"{role}.hash", _hash(path))
    report.put(f"{role}.kind", kind_of(m))
    return m


def _words(arg: str, alphabet) -> list:
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            texts = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    else:
        texts = [arg]
    out = []
    for text in texts:
        toks = text.split()
        if toks and toks[0] == LMARK and toks[-1] == RMARK:
            toks = toks[1:-1]
        try:
            out.append(parse_nested_word(toks, alphabet))
        except ValueError as e:
            raise CliError(f"input {text!r}: {e}") from None
    return out


def _alphabet_of(m):
    if isinstance(m, Nfa):
        raise CliError("an fsa has no structured alphabet")
    return m.alphabet


def _need(m, kinds: tuple, what: str):
    if kind_of(m) not in kinds:
        raise CliError(f"{what} expects a machine of kind {'/'.join(kinds)}, got {kind_of(m)}")


def _write(path: str, m, report: Report) -> None:
    text = serialize_machine(m)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    report.put("output.file", path)
    report.put("output.hash", hashlib.sha256(text.encode()).hexdigest()[:12])


# ---------------------------------------------------------------- commands


def cmd_validate(args, report: Report) -> int:
    m = _load(args.machine, report)
    kind = kind_of(m)
    report.say(f"kind: {kind}")
    if isinstance(m, Nfa):
        report.say(f"states: {len(m.states)}  transitions: {len(m.transitions)}")
        return 0
    if isinstance(m, Stst):
        report.say(f"states: {len(m.states)}  registers: {len(m.registers)}  copyless: {m.is_copyless()}")
        report.put("copyless", m.is_copyless())
        return 0
    a = m.automaton if isinstance(m, (Vpt, TwoVpt)) else m
    report.say(f"states: {len(a.states)}  stack symbols: {len(a.stack_symbols)}  rules: {len(a.rules)}")
    report.say(f"deterministic: {a.is_deterministic}")
    if getattr(m, "lookaround", None) is not None:
        report.say(f"look-around guards: {len(m.lookaround.guard)}")
    report.put("states", len(a.states))
    report.put("rules", len(a.rules))
    return 0


def _fmt(word) -> str:
    return " ".join(word)


def cmd_eval(args, report: Report) -> int:
    m = _load(args.machine, report)
    _need(m, ("vpt", "2vpt", "d2vpt", "stst"), "eval")
    words = _words(args.input, m.alphabet)
    status = 0
    defined = 0
    for w in words:
        if isinstance(m, Stst):
            out = run_stst(m, w)
            outs = [] if out is None else [out]
        elif isinstance(m, Vpt):
            outs = sorted(evaluate_vpt(m, w))
        elif m.is_deterministic:
            mode = args.mode or ("checked" if m.lookaround is not None else "streaming")
            stats: dict = {}
            try:
                outs = [evaluate_d2vpt(m, w, mode, stats)]
                report.put("peak_memory", stats["peak_memory"])
            except Rejected as e:
                report.say(f"rejected: {e.reason} at head {e.position}")
                outs = []
            except Diverged:
                report.say("rejected: diverged")
                outs = []
        else:
            outs, cyclic = evaluate_2vpt_all(m, w)
            outs = sorted(outs)
            if cyclic:
                report.say("note: an output-producing cycle is reachable")
        if not outs:
            status = 1
            report.say("undefined")
        else:
            defined += 1
            for o in outs:
                report.say(_fmt(o))
    report.put("words", len(words))
    report.put("defined", defined)
    return status


def cmd_accepts(args, report: Report) -> int:
    m = _load(args.machine, report)
    _need(m, ("vpa", "dvpa", "2vpa", "vpt", "2vpt", "d2vpt"), "accepts")
    words = _words(args.input, m.alphabet)
    status = 0
    for w in words:
        if isinstance(m, Vpa):
            ok = accepts_vpa(m, w)
        elif isinstance(m, Vpt):
            ok = bool(run_vpa(m.automaton, w) & m.automaton.finals)
        elif isinstance(m, TwoVpt) and m.lookaround is not None:
            ok = run_d2vpt(m, w) is not None if m.is_deterministic else bool(evaluate_2vpt_all(m, w)[0])
        else:
            ok = accepts_2vpa(m if isinstance(m, TwoVpa) else m.automaton, w)
        report.say("true" if ok else "false")
        status = status or (0 if ok else 1)
    return status


def cmd_convert(args, report: Report) -> int:
    m = _load(args.machine, report)
    _need(m, ("2vpa", "2vpt", "d2vpt"), "convert-2vpa-dvpa")
    a = m if isinstance(m, TwoVpa) else m.automaton
    dvpa = two_vpa_to_dvpa(a, args.max_algebra)
    vpa = dvpa.to_vpa()
    report.put("max_algebra", args.max_algebra)
    report.put("dvpa.states", len(vpa.states))
    report.say(f"dvpa states: {len(vpa.states)} (cap {args.max_algebra})")
    _write(args.output, vpa, report)
    return 0


def cmd_emptiness(args, report: Report) -> int:
    m = _load(args.machine, report)
    _need(m, ("vpa", "dvpa", "2vpa", "2vpt", "d2vpt"), "emptiness")
    if isinstance(m, Vpa):
        empty, symbols = is_empty_vpa(m)
        witness = None if empty else NestedWord(m.alphabet, symbols)
    else:
        a = m if isinstance(m, TwoVpa) else m.automaton
        empty, witness = is_empty_2vpa(a, args.max_algebra)
    report.put("empty", empty)
    if empty:
        report.say("empty")
        return 0
    report.say("nonempty")
    report.say(f"witness: {_fmt(witness.symbols) or '(empty word)'}")
    report.put("witness", _fmt(witness.symbols))
    return 1


def cmd_compose(args, report: Report) -> int:
    first = _load(args.first, report, "first")
    second = _load(args.second, report, "second")
    _need(first, ("vpt",), "compose (first)")
    _need(second, ("2vpt", "d2vpt"), "compose (second)")
    if first.is_deterministic:
        method, c = "hopcroft-ullman", compose_hu(first, second)
    elif first.automaton.is_codeterministic:
        method, c = "hopcroft-ullman-codet", compose_hu_codet(first, second)
    elif is_unambiguous(first.automaton):
        method, c = "relabeling", compose_relabeling(second, first)
    else:
        raise CliError("first stage must be deterministic, co-deterministic or unambiguous")
    t = materialize(c)
    report.put("method", method)
    report.put("states", len(t.states))
    report.say(f"method: {method}  states: {len(t.states)}  rules: {len(t.automaton.rules)}")
    _write(args.output, t, report)
    return 0


def cmd_remove_la(args, report: Report) -> int:
    m = _load(args.machine, report)
    _need(m, ("2vpt", "d2vpt"), "remove-la")
    if m.lookaround is None:
        raise CliError("machine has no look-around")
    t = materialize(remove_lookaround(m))
    report.put("states", len(t.states))
    report.say(f"states: {len(t.states)}  rules: {len(t.automaton.rules)}")
    _write(args.output, t, report)
    return 0


def cmd_single_use(args, report: Report) -> int:
    m = _load(args.machine, report)
    _need(m, ("2vpt", "d2vpt"), "single-use")
    producing = args.states.split(",") if args.states else sorted(producing_states(m), key=repr)
    unknown = [q for q in producing if q not in m.states]
    if unknown:
        raise CliError(f"unknown states: {', '.join(map(str, unknown))}")
    ok, witness = is_single_use(m, producing)
    report.put("single_use", ok)
    report.say(f"producing states: {', '.join(map(str, producing))}")
    if ok:
        report.say("single-use")
        return 0
    word, head, state = witness
    report.say("not single-use")
    report.say(f"witness: word '{_fmt(word.symbols)}' head {head} state {state}")
    report.put("witness", f"{_fmt(word.symbols)}|{head}|{state}")
    return 1


def cmd_to_stst(args, report: Report) -> int:
    m = _load(args.machine, report)
    _need(m, ("d2vpt",), "to-stst")
    try:
        s = d2vpt_to_stst(m, max_elements=args.max_algebra)
    except ProducingCycle as e:
        raise CliError(str(e)) from None
    report.put("states", len(s.states))
    report.put("registers", len(s.registers))
    report.put("copyless", s.is_copyless())
    report.say(f"states: {len(s.states)}  registers: {len(s.registers)}  copyless: {s.is_copyless()}")
    _write(args.output, s, report)
    return 0


def cmd_typecheck(args, report: Report) -> int:
    t = _load(args.machine, report)
    a1 = _load(args.domain, report, "domain")
    a2 = _load(args.range, report, "range")
    _need(t, ("2vpt", "d2vpt"), "typecheck")
    _need(a1, ("vpa", "dvpa"), "typecheck --domain")
    _need(a2, ("fsa",), "typecheck --range")
    ok, w = type_check(t, a1, a2)
    report.put("typechecks", ok)
    if ok:
        report.say("true")
        return 0
    report.say("false")
    report.say(f"counterexample: {_fmt(w.symbols) or '(empty word)'}")
    out = run_d2vpt(t, w) if t.is_deterministic else None
    report.say(f"output: {'undefined' if out is None else _fmt(out)}")
    report.put("counterexample", _fmt(w.symbols))
    return 1


# ------------------------------------------------------------ oracle check


def _suite_words(alphabet, args) -> list:
    words = list(enumerate_nested_words(alphabet, args.max_len))
    rng = random.Random(args.seed)
    words += [random_nested_word(alphabet, rng, args.random_len, args.max_depth) for _ in range(args.random)]
    return words


def _check_morphism(m, args) -> tuple:
    a = m if isinstance(m, TwoVpa) else m.automaton
    words = list(enumerate_nested_words(a.alphabet, args.max_len))
    bad = sum(fold_traversal(a, w) != traversal_oracle(a, w) for w in words)
    return len(words), bad


def _check_membership(m, args) -> tuple:
    a = m if isinstance(m, TwoVpa) else m.automaton
    dvpa = two_vpa_to_dvpa(a, args.max_algebra)
    words = _suite_words(a.alphabet, args)
    bad = 0
    for w in words:
        (state,) = run_vpa(dvpa, w)
        bad += dvpa.is_final(state) != accepts_2vpa(a, w)
    return len(words), bad


def _check_composition(m, args) -> tuple:
    if args.first:
        first = load_machine(args.first)
        if first.is_deterministic:
            c = compose_hu(first, m)
        elif first.automaton.is_codeterministic:
            c = compose_hu_codet(first, m)
        else:
            c = compose_relabeling(m, first)

        def pipeline(w):
            outs = evaluate_vpt(first, w)
            if not outs:
                return None
            (o,) = outs
            return run_d2vpt(m, NestedWord(m.alphabet, o))
        alphabet = first.alphabet
    elif getattr(m, "lookaround", None) is not None:
        c = remove_lookaround(m)

        def pipeline(w):
            return run_d2vpt(m, w)
        alphabet = m.alphabet
    else:
        raise CliError("composition needs --first or a machine with look-around")
    words = _suite_words(alphabet, args)
    bad = sum(run_d2vpt(c, w) != pipeline(w) for w in words)
    return len(words), bad


def _check_translation(m, args) -> tuple:
    s = d2vpt_to_stst(m, max_elements=args.max_algebra)
    words = _suite_words(m.alphabet, args)
    bad = sum(run_stst(s, w) != run_d2vpt(m, w) for w in words)
    return len(words), bad


_CHECKS = {"morphism": _check_morphism, "membership": _check_membership,
           "composition": _check_composition, "translation": _check_translation}


def _applicable(m, args) -> list:
    kind = kind_of(m)
    out = []
    if kind in ("2vpa", "2vpt", "d2vpt"):
        out += ["morphism", "membership"]
    if kind in ("2vpt", "d2vpt") and (args.first or m.lookaround is not None):
        out.append("composition")
    if kind == "d2vpt" and m.lookaround is None:
        out.append("translation")
    return out


def cmd_oracle_check(args, report: Report) -> int:
    m = _load(args.machine, report)
    props = [args.property] if args.property else _applicable(m, args)
    if not props:
        raise CliError(f"no differential property applies to a {kind_of(m)}")
    report.put("seed", args.seed)
    report.put("max_len", args.max_len)
    report.put("max_depth", args.max_depth)
    report.put("random", args.random)
    report.put("max_algebra", args.max_algebra)
    report.say(f"{'property':<12} {'words':>7} {'mismatches':>10}  {'result':<6} {'seconds':>7}")
    status = 0
    for p in props:
        if p not in _applicable(m, args):
            raise CliError(f"property {p} does not apply to this machine")
        t0 = time.perf_counter()
        n, bad = _CHECKS[p](m, args)
        dt = time.perf_counter() - t0
        verdict = "pass" if bad == 0 else "FAIL"
        report.say(f"{p:<12} {n:>7} {bad:>10}  {verdict:<6} {dt:>7.2f}")
        report.put(f"{p}.words", n)
        report.put(f"{p}.mismatches", bad)
        if bad:
            status = 1
    return status


# ------------------------------------------------------------------ parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nestedwalk", description="Two-way visibly pushdown machines.")
    parser.add_argument("--summary", help="also write key=value lines to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and check a machine file")
    p.add_argument("machine")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="run a transducer")
    p.add_argument("machine")
    p.add_argument("--input", required=True, help="a word, or a file with one word per line")
    p.add_argument("--mode", choices=("streaming", "checked"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("accepts", help="membership test")
    p.add_argument("machine")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_accepts)

    p = sub.add_parser("convert-2vpa-dvpa", help="equivalent deterministic one-way automaton")
    p.add_argument("machine")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--max-algebra", type=int, default=1 << 20)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("emptiness", help="decide emptiness, print a witness")
    p.add_argument("machine")
    p.add_argument("--max-algebra", type=int, default=1 << 20)
    p.set_defaults(func=cmd_emptiness)

    p = sub.add_parser("compose", help="one-way letter-to-letter VPT, then two-way transducer")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("remove-la", help="eliminate look-around")
    p.add_argument("machine")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_remove_la)

    p = sub.add_parser("single-use", help="decide the single-use property")
    p.add_argument("machine")
    p.add_argument("--states", help="comma-separated producing states (default: states with output)")
    p.set_defaults(func=cmd_single_use)

    p = sub.add_parser("to-stst", help="translate a deterministic two-way transducer")
    p.add_argument("machine")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--max-algebra", type=int, default=1 << 20)
    p.set_defaults(func=cmd_to_stst)

    p = sub.add_parser("typecheck", help="does t map L(domain) into L(range)?")
    p.add_argument("machine")
    p.add_argument("--domain", required=True)
    p.add_argument("--range", required=True)
    p.set_defaults(func=cmd_typecheck)

    p = sub.add_parser("oracle-check", help="differential suites against brute-force oracles")
    p.add_argument("machine")
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--random", type=int, default=200, help="number of random words")
    p.add_argument("--random-len", type=int, default=16)
    p.add_argument("--property", choices=PROPERTIES)
    p.add_argument("--first", help="first-stage VPT for the composition property")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-algebra", type=int, default=1 << 20)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def run_command(argv: list) -> tuple:
    """(exit code, Report)."""
    report = Report()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (0 if e.code == 0 else 2), report
    try:
        code = args.func(args, report)
    except (CliError, ResourceLimit, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        report.put("error", str(e))
        code = 2
    report.put("exit", code)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            for k, v in report.summary.items():
                fh.write(f"{k}={v}\n")
    return code, report


def main(argv: list | None = None) -> int:
    code, _ = run_command(sys.argv[1:] if argv is None else argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
