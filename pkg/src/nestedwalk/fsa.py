"""Finite word automata over plain symbols (used as output-language specs)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence


@dataclass(frozen=True, eq=False)
class Nfa:
    symbols: tuple
    states: tuple
    initial: frozenset
    finals: frozenset
    transitions: tuple  # (p, a, p')

    def __post_init__(self):
        index: dict = {}
        for p, a, p2 in self.transitions:
            if p not in self.states or p2 not in self.states:
                raise ValueError(f"unknown state in transition {(p, a, p2)}")
            if a not in self.symbols:
                raise ValueError(f"unknown symbol {a!r}")
            index.setdefault((p, a), []).append(p2)
        object.__setattr__(self, "_index", {k: tuple(v) for k, v in index.items()})

    def successors(self, p: Hashable, a: str) -> tuple:
        return self._index.get((p, a), ())

    def step_set(self, current: Iterable, a: str) -> frozenset:
        return frozenset(p2 for p in current for p2 in self.successors(p, a))

    def accepts(self, word: Sequence[str]) -> bool:
        cur = frozenset(self.initial)
        for a in word:
            if a not in self.symbols:
                return False
            cur = self.step_set(cur, a)
            if not cur:
                return False
        return bool(cur & self.finals)


def universal_nfa(symbols: Iterable[str]) -> Nfa:
    symbols = tuple(symbols)
    return Nfa(symbols, ("u",), frozenset(["u"]), frozenset(["u"]), tuple(("u", a, "u") for a in symbols))


def empty_nfa(symbols: Iterable[str]) -> Nfa:
    return Nfa(tuple(symbols), ("e",), frozenset(["e"]), frozenset(), ())


def factor_free_nfa(symbols: Iterable[str], factor: Sequence[str]) -> Nfa:
    """Words that do not contain ``factor`` as a contiguous factor."""
    symbols = tuple(symbols)
    factor = tuple(factor)
    k = len(factor)
    states = tuple(range(k))

    def advance(matched: int, a: str) -> int:
        # longest suffix of factor[:matched]+a that is a prefix of factor
        s = factor[:matched] + (a,)
        for length in range(min(len(s), k), -1, -1):
            if s[len(s) - length:] == factor[:length]:
                return length
        return 0

    trans = []
    for m in states:
        for a in symbols:
            n = advance(m, a)
            if n < k:
                trans.append((m, a, n))
    return Nfa(symbols, states, frozenset([0]), frozenset(states), tuple(trans))


def prefix_nfa(symbols: Iterable[str], prefix: Sequence[str]) -> Nfa:
    """Words starting with ``prefix``."""
    symbols = tuple(symbols)
    prefix = tuple(prefix)
    states = tuple(range(len(prefix) + 1))
    trans = [(i, a, i + 1) for i, a in enumerate(prefix)]
    trans += [(len(prefix), a, len(prefix)) for a in symbols]
    return Nfa(symbols, states, frozenset([0]), frozenset([len(prefix)]), tuple(trans))
