"""Structured alphabets and nested words.

Positions are 1-based. The end markers used by two-way machines are the call
``<L>`` and the return ``<R>``; they never occur inside a ``NestedWord``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

LMARK = "<L>"
RMARK = "<R>"
CALL = "call"
RETURN = "return"


class UnknownSymbol(ValueError):
    pass


class NotWellNested(ValueError):
    def __init__(self, position: int, message: str):
        super().__init__(f"position {position}: {message}")
        self.position = position


class AlphabetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class StructuredAlphabet:
    calls: tuple[str, ...]
    returns: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "calls", tuple(self.calls))
        object.__setattr__(self, "returns", tuple(self.returns))
        if not self.calls or not self.returns:
            raise ValueError("calls and returns must be nonempty")
        if len(set(self.calls)) != len(self.calls) or len(set(self.returns)) != len(self.returns):
            raise ValueError("duplicate symbol in alphabet")
        if set(self.calls) & set(self.returns):
            raise ValueError("calls and returns must be disjoint")
        for s in self.calls + self.returns:
            if s in (LMARK, RMARK):
                raise ValueError(f"{s} is a reserved marker")
            if not s or any(ch.isspace() for ch in s):
                raise ValueError(f"bad symbol name {s!r}")

    def kind(self, symbol: str) -> str:
        if symbol in self.calls or symbol == LMARK:
            return CALL
        if symbol in self.returns or symbol == RMARK:
            return RETURN
        raise UnknownSymbol(symbol)

    def is_call(self, symbol: str) -> bool:
        return self.kind(symbol) == CALL

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.calls + self.returns

    @property
    def extended_calls(self) -> tuple[str, ...]:
        return (LMARK,) + self.calls

    @property
    def extended_returns(self) -> tuple[str, ...]:
        return self.returns + (RMARK,)


@dataclass(frozen=True)
class NestedWord:
    alphabet: StructuredAlphabet
    symbols: tuple[str, ...]
    matching: dict = field(compare=False, hash=False, repr=False, default=None)
    max_depth: int = field(compare=False, hash=False, repr=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if self.matching is None:
            matching, depth = _match(self.alphabet, self.symbols)
            object.__setattr__(self, "matching", matching)
            object.__setattr__(self, "max_depth", depth)

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, i: int) -> str:
        """1-based symbol access."""
        if not 1 <= i <= len(self.symbols):
            raise IndexError(i)
        return self.symbols[i - 1]

    def __str__(self) -> str:
        return serialize(self)

    def kind_at(self, i: int) -> str:
        return self.alphabet.kind(self[i])

    def depth_at(self, i: int) -> int:
        """Number of matched pairs strictly enclosing position i."""
        return sum(1 for c, r in self.matching.items() if c < i < r)

    def height_after(self, i: int) -> int:
        """Pending calls after reading the first i symbols."""
        h = 0
        for s in self.symbols[:i]:
            h += 1 if self.alphabet.is_call(s) else -1
        return h

    def marked(self) -> tuple[str, ...]:
        return (LMARK,) + self.symbols + (RMARK,)


def _match(alphabet: StructuredAlphabet, symbols: Sequence[str]) -> tuple[dict, int]:
    stack: list[int] = []
    matching: dict[int, int] = {}
    depth = 0
    for i, s in enumerate(symbols, start=1):
        if s not in alphabet.calls and s not in alphabet.returns:
            raise UnknownSymbol(s)
        if s in alphabet.calls:
            stack.append(i)
            depth = max(depth, len(stack))
        else:
            if not stack:
                raise NotWellNested(i, "unmatched return")
            matching[stack.pop()] = i
    if stack:
        raise NotWellNested(stack[0], "unmatched call")
    return matching, depth


def parse_nested_word(text: str | Sequence[str], alphabet: StructuredAlphabet) -> NestedWord:
    tokens = text.split() if isinstance(text, str) else list(text)
    return NestedWord(alphabet, tuple(tokens))


def serialize(w: NestedWord) -> str:
    return " ".join(w.symbols)


def concat(u: NestedWord, v: NestedWord) -> NestedWord:
    if u.alphabet != v.alphabet:
        raise AlphabetMismatch("concat over different alphabets")
    n = len(u)
    matching = dict(u.matching)
    matching.update({c + n: r + n for c, r in v.matching.items()})
    return NestedWord(u.alphabet, u.symbols + v.symbols, matching, max(u.max_depth, v.max_depth))


def wrap(c: str, w: NestedWord, r: str) -> NestedWord:
    if c not in w.alphabet.calls:
        raise UnknownSymbol(c)
    if r not in w.alphabet.returns:
        raise UnknownSymbol(r)
    matching = {1: len(w) + 2}
    matching.update({i + 1: j + 1 for i, j in w.matching.items()})
    return NestedWord(w.alphabet, (c,) + w.symbols + (r,), matching, w.max_depth + 1)


def empty(alphabet: StructuredAlphabet) -> NestedWord:
    return NestedWord(alphabet, ())


def enumerate_nested_words(alphabet: StructuredAlphabet, max_length: int) -> Iterator[NestedWord]:
    """All well-nested words of length <= max_length, by length then lexicographically
    (symbol order as declared, calls before returns)."""
    order = alphabet.symbols
    calls = set(alphabet.calls)
    for n in range(0, max_length + 1, 2):
        # depth-first in symbol order gives lexicographic order within a length
        def rec(prefix: list[str], height: int) -> Iterator[tuple[str, ...]]:
            left = n - len(prefix)
            if left == 0:
                yield tuple(prefix)
                return
            for s in order:
                h = height + 1 if s in calls else height - 1
                if 0 <= h <= left - 1:
                    prefix.append(s)
                    yield from rec(prefix, h)
                    prefix.pop()

        for syms in rec([], 0):
            yield NestedWord(alphabet, syms)


def random_nested_word(alphabet: StructuredAlphabet, rng: random.Random,
                       max_length: int, max_depth: int) -> NestedWord:
    """A random well-nested word with length <= max_length and depth <= max_depth."""
    n = rng.randrange(0, max_length // 2 + 1) * 2 if max_depth > 0 else 0
    syms: list[str] = []
    height = 0
    for k in range(n):
        left = n - k
        can_call = height < max_depth and height + 1 <= left - 1
        can_return = height > 0
        if can_call and (not can_return or rng.random() < 0.5):
            syms.append(rng.choice(alphabet.calls))
            height += 1
        else:
            syms.append(rng.choice(alphabet.returns))
            height -= 1
    return NestedWord(alphabet, tuple(syms))


def decompose(w: NestedWord) -> list:
    """Parse tree of w as nested lists: a word is a list of blocks (c, inner, r)."""
    def hedge(lo: int, hi: int) -> list:
        blocks = []
        i = lo
        while i <= hi:
            j = w.matching[i]
            blocks.append((w[i], hedge(i + 1, j - 1), w[j]))
            i = j + 1
        return blocks

    return hedge(1, len(w))
