"""Random machines for differential testing."""
from __future__ import annotations

import random

from .nested_words import StructuredAlphabet
from .twovpa import BW, FW, TwoVpa
from .vpa import Vpa


def random_two_vpa(rng: random.Random, alphabet: StructuredAlphabet, n_states: int = 3,
                   n_gammas: int = 2, density: float = 0.35, deterministic: bool = False,
                   markers: bool = True) -> TwoVpa:
    states = tuple(f"s{i}" for i in range(n_states))
    gammas = tuple(f"g{i}" for i in range(n_gammas))
    calls = alphabet.extended_calls if markers else alphabet.calls
    returns = alphabet.extended_returns if markers else alphabet.returns
    rules = []
    push_lhs = [(q, FW, c) for q in states for c in calls] + [(q, BW, r) for q in states for r in returns]
    pop_lhs = ([(q, BW, c, g) for q in states for c in calls for g in gammas]
               + [(q, FW, r, g) for q in states for r in returns for g in gammas])
    for q, d, a in push_lhs:
        k = _count(rng, density, deterministic)
        for _ in range(k):
            rules.append(("push", q, d, a, rng.choice(states), rng.choice((FW, BW)), rng.choice(gammas)))
    for q, d, a, g in pop_lhs:
        k = _count(rng, density, deterministic)
        for _ in range(k):
            d2 = FW if a == "<L>" else rng.choice((FW, BW))
            rules.append(("pop", q, d, a, g, rng.choice(states), d2))
    rules = list(dict.fromkeys(rules))
    finals = frozenset(q for q in states if rng.random() < 0.4) or frozenset([states[-1]])
    return TwoVpa(alphabet, states, states[0], finals, gammas, tuple(rules))


def _count(rng, density, deterministic):
    if rng.random() >= density:
        return 0
    if deterministic:
        return 1
    return 1 if rng.random() < 0.7 else 2


def random_vpa(rng: random.Random, alphabet: StructuredAlphabet, n_states: int = 3,
               n_gammas: int = 2, density: float = 0.5, deterministic: bool = False) -> Vpa:
    states = tuple(f"s{i}" for i in range(n_states))
    gammas = tuple(f"g{i}" for i in range(n_gammas))
    rules = []
    for q in states:
        for c in alphabet.calls:
            for _ in range(_count(rng, density, deterministic)):
                rules.append(("push", q, c, rng.choice(states), rng.choice(gammas)))
        for r in alphabet.returns:
            for g in gammas:
                for _ in range(_count(rng, density, deterministic)):
                    rules.append(("pop", q, r, g, rng.choice(states)))
    rules = list(dict.fromkeys(rules))
    if deterministic:
        initial = [states[0]]
    else:
        initial = [q for q in states if rng.random() < 0.4] or [states[0]]
    finals = [q for q in states if rng.random() < 0.5] or [states[-1]]
    return Vpa(alphabet, states, frozenset(initial), frozenset(finals), gammas, tuple(rules))
