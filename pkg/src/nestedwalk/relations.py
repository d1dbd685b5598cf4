"""Relations over machine states and the concatenation / wrapping formulas.

The same formula skeleton serves two carriers:

* ``BoolOps``: a relation is a tuple of row bitmasks (row i has bit j set iff
  (i, j) is in the relation). Used for traversals.
* ``WordOps``: a relation is a dict mapping (i, j) to a finite set of output
  words, or to ``INF`` when infinitely many words are possible. Used for
  output matrices.

Composition is diagrammatic: (a, c) is in R;S iff (a, b) in R and (b, c) in S.
A traversal is a 4-tuple (ll, lr, rl, rr) where the first letter is the side
on which the run enters and the second the side on which it leaves.
"""
from __future__ import annotations

from typing import Iterable


class _Inf:
    __slots__ = ()

    def __repr__(self) -> str:
        return "INF"


INF = _Inf()


class BoolOps:
    def __init__(self, n: int):
        self.n = n
        self._empty = (0,) * n
        self._id = tuple(1 << i for i in range(n))

    def empty(self):
        return self._empty

    def identity(self):
        return self._id

    def from_edges(self, edges: Iterable) -> tuple:
        rows = [0] * self.n
        for e in edges:
            rows[e[0]] |= 1 << e[1]
        return tuple(rows)

    def is_empty(self, a) -> bool:
        return not any(a)

    def union(self, a, b):
        if a is self._empty:
            return b
        if b is self._empty:
            return a
        return tuple(x | y for x, y in zip(a, b))

    def compose(self, a, b):
        if not any(a) or not any(b):
            return self._empty
        out = []
        for row in a:
            acc = 0
            while row:
                low = row & -row
                acc |= b[low.bit_length() - 1]
                row ^= low
            out.append(acc)
        return tuple(out)

    def star(self, a):
        rows = [r | (1 << i) for i, r in enumerate(a)]
        if not any(a):
            return self._id
        n = self.n
        for k in range(n):
            bit = 1 << k
            rk = rows[k]
            for i in range(n):
                if rows[i] & bit:
                    rows[i] |= rk
        return tuple(rows)


class WordOps:
    """Relations whose entries carry sets of words (tuples of tokens)."""

    EPS = frozenset([()])

    def __init__(self, n: int):
        self.n = n

    def empty(self):
        return {}

    def identity(self):
        return {(i, i): self.EPS for i in range(self.n)}

    def from_edges(self, edges: Iterable) -> dict:
        out: dict = {}
        for i, j, word in edges:
            out[(i, j)] = _uni(out.get((i, j)), frozenset([tuple(word)]))
        return out

    def is_empty(self, a) -> bool:
        return not a

    def union(self, a, b):
        if not a:
            return b
        if not b:
            return a
        out = dict(a)
        for k, v in b.items():
            out[k] = _uni(out.get(k), v)
        return out

    def compose(self, a, b):
        if not a or not b:
            return {}
        by_row: dict = {}
        for (k, j), v in b.items():
            by_row.setdefault(k, []).append((j, v))
        out: dict = {}
        for (i, k), u in a.items():
            for j, v in by_row.get(k, ()):
                val = _cat(u, v)
                if val:
                    out[(i, j)] = _uni(out.get((i, j)), val)
        return out

    def star(self, a):
        # Kleene's algorithm: M holds paths of length >= 1 through pivots < k.
        m = dict(a)
        for k in range(self.n):
            loop = m.get((k, k))
            if loop is None:
                loop_star = self.EPS
            elif loop is INF or any(loop_word for loop_word in loop):
                loop_star = INF
            else:
                loop_star = self.EPS
            into = [(i, v) for (i, j), v in m.items() if j == k]
            outof = [(j, v) for (i, j), v in m.items() if i == k]
            if not into or not outof:
                continue
            for i, u in into:
                left = _cat(u, loop_star)
                for j, v in outof:
                    val = _cat(left, v)
                    if val:
                        m[(i, j)] = _uni(m.get((i, j)), val)
        for i in range(self.n):
            m[(i, i)] = _uni(m.get((i, i)), self.EPS)
        return m


def _uni(a, b):
    if a is None:
        return b
    if a is INF or b is INF:
        return INF
    return a | b


def _cat(a, b):
    if a is INF:
        return INF if b else frozenset()
    if b is INF:
        return INF if a else frozenset()
    if len(a) == 1 and len(b) == 1:
        (x,), (y,) = a, b
        return frozenset([x + y])
    return frozenset(x + y for x in a for y in b)


def chain(ops, *rels):
    out = rels[0]
    for r in rels[1:]:
        out = ops.compose(out, r)
    return out


def concat_formula(ops, u: tuple, v: tuple) -> tuple:
    """Traversal of uv from the traversals of u and v."""
    ull, ulr, url, urr = u
    vll, vlr, vrl, vrr = v
    # a run crossing the u|v boundary may bounce back and forth between them
    left_loop = ops.star(ops.compose(vll, urr))
    right_loop = ops.star(ops.compose(urr, vll))
    ll = ops.union(ull, chain(ops, ulr, left_loop, vll, url))
    lr = chain(ops, ulr, left_loop, vlr)
    rl = chain(ops, vrl, right_loop, url)
    rr = ops.union(vrr, chain(ops, vrl, right_loop, urr, vlr))
    return (ll, lr, rl, rr)


class WrapAtoms:
    """Per (c, r) rule relations, split by stack symbol and direction.

    push_c[g][d]: forward push on c landing with direction d
    pop_c[g][d]:  backward pop on c leaving with direction d
    push_r[g][d]: backward push on r landing with direction d
    pop_r[g][d]:  forward pop on r leaving with direction d
    Directions are indexed 0 for forward and 1 for backward.
    """

    def __init__(self, ops, push_c: dict, pop_c: dict, push_r: dict, pop_r: dict):
        self.ops = ops
        self.gammas = sorted(set(push_c) | set(push_r), key=repr)
        e = ops.empty()
        self.push_c = {g: push_c.get(g, (e, e)) for g in self.gammas}
        self.push_r = {g: push_r.get(g, (e, e)) for g in self.gammas}
        self.pop_c = {g: pop_c.get(g, (e, e)) for g in self.gammas}
        self.pop_r = {g: pop_r.get(g, (e, e)) for g in self.gammas}
        # terms independent of the inner word
        self.zc = [self._sum(lambda g, d=d: ops.compose(self.push_c[g][1], self.pop_c[g][d])) for d in (0, 1)]
        self.zr = [self._sum(lambda g, d=d: ops.compose(self.push_r[g][0], self.pop_r[g][d])) for d in (0, 1)]

    def _sum(self, term):
        out = self.ops.empty()
        for g in self.gammas:
            out = self.ops.union(out, term(g))
        return out


def wrap_formula(atoms: WrapAtoms, w: tuple) -> tuple:
    """Traversal of c w r from the traversal of w."""
    ops = atoms.ops
    wll, wlr, wrl, wrr = w
    F, B = 0, 1
    pc, qc, pr, qr = atoms.push_c, atoms.pop_c, atoms.push_r, atoms.pop_r

    def through(first, mid, last, d_in, d_out):
        return atoms._sum(lambda g: chain(ops, first[g][d_in], mid, last[g][d_out]))

    # enter from the left, come back out through c
    z_ll = [ops.union(atoms.zc[d], through(pc, wll, qc, F, d)) for d in (F, B)]
    # enter from the right, come back out through r
    z_rr = [ops.union(atoms.zr[d], through(pr, wrr, qr, B, d)) for d in (F, B)]
    # cross the whole inner word
    t_lr = [through(pc, wlr, qr, F, d) for d in (F, B)]
    t_rl = [through(pr, wrl, qc, B, d) for d in (F, B)]

    rr_loop = ops.star(z_rr[B])
    ll_loop = ops.star(z_ll[F])
    lr_then = chain(ops, t_lr[B], rr_loop)
    rl_then = chain(ops, t_rl[F], ll_loop)
    x_l = ops.star(ops.union(z_ll[F], ops.compose(lr_then, t_rl[F])))
    x_r = ops.star(ops.union(z_rr[B], ops.compose(rl_then, t_lr[B])))
    ll = ops.compose(x_l, ops.union(z_ll[B], ops.compose(lr_then, t_rl[B])))
    lr = ops.compose(x_l, ops.union(t_lr[F], ops.compose(lr_then, z_rr[F])))
    rl = ops.compose(x_r, ops.union(t_rl[B], ops.compose(rl_then, z_ll[B])))
    rr = ops.compose(x_r, ops.union(z_rr[F], ops.compose(rl_then, t_lr[F])))
    return (ll, lr, rl, rr)
