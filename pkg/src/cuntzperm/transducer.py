"""The letter-by-letter machine describing how a permutation acts on infinite words.

For sigma on W_n^k the state is a word c of length k-1.  Reading a letter a,
write sigma(c.a) = y.c' and emit y, moving to state c'.  The diagonal action
restricts to an automorphism exactly when this machine is injective on
infinite inputs, which we decide through the graph of ordered state pairs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .words import DomainError, WordPerm, rank, unrank


class Transducer:
    """Step tables of the machine: ``out[c, a]`` and ``nxt[c, a]`` (0-based)."""

    def __init__(self, sigma: WordPerm):
        n, k = sigma.n, sigma.k
        S = n ** (k - 1)
        self.n, self.k, self.states = n, k, S
        r = np.arange(S)[:, None] + S * np.arange(n)[None, :]
        img = sigma.images[r]
        self.out = img % n
        self.nxt = img // n

    def step(self, c: int, a: int) -> tuple[int, int]:
        return int(self.out[c, a]), int(self.nxt[c, a])

    def run(self, c: int, letters: Sequence[int]) -> list[int]:
        """Feed 0-based ``letters`` from state ``c``; return 0-based outputs."""
        ys = []
        for a in letters:
            ys.append(int(self.out[c, a]))
            c = int(self.nxt[c, a])
        return ys


class PairGraph:
    """Ordered state pairs joined when some inputs give equal outputs.

    Only off-diagonal vertices (c != c') are kept; edges carry the pair of
    input letters responsible.
    """

    def __init__(self, machine: Transducer):
        self.machine = machine
        S, n = machine.states, machine.n
        out, nxt = machine.out, machine.nxt
        self.succ: dict[tuple[int, int], list[tuple[int, int, int, int]]] = {}
        for c in range(S):
            for d in range(S):
                if c == d:
                    continue
                edges = []
                for a in range(n):
                    for b in range(n):
                        if out[c, a] == out[d, b]:
                            c2, d2 = int(nxt[c, a]), int(nxt[d, b])
                            # equal output and equal next state would make sigma non-injective
                            assert c2 != d2, "pair graph left the off-diagonal"
                            edges.append((c2, d2, a, b))
                self.succ[(c, d)] = edges

    def acyclic(self) -> bool:
        indeg = dict.fromkeys(self.succ, 0)
        for edges in self.succ.values():
            for c2, d2, _, _ in edges:
                indeg[(c2, d2)] += 1
        queue = deque(v for v, d in indeg.items() if d == 0)
        seen = 0
        while queue:
            v = queue.popleft()
            seen += 1
            for c2, d2, _, _ in self.succ[v]:
                w = (c2, d2)
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        return seen == len(self.succ)

    def find_cycle(self):
        """Return a cycle as a list of (vertex, a, b) steps, or None."""
        colour = {}
        for root in self.succ:
            if root in colour:
                continue
            stack = [(root, iter(self.succ[root]))]
            path = []  # (vertex, a, b) taken out of vertex
            colour[root] = 1
            while stack:
                v, it = stack[-1]
                e = next(it, None)
                if e is None:
                    colour[v] = 2
                    stack.pop()
                    if path:
                        path.pop()
                    continue
                w = (e[0], e[1])
                if colour.get(w) == 1:
                    path.append((v, e[2], e[3]))
                    start = next(i for i, (u, _, _) in enumerate(path) if u == w)
                    return path[start:]
                if w not in colour:
                    colour[w] = 1
                    path.append((v, e[2], e[3]))
                    stack.append((w, iter(self.succ[w])))
        return None


def run_prefix(sigma: WordPerm, x: Sequence[int]) -> tuple[int, ...]:
    """Output of the machine on the finite word ``x`` (letters 1..n)."""
    n, k = sigma.n, sigma.k
    if len(x) < k:
        raise DomainError(f"input of length {len(x)} shorter than k = {k}")
    m = Transducer(sigma)
    c = rank(x[: k - 1], n) - 1 if k > 1 else 0
    letters = [a - 1 for a in x[k - 1:]]
    if any(not 0 <= a < n for a in letters):
        raise DomainError("letter out of range")
    return tuple(y + 1 for y in m.run(c, letters))


def decide_b(sigma: WordPerm) -> bool:
    """True iff the diagonal restriction of the endomorphism is an automorphism."""
    if sigma.k == 1:
        return True
    return PairGraph(Transducer(sigma)).acyclic()


@dataclass(frozen=True)
class CollisionWitness:
    """Two distinct eventually periodic inputs with a long common output."""

    n: int
    pre: tuple[tuple[int, ...], tuple[int, ...]]
    period: tuple[tuple[int, ...], tuple[int, ...]]
    agree: int

    def inputs(self, length: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        out = []
        for pre, per in zip(self.pre, self.period):
            w = list(pre)
            while len(w) < length:
                w.extend(per)
            out.append(tuple(w[:length]))
        return out[0], out[1]

    def verify(self, sigma: WordPerm) -> bool:
        x, y = self.inputs(self.agree + sigma.k - 1)
        return x != y and run_prefix(sigma, x) == run_prefix(sigma, y)

    def to_text(self) -> str:
        sep = "" if self.n < 10 else "."
        f = lambda w: sep.join(map(str, w)) or "-"
        lines = [f"input {f(p)} ({f(q)})" for p, q in zip(self.pre, self.period)]
        lines.append(f"agree {self.agree}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, n: int) -> "CollisionWitness":
        lines = text.strip().splitlines()
        pre, per = [], []
        for line in lines[:2]:
            _, p, q = line.split()
            parse = (lambda w: () if w == "-" else
                     tuple(int(c) for c in (w if n < 10 else w.split("."))))
            pre.append(parse(p))
            per.append(parse(q.strip("()")))
        return cls(n, tuple(pre), tuple(per), int(lines[2].split()[1]))


def find_witness(sigma: WordPerm) -> Optional[CollisionWitness]:
    if sigma.k == 1:
        return None
    graph = PairGraph(Transducer(sigma))
    cycle = graph.find_cycle()
    if cycle is None:
        return None
    n, k = sigma.n, sigma.k
    (c, d), _, _ = cycle[0]
    pre_x = unrank(c + 1, n, k - 1)
    pre_y = unrank(d + 1, n, k - 1)
    per_x = tuple(a + 1 for _, a, _ in cycle)
    per_y = tuple(b + 1 for _, _, b in cycle)
    agree = 2 * len(graph.succ) + k
    w = CollisionWitness(n, (pre_x, pre_y), (per_x, per_y), agree)
    assert w.verify(sigma)
    return w
