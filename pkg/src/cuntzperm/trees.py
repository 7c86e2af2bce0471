"""Labeled tree tuples attached to a permutation, and the fibers over them.

For sigma on W_n^k and a letter i, the map t_i on W_n^{k-1} sends alpha to
the first k-1 letters of sigma^{-1}(i.alpha).  Vertices are 0-based ranks of
(k-1)-words; a tuple stores each t_i as a tuple of images.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from math import factorial
from typing import Iterator, Sequence

import numpy as np

from .words import DomainError, Shape, WordPerm

TreeMap = tuple  # images of vertices 0..m-1


def is_tree_with_loop(t: Sequence[int]) -> bool:
    """Exactly one fixed point, and every vertex iterates into it."""
    m = len(t)
    roots = [v for v in range(m) if t[v] == v]
    if len(roots) != 1:
        return False
    root = roots[0]
    state = [0] * m  # 0 unknown, 1 on current walk, 2 reaches root
    state[root] = 2
    for v in range(m):
        walk = []
        x = v
        while state[x] == 0:
            state[x] = 1
            walk.append(x)
            x = t[x]
        if state[x] == 1:
            return False
        for y in walk:
            state[y] = 2
    return True


def in_degrees(t: Sequence[int]) -> list[int]:
    """In-degree of every vertex; the root's loop counts once."""
    d = [0] * len(t)
    for p in t:
        d[p] += 1
    return d


def reverse_pair_graph_acyclic(maps: Sequence[Sequence[int]]) -> bool:
    """True iff every long enough composition of the maps is constant.

    Vertices are unordered pairs {x, y}, x != y, with an edge to
    {t(x), t(y)} for each map t that keeps them apart.
    """
    m = len(maps[0])
    succ = {}
    indeg = {}
    for x in range(m):
        for y in range(x + 1, m):
            succ[(x, y)] = []
            indeg.setdefault((x, y), 0)
    for (x, y), out in succ.items():
        for t in maps:
            a, b = t[x], t[y]
            if a != b:
                w = (a, b) if a < b else (b, a)
                out.append(w)
                indeg[w] = indeg.get(w, 0) + 1
    queue = deque(v for v, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == len(succ)


@dataclass(frozen=True)
class LabeledTuple:
    n: int
    k: int
    trees: tuple[TreeMap, ...]

    def __post_init__(self):
        Shape(self.n, self.k)
        m = self.n ** (self.k - 1)
        if len(self.trees) != self.n or any(len(t) != m for t in self.trees):
            raise DomainError(f"expected {self.n} maps on {m} vertices")
        if any(not 0 <= x < m for t in self.trees for x in t):
            raise DomainError("map value out of range")

    @classmethod
    def of(cls, n: int, k: int, trees) -> "LabeledTuple":
        return cls(n, k, tuple(tuple(int(x) for x in t) for t in trees))

    @property
    def vertices(self) -> int:
        return self.n ** (self.k - 1)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "k": self.k,
                           "trees": [[x + 1 for x in t] for t in self.trees]})

    @classmethod
    def from_json(cls, text) -> "LabeledTuple":
        d = json.loads(text) if isinstance(text, str) else text
        return cls.of(d["n"], d["k"], [[x - 1 for x in t] for t in d["trees"]])

    def alignment_matrix(self) -> np.ndarray:
        return np.array([in_degrees(t) for t in self.trees], dtype=np.int64)

    def aligned(self) -> bool:
        M = self.alignment_matrix()
        return bool((M.sum(axis=0) == self.n).all())

    def all_trees(self) -> bool:
        return all(is_tree_with_loop(t) for t in self.trees)

    def slots(self) -> list[list[int]]:
        """Incoming slots at each vertex as 0-based ranks of words i.alpha."""
        out = [[] for _ in range(self.vertices)]
        for i, t in enumerate(self.trees):
            for a, b in enumerate(t):
                out[b].append(i + self.n * a)
        for s in out:
            s.sort()
        return out


def tuple_of(sigma: WordPerm) -> LabeledTuple:
    n, k = sigma.n, sigma.k
    if k < 2:
        raise DomainError("trees need k >= 2")
    S = n ** (k - 1)
    inv = sigma.inverse().images
    trees = [tuple(int(inv[i + n * a]) % S for a in range(S)) for i in range(n)]
    t = LabeledTuple(n, k, tuple(trees))
    assert t.aligned()
    return t


def criterion_b_tuple(tup: LabeledTuple) -> bool:
    """Tuple-side form of the diagonal condition.

    Requires alignment and that all long compositions of the maps are
    constant.  The latter forces each map to be a tree with a root loop, but
    it is strictly stronger than asking that of each map separately.
    """
    return tup.aligned() and reverse_pair_graph_acyclic(tup.trees)


def trees_aligned(tup: LabeledTuple) -> bool:
    """Each map a rooted tree with loop, plus alignment (per-tree test only)."""
    return tup.aligned() and tup.all_trees()


# fibers

_PERMS_CACHE: dict[int, np.ndarray] = {}


def letter_perms(n: int) -> np.ndarray:
    """All permutations of range(n) in lexicographic order, one per row."""
    if n not in _PERMS_CACHE:
        _PERMS_CACHE[n] = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    return _PERMS_CACHE[n]


def fiber_size(tup: LabeledTuple) -> int:
    return factorial(tup.n) ** tup.vertices


def _require_valid(tup: LabeledTuple):
    if not tup.aligned():
        raise DomainError("tuple is not aligned")


def fiber(tup: LabeledTuple, choice: Sequence[Sequence[int]]) -> WordPerm:
    """Permutation realizing ``tup`` where ``choice[b][j]`` is the 0-based last
    letter given to the j-th slot (in ``tup.slots()`` order) at vertex b."""
    _require_valid(tup)
    n, S = tup.n, tup.vertices
    inv = np.empty(n * S, dtype=np.int64)
    for b, slots in enumerate(tup.slots()):
        if sorted(choice[b]) != list(range(n)):
            raise DomainError(f"choice at vertex {b + 1} is not a bijection")
        for j, r in enumerate(slots):
            inv[r] = b + S * choice[b][j]
    return WordPerm(n, tup.k, inv, check=False).inverse()


def choice_of_index(tup: LabeledTuple, index: int) -> list[tuple[int, ...]]:
    """Mixed-radix decoding: vertex b uses digit b (base n!)."""
    perms = letter_perms(tup.n)
    f = len(perms)
    out = []
    for _ in range(tup.vertices):
        index, d = divmod(index, f)
        out.append(tuple(int(x) for x in perms[d]))
    return out


def fiber_iter(tup: LabeledTuple) -> Iterator[WordPerm]:
    _require_valid(tup)
    for idx in range(fiber_size(tup)):
        yield fiber(tup, choice_of_index(tup, idx))


def fiber_inverse_block(tup: LabeledTuple, start: int, stop: int) -> np.ndarray:
    """Rows are sigma^{-1} (0-based image arrays) for fiber indices start..stop-1."""
    _require_valid(tup)
    n, S = tup.n, tup.vertices
    perms = letter_perms(n)
    f = len(perms)
    idx = np.arange(start, stop, dtype=np.int64)
    inv = np.empty((idx.size, n * S), dtype=np.int64)
    for b, slots in enumerate(tup.slots()):
        ch = perms[(idx // f ** b) % f]
        for j, r in enumerate(slots):
            inv[:, r] = b + S * ch[:, j]
    return inv


def invert_rows(rows: np.ndarray) -> np.ndarray:
    out = np.empty_like(rows)
    np.put_along_axis(out, rows, np.arange(rows.shape[1])[None, :], axis=1)
    return out
