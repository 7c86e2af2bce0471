"""Unlabeled rooted trees, canonical labelings and in-degree types.

A shape is encoded by its canonical code: the nested tuple of the sorted
codes of the root's subtrees.  The canonical labeled tree of a shape numbers
vertices in preorder, visiting children in increasing code order, and is
stored as a parent array in which the root points to itself.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .words import DomainError

#: refuse shape enumeration beyond this many vertices
MAX_VERTICES = 16

Code = tuple


@lru_cache(maxsize=None)
def shapes_of_size(v: int) -> tuple[Code, ...]:
    """All canonical codes of rooted trees with v vertices, sorted."""
    if v < 1:
        return ()
    if v > MAX_VERTICES:
        raise DomainError(f"{v} vertices exceeds the cap of {MAX_VERTICES}")
    return tuple(sorted(tuple(reversed(f)) for f in _forests(v - 1, None)))


@lru_cache(maxsize=None)
def _forests(size: int, largest) -> tuple[Code, ...]:
    """Forests of total size ``size`` as non-increasing code sequences, all <= largest."""
    if size == 0:
        return ((),)
    out = []
    for first in range(1, size + 1):
        for c in shapes_of_size(first):
            if largest is not None and c > largest:
                continue
            for rest in _forests(size - first, c):
                out.append((c,) + rest)
    return tuple(out)


def enumerate_shapes(v: int) -> list[Code]:
    return list(shapes_of_size(v))


def code_size(code: Code) -> int:
    return 1 + sum(code_size(c) for c in code)


def level_sequence(code: Code) -> list[int]:
    """Depths of the vertices in canonical preorder, root at depth 0."""
    out = []

    def walk(c, d):
        out.append(d)
        for sub in c:
            walk(sub, d + 1)

    walk(code, 0)
    return out


def canonical_tree(code: Code) -> tuple[int, ...]:
    """Parent array of the canonical labeled tree of a shape."""
    parents = []

    def walk(c, p):
        me = len(parents)
        parents.append(me if p is None else p)
        for sub in c:
            walk(sub, me)

    walk(code, None)
    return tuple(parents)


def children_of(t: Sequence[int]):
    root = None
    kids = defaultdict(list)
    for v, p in enumerate(t):
        if p == v:
            root = v
        else:
            kids[p].append(v)
    return root, kids


def code_of(t: Sequence[int]) -> Code:
    """Canonical code of a rooted tree with loop given as a map."""
    root, kids = children_of(t)
    if root is None:
        raise DomainError("map has no root")
    memo: dict[int, Code] = {}
    # depth-first without recursion limits: process vertices leaves first
    order = [root]
    for v in order:
        order.extend(kids[v])
    for v in reversed(order):
        memo[v] = tuple(sorted(memo[c] for c in kids[v]))
    return memo[root]


def canonical_labelings(t: Sequence[int]) -> list[tuple[int, ...]]:
    """Every relabeling rho (rho[v] = new label) carrying t to its canonical tree."""
    root, kids = children_of(t)
    codes: dict[int, Code] = {}
    order = [root]
    for v in order:
        order.extend(kids[v])
    for v in reversed(order):
        codes[v] = tuple(sorted(codes[c] for c in kids[v]))

    def preorders(v):
        groups = [list(g) for _, g in itertools.groupby(
            sorted(kids[v], key=lambda c: codes[c]), key=lambda c: codes[c])]
        for arrangement in itertools.product(*(itertools.permutations(g) for g in groups)):
            seq = [c for g in arrangement for c in g]
            for tails in itertools.product(*(list(preorders(c)) for c in seq)):
                yield [v] + [x for tl in tails for x in tl]

    out = []
    for pre in preorders(root):
        rho = [0] * len(t)
        for new, old in enumerate(pre):
            rho[old] = new
        out.append(tuple(rho))
    return out


def relabel(t: Sequence[int], rho: Sequence[int]) -> tuple[int, ...]:
    """The map rho o t o rho^{-1}."""
    out = [0] * len(t)
    for v, p in enumerate(t):
        out[rho[v]] = rho[p]
    return tuple(out)


def automorphisms(code: Code) -> list[tuple[int, ...]]:
    return canonical_labelings(canonical_tree(code))


def in_degrees_of_code(code: Code) -> list[int]:
    """In-degrees in canonical preorder; the root also counts its loop."""
    t = canonical_tree(code)
    d = [0] * len(t)
    for p in t:
        d[p] += 1
    return d


def indegree_type(code: Code, max_indegree: int) -> tuple[int, ...]:
    """Multiplicity vector: entry j counts vertices of in-degree j."""
    vec = [0] * (max_indegree + 1)
    for d in in_degrees_of_code(code):
        if d > max_indegree:
            raise DomainError("in-degree above the cap")
        vec[d] += 1
    return tuple(vec)


def admissible(code: Code, max_indegree: int) -> bool:
    return max(in_degrees_of_code(code)) <= max_indegree


def type_letters(vectors) -> dict[tuple[int, ...], str]:
    """Letters A, B, ... by decreasing multiplicity vector."""
    return {v: chr(ord("A") + i) for i, v in enumerate(sorted(set(vectors), reverse=True))}


@dataclass(frozen=True)
class ShapeInfo:
    code: Code
    type_vector: tuple[int, ...]
    letter: str
    index: int  # 1-based within its type
    canonical: tuple[int, ...]

    @property
    def name(self) -> str:
        return f"{self.letter}{self.index}"


def classify_types(v: int, max_indegree: int) -> dict[tuple[int, ...], int]:
    """Admissible shape counts per in-degree type."""
    counts: dict[tuple[int, ...], int] = defaultdict(int)
    for code in shapes_of_size(v):
        if admissible(code, max_indegree):
            counts[indegree_type(code, max_indegree)] += 1
    return dict(counts)


class ShapeCatalog:
    """Admissible shapes on v vertices, lettered by type and numbered within it.

    ``numbering`` may give the order of codes within each type; otherwise
    canonical code order is used.
    """

    def __init__(self, v: int, max_indegree: int, numbering: dict | None = None):
        codes = [c for c in shapes_of_size(v) if admissible(c, max_indegree)]
        vecs = {c: indegree_type(c, max_indegree) for c in codes}
        letters = type_letters(vecs.values())
        by_type: dict[str, list[Code]] = defaultdict(list)
        for c in codes:
            by_type[letters[vecs[c]]].append(c)
        self.infos: list[ShapeInfo] = []
        for letter in sorted(by_type):
            group = by_type[letter]
            if numbering and letter in numbering:
                order = numbering[letter]
                if sorted(order) != sorted(group):
                    raise DomainError(f"numbering for type {letter} does not match")
                group = list(order)
            for i, c in enumerate(group, 1):
                self.infos.append(ShapeInfo(c, vecs[c], letter, i, canonical_tree(c)))
        self.by_code = {s.code: s for s in self.infos}
        self.position = {s.code: i for i, s in enumerate(self.infos)}
        self.letters = letters
        self.v = v
        self.max_indegree = max_indegree

    def __len__(self):
        return len(self.infos)

    def info(self, t: Sequence[int]) -> ShapeInfo:
        return self.by_code[code_of(t)]

    def letter_of_vector(self, vec) -> str:
        return self.letters[tuple(vec)]


def _row_vectors(multiset, rows, n):
    out = []
    for r in range(rows):
        vec = [0] * (n + 1)
        for col in multiset:
            vec[col[r]] += 1
        out.append(tuple(vec))
    return out


def type_alignments(types: Sequence[tuple[int, ...]], n: int) -> list[tuple]:
    """Alignments of the given types up to column permutation.

    An alignment places each type's in-degree multiset along one row of a
    matrix whose columns all sum to n.  Rows carry the types in the order
    given; a matrix is identified with the sorted tuple of its columns.
    """
    v = sum(types[0])
    rows = len(types)
    target = [tuple(t) for t in types]
    columns = [c for c in itertools.product(range(n + 1), repeat=rows) if sum(c) == n]
    return [tuple(ms) for ms in itertools.combinations_with_replacement(columns, v)
            if _row_vectors(ms, rows, n) == target]


def alignment_census(v: int, n: int, rows: int) -> dict[tuple[str, ...], int]:
    """Alignment counts for every type multiset that has one.

    Rows are listed in letter order, so each multiset is counted once per
    column arrangement; equal-type rows are not identified.
    """
    letters = type_letters(classify_types(v, n))
    columns = [c for c in itertools.product(range(n + 1), repeat=rows) if sum(c) == n]
    tally: dict[tuple[str, ...], int] = defaultdict(int)
    for ms in itertools.combinations_with_replacement(columns, v):
        row_vecs = _row_vectors(ms, rows, n)
        if any(rv not in letters for rv in row_vecs):
            continue
        names = tuple(letters[rv] for rv in row_vecs)
        if list(names) == sorted(names):
            tally[names] += 1
    return dict(sorted(tally.items()))
