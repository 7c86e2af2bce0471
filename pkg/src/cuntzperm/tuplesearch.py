"""Orbit representatives of aligned definite tree tuples.

The group acting is S_n on tree positions times the full relabeling group
on the m = n^{k-1} vertices.  A representative has at position 1 the
canonical labeled tree of the least shape occurring in the tuple, and the
remaining trees sorted; among all such forms the lexicographically least
one is chosen.

The search fixes position 1 to a canonical tree T0 and fills the other
trees vertex by vertex.  It keeps the unordered-pair graph acyclic as it
goes, using reachability bitmasks over the m(m-1)/2 pairs, and only reports
completions that are least under automorphisms of T0 and reordering of the
other positions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import factorial
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from numba import njit

from .shapes import ShapeCatalog, automorphisms, canonical_labelings, relabel
from .trees import LabeledTuple
from .words import DomainError

#: pairs of vertices must fit in one 64-bit mask
MAX_SEARCH_VERTICES = 11


@njit(cache=True)
def _add_edges(R, T, i, v, w, pid):
    """Add the pair edges created by t_i(v) = w; False if a cycle appears."""
    P = R.shape[0]
    for u in range(v):
        tu = T[i, u]
        if tu == w:
            continue
        p = pid[v, u]
        q = pid[w, tu]
        if p == q:
            return False
        if (R[q] >> np.uint64(p)) & np.uint64(1):
            return False
        add = R[q] | (np.uint64(1) << np.uint64(q))
        bit = np.uint64(1) << np.uint64(p)
        for x in range(P):
            if x == p or (R[x] & bit):
                R[x] |= add
    return True


@njit(cache=True)
def _is_least(T, n, m, aut, autinv, perms):
    """Current tuple is least among its images under Aut(T0) x S_{n-1}."""
    for a in range(aut.shape[0]):
        for pi in range(perms.shape[0]):
            cmp = 0
            for jj in range(n - 1):
                src = 1 + perms[pi, jj]
                for x in range(m):
                    val = aut[a, T[src, autinv[a, x]]]
                    cur = T[1 + jj, x]
                    if val < cur:
                        cmp = -1
                        break
                    if val > cur:
                        cmp = 1
                        break
                if cmp != 0:
                    break
            if cmp < 0:
                return False
    return True


@njit(cache=True)
def _search(n, m, first, pid, aut, autinv, perms, allowed, allowed_cnt, cap,
            prefix_len, prefix):
    """Backtrack over trees 2..n.  ``prefix`` pins the first slots (partitioning).

    Returns (completions, count, overflow, nodes).
    """
    P = m * (m - 1) // 2
    nslots = (n - 1) * m
    T = np.full((n, m), -1, dtype=np.int64)
    deg = np.zeros(m, dtype=np.int64)
    R = np.zeros((nslots + 1, P), dtype=np.uint64)
    out = np.empty((cap, n - 1, m), dtype=np.int64)
    count = 0
    nodes = 0
    for v in range(m):
        T[0, v] = first[v]
        deg[first[v]] += 1
        if not _add_edges(R[0], T, 0, v, first[v], pid):
            return out, 0, False, 0
    cnt = allowed_cnt.copy()
    chosen = np.full(n, -1, dtype=np.int64)
    vec = np.zeros(n + 1, dtype=np.int64)
    dcount = np.zeros(m, dtype=np.int64)
    cand = np.zeros(nslots + 1, dtype=np.int64)
    s = 0
    while s >= 0:
        if s == nslots:
            if _is_least(T, n, m, aut, autinv, perms):
                if count == cap:
                    return out, count, True, nodes
                for jj in range(n - 1):
                    for x in range(m):
                        out[count, jj, x] = T[1 + jj, x]
                count += 1
            s -= 1
            continue
        i = 1 + s // m
        v = s % m
        if T[i, v] >= 0:
            deg[T[i, v]] -= 1
            if v == m - 1:
                cnt[chosen[i]] += 1
                chosen[i] = -1
            T[i, v] = -1
        w = cand[s]
        hi = m
        if s < prefix_len:
            if w <= prefix[s]:
                w = prefix[s]
                hi = prefix[s] + 1
            else:
                w = m
        moved = False
        while w < hi:
            if deg[w] < n:
                nodes += 1
                for x in range(P):
                    R[s + 1, x] = R[s, x]
                if _add_edges(R[s + 1], T, i, v, w, pid):
                    T[i, v] = w
                    deg[w] += 1
                    ok = True
                    if v == m - 1:
                        for d in range(n + 1):
                            vec[d] = 0
                        for x in range(m):
                            dcount[x] = 0
                        for x in range(m):
                            dcount[T[i, x]] += 1
                        for x in range(m):
                            vec[dcount[x]] += 1
                        ok = False
                        for r in range(allowed.shape[0]):
                            if cnt[r] > 0:
                                same = True
                                for d in range(n + 1):
                                    if allowed[r, d] != vec[d]:
                                        same = False
                                        break
                                if same:
                                    cnt[r] -= 1
                                    chosen[i] = r
                                    ok = True
                                    break
                    if ok:
                        cand[s] = w + 1
                        s += 1
                        cand[s] = 0
                        moved = True
                        break
                    deg[w] -= 1
                    T[i, v] = -1
            w += 1
        if not moved:
            cand[s] = 0
            s -= 1
    return out, count, False, nodes


def pair_index(m: int) -> np.ndarray:
    pid = np.full((m, m), -1, dtype=np.int64)
    idx = 0
    for x in range(m):
        for y in range(x + 1, m):
            pid[x, y] = pid[y, x] = idx
            idx += 1
    return pid


@dataclass(frozen=True)
class OrbitRep:
    tuple: LabeledTuple
    stabilizer: int  # order of the stabilizer in S_n x S_m
    orbit_size: int
    s: int  # orbit_size / m!
    shapes: tuple[str, ...]  # shape names in position order

    def to_dict(self):
        d = json.loads(self.tuple.to_json())
        d.update(stabilizer=self.stabilizer, orbit_size=self.orbit_size, s=self.s,
                 shapes=list(self.shapes))
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(LabeledTuple.from_json(d), d["stabilizer"], d["orbit_size"], d["s"],
                   tuple(d["shapes"]))


def canonical_form(tup: LabeledTuple, catalog: ShapeCatalog):
    """Return (representative trees, stabilizer order)."""
    infos = [catalog.info(t) for t in tup.trees]
    least = min(catalog.position[i.code] for i in infos)
    best = None
    stab = 0
    for j, t in enumerate(tup.trees):
        if catalog.position[infos[j].code] != least:
            continue
        T0 = infos[j].canonical
        for rho in canonical_labelings(t):
            others = sorted(relabel(u, rho) for jj, u in enumerate(tup.trees) if jj != j)
            key = (T0, *others)
            weight = 1
            for _, g in itertools.groupby(others):
                weight *= factorial(len(list(g)))
            if best is None or key < best:
                best, stab = key, weight
            elif key == best:
                stab += weight
    return best, stab


def _type_restriction(catalog: ShapeCatalog, n: int, letters: Optional[Sequence[str]]):
    vecs = sorted({s.type_vector for s in catalog.infos}, reverse=True)
    if letters is None:
        return np.array(vecs, dtype=np.int64), np.full(len(vecs), n, dtype=np.int64)
    want = {}
    for L in letters:
        want[L] = want.get(L, 0) + 1
    rows = [v for v in vecs if catalog.letters[v] in want]
    return (np.array(rows, dtype=np.int64).reshape(-1, n + 1),
            np.array([want[catalog.letters[v]] for v in rows], dtype=np.int64))


@dataclass
class SearchStats:
    nodes: int = 0
    completions: int = 0
    per_shape: dict = field(default_factory=dict)


def search_first_shape(n: int, k: int, catalog: ShapeCatalog, shape_pos: int,
                       types: Optional[Sequence[str]] = None,
                       prefix: Sequence[int] = (), stats: Optional[SearchStats] = None):
    """Orbit representatives whose least shape is catalog.infos[shape_pos]."""
    m = n ** (k - 1)
    info = catalog.infos[shape_pos]
    if types is not None:
        rest = list(types)
        if info.letter not in rest:
            return []
        rest.remove(info.letter)
    else:
        rest = None
    allowed, allowed_cnt = _type_restriction(catalog, n, rest)
    if allowed.shape[0] == 0 and n > 1:
        return []
    T0 = np.array(info.canonical, dtype=np.int64)
    aut = np.array(automorphisms(info.code), dtype=np.int64)
    autinv = np.argsort(aut, axis=1)
    perms = np.array(list(itertools.permutations(range(n - 1))), dtype=np.int64)
    pid = pair_index(m)
    pre = np.array(prefix, dtype=np.int64) if len(prefix) else np.zeros(1, dtype=np.int64)
    cap = 4096
    while True:
        out, count, overflow, nodes = _search(n, m, T0, pid, aut, autinv, perms, allowed,
                                              allowed_cnt, cap, len(prefix), pre)
        if not overflow:
            break
        cap *= 4
    reps = []
    for row in out[:count]:
        trees = (info.canonical, *[tuple(int(x) for x in t) for t in row])
        tup = LabeledTuple(n, k, trees)
        best, stab = canonical_form(tup, catalog)
        if best != trees:
            continue
        orbit = factorial(n) * factorial(m) // stab
        assert orbit % factorial(m) == 0
        reps.append(OrbitRep(tup, stab, orbit, orbit // factorial(m),
                             tuple(catalog.info(t).name for t in trees)))
    if stats is not None:
        stats.nodes += nodes
        stats.completions += count
        stats.per_shape[info.name] = stats.per_shape.get(info.name, 0) + len(reps)
    return reps


def enumerate_tuples(n: int, k: int, types: Optional[Sequence[str]] = None,
                     catalog: Optional[ShapeCatalog] = None,
                     stats: Optional[SearchStats] = None) -> Iterator[OrbitRep]:
    """One representative per orbit of aligned definite tuples, in canonical order.

    ``types`` restricts to tuples whose trees have exactly these type letters.
    """
    m = n ** (k - 1)
    if m > MAX_SEARCH_VERTICES:
        raise DomainError(f"{m} vertices exceeds the search cap of {MAX_SEARCH_VERTICES}")
    catalog = catalog or ShapeCatalog(m, n)
    for pos in range(len(catalog)):
        reps = search_first_shape(n, k, catalog, pos, types, stats=stats)
        reps.sort(key=lambda r: r.tuple.trees)
        yield from reps


def labeled_total(reps: Iterable[OrbitRep]) -> int:
    return sum(r.orbit_size for r in reps)


def orbit_members(rep: OrbitRep) -> Iterator[LabeledTuple]:
    """Every labeled tuple in the orbit (brute force over S_n x S_m)."""
    tup = rep.tuple
    n, m = tup.n, tup.vertices
    seen = set()
    for pi in itertools.permutations(range(n)):
        for rho in itertools.permutations(range(m)):
            trees = tuple(relabel(tup.trees[pi[i]], rho) for i in range(n))
            if trees not in seen:
                seen.add(trees)
                yield LabeledTuple(n, tup.k, trees)
