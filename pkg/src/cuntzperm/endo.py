"""Finite-level calculus of the endomorphism attached to a permutation.

On the level-m matrix units the endomorphism is conjugation by the word
permutation V_m = s_0 s_1 ... s_{m-1}, where s_j applies sigma^{-1} to letters
j+1..j+k.  The endomorphism is an automorphism exactly when some permutation
pi satisfies V_m^{-1} embed(sigma^{-1}) V_m = embed(pi) for a level m; pi is
then the permutation of the inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .transducer import PairGraph, Transducer, decide_b
from .words import (DomainError, Shape, WordPerm, embed, format_cycles,
                    parse_cycles, shift_embed, unrank, window_apply)


def conjugator(sigma: WordPerm, m: int) -> WordPerm:
    """V_m as a permutation of words of length m+k-1."""
    if m < 1:
        raise DomainError("level must be positive")
    n, k = sigma.n, sigma.k
    L = m + k - 1
    Shape(n, L)
    inv = sigma.inverse().images
    x = np.arange(n ** L, dtype=np.int64)
    # rightmost factor first
    for j in range(m - 1, -1, -1):
        x = window_apply(inv, x, n, k, j)
    return WordPerm(n, L, x, check=False)


@dataclass(frozen=True)
class MatrixUnitSum:
    """A sum of matrix units S_g S_d^*, all with coefficient one."""

    terms: frozenset

    def __mul__(self, other: "MatrixUnitSum") -> "MatrixUnitSum":
        out = set()
        by_row: dict = {}
        for g, d in other.terms:
            by_row.setdefault(g, []).append(d)
        for g, d in self.terms:
            for d2 in by_row.get(d, ()):
                out.add((g, d2))
        return MatrixUnitSum(frozenset(out))

    def adjoint(self) -> "MatrixUnitSum":
        return MatrixUnitSum(frozenset((d, g) for g, d in self.terms))

    def __len__(self):
        return len(self.terms)


def lambda_on_unit(sigma: WordPerm, mu: Sequence[int], nu: Sequence[int]) -> MatrixUnitSum:
    """Image of S_mu S_nu^* expanded at level |mu| + k - 1."""
    if len(mu) != len(nu):
        raise DomainError("matrix unit needs words of equal length")
    n, k = sigma.n, sigma.k
    m = len(mu)
    V = conjugator(sigma, m)
    terms = set()
    for r in range(1, n ** (k - 1) + 1):
        tau = unrank(r, n, k - 1)
        g = V(tuple(mu) + tau)
        d = V(tuple(nu) + tau)
        terms.add((g, d))
    return MatrixUnitSum(frozenset(terms))


@dataclass(frozen=True)
class Automorphism:
    inverse: WordPerm
    m: int

    status = "automorphism"

    def to_dict(self):
        return {"status": self.status, "m": self.m,
                "inverse_cycles": format_cycles(self.inverse)}


@dataclass(frozen=True)
class NotFoundUpTo:
    """No inverse at levels 1..M.  ``certified`` marks runs where the search
    went past the level bound from ``decide_d``, or where ``decide_d`` rules
    out every level, so the negative answer is final."""

    M: int
    certified: bool = False

    status = "not-found"

    def to_dict(self):
        return {"status": self.status, "m": self.M, "inverse_cycles": None,
                "certified": self.certified}


DResult = Union[Automorphism, NotFoundUpTo]


def dresult_to_json(res: DResult) -> str:
    return json.dumps(res.to_dict())


def dresult_from_json(text: str, n: int) -> DResult:
    d = json.loads(text)
    if d["status"] == Automorphism.status:
        m = d["m"]
        return Automorphism(parse_cycles(d["inverse_cycles"], n, m), m)
    return NotFoundUpTo(d["m"], d.get("certified", False))


def _block_form(A: np.ndarray, n: int, m: int, k: int) -> Optional[np.ndarray]:
    """If A(d.e) = p(d).e for all d in W^m, e in W^{k-1}, return p."""
    pm = n ** m
    r = np.arange(A.size)
    if not np.array_equal(A // pm, r // pm):
        return None
    head = (A % pm).reshape(-1, pm)
    if not (head == head[0]).all():
        return None
    return head[0].copy()


def inverse_levels(sigma: WordPerm, max_level: int):
    """Yield (m, rho_m) for m = 1..max_level, where rho_m = V_m^{-1} embed(sigma^{-1}) V_m."""
    n, k = sigma.n, sigma.k
    Shape(n, max_level + k - 1)
    sig = sigma.images
    inv = sigma.inverse().images
    A = inv.copy()
    yield 1, A
    for m in range(2, max_level + 1):
        L = m + k - 1
        r = np.arange(n ** L, dtype=np.int64)
        top = n ** (L - 1)
        emb = A[r % top] + top * (r // top)
        x = window_apply(inv, r, n, k, m - 1)
        A = window_apply(sig, emb[x], n, k, m - 1)
        yield m, A


def check_d(sigma: WordPerm, max_level: Optional[int] = None) -> DResult:
    """Search levels 1..max_level for the inverse permutation.

    With ``max_level=None`` the search runs up to the level bound certified by
    ``decide_d``, so the answer is exact.
    """
    if max_level is None:
        cert = decide_d(sigma)
        if not cert.automorphism:
            return NotFoundUpTo(2 * sigma.k, certified=True)
        max_level = cert.level_bound
    if max_level < 1:
        raise DomainError("max_level must be >= 1")
    n, k = sigma.n, sigma.k
    for m, A in inverse_levels(sigma, max_level):
        p = _block_form(A, n, m, k)
        if p is not None:
            return Automorphism(WordPerm(n, m, p, check=False), m)
    # reaching the certified bound without an inverse would contradict decide_d
    return NotFoundUpTo(max_level, certified=False)


@dataclass(frozen=True)
class DCertificate:
    """Exact answer to the automorphism question for a (b)-permutation.

    ``level_bound`` is a level by which the inverse is guaranteed to appear;
    ``tail_depth`` is the depth of the tail condition that was verified.
    """

    automorphism: bool
    level_bound: Optional[int] = None
    tail_depth: Optional[int] = None
    reason: str = ""


def _longest_path(graph: PairGraph) -> int:
    memo: dict = {}
    # iterative post-order on an acyclic graph
    for root in graph.succ:
        if root in memo:
            continue
        stack = [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                memo[v] = max((1 + memo[(c, d)] for c, d, _, _ in graph.succ[v]), default=0)
                continue
            if v in memo:
                continue
            stack.append((v, True))
            for c, d, _, _ in graph.succ[v]:
                if (c, d) not in memo:
                    stack.append(((c, d), False))
    return max(memo.values(), default=0)


def decide_d(sigma: WordPerm) -> DCertificate:
    """Decide whether the endomorphism is an automorphism, without a level cap.

    Under the diagonal condition, sigma^{-1} must be recoverable from a
    bounded window of the conjugated machine.  This reduces to a tail
    condition on pairs of machine states reached from g and sigma(g) after k
    letters: running both states on the same input, their outputs may differ
    only finitely often and the pair must not cycle off the diagonal.
    """
    if not decide_b(sigma):
        return DCertificate(False, reason="diagonal condition fails")
    n, k = sigma.n, sigma.k
    if k == 1:
        return DCertificate(True, 1, 0)
    mach = Transducer(sigma)
    out, nxt = mach.out, mach.nxt
    sig = sigma.images
    # states after reading the first k letters of g and of sigma(g)
    start = {(int(sig[g] // n), int(sig[sig[g]] // n)) for g in range(n ** k)}
    depth: dict = {}
    on_path: set = set()

    def explore(p0) -> bool:
        stack = [[p0, 0, 0]]  # pair, next input letter, depth so far
        on_path.add(p0)
        while stack:
            frame = stack[-1]
            p, a, best = frame
            if a == n:
                stack.pop()
                on_path.discard(p)
                depth[p] = best
                continue
            c, d = p
            q = (int(nxt[c, a]), int(nxt[d, a]))
            if q[0] == q[1]:
                sub = 0
            elif q in depth:
                sub = depth[q]
            elif q in on_path:
                return False
            else:
                # revisit this letter once q is finished
                stack.append([q, 0, 0])
                on_path.add(q)
                continue
            if out[c, a] != out[d, a] or sub > 0:
                frame[2] = max(best, 1 + sub)
            frame[1] = a + 1
        return True

    for p in start:
        if p[0] != p[1] and p not in depth:
            if not explore(p):
                return DCertificate(False, reason="state pair cycles off the diagonal")
    m0 = 1 + max((depth[p] for p in start if p[0] != p[1]), default=0)
    bound = m0 + k - 1 + _longest_path(PairGraph(mach))
    return DCertificate(True, bound, m0)


def endo_compose(sigma: WordPerm, rho: WordPerm) -> WordPerm:
    """Permutation of the composite endomorphism (sigma's applied last)."""
    if sigma.n != rho.n:
        raise DomainError("alphabet mismatch")
    L = sigma.k + rho.k - 1
    Shape(sigma.n, L)
    V = conjugator(sigma, rho.k)
    return embed(sigma, L) * (V * embed(rho, L) * V.inverse())


def ad_compose(pi: WordPerm, sigma: WordPerm) -> WordPerm:
    """Permutation for Ad(u_pi) after the endomorphism of sigma; pi is level 1."""
    if pi.k != 1 or pi.n != sigma.n:
        raise DomainError("ad_compose needs a level-1 permutation on the same alphabet")
    L = max(sigma.k, 2)
    return shift_embed(pi, 1, L) * embed(sigma, L) * embed(pi.inverse(), L)
