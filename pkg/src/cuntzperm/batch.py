"""Compiled kernels applying the decisions to many permutations at once.

Each kernel mirrors a reference implementation in ``transducer``, ``trees``
or ``endo``; the test suite checks them against each other.  Rows of the
input arrays are 0-based image arrays of permutations of W_n^k.
"""

from __future__ import annotations

import itertools

import numpy as np
from numba import njit

# return codes of decide_d_rows
B_FAILS = 0
TAIL_FAILS = -1


@njit(cache=True)
def _kahn_order(sig, n, S, order, indeg):
    """Topological order of the off-diagonal pair graph; returns its length.

    The length equals S*(S-1) exactly when the graph is acyclic.
    """
    V = S * S
    for p in range(V):
        indeg[p] = 0
    for c in range(S):
        for d in range(S):
            if c == d:
                continue
            for a in range(n):
                ya = sig[c + S * a]
                for b in range(n):
                    yb = sig[d + S * b]
                    if ya % n == yb % n:
                        indeg[(ya // n) * S + yb // n] += 1
    head = 0
    tail = 0
    for c in range(S):
        for d in range(S):
            if c != d and indeg[c * S + d] == 0:
                order[tail] = c * S + d
                tail += 1
    while head < tail:
        p = order[head]
        head += 1
        c = p // S
        d = p % S
        for a in range(n):
            ya = sig[c + S * a]
            for b in range(n):
                yb = sig[d + S * b]
                if ya % n == yb % n:
                    w = (ya // n) * S + yb // n
                    indeg[w] -= 1
                    if indeg[w] == 0:
                        order[tail] = w
                        tail += 1
    return tail


@njit(cache=True)
def decide_b_rows(sigs, n, k):
    B = sigs.shape[0]
    S = n ** (k - 1)
    res = np.zeros(B, dtype=np.bool_)
    order = np.empty(S * S, dtype=np.int64)
    indeg = np.empty(S * S, dtype=np.int64)
    for i in range(B):
        res[i] = _kahn_order(sigs[i], n, S, order, indeg) == S * (S - 1)
    return res


@njit(cache=True)
def _tail_depth(sig, n, k, S, depth, state, st_p, st_a, st_best):
    """Depth of the tail condition, or -1 when a pair cycles off the diagonal."""
    V = S * S
    for p in range(V):
        depth[p] = -1
        state[p] = 0
    worst = 0
    for g in range(n ** k):
        h = sig[g]
        p0 = (h // n) * S + sig[h] // n
        if p0 // S == p0 % S or state[p0] == 2:
            continue
        top = 0
        st_p[0] = p0
        st_a[0] = 0
        st_best[0] = 0
        state[p0] = 1
        while top >= 0:
            p = st_p[top]
            a = st_a[top]
            if a == n:
                depth[p] = st_best[top]
                state[p] = 2
                top -= 1
                continue
            c = p // S
            d = p % S
            yc = sig[c + S * a]
            yd = sig[d + S * a]
            q = (yc // n) * S + yd // n
            if q // S == q % S:
                sub = 0
            elif state[q] == 2:
                sub = depth[q]
            elif state[q] == 1:
                return -1
            else:
                top += 1
                st_p[top] = q
                st_a[top] = 0
                st_best[top] = 0
                state[q] = 1
                continue
            if yc % n != yd % n or sub > 0:
                if 1 + sub > st_best[top]:
                    st_best[top] = 1 + sub
            st_a[top] = a + 1
        if depth[p0] > worst:
            worst = depth[p0]
    return worst


@njit(cache=True)
def _longest(sig, n, S, order, count, length):
    for t in range(count - 1, -1, -1):
        p = order[t]
        c = p // S
        d = p % S
        best = 0
        for a in range(n):
            ya = sig[c + S * a]
            for b in range(n):
                yb = sig[d + S * b]
                if ya % n == yb % n:
                    w = (ya // n) * S + yb // n
                    if 1 + length[w] > best:
                        best = 1 + length[w]
        length[p] = best
    best = 0
    for t in range(count):
        if length[order[t]] > best:
            best = length[order[t]]
    return best


@njit(cache=True)
def decide_d_rows(sigs, n, k):
    """Per row: certified inverse level bound, or B_FAILS / TAIL_FAILS."""
    B = sigs.shape[0]
    S = n ** (k - 1)
    V = S * S
    res = np.zeros(B, dtype=np.int64)
    order = np.empty(V, dtype=np.int64)
    indeg = np.empty(V, dtype=np.int64)
    depth = np.empty(V, dtype=np.int64)
    state = np.empty(V, dtype=np.int64)
    st_p = np.empty(V + 1, dtype=np.int64)
    st_a = np.empty(V + 1, dtype=np.int64)
    st_best = np.empty(V + 1, dtype=np.int64)
    length = np.zeros(V, dtype=np.int64)
    for i in range(B):
        sig = sigs[i]
        count = _kahn_order(sig, n, S, order, indeg)
        if count != S * (S - 1):
            res[i] = B_FAILS
            continue
        t = _tail_depth(sig, n, k, S, depth, state, st_p, st_a, st_best)
        if t < 0:
            res[i] = TAIL_FAILS
            continue
        res[i] = 1 + t + k - 1 + _longest(sig, n, S, order, count, length)
    return res


@njit(cache=True)
def _window(perm, x, n, k, j):
    p = n ** j
    q = n ** k
    lo = x % p
    w = (x // p) % q
    hi = x // (p * q)
    return lo + p * (perm[w] + q * hi)


@njit(cache=True)
def check_d_rows(sigs, n, k, max_levels):
    """Per row: least level m <= max_levels[row] with an inverse, else 0.

    Also returns the inverse images at that level, padded with -1.
    """
    B = sigs.shape[0]
    Mtop = 0
    for i in range(B):
        if max_levels[i] > Mtop:
            Mtop = max_levels[i]
    size = n ** (Mtop + k - 1)
    found = np.zeros(B, dtype=np.int64)
    inverses = np.full((B, n ** Mtop), -1, dtype=np.int64)
    A = np.empty(size, dtype=np.int64)
    A2 = np.empty(size, dtype=np.int64)
    inv = np.empty(n ** k, dtype=np.int64)
    for i in range(B):
        sig = sigs[i]
        for r in range(n ** k):
            inv[sig[r]] = r
        for r in range(n ** k):
            A[r] = inv[r]
        m = 1
        while True:
            L = m + k - 1
            pm = n ** m
            ok = True
            for r in range(n ** L):
                if A[r] // pm != r // pm or A[r] % pm != A[r % pm] % pm:
                    ok = False
                    break
            if ok:
                found[i] = m
                for r in range(pm):
                    inverses[i, r] = A[r]
                break
            if m == max_levels[i]:
                break
            # next level: window(sigma, m) o embed(A) o window(sigma^{-1}, m)
            m += 1
            L = m + k - 1
            top = n ** (L - 1)
            for r in range(n ** L):
                x = _window(inv, r, n, k, m - 1)
                y = A[x % top] + top * (x // top)
                A2[r] = _window(sig, y, n, k, m - 1)
            for r in range(n ** L):
                A[r] = A2[r]
    return found, inverses


@njit(cache=True)
def definite_rows(maps, m):
    """maps has shape (B, t, m); True where all long compositions are constant."""
    B = maps.shape[0]
    T = maps.shape[1]
    V = m * m
    res = np.zeros(B, dtype=np.bool_)
    indeg = np.empty(V, dtype=np.int64)
    queue = np.empty(V, dtype=np.int64)
    for i in range(B):
        for p in range(V):
            indeg[p] = 0
        for x in range(m):
            for y in range(x + 1, m):
                for t in range(T):
                    a = maps[i, t, x]
                    b = maps[i, t, y]
                    if a != b:
                        if a > b:
                            a, b = b, a
                        indeg[a * m + b] += 1
        tail = 0
        for x in range(m):
            for y in range(x + 1, m):
                if indeg[x * m + y] == 0:
                    queue[tail] = x * m + y
                    tail += 1
        head = 0
        while head < tail:
            p = queue[head]
            head += 1
            x = p // m
            y = p % m
            for t in range(T):
                a = maps[i, t, x]
                b = maps[i, t, y]
                if a != b:
                    if a > b:
                        a, b = b, a
                    w = a * m + b
                    indeg[w] -= 1
                    if indeg[w] == 0:
                        queue[tail] = w
                        tail += 1
        res[i] = tail == m * (m - 1) // 2
    return res


def tuples_of_rows(sigs: np.ndarray, n: int, k: int) -> np.ndarray:
    """Tree maps t_i of every row, shape (B, n, n^{k-1})."""
    S = n ** (k - 1)
    inv = np.empty_like(sigs)
    np.put_along_axis(inv, sigs, np.arange(sigs.shape[1])[None, :], axis=1)
    idx = np.arange(n)[:, None] + n * np.arange(S)[None, :]
    return inv[:, idx] % S


def all_permutations(size: int) -> np.ndarray:
    """Every permutation of range(size) as rows, in lexicographic order."""
    return np.array(list(itertools.permutations(range(size))), dtype=np.int64)


@njit(cache=True)
def permutation_block(size, start, stop):
    """Permutations of range(size) with lexicographic indices start..stop-1."""
    fact = np.ones(size + 1, dtype=np.int64)
    for i in range(1, size + 1):
        fact[i] = fact[i - 1] * i
    out = np.empty((stop - start, size), dtype=np.int64)
    pool = np.empty(size, dtype=np.int64)
    for row in range(stop - start):
        idx = start + row
        for i in range(size):
            pool[i] = i
        left = size
        for pos in range(size):
            f = fact[size - 1 - pos]
            q = idx // f
            idx -= q * f
            out[row, pos] = pool[q]
            for j in range(q, left - 1):
                pool[j] = pool[j + 1]
            left -= 1
    return out


@njit(cache=True)
def fixed_by_inner(sigs, n, k, perms):
    """Per row, how many letter permutations pi fix sigma under the inner action.

    The action is shift(pi) o sigma o embed(pi^-1), needing k >= 2; the
    identity always counts.
    """
    B = sigs.shape[0]
    N = n ** k
    res = np.zeros(B, dtype=np.int64)
    for i in range(B):
        sig = sigs[i]
        for p in range(perms.shape[0]):
            pi = perms[p]
            inv = np.empty(n, dtype=np.int64)
            for a in range(n):
                inv[pi[a]] = a
            same = True
            for r in range(N):
                # embed(pi^-1) acts on the first letter
                x = inv[r % n] + n * (r // n)
                y = sig[x]
                # shift(pi) acts on the second letter
                lo = y % n
                mid = (y // n) % n
                hi = y // (n * n)
                z = lo + n * (pi[mid] + n * hi)
                if z != sig[r]:
                    same = False
                    break
            if same:
                res[i] += 1
    return res
