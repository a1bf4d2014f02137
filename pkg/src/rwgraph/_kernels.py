"""Compiled inner loops for the exact solvers."""
import numba as nb
import numpy as np


@nb.njit(cache=True)
def hungarian_min(cost):
    """Min-cost perfect assignment by shortest augmenting paths with potentials.

    Returns ``(col_of_row, u, v)`` where ``cost[i, j] - u[i] - v[j] >= 0``
    everywhere, with equality on the assignment.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, np.int64)
    way = np.zeros(n + 1, np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = np.inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = np.empty(n, np.int64)
    for j in range(1, n + 1):
        col_of_row[p[j] - 1] = j - 1
    return col_of_row, u[1:].copy(), v[1:].copy()


@nb.njit(cache=True)
def held_karp_max(w):
    """Max-weight Hamilton cycle through all vertices of the dense matrix ``w``.

    Vertex 0 is the fixed start; ``dp[mask, j]`` is the best path from 0
    through the vertex set ``mask`` (bit k-1 <-> vertex k) ending at j.
    Returns the best weight and the visiting order (starting at 0).
    -inf entries in ``w`` act as missing edges.
    """
    n = w.shape[0]
    m = n - 1
    full = (1 << m) - 1
    dp = np.full((1 << m, m), -np.inf)
    for k in range(m):
        dp[1 << k, k] = w[0, k + 1]
    for mask in range(1, 1 << m):
        for j in range(m):
            if not (mask >> j) & 1:
                continue
            cur = dp[mask, j]
            if cur == -np.inf:
                continue
            for k in range(m):
                if (mask >> k) & 1:
                    continue
                cand = cur + w[j + 1, k + 1]
                nm = mask | (1 << k)
                if cand > dp[nm, k]:
                    dp[nm, k] = cand
    best = -np.inf
    last = -1
    for j in range(m):
        cand = dp[full, j] + w[j + 1, 0]
        if cand > best:
            best = cand
            last = j
    order = np.zeros(n, np.int64)
    if last < 0:
        return best, order[:0]
    mask = full
    pos = n - 1
    j = last
    while True:
        order[pos] = j + 1
        pos -= 1
        prev = mask ^ (1 << j)
        if prev == 0:
            break
        target = dp[mask, j]
        for i in range(m):
            if (prev >> i) & 1 and dp[prev, i] + w[i + 1, j + 1] == target:
                j = i
                break
        mask = prev
    order[0] = 0
    return best, order


@nb.njit(cache=True)
def path_dp_max(w):
    """Max-weight simple path from vertex 0 to vertex 1 over all lengths.

    Intermediates are vertices 2..n-1 (bit k-2 <-> vertex k).  Returns the
    weight and the vertex sequence.  -inf entries act as missing edges.
    """
    n = w.shape[0]
    m = n - 2
    best = w[0, 1]
    best_mask = 0
    best_end = -1
    if m <= 0:
        seq = np.empty(2, np.int64)
        seq[0] = 0
        seq[1] = 1
        return best, seq
    dp = np.full((1 << m, m), -np.inf)
    for k in range(m):
        dp[1 << k, k] = w[0, k + 2]
    for mask in range(1, 1 << m):
        for j in range(m):
            if not (mask >> j) & 1:
                continue
            cur = dp[mask, j]
            if cur == -np.inf:
                continue
            close = cur + w[j + 2, 1]
            if close > best:
                best = close
                best_mask = mask
                best_end = j
            for k in range(m):
                if (mask >> k) & 1:
                    continue
                cand = cur + w[j + 2, k + 2]
                nm = mask | (1 << k)
                if cand > dp[nm, k]:
                    dp[nm, k] = cand
    if best_end < 0:
        seq = np.empty(2, np.int64)
        seq[0] = 0
        seq[1] = 1
        return best, seq
    length = 0
    mm = best_mask
    while mm:
        length += mm & 1
        mm >>= 1
    seq = np.empty(length + 2, np.int64)
    seq[0] = 0
    seq[length + 1] = 1
    mask = best_mask
    j = best_end
    pos = length
    while True:
        seq[pos] = j + 2
        pos -= 1
        prev = mask ^ (1 << j)
        if prev == 0:
            break
        target = dp[mask, j]
        for i in range(m):
            if (prev >> i) & 1 and dp[prev, i] + w[i + 2, j + 2] == target:
                j = i
                break
        mask = prev
    return best, seq
