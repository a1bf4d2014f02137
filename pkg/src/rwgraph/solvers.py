"""Exact maximum-weight solvers on realised weighted complete graphs.

A :class:`WeightedInstance` is either ``K_{n,n}`` (an ``n x n`` matrix,
rows are left vertices) or ``K_n`` (a flat array over pairs ``i < j`` in
lexicographic order).  Solvers return a :class:`Solution` whose weight is
the correctly rounded sum (``math.fsum``) of its edge weights, so negating
an instance negates optimal values bit for bit.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import InstanceTooLarge, InvalidParameter, PatternTooLarge
from .structures import FamilyKind, GraphPattern, StructureFamily, automorphisms

__all__ = [
    "WeightedInstance",
    "Solution",
    "max_matching",
    "max_spanning_tree",
    "max_hamilton_cycle",
    "max_path_1_2",
    "max_copy",
    "solve",
    "solve_min",
    "brute_force",
    "validate",
    "check_solvable",
    "HELD_KARP_CAP",
]

HELD_KARP_CAP = 20
COPY_MAX_V = 6
COPY_MAX_N = 64


def pair_index(i: int, j: int, n: int) -> int:
    """Canonical index of the pair {i, j} of K_n."""
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class WeightedInstance:
    shape: str  # "bipartite" or "complete"
    n: int
    weights: np.ndarray = field(repr=False)
    provenance: dict | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if self.shape == "bipartite":
            want = (self.n, self.n)
        elif self.shape == "complete":
            want = (self.n * (self.n - 1) // 2,)
        else:
            raise InvalidParameter(f"unknown shape {self.shape!r}")
        if w.shape != want:
            raise InvalidParameter(f"{self.shape} instance with n={self.n} needs weights of shape {want}, got {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def bipartite(cls, matrix, provenance=None):
        m = np.asarray(matrix, dtype=np.float64)
        return cls("bipartite", m.shape[0], m, provenance)

    @classmethod
    def complete(cls, n, weights, provenance=None):
        return cls("complete", n, np.asarray(weights, dtype=np.float64), provenance)

    @classmethod
    def complete_from_matrix(cls, matrix, provenance=None):
        m = np.asarray(matrix, dtype=np.float64)
        n = m.shape[0]
        iu = np.triu_indices(n, 1)
        return cls("complete", n, m[iu], provenance)

    def weight(self, a: int, b: int) -> float:
        if self.shape == "bipartite":
            return float(self.weights[a, b])
        if a == b:
            raise InvalidParameter("no loops in K_n")
        return float(self.weights[pair_index(a, b, self.n)])

    def matrix(self, diagonal: float = -np.inf) -> np.ndarray:
        """Dense weights; for K_n a symmetric matrix with ``diagonal`` on it."""
        if self.shape == "bipartite":
            return np.array(self.weights)
        m = np.full((self.n, self.n), diagonal)
        iu = np.triu_indices(self.n, 1)
        m[iu] = self.weights
        m[(iu[1], iu[0])] = self.weights
        return m

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return np.triu_indices(self.n, 1)

    def negated(self) -> "WeightedInstance":
        return replace(self, weights=-self.weights)

    def shifted(self, c: float) -> "WeightedInstance":
        return replace(self, weights=self.weights + c)


@dataclass(frozen=True)
class Solution:
    """An optimal structure: its edges, total weight and family.

    ``vertices`` gives the traversal order for cycles and paths.
    """

    kind: FamilyKind
    edges: tuple[tuple[int, int], ...]
    weight: float
    vertices: tuple[int, ...] | None = None


def _total(inst: WeightedInstance, edges) -> float:
    return math.fsum(inst.weight(a, b) for a, b in edges)


def _require(inst, shape):
    if inst.shape != shape:
        raise InvalidParameter(f"expected a {shape} instance, got {inst.shape}")


# -- matchings -----------------------------------------------------------

def _lexmin_tight_matching(tight: np.ndarray, col_of_row: np.ndarray) -> np.ndarray:
    """Lexicographically smallest perfect matching inside ``tight``.

    ``col_of_row`` must already be a perfect matching of the tight graph.
    Rows are fixed in order; row i moves to a smaller column j only when an
    alternating path among the unfixed vertices frees j's owner.
    """
    n = len(col_of_row)
    col = col_of_row.copy()
    row_of = np.empty(n, np.int64)
    row_of[col] = np.arange(n)
    adj = [np.flatnonzero(tight[i]) for i in range(n)]
    fixed_col = np.zeros(n, bool)
    for i in range(n):
        for j in adj[i]:
            if fixed_col[j]:
                continue
            if j == col[i]:
                break
            path = _alternating_path(adj, col, row_of, fixed_col, start=row_of[j],
                                     target=col[i], banned_row=i, banned_col=j)
            if path is None:
                continue
            # shift every row on the path one column forward, then take j
            for r, c in path:
                col[r] = c
                row_of[c] = r
            col[i] = j
            row_of[j] = i
            break
        fixed_col[col[i]] = True
    return col


def _alternating_path(adj, col, row_of, fixed_col, start, target, banned_row, banned_col):
    parent = {start: None}
    stack = [start]
    while stack:
        r = stack.pop()
        for c in adj[r]:
            if fixed_col[c] or c == banned_col or c == col[r]:
                continue
            if c == target:
                out = [(r, c)]
                while parent[r] is not None:
                    r, c = parent[r]
                    out.append((r, c))
                return out
            nxt = row_of[c]
            if nxt == banned_row or nxt in parent:
                continue
            parent[nxt] = (r, c)
            stack.append(nxt)
    return None


def max_matching(inst: WeightedInstance) -> Solution:
    """Maximum-weight perfect matching of K_{n,n}.

    Ties go to the lexicographically smallest column vector ``(c_0, ..., c_{n-1})``.
    """
    _require(inst, "bipartite")
    n = inst.n
    if n == 0:
        return Solution(FamilyKind.MATCHING, (), 0.0)
    cost = -np.ascontiguousarray(inst.weights)
    col, u, v = _kernels.hungarian_min(cost)
    reduced = cost - u[:, None] - v[None, :]
    eps = 1e-9 * max(1.0, float(np.max(np.abs(cost))))
    tight = reduced <= eps
    if tight.sum() > n:
        col = _lexmin_tight_matching(tight, col)
    edges = tuple((i, int(col[i])) for i in range(n))
    return Solution(FamilyKind.MATCHING, edges, _total(inst, edges))


# -- spanning trees --------------------------------------------------------

class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return True


def max_spanning_tree(inst: WeightedInstance) -> Solution:
    """Kruskal on decreasing weights; equal weights go by canonical edge index."""
    _require(inst, "complete")
    n = inst.n
    iu, ju = inst.pairs()
    order = np.argsort(-inst.weights, kind="stable")
    dsu = _DisjointSet(n)
    edges = []
    for e in order:
        a, b = int(iu[e]), int(ju[e])
        if dsu.union(a, b):
            edges.append((a, b))
            if len(edges) == n - 1:
                break
    edges.sort()
    return Solution(FamilyKind.TREE, tuple(edges), _total(inst, edges))


# -- Hamilton cycles and 0-1 paths -----------------------------------------

def _cycle_edges(order):
    n = len(order)
    return tuple((min(order[k], order[(k + 1) % n]), max(order[k], order[(k + 1) % n])) for k in range(n))


def max_hamilton_cycle(inst: WeightedInstance, cap: int = HELD_KARP_CAP) -> Solution:
    """Held-Karp over (visited set, endpoint).

    The cycle is listed from vertex 0, in the direction whose second vertex
    is smaller than its last.
    """
    _require(inst, "complete")
    n = inst.n
    if n < 3:
        raise InvalidParameter("Hamilton cycles need n >= 3")
    if n > cap:
        raise InstanceTooLarge(f"Held-Karp limited to n <= {cap}, got n={n}")
    _, order = _kernels.held_karp_max(inst.matrix())
    order = [int(x) for x in order]
    if order[1] > order[-1]:
        order = [order[0]] + order[1:][::-1]
    edges = _cycle_edges(order)
    return Solution(FamilyKind.HAMCYCLE, edges, _total(inst, edges), tuple(order))


def max_path_1_2(inst: WeightedInstance, cap: int = HELD_KARP_CAP) -> Solution:
    """Heaviest simple path between vertices 0 and 1, any length."""
    _require(inst, "complete")
    n = inst.n
    if n < 2:
        raise InvalidParameter("paths need n >= 2")
    if n > cap:
        raise InstanceTooLarge(f"path DP limited to n <= {cap}, got n={n}")
    _, seq = _kernels.path_dp_max(inst.matrix())
    seq = tuple(int(x) for x in seq)
    edges = tuple((min(a, b), max(a, b)) for a, b in zip(seq, seq[1:]))
    return Solution(FamilyKind.PATH, edges, _total(inst, edges), seq)


# -- pattern copies --------------------------------------------------------

def _search_order(p: GraphPattern) -> list[int]:
    """Vertices ordered so each one (after the first of its component) has
    an already-placed neighbour; high degree first."""
    deg = [0] * p.v
    nbrs = [set() for _ in range(p.v)]
    for a, b in p.edges:
        deg[a] += 1
        deg[b] += 1
        nbrs[a].add(b)
        nbrs[b].add(a)
    order, placed = [], set()
    while len(order) < p.v:
        start = max((u for u in range(p.v) if u not in placed), key=lambda u: (deg[u], -u))
        order.append(start)
        placed.add(start)
        while True:
            frontier = [u for u in range(p.v) if u not in placed and nbrs[u] & placed]
            if not frontier:
                break
            nxt = max(frontier, key=lambda u: (len(nbrs[u] & placed), deg[u], -u))
            order.append(nxt)
            placed.add(nxt)
    return order


class _CopySearch:
    """Backtracking over injections of a pattern into a host graph.

    With ``adjacency`` given the search only looks for any embedding whose
    edges are host edges; otherwise it maximises weight with a
    branch-and-bound cut.
    """

    def __init__(self, p: GraphPattern, n: int, w: np.ndarray | None, adjacency=None):
        self.p = p
        self.n = n
        self.w = w
        self.adj = adjacency
        self.order = _search_order(p)
        pos = {u: k for k, u in enumerate(self.order)}
        self.back = [[] for _ in range(p.v)]
        for a, b in p.edges:
            if pos[a] < pos[b]:
                self.back[pos[b]].append(pos[a])
            else:
                self.back[pos[a]].append(pos[b])
        self.autos = [perm for perm in automorphisms(p) if perm != tuple(range(p.v))]
        remaining = np.cumsum([len(b) for b in self.back][::-1])[::-1]
        self.edges_after = list(remaining[1:]) + [0]
        if w is not None:
            iu = np.triu_indices(n, 1)
            top = np.sort(w[iu])[::-1]
            self.top_prefix = np.concatenate([[0.0], np.cumsum(top)])
        self.best = -math.inf
        self.best_map = None

    def _canonical(self, host_of_pos) -> bool:
        phi = [0] * self.p.v
        for k, u in enumerate(self.order):
            phi[u] = host_of_pos[k]
        phi = tuple(phi)
        return all(phi <= tuple(phi[s] for s in sigma) for sigma in self.autos)

    def run(self, stop_at_first=False):
        self.stop_at_first = stop_at_first
        self._done = False
        self._extend([], 0.0, set())
        return self.best_map

    def _extend(self, host, partial, used):
        k = len(host)
        if k == self.p.v:
            if not self._canonical(host):
                return
            if self.adj is not None or partial > self.best:
                self.best = partial
                phi = [0] * self.p.v
                for kk, u in enumerate(self.order):
                    phi[u] = host[kk]
                self.best_map = tuple(phi)
                if self.stop_at_first:
                    self._done = True
            return
        back = self.back[k]
        if self.adj is not None:
            if back:
                pool = set(self.adj[host[back[0]]])
                for b in back[1:]:
                    pool &= self.adj[host[b]]
                candidates = sorted(pool - used)
            else:
                candidates = [x for x in range(self.n) if x not in used]
            for x in candidates:
                host.append(x)
                used.add(x)
                self._extend(host, 0.0, used)
                used.discard(x)
                host.pop()
                if self._done:
                    return
            return
        w = self.w
        rest = self.edges_after[k]
        for x in range(self.n):
            if x in used:
                continue
            gain = partial
            for b in back:
                gain += w[host[b], x]
            if gain + self.top_prefix[rest] <= self.best:
                continue
            host.append(x)
            used.add(x)
            self._extend(host, gain, used)
            used.discard(x)
            host.pop()


def _check_copy_size(p: GraphPattern, n: int):
    if p.v > COPY_MAX_V:
        raise PatternTooLarge(f"copy search limited to patterns with v <= {COPY_MAX_V}")
    if n > COPY_MAX_N:
        raise InstanceTooLarge(f"copy search limited to n <= {COPY_MAX_N}")
    if p.v > n:
        raise InvalidParameter("pattern has more vertices than the host")


def max_copy(inst: WeightedInstance, p: GraphPattern) -> Solution:
    """Heaviest copy of ``p`` in K_n, by branch and bound over injections.

    Each copy is visited once: only the lexicographically smallest injection
    in its automorphism orbit is accepted.
    """
    _require(inst, "complete")
    _check_copy_size(p, inst.n)
    search = _CopySearch(p, inst.n, inst.matrix(diagonal=0.0))
    phi = search.run()
    edges = tuple(sorted((min(phi[a], phi[b]), max(phi[a], phi[b])) for a, b in p.edges))
    return Solution(FamilyKind.COPY, edges, _total(inst, edges), phi)


def find_embedding(adjacency: list[set], n: int, p: GraphPattern):
    """Any injection of ``p`` into the host graph, or None."""
    _check_copy_size(p, n)
    return _CopySearch(p, n, None, adjacency).run(stop_at_first=True)


# -- dispatch --------------------------------------------------------------

def check_solvable(f: StructureFamily, cap: int = HELD_KARP_CAP):
    """Raise before any work if the exact solver cannot handle ``f``."""
    if f.kind in (FamilyKind.HAMCYCLE, FamilyKind.PATH) and f.n > cap:
        raise InstanceTooLarge(f"{f.kind.value}: exact DP limited to n <= {cap}, got n={f.n}")
    if f.kind is FamilyKind.HAMCYCLE and f.n < 3:
        raise InvalidParameter("Hamilton cycles need n >= 3")
    if f.kind is FamilyKind.COPY:
        _check_copy_size(f.pattern, f.n)


def solve(f: StructureFamily, inst: WeightedInstance, cap: int = HELD_KARP_CAP) -> Solution:
    if inst.n != f.n:
        raise InvalidParameter(f"instance has n={inst.n}, family has n={f.n}")
    k = f.kind
    if k is FamilyKind.MATCHING:
        return max_matching(inst)
    if k is FamilyKind.TREE:
        return max_spanning_tree(inst)
    if k is FamilyKind.HAMCYCLE:
        return max_hamilton_cycle(inst, cap)
    if k is FamilyKind.PATH:
        return max_path_1_2(inst, cap)
    return max_copy(inst, f.pattern)


def solve_min(f: StructureFamily, inst: WeightedInstance, cap: int = HELD_KARP_CAP) -> Solution:
    """Minimum-weight structure, as the maximum on negated weights."""
    sol = solve(f, inst.negated(), cap)
    return replace(sol, weight=-sol.weight)


# -- oracle ------------------------------------------------------------------

def _prufer_edges(seq, n):
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    return edges


def brute_force(f: StructureFamily, inst: WeightedInstance) -> float:
    """Maximum weight by exhaustive enumeration of C_n (tiny n only)."""
    n, k = inst.n, f.kind
    limit = 7 if k is FamilyKind.MATCHING else 8
    if n > limit:
        raise InstanceTooLarge(f"brute force limited to n <= {limit} for {k.value}")
    m = inst.matrix(diagonal=0.0)
    if k is FamilyKind.MATCHING:
        return max(math.fsum(m[i, perm[i]] for i in range(n)) for perm in itertools.permutations(range(n)))
    if k is FamilyKind.TREE:
        if n == 1:
            return 0.0
        if n == 2:
            return float(m[0, 1])
        return max(math.fsum(m[a, b] for a, b in _prufer_edges(seq, n))
                   for seq in itertools.product(range(n), repeat=n - 2))
    if k is FamilyKind.HAMCYCLE:
        best = -math.inf
        for rest in itertools.permutations(range(1, n)):
            if rest[0] > rest[-1]:
                continue
            cyc = (0,) + rest
            best = max(best, math.fsum(m[cyc[i], cyc[(i + 1) % n]] for i in range(n)))
        return best
    if k is FamilyKind.PATH:
        best = m[0, 1]
        inner = range(2, n)
        for length in range(1, n - 1):
            for mid in itertools.permutations(inner, length):
                seq = (0,) + mid + (1,)
                best = max(best, math.fsum(m[a, b] for a, b in zip(seq, seq[1:])))
        return float(best)
    p = f.pattern
    if p.v > 4:
        raise PatternTooLarge("brute force limited to patterns with v <= 4")
    return max(math.fsum(m[phi[a], phi[b]] for a, b in p.edges)
               for phi in itertools.permutations(range(n), p.v))


# -- validation ----------------------------------------------------------------

def _connected(n, edges):
    nbrs = [[] for _ in range(n)]
    for a, b in edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        for y in nbrs[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


def validate(f: StructureFamily, inst: WeightedInstance, sol: Solution, tol: float = 0.0) -> None:
    """Raise AssertionError unless ``sol`` is a member of C_n with the
    weight it claims."""
    n = f.n
    edges = list(sol.edges)
    k = f.kind
    if k is FamilyKind.MATCHING:
        assert len(edges) == n, "matching must have n edges"
        assert sorted(a for a, _ in edges) == list(range(n)), "every row matched once"
        assert sorted(b for _, b in edges) == list(range(n)), "every column matched once"
    else:
        assert all(0 <= a < n and 0 <= b < n and a != b for a, b in edges), "edges inside K_n"
        norm = [(min(a, b), max(a, b)) for a, b in edges]
        assert len(set(norm)) == len(norm), "no repeated edges"
        deg = [0] * n
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        if k is FamilyKind.TREE:
            assert len(edges) == n - 1 and _connected(n, edges), "spanning tree"
        elif k is FamilyKind.HAMCYCLE:
            assert len(edges) == n and all(x == 2 for x in deg) and _connected(n, edges), "Hamilton cycle"
        elif k is FamilyKind.PATH:
            touched = [x for x in range(n) if deg[x] > 0]
            assert deg[0] == 1 and deg[1] == 1, "path ends at vertices 0 and 1"
            assert all(deg[x] == 2 for x in touched if x > 1), "simple path"
            sub = {x: i for i, x in enumerate(touched)}
            assert len(edges) == len(touched) - 1 and _connected(
                len(touched), [(sub[a], sub[b]) for a, b in edges]), "connected path"
        else:
            phi = sol.vertices
            assert phi is not None and len(set(phi)) == f.pattern.v, "injective embedding"
            image = sorted((min(phi[a], phi[b]), max(phi[a], phi[b])) for a, b in f.pattern.edges)
            assert image == sorted(norm), "edges are the pattern's image"
    recomputed = _total(inst, edges)
    assert abs(recomputed - sol.weight) <= tol, f"weight {sol.weight} != recomputed {recomputed}"
