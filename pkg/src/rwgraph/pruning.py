"""Lower-bound certificates from threshold graphs.

Keep only the edges heavier than ``level = (1 - delta) * x_n``.  The
survivors form a binomial random graph, and any structure found inside it
weighs more than ``size * level``.  A certificate carries the structure it
found; without one no bound is claimed.
"""
from __future__ import annotations

import functools
import math
import random
from collections import deque
from dataclasses import dataclass

import numpy as np

from .dist import Distribution
from .errors import DomainError, InvalidParameter
from .ratefn import RateFunction, threshold_xn
from .solvers import HELD_KARP_CAP, WeightedInstance, _kernels, find_embedding
from .structures import FamilyKind, StructureFamily

__all__ = [
    "ThresholdGraph",
    "Certificate",
    "threshold_graph",
    "hopcroft_matching",
    "certify_lower_bound",
    "threshold_parameters",
    "default_delta",
]


@dataclass(frozen=True)
class ThresholdGraph:
    """Edges strictly above ``level``.

    For bipartite instances ``adj[i]`` lists the columns of row i;
    otherwise it is the symmetric neighbour list of K_n.
    """

    n: int
    bipartite: bool
    level: float
    adj: tuple[tuple[int, ...], ...]
    edge_count: int


@dataclass(frozen=True)
class Certificate:
    family: str
    level: float
    edges: tuple[tuple[int, int], ...] | None
    certified_bound: float | None
    threshold_edges: int
    edge_probability: float

    @property
    def found(self) -> bool:
        return self.edges is not None

    @property
    def length(self) -> int | None:
        return None if self.edges is None else len(self.edges)


def threshold_graph(inst: WeightedInstance, level: float) -> ThresholdGraph:
    if inst.shape == "bipartite":
        keep = inst.weights > level
        adj = tuple(tuple(int(c) for c in np.flatnonzero(row)) for row in keep)
        return ThresholdGraph(inst.n, True, level, adj, int(keep.sum()))
    keep = inst.matrix(diagonal=-np.inf) > level
    adj = tuple(tuple(int(c) for c in np.flatnonzero(row)) for row in keep)
    return ThresholdGraph(inst.n, False, level, adj, int(keep.sum()) // 2)


def hopcroft_matching(adj, n_right: int | None = None) -> list[int]:
    """Maximum bipartite matching (Hopcroft-Karp).

    ``adj[u]`` lists right vertices of left vertex u.  Returns ``match``
    with ``match[u]`` the partner of u or -1; perfect iff no -1 remains
    and both sides have the same size.
    """
    n_left = len(adj)
    if n_right is None:
        n_right = n_left
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    INF = n_left + 1

    def bfs():
        dist = [INF] * n_left
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found, dist

    def dfs(u, dist):
        # iterative augmenting search along the BFS layering
        stack = [(u, iter(adj[u]))]
        trail = []
        while stack:
            x, it = stack[-1]
            advanced = False
            for v in it:
                w = match_r[v]
                if w == -1:
                    trail.append((x, v))
                    for a, b in trail:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[x] + 1:
                    trail.append((x, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[x] = INF
                stack.pop()
                if trail:
                    trail.pop()
        return False

    while True:
        found, dist = bfs()
        if not found:
            break
        for u in range(n_left):
            if match_l[u] == -1:
                dfs(u, dist)
    return match_l


def _spanning_tree(adj, n):
    seen = [False] * n
    seen[0] = True
    stack = [0]
    edges = []
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                edges.append((min(x, y), max(x, y)))
                stack.append(y)
    return edges if len(edges) == n - 1 else None


def _dp_matrix(adj, n, value=0.0):
    m = np.full((n, n), -np.inf)
    for x, nbrs in enumerate(adj):
        for y in nbrs:
            m[x, y] = value
    return m


def _hamilton_exact(adj, n):
    best, order = _kernels.held_karp_max(_dp_matrix(adj, n))
    return None if best == -np.inf else [int(x) for x in order]


def _longest_path_exact(adj, n):
    best, seq = _kernels.path_dp_max(_dp_matrix(adj, n, 1.0))
    return None if best == -np.inf else [int(x) for x in seq]


def _rotation_extension(adj, n, restarts, start=None, end_at=None, rng_seed=0):
    """Posa rotation-extension search.

    Looks for a Hamilton cycle, or with ``end_at`` for a Hamilton path from
    ``start`` to ``end_at``.  Returns the vertex order or None; a miss says
    nothing about Hamiltonicity.
    """
    nbr_sets = [set(a) for a in adj]
    if end_at is None and any(len(a) < 2 for a in adj):
        return None
    if any(len(a) == 0 for a in adj):
        return None
    rng = random.Random(rng_seed)
    budget = 20 * n
    for _ in range(restarts):
        path = [start if start is not None else rng.randrange(n)]
        where = {path[0]: 0}
        for _ in range(budget):
            end = path[-1]
            fresh = [y for y in adj[end] if y not in where and (y != end_at or len(path) == n - 1)]
            if fresh:
                y = rng.choice(fresh)
                where[y] = len(path)
                path.append(y)
                continue
            if len(path) == n:
                if end_at is None and path[0] in nbr_sets[end]:
                    return path
                if end_at is not None and end == end_at:
                    return path
            # rotate: pick a neighbour y = path[i] of end, reverse the tail after it
            pivots = [where[y] for y in adj[end] if y in where and where[y] < len(path) - 2]
            if not pivots:
                break
            i = rng.choice(pivots)
            path[i + 1:] = path[i + 1:][::-1]
            for k in range(i + 1, len(path)):
                where[path[k]] = k
    return None


def _hamilton_path_heuristic(adj, n, restarts):
    return _rotation_extension(adj, n, restarts, start=0, end_at=1)


def _shortest_path(adj, a, b):
    prev = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            out = [b]
            while prev[out[-1]] is not None:
                out.append(prev[out[-1]])
            return out[::-1]
        for y in adj[x]:
            if y not in prev:
                prev[y] = x
                queue.append(y)
    return None


def threshold_parameters(f: StructureFamily) -> tuple[float, float]:
    """(alpha, omega) used to define x_n for the family."""
    logn = math.log(f.n)
    if f.kind is FamilyKind.COPY:
        return 1.0 / float(f.pattern.density), max(1.0, logn)
    return 1.0, 2.0 * logn


@functools.lru_cache(maxsize=256)
def _cached_xn(d, alpha, omega, n):
    return threshold_xn(d, alpha, omega, n)


def default_delta(n: int) -> float:
    return 1.0 / math.log(n)


def certify_lower_bound(f: StructureFamily, inst: WeightedInstance, delta: float,
                        d: Distribution, rate: RateFunction | None = None,
                        cap: int = HELD_KARP_CAP) -> Certificate:
    """Search the threshold graph at ``(1 - delta) * x_n`` for a member of C_n.

    Hamilton cycles and 0-1 paths are searched exactly up to ``cap`` and
    heuristically beyond it (50 n restarts of rotation-extension); when the
    path heuristic misses, the shortest 0-1 path of the threshold graph is
    certified instead.
    """
    if not (0.0 <= delta < 1.0):
        raise InvalidParameter(f"delta must lie in [0, 1), got {delta}")
    if inst.n != f.n or inst.shape != ("bipartite" if f.bipartite else "complete"):
        raise InvalidParameter("instance does not match the family")
    n = f.n
    alpha, omega = threshold_parameters(f)
    xn = threshold_xn(d, alpha, omega, n, rate=rate) if rate is not None else _cached_xn(d, alpha, omega, n)
    level = (1.0 - delta) * xn
    g = threshold_graph(inst, level)
    structure = None
    k = f.kind
    if k is FamilyKind.MATCHING:
        match = hopcroft_matching(g.adj, n)
        if all(c >= 0 for c in match):
            structure = [(i, c) for i, c in enumerate(match)]
    elif k is FamilyKind.TREE:
        structure = _spanning_tree(g.adj, n)
    elif k is FamilyKind.HAMCYCLE:
        if n < 3:
            raise InvalidParameter("Hamilton cycles need n >= 3")
        order = _hamilton_exact(g.adj, n) if n <= cap else _rotation_extension(g.adj, n, 50 * n)
        if order is not None:
            structure = [(min(a, b), max(a, b)) for a, b in zip(order, order[1:] + order[:1])]
    elif k is FamilyKind.PATH:
        if n <= cap:
            seq = _longest_path_exact(g.adj, n)
        else:
            seq = _hamilton_path_heuristic(g.adj, n, 50 * n) or _shortest_path(g.adj, 0, 1)
        if seq is not None:
            structure = [(min(a, b), max(a, b)) for a, b in zip(seq, seq[1:])]
    else:
        phi = find_embedding([set(a) for a in g.adj], n, f.pattern)
        if phi is not None:
            structure = sorted((min(phi[a], phi[b]), max(phi[a], phi[b])) for a, b in f.pattern.edges)
    p_edge = d.tail(max(level, 0.0))
    if structure is None:
        return Certificate(k.value, level, None, None, g.edge_count, p_edge)
    edges = tuple(structure)
    if any(inst.weight(a, b) <= level for a, b in edges):
        raise DomainError("internal error: certificate edge below the threshold level")
    return Certificate(k.value, level, edges, len(edges) * level, g.edge_count, p_edge)
