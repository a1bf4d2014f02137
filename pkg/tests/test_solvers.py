import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment

from rwgraph.errors import InstanceTooLarge, InvalidParameter
from rwgraph.solvers import (HELD_KARP_CAP, WeightedInstance, brute_force, max_copy,
                             max_hamilton_cycle, max_matching, max_path_1_2, max_spanning_tree,
                             pair_index, solve, solve_min, validate)
from rwgraph.structures import NAMED_PATTERNS, FamilyKind, StructureFamily


def _complete(rng, n, integer=False):
    w = rng.integers(-5, 6, n * (n - 1) // 2) if integer else rng.standard_normal(n * (n - 1) // 2)
    return WeightedInstance.complete(n, w)


def _bipartite(rng, n, integer=False):
    m = rng.integers(-5, 6, (n, n)) if integer else rng.standard_normal((n, n))
    return WeightedInstance.bipartite(m)


def _nx_graph(inst):
    g = nx.Graph()
    for (i, j), w in zip(zip(*inst.pairs()), inst.weights):
        g.add_edge(int(i), int(j), weight=float(w))
    return g


def _enumerate_cycles(inst):
    n = inst.n
    best = -math.inf
    for perm in itertools.permutations(range(1, n)):
        cyc = (0,) + perm
        best = max(best, math.fsum(inst.weight(cyc[i], cyc[(i + 1) % n]) for i in range(n)))
    return best


def _enumerate_paths(inst):
    return max(math.fsum(inst.weight(a, b) for a, b in zip(p, p[1:]))
               for p in nx.all_simple_paths(nx.complete_graph(inst.n), 0, 1))


def test_pair_index_is_lexicographic():
    n = 7
    pairs = list(itertools.combinations(range(n), 2))
    assert [pair_index(i, j, n) for i, j in pairs] == list(range(len(pairs)))
    assert pair_index(4, 2, n) == pair_index(2, 4, n)


def test_instance_shape_checked_and_read_only():
    with pytest.raises(InvalidParameter):
        WeightedInstance.complete(4, np.zeros(5))
    inst = WeightedInstance.bipartite(np.eye(3))
    with pytest.raises(ValueError):
        inst.weights[0, 0] = 5.0
    m = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float)
    assert WeightedInstance.complete_from_matrix(m).weight(2, 1) == 3.0


def test_matching_examples():
    sol = max_matching(WeightedInstance.bipartite([[1, 5], [2, 3]]))
    assert sol.edges == ((0, 1), (1, 0)) and sol.weight == 7.0
    zero = max_matching(WeightedInstance.bipartite(np.zeros((5, 5))))
    assert zero.edges == tuple((i, i) for i in range(5)) and zero.weight == 0.0


def test_triangle_copy_in_k4():
    inst = WeightedInstance.complete(4, [1, 1, 1, 10, 10, 10])  # pairs 01 02 03 12 13 23
    sol = max_copy(inst, NAMED_PATTERNS["triangle"])
    assert sol.weight == 30.0
    assert sorted(sol.edges) == [(1, 2), (1, 3), (2, 3)]


@pytest.mark.parametrize("seed", range(40))
def test_matching_against_permutations(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    inst = _bipartite(rng, n)
    oracle = max(math.fsum(inst.weight(i, p[i]) for i in range(n)) for p in itertools.permutations(range(n)))
    sol = max_matching(inst)
    validate(StructureFamily.matching(n), inst, sol)
    assert sol.weight == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("seed", range(40))
def test_matching_tie_break_is_lexicographic(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 6))
    inst = WeightedInstance.bipartite(rng.integers(0, 2, (n, n)))
    scored = [(sum(inst.weight(i, p[i]) for i in range(n)), p) for p in itertools.permutations(range(n))]
    best = max(s for s, _ in scored)
    lexmin = min(p for s, p in scored if s == best)
    sol = max_matching(inst)
    assert tuple(c for _, c in sol.edges) == lexmin


@pytest.mark.parametrize("n", [50, 200])
def test_matching_against_scipy(n):
    rng = np.random.default_rng(n)
    inst = _bipartite(rng, n)
    rows, cols = linear_sum_assignment(inst.weights, maximize=True)
    assert max_matching(inst).weight == pytest.approx(inst.weights[rows, cols].sum(), abs=1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_spanning_tree_against_networkx(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    inst = _complete(rng, n)
    t = nx.maximum_spanning_tree(_nx_graph(inst))
    oracle = math.fsum(d["weight"] for _, _, d in t.edges(data=True))
    sol = max_spanning_tree(inst)
    validate(StructureFamily.tree(n), inst, sol)
    assert sol.weight == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("seed", range(25))
def test_hamilton_cycle_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 8))
    inst = _complete(rng, n)
    sol = max_hamilton_cycle(inst)
    validate(StructureFamily.hamcycle(n), inst, sol)
    assert sol.weight == pytest.approx(_enumerate_cycles(inst), abs=1e-9)
    assert sol.vertices[0] == 0 and sol.vertices[1] < sol.vertices[-1]


@pytest.mark.parametrize("seed", range(25))
def test_path_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    inst = _complete(rng, n)
    sol = max_path_1_2(inst)
    validate(StructureFamily.path(n), inst, sol)
    assert sol.weight == pytest.approx(_enumerate_paths(inst), abs=1e-9)
    assert sol.vertices[0] == 0 and sol.vertices[-1] == 1


@pytest.mark.parametrize("name", ["edge", "triangle", "c4", "k4"])
@pytest.mark.parametrize("seed", range(6))
def test_copy_against_networkx_monomorphisms(name, seed):
    rng = np.random.default_rng(seed)
    p = NAMED_PATTERNS[name]
    n = int(rng.integers(p.v, 8))
    inst = _complete(rng, n)
    h = nx.Graph(list(p.edges))
    best = -math.inf
    for m in nx.algorithms.isomorphism.GraphMatcher(nx.complete_graph(n), h).subgraph_monomorphisms_iter():
        inv = {b: a for a, b in m.items()}
        best = max(best, math.fsum(inst.weight(inv[a], inv[b]) for a, b in p.edges))
    f = StructureFamily.copy(p, n)
    sol = max_copy(inst, p)
    validate(f, inst, sol)
    assert sol.weight == pytest.approx(best, abs=1e-9)


FAMILIES = [
    lambda n: StructureFamily.matching(n),
    lambda n: StructureFamily.tree(n),
    lambda n: StructureFamily.hamcycle(max(n, 3)),
    lambda n: StructureFamily.path(n),
    lambda n: StructureFamily.copy(NAMED_PATTERNS["triangle"], max(n, 3)),
]


def _instance_for(f, rng, integer=False):
    return _bipartite(rng, f.n, integer) if f.bipartite else _complete(rng, f.n, integer)


@pytest.mark.parametrize("make", FAMILIES)
@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1), integer=st.booleans())
def test_solver_matches_brute_force(make, n, seed, integer):
    f = make(n)
    inst = _instance_for(f, np.random.default_rng(seed), integer)
    sol = solve(f, inst)
    validate(f, inst, sol)
    assert sol.weight == pytest.approx(brute_force(f, inst), abs=1e-9)


@pytest.mark.parametrize("make", FAMILIES)
@settings(max_examples=15, deadline=None)
@given(n=st.integers(3, 6), seed=st.integers(0, 2**32 - 1))
def test_negation_gives_minimum(make, n, seed):
    f = make(n)
    inst = _instance_for(f, np.random.default_rng(seed))
    low = solve_min(f, inst)
    assert low.weight == -solve(f, inst.negated()).weight
    assert low.weight <= solve(f, inst).weight


@pytest.mark.parametrize("make", FAMILIES[:3] + FAMILIES[4:])
@settings(max_examples=15, deadline=None)
@given(n=st.integers(3, 6), seed=st.integers(0, 2**32 - 1), c=st.integers(-20, 20))
def test_shift_moves_optimum_by_edge_count(make, n, seed, c):
    f = make(n)
    inst = _instance_for(f, np.random.default_rng(seed))
    shifted = solve(f, inst.shifted(float(c)))
    assert shifted.weight == pytest.approx(solve(f, inst).weight + c * f.structure_edges, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-100, 100, allow_nan=False)))
def test_matching_on_arbitrary_matrices(m):
    inst = WeightedInstance.bipartite(m)
    rows, cols = linear_sum_assignment(m, maximize=True)
    assert max_matching(inst).weight == pytest.approx(m[rows, cols].sum(), abs=1e-9)


def test_size_guards():
    with pytest.raises(InstanceTooLarge):
        solve(StructureFamily.hamcycle(HELD_KARP_CAP + 1), WeightedInstance.complete(21, np.zeros(210)))
    with pytest.raises(InstanceTooLarge):
        brute_force(StructureFamily.matching(8), WeightedInstance.bipartite(np.zeros((8, 8))))
    with pytest.raises(InvalidParameter):
        max_matching(WeightedInstance.complete(4, np.zeros(6)))
    with pytest.raises(InvalidParameter):
        solve(StructureFamily.tree(5), WeightedInstance.complete(4, np.zeros(6)))


def test_held_karp_at_cap():
    rng = np.random.default_rng(7)
    inst = _complete(rng, HELD_KARP_CAP)
    sol = max_hamilton_cycle(inst)
    validate(StructureFamily.hamcycle(HELD_KARP_CAP), inst, sol)


def test_validate_rejects_wrong_weight():
    inst = WeightedInstance.bipartite([[1, 5], [2, 3]])
    sol = max_matching(inst)
    bad = type(sol)(sol.kind, sol.edges, sol.weight + 1.0)
    with pytest.raises(AssertionError):
        validate(StructureFamily.matching(2), inst, bad)
    assert sol.kind is FamilyKind.MATCHING
