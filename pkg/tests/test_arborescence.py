import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cce_learning.arborescence import (
    INF,
    is_strongly_connected,
    min_in_arborescence_cost,
    min_out_arborescence_cost,
    shortest_path_closure,
)


def brute_in_arborescence(W, root):
    """Try every successor function and keep those in which all paths reach root."""
    n = W.shape[0]
    others = [v for v in range(n) if v != root]
    best = None
    for succ in itertools.product(range(n), repeat=len(others)):
        nxt = dict(zip(others, succ))
        if any(v == s or W[v, s] >= INF for v, s in nxt.items()):
            continue
        ok = True
        for v in others:
            seen, u = set(), v
            while u != root:
                if u in seen:
                    ok = False
                    break
                seen.add(u)
                u = nxt[u]
            if not ok:
                break
        if ok:
            cost = sum(int(W[v, s]) for v, s in nxt.items())
            best = cost if best is None else min(best, cost)
    return best


def networkx_in_arborescence(W, root):
    g = nx.DiGraph()
    n = W.shape[0]
    g.add_nodes_from(range(n))
    for u in range(n):
        for v in range(n):
            # reversed edge, and nothing may enter the root of the out-tree
            if u != v and W[u, v] < INF and u != root:
                g.add_edge(v, u, weight=int(W[u, v]))
    tree = nx.minimum_spanning_arborescence(g, attr="weight")
    return int(sum(d["weight"] for _, _, d in tree.edges(data=True)))


def dense(draw_weights, n):
    W = np.array(draw_weights, dtype=np.int64).reshape(n, n)
    np.fill_diagonal(W, INF)
    return W


def test_single_node():
    W = np.array([[INF]], dtype=np.int64)
    assert min_in_arborescence_cost(W, 0) == 0
    assert is_strongly_connected(W)


def test_two_nodes():
    W = np.array([[INF, 1], [3, INF]], dtype=np.int64)
    # gamma(A) pays B -> A, gamma(B) pays A -> B
    assert min_in_arborescence_cost(W, 0) == 3
    assert min_in_arborescence_cost(W, 1) == 1


def test_cycle_contraction():
    # cheapest in-edges form a cycle 1 <-> 2 that must be broken
    W = np.full((3, 3), INF, dtype=np.int64)
    W[0, 1], W[0, 2] = 10, 12
    W[1, 2], W[2, 1] = 1, 1
    assert min_out_arborescence_cost(W, 0) == 11


def test_unreachable():
    W = np.array([[INF, INF], [1, INF]], dtype=np.int64)
    with pytest.raises(ValueError):
        min_out_arborescence_cost(W, 0)
    assert not is_strongly_connected(W)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, 9), min_size=n * n, max_size=n * n))))
def test_matches_brute_force(args):
    n, weights = args
    W = dense(weights, n)
    for root in range(n):
        assert min_in_arborescence_cost(W, root) == brute_in_arborescence(W, root)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, 50), min_size=n * n, max_size=n * n))))
def test_matches_networkx(args):
    n, weights = args
    W = dense(weights, n)
    for root in range(n):
        assert min_in_arborescence_cost(W, root) == networkx_in_arborescence(W, root)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, 9), min_size=n * n, max_size=n * n))))
def test_closure_matches_networkx(args):
    n, weights = args
    W = dense(weights, n)
    W[W == 0] = INF  # treat zeros as missing edges
    closed = shortest_path_closure(W)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for u in range(n):
        for v in range(n):
            if u != v and W[u, v] < INF:
                g.add_edge(u, v, weight=int(W[u, v]))
    dist = dict(nx.all_pairs_dijkstra_path_length(g))
    for u in range(n):
        for v in range(n):
            if u == v:
                assert closed[u, v] == INF
            else:
                assert closed[u, v] == dist[u].get(v, INF)


def test_closure_overflow_guard():
    W = np.array([[INF, INF - 1], [1, INF]], dtype=np.int64)
    with pytest.raises(OverflowError):
        shortest_path_closure(W)
