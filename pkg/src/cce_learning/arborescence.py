"""Minimum-cost arborescences (Chu-Liu/Edmonds) on dense integer weight matrices.

Weights are exact integers; ``INF`` marks a missing edge. Ties are broken
toward the lowest node index.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

INF = np.int64(2**61)


def is_strongly_connected(weights: np.ndarray) -> bool:
    adj = csr_matrix((np.asarray(weights) < INF).astype(np.int8))
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    return ncomp == 1


def min_out_arborescence_cost(weights: np.ndarray, root: int) -> int:
    """Cost of the cheapest spanning tree with every edge directed away from ``root``.

    ``weights[u, v]`` is the cost of edge ``u -> v``.
    """
    W = np.array(weights, dtype=np.int64, copy=True)
    n = W.shape[0]
    if n == 1:
        return 0
    total = 0
    while True:
        np.fill_diagonal(W, INF)
        W[:, root] = INF
        pre = np.argmin(W, axis=0)
        inw = W[pre, np.arange(n)]
        inw[root] = 0
        pre[root] = root
        if np.any(inw >= INF):
            raise ValueError("some node is unreachable from the root")
        total += int(inw.sum())

        comp = np.full(n, -1, dtype=np.intp)
        seen = np.full(n, -1, dtype=np.intp)
        ncomp = 0
        for v in range(n):
            u = v
            while seen[u] == -1 and u != root:
                seen[u] = v
                u = pre[u]
            if u != root and seen[u] == v and comp[u] == -1:
                w = u
                while True:
                    comp[w] = ncomp
                    w = pre[w]
                    if w == u:
                        break
                ncomp += 1
        if ncomp == 0:
            return total
        for v in range(n):
            if comp[v] == -1:
                comp[v] = ncomp
                ncomp += 1

        reduced = np.where(W < INF, W - inw[None, :], INF)
        contracted = np.full((ncomp, ncomp), INF, dtype=np.int64)
        rows = np.broadcast_to(comp[:, None], (n, n))
        cols = np.broadcast_to(comp[None, :], (n, n))
        np.minimum.at(contracted, (rows, cols), reduced)
        W, root, n = contracted, int(comp[root]), ncomp


def min_in_arborescence_cost(weights: np.ndarray, root: int) -> int:
    """Cost of the cheapest spanning tree in which every node has a path to ``root``."""
    return min_out_arborescence_cost(np.asarray(weights).T, root)


def shortest_path_closure(weights: np.ndarray) -> np.ndarray:
    """All-pairs minimal path costs (Floyd-Warshall); the diagonal is left at INF."""
    W = np.array(weights, dtype=np.int64, copy=True)
    n = W.shape[0]
    finite = W[W < INF]
    if finite.size and int(finite.max()) * n >= INF:
        raise OverflowError("weights too large for exact integer closure")
    for k in range(n):
        W = np.minimum(W, np.minimum(W[:, k : k + 1] + W[k : k + 1, :], INF))
    np.fill_diagonal(W, INF)
    return W
