"""Shared helpers: canned graphs, networkx bridges, and random proper
partial colorings."""

from __future__ import annotations

import numpy as np
import networkx as nx
import pytest

from aecolor import Graph, build_graph
from aecolor.rng import derive_arr, derive


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(10, outer + spokes + inner)


def to_nx(g: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from((int(u), int(v)) for u, v in g.edges)
    return G


def from_nx(G: nx.Graph) -> Graph:
    idx = {v: i for i, v in enumerate(sorted(G.nodes()))}
    return build_graph(len(idx), [(idx[u], idx[v]) for u, v in G.edges()])


def cycle_edge_ids(g: Graph, vertices) -> list[int]:
    """Edge ids along the closed walk `vertices`."""
    out = []
    k = len(vertices)
    table = {(int(u), int(v)): i for i, (u, v) in enumerate(g.edges)}
    for i in range(k):
        a, b = vertices[i], vertices[(i + 1) % k]
        out.append(table[(min(a, b), max(a, b))])
    return out


def all_cycles_edge_sets(g: Graph) -> list[frozenset]:
    """Every simple cycle as a frozenset of edge ids (independent route via
    networkx enumeration)."""
    G = to_nx(g)
    out = []
    for cyc in nx.simple_cycles(G):
        out.append(frozenset(cycle_edge_ids(g, cyc)))
    return out


def naive_girth(g: Graph):
    """Brute-force girth by full cycle enumeration."""
    sets = all_cycles_edge_sets(g)
    return min((len(s) for s in sets), default=float("inf"))


def random_proper_colorings(g: Graph, n_trials: int, n_colors: int, seed: int) -> np.ndarray:
    """(trials, m) int32 partial colorings, proper by greedy repair: each raw
    assignment is kept only if no earlier-kept adjacent edge carries it."""
    m = g.m
    if m == 0:
        return np.full((n_trials, 0), -1, np.int32)
    h = derive_arr(seed, np.arange(n_trials, dtype=np.uint64).reshape(-1, 1),
                   np.arange(m, dtype=np.uint64).reshape(1, -1))
    uncol = (h >> np.uint64(8)) % np.uint64(3) == 0
    raw = (h % np.uint64(n_colors)).astype(np.int32)
    raw[uncol] = -1
    adj_earlier = [[] for _ in range(m)]
    for v in range(g.n):
        ids = sorted(int(e) for e in g.incident_edges(v))
        for i, e in enumerate(ids):
            adj_earlier[e].extend(ids[:i])
    out = raw.copy()
    for e in range(m):
        if not adj_earlier[e]:
            continue
        clash = np.zeros(n_trials, dtype=bool)
        for e2 in adj_earlier[e]:
            clash |= (out[:, e2] == out[:, e]) & (out[:, e2] >= 0)
        out[clash, e] = -1
    return out


def naive_bicolored_sets(g: Graph, colors: np.ndarray, cycles: list[frozenset]) -> list[frozenset]:
    """Oracle: a cycle is bicolored iff fully colored with exactly 2 colors."""
    hits = []
    for cyc in cycles:
        vals = {int(colors[e]) for e in cyc}
        if -1 not in vals and len(vals) == 2:
            hits.append(cyc)
    return hits


@pytest.fixture(scope="session")
def atlas_connected():
    from networkx.generators.atlas import graph_atlas_g

    out = []
    for G in graph_atlas_g():
        if G.number_of_nodes() >= 1 and nx.is_connected(G):
            out.append(from_nx(G))
    return out
