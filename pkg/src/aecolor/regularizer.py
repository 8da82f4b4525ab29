"""Embedding a bounded-degree graph into a regular supergraph of the same
girth: disjoint copies of the input indexed by an auxiliary bipartite regular
graph, with cross edges added at deficient vertices along matching color
classes.

One step raises the minimum degree by one while preserving maximum degree and
girth (down to the girth target); at most Delta steps reach regularity. The
vertex count multiplies by |V(H)| per step, so a size budget guards the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .coloring import EdgeColoring
from .errors import EmbedError
from .graphs import GIRTH_UNBOUNDED, Graph, _sidon_set, build_graph, generate_high_girth_regular, girth
from .rng import TAG_GEN, derive


def power_coloring(g: Graph, r: int) -> np.ndarray:
    """Greedy proper coloring of the r-th power of g (vertices adjacent when
    within distance r)."""
    if r < 1:
        raise EmbedError("power must be >= 1")
    colors = np.full(g.n, -1, dtype=np.int64)
    for v in range(g.n):
        # BFS ball of radius r
        dist = {v: 0}
        frontier = [v]
        banned = set()
        for _ in range(r):
            nxt = []
            for x in frontier:
                for y in g.neighbors(x):
                    y = int(y)
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
                        if colors[y] >= 0:
                            banned.add(int(colors[y]))
            frontier = nxt
        c = 0
        while c in banned:
            c += 1
        colors[v] = c
    used = int(colors.max()) + 1 if g.n else 0
    delta = g.max_degree
    if delta >= 2:
        assert used <= delta**r, f"greedy used {used} > Delta^r = {delta ** r}"
    return colors


def bipartition(g: Graph) -> tuple[np.ndarray, np.ndarray] | None:
    """(left, right) vertex arrays if g is bipartite, else None."""
    side = np.full(g.n, -1, dtype=np.int8)
    for s in range(g.n):
        if side[s] != -1:
            continue
        side[s] = 0
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.neighbors(x):
                y = int(y)
                if side[y] == -1:
                    side[y] = 1 - side[x]
                    stack.append(y)
                elif side[y] == side[x]:
                    return None
    return np.nonzero(side == 0)[0], np.nonzero(side == 1)[0]


def bipartite_regular_edge_coloring(h: Graph) -> EdgeColoring:
    """Proper edge coloring of a d-regular bipartite graph with exactly d
    colors: repeated perfect-matching extraction. Every color class touches
    every vertex exactly once (asserted)."""
    parts = bipartition(h)
    if parts is None:
        raise EmbedError("graph is not bipartite")
    d = h.max_degree
    if h.min_degree != d:
        raise EmbedError(f"graph is not regular (degrees {h.min_degree}..{d})")
    left, right = parts
    if d == 0:
        return EdgeColoring(0, np.empty(0, dtype=np.int32))
    if len(left) != len(right):
        raise EmbedError("regular bipartite graph must have equal sides")
    lpos = {int(v): i for i, v in enumerate(left)}
    rpos = {int(v): i for i, v in enumerate(right)}
    eid_of = {}
    for k, (u, v) in enumerate(h.edges):
        u, v = int(u), int(v)
        if u in lpos:
            eid_of[(lpos[u], rpos[v])] = k
        else:
            eid_of[(lpos[v], rpos[u])] = k
    alive = np.ones(h.m, dtype=bool)
    out = np.full(h.m, -1, dtype=np.int32)
    nl = len(left)
    for color in range(d):
        rows, cols = [], []
        for (i, j), k in eid_of.items():
            if alive[k]:
                rows.append(i)
                cols.append(j)
        bi = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(nl, nl))
        match = maximum_bipartite_matching(bi, perm_type="column")
        if (match < 0).any():
            raise EmbedError(f"no perfect matching at round {color} (graph not regular bipartite?)")
        for i in range(nl):
            k = eid_of[(i, int(match[i]))]
            assert alive[k]
            alive[k] = False
            out[k] = color
    chi = EdgeColoring(d, out)
    # every color incident to every vertex
    seen = np.zeros((h.n, d), dtype=bool)
    for k, (u, v) in enumerate(h.edges):
        c = int(out[k])
        assert not seen[u, c] and not seen[v, c]
        seen[u, c] = seen[v, c] = True
    assert seen.all()
    return chi


def _bipartite_high_girth(d: int, g_min: int, seed: int) -> Graph:
    """Bipartite d-regular graph with girth >= g_min (auxiliary index graph)."""
    if g_min <= 4:
        h = max(d + 1, 2 * d)
        left = np.arange(h, dtype=np.int64)
        edges = []
        for off in range(d):
            edges.extend((int(x), int(h + (x + off) % h)) for x in left)
        return build_graph(2 * h, edges)
    if g_min <= 6:
        h = max(2 * d, 8)
        for _ in range(24):
            s = _sidon_set(h, d, derive(seed, TAG_GEN, 0xB1B, h))
            if s is not None:
                left = np.arange(h, dtype=np.int64)
                edges = []
                for off in s:
                    edges.extend((int(x), int(h + (x + int(off)) % h)) for x in left)
                g = build_graph(2 * h, edges)
                if girth(g) >= g_min:
                    return g
            h = int(h * 3 // 2) + 1
        raise EmbedError(f"no C4-free circulant found for d={d}")
    # double cover of a high-girth regular graph kills odd cycles
    n0 = 4 * (d - 1) ** (g_min // 2)
    n0 += n0 * d % 2
    base = generate_high_girth_regular(n0, d, g_min, seed)
    edges = []
    for u, v in base.edges:
        edges.append((int(u), int(v) + base.n))
        edges.append((int(v), int(u) + base.n))
    cover = build_graph(2 * base.n, edges)
    if girth(cover) < g_min:
        raise EmbedError("double cover fell short of the girth target")
    return cover


def embed_step(g: Graph, girth_target: int, h: Graph, seed: int) -> Graph:
    """|V(H)| disjoint copies of g; copies u1, u2 of a deficient vertex v are
    joined when u1u2 is an H-edge whose color matches v's power-coloring
    color (H's edge-color classes are permuted by the seed)."""
    delta = g.max_degree
    fg = power_coloring(g, girth_target)
    ncolors = int(fg.max()) + 1 if g.n else 0
    dh = h.max_degree
    if dh < ncolors:
        raise EmbedError(f"H degree {dh} < {ncolors} power-coloring colors")
    if girth(h) < girth_target:
        raise EmbedError(f"H girth {girth(h)} below target {girth_target}")
    fh = bipartite_regular_edge_coloring(h)
    perm = np.arange(dh, dtype=np.int64)
    for i in range(dh - 1, 0, -1):
        j = derive(seed, TAG_GEN, 0xE2B, i) % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]

    n = g.n
    edges = []
    for u in range(h.n):
        base = u * n
        edges.extend((base + int(a), base + int(b)) for a, b in g.edges)
    deficient = np.nonzero(g.degrees < delta)[0]
    want_color = {int(v): int(perm[fg[v]]) for v in deficient}
    for k, (u1, u2) in enumerate(h.edges):
        c = int(fh.colors[k])
        for v, wc in want_color.items():
            if wc == c:
                edges.append((int(u1) * n + v, int(u2) * n + v))
    out = build_graph(h.n * n, edges)

    assert out.max_degree == delta
    if len(deficient):
        assert out.min_degree == g.min_degree + 1
    want_girth = min(girth(g), girth_target)
    got = girth(out)
    assert got >= want_girth, f"embedding girth {got} < {want_girth}"
    return out


@dataclass(frozen=True)
class EmbedResult:
    graph: Graph
    copy0: dict  # original vertex -> vertex of the tracked copy


def embed_regular(g: Graph, girth_target: int, seed: int, budget: int = 10**6) -> EmbedResult:
    """Repeat embed_step until the graph is regular. The vertex count
    multiplies by |V(H)| per step (exponential in the girth target), so the
    projected size is checked against `budget` before each step."""
    current = g
    step = 0
    while current.min_degree < current.max_degree:
        fg = power_coloring(current, girth_target)
        ncolors = int(fg.max()) + 1
        h = _bipartite_high_girth(ncolors, girth_target, derive(seed, step))
        projected = h.n * current.n
        if projected > budget:
            raise EmbedError(
                f"step {step}: projected size {projected} (= |V(H)|={h.n} x n={current.n}) "
                f"exceeds budget {budget}")
        current = embed_step(current, girth_target, h, derive(seed, step, 1))
        step += 1
        if step > g.max_degree:
            raise EmbedError("embedding did not regularize within Delta steps")
    # copy 0 occupies vertex ids 0..n-1 at every step
    copy0 = {i: i for i in range(g.n)}
    sub = {(int(u), int(v)) for u, v in current.edges if u < g.n and v < g.n}
    orig = {(int(u), int(v)) for u, v in g.edges}
    assert sub == orig, "tracked copy is not induced"
    if g.n and girth(g) != GIRTH_UNBOUNDED:
        assert girth(current) >= min(girth(g), girth_target)
    return EmbedResult(graph=current, copy0=copy0)
