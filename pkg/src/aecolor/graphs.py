"""Immutable simple graphs, girth, and seeded generators for regular and
high-girth regular instances.

Vertices are dense 0-based ints; each edge gets a stable dense id equal to its
row in the lexicographically sorted edge array (the keyed random streams in
the nibble depend on those ids being stable across save/load).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import NUMBA_ENABLED, kernel
from .errors import GenerationError, GraphFormatError
from .rng import TAG_GEN, derive, derive2_u64, derive3_u64

GIRTH_UNBOUNDED = math.inf


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph in CSR form.

    `edges[k] = (u, v)` with u < v, rows lexicographically sorted; edge id k.
    `nbr[indptr[v]:indptr[v+1]]` lists v's neighbors, `eid` the matching edge
    ids. Arrays are read-only; the object is safe to share across threads.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray
    nbr: np.ndarray
    eid: np.ndarray
    degrees: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min()) if self.n else 0

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr[self.indptr[v] : self.indptr[v + 1]]

    def incident_edges(self, v: int) -> np.ndarray:
        return self.eid[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(np.isin(v, self.neighbors(u)).item())

    def same_edges(self, other: "Graph") -> bool:
        return self.n == other.n and np.array_equal(self.edges, other.edges)


def build_graph(n: int, edges) -> Graph:
    """Validate and index an edge list (iterable of (u, v) pairs)."""
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.ndim != 2 or e.shape[1] != 2:
        raise GraphFormatError("edge list must be a sequence of (u, v) pairs")
    if n < 0:
        raise GraphFormatError("vertex count must be non-negative")
    if e.size and (e.min() < 0 or e.max() >= n):
        raise GraphFormatError(f"vertex index out of range [0, {n})")
    if np.any(e[:, 0] == e[:, 1]):
        bad = e[e[:, 0] == e[:, 1]][0]
        raise GraphFormatError(f"self-loop at vertex {int(bad[0])}")
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    e = np.stack([lo, hi], axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    e = e[order]
    if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
        i = int(np.argmax(np.all(e[1:] == e[:-1], axis=1)))
        raise GraphFormatError(f"duplicate edge ({int(e[i, 0])}, {int(e[i, 1])})")
    e = e.astype(np.int32)
    m = e.shape[0]

    deg = np.zeros(n, dtype=np.int32)
    np.add.at(deg, e[:, 0], 1)
    np.add.at(deg, e[:, 1], 1)
    indptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(deg, out=indptr[1:])
    nbr = np.empty(2 * m, dtype=np.int32)
    eid = np.empty(2 * m, dtype=np.int32)
    cursor = indptr[:-1].copy()
    for col, other in ((0, 1), (1, 0)):
        src = e[:, col]
        pos = np.empty(m, dtype=np.int32)
        # stable per-vertex fill in edge-id order
        order_src = np.argsort(src, kind="stable")
        counts = np.zeros(n, dtype=np.int32)
        for k in order_src:
            v = src[k]
            pos[k] = cursor[v] + counts[v]
            counts[v] += 1
        cursor += counts
        nbr[pos] = e[:, other]
        eid[pos] = np.arange(m, dtype=np.int32)
    for a in (e, indptr, nbr, eid, deg):
        a.setflags(write=False)
    return Graph(n=n, edges=e, indptr=indptr, nbr=nbr, eid=eid, degrees=deg)


# ---------------------------------------------------------------------------
# girth


@kernel
def _girth_scan(n, indptr, nbr):
    best = 1 << 30
    dist = np.empty(n, np.int32)
    par = np.empty(n, np.int32)
    queue = np.empty(n, np.int32)
    for s in range(n):
        dist[:] = -1
        dist[s] = 0
        par[s] = -1
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            x = queue[head]
            head += 1
            if 2 * dist[x] >= best:
                break
            for j in range(indptr[x], indptr[x + 1]):
                y = nbr[j]
                if dist[y] == -1:
                    dist[y] = dist[x] + 1
                    par[y] = x
                    queue[tail] = y
                    tail += 1
                elif y != par[x]:
                    c = dist[x] + dist[y] + 1
                    if c < best:
                        best = c
        if best == 3:
            break
    return best


def _girth_numpy(n, indptr, nbr):
    best = 1 << 30
    for s in range(n):
        dist = np.full(n, -1, np.int32)
        par = np.full(n, -1, np.int32)
        dist[s] = 0
        frontier = np.array([s], np.int32)
        level = 0
        while frontier.size and 2 * level < best:
            starts = indptr[frontier]
            counts = indptr[frontier + 1] - starts
            total = int(counts.sum())
            if total == 0:
                break
            flat = np.arange(total) + np.repeat(starts - np.concatenate(([0], counts.cumsum()[:-1])), counts)
            ys = nbr[flat]
            xs = np.repeat(frontier, counts)
            seen = dist[ys] != -1
            cross = seen & (ys != par[xs])
            if np.any(cross):
                cand = int((dist[xs[cross]] + dist[ys[cross]] + 1).min())
                if cand < best:
                    best = cand
            new = ys[~seen]
            if new.size:
                uniq, first = np.unique(new, return_index=True)
                dist[uniq] = level + 1
                par[uniq] = xs[~seen][first]
                frontier = uniq.astype(np.int32)
            else:
                frontier = np.empty(0, np.int32)
            level += 1
        if best == 3:
            break
    return best


def girth(g: Graph):
    """Length of a shortest cycle; `GIRTH_UNBOUNDED` iff the graph is a forest."""
    if g.m == 0:
        return GIRTH_UNBOUNDED
    fn = _girth_scan if NUMBA_ENABLED else _girth_numpy
    best = int(fn(g.n, g.indptr, g.nbr))
    return GIRTH_UNBOUNDED if best >= (1 << 30) else best


# ---------------------------------------------------------------------------
# random regular generator: configuration-model pairing; full rejection first,
# switch repair if rejection keeps failing (P(simple) decays like e^{-d^2/4},
# so plain rejection is hopeless beyond small d)


@kernel
def _pair_regular(n, d, seed, reject_rounds, repair_budget):
    nd = n * d
    stubs = np.empty(nd, np.int32)
    adj = np.full((n, d), -1, np.int32)
    deg = np.zeros(n, np.int32)
    su64 = seed
    tag = np.uint64(TAG_GEN)

    for attempt in range(reject_rounds):
        k = 0
        for v in range(n):
            for _ in range(d):
                stubs[k] = v
                k += 1
        at = np.uint64(attempt)
        for i in range(nd - 1, 0, -1):
            h = derive3_u64(su64, tag, at, np.uint64(i))
            j = int(h % np.uint64(i + 1))
            stubs[i], stubs[j] = stubs[j], stubs[i]
        deg[:] = 0
        adj[:] = -1
        simple = True
        for i in range(0, nd, 2):
            a, b = stubs[i], stubs[i + 1]
            if a == b:
                simple = False
            else:
                dup = False
                for t in range(deg[a]):
                    if adj[a, t] == b:
                        dup = True
                        break
                if dup:
                    simple = False
            adj[a, deg[a]] = b
            deg[a] += 1
            adj[b, deg[b]] = a
            deg[b] += 1
        if simple:
            return adj, True
        if attempt < reject_rounds - 1:
            continue
        # switch repair on the final pairing: rewire bad pair with a random one
        pairs = np.empty((nd // 2, 2), np.int32)
        for i in range(0, nd, 2):
            pairs[i // 2, 0] = stubs[i]
            pairs[i // 2, 1] = stubs[i + 1]
        npairs = nd // 2
        ctr = np.uint64(1 << 20)
        for _ in range(repair_budget):
            # locate first bad pair against the *pair multiset*
            bad = -1
            deg[:] = 0
            adj[:] = -1
            for i in range(npairs):
                a, b = pairs[i, 0], pairs[i, 1]
                ok = a != b
                if ok:
                    for t in range(deg[a]):
                        if adj[a, t] == b:
                            ok = False
                            break
                if not ok and bad == -1:
                    bad = i
                adj[a, deg[a]] = b
                deg[a] += 1
                adj[b, deg[b]] = a
                deg[b] += 1
            if bad == -1:
                return adj, True
            ctr += np.uint64(1)
            h = derive2_u64(su64, tag, ctr)
            j = int(h % np.uint64(npairs))
            if j == bad:
                continue
            a, b = pairs[bad, 0], pairs[bad, 1]
            c, e = pairs[j, 0], pairs[j, 1]
            if (h >> np.uint64(40)) & np.uint64(1):
                c, e = e, c
            pairs[bad, 1] = c
            pairs[j, 0] = b
            pairs[j, 1] = e
    return adj, False


def generate_random_regular(n: int, d: int, seed: int) -> Graph:
    """Seeded simple d-regular graph on n vertices (configuration model)."""
    if (n * d) % 2 != 0:
        raise GenerationError(f"n*d must be even, got n={n}, d={d}")
    if d >= n:
        raise GenerationError(f"need d < n, got n={n}, d={d}")
    if d == 0 or n == 0:
        return build_graph(n, [])
    reject_rounds = 40 if d <= 5 else 1
    adj, ok = _pair_regular(n, d, np.uint64(seed & ((1 << 64) - 1)), reject_rounds, 60 * n * d)
    if not ok:
        raise GenerationError(f"could not reach a simple pairing for n={n}, d={d}, seed={seed}")
    edges = [(v, int(w)) for v in range(n) for w in adj[v] if v < w]
    g = build_graph(n, edges)
    assert np.all(g.degrees == d)
    return g


# ---------------------------------------------------------------------------
# high-girth regular generator
#
# Strategy, per seed: for even n and girth target <= 6, a bipartite circulant
# whose connection set is a seeded mod-Sidon set (C4-free + bipartite => girth
# >= 6). Otherwise, constrained greedy growth (only join vertices at distance
# >= g-1, which keeps girth >= g invariant) with edge-relocation repair when
# the greedy saturates. Every success is re-verified with `girth`.


def _sidon_set(h: int, size: int, seed: int) -> np.ndarray | None:
    """Greedy mod-h Sidon set over a seeded candidate order; None if stuck."""
    used = np.zeros(h, dtype=bool)
    used[0] = True
    if h % 2 == 0:
        used[h // 2] = True  # difference h/2 pairs up with itself -> C4
    chosen: list[int] = []
    order = np.argsort([derive(seed, TAG_GEN, 0x51D0, c) for c in range(h)], kind="stable")
    for c in map(int, order):
        ok = True
        fresh: set[int] = set()
        for s in chosen:
            d1 = (c - s) % h
            d2 = (s - c) % h
            if used[d1] or used[d2] or d1 in fresh or d2 in fresh or d1 == d2:
                ok = False
                break
            fresh.add(d1)
            fresh.add(d2)
        if not ok:
            continue
        for d0 in fresh:
            used[d0] = True
        chosen.append(c)
        if len(chosen) == size:
            return np.array(sorted(chosen), dtype=np.int64)
    return None


@kernel
def _grow_high_girth(n, d, gmin, seed, step_budget):
    adj = np.full((n, d), -1, np.int32)
    deg = np.zeros(n, np.int32)
    dist = np.empty(n, np.int32)
    queue = np.empty(n, np.int32)
    su64 = seed
    tag = np.uint64(TAG_GEN + 7)
    target = n * d // 2
    m = 0
    steps = 0
    ctr = np.uint64(0)
    while m < target and steps < step_budget:
        steps += 1
        mind = d
        for v in range(n):
            if deg[v] < d and deg[v] < mind:
                mind = deg[v]
        if mind == d:
            break
        cnt = 0
        for v in range(n):
            if deg[v] == mind:
                cnt += 1
        ctr += np.uint64(1)
        h = derive2_u64(su64, tag, ctr)
        k = int(h % np.uint64(cnt))
        u = -1
        for v in range(n):
            if deg[v] == mind:
                if k == 0:
                    u = v
                    break
                k -= 1
        # ball of radius gmin-2 around u: forbidden partners
        dist[:] = -1
        dist[u] = 0
        queue[0] = u
        head, tail = 0, 1
        while head < tail:
            x = queue[head]
            head += 1
            if dist[x] >= gmin - 2:
                continue
            for j in range(deg[x]):
                y = adj[x, j]
                if dist[y] == -1:
                    dist[y] = dist[x] + 1
                    queue[tail] = y
                    tail += 1
        best = d + 1
        cnt = 0
        for v in range(n):
            if v != u and deg[v] < d and dist[v] == -1:
                if deg[v] < best:
                    best = deg[v]
                    cnt = 1
                elif deg[v] == best:
                    cnt += 1
        if cnt > 0:
            ctr += np.uint64(1)
            h = derive2_u64(su64, tag, ctr)
            k = int(h % np.uint64(cnt))
            w = -1
            for v in range(n):
                if v != u and deg[v] < d and dist[v] == -1 and deg[v] == best:
                    if k == 0:
                        w = v
                        break
                    k -= 1
            adj[u, deg[u]] = w
            deg[u] += 1
            adj[w, deg[w]] = u
            deg[w] += 1
            m += 1
            continue
        # relocation repair: steal endpoint x of an existing edge (x,y) with
        # dist(u,x) >= gmin-1 (girth invariant safe); y re-enters the pool
        moved = False
        for _ in range(4 * n):
            steps += 1
            ctr += np.uint64(1)
            h = derive2_u64(su64, tag, ctr)
            x = int(h % np.uint64(n))
            if deg[x] == 0 or dist[x] != -1:
                continue
            jj = int((h >> np.uint64(32)) % np.uint64(deg[x]))
            y = adj[x, jj]
            if y == u or deg[y] <= mind + 1:
                continue
            # remove (x,y)
            adj[x, jj] = adj[x, deg[x] - 1]
            adj[x, deg[x] - 1] = -1
            deg[x] -= 1
            for t in range(deg[y]):
                if adj[y, t] == x:
                    adj[y, t] = adj[y, deg[y] - 1]
                    adj[y, deg[y] - 1] = -1
                    deg[y] -= 1
                    break
            adj[u, deg[u]] = x
            deg[u] += 1
            adj[x, deg[x]] = u
            deg[x] += 1
            moved = True
            break
        if not moved:
            break
    return adj, deg, m, steps


def _complete_arbitrary(n, d, adj, deg, seed):
    """Finish a stalled partial graph ignoring distance constraints (for the
    best-girth failure report)."""
    leftover = []
    for v in range(n):
        leftover.extend([v] * (d - int(deg[v])))
    edges = {(int(min(u, v)), int(max(u, v))) for u in range(n) for v in adj[u][: deg[u]] if u < v}
    edges = set(edges)
    ctr = 0
    guard = 0
    while len(leftover) >= 2 and guard < 10000 + 100 * len(leftover):
        guard += 1
        ctr += 1
        i = derive(seed, TAG_GEN, 0xF1F1, ctr) % len(leftover)
        j = derive(seed, TAG_GEN, 0xF2F2, ctr) % len(leftover)
        if i == j:
            continue
        a, b = leftover[i], leftover[j]
        key = (min(a, b), max(a, b))
        if a == b or key in edges:
            continue
        edges.add(key)
        for idx in sorted((i, j), reverse=True):
            leftover.pop(idx)
    return build_graph(n, sorted(edges))


def generate_high_girth_regular(n: int, d: int, g_min: int, seed: int, max_steps: int = 0) -> Graph:
    """Seeded d-regular simple graph with girth >= g_min.

    Raises GenerationError (with the best girth achieved) when the step budget
    runs out; `max_steps=0` picks a budget proportional to the edge count.
    """
    if (n * d) % 2 != 0:
        raise GenerationError(f"n*d must be even, got n={n}, d={d}")
    if g_min < 3:
        raise GenerationError("g_min must be >= 3")
    if d >= n:
        raise GenerationError(f"need d < n, got n={n}, d={d}")
    if d <= 1 or g_min == 3:
        return generate_random_regular(n, d, seed)
    if max_steps <= 0:
        max_steps = 400 * max(n * d // 2, 1)

    if n % 2 == 0 and g_min <= 6 and d < n // 2:
        hside = n // 2
        for round_ in range(4):
            s = _sidon_set(hside, d, derive(seed, TAG_GEN, 0x5150, round_))
            if s is not None:
                left = np.arange(hside, dtype=np.int64)
                edges = np.empty((hside * d, 2), dtype=np.int64)
                k = 0
                for off in s:
                    edges[k : k + hside, 0] = left
                    edges[k : k + hside, 1] = hside + (left + off) % hside
                    k += hside
                g = build_graph(n, edges)
                got = girth(g)
                if got >= g_min and np.all(g.degrees == d):
                    return g
                break  # circulant fell short (tiny h); fall through to greedy

    best_girth = None
    for attempt in range(8):
        budget = max(max_steps // 8, 1)
        adj, deg, m, _ = _grow_high_girth(n, d, g_min, np.uint64(derive(seed, TAG_GEN, attempt)), budget)
        if m == n * d // 2:
            edges = [(v, int(w)) for v in range(n) for w in adj[v][: deg[v]] if v < int(w)]
            g = build_graph(n, edges)
            got = girth(g)
            if got >= g_min:
                assert np.all(g.degrees == d)
                return g
            best_girth = got if best_girth is None else max(best_girth, got)
        else:
            filled = _complete_arbitrary(n, d, adj, deg, derive(seed, TAG_GEN, attempt, 0xBEEF))
            if np.all(filled.degrees == d):
                got = girth(filled)
                best_girth = got if best_girth is None else max(best_girth, got)
    raise GenerationError(
        f"girth {g_min} not reached for n={n}, d={d} within budget (best girth achieved: {best_girth})",
        best_girth=best_girth,
    )


# ---------------------------------------------------------------------------
# edge-list text format: line 1 "n m", then m lines "u v" with 0 <= u < v < n


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(f"{g.n} {g.m}\n")
        for u, v in g.edges:
            f.write(f"{int(u)} {int(v)}\n")


def load_graph(path) -> Graph:
    with open(path, encoding="ascii") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise GraphFormatError(f"{path}: malformed header (want 'n m')")
        try:
            n, m = int(header[0]), int(header[1])
        except ValueError as exc:
            raise GraphFormatError(f"{path}: malformed header (want 'n m')") from exc
        rows = []
        for lineno, line in enumerate(f, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: malformed edge line {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: malformed edge line {line!r}") from exc
            if not (0 <= u < v < n):
                if u == v:
                    raise GraphFormatError(f"{path}:{lineno}: self-loop '{u} {v}'")
                raise GraphFormatError(f"{path}:{lineno}: edge '{u} {v}' violates 0 <= u < v < n={n}")
            rows.append((u, v))
    if len(rows) != m:
        raise GraphFormatError(f"{path}: header declares m={m} but {len(rows)} edges listed")
    return build_graph(n, rows)
