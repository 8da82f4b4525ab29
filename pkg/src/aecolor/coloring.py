"""Partial edge colorings, properness and bicolored-cycle verification, and a
brute-force acyclic-index oracle for tiny graphs.

A coloring is proper when adjacent edges differ; it is acyclic when it is
proper and no cycle carries only two colors. The verifier certifies a partial
coloring as-is: uncolored edges are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._accel import kernel
from .errors import GraphFormatError, ImproperColoringError, OracleGuardError
from .graphs import Graph

UNCOLORED = -1


@dataclass
class EdgeColoring:
    """Edge -> color map over palette [0, palette_size); -1 means uncolored."""

    palette_size: int
    colors: np.ndarray

    def copy(self) -> "EdgeColoring":
        return EdgeColoring(self.palette_size, self.colors.copy())

    @property
    def n_colored(self) -> int:
        return int((self.colors != UNCOLORED).sum())

    def colors_used(self) -> int:
        return int(np.unique(self.colors[self.colors != UNCOLORED]).size)

    def is_total(self) -> bool:
        return bool((self.colors != UNCOLORED).all())

    def to_dict(self) -> dict:
        return {
            "palette_size": int(self.palette_size),
            "colours": {str(i): int(c) for i, c in enumerate(self.colors) if c != UNCOLORED},
        }

    @classmethod
    def from_dict(cls, data: dict, m: int) -> "EdgeColoring":
        try:
            palette = int(data["palette_size"])
            entries = data["colours"]
        except (KeyError, TypeError) as exc:
            raise GraphFormatError(f"bad coloring object: {exc}") from exc
        colors = np.full(m, UNCOLORED, dtype=np.int32)
        for k, c in entries.items():
            i, c = int(k), int(c)
            if not 0 <= i < m:
                raise GraphFormatError(f"edge id {i} out of range [0, {m})")
            if not 0 <= c < palette:
                raise GraphFormatError(f"color {c} outside palette [0, {palette})")
            colors[i] = c
        return cls(palette, colors)


def empty_coloring(g: Graph, palette_size: int) -> EdgeColoring:
    return EdgeColoring(palette_size, np.full(g.m, UNCOLORED, dtype=np.int32))


def save_coloring(chi: EdgeColoring, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        json.dump(chi.to_dict(), f, sort_keys=True)
        f.write("\n")


def load_coloring(path, m: int) -> EdgeColoring:
    with open(path, encoding="ascii") as f:
        return EdgeColoring.from_dict(json.load(f), m)


def _check_coloring(g: Graph, chi: EdgeColoring) -> None:
    if chi.colors.shape[0] != g.m:
        raise GraphFormatError(f"coloring covers {chi.colors.shape[0]} edges, graph has {g.m}")
    colored = chi.colors[chi.colors != UNCOLORED]
    if colored.size and (colored.min() < 0 or colored.max() >= chi.palette_size):
        raise GraphFormatError("assigned color outside palette")


# ---------------------------------------------------------------------------
# properness


@kernel
def _properness_scan(n, indptr, eid, colors, out, cap):
    count = 0
    for v in range(n):
        lo, hi = indptr[v], indptr[v + 1]
        for a in range(lo, hi):
            ea = eid[a]
            ca = colors[ea]
            if ca < 0:
                continue
            for b in range(a + 1, hi):
                eb = eid[b]
                if colors[eb] == ca:
                    if count < cap:
                        e1, e2 = ea, eb
                        if e1 > e2:
                            e1, e2 = e2, e1
                        out[count, 0] = e1
                        out[count, 1] = e2
                    count += 1
    return count


def properness_violations(g: Graph, chi: EdgeColoring) -> list[tuple[int, int]]:
    """Exactly the pairs of adjacent colored edges bearing equal colors."""
    _check_coloring(g, chi)
    cap = 4096
    while True:
        out = np.empty((cap, 2), dtype=np.int32)
        count = int(_properness_scan(g.n, g.indptr, g.eid, chi.colors, out, cap))
        if count <= cap:
            break
        cap = count
    return sorted({(int(a), int(b)) for a, b in out[:count]})


# ---------------------------------------------------------------------------
# bicolored cycles
#
# Only color pairs that co-occur at some vertex are scanned; by properness the
# {c,d}-subgraph has max degree 2, so its cycles fall out of a linear walk.
# `_scan_batch` runs the scan over many colorings of one graph in a single
# call (the verifier-oracle equivalence corpus needs ~1e7 scans); the
# single-coloring entry point is a batch of size one.


@kernel
def _scan_batch(n, m, indptr, nbr, eid, edges, colors_mat, palette,
                cyc_edges, cyc_pair, cyc_trial, max_cycles, cap_edges):
    ntrials = colors_mat.shape[0]
    proper = np.ones(ntrials, np.uint8)
    maxdeg = 0
    for v in range(n):
        dv = indptr[v + 1] - indptr[v]
        if dv > maxdeg:
            maxdeg = dv
    cbuf = np.empty(max(maxdeg, 1), np.int64)
    pair_seen = np.zeros(palette * palette, np.uint8)
    pair_list = np.empty(palette * palette + 1, np.int64)
    estamp = np.full(m, -1, np.int64)
    walk = np.empty(m + 1, np.int32)
    ncycles = 0
    cursor = 0
    stamp = 0
    overflow = 0
    for t in range(ntrials):
        colors = colors_mat[t]
        ok = True
        npairs = 0
        for v in range(n):
            lo, hi = indptr[v], indptr[v + 1]
            k = 0
            for a in range(lo, hi):
                c = colors[eid[a]]
                if c >= 0:
                    cbuf[k] = c
                    k += 1
            for a in range(1, k):
                key = cbuf[a]
                b = a - 1
                while b >= 0 and cbuf[b] > key:
                    cbuf[b + 1] = cbuf[b]
                    b -= 1
                cbuf[b + 1] = key
            for a in range(1, k):
                if cbuf[a] == cbuf[a - 1]:
                    ok = False
                    break
            if not ok:
                break
            for a in range(k):
                for b in range(a + 1, k):
                    key = cbuf[a] * palette + cbuf[b]
                    if pair_seen[key] == 0:
                        pair_seen[key] = 1
                        pair_list[npairs] = key
                        npairs += 1
        if not ok:
            proper[t] = 0
            for i in range(npairs):
                pair_seen[pair_list[i]] = 0
            continue
        for pi in range(npairs):
            key = pair_list[pi]
            pair_seen[key] = 0
            c = np.int32(key // palette)
            d = np.int32(key % palette)
            stamp += 1
            for e0 in range(m):
                ce0 = colors[e0]
                if (ce0 != c and ce0 != d) or estamp[e0] == stamp:
                    continue
                u0 = edges[e0, 0]
                v0 = edges[e0, 1]
                estamp[e0] = stamp
                walk[0] = e0
                wlen = 1
                cur = v0
                prev = e0
                closed = False
                while True:
                    nxt = np.int32(-1)
                    nxtv = np.int32(-1)
                    for j in range(indptr[cur], indptr[cur + 1]):
                        e2 = eid[j]
                        if e2 == prev:
                            continue
                        c2 = colors[e2]
                        if c2 == c or c2 == d:
                            nxt = e2
                            nxtv = nbr[j]
                            break
                    if nxt == -1:
                        break
                    if nxt == e0:
                        closed = True
                        break
                    estamp[nxt] = stamp
                    walk[wlen] = nxt
                    wlen += 1
                    prev = nxt
                    cur = nxtv
                if closed:
                    if ncycles < max_cycles and cursor + wlen <= cap_edges:
                        for i in range(wlen):
                            cyc_edges[cursor + i] = walk[i]
                        cyc_pair[ncycles, 0] = c
                        cyc_pair[ncycles, 1] = d
                        cyc_pair[ncycles, 2] = wlen
                        cyc_trial[ncycles] = t
                        cursor += wlen
                        ncycles += 1
                    else:
                        overflow = 1
                else:
                    # component is a path; mark its other arm so no edge of it
                    # seeds another walk
                    cur = u0
                    prev = e0
                    while True:
                        nxt = np.int32(-1)
                        nxtv = np.int32(-1)
                        for j in range(indptr[cur], indptr[cur + 1]):
                            e2 = eid[j]
                            if e2 == prev:
                                continue
                            c2 = colors[e2]
                            if c2 == c or c2 == d:
                                nxt = e2
                                nxtv = nbr[j]
                                break
                        if nxt == -1:
                            break
                        estamp[nxt] = stamp
                        prev = nxt
                        cur = nxtv
    return proper, ncycles, cursor, overflow


@dataclass(frozen=True)
class BicoloredCycle:
    """A cycle whose edges carry exactly the two colors in `pair`.

    `vertices` is the lexicographically smallest rotation/reflection of the
    cyclic vertex sequence; `edge_ids[i]` joins vertices i and i+1 (mod len).
    """

    vertices: tuple
    edge_ids: tuple
    pair: tuple

    def edge_set(self) -> frozenset:
        return frozenset(self.edge_ids)


def _canonical_cycle(vseq: list[int], g: Graph, pair: tuple[int, int]) -> BicoloredCycle:
    k = len(vseq)
    best = None
    for direction in (vseq, vseq[::-1]):
        for r in range(k):
            cand = tuple(direction[(r + i) % k] for i in range(k))
            if best is None or cand < best:
                best = cand
    lookup = {}
    for u, v in zip(best, best[1:] + best[:1]):
        a, b = (u, v) if u < v else (v, u)
        lookup[(a, b)] = None
    edge_of = {}
    for i, (u, v) in enumerate(g.edges):
        key = (int(u), int(v))
        if key in lookup:
            edge_of[key] = i
    eids = tuple(
        edge_of[(min(u, v), max(u, v))] for u, v in zip(best, best[1:] + best[:1])
    )
    return BicoloredCycle(vertices=best, edge_ids=eids, pair=pair)


def _run_scan(g: Graph, colors_mat: np.ndarray, palette: int):
    max_cycles, cap_edges = 1024, 8192
    while True:
        cyc_edges = np.empty(cap_edges, dtype=np.int32)
        cyc_pair = np.empty((max_cycles, 3), dtype=np.int32)
        cyc_trial = np.empty(max_cycles, dtype=np.int32)
        proper, ncyc, cursor, overflow = _scan_batch(
            g.n, g.m, g.indptr, g.nbr, g.eid, g.edges, colors_mat, palette,
            cyc_edges, cyc_pair, cyc_trial, max_cycles, cap_edges,
        )
        if not overflow:
            return proper, int(ncyc), cyc_edges[: int(cursor)], cyc_pair[: int(ncyc)], cyc_trial[: int(ncyc)]
        max_cycles *= 4
        cap_edges *= 4


def find_bicolored_cycles(g: Graph, chi: EdgeColoring) -> list[BicoloredCycle]:
    """All cycles of two-colored subgraphs; empty iff the partial coloring is
    acyclic. Raises ImproperColoringError instead of scanning an improper
    coloring."""
    _check_coloring(g, chi)
    bad = properness_violations(g, chi)
    if bad:
        raise ImproperColoringError(f"coloring is not proper ({len(bad)} adjacent equal pairs)", bad)
    if g.m == 0 or chi.palette_size == 0:
        return []
    mat = chi.colors.reshape(1, -1).astype(np.int32)
    _, ncyc, flat, pairs, _ = _run_scan(g, mat, chi.palette_size)
    out = []
    pos = 0
    for i in range(ncyc):
        c, d, wlen = int(pairs[i, 0]), int(pairs[i, 1]), int(pairs[i, 2])
        eids = flat[pos : pos + wlen]
        pos += wlen
        vseq = _edge_walk_vertices(g, eids)
        out.append(_canonical_cycle(vseq, g, (c, d)))
    out.sort(key=lambda c: (c.pair, c.vertices))
    return out


def _edge_walk_vertices(g: Graph, eids: np.ndarray) -> list[int]:
    """Vertex sequence of a closed edge walk given in cyclic order."""
    e0 = g.edges[eids[0]]
    e1 = g.edges[eids[1]]
    shared = int(e0[1]) if e0[1] in (e1[0], e1[1]) else int(e0[0])
    first = int(e0[0]) if shared == e0[1] else int(e0[1])
    seq = [first, shared]
    for k in range(1, len(eids) - 1):
        u, v = g.edges[eids[k]]
        nxt = int(v) if int(u) == seq[-1] else int(u)
        seq.append(nxt)
    return seq


def scan_colorings_batch(g: Graph, colors_mat: np.ndarray, palette_size: int):
    """Run the bicolored-cycle scan over a batch of colorings of one graph
    (the same kernel the single-coloring entry point uses).

    Returns (proper flags, hits) with hits a list of (trial, edge-id
    frozenset) pairs in scan order. Improper trials get flag 0 and no hits.
    """
    if colors_mat.ndim != 2 or colors_mat.shape[1] != g.m:
        raise GraphFormatError("colors_mat must be (trials, m)")
    proper, ncyc, flat, pairs, trials = _run_scan(g, np.ascontiguousarray(colors_mat, dtype=np.int32), palette_size)
    hits = []
    pos = 0
    for i in range(ncyc):
        wlen = int(pairs[i, 2])
        hits.append((int(trials[i]), frozenset(int(e) for e in flat[pos : pos + wlen])))
        pos += wlen
    return proper.astype(bool), hits


# ---------------------------------------------------------------------------
# brute-force acyclic index


def _walk_pair_cycle(g: Graph, colors, e: int, c: int, d: int) -> bool:
    """Does a {c,d}-colored cycle pass through edge e (colored c)?"""
    u0, v0 = int(g.edges[e, 0]), int(g.edges[e, 1])
    cur, prev = v0, e
    while True:
        nxt = -1
        nxtv = -1
        lo, hi = g.indptr[cur], g.indptr[cur + 1]
        for j in range(lo, hi):
            e2 = int(g.eid[j])
            if e2 == prev:
                continue
            if colors[e2] == c or colors[e2] == d:
                nxt, nxtv = e2, int(g.nbr[j])
                break
        if nxt == -1:
            return False
        if nxt == e:
            return True
        cur, prev = nxtv, nxt


def brute_force_acyclic_index(g: Graph, max_colors: int, guard_edges: int = 12):
    """Exact acyclic chromatic index by backtracking, or None if > max_colors.

    Guarded: refuses graphs with more than `guard_edges` edges.
    """
    if g.m > guard_edges:
        raise OracleGuardError(f"graph has {g.m} edges > guard {guard_edges}")
    if g.m == 0:
        return 0
    adj_colors = [g.incident_edges(v) for v in range(g.n)]

    def feasible(k: int) -> bool:
        colors = np.full(g.m, UNCOLORED, dtype=np.int32)

        def extend(e: int) -> bool:
            if e == g.m:
                return True
            u, v = int(g.edges[e, 0]), int(g.edges[e, 1])
            banned = set()
            for w in (u, v):
                for e2 in adj_colors[w]:
                    if colors[e2] != UNCOLORED:
                        banned.add(int(colors[e2]))
            for c in range(k):
                if c in banned:
                    continue
                colors[e] = c
                ok = True
                seen = set()
                for w in (u, v):
                    for e2 in adj_colors[w]:
                        d = int(colors[e2])
                        if e2 == e or d == UNCOLORED or d == c or d in seen:
                            continue
                        seen.add(d)
                        if _walk_pair_cycle(g, colors, e, c, d):
                            ok = False
                            break
                    if not ok:
                        break
                if ok and extend(e + 1):
                    return True
                colors[e] = UNCOLORED
            return False

        return extend(0)

    for k in range(1, max_colors + 1):
        if feasible(k):
            return k
    return None
