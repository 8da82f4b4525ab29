"""Bounded-length simple-cycle registry and alternating-arc multiplicity.

The registry holds every simple cycle of length <= l_max, enumerated
canonically (smallest vertex first, direction fixed by second < last); the
rest of the pipeline evaluates pair compatibility lazily against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import kernel
from .errors import RegistryCapError
from .graphs import Graph

INCOMPATIBLE = math.inf

LABEL_NONE = 0
LABEL_C = 1
LABEL_D = 2
LABEL_BOTH = 3


@dataclass(frozen=True)
class CycleRegistry:
    """Flat storage: cycle k occupies verts/eids[starts[k]:starts[k+1]];
    eids[i] joins verts[i] and verts[i+1 mod len]."""

    starts: np.ndarray
    verts: np.ndarray
    eids: np.ndarray

    @property
    def n_cycles(self) -> int:
        return int(self.starts.shape[0] - 1)

    def cycle_vertices(self, k: int) -> np.ndarray:
        return self.verts[self.starts[k] : self.starts[k + 1]]

    def cycle_edges(self, k: int) -> np.ndarray:
        return self.eids[self.starts[k] : self.starts[k + 1]]

    def length(self, k: int) -> int:
        return int(self.starts[k + 1] - self.starts[k])


@kernel
def _enumerate_cycles(n, indptr, nbr, eid, l_max, cap_cycles, cap_flat):
    starts = np.zeros(cap_cycles + 1, np.int64)
    verts = np.empty(cap_flat, np.int32)
    eids = np.empty(cap_flat, np.int32)
    ncyc = 0
    cursor = 0
    overflow = 0
    path_v = np.empty(l_max + 1, np.int32)
    path_e = np.empty(l_max + 1, np.int32)
    slot = np.empty(l_max + 1, np.int64)
    on_path = np.zeros(n, np.uint8)
    for s in range(n):
        if overflow:
            break
        path_v[0] = s
        on_path[s] = 1
        depth = 0
        slot[0] = indptr[s]
        while depth >= 0:
            if overflow:
                break
            v = path_v[depth]
            j = slot[depth]
            if j >= indptr[v + 1]:
                on_path[v] = 0
                depth -= 1
                continue
            slot[depth] += 1
            w = nbr[j]
            e = eid[j]
            if w < s:
                continue
            if w == s:
                # closing edge; cycle iff depth >= 2 and canonical direction
                if depth >= 2 and path_v[1] < path_v[depth]:
                    length = depth + 1
                    if ncyc >= cap_cycles or cursor + length > cap_flat:
                        overflow = 1
                        continue
                    for t in range(length):
                        verts[cursor + t] = path_v[t]
                        eids[cursor + t] = path_e[t + 1] if t + 1 <= depth else e
                    cursor += length
                    ncyc += 1
                    starts[ncyc] = cursor
                continue
            if on_path[w]:
                continue
            if depth + 1 >= l_max:
                continue
            depth += 1
            path_v[depth] = w
            path_e[depth] = e
            slot[depth] = indptr[w]
            on_path[w] = 1
        on_path[s] = 0
    return starts, verts, eids, ncyc, cursor, overflow


def build_cycle_registry(g: Graph, l_max: int, cap: int = 10**6) -> CycleRegistry:
    """All simple cycles of length <= l_max; raises RegistryCapError beyond `cap`."""
    if l_max < 3:
        raise RegistryCapError("l_max must be >= 3")
    cap_cycles, cap_flat = 1024, 1024 * 8
    while True:
        starts, verts, eids, ncyc, cursor, overflow = _enumerate_cycles(
            g.n, g.indptr, g.nbr, g.eid, l_max, cap_cycles, cap_flat
        )
        if not overflow:
            break
        if cap_cycles >= cap:
            raise RegistryCapError(f"cycle registry exceeds cap of {cap} cycles (l_max={l_max})")
        cap_cycles = min(cap_cycles * 8, int(cap * 1.02) + 16)
        cap_flat = cap_cycles * max(l_max, 8)
    if ncyc > cap:
        raise RegistryCapError(f"cycle registry exceeds cap of {cap} cycles (l_max={l_max})")
    starts = starts[: ncyc + 1].copy()
    verts = verts[:cursor].copy()
    eids = eids[:cursor].copy()
    for a in (starts, verts, eids):
        a.setflags(write=False)
    return CycleRegistry(starts=starts, verts=verts, eids=eids)


# ---------------------------------------------------------------------------
# multiplicity: minimum number of alternating arcs partitioning a cycle


@kernel
def _multiplicity_dp(labels):
    ell = labels.shape[0]
    # arc_c[j]: longest run starting at j alternating (c, d, c, ...);
    # arc_d[j]: same starting with d. Computed on the doubled sequence.
    arc_c = np.zeros(2 * ell + 1, np.int64)
    arc_d = np.zeros(2 * ell + 1, np.int64)
    for j in range(2 * ell - 1, -1, -1):
        lab = labels[j % ell]
        if lab == LABEL_C or lab == LABEL_BOTH:
            run = arc_d[j + 1] + 1
            arc_c[j] = run if run <= ell else ell
        if lab == LABEL_D or lab == LABEL_BOTH:
            run = arc_c[j + 1] + 1
            arc_d[j] = run if run <= ell else ell
    best = ell + 1
    for cut in range(ell):
        covered = 0
        pos = cut
        arcs = 0
        ok = True
        while covered < ell:
            step = arc_c[pos] if arc_c[pos] >= arc_d[pos] else arc_d[pos]
            if step == 0:
                ok = False
                break
            if step > ell - covered:
                step = ell - covered
            covered += step
            pos = cut + covered
            if pos >= 2 * ell:
                pos -= 2 * ell
            arcs += 1
            if arcs >= best:
                ok = False
                break
        if ok and arcs < best:
            best = arcs
    return best


def cycle_multiplicity(labels) -> float:
    """Minimum t such that the cyclic label sequence splits into t alternating
    arcs; INCOMPATIBLE when any edge is compatible with neither color.

    Labels: LABEL_C, LABEL_D, LABEL_BOTH, LABEL_NONE per edge around the cycle.
    """
    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] < 3:
        raise ValueError("labels must be a sequence of length >= 3")
    if np.any((arr < 0) | (arr > 3)):
        raise ValueError("labels must be in {0=none, 1=c, 2=d, 3=both}")
    if np.any(arr == LABEL_NONE):
        return INCOMPATIBLE
    return int(_multiplicity_dp(arr))
