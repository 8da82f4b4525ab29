"""Phase three: every uncolored edge gets a list of reserved colors shared by
its endpoints, then a uniform random choice per edge is repaired by local
resampling until the completed coloring is proper and acyclic.

List size is floor(gamma * Delta) with gamma = eps^2/18 in the pipeline; the
lists take the smallest-index colors of S_u cap S_v so reruns are
reproducible. Resampling redraws only the phase-start uncolored edges that
participate in a violation; colors inherited from the nibble are never
touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coloring import (
    UNCOLORED,
    EdgeColoring,
    find_bicolored_cycles,
    properness_violations,
)
from .cycles import CycleRegistry
from .errors import FinisherError
from .graphs import Graph
from .reservation import ReservedSets
from .rng import TAG_FINISH, derive
from .schedule import palette_size


def final_gamma(eps: float) -> float:
    return eps * eps / 18.0


def build_final_lists(g: Graph, chi: EdgeColoring, reserved: ReservedSets,
                      gamma: float) -> dict[int, np.ndarray]:
    """Per uncolored edge, the floor(gamma*Delta) smallest colors of
    S_u cap S_v. Errors name the first edge whose intersection is too small."""
    delta = g.max_degree
    want = int(math.floor(gamma * delta))
    out: dict[int, np.ndarray] = {}
    for e in np.nonzero(chi.colors == UNCOLORED)[0]:
        e = int(e)
        u, v = int(g.edges[e, 0]), int(g.edges[e, 1])
        shared = reserved.shared_colors(u, v)
        if shared.size < gamma * delta:
            raise FinisherError(
                f"edge {e}=({u},{v}) has |S_u cap S_v|={shared.size} < gamma*Delta={gamma * delta:.6g}")
        out[e] = shared[:want].copy()
    return out


@dataclass(frozen=True)
class FinishingHypotheses:
    list_size_violations: list
    crowding_violations: list
    union_size: int
    union_ok: bool
    cycle_violations: list
    registry_tracked: bool

    @property
    def ok(self) -> bool:
        return (not self.list_size_violations and not self.crowding_violations
                and self.union_ok and not self.cycle_violations)


def check_finishing_hypotheses(g: Graph, chi: EdgeColoring, lists: dict[int, np.ndarray],
                               gamma: float, eps: float,
                               registry: CycleRegistry | None = None,
                               reserved: ReservedSets | None = None) -> FinishingHypotheses:
    """The four finishing-phase hypotheses: exact list sizes; each list color
    on at most gamma^2*Delta/128 adjacent uncolored lists; at most (1+eps)Delta
    colors in the union; every completable-bicolored cycle (checked on the
    bounded registry) has >= 3 uncolored edges."""
    delta = g.max_degree
    want = int(math.floor(gamma * delta))
    uncolored = [int(e) for e in np.nonzero(chi.colors == UNCOLORED)[0]]
    size_bad = [e for e in uncolored if e not in lists or len(lists[e]) != want]

    member = {e: set(int(c) for c in cols) for e, cols in lists.items()}
    crowd_thr = gamma * gamma * delta / 128.0
    crowding = []
    for e in uncolored:
        if e not in member:
            continue
        u, v = int(g.edges[e, 0]), int(g.edges[e, 1])
        adjacent = set()
        for w in (u, v):
            for e2 in g.incident_edges(w):
                e2 = int(e2)
                if e2 != e and chi.colors[e2] == UNCOLORED:
                    adjacent.add(e2)
        for c in member[e]:
            cnt = sum(1 for e2 in adjacent if e2 in member and c in member[e2])
            if cnt > crowd_thr:
                crowding.append((e, c, cnt))

    union: set[int] = set()
    for cols in lists.values():
        union.update(int(c) for c in cols)
    union_ok = len(union) <= palette_size(eps, delta)

    cycle_bad = []
    if registry is not None:
        listed = {e: set(int(c) for c in cols) for e, cols in lists.items()}
        for k in range(registry.n_cycles):
            eids = [int(e) for e in registry.cycle_edges(k)]
            unc = [e for e in eids if chi.colors[e] == UNCOLORED]
            if len(unc) >= 3:
                continue
            cols = sorted({int(chi.colors[e]) for e in eids if chi.colors[e] != UNCOLORED})
            if len(cols) > 2 or any(e not in listed for e in unc):
                continue
            palette = chi.palette_size
            cand_c = cols if cols else sorted(set.union(set(), *[listed[e] for e in unc])) or list(range(palette))
            found = False
            for c in cand_c:
                if cols and len(cols) == 2:
                    dchoices = [x for x in cols if x != c]
                else:
                    dchoices = sorted(set.union(set(), *[listed[e] for e in unc]) | set(cols))
                for d in dchoices:
                    if c == d:
                        continue
                    if all(col in (c, d) for col in cols) and all(
                        c in listed[e] or d in listed[e] for e in unc
                    ):
                        found = True
                        break
                if found:
                    break
            if found:
                cycle_bad.append((k, len(unc)))
    return FinishingHypotheses(size_bad, crowding, len(union), union_ok,
                               cycle_bad, registry is not None)


def complete_coloring(g: Graph, chi: EdgeColoring, lists: dict[int, np.ndarray],
                      seed: int, max_rounds: int = 200) -> EdgeColoring:
    """Extend chi to a total coloring: uniform draws from the lists, then
    rounds of redrawing the new edges involved in adjacent-equal pairs or
    bicolored cycles. The result is verified unconditionally before return."""
    out = chi.copy()
    new_edges = sorted(lists.keys())
    missing = [int(e) for e in np.nonzero(out.colors == UNCOLORED)[0] if int(e) not in lists]
    if missing:
        raise FinisherError(f"uncolored edges without lists: {missing[:8]}")
    for e in new_edges:
        if len(lists[e]) == 0:
            raise FinisherError(f"edge {e} has an empty finishing list")
        out.colors[e] = int(lists[e][derive(seed, TAG_FINISH, 0, e) % len(lists[e])])
    is_new = np.zeros(g.m, dtype=bool)
    is_new[new_edges] = True
    for round_ in range(1, max_rounds + 1):
        redraw: set[int] = set()
        for e1, e2 in properness_violations(g, out):
            if not is_new[e1] and not is_new[e2]:
                raise FinisherError(f"edges {e1},{e2} clash and neither is new (chi was improper)")
            if is_new[e1]:
                redraw.add(e1)
            if is_new[e2]:
                redraw.add(e2)
        if not redraw:
            for cyc in find_bicolored_cycles(g, out):
                hit = [e for e in cyc.edge_ids if is_new[e]]
                if not hit:
                    raise FinisherError(
                        f"bicolored cycle {cyc.vertices} contains no phase-start uncolored edge "
                        "(the partial coloring was not acyclic)")
                redraw.update(hit)
        if not redraw:
            assert not properness_violations(g, out)
            assert not find_bicolored_cycles(g, out)
            return out
        for e in sorted(redraw):
            out.colors[e] = int(lists[e][derive(seed, TAG_FINISH, round_, e) % len(lists[e])])
    raise FinisherError(f"completion not reached in {max_rounds} rounds "
                        f"({len(redraw)} edges still violating)")
