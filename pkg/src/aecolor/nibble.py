"""Iterative semi-random edge coloring: per iteration, every uncolored edge
draws a color from its truncated list, conflicting assignments are undone,
equalizing coins flatten the retention and list-survival probabilities to the
exact constants e^-2 and 1-e^-2, and lists shrink for the next round.

An iteration runs six phases:

  S.1 truncate every list to exactly floor(L_i) colors (drop highest first)
  S.2 assign each uncolored edge a uniform color from its list
  S.3 uncolor every edge sharing its assigned color with an adjacent edge
  S.4 uncolor survivors with the equalizing probability Eq_i(e,c)
  S.5 remove retained colors from the lists of all edges at both endpoints
  S.6 remove each (vertex, color) from the incident lists with probability
      Vq_i(v,c) when no incident edge retained c

with Eq_i(e,c) = 1 - 1/(e^2 P_i(e,c)), P_i(e,c) = (1-1/L_i)^{t_i(u,c)+t_i(v,c)-2},
and Vq_i(v,c) = 1 - (1-e^-2)/Q_i(v,c), Q_i(v,c) = 1 - t_i(v,c)/(e^2 L_i). All
formulas use the truncated integer list size, which is what the uniform draws
actually range over. When desk-scale drift pushes P below e^-2 (or Q below
1-e^-2) the coin is clamped to 0 and a warning counter increments.

Randomness is position-keyed: edge draws by (seed, iteration, edge id),
vertex-color coins by (seed, iteration, vertex, color); results do not depend
on traversal order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ._accel import NUMBA_ENABLED, kernel
from .coloring import UNCOLORED, EdgeColoring
from .cycles import (
    INCOMPATIBLE,
    LABEL_BOTH,
    LABEL_C,
    LABEL_D,
    LABEL_NONE,
    CycleRegistry,
    build_cycle_registry,
    cycle_multiplicity,
)
from .errors import AecolorError, RegistryCapError
from .graphs import Graph, girth
from .reservation import ReservedSets
from .rng import (
    TAG_ASSIGN,
    TAG_EQCOIN,
    TAG_VQCOIN,
    derive,
    derive3_u64,
    derive4_u64,
    derive_arr,
    u01_arr,
    u01_u64,
)
from .schedule import E_MINUS_2, ScheduleParams

_E2 = math.exp(2.0)


@dataclass
class IterationStats:
    iteration: int
    n_uncolored_before: int
    n_assigned: int
    n_conflict_uncolored: int
    n_eq_uncolored: int
    n_retained: int
    n_uncolored_after: int
    mean_list_next: float
    max_t_next: int
    max_r_next: int
    eq_clamped: int
    vq_clamped: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class NibbleState:
    """Mutable iteration state: partial coloring plus per-edge color lists.

    `avail[e, c]` is meaningful only while edge e is uncolored; lists only
    shrink. Derived counts t(v,c) and r(v,c) are recomputed on demand and
    inside the iteration kernel.
    """

    graph: Graph
    schedule: ScheduleParams
    reserved: ReservedSets
    registry: CycleRegistry | None
    i: int
    colors: np.ndarray
    avail: np.ndarray
    eq_clamp_warnings: int = 0
    vq_clamp_warnings: int = 0
    p_bound_warnings: int = 0

    @property
    def palette(self) -> int:
        return self.reserved.palette_size

    def copy(self) -> "NibbleState":
        return NibbleState(
            self.graph, self.schedule, self.reserved, self.registry,
            self.i, self.colors.copy(), self.avail.copy(),
            self.eq_clamp_warnings, self.vq_clamp_warnings, self.p_bound_warnings,
        )

    def uncolored(self) -> np.ndarray:
        return self.colors == UNCOLORED

    def list_sizes(self) -> np.ndarray:
        """ell(e) for every edge; meaningful on uncolored edges."""
        return self.avail.sum(axis=1, dtype=np.int64)

    def t_counts(self) -> np.ndarray:
        """t(v,c) = #incident uncolored edges whose list still holds c."""
        t = np.zeros((self.graph.n, self.palette), dtype=np.int32)
        unc = self.uncolored()
        if unc.any():
            rows = self.avail[unc].astype(np.int32)
            np.add.at(t, self.graph.edges[unc, 0], rows)
            np.add.at(t, self.graph.edges[unc, 1], rows)
        return t

    def r_counts(self) -> np.ndarray:
        """r(v,c) = #neighbors u with uv uncolored and c reserved at u."""
        r = np.zeros((self.graph.n, self.palette), dtype=np.int32)
        unc = self.uncolored()
        if unc.any():
            member = self.reserved.membership_matrix().astype(np.int32)
            np.add.at(r, self.graph.edges[unc, 0], member[self.graph.edges[unc, 1]])
            np.add.at(r, self.graph.edges[unc, 1], member[self.graph.edges[unc, 0]])
        return r

    def coloring(self) -> EdgeColoring:
        return EdgeColoring(self.palette, self.colors.copy())

    def floor_list_size(self) -> int:
        return int(math.floor(self.schedule.L[self.i]))


def init_state(g: Graph, reserved: ReservedSets, schedule: ScheduleParams,
               registry: CycleRegistry | None = None) -> NibbleState:
    """Iteration-1 state: empty coloring, lists = palette minus both reserved
    sets. Raises when the graph's girth is below the schedule's girth."""
    got = girth(g)
    if got < schedule.girth:
        raise AecolorError(f"graph girth {got} below schedule girth {schedule.girth}")
    if reserved.palette_size != schedule.palette:
        raise AecolorError(
            f"reserved palette {reserved.palette_size} != schedule palette {schedule.palette}")
    member = reserved.membership_matrix()
    blocked = member[g.edges[:, 0]] | member[g.edges[:, 1]]
    avail = (~blocked).astype(np.uint8)
    colors = np.full(g.m, UNCOLORED, dtype=np.int32)
    return NibbleState(g, schedule, reserved, registry, 1, colors, avail)


# ---------------------------------------------------------------------------
# diagnostics: the equalizing probabilities


def _t_local(state: NibbleState, v: int, c: int) -> int:
    g = state.graph
    lo, hi = g.indptr[v], g.indptr[v + 1]
    cnt = 0
    for j in range(lo, hi):
        e = int(g.eid[j])
        if state.colors[e] == UNCOLORED and state.avail[e, c]:
            cnt += 1
    return cnt


def p_keep(state: NibbleState, e: int, c: int) -> float:
    """P_i(e,c): probability that no edge adjacent to e is assigned color c.

    Asserts the analysis bound P > e^-2 by incrementing a drift-warning
    counter when it fails (it can at desk scale)."""
    if state.colors[e] != UNCOLORED:
        raise AecolorError(f"edge {e} is already colored")
    if not state.avail[e, c]:
        raise AecolorError(f"color {c} is not on the list of edge {e}")
    u, v = int(state.graph.edges[e, 0]), int(state.graph.edges[e, 1])
    ell = state.floor_list_size()
    tu, tv = _t_local(state, u, c), _t_local(state, v, c)
    p = (1.0 - 1.0 / ell) ** (tu + tv - 2)
    if p <= E_MINUS_2:
        state.p_bound_warnings += 1
    return p


def q_keep(state: NibbleState, v: int, c: int) -> float:
    """Q_i(v,c) = 1 - t_i(v,c)/(e^2 L_i): probability that c is not retained
    by an edge incident to v."""
    ell = state.floor_list_size()
    t = _t_local(state, v, c)
    if t == 0:
        return 1.0
    q = 1.0 - t / (_E2 * ell)
    if q <= 1.0 - E_MINUS_2:
        state.p_bound_warnings += 1
    return q


# ---------------------------------------------------------------------------
# one iteration (jitted kernel and vectorized numpy fallback)


@kernel
def _iteration_kernel(indptr, nbr, eid, edges, colors, avail, member, floorL, itr, seed):
    n = indptr.shape[0] - 1
    m = edges.shape[0]
    P = avail.shape[1]
    tag_assign = np.uint64(TAG_ASSIGN)
    tag_eq = np.uint64(TAG_EQCOIN)
    tag_vq = np.uint64(TAG_VQCOIN)
    em2 = math.exp(-2.0)
    e2 = math.exp(2.0)

    # S.1: truncate lists to floorL, dropping highest-numbered colors
    n_unc_before = 0
    for e in range(m):
        if colors[e] >= 0:
            continue
        n_unc_before += 1
        cnt = 0
        for c in range(P):
            if avail[e, c]:
                cnt += 1
                if cnt > floorL:
                    avail[e, c] = 0

    t = np.zeros((n, P), np.int32)
    for e in range(m):
        if colors[e] >= 0:
            continue
        u, v = edges[e, 0], edges[e, 1]
        for c in range(P):
            if avail[e, c]:
                t[u, c] += 1
                t[v, c] += 1

    # S.2: uniform assignment from each list
    assigned = np.full(m, -1, np.int32)
    n_assigned = 0
    for e in range(m):
        if colors[e] >= 0:
            continue
        ell = 0
        for c in range(P):
            if avail[e, c]:
                ell += 1
        if ell == 0:
            continue
        h = derive3_u64(seed, tag_assign, itr, np.uint64(e))
        k = int(h % np.uint64(ell))
        for c in range(P):
            if avail[e, c]:
                if k == 0:
                    assigned[e] = c
                    break
                k -= 1
        n_assigned += 1

    # S.3: adjacent equal assignments are undone
    cnt_vc = np.zeros((n, P), np.int32)
    for e in range(m):
        c = assigned[e]
        if c >= 0:
            cnt_vc[edges[e, 0], c] += 1
            cnt_vc[edges[e, 1], c] += 1
    n_conflict = 0
    n_eq_drop = 0
    n_retained = 0
    eq_clamps = 0
    retained_at = np.zeros((n, P), np.uint8)
    for e in range(m):
        c = assigned[e]
        if c < 0:
            continue
        u, v = edges[e, 0], edges[e, 1]
        if cnt_vc[u, c] >= 2 or cnt_vc[v, c] >= 2:
            n_conflict += 1
            continue
        # S.4: equalizing coin
        p = (1.0 - 1.0 / floorL) ** (t[u, c] + t[v, c] - 2)
        if p < em2:
            eq = 0.0
            eq_clamps += 1
        else:
            eq = 1.0 - 1.0 / (e2 * p)
        h = derive3_u64(seed, tag_eq, itr, np.uint64(e))
        if u01_u64(h) < eq:
            n_eq_drop += 1
            continue
        colors[e] = c
        retained_at[u, c] = 1
        retained_at[v, c] = 1
        n_retained += 1
        for cc in range(P):
            avail[e, cc] = 0

    # S.5 + S.6: vertex-color removals
    removed_at = np.zeros((n, P), np.uint8)
    vq_clamps = 0
    for v in range(n):
        for c in range(P):
            if t[v, c] == 0:
                continue
            if retained_at[v, c]:
                removed_at[v, c] = 1
                continue
            q = 1.0 - t[v, c] / (e2 * floorL)
            if q < 1.0 - em2:
                vq = 0.0
                vq_clamps += 1
            else:
                vq = 1.0 - (1.0 - em2) / q
            if vq > 0.0:
                h = derive4_u64(seed, tag_vq, itr, np.uint64(v), np.uint64(c))
                if u01_u64(h) < vq:
                    removed_at[v, c] = 1

    for e in range(m):
        if colors[e] >= 0:
            continue
        u, v = edges[e, 0], edges[e, 1]
        for c in range(P):
            if avail[e, c] and (removed_at[u, c] or removed_at[v, c]):
                avail[e, c] = 0

    # next-state summary
    n_unc_after = 0
    sum_lists = 0
    for e in range(m):
        if colors[e] >= 0:
            continue
        n_unc_after += 1
        for c in range(P):
            if avail[e, c]:
                sum_lists += 1
    t_next = np.zeros((n, P), np.int32)
    r_next = np.zeros((n, P), np.int32)
    for e in range(m):
        if colors[e] >= 0:
            continue
        u, v = edges[e, 0], edges[e, 1]
        for c in range(P):
            if avail[e, c]:
                t_next[u, c] += 1
                t_next[v, c] += 1
            if member[u, c]:
                r_next[v, c] += 1
            if member[v, c]:
                r_next[u, c] += 1
    max_t = 0
    max_r = 0
    for v in range(n):
        for c in range(P):
            if t_next[v, c] > max_t:
                max_t = t_next[v, c]
            if r_next[v, c] > max_r:
                max_r = r_next[v, c]
    mean_list = sum_lists / n_unc_after if n_unc_after > 0 else 0.0
    return (n_unc_before, n_assigned, n_conflict, n_eq_drop, n_retained,
            n_unc_after, mean_list, max_t, max_r, eq_clamps, vq_clamps)


def _iteration_numpy(indptr, nbr, eid, edges, colors, avail, member, floorL, itr, seed):
    n = indptr.shape[0] - 1
    m = edges.shape[0]
    P = avail.shape[1]
    unc = colors < 0
    n_unc_before = int(unc.sum())
    em2 = math.exp(-2.0)
    e2 = math.exp(2.0)

    cum = avail.cumsum(axis=1)
    avail &= (cum <= floorL).astype(avail.dtype)
    avail[~unc] = 0

    t = np.zeros((n, P), np.int32)
    rows = avail[unc].astype(np.int32)
    if rows.size:
        np.add.at(t, edges[unc, 0], rows)
        np.add.at(t, edges[unc, 1], rows)

    ell = avail.sum(axis=1).astype(np.int64)
    can = unc & (ell > 0)
    eids_u64 = np.arange(m, dtype=np.uint64)
    h = derive_arr(seed, np.uint64(TAG_ASSIGN), itr, eids_u64)
    k = np.zeros(m, dtype=np.int64)
    k[can] = (h[can] % ell[can].astype(np.uint64)).astype(np.int64)
    cum = avail.cumsum(axis=1)
    pick = np.argmax(cum > k[:, None], axis=1)
    assigned = np.where(can, pick, -1).astype(np.int32)
    n_assigned = int(can.sum())

    cnt_vc = np.zeros((n, P), np.int32)
    sel = assigned >= 0
    np.add.at(cnt_vc, (edges[sel, 0], assigned[sel]), 1)
    np.add.at(cnt_vc, (edges[sel, 1], assigned[sel]), 1)
    conflict = sel & (
        (cnt_vc[edges[:, 0], np.maximum(assigned, 0)] >= 2)
        | (cnt_vc[edges[:, 1], np.maximum(assigned, 0)] >= 2)
    )
    n_conflict = int(conflict.sum())
    surv = sel & ~conflict

    tu = t[edges[:, 0], np.maximum(assigned, 0)]
    tv = t[edges[:, 1], np.maximum(assigned, 0)]
    p = (1.0 - 1.0 / floorL) ** (tu + tv - 2.0)
    clamped = surv & (p < em2)
    eq_clamps = int(clamped.sum())
    eq = np.where(p < em2, 0.0, 1.0 - 1.0 / (e2 * p))
    coin = u01_arr(derive_arr(seed, np.uint64(TAG_EQCOIN), itr, eids_u64))
    eq_drop = surv & (coin < eq)
    n_eq_drop = int(eq_drop.sum())
    retained = surv & ~eq_drop
    n_retained = int(retained.sum())

    colors[retained] = assigned[retained]
    avail[retained] = 0
    retained_at = np.zeros((n, P), np.uint8)
    retained_at[edges[retained, 0], assigned[retained]] = 1
    retained_at[edges[retained, 1], assigned[retained]] = 1

    live = t > 0
    q = 1.0 - t / (e2 * floorL)
    vq_bad = live & (retained_at == 0) & (q < 1.0 - em2)
    vq_clamps = int(vq_bad.sum())
    vq = np.where(q < 1.0 - em2, 0.0, 1.0 - (1.0 - em2) / q)
    vgrid = np.arange(n, dtype=np.uint64).reshape(-1, 1)
    cgrid = np.arange(P, dtype=np.uint64).reshape(1, -1)
    coin_vc = u01_arr(derive_arr(seed, np.uint64(TAG_VQCOIN), itr, vgrid, cgrid))
    removed_at = (live & (retained_at == 1)) | (live & (retained_at == 0) & (coin_vc < vq))

    unc2 = colors < 0
    kill = removed_at[edges[:, 0]] | removed_at[edges[:, 1]]
    avail[unc2] &= ~kill[unc2]
    avail[~unc2] = 0

    n_unc_after = int(unc2.sum())
    sizes = avail.sum(axis=1)
    mean_list = float(sizes[unc2].mean()) if n_unc_after else 0.0
    t_next = np.zeros((n, P), np.int32)
    r_next = np.zeros((n, P), np.int32)
    rows = avail[unc2].astype(np.int32)
    if rows.size:
        np.add.at(t_next, edges[unc2, 0], rows)
        np.add.at(t_next, edges[unc2, 1], rows)
        mem = member.astype(np.int32)
        np.add.at(r_next, edges[unc2, 0], mem[edges[unc2, 1]])
        np.add.at(r_next, edges[unc2, 1], mem[edges[unc2, 0]])
    max_t = int(t_next.max()) if t_next.size else 0
    max_r = int(r_next.max()) if r_next.size else 0
    return (n_unc_before, n_assigned, n_conflict, n_eq_drop, n_retained,
            n_unc_after, mean_list, max_t, max_r, eq_clamps, vq_clamps)


def run_iteration(state: NibbleState, seed: int) -> tuple[NibbleState, IterationStats]:
    """Perform S.1-S.6 in place and advance the iteration counter."""
    if state.i > state.schedule.i_star:
        raise AecolorError(f"iteration {state.i} beyond schedule i*={state.schedule.i_star}")
    member = state.reserved.membership_matrix().astype(np.uint8)
    fn = _iteration_kernel if NUMBA_ENABLED else _iteration_numpy
    out = fn(
        state.graph.indptr, state.graph.nbr, state.graph.eid, state.graph.edges,
        state.colors, state.avail, member,
        state.floor_list_size(), np.uint64(state.i),
        np.uint64(seed & ((1 << 64) - 1)),
    )
    (n_before, n_assigned, n_conflict, n_eq, n_retained,
     n_after, mean_list, max_t, max_r, eq_clamps, vq_clamps) = out
    state.eq_clamp_warnings += int(eq_clamps)
    state.vq_clamp_warnings += int(vq_clamps)
    stats = IterationStats(
        iteration=state.i,
        n_uncolored_before=int(n_before),
        n_assigned=int(n_assigned),
        n_conflict_uncolored=int(n_conflict),
        n_eq_uncolored=int(n_eq),
        n_retained=int(n_retained),
        n_uncolored_after=int(n_after),
        mean_list_next=float(mean_list),
        max_t_next=int(max_t),
        max_r_next=int(max_r),
        eq_clamped=int(eq_clamps),
        vq_clamped=int(vq_clamps),
    )
    state.i += 1
    return state, stats


# ---------------------------------------------------------------------------
# property checks P(i) and significant cycles


@dataclass(frozen=True)
class PairRecord:
    c: int
    d: int
    compatible: bool
    multiplicity: float
    reserved_count: int
    free_count: int
    significant: bool


@dataclass
class PropertyReport:
    i: int
    list_violations: list
    t_violations: list
    r_violations: list
    cycle_violations: list
    registry_tracked: bool

    @property
    def ok(self) -> bool:
        return not (self.list_violations or self.t_violations
                    or self.r_violations or self.cycle_violations)

    def counts(self):
        return (len(self.list_violations), len(self.t_violations),
                len(self.r_violations), len(self.cycle_violations))


def _edge_compat_masks(state: NibbleState) -> tuple[np.ndarray, np.ndarray]:
    """(free, reserved) boolean (m, palette): free = color on the live list,
    reserved = color in S_u cap S_v. Meaningful for uncolored edges."""
    member = state.reserved.membership_matrix()
    res = member[state.graph.edges[:, 0]] & member[state.graph.edges[:, 1]]
    return state.avail.astype(bool), res


def significant_pairs(state: NibbleState, cycle_index: int) -> list[PairRecord]:
    """Candidate color pairs of a registry cycle with compatibility,
    multiplicity and reserved/free accounting at the state's iteration index.

    Cycles whose colored edges carry 3+ distinct colors are compatible with no
    pair; with 1-2 colors the pair is pinned down; fully uncolored cycles are
    screened through list/reservation intersections. Pairs where one color
    contributes no compatibility anywhere are skipped: their multiplicity is
    the cycle length (single-edge arcs only), which desk-scale psi values
    never reject, but their free count is covered by the two-sided pairs.
    """
    if state.registry is None:
        raise AecolorError("state has no cycle registry")
    reg = state.registry
    eids = reg.cycle_edges(cycle_index)
    free, res = _edge_compat_masks(state)
    palette = state.palette

    colored = [int(state.colors[e]) for e in eids if state.colors[e] != UNCOLORED]
    distinct = sorted(set(colored))
    if len(distinct) >= 3:
        return []

    def k_mask(e: int) -> np.ndarray:
        if state.colors[e] != UNCOLORED:
            mask = np.zeros(palette, dtype=bool)
            mask[state.colors[e]] = True
            return mask
        return free[e] | res[e]

    masks = [k_mask(int(e)) for e in eids]
    candidates: set[tuple[int, int]] = set()
    if len(distinct) == 2:
        candidates.add((distinct[0], distinct[1]))
    elif len(distinct) == 1:
        c0 = distinct[0]
        not_covered = [mk for mk in masks if not mk[c0]]
        if not_covered:
            dd = np.logical_and.reduce(not_covered)
        else:
            dd = np.logical_or.reduce(masks)
        for d in np.nonzero(dd)[0]:
            if int(d) != c0:
                candidates.add((min(c0, int(d)), max(c0, int(d))))
    else:
        sizes = [int(mk.sum()) for mk in masks]
        star = int(np.argmin(sizes))
        for c in np.nonzero(masks[star])[0]:
            c = int(c)
            not_covered = [mk for mk in masks if not mk[c]]
            if not_covered:
                dd = np.logical_and.reduce(not_covered)
            else:
                dd = np.logical_or.reduce(masks)
            for d in np.nonzero(dd)[0]:
                if int(d) != c:
                    candidates.add((min(c, int(d)), max(c, int(d))))

    psi = float(state.schedule.psi[min(state.i, state.schedule.i_star + 1)])
    out = []
    for c, d in sorted(candidates):
        labels = []
        compatible = True
        n_res = 0
        n_free = 0
        for e in eids:
            e = int(e)
            col = int(state.colors[e])
            if col != UNCOLORED:
                if col == c:
                    labels.append(LABEL_C)
                elif col == d:
                    labels.append(LABEL_D)
                else:
                    labels.append(LABEL_NONE)
                    compatible = False
                continue
            is_res = bool(res[e, c] or res[e, d])
            is_free = bool(free[e, c] or free[e, d])
            cc = bool(state.colors[e] == c) or bool(res[e, c] or free[e, c])
            dc = bool(res[e, d] or free[e, d])
            if cc and dc:
                labels.append(LABEL_BOTH)
            elif cc:
                labels.append(LABEL_C)
            elif dc:
                labels.append(LABEL_D)
            else:
                labels.append(LABEL_NONE)
                compatible = False
            if is_res:
                n_res += 1
            elif is_free:
                n_free += 1
        mult = cycle_multiplicity(labels) if compatible else INCOMPATIBLE
        significant = compatible and mult <= psi and n_res <= psi
        out.append(PairRecord(c, d, compatible, mult, n_res, n_free, significant))
    return out


def check_properties(state: NibbleState) -> PropertyReport:
    """Check P(i-1) for the state's upcoming iteration index i: list sizes at
    least L_i, t at most T_i, r at most R_i, and free counts of significant
    registry cycles at least Lambda_i."""
    idx = state.i
    sch = state.schedule
    if idx > sch.i_star + 1:
        raise AecolorError(f"state index {idx} beyond schedule arrays")
    unc = state.uncolored()
    sizes = state.list_sizes()
    lv = [int(e) for e in np.nonzero(unc & (sizes < sch.L[idx]))[0]]
    t = state.t_counts()
    tv = [(int(v), int(c)) for v, c in zip(*np.nonzero(t > sch.T[idx]))]
    r = state.r_counts()
    rv = [(int(v), int(c)) for v, c in zip(*np.nonzero(r > sch.R[idx]))]
    cv = []
    if state.registry is not None:
        lam = float(sch.lam[idx])
        for k in range(state.registry.n_cycles):
            for rec in significant_pairs(state, k):
                if rec.significant and rec.free_count < lam:
                    cv.append((k, rec.c, rec.d, rec.free_count))
    return PropertyReport(
        i=idx, list_violations=lv, t_violations=tv, r_violations=rv,
        cycle_violations=cv, registry_tracked=state.registry is not None,
    )


# ---------------------------------------------------------------------------
# full phase-two driver


@dataclass
class NibblePolicy:
    max_restarts: int = 20
    lmax: int | None = None  # default 2 * girth
    registry_cap: int = 10**6
    build_registry: bool = True
    debug_recount: bool = False


@dataclass
class NibbleResult:
    success: bool
    coloring: EdgeColoring | None
    trace: list
    reason: str
    final_report: PropertyReport | None
    b_violations: dict
    restarts_used: int

    def trace_dicts(self) -> list[dict]:
        return [s.to_dict() for s in self.trace]


def _check_b_conditions(state: NibbleState) -> dict:
    """Final-state checks mirroring the target partial-coloring properties:
    color provenance (B.1), residual reserved-neighbor counts under the
    stopping threshold for reserved colors (B.2), and >= 3 uncolored edges on
    every registry cycle completable into a bicolored one via reserved colors
    (B.3)."""
    g = state.graph
    member = state.reserved.membership_matrix()
    colored = ~state.uncolored()
    b1 = []
    for e in np.nonzero(colored)[0]:
        c = int(state.colors[e])
        u, v = int(g.edges[e, 0]), int(g.edges[e, 1])
        if member[u, c] or member[v, c]:
            b1.append(int(e))
    thr = state.schedule.threshold
    r = state.r_counts()
    b2 = []
    for v in range(g.n):
        for c in np.nonzero(member[v])[0]:
            if r[v, int(c)] > thr:
                b2.append((v, int(c)))
    b3 = []
    if state.registry is not None:
        _, res = _edge_compat_masks(state)
        for k in range(state.registry.n_cycles):
            eids = [int(e) for e in state.registry.cycle_edges(k)]
            unc = [e for e in eids if state.colors[e] == UNCOLORED]
            if len(unc) >= 3:
                continue
            colored_cols = sorted({int(state.colors[e]) for e in eids if state.colors[e] != UNCOLORED})
            if len(colored_cols) > 2:
                continue
            masks = []
            for e in unc:
                masks.append(res[e])
            # any pair {c,d} covering colored colors and all reserved masks?
            palette = state.palette
            cand_c = colored_cols if colored_cols else list(range(palette))
            found = False
            for c in cand_c:
                rest = [mk for mk in masks]
                if len(colored_cols) == 2:
                    dchoices = [x for x in colored_cols if x != c]
                else:
                    dchoices = list(range(palette))
                for d in dchoices:
                    if c == d:
                        continue
                    ok = all(mk[c] or mk[d] for mk in rest)
                    if ok and all(col in (c, d) for col in colored_cols):
                        found = True
                        break
                if found:
                    break
            if found:
                b3.append((k, len(unc)))
    return {"b1": b1, "b2": b2, "b3": b3}


def run_nibble(g: Graph, reserved: ReservedSets, schedule: ScheduleParams, seed: int,
               policy: NibblePolicy | None = None) -> NibbleResult:
    """Run i* iterations with per-iteration property checks and restarts,
    then verify the final-state conditions. Failures are reported, not raised."""
    policy = policy or NibblePolicy()
    registry = None
    if policy.build_registry:
        gl = girth(g)
        lmax = policy.lmax if policy.lmax is not None else (2 * int(gl) if gl != math.inf else 0)
        if lmax >= 3:
            try:
                registry = build_cycle_registry(g, lmax, policy.registry_cap)
            except RegistryCapError as exc:
                return NibbleResult(False, None, [], f"registry: {exc}", None, {}, 0)
    state = init_state(g, reserved, schedule, registry)
    rep0 = check_properties(state)
    if not rep0.ok:
        return NibbleResult(False, None, [], "P(0) violated (invalid reservation for this schedule)",
                            rep0, {}, 0)
    trace: list[IterationStats] = []
    restarts = 0
    for i in range(1, schedule.i_star + 1):
        done = False
        last_report = None
        for attempt in range(policy.max_restarts + 1):
            trial = state.copy()
            _, stats = run_iteration(trial, derive(seed, i, attempt))
            if policy.debug_recount:
                # the kernel's summary counters must match a from-scratch recount
                assert stats.max_t_next == int(trial.t_counts().max(initial=0))
                assert stats.max_r_next == int(trial.r_counts().max(initial=0))
            rep = check_properties(trial)
            last_report = rep
            if rep.ok:
                state = trial
                trace.append(stats)
                restarts += attempt
                done = True
                break
        if not done:
            return NibbleResult(False, None, trace,
                                f"P({i}) violated after {policy.max_restarts} restarts",
                                last_report, {}, restarts)
    b = _check_b_conditions(state)
    ok = not (b["b1"] or b["b2"] or b["b3"])
    return NibbleResult(ok, state.coloring(), trace,
                        "" if ok else "final-state conditions violated",
                        None, b, restarts)


# ---------------------------------------------------------------------------
# calibration helper: the focal-edge retention experiment


@kernel
def _retention_kernel(list_size, t_u, t_v, n_trials, seed):
    tag_assign = np.uint64(TAG_ASSIGN)
    tag_eq = np.uint64(TAG_EQCOIN)
    em2 = math.exp(-2.0)
    e2 = math.exp(2.0)
    n_adj = (t_u - 1) + (t_v - 1)
    p = (1.0 - 1.0 / list_size) ** (t_u + t_v - 2)
    eq = 0.0 if p < em2 else 1.0 - 1.0 / (e2 * p)
    kept = 0
    for trial in range(n_trials):
        tr = np.uint64(trial)
        h = derive3_u64(seed, tag_assign, tr, np.uint64(0))
        c = int(h % np.uint64(list_size))
        clash = False
        for j in range(n_adj):
            h = derive3_u64(seed, tag_assign, tr, np.uint64(j + 1))
            if int(h % np.uint64(list_size)) == c:
                clash = True
                break
        if clash:
            continue
        h = derive3_u64(seed, tag_eq, tr, np.uint64(0))
        if u01_u64(h) < eq:
            continue
        kept += 1
    return kept


def retention_trials(list_size: int, t_u: int, t_v: int, n_trials: int, seed: int) -> int:
    """Simulate S.2-S.4 at a focal edge whose endpoints carry t_u and t_v
    list-sharing edges (lists all of `list_size`); returns how many trials
    retained the assigned color. The retention probability is e^-2 by the
    equalizing construction."""
    return int(_retention_kernel(list_size, t_u, t_v, n_trials,
                                 np.uint64(seed & ((1 << 64) - 1))))
