"""Reference algorithm: greedy proper coloring with local uncoloring repair
whenever a freshly colored edge closes a bicolored cycle, plus a batch
comparison runner against the full three-phase pipeline.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .coloring import UNCOLORED, EdgeColoring, find_bicolored_cycles, properness_violations
from .finisher import build_final_lists, complete_coloring, final_gamma
from .errors import AecolorError, FinisherError, ReservationError, ScheduleError
from .graphs import Graph, girth
from .nibble import NibblePolicy, run_nibble
from .reservation import resample_until_valid
from .rng import TAG_REPAIR, derive
from .schedule import compute_schedule, palette_size


@dataclass
class RepairResult:
    success: bool
    coloring: EdgeColoring | None
    steps: int


def _pair_cycle_edges(g: Graph, colors, e: int, c: int, d: int):
    """Edge list of the {c,d}-colored cycle through e, or None."""
    cyc = [e]
    cur, prev = int(g.edges[e, 1]), e
    while True:
        nxt, nxtv = -1, -1
        for j in range(g.indptr[cur], g.indptr[cur + 1]):
            e2 = int(g.eid[j])
            if e2 == prev:
                continue
            if colors[e2] == c or colors[e2] == d:
                nxt, nxtv = e2, int(g.nbr[j])
                break
        if nxt == -1:
            return None
        if nxt == e:
            return cyc
        cyc.append(nxt)
        cur, prev = nxtv, nxt


def repair_color(g: Graph, colors_budget: int, seed: int, max_steps: int = 0) -> RepairResult:
    """Color a random uncolored edge with a random non-conflicting color; when
    that closes a bicolored cycle, uncolor the edge and the colored edges on
    the half of the cycle nearest to it, and keep going."""
    if max_steps <= 0:
        max_steps = 200 * max(g.m, 1)
    colors = np.full(g.m, UNCOLORED, dtype=np.int32)
    n_uncolored = g.m
    steps = 0
    while n_uncolored > 0 and steps < max_steps:
        steps += 1
        k = derive(seed, TAG_REPAIR, steps, 0) % n_uncolored
        e = int(np.nonzero(colors == UNCOLORED)[0][k])
        u, v = int(g.edges[e, 0]), int(g.edges[e, 1])
        banned = set()
        for w in (u, v):
            for e2 in g.incident_edges(w):
                if colors[e2] != UNCOLORED:
                    banned.add(int(colors[e2]))
        avail = [c for c in range(colors_budget) if c not in banned]
        if not avail:
            # no proper choice; free a random adjacent edge instead
            adj = [int(e2) for w in (u, v) for e2 in g.incident_edges(w)
                   if colors[e2] != UNCOLORED]
            drop = adj[derive(seed, TAG_REPAIR, steps, 1) % len(adj)]
            colors[drop] = UNCOLORED
            n_uncolored += 1
            continue
        c = avail[derive(seed, TAG_REPAIR, steps, 2) % len(avail)]
        colors[e] = c
        n_uncolored -= 1
        ds = sorted({int(colors[e2]) for w in (u, v) for e2 in g.incident_edges(w)
                     if colors[e2] != UNCOLORED and colors[e2] != c})
        for d in ds:
            cyc = _pair_cycle_edges(g, colors, e, c, d)
            if cyc is None:
                continue
            # uncolor e plus the nearer half of the cycle
            half = cyc[: (len(cyc) + 1) // 2]
            for e2 in half:
                if colors[e2] != UNCOLORED:
                    colors[e2] = UNCOLORED
                    n_uncolored += 1
            break
    if n_uncolored > 0:
        return RepairResult(False, None, steps)
    chi = EdgeColoring(colors_budget, colors)
    assert not properness_violations(g, chi)
    assert not find_bicolored_cycles(g, chi)
    return RepairResult(True, chi, steps)


# ---------------------------------------------------------------------------
# batch comparison

CSV_COLUMNS = ["algo", "n", "d", "girth", "eps_or_K", "seed",
               "colours_used", "success", "rounds", "millis"]


def run_pipeline(g: Graph, eps: float, seed: int,
                 policy: NibblePolicy | None = None,
                 reservation_rounds: int = 1000):
    """reservation -> nibble -> finisher; returns (coloring or None, stage,
    detail, rounds). `stage` names how far the run got."""
    try:
        sch = compute_schedule(eps, g.max_degree, int(min(girth(g), 2**30)))
    except ScheduleError as exc:
        return None, "schedule", str(exc), 0
    try:
        reserved, rounds = resample_until_valid(g, eps, derive(seed, 1), reservation_rounds)
    except ReservationError as exc:
        return None, "reservation", str(exc), 0
    result = run_nibble(g, reserved, sch, derive(seed, 2), policy)
    if not result.success:
        return None, "nibble", result.reason, len(result.trace)
    try:
        lists = build_final_lists(g, result.coloring, reserved, final_gamma(eps))
        chi = complete_coloring(g, result.coloring, lists, derive(seed, 3))
    except (FinisherError, AecolorError) as exc:
        return None, "finisher", str(exc), len(result.trace)
    return chi, "done", "", len(result.trace)


def compare(g: Graph, eps: float, seeds) -> list[dict]:
    """One row per (algorithm, seed): the repair baseline gets the same color
    budget as the pipeline's palette."""
    rows = []
    d = g.max_degree
    gir = girth(g)
    gir_str = int(gir) if gir != float("inf") else -1
    budget = palette_size(eps, d)
    for seed in seeds:
        t0 = time.perf_counter()
        rep = repair_color(g, budget, derive(seed, TAG_REPAIR))
        ms = (time.perf_counter() - t0) * 1000.0
        rows.append({
            "algo": "repair", "n": g.n, "d": d, "girth": gir_str,
            "eps_or_K": budget, "seed": seed,
            "colours_used": rep.coloring.colors_used() if rep.success else 0,
            "success": int(rep.success), "rounds": rep.steps,
            "millis": round(ms, 3),
        })
        t0 = time.perf_counter()
        chi, stage, _, rounds = run_pipeline(g, eps, seed)
        ms = (time.perf_counter() - t0) * 1000.0
        rows.append({
            "algo": "nibble", "n": g.n, "d": d, "girth": gir_str,
            "eps_or_K": eps, "seed": seed,
            "colours_used": chi.colors_used() if chi is not None else 0,
            "success": int(chi is not None), "rounds": rounds,
            "millis": round(ms, 3),
        })
    rows.sort(key=lambda r: (r["n"], r["d"], r["seed"], r["algo"]))
    return rows
