"""Per-vertex reserved color sets: independent Bernoulli sampling plus
event-driven local resampling until the three reservation bounds hold.

For palette (1+eps)*Delta the membership probability is (1+eps)^{-1/2} eps/3.
The bounds checked are |S_v| <= 4 eps Delta/9 per vertex, |S_u cap S_v| >=
eps^2 Delta/18 per edge, and |{u in N(v): c in S_u}| <= eps Delta/2 per
vertex-color pair. Violated events trigger a resample of every incident
vertex (both endpoints for an edge event; v and all of N(v) for a
vertex-color event), with fresh draws keyed by the round index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._accel import NUMBA_ENABLED, kernel
from .errors import GraphFormatError, ReservationError
from .graphs import Graph
from .rng import TAG_RESERVE, derive_arr, derive4_u64, u01_arr, u01_u64
from .schedule import palette_size


def reserve_probability(eps: float) -> float:
    return (1.0 + eps) ** -0.5 * eps / 3.0


@dataclass
class ReservedSets:
    """Bitmask rows: bit c of masks[v] set iff color c is reserved at v."""

    palette_size: int
    eps: float
    masks: np.ndarray  # (n, W) uint64

    @property
    def n(self) -> int:
        return int(self.masks.shape[0])

    @property
    def words(self) -> int:
        return int(self.masks.shape[1])

    def copy(self) -> "ReservedSets":
        return ReservedSets(self.palette_size, self.eps, self.masks.copy())

    def member(self, v: int, c: int) -> bool:
        return bool((self.masks[v, c >> 6] >> np.uint64(c & 63)) & np.uint64(1))

    def set_sizes(self) -> np.ndarray:
        return np.bitwise_count(self.masks).sum(axis=1).astype(np.int64)

    def sets(self) -> list[np.ndarray]:
        out = []
        for v in range(self.n):
            cols = []
            for w in range(self.words):
                word = int(self.masks[v, w])
                while word:
                    b = word & -word
                    cols.append(64 * w + b.bit_length() - 1)
                    word ^= b
            out.append(np.array(cols, dtype=np.int32))
        return out

    def shared_colors(self, u: int, v: int) -> np.ndarray:
        """Sorted colors of S_u cap S_v."""
        inter = self.masks[u] & self.masks[v]
        cols = []
        for w in range(self.words):
            word = int(inter[w])
            while word:
                b = word & -word
                cols.append(64 * w + b.bit_length() - 1)
                word ^= b
        return np.array(cols, dtype=np.int32)

    def membership_matrix(self) -> np.ndarray:
        """(n, palette) boolean view of the masks."""
        bits = np.unpackbits(self.masks.view(np.uint8), bitorder="little", axis=1)
        return bits[:, : self.palette_size].astype(bool)

    @classmethod
    def from_sets(cls, palette: int, eps: float, sets) -> "ReservedSets":
        n = len(sets)
        words = max((palette + 63) // 64, 1)
        masks = np.zeros((n, words), dtype=np.uint64)
        for v, cols in enumerate(sets):
            for c in cols:
                c = int(c)
                if not 0 <= c < palette:
                    raise GraphFormatError(f"reserved color {c} outside palette [0, {palette})")
                masks[v, c >> 6] |= np.uint64(1) << np.uint64(c & 63)
        return cls(palette, eps, masks)

    def to_dict(self) -> dict:
        return {
            "palette_size": int(self.palette_size),
            "sets": [[int(c) for c in row] for row in self.sets()],
        }

    @classmethod
    def from_dict(cls, data: dict, eps: float = float("nan")) -> "ReservedSets":
        return cls.from_sets(int(data["palette_size"]), eps, data["sets"])


def save_reserved(rs: ReservedSets, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        json.dump(rs.to_dict(), f)
        f.write("\n")


def load_reserved(path, eps: float = float("nan")) -> ReservedSets:
    with open(path, encoding="ascii") as f:
        return ReservedSets.from_dict(json.load(f), eps)


# ---------------------------------------------------------------------------
# sampling


def _sample_masks_numpy(n: int, palette: int, p: float, seed: int, round_: int, which=None) -> np.ndarray:
    vs = np.arange(n, dtype=np.uint64).reshape(-1, 1) if which is None else np.asarray(which, dtype=np.uint64).reshape(-1, 1)
    cs = np.arange(palette, dtype=np.uint64).reshape(1, -1)
    h = derive_arr(seed, np.uint64(TAG_RESERVE), np.uint64(round_), vs, cs)
    bits = u01_arr(h) < p
    words = max((palette + 63) // 64, 1)
    padded = np.zeros((bits.shape[0], words * 64), dtype=bool)
    padded[:, :palette] = bits
    weights = (np.uint64(1) << np.arange(64, dtype=np.uint64)).reshape(1, 1, 64)
    return (padded.reshape(bits.shape[0], words, 64).astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)


def sample_reserved_sets(g: Graph, eps: float, seed: int) -> ReservedSets:
    """Independent Bernoulli((1+eps)^{-1/2} eps/3) membership per (v, c)."""
    if not 0 <= eps <= 1:
        raise ReservationError(f"eps must be in (0, 1], got {eps}")
    palette = palette_size(eps, g.max_degree)
    p = reserve_probability(eps)
    masks = _sample_masks_numpy(g.n, palette, p, seed, 0)
    return ReservedSets(palette, eps, masks)


# ---------------------------------------------------------------------------
# checking


@dataclass(frozen=True)
class ReservationReport:
    a_threshold: float
    b_threshold: float
    c_threshold: float
    a_violations: np.ndarray  # vertices with |S_v| too big
    b_violations: np.ndarray  # edge ids with small intersection
    c_violations: np.ndarray  # (v, c) rows with crowded neighborhoods

    @property
    def ok(self) -> bool:
        return not (len(self.a_violations) or len(self.b_violations) or len(self.c_violations))

    def counts(self) -> tuple[int, int, int]:
        return len(self.a_violations), len(self.b_violations), len(self.c_violations)


def check_reservation(g: Graph, rs: ReservedSets) -> ReservationReport:
    """List every violated size/intersection/crowding event; empty iff valid."""
    delta = g.max_degree
    eps = rs.eps
    thr_a = 4.0 * eps * delta / 9.0
    thr_b = eps * eps * delta / 18.0
    thr_c = eps * delta / 2.0

    sizes = np.bitwise_count(rs.masks).sum(axis=1)
    a_viol = np.nonzero(sizes > thr_a)[0].astype(np.int32)

    inter = rs.masks[g.edges[:, 0]] & rs.masks[g.edges[:, 1]]
    shared = np.bitwise_count(inter).sum(axis=1)
    b_viol = np.nonzero(shared < thr_b)[0].astype(np.int32)

    member = rs.membership_matrix()
    if g.m:
        gathered = member[g.nbr].astype(np.int32)
        counts = np.add.reduceat(gathered, g.indptr[:-1], axis=0)
        counts[g.indptr[:-1] == g.indptr[1:]] = 0
    else:
        counts = np.zeros((g.n, rs.palette_size), dtype=np.int32)
    vv, cc = np.nonzero(counts > thr_c)
    c_viol = np.stack([vv, cc], axis=1).astype(np.int32) if vv.size else np.empty((0, 2), np.int32)
    return ReservationReport(thr_a, thr_b, thr_c, a_viol, b_viol, c_viol)


# ---------------------------------------------------------------------------
# resampling loop


@kernel
def _resample_loop(indptr, nbr, edges, masks, palette, p, eps, delta, seed, max_rounds):
    n = masks.shape[0]
    words = masks.shape[1]
    thr_a = 4.0 * eps * delta / 9.0
    thr_b = eps * eps * delta / 18.0
    thr_c = eps * delta / 2.0
    m = edges.shape[0]
    bad = np.zeros(n, np.uint8)
    counts = np.zeros((n, palette), np.int32)
    one = np.uint64(1)
    tag = np.uint64(TAG_RESERVE)
    for rnd in range(1, max_rounds + 1):
        # draw: round 1 samples everyone, later rounds only flagged vertices
        for v in range(n):
            if rnd > 1 and bad[v] == 0:
                continue
            for w in range(words):
                masks[v, w] = np.uint64(0)
            for c in range(palette):
                h = derive4_u64(seed, tag, np.uint64(rnd - 1), np.uint64(v), np.uint64(c))
                if u01_u64(h) < p:
                    masks[v, c >> 6] |= one << np.uint64(c & 63)
        bad[:] = 0
        nviol = 0
        # A events
        for v in range(n):
            size = 0
            for w in range(words):
                size += popcount64(masks[v, w])
            if size > thr_a:
                bad[v] = 1
                nviol += 1
        # B events
        for e in range(m):
            u, v = edges[e, 0], edges[e, 1]
            shared = 0
            for w in range(words):
                shared += popcount64(masks[u, w] & masks[v, w])
            if shared < thr_b:
                bad[u] = 1
                bad[v] = 1
                nviol += 1
        # C events
        counts[:] = 0
        for v in range(n):
            for j in range(indptr[v], indptr[v + 1]):
                u = nbr[j]
                for c in range(palette):
                    if (masks[u, c >> 6] >> np.uint64(c & 63)) & one:
                        counts[v, c] += 1
        for v in range(n):
            hit = False
            for c in range(palette):
                if counts[v, c] > thr_c:
                    hit = True
                    nviol += 1
            if hit:
                bad[v] = 1
                for j in range(indptr[v], indptr[v + 1]):
                    bad[nbr[j]] = 1
        if nviol == 0:
            return rnd, 0
    return max_rounds, 1


@kernel
def popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


def resample_until_valid(g: Graph, eps: float, seed: int, max_rounds: int):
    """Sample, then locally resample vertices of violated events until the
    checker is clean. Returns (ReservedSets, rounds); raises ReservationError
    with the final report when max_rounds is exhausted."""
    if not 0 < eps <= 1:
        raise ReservationError(f"eps must be in (0, 1], got {eps}")
    palette = palette_size(eps, g.max_degree)
    words = max((palette + 63) // 64, 1)
    masks = np.zeros((g.n, words), dtype=np.uint64)
    p = reserve_probability(eps)
    rounds, failed = _resample_loop(
        g.indptr, g.nbr, g.edges, masks, palette, p, eps, g.max_degree,
        np.uint64(seed & ((1 << 64) - 1)), max_rounds,
    )
    rs = ReservedSets(palette, eps, masks)
    if failed:
        report = check_reservation(g, rs)
        raise ReservationError(
            f"reservation bounds not met after {max_rounds} rounds "
            f"(violations A/B/C: {report.counts()})",
            report=report,
        )
    report = check_reservation(g, rs)
    assert report.ok, "resample loop returned an invalid reservation"
    return rs, int(rounds)
