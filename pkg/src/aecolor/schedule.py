"""Numeric sequences driving the nibble and the weighted-LLL condition checker.

The core recursions, from the starting values L_1 = (1+eps/9)*Delta,
T_1 = Delta, R_1 = eps*Delta/2:

    L_{i+1} = (1-e^-2)^2 L_i - L_i^{2/3}
    T_{i+1} = (1-e^-2)^2 T_i + T_i^{2/3}
    R_{i+1} = (1-e^-2)   R_i + R_i^{2/3}

The iteration count i* is the smallest i with R_{i+1} < (eps^2/18)^2 Delta/128.
Note the R map has an attracting fixpoint at e^6 ~ 403.43, so the threshold is
reachable only when (eps^2/18)^2 Delta/128 > e^6, i.e. Delta > ~1.68e7/eps^4;
below that `compute_schedule` raises unless an explicit iteration cap is given
(desk-scale runs use the cap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ScheduleError

E_MINUS_2 = math.exp(-2.0)
ETA = (1.0 - E_MINUS_2) ** 2
DEFAULT_GUARD = 1000


def palette_size(eps: float, delta: int) -> int:
    return math.ceil((1.0 + eps) * delta)


def stopping_threshold(eps: float, delta: int) -> float:
    return (eps * eps / 18.0) ** 2 * delta / 128.0


def _pow23(x: float) -> float:
    # x^(2/3) via cbrt(x)^2: real-valued continuation for x < 0, so the L
    # sequence stays NaN-free after it crosses zero at desk scales
    return math.copysign(abs(x) ** (1.0 / 3.0), x) ** 2


@dataclass(frozen=True)
class ScheduleParams:
    """All sequences for i = 1..i_star+1; arrays are indexed by i directly
    (position 0 is unused and holds NaN)."""

    eps: float
    delta: int
    girth: int
    k: int
    eta: float
    i_star: int
    capped: bool
    L: np.ndarray
    T: np.ndarray
    R: np.ndarray
    L_primed: np.ndarray
    T_primed: np.ndarray
    R_primed: np.ndarray
    psi: np.ndarray
    lam: np.ndarray

    @property
    def palette(self) -> int:
        return palette_size(self.eps, self.delta)

    @property
    def threshold(self) -> float:
        return stopping_threshold(self.eps, self.delta)


def find_i_star(eps: float, delta: int, guard: int = DEFAULT_GUARD):
    """Smallest i with R_{i+1} below the stopping threshold, or None within
    the guard. Returns (i_star_or_None, min_R_reached)."""
    thr = stopping_threshold(eps, delta)
    r = eps * delta / 2.0
    if r < thr:
        return 0, r
    for i in range(1, guard + 1):
        r = (1.0 - E_MINUS_2) * r + _pow23(r)
        if r < thr:
            return i, r
    return None, r


def compute_schedule(eps: float, delta: int, girth: int,
                     max_iterations: int | None = None,
                     guard: int = DEFAULT_GUARD) -> ScheduleParams:
    """Evaluate the recursions and the stopping rule.

    When the stopping threshold is unreachable within `guard` steps (the usual
    case below Delta ~ 1.7e7/eps^4), a ScheduleError is raised unless
    `max_iterations` caps the iteration count explicitly.
    """
    if eps <= 0:
        raise ScheduleError("eps must be > 0")
    if delta < 1:
        raise ScheduleError("delta must be >= 1")
    if girth < 3:
        raise ScheduleError("girth must be >= 3")
    natural, min_r = find_i_star(eps, delta, guard)
    if natural is None and max_iterations is None:
        raise ScheduleError(
            f"stopping rule unreachable within {guard} iterations "
            f"(min R reached {min_r:.6g} vs threshold {stopping_threshold(eps, delta):.6g}; "
            f"the R recursion cannot go below e^2 cubed = {math.exp(6):.6g})",
            min_reached=min_r,
            threshold=stopping_threshold(eps, delta),
        )
    if natural is None:
        i_star, capped = max_iterations, True
    elif max_iterations is not None and max_iterations < natural:
        i_star, capped = max_iterations, True
    else:
        i_star, capped = natural, False

    size = i_star + 2
    L = np.full(size, np.nan)
    T = np.full(size, np.nan)
    R = np.full(size, np.nan)
    L[1] = (1.0 + eps / 9.0) * delta
    T[1] = float(delta)
    R[1] = eps * delta / 2.0
    for i in range(1, i_star + 1):
        L[i + 1] = ETA * L[i] - _pow23(L[i])
        T[i + 1] = ETA * T[i] + _pow23(T[i])
        R[i + 1] = (1.0 - E_MINUS_2) * R[i] + _pow23(R[i])

    Lp, Tp, Rp = primed_arrays(eps, delta, i_star)

    k = girth // 2
    psi = np.full(size, np.nan)
    lam = np.full(size, np.nan)
    for i in range(1, i_star + 2):
        psi[i] = 4.0 ** (2 + i_star - i)
    psi1 = 4.0 ** (1 + i_star)
    for i in range(1, i_star + 2):
        lam[i] = 2.0 * k / 2.0 ** (i - 1) - 4.0 * psi1 * i

    for a in (L, T, R, Lp, Tp, Rp, psi, lam):
        a.setflags(write=False)
    return ScheduleParams(
        eps=eps, delta=delta, girth=girth, k=k, eta=ETA,
        i_star=i_star, capped=capped,
        L=L, T=T, R=R, L_primed=Lp, T_primed=Tp, R_primed=Rp,
        psi=psi, lam=lam,
    )


def primed_arrays(eps: float, delta: int, i_star: int):
    """Closed forms L'_{i+1} = eta^i L_1, T'_{i+1} = eta^i T_1,
    R'_{i+1} = eta^{i/2} R_1, for i = 0..i_star."""
    size = i_star + 2
    Lp = np.full(size, np.nan)
    Tp = np.full(size, np.nan)
    Rp = np.full(size, np.nan)
    l1 = (1.0 + eps / 9.0) * delta
    t1 = float(delta)
    r1 = eps * delta / 2.0
    for i in range(0, i_star + 1):
        Lp[i + 1] = ETA**i * l1
        Tp[i + 1] = ETA**i * t1
        Rp[i + 1] = ETA ** (i / 2.0) * r1
    return Lp, Tp, Rp


def primed_sequences(params: ScheduleParams):
    return params.L_primed, params.T_primed, params.R_primed


@dataclass(frozen=True)
class LemmaCheck:
    i: int
    name: str
    ok: bool
    value: float
    bound: float


@dataclass(frozen=True)
class ScheduleLemmaReport:
    entries: list
    max_ratio_deviation: float

    @property
    def all_ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def failures(self) -> list:
        return [e for e in self.entries if not e.ok]


def verify_schedule_lemmas(params: ScheduleParams) -> ScheduleLemmaReport:
    """Evaluate, for 1 <= i <= i*+1: positivity (X_i >= eps^8 * Delta),
    closeness |X_i - X'_i| <= (X'_i)^{5/6} for X in {L, T, R}, and the ratio
    bound L_i/T_i <= 1 + eps/9. Failing checks are report entries, not errors."""
    eps, delta = params.eps, params.delta
    eps1 = eps**8
    entries = []
    max_dev = 0.0
    for i in range(1, params.i_star + 2):
        for name, seq, primed in (
            ("L", params.L, params.L_primed),
            ("T", params.T, params.T_primed),
            ("R", params.R, params.R_primed),
        ):
            x, xp = float(seq[i]), float(primed[i])
            entries.append(LemmaCheck(i, f"{name}_positive", x >= eps1 * delta, x, eps1 * delta))
            bound = xp ** (5.0 / 6.0) if xp >= 0 else float("nan")
            entries.append(LemmaCheck(i, f"{name}_close", abs(x - xp) <= bound, abs(x - xp), bound))
        ratio = float(params.L[i] / params.T[i])
        entries.append(LemmaCheck(i, "ratio_le", ratio <= 1.0 + eps / 9.0, ratio, 1.0 + eps / 9.0))
        max_dev = max(max_dev, abs(ratio - (1.0 + eps / 9.0)))
    return ScheduleLemmaReport(entries=entries, max_ratio_deviation=max_dev)


# ---------------------------------------------------------------------------
# weighted local lemma checker


@dataclass(frozen=True)
class LllEvent:
    h: float
    w: float
    neighbors: tuple


@dataclass(frozen=True)
class LllCheck:
    index: int
    b_ok: bool
    b_sum: float
    b_bound: float
    c_ok: bool
    c_value: float


def check_weighted_lll(events, beta: float, nu: float) -> list[LllCheck]:
    """Conditions (b) sum_{s in D_r} beta^{w_s} h_s <= w_r/nu and
    (c) beta^{w_r} h_r <= 1/2 for every event. Condition (a) P(E_r) <= h_r is
    the caller's responsibility (h is the supplied bound)."""
    expected = math.exp(2.0 * math.log(2.0) / nu)
    if not math.isclose(beta, expected, rel_tol=1e-12):
        raise ScheduleError(f"beta={beta!r} inconsistent with nu={nu!r} (want exp(2 ln2/nu)={expected!r})")
    evs = [e if isinstance(e, LllEvent) else LllEvent(e[0], e[1], tuple(e[2])) for e in events]
    for e in evs:
        if not 0.0 <= e.h <= 1.0:
            raise ScheduleError(f"h={e.h} outside [0, 1]")
        if e.w < 1.0:
            raise ScheduleError(f"w={e.w} must be >= 1")
    out = []
    for r, e in enumerate(evs):
        b_sum = sum(beta ** evs[s].w * evs[s].h for s in e.neighbors)
        b_bound = e.w / nu
        c_val = beta**e.w * e.h
        out.append(LllCheck(r, b_sum <= b_bound, b_sum, b_bound, c_val <= 0.5, c_val))
    return out
