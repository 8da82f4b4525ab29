"""Schedule calculus: recursions, stopping rule, primed forms, LLL checker."""

import math

import numpy as np
import pytest

from aecolor.errors import ScheduleError
from aecolor.schedule import (
    E_MINUS_2,
    ETA,
    LllEvent,
    check_weighted_lll,
    compute_schedule,
    find_i_star,
    palette_size,
    primed_sequences,
    stopping_threshold,
    verify_schedule_lemmas,
)


def _reference_i_star(eps, delta, guard=1000):
    """Independent straight-loop evaluation of the stopping rule."""
    thr = (eps * eps / 18.0) ** 2 * delta / 128.0
    r = eps * delta / 2.0
    if r < thr:
        return 0
    for i in range(1, guard + 1):
        r = (1 - math.exp(-2)) * r + r ** (2.0 / 3.0)
        if r < thr:
            return i
    return None


class TestComputeSchedule:
    def test_l1_formula(self):
        p = compute_schedule(0.9, 100, 10, max_iterations=2)
        assert p.L[1] == pytest.approx(110.0)
        assert p.T[1] == 100.0
        assert p.R[1] == 45.0

    def test_recursion_values(self):
        p = compute_schedule(0.5, 10**6, 12, max_iterations=4)
        for i in range(1, 4):
            assert p.L[i + 1] == pytest.approx(ETA * p.L[i] - p.L[i] ** (2 / 3), rel=1e-12)
            assert p.T[i + 1] == pytest.approx(ETA * p.T[i] + p.T[i] ** (2 / 3), rel=1e-12)
            assert p.R[i + 1] == pytest.approx((1 - E_MINUS_2) * p.R[i] + p.R[i] ** (2 / 3), rel=1e-12)

    def test_i_star_09_1e8(self):
        # frozen from the independent loop above
        assert _reference_i_star(0.9, 10**8) == 92
        p = compute_schedule(0.9, 10**8, 64)
        assert p.i_star == 92 and not p.capped
        assert p.R[93] < p.threshold <= p.R[92]

    def test_stopping_unreachable_raises(self):
        # the R map's fixpoint e^6 sits above the threshold for these inputs
        with pytest.raises(ScheduleError) as exc:
            compute_schedule(0.5, 10**8, 64)
        assert exc.value.min_reached == pytest.approx(math.exp(6), rel=1e-3)
        assert _reference_i_star(0.5, 10**8) is None

    def test_cap_allows_desk_scale(self):
        p = compute_schedule(0.5, 20, 6, max_iterations=3)
        assert p.capped and p.i_star == 3
        assert len(p.L) == 5

    def test_psi_values(self):
        p = compute_schedule(0.9, 10**8, 64)
        assert p.psi[p.i_star] == 16.0  # 4^(2 + i* - i*) ... at i = i* the exponent is 2
        for i in range(1, p.i_star + 1):
            assert p.psi[i + 1] == p.psi[i] / 4.0

    def test_lambda_closed_form(self):
        p = compute_schedule(0.9, 10**8, 64)
        k = p.k
        psi1 = p.psi[1]
        assert p.lam[1] == 2 * k - 4 * psi1
        for i in range(1, p.i_star + 2):
            assert p.lam[i] == 2.0 * k / 2.0 ** (i - 1) - 4.0 * psi1 * i

    def test_monotone_decreasing_over_schedule(self):
        p = compute_schedule(0.9, 10**8, 64)
        for name in ("L", "T", "R"):
            seq = getattr(p, name)[1 : p.i_star + 2]
            assert np.all(np.diff(seq) < 0), name

    def test_i_star_stabilizes_in_delta(self):
        # for fixed eps, i* is constant once Delta clears a computable
        # threshold (here by 1e13; at 1e12 it still reads one higher)
        vals = [compute_schedule(0.9, d, 64).i_star for d in (10**13, 10**14, 10**15, 10**16)]
        assert len(set(vals)) == 1

    def test_i_star_zero_when_threshold_above_r1(self):
        # degenerate: R_1 already below the stopping threshold
        eps = 1.0
        delta = 10**9
        thr = stopping_threshold(eps, delta)
        if eps * delta / 2 < thr:
            assert compute_schedule(eps, delta, 10).i_star == 0

    def test_palette(self):
        assert palette_size(0.5, 20) == 30
        assert palette_size(0.5, 21) == 32  # ceil(31.5)

    def test_validation(self):
        with pytest.raises(ScheduleError):
            compute_schedule(0.0, 10, 6)
        with pytest.raises(ScheduleError):
            compute_schedule(0.5, 0, 6)
        with pytest.raises(ScheduleError):
            compute_schedule(0.5, 10, 2)


class TestPrimed:
    def test_closed_forms(self):
        p = compute_schedule(0.5, 10**6, 12, max_iterations=6)
        Lp, Tp, Rp = primed_sequences(p)
        assert Lp[1] == p.L[1]
        assert Rp[2] == pytest.approx(math.sqrt(ETA) * p.R[1], rel=1e-12)
        assert Tp[3] / Tp[2] == pytest.approx(ETA, rel=1e-12)
        for i in range(1, 7):
            assert Lp[i] == pytest.approx(ETA ** (i - 1) * p.L[1], rel=1e-12)

    def test_primed_bound_directions(self):
        # L_i <= L'_i, T_i >= T'_i, R_i >= R'_i by the recursion signs
        p = compute_schedule(0.9, 10**8, 64)
        sl = slice(1, p.i_star + 2)
        assert np.all(p.L[sl] <= p.L_primed[sl] + 1e-9)
        assert np.all(p.T[sl] >= p.T_primed[sl] - 1e-9)
        assert np.all(p.R[sl] >= p.R_primed[sl] - 1e-9)


class TestLemmaReport:
    def test_report_matches_direct_recomputation(self):
        p = compute_schedule(0.9, 10**8, 64)
        rep = verify_schedule_lemmas(p)
        by_key = {(e.i, e.name): e for e in rep.entries}
        for i in (1, 5, 17, 18, 40):
            e = by_key[(i, "L_close")]
            want = abs(p.L[i] - p.L_primed[i]) <= p.L_primed[i] ** (5 / 6)
            assert e.ok == want
        # i = 1 is exact: |L_1 - L'_1| = 0
        assert by_key[(1, "L_close")].value == 0.0
        # ratio maximum deviation is reported
        assert rep.max_ratio_deviation >= 0

    def test_close_checks_fail_at_desk_scale_large_i(self):
        # the 5/6-power envelope needs Delta far beyond 1e8; the report says so
        p = compute_schedule(0.9, 10**8, 64)
        rep = verify_schedule_lemmas(p)
        fails = {(e.i, e.name) for e in rep.failures()}
        assert any(name == "L_close" for _, name in fails)
        # ratio bound holds everywhere regardless
        assert all(e.ok for e in rep.entries if e.name == "ratio_le")


class TestWeightedLll:
    def _beta_nu(self, eps=0.5):
        beta = math.sqrt(1 + eps / 10)
        nu = 2 * math.log(2) / math.log(beta)
        return beta, nu

    def test_empty_passes(self):
        beta, nu = self._beta_nu()
        assert check_weighted_lll([], beta, nu) == []

    def test_single_heavy_event_fails_c(self):
        beta, nu = self._beta_nu()
        out = check_weighted_lll([LllEvent(0.9, 1.0, ())], beta, nu)
        assert not out[0].c_ok  # beta * 0.9 > 1/2
        assert out[0].b_ok  # empty neighborhood

    def test_inconsistent_beta_nu(self):
        with pytest.raises(ScheduleError):
            check_weighted_lll([], 2.0, 10.0)

    def test_event_system_at_delta_1e6(self):
        # cycle events with h = Delta^-w, local events with h = e^{-Delta^(1/3)}
        beta, nu = self._beta_nu()
        delta = 10**6
        lam = 30
        w_a = lam / 3.0
        h_a = delta**-w_a
        h_b = math.exp(-(delta ** (1 / 3)))
        n_a, n_b = 1000, 1000
        events = []
        neighbors = tuple(range(n_a + n_b))
        for _ in range(n_a):
            events.append(LllEvent(h_a, w_a, neighbors))
        for _ in range(n_b):
            events.append(LllEvent(h_b, 1.0, neighbors))
        out = check_weighted_lll(events, beta, nu)
        assert all(c.b_ok and c.c_ok for c in out)

    def test_h_w_validation(self):
        beta, nu = self._beta_nu()
        with pytest.raises(ScheduleError):
            check_weighted_lll([LllEvent(1.5, 1.0, ())], beta, nu)
        with pytest.raises(ScheduleError):
            check_weighted_lll([LllEvent(0.5, 0.5, ())], beta, nu)
