"""Verifier module: properness, bicolored cycles, brute-force index, IO."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aecolor import (
    EdgeColoring,
    brute_force_acyclic_index,
    build_graph,
    empty_coloring,
    find_bicolored_cycles,
    load_coloring,
    properness_violations,
    save_coloring,
)
from aecolor.coloring import scan_colorings_batch
from aecolor.errors import GraphFormatError, ImproperColoringError, OracleGuardError

from conftest import (
    all_cycles_edge_sets,
    complete_graph,
    cycle_edge_ids,
    cycle_graph,
    naive_bicolored_sets,
    random_proper_colorings,
)


def c4_coloring(colors_by_cycle_position):
    g = cycle_graph(4)
    order = cycle_edge_ids(g, [0, 1, 2, 3])
    cols = np.full(4, -1, dtype=np.int32)
    for pos, c in enumerate(colors_by_cycle_position):
        cols[order[pos]] = c
    return g, EdgeColoring(4, cols)


class TestProperness:
    def test_c4_alternating_is_proper(self):
        g, chi = c4_coloring([1, 2, 1, 2])
        assert properness_violations(g, chi) == []

    def test_single_clash_pair(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        chi = EdgeColoring(4, np.array([3, 3], dtype=np.int32))
        assert properness_violations(g, chi) == [(0, 1)]

    def test_cross_check_pairwise_scan(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(4, 9))
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
            if not edges:
                continue
            g = build_graph(n, edges)
            cols = rng.integers(-1, 4, size=g.m).astype(np.int32)
            chi = EdgeColoring(4, cols)
            naive = set()
            for e1 in range(g.m):
                for e2 in range(e1 + 1, g.m):
                    if cols[e1] < 0 or cols[e1] != cols[e2]:
                        continue
                    if set(map(int, g.edges[e1])) & set(map(int, g.edges[e2])):
                        naive.add((e1, e2))
            assert set(properness_violations(g, chi)) == naive

    def test_out_of_range_edge_id(self):
        g = cycle_graph(4)
        with pytest.raises(GraphFormatError):
            properness_violations(g, EdgeColoring(4, np.zeros(5, dtype=np.int32)))


class TestBicoloredCycles:
    def test_c4_bicolored(self):
        g, chi = c4_coloring([1, 2, 1, 2])
        cycles = find_bicolored_cycles(g, chi)
        assert len(cycles) == 1
        assert cycles[0].pair == (1, 2)
        assert cycles[0].vertices == (0, 1, 2, 3)

    def test_c4_three_colors_clean(self):
        g, chi = c4_coloring([1, 2, 1, 3])
        assert find_bicolored_cycles(g, chi) == []

    def test_k4_acyclic_coloring_clean(self):
        g = complete_graph(4)
        # a valid acyclic 5-coloring found by the brute-force oracle
        k = brute_force_acyclic_index(g, 8)
        assert k == 5
        found = _exhaustive_acyclic_coloring(g, 5)
        chi = EdgeColoring(5, found)
        assert properness_violations(g, chi) == []
        assert find_bicolored_cycles(g, chi) == []

    def test_improper_raises(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        chi = EdgeColoring(4, np.array([0, 0], dtype=np.int32))
        with pytest.raises(ImproperColoringError):
            find_bicolored_cycles(g, chi)

    def test_partial_coloring_ignored_edges(self):
        g, chi = c4_coloring([1, 2, 1, 2])
        chi.colors[chi.colors == 2] = -1  # break the cycle by uncoloring
        assert find_bicolored_cycles(g, chi) == []

    def test_oracle_agreement_randomized_corpus(self):
        # >= 1e4 instances over graphs with <= 8 vertices, <= 4 colors
        rng = np.random.default_rng(11)
        total = 0
        for gi in range(40):
            n = int(rng.integers(4, 9))
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.45]
            if not edges:
                continue
            g = build_graph(n, edges)
            cycles = all_cycles_edge_sets(g)
            mat = random_proper_colorings(g, 300, 4, int(rng.integers(1 << 60)))
            proper, hits = scan_colorings_batch(g, mat, 4)
            assert proper.all()
            by_trial = {}
            for t, fs in hits:
                by_trial.setdefault(t, set()).add(fs)
            for t in range(mat.shape[0]):
                want = set(naive_bicolored_sets(g, mat[t], cycles))
                assert by_trial.get(t, set()) == want
                total += 1
        assert total >= 10_000

    def test_single_call_matches_batch_of_one(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            n = int(rng.integers(4, 9))
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
            if not edges:
                continue
            g = build_graph(n, edges)
            mat = random_proper_colorings(g, 1, 4, int(rng.integers(1 << 60)))
            chi = EdgeColoring(4, mat[0].copy())
            single = {c.edge_set() for c in find_bicolored_cycles(g, chi)}
            _, hits = scan_colorings_batch(g, mat, 4)
            assert single == {fs for _, fs in hits}

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_color_permutation_invariance(self, data):
        n = data.draw(st.integers(4, 8))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, min_size=3,
                                   max_size=len(pairs)))
        g = build_graph(n, edges)
        mat = random_proper_colorings(g, 1, 4, data.draw(st.integers(0, 1 << 40)))
        chi = EdgeColoring(4, mat[0].copy())
        perm = data.draw(st.permutations(range(4)))
        relabeled = chi.copy()
        mask = relabeled.colors >= 0
        relabeled.colors[mask] = np.array(perm, dtype=np.int32)[relabeled.colors[mask]]
        a = {c.edge_set() for c in find_bicolored_cycles(g, chi)}
        b = {c.edge_set() for c in find_bicolored_cycles(g, relabeled)}
        assert a == b  # acyclic acceptance is relabeling-invariant


def _exhaustive_acyclic_coloring(g, k):
    """First acyclic k-coloring in lexicographic order (independent search)."""
    import itertools

    cycles = all_cycles_edge_sets(g)
    incident = [[int(e) for e in g.incident_edges(v)] for v in range(g.n)]
    for assign in itertools.product(range(k), repeat=g.m):
        ok = True
        for v in range(g.n):
            cols = [assign[e] for e in incident[v]]
            if len(set(cols)) != len(cols):
                ok = False
                break
        if ok and all(len({assign[e] for e in cyc}) != 2 for cyc in cycles):
            return np.array(assign, dtype=np.int32)
    raise AssertionError("no acyclic coloring found")


class TestBruteForceIndex:
    def test_cycles_need_three(self):
        for n in range(3, 10):
            assert brute_force_acyclic_index(cycle_graph(n), 5) == 3

    def test_k3(self):
        assert brute_force_acyclic_index(complete_graph(3), 5) == 3

    def test_path_needs_two(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        assert brute_force_acyclic_index(g, 5) == 2

    def test_not_found(self):
        assert brute_force_acyclic_index(cycle_graph(5), 2) is None

    def test_guard(self):
        with pytest.raises(OracleGuardError):
            brute_force_acyclic_index(complete_graph(6), 10)


class TestColoringIO:
    def test_round_trip(self, tmp_path):
        g = cycle_graph(5)
        chi = empty_coloring(g, 7)
        chi.colors[1] = 3
        chi.colors[4] = 0
        p = tmp_path / "chi.json"
        save_coloring(chi, p)
        back = load_coloring(p, g.m)
        assert back.palette_size == 7
        assert np.array_equal(back.colors, chi.colors)

    def test_wire_format_keys(self, tmp_path):
        import json

        g = cycle_graph(4)
        chi = empty_coloring(g, 3)
        chi.colors[2] = 1
        p = tmp_path / "chi.json"
        save_coloring(chi, p)
        data = json.loads(p.read_text())
        assert set(data) == {"palette_size", "colours"}
        assert data["colours"] == {"2": 1}

    def test_color_out_of_palette_rejected(self):
        with pytest.raises(GraphFormatError):
            EdgeColoring.from_dict({"palette_size": 2, "colours": {"0": 5}}, m=3)
