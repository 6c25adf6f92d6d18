import itertools
import math

import numpy as np
import pytest
from scipy.stats import chisquare

from cmrank import theory
from cmrank.degrees import DegreeDistribution
from cmrank.exploration import (NEVER, explore, hypnopompic_halfedges, rank_decrement_trace,
                                size_biased_type_proportions, sleeping_degree_profile,
                                current_degree_profile, stage_matrix, step1_events_in_window)
from cmrank.ffield import FieldSpec
from cmrank.graphs import DegreeSequence, WeightModel, sample_degree_sequence, weighted_adjacency
from cmrank.sparse import SparseMatrix, VariableType

P1P3 = DegreeDistribution.from_dict({1: .5, 3: .5})


def pairing_key(partner):
    return tuple(sorted((h, int(p)) for h, p in enumerate(partner) if h < p))


def all_pairings(items):
    if not items:
        yield ()
        return
    a, rest = items[0], items[1:]
    for i, b in enumerate(rest):
        for tail in all_pairings(rest[:i] + rest[i + 1:]):
            yield ((a, b),) + tail


# -- examples -----------------------------------------------------------------


def test_two_vertex_trace(rng):
    state, _ = explore([1, 1], rng)
    assert sorted(state.awaken_order.tolist()) == [0, 1]
    assert state.wake_step.tolist() == [1, 3]
    assert state.graph.partner.tolist() == [1, 0]


def test_all_isolated(rng):
    state, traj = explore([0, 0, 0], rng, snapshots=[0.0, 0.5])
    assert state.num_awake == 0 and (state.wake_index == NEVER).all()
    assert sleeping_degree_profile(traj, 0.0) == {0: 1.0}
    assert traj.missing == [0.5]
    with pytest.raises(KeyError):
        traj.get(0.5)


def test_snapshot_validation(rng):
    with pytest.raises(ValueError):
        explore([1, 1], rng, snapshots=[1.5])
    with pytest.raises(ValueError):
        explore([1, 2], rng)


@pytest.mark.parametrize("degrees", [(1, 1, 1, 1), (2, 2, 2)])
def test_pairing_law_matches_configuration_model(rng, degrees):
    m = sum(degrees)
    support = {pairing_key_from_pairs(p): 0 for p in all_pairings(list(range(m)))}
    N = 10**5
    for _ in range(N):
        state, _ = explore(list(degrees), rng)
        support[pairing_key(state.graph.partner)] += 1
    counts = list(support.values())
    assert len(counts) == math.prod(range(m - 1, 0, -2))
    assert max(abs(c / N - 1 / len(counts)) for c in counts) < 0.01
    assert chisquare(counts).pvalue > 1e-4


def pairing_key_from_pairs(pairs):
    return tuple(sorted(pairs))


def test_first_vertex_size_biased(rng):
    d = [1, 2, 3, 0, 4]
    counts = np.zeros(5)
    N = 40000
    for _ in range(N):
        state, _ = explore(d, rng)
        counts[state.awaken_order[0]] += 1
    expected = np.array(d) / sum(d) * N
    assert counts[3] == 0
    assert chisquare(counts[[0, 1, 2, 4]], expected[[0, 1, 2, 4]]).pvalue > 1e-4


def test_next_vertex_calibration(rng):
    # observed wake frequency of each vertex equals its average predicted probability
    d = [1, 2, 3, 1, 2, 3, 1, 2, 3, 2]
    N, c = 20000, 3
    observed = np.zeros(len(d))
    predicted = np.zeros(len(d))
    var = np.zeros(len(d))
    for _ in range(N):
        state, _ = explore(d, rng)
        if state.num_awake <= c:
            continue
        law = state.next_vertex_law(c)
        nxt = state.awakened_at(c)
        observed[nxt] += 1
        predicted += law
        var += law * (1 - law)
        w, _ = state.frontier_weights(c)
        assert w[nxt] > 0
    z = (observed - predicted) / np.sqrt(var)
    assert np.abs(z).max() < 4.5


def test_frontier_support(rng):
    # every Step-3 awakening is adjacent to the awake set; Step-1 happens only on an empty frontier
    for _ in range(200):
        d = sample_degree_sequence(P1P3, 40, rng)
        state, _ = explore(d, rng)
        for c in range(state.num_awake - 1):
            v = state.awakened_at(c)
            w = state.degrees - state.current_degrees(c)
            if state.wake_step[c] == 3:
                assert w[v] > 0
            elif state.wake_step[c] == 1 and c > 0:
                frontier = w[state.sleeping_mask(c)]
                # a Step-1 awakening either follows an exhausted frontier or shares its event
                if state.wake_event[c] != state.wake_event[c - 1]:
                    assert frontier.sum() == 0


def test_hypnopompic_branches(rng):
    state, _ = explore([2, 1, 1, 3, 1], rng)
    # before anything is awake every sleeping half-edge qualifies
    assert hypnopompic_halfedges(state, 0) == set(range(8))
    for _ in range(200):
        state, _ = explore(sample_degree_sequence(P1P3, 30, rng), rng)
        for c in range(1, state.num_awake):
            status = state.halfedge_status(c)
            g = state.graph
            frontier = {h for h in range(g.num_halfedges)
                        if status[h] == "sleeping" and status[g.partner[h]] == "active"}
            hyp = hypnopompic_halfedges(state, c)
            if frontier:
                assert hyp == frontier
            else:
                assert hyp == set(np.nonzero(status == "sleeping")[0].tolist())


def test_halfedge_statuses(rng):
    for _ in range(50):
        state, _ = explore(sample_degree_sequence(P1P3, 50, rng), rng)
        g = state.graph
        for c in range(0, state.num_awake + 1, 5):
            status = state.halfedge_status(c)
            awake = ~state.sleeping_mask(c)
            # awake vertex <=> all its half-edges are active or dead
            assert ((status != "sleeping") == awake[g.owner]).all()
        # dead half-edges are paired in order of death
        order = state.death_order
        assert order.size == g.num_halfedges
        pos = np.empty_like(order)
        pos[order] = np.arange(order.size)
        assert (pos // 2 == pos[g.partner] // 2).all()
        assert (g.partner[g.partner] == np.arange(g.num_halfedges)).all()


# -- trajectories -------------------------------------------------------------


def test_bookkeeping(rng):
    grid = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9]
    for _ in range(20):
        d = sample_degree_sequence(DegreeDistribution.from_dict({0: .1, 1: .3, 2: .2, 4: .4}), 2000, rng)
        state, traj = explore(d, rng, grid)
        for s, snap in traj.snapshots.items():
            c = math.floor(s * d.n + 1e-9)
            k = np.arange(snap.V.size)
            assert snap.V.sum() == d.n - c == snap.Vbar.sum()
            assert snap.S == int((k * snap.V).sum())
            status = state.halfedge_status(c)
            assert snap.S == int((status == "sleeping").sum())
            assert snap.L == int((status != "dead").sum())
            tail = np.cumsum(snap.V[::-1])[::-1]
            assert (snap.Vbar <= tail[:snap.Vbar.size]).all()
        start = traj.get(0.0)
        assert (start.V == d.histogram()).all() and (start.Vbar == start.V).all()
        prof = sleeping_degree_profile(traj, 0.5)
        assert abs(sum(prof.values()) - (1 - math.floor(0.5 * d.n) / d.n)) < 1e-12
        rows = list(traj.rows())
        assert rows[0][:2] == (0.0, 0)


def test_concentration(rng):
    n, s = 50000, 0.3
    d = sample_degree_sequence(P1P3, n, rng)
    _, traj = explore(d, rng, [s])
    t = theory.t_of_s(P1P3, s)
    V = sleeping_degree_profile(traj, s)
    assert abs(V[1] - math.exp(-t) / 2) <= 0.02
    cur = current_degree_profile(traj, s)
    law = theory.current_degree_law(P1P3, t)
    assert max(abs(cur.get(k, 0) - law[k]) for k in range(4)) <= 0.02
    lam0 = theory.sigma_lambda(P1P3, 0)[1]
    assert abs(traj.get(s).L / n - lam0 * math.exp(-2 * t)) <= 0.03


def test_no_step1_inside_window(rng):
    hits = 0
    for _ in range(20):
        state, _ = explore(np.full(10**4, 3), rng)
        hits += step1_events_in_window(state, 0.05, 0.95) == 0
    assert hits >= 19


# -- types and rank decrements ------------------------------------------------------


def test_isolated_types(rng):
    state, _ = explore([0, 0, 0, 0], rng)
    A = SparseMatrix.zeros(4, 4, FieldSpec.gf(2))
    tp = size_biased_type_proportions(A, state, 0)
    assert tp.zeta == (0, 0, 1, 0, 0) and tp.uniform_fallback


def test_type_proportions_sum_to_one(rng):
    F = FieldSpec.gf(3)
    for _ in range(10):
        d = sample_degree_sequence(P1P3, 80, rng)
        state, _ = explore(d, rng)
        A = weighted_adjacency(state.graph, WeightModel("iid"), F, rng)
        for c in (0, 10, 30, 60):
            tp = size_biased_type_proportions(stage_matrix(A, state, c), state, c)
            assert abs(sum(tp.zeta) - 1) < 1e-12
    with pytest.raises(ValueError):
        state, _ = explore(np.full(502, 1), rng)
        size_biased_type_proportions(SparseMatrix.zeros(502, 502, F), state, 0)


@pytest.mark.parametrize("P", [0, 3])
def test_trace_telescopes(rng, P):
    for F in (FieldSpec.gf(2), FieldSpec.gf(5), FieldSpec.rationals()):
        d = sample_degree_sequence(DegreeDistribution.from_dict({1: .4, 2: .2, 3: .4}), 60, rng)
        tr = rank_decrement_trace(d, WeightModel("iid"), F, P, rng, s_grid=[0.2])
        assert sum(r.drop for r in tr.rows) == tr.initial_rank - tr.final_rank
        A = weighted_adjacency(tr.state.graph, WeightModel("ones"), F)
        if P == 0:
            assert tr.final_rank == 0
        for r in tr.rows:
            assert r.drop in (0, 1, 2)
            if r.perturbation_vanishes:
                assert r.drop == r.vtype.drop
        assert 0.2 in tr.proportions


def test_trace_drop_by_type(rng):
    seen = set()
    for _ in range(20):
        d = sample_degree_sequence(DegreeDistribution.from_dict({0: .1, 1: .4, 3: .5}), 40, rng)
        tr = rank_decrement_trace(d, WeightModel("ones"), FieldSpec.gf(2), 2, rng)
        for r in tr.rows:
            if r.perturbation_vanishes:
                seen.add(r.vtype)
                expected = {VariableType.Z: 0, VariableType.Y: 2}.get(r.vtype)
                if expected is not None:
                    assert r.drop == expected
    assert VariableType.Z in seen and VariableType.Y in seen
