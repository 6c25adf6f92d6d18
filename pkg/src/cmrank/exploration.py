"""Exploration process as a vertex-removal process.

Exponential half-edge lifetimes are replaced by their order statistics:
Step 1 wakes the owner of a uniform sleeping half-edge when nothing is
active, Step 2 kills a uniform active half-edge, Step 3 kills a uniform
living half-edge, pairs the two and wakes the owner of the second one.

"Stage c" is the moment right after the c-th vertex woke.  Snapshots are
taken at stage floor(s * n).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ffield import FieldSpec
from .graphs import DegreeSequence, HalfEdgeGraph, WeightModel, weighted_adjacency
from .sparse import Perturbation, SparseMatrix, VariableType, classify_all

NEVER = np.iinfo(np.int64).max


@dataclass
class ExplorationState:
    """Full record of one run.

    ``wake_index[i]`` is the stage at which vertex i woke (1-based) or NEVER;
    ``kill_stage[h]`` is the number of awake vertices when half-edge h died.
    ``wake_event`` holds, per awakening, the number of completed pairings at
    that moment; two awakenings sharing it happened simultaneously.
    """

    graph: HalfEdgeGraph
    awaken_order: np.ndarray
    wake_index: np.ndarray
    wake_step: np.ndarray
    wake_event: np.ndarray
    kill_stage: np.ndarray
    death_order: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_awake(self) -> int:
        return int(self.awaken_order.size)

    @property
    def degrees(self) -> np.ndarray:
        return self.graph.degrees

    @property
    def step1_positions(self) -> np.ndarray:
        """Stages at which a Step-1 awakening happened."""
        return np.nonzero(self.wake_step == 1)[0] + 1

    def sleeping_mask(self, c: int) -> np.ndarray:
        return self.wake_index > c

    def vertex_status(self, c: int) -> np.ndarray:
        return np.where(self.sleeping_mask(c), "sleeping", "awake")

    def halfedge_status(self, c: int) -> np.ndarray:
        g = self.graph
        dead = self.kill_stage < c
        awake = self.wake_index[g.owner] <= c
        return np.where(dead, "dead", np.where(awake, "active", "sleeping"))

    def current_degrees(self, c: int) -> np.ndarray:
        """Degree of each vertex inside the subgraph induced by sleeping vertices
        at stage c (loops count twice); 0 for awake vertices."""
        g = self.graph
        sleeping = self.sleeping_mask(c)
        partner_owner = g.owner[g.partner]
        keep = sleeping[g.owner] & sleeping[partner_owner]
        return np.bincount(g.owner[keep], minlength=g.n)

    def frontier_weights(self, c: int) -> tuple[np.ndarray, bool]:
        """Per-vertex weights d_i - dbar_i over sleeping vertices, or d_i when
        those all vanish.  Returns (weights, used_degree_fallback)."""
        sleeping = self.sleeping_mask(c)
        w = np.where(sleeping, self.degrees - self.current_degrees(c), 0)
        if w.sum() > 0:
            return w, False
        return np.where(sleeping, self.degrees, 0), True

    def next_vertex_law(self, c: int) -> np.ndarray:
        w, _ = self.frontier_weights(c)
        tot = w.sum()
        return w / tot if tot else w.astype(float)

    def awakened_at(self, c: int) -> int:
        """Vertex that wakes at stage c + 1."""
        return int(self.awaken_order[c])

    def conditional_degree(self, c: int) -> int:
        """Current degree, at stage c, of the vertex that wakes next."""
        v = self.awakened_at(c)
        g = self.graph
        stubs = np.arange(g.offsets[v], g.offsets[v + 1])
        return int((self.wake_index[g.owner[g.partner[stubs]]] > c).sum())


def hypnopompic_halfedges(state: ExplorationState, c: int) -> set[int]:
    """Half-edges that may be killed next by a Step-3 move, given the sleeping graph.

    If no sleeping vertex has a half-edge paired outside the sleeping graph,
    every sleeping half-edge qualifies; otherwise exactly those sleeping
    half-edges whose partner belongs to an awake vertex.
    """
    g = state.graph
    sleeping = state.sleeping_mask(c)
    own_sleeping = sleeping[g.owner]
    partner_awake = ~sleeping[g.owner[g.partner]]
    frontier = np.nonzero(own_sleeping & partner_awake)[0]
    if frontier.size == 0:
        return set(np.nonzero(own_sleeping)[0].tolist())
    return set(frontier.tolist())


@dataclass
class Snapshot:
    s: float
    stage: int
    V: np.ndarray          # sleeping vertices by original degree
    Vbar: np.ndarray       # sleeping vertices by current degree
    S: int                 # sleeping half-edges
    L: int                 # living half-edges
    step1_count: int       # Step-1 awakenings since the previous snapshot


@dataclass
class Trajectory:
    n: int
    snapshots: dict[float, Snapshot] = field(default_factory=dict)
    missing: list[float] = field(default_factory=list)

    def get(self, s: float) -> Snapshot:
        if s not in self.snapshots:
            raise KeyError(f"no snapshot at s={s}")
        return self.snapshots[s]

    def rows(self):
        """CSV rows (s, k, V_k, Vbar_k, S, L, step1_flag)."""
        for s in sorted(self.snapshots):
            snap = self.snapshots[s]
            K = max(snap.V.size, snap.Vbar.size)
            V = np.pad(snap.V, (0, K - snap.V.size))
            Vb = np.pad(snap.Vbar, (0, K - snap.Vbar.size))
            for k in range(K):
                yield (s, k, int(V[k]), int(Vb[k]), snap.S, snap.L, int(snap.step1_count > 0))


def sleeping_degree_profile(traj: Trajectory, s: float) -> dict[int, float]:
    snap = traj.get(s)
    return {k: v / traj.n for k, v in enumerate(snap.V.tolist())}


def current_degree_profile(traj: Trajectory, s: float) -> dict[int, float]:
    snap = traj.get(s)
    return {k: v / traj.n for k, v in enumerate(snap.Vbar.tolist())}


class _Uniforms:
    def __init__(self, rng: np.random.Generator, batch: int = 1 << 16) -> None:
        self.rng, self.batch = rng, batch
        self.buf: list[float] = []
        self.i = 0

    def index(self, size: int) -> int:
        if self.i >= len(self.buf):
            self.buf = self.rng.random(self.batch).tolist()
            self.i = 0
        u = self.buf[self.i]
        self.i += 1
        return min(int(u * size), size - 1)


def explore(G: HalfEdgeGraph | DegreeSequence | np.ndarray, rng: np.random.Generator,
            snapshots=()) -> tuple[ExplorationState, Trajectory]:
    """Run the exploration on the degree sequence of ``G``; the pairing is
    generated by the process itself (any pairing stored in ``G`` is ignored)."""
    if isinstance(G, HalfEdgeGraph):
        degrees = G.degrees
    elif isinstance(G, DegreeSequence):
        degrees = G.degrees
    else:
        degrees = np.asarray(G, dtype=np.int64)
    if int(degrees.sum()) % 2:
        raise ValueError("degree sum is odd")
    for s in snapshots:
        if not 0.0 <= s <= 1.0:
            raise ValueError("snapshot s must lie in [0, 1]")
    g = HalfEdgeGraph(degrees)
    n, m = g.n, g.num_halfedges
    owner = g.owner.tolist()
    offsets = g.offsets.tolist()
    deg = degrees.tolist()
    partner = [-1] * m
    kill_stage = [NEVER] * m
    death: list[int] = []

    sleep = list(range(m))
    spos = list(range(m))
    act: list[int] = []
    apos = [-1] * m

    wake_index = [NEVER] * n
    order: list[int] = []
    steps: list[int] = []
    events: list[int] = []
    Vcount = np.bincount(degrees, minlength=1).tolist() if n else [0]
    stages = {}
    for s in snapshots:
        stages.setdefault(int(math.floor(s * n + 1e-9)), []).append(s)
    traj = Trajectory(n)
    n_sleep_he = m
    step1_since = 0
    pairs_done = 0

    def record(c: int) -> None:
        for s in stages.get(c, ()):
            traj.snapshots[s] = Snapshot(s, c, np.array(Vcount, dtype=np.int64), np.zeros(0, np.int64),
                                         n_sleep_he, len(sleep) + len(act), step1_since)

    def wake(v: int, step: int) -> None:
        nonlocal n_sleep_he, step1_since
        for h in range(offsets[v], offsets[v + 1]):
            i = spos[h]
            if i >= 0:
                last = sleep[-1]
                sleep[i] = last
                spos[last] = i
                sleep.pop()
                spos[h] = -1
                apos[h] = len(act)
                act.append(h)
                n_sleep_he -= 1
        order.append(v)
        wake_index[v] = len(order)
        steps.append(step)
        events.append(pairs_done)
        Vcount[deg[v]] -= 1
        if step == 1:
            step1_since += 1
        c = len(order)
        if c in stages:
            record(c)
            step1_since = 0

    def kill_active(h: int) -> None:
        i = apos[h]
        last = act[-1]
        act[i] = last
        apos[last] = i
        act.pop()
        apos[h] = -1
        kill_stage[h] = len(order)
        death.append(h)

    U = _Uniforms(rng, min(1 << 16, 3 * m + 8))
    if 0 in stages:
        record(0)
    while True:
        if not act:
            if not sleep:
                break
            wake(owner[sleep[U.index(len(sleep))]], 1)
        h1 = act[U.index(len(act))]
        kill_active(h1)
        ns, na = len(sleep), len(act)
        r = U.index(ns + na)
        if r < ns:
            h2 = sleep[r]
            last = sleep[-1]
            sleep[r] = last
            spos[last] = r
            sleep.pop()
            spos[h2] = -1
            n_sleep_he -= 1
            kill_stage[h2] = len(order)
            death.append(h2)
            partner[h1], partner[h2] = h2, h1
            pairs_done += 1
            wake(owner[h2], 3)
        else:
            h2 = act[r - ns]
            kill_active(h2)
            partner[h1], partner[h2] = h2, h1
            pairs_done += 1

    g.partner = np.array(partner, dtype=np.int64)
    state = ExplorationState(
        graph=g,
        awaken_order=np.array(order, dtype=np.int64),
        wake_index=np.array(wake_index, dtype=np.int64),
        wake_step=np.array(steps, dtype=np.int64),
        wake_event=np.array(events, dtype=np.int64),
        kill_stage=np.array(kill_stage, dtype=np.int64),
        death_order=np.array(death, dtype=np.int64),
    )
    for s in snapshots:
        if s in traj.snapshots:
            snap = traj.snapshots[s]
            dbar = state.current_degrees(snap.stage)[state.sleeping_mask(snap.stage)]
            snap.Vbar = np.bincount(dbar, minlength=1)
        else:
            traj.missing.append(s)
    return state, traj


def step1_events_in_window(state: ExplorationState, s_lo: float, s_hi: float) -> int:
    """Step-1 awakenings at stages in (floor(s_lo n), floor(s_hi n)]."""
    lo, hi = math.floor(s_lo * state.n), math.floor(s_hi * state.n)
    pos = state.step1_positions
    return int(((pos > lo) & (pos <= hi)).sum())


# -- types along the exploration ---------------------------------------------------------


@dataclass(frozen=True)
class TypeProportions:
    x: float
    y: float
    z: float
    u: float
    v: float
    degree_fallback: bool = False
    uniform_fallback: bool = False

    @property
    def zeta(self) -> tuple[float, float, float, float, float]:
        return (self.x, self.y, self.z, self.u, self.v)

    @property
    def expected_drop(self) -> float:
        return self.x + 2 * self.y + self.u + self.v

    @property
    def frozen(self) -> float:
        return self.x + self.y + self.v


def stage_matrix(A: SparseMatrix, state: ExplorationState, c: int,
                 pert: Perturbation | None = None) -> SparseMatrix:
    """A with the rows and columns of the first c awakened vertices zeroed, then bordered."""
    gone = state.awaken_order[:c].tolist()
    Ac = A.zero_rows_cols(gone, gone)
    return pert.border(Ac) if pert is not None else Ac


MAX_TYPE_N = 500


def size_biased_type_proportions(A_s_perturbed: SparseMatrix, state: ExplorationState, c: int
                                 ) -> TypeProportions:
    """Type proportions of sleeping vertices at stage c, weighted by d_i - dbar_i.

    Falls back to d_i when those weights all vanish, and to uniform weights
    if the degrees vanish too (all sleeping vertices have degree 0).
    """
    n = state.n
    if n > MAX_TYPE_N:
        raise ValueError(f"type proportions limited to n <= {MAX_TYPE_N}")
    w, deg_fallback = state.frontier_weights(c)
    sleeping = np.nonzero(state.sleeping_mask(c))[0]
    uni = False
    if w.sum() == 0:
        w = state.sleeping_mask(c).astype(np.int64)
        uni = True
    idx = [int(i) for i in sleeping if w[i] > 0]
    totals = dict.fromkeys(VariableType, 0.0)
    for i, t in zip(idx, classify_all(A_s_perturbed, idx)):
        totals[t] += float(w[i])
    tot = sum(totals.values())
    if tot == 0:
        return TypeProportions(0.0, 0.0, 0.0, 0.0, 0.0, deg_fallback, uni)
    f = {t: totals[t] / tot for t in VariableType}
    return TypeProportions(f[VariableType.X], f[VariableType.Y], f[VariableType.Z],
                           f[VariableType.U], f[VariableType.V], deg_fallback, uni)


@dataclass
class TraceRow:
    stage: int
    s: float
    vertex: int
    drop: int
    vtype: VariableType
    perturbation_vanishes: bool


@dataclass
class DecrementTrace:
    rows: list[TraceRow]
    proportions: dict[float, TypeProportions]
    initial_rank: int
    final_rank: int
    state: ExplorationState
    perturbation: Perturbation | None


def rank_decrement_trace(G: HalfEdgeGraph | DegreeSequence, W: WeightModel, spec: FieldSpec, P: int,
                         rng: np.random.Generator, s_grid=()) -> DecrementTrace:
    """Explore, then record for each awakened vertex the rank drop of the
    perturbed stage matrix and the vertex type there.  Type proportions are
    computed at the stages of ``s_grid``."""
    degrees = G.degrees
    n = int(degrees.size)
    if n > MAX_TYPE_N:
        raise ValueError(f"trace limited to n <= {MAX_TYPE_N}")
    state, _ = explore(degrees, rng)
    A = weighted_adjacency(state.graph, W, spec, rng)
    pert = Perturbation.sample(n, P, rng) if P >= 1 else None
    grid_stages = {int(math.floor(s * n + 1e-9)): s for s in s_grid}
    ranks = [stage_matrix(A, state, 0, pert).rank()]
    rows: list[TraceRow] = []
    props: dict[float, TypeProportions] = {}
    for c in range(state.num_awake + 1):
        M = stage_matrix(A, state, c, pert)
        if c in grid_stages:
            props[grid_stages[c]] = size_biased_type_proportions(M, state, c)
        if c == state.num_awake:
            break
        v = state.awakened_at(c)
        nxt = stage_matrix(A, state, c + 1, pert).rank()
        ranks.append(nxt)
        t = classify_all(M, [v])[0]
        vanish = pert is None or pert.vanishes_at(v)
        rows.append(TraceRow(c, c / n, v, ranks[-2] - nxt, t, vanish))
    return DecrementTrace(rows, props, ranks[0], ranks[-1], state, pert)
