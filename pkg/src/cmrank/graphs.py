"""Configuration-model sampling, erased weighted adjacency, Karp-Sipser peeling."""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .degrees import DegreeDistribution
from .ffield import FieldSpec, Raw
from .sparse import SparseMatrix


@dataclass(frozen=True)
class DegreeSequence:
    degrees: np.ndarray
    fixup_vertex: int | None = None

    def __post_init__(self) -> None:
        d = np.asarray(self.degrees, dtype=np.int64)
        if (d < 0).any():
            raise ValueError("negative degree")
        object.__setattr__(self, "degrees", d)

    @property
    def n(self) -> int:
        return int(self.degrees.size)

    @property
    def total(self) -> int:
        return int(self.degrees.sum())

    def histogram(self) -> np.ndarray:
        return np.bincount(self.degrees) if self.n else np.zeros(1, dtype=np.int64)


def sample_degree_sequence(dist: DegreeDistribution, n: int, rng: np.random.Generator,
                           mode: str = "iid") -> DegreeSequence:
    """Draw n degrees i.i.d. ("iid") or by quantiles of the cdf ("quantile").

    An odd degree sum is fixed by adding 1 to one uniformly chosen vertex.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode == "iid":
        d = rng.choice(dist.probs.size, size=n, p=dist.probs).astype(np.int64)
    elif mode == "quantile":
        # d_i = smallest k with F(k) >= i/n, i = 1..n
        cdf = dist.cdf()
        q = np.arange(1, n + 1) / n
        d = np.minimum(np.searchsorted(cdf, q - 1e-12), dist.max_degree).astype(np.int64)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    fix = None
    if d.sum() % 2:
        fix = int(rng.integers(n))
        d[fix] += 1
    return DegreeSequence(d, fix)


class HalfEdgeGraph:
    """Multigraph as a pairing of half-edges.

    Half-edges of vertex i are ``offsets[i] .. offsets[i+1]-1``; ``partner[h]``
    is the half-edge paired with h, or -1 while unpaired.
    """

    def __init__(self, degrees: Iterable[int], partner: np.ndarray | None = None) -> None:
        self.degrees = np.asarray(list(degrees) if not isinstance(degrees, np.ndarray) else degrees,
                                  dtype=np.int64)
        self.n = int(self.degrees.size)
        self.offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=self.offsets[1:])
        self.owner = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        m = int(self.offsets[-1])
        self.partner = np.full(m, -1, dtype=np.int64) if partner is None else np.asarray(partner, dtype=np.int64)
        if self.partner.size != m:
            raise ValueError("pairing size does not match degrees")

    @property
    def num_halfedges(self) -> int:
        return int(self.offsets[-1])

    def stubs(self, i: int) -> range:
        return range(int(self.offsets[i]), int(self.offsets[i + 1]))

    def pair(self, h1: int, h2: int) -> None:
        if h1 == h2 or self.partner[h1] >= 0 or self.partner[h2] >= 0:
            raise ValueError("invalid pairing")
        self.partner[h1] = h2
        self.partner[h2] = h1

    def is_complete(self) -> bool:
        return bool((self.partner >= 0).all())

    def check(self) -> None:
        p = self.partner
        paired = np.nonzero(p >= 0)[0]
        if (p[paired] == paired).any() or (p[p[paired]] != paired).any():
            raise AssertionError("pairing is not a fixed-point-free involution")

    def edges(self) -> np.ndarray:
        """(E, 2) array of endpoint vertices, one row per paired half-edge pair."""
        h = np.nonzero(self.partner > np.arange(self.partner.size))[0]
        return np.stack([self.owner[h], self.owner[self.partner[h]]], axis=1)

    def loop_count(self) -> int:
        e = self.edges()
        return int((e[:, 0] == e[:, 1]).sum())

    def multi_edge_count(self) -> int:
        """Number of surplus parallel edges (an edge of multiplicity k counts k-1)."""
        e = self.edges()
        e = np.sort(e[e[:, 0] != e[:, 1]], axis=1)
        if e.size == 0:
            return 0
        return int(e.shape[0] - np.unique(e, axis=0).shape[0])

    def multiplicities(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for u, v in self.edges():
            key = (int(min(u, v)), int(max(u, v)))
            out[key] = out.get(key, 0) + 1
        return out

    def simple(self) -> SimpleGraph:
        """Erased view: loops dropped, parallel edges merged."""
        return SimpleGraph.from_edges(self.n, ((int(u), int(v)) for u, v in self.edges()))


class SimpleGraph:
    """Simple undirected graph as adjacency sets."""

    def __init__(self, n: int, adj: list[set[int]] | None = None) -> None:
        self.n = n
        self.adj = adj if adj is not None else [set() for _ in range(n)]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> SimpleGraph:
        g = cls(n)
        for u, v in edges:
            if u != v:
                g.adj[u].add(v)
                g.adj[v].add(u)
        return g

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self.adj[u]) if u < v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def induced(self, vertices: Iterable[int]) -> SimpleGraph:
        keep = set(vertices)
        return SimpleGraph(self.n, [a & keep if v in keep else set() for v, a in enumerate(self.adj)])

    def is_forest(self) -> bool:
        seen = [False] * self.n
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            nodes, edges2, stack = 0, 0, [s]
            while stack:
                v = stack.pop()
                nodes += 1
                edges2 += len(self.adj[v])
                for w in self.adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            if edges2 // 2 != nodes - 1:
                return False
        return True


def sample_configuration(d: DegreeSequence | Iterable[int], rng: np.random.Generator) -> HalfEdgeGraph:
    """Uniform pairing: shuffle the half-edge list and pair consecutive entries."""
    degrees = d.degrees if isinstance(d, DegreeSequence) else np.asarray(list(d), dtype=np.int64)
    if int(degrees.sum()) % 2:
        raise ValueError("degree sum is odd")
    g = HalfEdgeGraph(degrees)
    perm = rng.permutation(g.num_halfedges)
    a, b = perm[0::2], perm[1::2]
    g.partner[a] = b
    g.partner[b] = a
    return g


# -- weights ------------------------------------------------------------------


@dataclass(frozen=True)
class WeightModel:
    """Edge weights J(i, j) of the erased adjacency.

    mode: "ones", "iid" (independent uniform nonzero), "checkerboard"
    (1 if i + j is even, -1 otherwise) or "explicit" (``explicit`` maps
    unordered pairs (i, j), i < j, to nonzero values).
    """

    mode: str = "ones"
    explicit: dict[tuple[int, int], object] | None = field(default=None, compare=False)

    MODES = ("ones", "iid", "checkerboard", "explicit")

    def __post_init__(self) -> None:
        if self.mode not in self.MODES:
            raise ValueError(f"unknown weight mode {self.mode!r}")
        if self.mode == "explicit" and self.explicit is None:
            raise ValueError("explicit mode needs a weight table")

    def weight(self, i: int, j: int, spec: FieldSpec, rng: np.random.Generator) -> Raw:
        if self.mode == "ones":
            return spec.coerce(1)
        if self.mode == "iid":
            return spec.random_raw(rng)
        if self.mode == "checkerboard":
            return spec.coerce(1 if (i + j) % 2 == 0 else -1)
        key = (min(i, j), max(i, j))
        if key not in self.explicit:
            raise KeyError(f"no explicit weight for edge {key}")
        w = spec.coerce(self.explicit[key])
        if w == 0:
            raise ValueError(f"explicit weight for {key} is zero")
        return w


def weighted_adjacency(G: HalfEdgeGraph | SimpleGraph, W: WeightModel, spec: FieldSpec,
                       rng: np.random.Generator | None = None) -> SparseMatrix:
    """Symmetric erased adjacency: J(i,j) where i != j are joined by >= 1 edge."""
    sg = G.simple() if isinstance(G, HalfEdgeGraph) else G
    if W.mode == "explicit":
        for key, val in W.explicit.items():
            if spec.coerce(val) == 0:
                raise ValueError(f"explicit weight for {key} is zero")
    if W.mode == "iid" and rng is None:
        raise ValueError("iid weights need an rng")
    rows: list[dict[int, Raw]] = [{} for _ in range(sg.n)]
    for i, j in sg.edges():
        w = W.weight(i, j, spec, rng)
        rows[i][j] = w
        rows[j][i] = w
    return SparseMatrix._trusted(sg.n, sg.n, spec, rows, True)


# -- Karp-Sipser ----------------------------------------------------------------


@dataclass
class PeelReport:
    removed_pairs: int
    isolated_removed: int
    core_vertices: frozenset[int]
    pairs: list[tuple[int, int]]

    @property
    def rank_contribution(self) -> int:
        return 2 * self.removed_pairs


def karp_sipser_peel(G: SimpleGraph | HalfEdgeGraph) -> PeelReport:
    """Repeatedly delete a vertex of degree <= 1 together with its neighbor.

    Vertices of degree 0 are deleted alone.  Candidates are served from a FIFO
    queue seeded in vertex order.
    """
    sg = G.simple() if isinstance(G, HalfEdgeGraph) else G
    adj = [set(a) for a in sg.adj]
    alive = [True] * sg.n
    queue = deque(v for v in range(sg.n) if len(adj[v]) <= 1)
    pairs: list[tuple[int, int]] = []
    isolated = 0

    def remove(x: int) -> None:
        alive[x] = False
        for w in adj[x]:
            adj[w].discard(x)
            if alive[w] and len(adj[w]) <= 1:
                queue.append(w)
        adj[x] = set()

    while queue:
        v = queue.popleft()
        if not alive[v] or len(adj[v]) > 1:
            continue
        if not adj[v]:
            alive[v] = False
            isolated += 1
            continue
        u = next(iter(adj[v]))
        pairs.append((v, u))
        remove(v)
        remove(u)
    core = frozenset(v for v in range(sg.n) if alive[v])
    return PeelReport(len(pairs), isolated, core, pairs)


def core_matrix(A: SparseMatrix, report: PeelReport) -> SparseMatrix:
    """A with every non-core row and column zeroed."""
    gone = [v for v in range(A.nrows) if v not in report.core_vertices]
    return A.zero_rows_cols(gone, gone)


def peeled_rank(A: SparseMatrix, report: PeelReport) -> int:
    """rank(A) computed as 2 * (peeled pairs) + rank(core block)."""
    return report.rank_contribution + core_matrix(A, report).rank()


# -- matching oracle -------------------------------------------------------------


def matching_number_oracle(G: SimpleGraph) -> int:
    """Exact maximum matching size.

    Forests of any size use a tree dynamic program; other graphs are limited
    to 30 vertices and use memoised branch and bound on the lowest-degree vertex.
    """
    if G.is_forest():
        return _forest_matching(G)
    if G.n > 30:
        raise ValueError("branch and bound limited to 30 vertices")
    nbr = [sum(1 << w for w in G.adj[v]) for v in range(G.n)]
    memo: dict[int, int] = {}

    def best(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        pick, pdeg, live = -1, 1 << 30, 0
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            dv = (nbr[v] & mask).bit_count()
            if dv:
                live += 1
                if dv < pdeg:
                    pick, pdeg = v, dv
        if pick < 0:
            memo[mask] = 0
            return 0
        rest = mask & ~(1 << pick)
        result = best(rest)
        bound = live // 2
        m = nbr[pick] & mask
        while m and result < bound:
            low = m & -m
            m ^= low
            result = max(result, 1 + best(rest & ~low))
        memo[mask] = result
        return result

    return best((1 << G.n) - 1)


def _forest_matching(G: SimpleGraph) -> int:
    # free[v]: best in subtree with v unmatched; any[v]: best overall in subtree
    seen = [False] * G.n
    total = 0
    for root in range(G.n):
        if seen[root]:
            continue
        order, parent = [], {root: -1}
        seen[root] = True
        stack = [root]
        while stack:
            v = stack.pop()
            order.append(v)
            for w in G.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    stack.append(w)
        free = {v: 0 for v in order}
        anyb = {v: 0 for v in order}
        for v in reversed(order):
            kids = [w for w in G.adj[v] if parent.get(w) == v]
            s = sum(anyb[w] for w in kids)
            free[v] = s
            gain = max((1 + free[w] - anyb[w] for w in kids), default=0)
            anyb[v] = s + max(gain, 0)
        total += anyb[root]
    return total


def random_tree(n: int, rng: np.random.Generator) -> SimpleGraph:
    """Uniform labelled tree on n vertices via a Pruefer sequence."""
    if n <= 1:
        return SimpleGraph(max(n, 0))
    if n == 2:
        return SimpleGraph.from_edges(2, [(0, 1)])
    seq = [int(x) for x in rng.integers(0, n, size=n - 2)]
    deg = [1] * n
    for x in seq:
        deg[x] += 1
    leaves = [v for v in range(n) if deg[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        deg[x] -= 1
        if deg[x] == 1:
            heapq.heappush(leaves, x)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return SimpleGraph.from_edges(n, edges)


# -- text I/O ----------------------------------------------------------------------


def write_edge_list(G: HalfEdgeGraph, path) -> None:
    """One line "u v multiplicity" per vertex pair (1-based, loops as u u)."""
    with open(path, "w") as fh:
        fh.write(f"# n {G.n}\n")
        for (u, v), k in sorted(G.multiplicities().items()):
            fh.write(f"{u + 1} {v + 1} {k}\n")


def read_edge_list(path) -> HalfEdgeGraph:
    n = None
    edges = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "#":
                if len(parts) >= 3 and parts[1] == "n":
                    n = int(parts[2])
                continue
            u, v, k = (int(x) for x in parts)
            edges.extend([(u - 1, v - 1)] * k)
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    g = HalfEdgeGraph(deg)
    nxt = g.offsets[:-1].copy()
    for u, v in edges:
        a = int(nxt[u]); nxt[u] += 1
        b = int(nxt[v]); nxt[v] += 1
        g.pair(a, b)
    return g


def write_degrees(d: DegreeSequence, path) -> None:
    np.savetxt(path, d.degrees, fmt="%d")


def read_degrees(path) -> DegreeSequence:
    return DegreeSequence(np.atleast_1d(np.loadtxt(path, dtype=np.int64)))
