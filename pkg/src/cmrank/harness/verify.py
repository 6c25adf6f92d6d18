"""Seeded desk-scale property suites behind ``cmrank verify``."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .. import theory as T
from ..degrees import parse_distribution
from ..exploration import explore
from ..ffield import FieldSpec
from ..graphs import (SimpleGraph, WeightModel, karp_sipser_peel, matching_number_oracle,
                      peeled_rank, random_tree, sample_configuration, sample_degree_sequence,
                      weighted_adjacency)
from ..sparse import (FrozenStatus, SparseMatrix, attach_perturbation, classify_variable,
                      frozen_status, rank_drop, solution_count_oracle)

FIELDS = [FieldSpec.gf(2), FieldSpec.gf(3), FieldSpec.gf(5)]


@dataclass
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: str
    seconds: float


def random_matrix(rng, nrows, ncols, spec: FieldSpec, density=0.5, symmetric=False) -> SparseMatrix:
    rows = [{} for _ in range(nrows)]
    for i in range(nrows):
        for j in range(i if symmetric else 0, ncols):
            if rng.random() < density:
                v = spec.random_raw(rng)
                rows[i][j] = v
                if symmetric:
                    rows[j][i] = v
    return SparseMatrix(nrows, ncols, spec, rows, symmetric)


# -- linalg ---------------------------------------------------------------------


def check_solution_count(rng, count=200):
    for _ in range(count):
        spec = FIELDS[int(rng.integers(3))]
        n = int(rng.integers(1, 8))
        A = random_matrix(rng, int(rng.integers(1, 9)), n, spec, rng.random())
        if solution_count_oracle(A) != spec.modulus ** (n - A.rank()):
            return False, f"solution count mismatch on {A}"
    return True, f"{count} matrices"


def check_transpose_rank(rng, count=200):
    for _ in range(count):
        spec = FIELDS[int(rng.integers(3))]
        A = random_matrix(rng, int(rng.integers(1, 12)), int(rng.integers(1, 12)), spec, rng.random())
        if A.rank() != A.transpose().rank():
            return False, "rank(A) != rank(A^T)"
    return True, f"{count} matrices"


def check_lemma_identity(rng, count=200):
    checked = 0
    for spec in FIELDS:
        for _ in range(count):
            n = int(rng.integers(2, 11))
            A = random_matrix(rng, n, n, spec, rng.random(), symmetric=True)
            for i in range(n):
                rank_drop(A, i, check=True)
                checked += 1
    return True, f"{checked} (matrix, index) pairs"


def check_frozen_characterisation(rng, count=100):
    for _ in range(count):
        spec = FIELDS[int(rng.integers(3))]
        m, n = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        A = random_matrix(rng, m, n, spec, rng.random())
        for i in range(min(m, n)):
            st = frozen_status(A, i)
            lost = A.rank() - A.zero_rows_cols(cols=[i]).rank()
            if (st is not FrozenStatus.NOT_FROZEN) != (lost == 1):
                return False, "frozen status disagrees with column-zeroing rank loss"
            if (st is FrozenStatus.FRAIL) != (frozen_status(A.transpose(), i) is FrozenStatus.FRAIL):
                return False, "frail status not symmetric under transposition"
    return True, f"{count} rectangular matrices"


def check_reweighting(rng, count=100):
    for _ in range(count):
        spec = FIELDS[1 + int(rng.integers(2))]
        n = int(rng.integers(2, 8))
        A = random_matrix(rng, n, n, spec, rng.random())
        i = int(rng.integers(n))
        B = A.scale_row(i, spec.random_raw(rng))
        if B.rank() != A.rank():
            return False, "row scaling changed rank"
        if any(frozen_status(A, j) != frozen_status(B, j) for j in range(n)):
            return False, "row scaling changed a frozen status"
    return True, f"{count} matrices"


def check_perturbation_bound(rng, count=100):
    for _ in range(count):
        spec = FIELDS[int(rng.integers(3))]
        n = int(rng.integers(1, 15))
        P = int(rng.integers(1, 6))
        A = random_matrix(rng, n, n, spec, rng.random(), symmetric=True)
        B, pert = attach_perturbation(A, P, rng)
        if abs(B.rank() - A.rank()) > pert.theta_r + pert.theta_c:
            return False, "bordering changed rank by more than theta_r + theta_c"
    return True, f"{count} matrices"


# -- peel -------------------------------------------------------------------------


def check_peel_identity(rng, count=100):
    laws = ["list:0.5@1,0.5@3", "poisson:2.5", "delta:3", "list:0.2@0,0.3@1,0.5@2"]
    specs = [FieldSpec.gf(2), FieldSpec.gf(5), FieldSpec.rationals()]
    for k in range(count):
        dist = parse_distribution(laws[k % len(laws)])
        n = int(rng.integers(2, 61))
        G = sample_configuration(sample_degree_sequence(dist, n, rng), rng).simple()
        rep = karp_sipser_peel(G)
        for spec in specs:
            for mode in ("ones", "iid"):
                A = weighted_adjacency(G, WeightModel(mode), spec, rng)
                if A.rank() != peeled_rank(A, rep):
                    return False, f"peeling identity failed over {spec} ({mode})"
    return True, f"{count} graphs x 3 fields x 2 weight modes"


def check_trees(rng, count=50):
    specs = [FieldSpec.gf(2), FieldSpec.gf(5), FieldSpec.rationals()]
    for _ in range(count):
        T_ = random_tree(int(rng.integers(1, 121)), rng)
        nu = matching_number_oracle(T_)
        rep = karp_sipser_peel(T_)
        if rep.core_vertices:
            return False, "Karp-Sipser left a core in a tree"
        for spec in specs:
            for mode in ("ones", "iid"):
                if weighted_adjacency(T_, WeightModel(mode), spec, rng).rank() != 2 * nu:
                    return False, "tree rank differs from twice the matching number"
    return True, f"{count} trees"


def check_matching_oracle(rng, count=60):
    for _ in range(count):
        n = int(rng.integers(1, 9))
        edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.4]
        G = SimpleGraph.from_edges(n, edges)
        best = 0
        for r in range(len(edges), 0, -1):
            if any(len({v for e in sub for v in e}) == 2 * r for sub in itertools.combinations(edges, r)):
                best = r
                break
        if matching_number_oracle(G) != best:
            return False, "branch and bound disagrees with edge-subset enumeration"
    return True, f"{count} graphs"


# -- explore ----------------------------------------------------------------------


def check_pairing_law(rng, samples=20000):
    counts: dict[tuple, int] = {}
    for _ in range(samples):
        st, _ = explore(np.array([1, 1, 1, 1]), rng)
        e = tuple(sorted(tuple(sorted(x)) for x in st.graph.edges().tolist()))
        counts[e] = counts.get(e, 0) + 1
    if len(counts) != 3:
        return False, f"saw {len(counts)} matchings"
    p = stats.chisquare(list(counts.values())).pvalue
    return p > 1e-3, f"chi-square p = {p:.3g}"


def check_bookkeeping(rng, runs=20):
    for _ in range(runs):
        n = int(rng.integers(10, 400))
        d = sample_degree_sequence(parse_distribution("poisson:2"), n, rng)
        grid = list(np.round(np.arange(0, 1.0001, 0.1), 10))
        st, traj = explore(d, rng, grid)
        for s, snap in traj.snapshots.items():
            if snap.S != int((np.arange(snap.V.size) * snap.V).sum()):
                return False, "S != sum k V_k"
            if int(snap.V.sum()) != n - snap.stage:
                return False, "sleeping count mismatch"
        if not st.graph.is_complete():
            return False, "incomplete pairing"
        st.graph.check()
    return True, f"{runs} runs"


def check_concentration(rng, n=20000):
    psi = T.Pgf.of({1: 0.5, 3: 0.5})
    d = sample_degree_sequence(parse_distribution("list:0.5@1,0.5@3"), n, rng)
    grid = [0.1, 0.2, 0.3, 0.4]
    _, traj = explore(d, rng, grid)
    worst = 0.0
    for s in grid:
        t = T.t_of_s(psi, s)
        snap = traj.get(s)
        pred = np.exp(-np.arange(4) * t) * psi.coef
        worst = max(worst, float(np.abs(snap.V[:4] / n - pred[: snap.V[:4].size]).max()))
    return worst <= 0.02, f"sup deviation {worst:.4f}"


# -- theory -----------------------------------------------------------------------

FOUR_POINT = {1: 0.3, 2: 0.1, 3: 0.3, 4: 0.3}


def check_integral_identity(rng):
    worst = 0.0
    for law in ({1: 0.5, 3: 0.5}, FOUR_POINT):
        psi = T.Pgf.of(law)
        for S in (0.1, 0.3):
            worst = max(worst, abs(T.integral_identity_check(psi, S).diff))
    return worst <= 1e-6, f"max |lhs - rhs| = {worst:.2e}"


def check_g_structure(rng):
    for law in ({1: 0.5, 3: 0.5}, FOUR_POINT, {3: 1.0}, {4: 1.0}):
        psi = T.Pgf.of(law)
        for s in np.linspace(0, T.window_end(psi, 0.05), 12):
            pt, h = T.deformed_pgfs(psi, T.t_of_s(psi, float(s)))
            gz = T.G_zeros(h)
            if gz.count not in (1, 3) and not gz.degenerate:
                return False, f"{gz.count} zeros"
            if abs(gz.alpha_low - (1 - h(gz.alpha_high))) > 1e-9:
                return False, "alpha_low != 1 - psi_hat(alpha_high)"
            if abs(T.R_eval(pt, gz.alpha_low) - T.R_eval(pt, gz.alpha_high)) > 1e-9:
                return False, "R differs at the extreme zeros"
    return True, "4 laws x 12 times"


def check_R_factorisation(rng):
    worst = 0.0
    for law in ({1: 0.5, 3: 0.5}, FOUR_POINT, {3: 1.0}):
        psi = T.Pgf.of(law)
        a = np.linspace(0, 1, 1001)
        worst = max(worst, float(np.abs(T.R_prime(psi, a)
                                        - psi.deriv(2)(a) * T.G_eval(psi.size_biased(), a)).max()))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def check_closed_form(rng):
    worst = max(abs(T.R_minimize({1: p1, 2: 1 - p1}).value - T.closed_form_p1p2(p1))
                for p1 in np.round(np.arange(0.1, 0.95, 0.1), 10))
    return worst <= 1e-9, f"max deviation {worst:.2e}"


SUITES: dict[str, list[tuple[str, Callable]]] = {
    "linalg": [
        ("solution count oracle", check_solution_count),
        ("rank(A) = rank(A^T)", check_transpose_rank),
        ("rank-drop identity", check_lemma_identity),
        ("frozen characterisation", check_frozen_characterisation),
        ("row reweighting invariance", check_reweighting),
        ("perturbation rank bound", check_perturbation_bound),
    ],
    "peel": [
        ("peeling rank identity", check_peel_identity),
        ("tree rank = 2 nu", check_trees),
        ("matching oracle", check_matching_oracle),
    ],
    "explore": [
        ("pairing law", check_pairing_law),
        ("bookkeeping", check_bookkeeping),
        ("sleeping-degree concentration", check_concentration),
    ],
    "theory": [
        ("integral identity", check_integral_identity),
        ("G zero structure", check_g_structure),
        ("R' = psi'' G", check_R_factorisation),
        ("closed form on {1,2}", check_closed_form),
    ],
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, seed)]
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    out = []
    for k, (label, fn) in enumerate(SUITES[name]):
        rng = np.random.default_rng([seed, k])
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, label, bool(ok), detail, time.perf_counter() - t0))
    return out
