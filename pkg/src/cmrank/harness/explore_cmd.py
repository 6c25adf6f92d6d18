"""Exploration experiments: concentration of trajectories, conditional degree
law and type fixed-point residuals, compared with the analytic predictions."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .. import theory as T
from ..exploration import (explore, size_biased_type_proportions, stage_matrix,
                           step1_events_in_window, MAX_TYPE_N)
from ..ffield import FieldSpec
from ..graphs import WeightModel, sample_degree_sequence, weighted_adjacency
from ..sparse import Perturbation
from .config import ExperimentConfig
from .seeds import derive_seed
from .simulate import write_sidecar


@dataclass
class ReplicateReport:
    n: int
    replicate: int
    seed: int
    sup_V: float
    sup_L: float
    sup_Vbar: float
    step1_in_window: int
    cond_degree: int | None = None


@dataclass
class TypeRow:
    n: int
    replicate: int
    s: float
    x: float
    y: float
    z: float
    u: float
    v: float
    drop: int
    res_y: float
    res_u: float
    res_v: float
    z_slack: float
    degree_fallback: bool


@dataclass
class ExploreReport:
    window: tuple[float, float]
    replicates: list[ReplicateReport] = field(default_factory=list)
    types: list[TypeRow] = field(default_factory=list)
    cond: dict | None = None
    residual_means: dict | None = None

    def worst(self) -> dict:
        r = self.replicates
        return {
            "sup_V": max(x.sup_V for x in r),
            "sup_L": max(x.sup_L for x in r),
            "sup_Vbar": max(x.sup_Vbar for x in r),
            "step1_free_fraction": float(np.mean([x.step1_in_window == 0 for x in r])),
        }


def theory_grid(psi: T.Pgf, snapshots, lo: float, hi: float, kmax: int):
    """Predicted V_k/n, Vbar_k/n (k <= kmax) and L/n at each window snapshot."""
    out = {}
    lam0 = psi.mean
    for s in snapshots:
        if lo - 1e-12 <= s <= hi + 1e-12:
            t = T.t_of_s(psi, s)
            k = np.arange(kmax + 1)
            p = np.pad(psi.coef, (0, max(0, kmax + 1 - psi.coef.size)))[: kmax + 1]
            vbar = np.pad(T.current_degree_law(psi, t), (0, kmax + 1))[: kmax + 1]
            out[s] = (np.exp(-k * t) * p, vbar, lam0 * math.exp(-2 * t))
    return out


def _dev(emp: np.ndarray, n: int, pred: np.ndarray) -> float:
    e = np.pad(emp, (0, max(0, pred.size - emp.size)))[: pred.size] / n
    return float(np.abs(e - pred).max())


def run_replicate(cfg: ExperimentConfig, psi: T.Pgf, n: int, rep: int, grid, window, kmax: int,
                  write_dir=None) -> tuple[ReplicateReport, list[TypeRow]]:
    seed = derive_seed(cfg.seed, n, rep)
    rng = np.random.default_rng(seed)
    d = sample_degree_sequence(cfg.distribution, n, rng, cfg.degree_mode)
    snaps = sorted(set(cfg.snapshots) | set(grid))
    state, traj = explore(d, rng, snaps)
    sup_v = sup_l = sup_vb = 0.0
    for s, (pv, pvb, pl) in grid.items():
        snap = traj.snapshots.get(s)
        if snap is None:
            continue
        sup_v = max(sup_v, _dev(snap.V, n, pv))
        sup_vb = max(sup_vb, _dev(snap.Vbar, n, pvb))
        sup_l = max(sup_l, abs(snap.L / n - pl))
    rep_out = ReplicateReport(n, rep, seed, sup_v, sup_l, sup_vb,
                              step1_events_in_window(state, *window))
    if cfg.cond_s is not None:
        c = int(math.floor(cfg.cond_s * n + 1e-9))
        if c < state.num_awake:
            rep_out.cond_degree = state.conditional_degree(c)
    if write_dir is not None:
        with open(write_dir / f"trajectory_n{n}_r{rep}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "k", "V_k", "Vbar_k", "S", "L", "step1_flag"])
            w.writerows(traj.rows())
    types = []
    if cfg.type_s:
        if n > MAX_TYPE_N:
            raise ValueError(f"type mode needs n <= {MAX_TYPE_N}")
        spec = cfg.field_specs[0]
        w_rng = np.random.default_rng(derive_seed(cfg.seed, n, rep, 1, 1))
        A = weighted_adjacency(state.graph, WeightModel(cfg.weights[0]), spec, w_rng)
        pert = Perturbation.sample(n, cfg.perturbation, w_rng) if cfg.perturbation > 0 else None
        for s in cfg.type_s:
            c = int(math.floor(s * n + 1e-9))
            M = stage_matrix(A, state, c, pert)
            zeta = size_biased_type_proportions(M, state, c)
            drop = M.rank() - stage_matrix(A, state, c + 1, pert).rank() if c < state.num_awake else 0
            _, h = T.deformed_pgfs(psi, T.t_of_s(psi, s))
            res = T.fixed_point_residuals(h, zeta.zeta)
            types.append(TypeRow(n, rep, s, *zeta.zeta, drop, res.y, res.u, res.v, res.z_slack,
                                 zeta.degree_fallback))
    return rep_out, types


def run_explore(cfg: ExperimentConfig, write: bool = True) -> ExploreReport:
    psi = T.Pgf.of(cfg.distribution)
    lo = cfg.eps
    hi = T.window_end(psi, cfg.eps) if T.criticality(psi) == "supercritical" else 1 - psi.coef[0] - cfg.eps
    kmax = min(psi.coef.size - 1, int(cfg.tol.get("kmax", 3)))
    grid = theory_grid(psi, cfg.snapshots, lo, hi, kmax)
    report = ExploreReport(window=(lo, hi))
    out_dir = None
    if write:
        prefix = cfg.out_prefix
        out_dir = prefix.with_name(prefix.name + "_traj")
        out_dir.mkdir(parents=True, exist_ok=True)
    for n in cfg.n:
        for rep in range(cfg.replicates):
            r, t = run_replicate(cfg, psi, n, rep, grid, (lo, hi), kmax, out_dir)
            report.replicates.append(r)
            report.types.extend(t)
    if cfg.cond_s is not None:
        q = T.q_law(psi, cfg.cond_s)
        ks = [r.cond_degree for r in report.replicates if r.cond_degree is not None]
        report.cond = conditional_law_report(ks, q)
    if report.types:
        report.residual_means = {}
        for s in cfg.type_s:
            rows = [t for t in report.types if t.s == s]
            report.residual_means[s] = {
                "res_y": float(np.mean([t.res_y for t in rows])),
                "res_u": float(np.mean([t.res_u for t in rows])),
                "res_v": float(np.mean([t.res_v for t in rows])),
                "z_slack": float(np.mean([t.z_slack for t in rows])),
                "mean_drop": float(np.mean([t.drop for t in rows])),
                "mean_expected_drop": float(np.mean([t.x + 2 * t.y + t.u + t.v for t in rows])),
            }
    return report


def conditional_law_report(ks: list[int], q: np.ndarray) -> dict:
    """Histogram of sampled conditional degrees against the predicted law."""
    K = max(q.size, max(ks, default=0) + 1)
    qq = np.pad(q, (0, K - q.size))
    counts = np.bincount(ks, minlength=K)[:K] if ks else np.zeros(K, dtype=int)
    N = int(counts.sum())
    hist = counts / N if N else counts.astype(float)
    tv = 0.5 * float(np.abs(hist - qq).sum())
    support = qq > 0
    if N and (counts[~support] == 0).all():
        chi2, pval = stats.chisquare(counts[support], N * qq[support] / qq[support].sum())
    else:
        chi2, pval = float("inf"), 0.0
    return {"samples": N, "histogram": hist.tolist(), "predicted": qq.tolist(), "tv": tv,
            "chi2": float(chi2), "p_value": float(pval)}


def cmd_explore(cfg: ExperimentConfig) -> ExploreReport:
    t0 = time.perf_counter()
    report = run_explore(cfg)
    prefix = cfg.out_prefix
    if report.types:
        with open(prefix.with_name(prefix.name + "_types.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "x", "y", "z", "u", "v", "drop"])
            for t in report.types:
                w.writerow([t.s, t.x, t.y, t.z, t.u, t.v, t.drop])
    write_sidecar(prefix.with_name(prefix.name + "_explore.json"), cfg, {
        "window": report.window,
        "worst": report.worst(),
        "replicates": [asdict(r) for r in report.replicates],
        "types": [asdict(t) for t in report.types],
        "conditional_degree": report.cond,
        "residual_means": report.residual_means,
        "wall_time": time.perf_counter() - t0,
    })
    return report
