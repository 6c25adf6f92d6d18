"""Monte Carlo over (n, replicate, field, weights): sample, build, rank."""
from __future__ import annotations

import csv
import json
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .. import __version__
from ..ffield import FieldSpec
from ..graphs import (WeightModel, karp_sipser_peel, sample_configuration,
                      sample_degree_sequence, weighted_adjacency)
from ..sparse import Perturbation
from ..theory import Pgf, R_minimize
from .config import ExperimentConfig
from .seeds import derive_seed


@dataclass
class ResultRow:
    experiment: str
    n: int
    replicate: int
    field: str
    weights: str
    seed: int
    rank: int
    rank_over_n: float
    r_min: float
    abs_error: float
    peel_pairs: int
    isolated: int
    core_size: int
    loops: int
    multi_edges: int
    rank_perturbed: int | None
    theta_r: int | None
    theta_c: int | None
    wall_time: float


@dataclass
class SummaryRow:
    experiment: str
    n: int
    field: str
    weights: str
    count: int
    mean_rank_over_n: float
    std_rank_over_n: float
    r_min: float
    abs_error: float


def _task(args) -> list[ResultRow]:
    cfg, n, rep, r_min = args
    t0 = time.perf_counter()
    g_rng = np.random.default_rng(derive_seed(cfg.seed, n, rep))
    d = sample_degree_sequence(cfg.distribution, n, g_rng, cfg.degree_mode)
    G = sample_configuration(d, g_rng)
    sg = G.simple()
    peel = karp_sipser_peel(sg)
    loops, multi = G.loop_count(), G.multi_edge_count()
    base = time.perf_counter() - t0
    rows = []
    for fi, fname in enumerate(cfg.fields):
        spec = FieldSpec.parse(fname)
        for wi, wname in enumerate(cfg.weights):
            t1 = time.perf_counter()
            seed = derive_seed(cfg.seed, n, rep, fi + 1, wi + 1)
            w_rng = np.random.default_rng(seed)
            A = weighted_adjacency(sg, WeightModel(wname), spec, w_rng)
            rank = A.rank()
            rp = tr = tc = None
            if cfg.perturbation > 0:
                pert = Perturbation.sample(n, cfg.perturbation, w_rng)
                rp, tr, tc = pert.border(A).rank(), pert.theta_r, pert.theta_c
            rows.append(ResultRow(cfg.name, n, rep, fname, wname, seed, rank, rank / n, r_min,
                                  abs(rank / n - r_min), peel.removed_pairs, peel.isolated_removed,
                                  len(peel.core_vertices), loops, multi, rp, tr, tc,
                                  base + time.perf_counter() - t1))
    return rows


def run_simulation(cfg: ExperimentConfig) -> tuple[list[ResultRow], list[SummaryRow]]:
    r_min = R_minimize(Pgf.of(cfg.distribution)).value
    tasks = [(cfg, n, rep, r_min) for n in cfg.n for rep in range(cfg.replicates)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(cfg.threads) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    return rows, summarize(rows)


def summarize(rows: list[ResultRow]) -> list[SummaryRow]:
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.experiment, r.n, r.field, r.weights), []).append(r)
    out = []
    for (exp, n, f, w), rs in groups.items():
        x = np.array([r.rank_over_n for r in rs])
        std = float(x.std(ddof=1)) if x.size > 1 else 0.0
        mean = float(x.mean())
        out.append(SummaryRow(exp, n, f, w, x.size, mean, std, rs[0].r_min, abs(mean - rs[0].r_min)))
    return out


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).resolve().parent)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_csv(path: Path, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("")
        return
    names = [f.name for f in fields(rows[0])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for r in rows:
            w.writerow([getattr(r, k) for k in names])


def write_sidecar(path: Path, cfg: ExperimentConfig, extra: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"version": version_string(), "config": cfg.as_dict(), **extra}
    path.write_text(json.dumps(payload, indent=2, default=_jsonable))


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if hasattr(x, "__dataclass_fields__"):
        return asdict(x)
    return str(x)


def cmd_simulate(cfg: ExperimentConfig) -> tuple[list[ResultRow], list[SummaryRow]]:
    t0 = time.perf_counter()
    rows, summary = run_simulation(cfg)
    prefix = cfg.out_prefix
    write_csv(prefix.with_name(prefix.name + "_rows.csv"), rows)
    write_csv(prefix.with_name(prefix.name + "_summary.csv"), summary)
    write_sidecar(prefix.with_name(prefix.name + ".json"), cfg,
                  {"summary": [asdict(s) for s in summary], "wall_time": time.perf_counter() - t0})
    return rows, summary
