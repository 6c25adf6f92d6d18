import csv
import json
from dataclasses import asdict

import numpy as np
import pytest

from cmrank.cli import main
from cmrank.degrees import parse_distribution
from cmrank.harness.config import DEFAULT_TOL, ExperimentConfig, load_config, parse_config
from cmrank.harness.explore_cmd import conditional_law_report, run_explore
from cmrank.harness.seeds import derive_seed, splitmix64
from cmrank.harness.simulate import run_simulation, summarize
from cmrank.harness.verify import run_suite

SIM = """
# small mixed experiment
name = smoke
degree = list:0.5@1,0.5@3
n = 300, 500
replicates = 3
fields = gf:2, gf:5, q
weights = ones, iid
perturbation = 2
seed = 11
tol.rank = 0.05
"""


def strip_time(rows):
    return [{k: v for k, v in asdict(r).items() if k != "wall_time"} for r in rows]


# -- configuration ------------------------------------------------------------


def test_parse_config():
    cfg = parse_config(SIM)
    assert cfg.n == (300, 500) and cfg.replicates == 3
    assert cfg.fields == ("gf:2", "gf:5", "q") and cfg.weights == ("ones", "iid")
    assert cfg.tol["rank"] == 0.05 and cfg.tol["tv"] == DEFAULT_TOL["tv"]
    cfg = parse_config("degree = delta:3\nn = 1e4\nsnapshots = 0:0.2:0.1\ncond_s = 0.3")
    assert cfg.n == (10000,) and cfg.snapshots == (0.0, 0.1, 0.2) and cfg.cond_s == 0.3


@pytest.mark.parametrize("text", [
    "degree = delta:3\nn = 0",
    "degree = delta:3\nn = 10\nreplicates = 0",
    "degree = delta:3\nn = 10\nfields = gf:4",
    "degree = delta:3\nn = 10\nweights = random",
    "degree = bogus:1\nn = 10",
    "n = 10",
    "degree = delta:3\nn = 10\nmystery = 1",
])
def test_config_rejects(text):
    with pytest.raises(ValueError):
        parse_config(text)


def test_load_config_and_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(SIM)
    cfg = load_config(p).with_overrides(seed=5, out=None, threads=2)
    assert cfg.seed == 5 and cfg.threads == 2 and cfg.out == ""


def test_distribution_grammar():
    assert parse_distribution("delta:3").as_dict() == {3: 1.0}
    assert parse_distribution("er:lambda=3").as_dict() == parse_distribution("poisson:3").as_dict()
    d = parse_distribution("poisson:3 truncate:5")
    assert d.max_degree == 5 and abs(d.probs.sum() - 1) < 1e-12


# -- seeds ----------------------------------------------------------------------


def test_seed_derivation():
    # reference values of the splitmix64 finaliser
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(1) == 0x910A2DEC89025CC1
    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
    seeds = {derive_seed(7, n, r) for n in range(20) for r in range(20)}
    assert len(seeds) == 400
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)


# -- simulation -------------------------------------------------------------------


def test_simulation_reproducible():
    cfg = parse_config(SIM)
    rows1, _ = run_simulation(cfg)
    rows2, _ = run_simulation(cfg.with_overrides(threads=2))
    assert strip_time(rows1) == strip_time(rows2)
    rows3, _ = run_simulation(cfg.with_overrides(fields=("gf:2",)))
    # graphs do not depend on the field list
    a = [(r.n, r.replicate, r.peel_pairs, r.loops) for r in rows1 if r.field == "gf:2"]
    b = [(r.n, r.replicate, r.peel_pairs, r.loops) for r in rows3]
    assert a == b


def test_simulation_rows_and_summary():
    rows, summary = run_simulation(parse_config(SIM))
    for r in rows:
        assert 0 <= r.rank <= r.n and 0 <= r.rank_over_n <= 1
        assert abs(r.rank_perturbed - r.rank) <= 2 * 2
    assert len(summary) == 2 * 3 * 2
    for s in summary:
        x = np.array([r.rank_over_n for r in rows
                      if (r.n, r.field, r.weights) == (s.n, s.field, s.weights)])
        assert abs(x.mean() - s.mean_rank_over_n) <= 1e-12
        assert abs(x.std(ddof=1) - s.std_rank_over_n) <= 1e-12
    assert summarize(rows) == summary


# -- exploration ----------------------------------------------------------------------


def test_run_explore_report():
    cfg = parse_config("degree = list:0.5@1,0.5@3\nn = 3000\nreplicates = 2\n"
                       "snapshots = 0:0.6:0.1\ncond_s = 0.3\nseed = 4")
    rep = run_explore(cfg, write=False)
    assert rep.window[0] == 0.05 and abs(rep.window[1] - (0.814815 - 0.05)) < 1e-5
    w = rep.worst()
    assert w["sup_V"] < 0.05 and w["sup_L"] < 0.06
    assert rep.cond["samples"] == 2


def test_type_mode():
    cfg = parse_config("degree = list:0.5@1,0.5@3\nn = 120\nreplicates = 3\nperturbation = 3\n"
                       "type_s = 0.2, 0.4\nfields = gf:3\nweights = iid")
    rep = run_explore(cfg, write=False)
    assert len(rep.types) == 6
    for t in rep.types:
        assert abs(t.x + t.y + t.z + t.u + t.v - 1) < 1e-12
    assert set(rep.residual_means) == {0.2, 0.4}
    with pytest.raises(ValueError):
        run_explore(cfg.with_overrides(n=(600,)), write=False)


def test_conditional_law_report():
    q = np.array([0.5, 0.25, 0.25])
    r = conditional_law_report([0, 0, 1, 2], q)
    assert r["tv"] == 0 and r["samples"] == 4
    r = conditional_law_report([0, 0, 0, 5], q)
    assert r["p_value"] == 0.0 and r["tv"] > 0.3


# -- verify -----------------------------------------------------------------------


def test_verify_theory_suite():
    res = run_suite("theory", 0)
    assert res and all(r.ok for r in res), [r for r in res if not r.ok]


def test_verify_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope", 0)


# -- CLI ------------------------------------------------------------------------------


def test_cli_predict(capsys):
    assert main(["predict", "delta:3"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["criticality"] == "supercritical" and abs(d["r_min"] - 1) < 1e-9
    assert main(["predict", "list:0.5@1,0.5@2"]) == 0
    assert abs(json.loads(capsys.readouterr().out)["r_min"] - 0.9) < 1e-9
    assert main(["predict", "delta:2"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["criticality"] == "critical-p2" and abs(d["r_min"] - 1) < 1e-9
    assert main(["predict", "nonsense"]) == 2


def test_cli_simulate(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("degree = delta:3\nn = 400\nreplicates = 2\nfields = gf:2, q\n")
    out = tmp_path / "res" / "run"
    assert main(["--seed", "9", "simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert "mean rank/n" in capsys.readouterr().out
    with open(tmp_path / "res" / "run_rows.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4 and all(int(r["rank"]) <= 400 for r in rows)
    side = json.loads((tmp_path / "res" / "run.json").read_text())
    assert side["config"]["seed"] == 9 and "version" in side
    assert (tmp_path / "res" / "run_summary.csv").exists()


def test_cli_explore(tmp_path, capsys):
    cfg = tmp_path / "ex.cfg"
    cfg.write_text("degree = list:0.5@1,0.5@3\nn = 200\nreplicates = 2\ntype_s = 0.3\n"
                   "perturbation = 2\ncond_s = 0.3\nsnapshots = 0:0.5:0.1\n")
    out = tmp_path / "ex"
    assert main(["explore", "--config", str(cfg), "--out", str(out)]) == 0
    assert "window" in json.loads(capsys.readouterr().out)
    traj = sorted((tmp_path / "ex_traj").iterdir())
    assert len(traj) == 2
    with open(traj[0]) as fh:
        assert next(csv.reader(fh)) == ["s", "k", "V_k", "Vbar_k", "S", "L", "step1_flag"]
    with open(tmp_path / "ex_types.csv") as fh:
        assert next(csv.reader(fh)) == ["s", "x", "y", "z", "u", "v", "drop"]
    side = json.loads((tmp_path / "ex_explore.json").read_text())
    assert side["residual_means"]


def test_cli_verify(capsys):
    assert main(["verify", "theory"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["verify", "bogus"]) == 2


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("degree = delta:3\nn = 0\n")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert "error" in capsys.readouterr().err
