"""Command line: predict, simulate, explore, verify."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import theory as T
from .degrees import parse_distribution


def _predict(args) -> int:
    try:
        dist = parse_distribution(args.spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    prof = T.profile(T.Pgf.of(dist))
    payload = {"spec": args.spec, **prof.to_dict()}
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def _load(args):
    from .harness.config import load_config

    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, out=args.out, threads=args.threads)


def _simulate(args) -> int:
    from .harness.simulate import cmd_simulate

    cfg = _load(args)
    _, summary = cmd_simulate(cfg)
    for s in summary:
        print(f"{s.experiment} n={s.n} {s.field} {s.weights}: mean rank/n = {s.mean_rank_over_n:.5f}"
              f" (sd {s.std_rank_over_n:.5f}, {s.count} reps), r_min = {s.r_min:.5f},"
              f" |diff| = {s.abs_error:.5f}")
    return 0


def _explore(args) -> int:
    from .harness.explore_cmd import cmd_explore

    cfg = _load(args)
    rep = cmd_explore(cfg)
    print(json.dumps({"window": rep.window, "worst": rep.worst(),
                      "conditional_degree": rep.cond,
                      "residual_means": rep.residual_means}, indent=2))
    return 0


def _verify(args) -> int:
    from .harness.verify import SUITES, run_suite

    if args.suite not in list(SUITES) + ["all"]:
        print(f"error: unknown suite {args.suite!r}", file=sys.stderr)
        return 2
    results = run_suite(args.suite, args.seed or 0)
    for r in results:
        print(f"[{'PASS' if r.ok else 'FAIL'}] {r.suite:8s} {r.name:32s} {r.seconds:7.2f}s  {r.detail}")
    if args.out:
        Path(args.out).write_text(json.dumps([asdict(r) for r in results], indent=2))
    return 0 if all(r.ok for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    def globals_parser(default):
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, default=default, help="master seed (overrides config)")
        g.add_argument("--out", default=default, help="output path or prefix")
        g.add_argument("--threads", type=int, default=default, help="worker processes")
        return g

    # options may appear before or after the subcommand; the subcommand copy
    # must not clobber a value given before it
    common = globals_parser(argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="cmrank", parents=[globals_parser(None)],
                                description="Rank of edge-weighted configuration models.")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("predict", parents=[common], help="analytic profile of a degree law")
    sp.add_argument("spec", help='e.g. "delta:3", "list:0.5@1,0.5@3", "poisson:3"')
    sp.set_defaults(func=_predict)
    sp = sub.add_parser("simulate", parents=[common], help="Monte Carlo rank experiment")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=_simulate)
    sp = sub.add_parser("explore", parents=[common], help="exploration process experiment")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=_explore)
    sp = sub.add_parser("verify", parents=[common], help="run property suites")
    sp.add_argument("suite", help="linalg | peel | explore | theory | all")
    sp.set_defaults(func=_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
