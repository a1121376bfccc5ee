"""Command-line interface: ``opiniond {run,compare,sweep,analyze}``."""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .config import RunConfig
from .errors import OpiniondError
from .experiments import (DESK_BUDGET, PRESET_NAMES, SCALES, Detector, preset, relaxation_steps,
                          run_comparison, seeds_from, worker_count)
from .output import execute_run, load_config, seed_dirs, seed_summary, summarize

log = logging.getLogger("opiniond")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESET_NAMES)
    src.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--scale", choices=SCALES, default="desk", help="preset scale (default: desk)")
    p.add_argument("--seed", type=int, help="base seed (runs use seed, seed+1, ...)")
    p.add_argument("--seeds", type=int, help="number of seeds to run")
    p.add_argument("--steps", type=int, help="override total steps (schedule is clipped)")
    p.add_argument("--probe-limit", type=int, help="rewiring probes per attempt; 0 scans all nodes")
    p.add_argument("--mutation-target", choices=("independent", "interacting"))
    p.add_argument("--bins", type=int)
    p.add_argument("--out", type=Path, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opiniond", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one configuration")
    _add_source(run)

    sweep = sub.add_parser("sweep", help="cross a (d, p, w) grid, one output directory per cell")
    _add_source(sweep)
    sweep.add_argument("--d", type=_float_list, help="comma-separated tolerance values")
    sweep.add_argument("--p", type=_float_list, help="comma-separated mutation probabilities")
    sweep.add_argument("--w", type=_float_list, help="comma-separated rewiring probabilities")

    cmp_ = sub.add_parser("compare", help="steady-state comparison of two presets")
    cmp_.add_argument("--preset-a", choices=PRESET_NAMES, required=True)
    cmp_.add_argument("--preset-b", choices=PRESET_NAMES, required=True)
    cmp_.add_argument("--scale", choices=SCALES, default="desk")
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.add_argument("--seeds", type=int, default=10)
    cmp_.add_argument("--bins", type=int, default=20)
    cmp_.add_argument("--threshold", type=float, default=Detector.threshold,
                      help="detector threshold on block-averaged histograms")
    cmp_.add_argument("--probe-limit", type=int, default=50)
    cmp_.add_argument("--out", type=Path, required=True)

    ana = sub.add_parser("analyze", help="recompute histograms and report from stored snapshots")
    ana.add_argument("--in", dest="in_dir", type=Path, required=True)
    ana.add_argument("--out", type=Path, help="write histograms.csv and report.txt here (default: print report)")
    return parser


def _base_config(args) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        scn = preset(args.preset, args.scale)
        cfg = RunConfig(scn.params, scn.total_steps, scn.snapshot_schedule)
    cfg = cfg.with_overrides(seed=args.seed, runs=args.seeds, rewire_probe_limit=args.probe_limit,
                             mutation_target=args.mutation_target, bins=args.bins, output_dir=str(args.out))
    if args.steps is not None:
        sched = tuple(t for t in cfg.snapshot_schedule if t < args.steps) + (args.steps,)
        cfg = replace(cfg, total_steps=args.steps, snapshot_schedule=tuple(sorted(set(sched))))
    return cfg


def cmd_run(args) -> int:
    cfg = _base_config(args)
    seeds = execute_run(cfg, args.out, worker_count())
    log.info("wrote %d run(s) to %s", len(seeds), args.out)
    return 0


def _cell_name(d: float, p: float, w: float) -> str:
    return f"d-{d!r}_p-{p!r}_w-{w!r}"


def cmd_sweep(args) -> int:
    base = _base_config(args)
    ds = args.d or [base.params.d]
    ps = args.p or [base.params.p]
    ws = args.w or [base.params.w]
    args.out.mkdir(parents=True, exist_ok=True)
    lines = ["cell,d,p,w,seed,final_step,major_clusters,bridges,converged"]
    for d, p, w in itertools.product(ds, ps, ws):
        params = replace(base.params, d=d, p=p, w=w)
        cfg = replace(base, params=params)
        if args.steps is None:
            tau = relaxation_steps(params)
            sched = tuple(k * tau for k in range(DESK_BUDGET + 1))
            cfg = replace(cfg, total_steps=sched[-1], snapshot_schedule=sched)
        cell = args.out / _cell_name(d, p, w)
        cfg = replace(cfg, output_dir=str(cell))
        execute_run(cfg, cell, worker_count())
        for seed, sd in seed_dirs(cell):
            m = seed_summary(sd, cfg)[2]
            lines.append(f"{cell.name},{d!r},{p!r},{w!r},{seed},{m['final_step']},"
                         f"{m['major_clusters']},{m['bridges']},{str(m['converged']).lower()}")
    (args.out / "sweep.csv").write_text("\n".join(lines) + "\n")
    (args.out / "report.txt").write_text(f"cells = {len(ds) * len(ps) * len(ws)}\n"
                                         f"seeds_per_cell = {base.runs}\n")
    return 0


def cmd_compare(args) -> int:
    a = preset(args.preset_a, args.scale)
    b = preset(args.preset_b, args.scale)
    seeds = seeds_from(args.seed, args.seeds)
    rep = run_comparison(a, b, seeds, Detector(threshold=args.threshold), args.bins,
                         worker_count(), probe_limit=args.probe_limit)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.txt").write_text(rep.to_text())
    (args.out / "distances.csv").write_text(rep.per_seed_csv())
    sys.stdout.write(rep.to_text())
    return 0


def cmd_analyze(args) -> int:
    if args.out is not None and args.out.resolve() == args.in_dir.resolve():
        raise OpiniondError("analyze must not write into its input directory")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
    report = summarize(args.in_dir, args.out)
    if args.out is None:
        sys.stdout.write(report)
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare, "analyze": cmd_analyze}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OpiniondError, OSError, ValueError) as exc:
        print(f"opiniond: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
