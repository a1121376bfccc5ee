"""On-disk layout of simulation output.

    DIR/config.toml
    DIR/seed-<s>/snapshot-<t>.opinions.csv   node_id,opinion
    DIR/seed-<s>/snapshot-<t>.edges.txt      "u v" per edge, u < v, sorted
    DIR/seed-<s>/histograms.csv              step,bin_low,bin_high,mass
    DIR/report.txt

Histograms and the report are derived from the snapshot files alone, so
``analyze`` on a finished run reproduces them byte for byte.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import (cluster_count, community_bridge_count, convergence_check, histogram,
                       histograms_csv)
from .config import RunConfig, dump_config, parse_config
from .dynamics import Snapshot, iter_run
from .graph import read_edge_list, write_edge_list
from .rng import RandomStream, run_seed

_SNAP_RE = re.compile(r"snapshot-(\d+)\.opinions\.csv$")
_SEED_RE = re.compile(r"seed-(\d+)$")


def format_opinions(opinions: np.ndarray) -> str:
    body = "".join(f"{i},{x:.17g}\n" for i, x in enumerate(np.asarray(opinions).tolist()))
    return "node_id,opinion\n" + body


def read_opinions(path: Path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64, ndmin=2)
    if not np.array_equal(data[:, 0], np.arange(data.shape[0])):
        raise ValueError(f"{path}: node ids must be 0..n-1 in order")
    return data[:, 1].copy()


def write_snapshot(snap: Snapshot, seed_dir: Path) -> None:
    (seed_dir / f"snapshot-{snap.step}.opinions.csv").write_text(format_opinions(snap.opinions))
    write_edge_list(snap.edges, seed_dir / f"snapshot-{snap.step}.edges.txt")


def snapshot_steps(seed_dir: Path) -> list[int]:
    steps = [int(m.group(1)) for f in seed_dir.iterdir() if (m := _SNAP_RE.match(f.name))]
    return sorted(steps)


def seed_dirs(run_dir: Path) -> list[tuple[int, Path]]:
    found = [(int(m.group(1)), p) for p in Path(run_dir).iterdir() if p.is_dir() and (m := _SEED_RE.match(p.name))]
    return sorted(found)


def seed_summary(seed_dir: Path, cfg: RunConfig) -> tuple[str, str, dict]:
    """Histogram CSV, report section and metrics for one seed directory."""
    steps = snapshot_steps(seed_dir)
    if not steps:
        raise FileNotFoundError(f"no snapshots in {seed_dir}")
    rows = []
    for t in steps:
        final = read_opinions(seed_dir / f"snapshot-{t}.opinions.csv")
        rows.append((t, histogram(final, cfg.bins)))
    edges = read_edge_list(seed_dir / f"snapshot-{steps[-1]}.edges.txt")
    d = cfg.params.d
    conv = convergence_check([h for _, h in rows], cfg.convergence_threshold, cfg.convergence_window, steps)
    metrics = {
        "final_step": steps[-1],
        "snapshots": len(steps),
        "edge_count": edges.shape[0],
        "mean_opinion": float(np.mean(final)),
        "major_clusters": cluster_count(final, d / 2),
        "raw_clusters": cluster_count(final, d / 2, min_fraction=0.0),
        "bridges": community_bridge_count(edges, final, d),
        "converged": conv.converged,
    }
    lines = [f"[{seed_dir.name}]"]
    for key, value in metrics.items():
        if key == "converged":
            continue
        lines.append(f"{key} = {value:.17g}" if isinstance(value, float) else f"{key} = {value}")
    section = "\n".join(lines) + f"\n\n[{seed_dir.name}.convergence]\n" + conv.to_text()
    return histograms_csv(rows), section, metrics


def summarize(run_dir: Path, out_dir: Optional[Path] = None) -> str:
    """Recompute histograms and the report of ``run_dir``; write them under ``out_dir`` if given."""
    run_dir = Path(run_dir)
    cfg = parse_config((run_dir / "config.toml").read_text())
    sections = []
    for _, sd in seed_dirs(run_dir):
        hist_csv, section, _ = seed_summary(sd, cfg)
        sections.append(section)
        if out_dir is not None:
            target = Path(out_dir) / sd.name
            target.mkdir(parents=True, exist_ok=True)
            (target / "histograms.csv").write_text(hist_csv)
    report = "\n".join(sections)
    if out_dir is not None:
        (Path(out_dir) / "report.txt").write_text(report)
    return report


def execute_run(cfg: RunConfig, out_dir: Path, threads: int = 1) -> list[int]:
    """Run every seed of ``cfg`` into ``out_dir`` and write the summary; returns the seeds."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.toml").write_text(dump_config(cfg))
    seeds = [run_seed(cfg.seed, i) for i in range(cfg.runs)]

    def one(seed: int) -> None:
        sd = out_dir / f"seed-{seed}"
        sd.mkdir(exist_ok=True)
        for snap in iter_run(cfg.params, cfg.total_steps, cfg.snapshot_schedule, RandomStream(seed),
                             **cfg.engine_kw()):
            write_snapshot(snap, sd)

    if threads <= 1 or len(seeds) == 1:
        for s in seeds:
            one(s)
    else:
        with ThreadPoolExecutor(min(threads, len(seeds))) as pool:
            list(pool.map(one, seeds))
    summarize(out_dir, out_dir)
    return seeds


def load_config(path: Path) -> RunConfig:
    return parse_config(Path(path).read_text())

