"""Scenario presets and ensemble protocols.

A scenario's steady state is measured the same way everywhere: the run is
sampled every tenth of its relaxation time ``n/p`` (``100 n`` when ``p = 0``),
sub-samples are averaged in blocks, and a :func:`convergence_check` over the
block histograms decides when the distribution has stopped moving. Once the
detector has fired and the scenario's step budget is spent, ten more
snapshots one sub-sample apart are averaged into the steady-state histogram.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import (DEFAULT_BINS, ConvergenceReport, OpinionHistogram, cluster_count,
                       community_bridge_count, convergence_check, histogram, l1_distance,
                       mean_histogram)
from .distributions import DistributionSpec
from .dynamics import ModelParams, Simulation, Snapshot
from .errors import InvalidParameterError
from .rng import RandomStream, run_seed

FULL = "full"
DESK = "desk"
SCALES = (FULL, DESK)
DESK_N = 1000
DESK_K = 10
DESK_BUDGET = 5  # relaxation times per desk run
NO_NOISE_RELAXATION = 100  # steps per node standing in for n/p when p = 0
DEFAULT_SEEDS = tuple(range(10))


def relaxation_steps(params: ModelParams) -> int:
    """Steps for each node to mutate about once: ``n/p``, or ``100 n`` without mutation."""
    if params.p == 0:
        return NO_NOISE_RELAXATION * params.n
    return int(round(params.n / params.p))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("OPINIOND_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ModelParams
    total_steps: int
    snapshot_schedule: tuple[int, ...]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    scale: str = FULL

    def __post_init__(self):
        if self.scale not in SCALES:
            raise InvalidParameterError(f"scale must be one of {SCALES}")
        if self.snapshot_schedule[-1] > self.total_steps:
            raise InvalidParameterError("snapshot schedule exceeds total_steps")

    def with_seeds(self, seeds: Sequence[int]) -> "Scenario":
        return replace(self, seeds=tuple(int(s) for s in seeds))


_EX1 = dict(n=10_000, k_avg=20, d=0.25, mu=0.5, w=0.5, p=0.1)
_EX1_SCHEDULE = (0, 50_000, 150_000, 1_500_000)
_EX2_SCHEDULE = (0, 100_000, 500_000, 2_000_000, 10_000_000, 30_000_000)
_U = DistributionSpec.uniform()
_PL = DistributionSpec.powerlaw(3.0, 0.01)


def _fig1(name: str, d: float, p: float) -> Scenario:
    params = ModelParams(n=1000, k_avg=10, d=d, w=0.5, p=p)
    tau = relaxation_steps(params)
    sched = tuple(k * tau for k in range(DESK_BUDGET + 1))
    return Scenario(name, params, sched[-1], sched)


def _ex1_like(name: str, initial: DistributionSpec, basal: DistributionSpec, p: float = 0.1) -> Scenario:
    params = ModelParams(**{**_EX1, "p": p}, initial=initial, basal=basal)
    total = max(_EX1_SCHEDULE[-1], DESK_BUDGET * relaxation_steps(params))
    sched = _EX1_SCHEDULE + ((total,) if total > _EX1_SCHEDULE[-1] else ())
    return Scenario(name, params, total, sched)


def _ex2(name: str, initial: DistributionSpec) -> Scenario:
    params = ModelParams(**{**_EX1, "d": 0.1, "p": 0.001}, initial=initial, basal=_U)
    return Scenario(name, params, _EX2_SCHEDULE[-1], _EX2_SCHEDULE)


_FULL_PRESETS: dict[str, Callable[[], Scenario]] = {
    "ex1-uniform": lambda: _ex1_like("ex1-uniform", _U, _U),
    "ex1-powerlaw": lambda: _ex1_like("ex1-powerlaw", _PL, _U),
    "ex2-powerlaw": lambda: _ex2("ex2-powerlaw", _PL),
    "ex2-uniform": lambda: _ex2("ex2-uniform", _U),
    "fig5-swap-a": lambda: _ex1_like("fig5-swap-a", _PL, _U),
    "fig5-swap-b": lambda: _ex1_like("fig5-swap-b", _U, _PL),
    "fig1-a": lambda: _fig1("fig1-a", 0.25, 0.1),
    "fig1-b": lambda: _fig1("fig1-b", 0.25, 0.01),
    "fig1-c": lambda: _fig1("fig1-c", 0.25, 0.001),
    "fig1-d": lambda: _fig1("fig1-d", 0.1, 0.001),
    "nonoise-baseline": lambda: _ex1_like("nonoise-baseline", _U, _U, p=0.0),
    "nonoise-powerlaw": lambda: _ex1_like("nonoise-powerlaw", _PL, _U, p=0.0),
}
PRESET_NAMES = tuple(_FULL_PRESETS)


def desk_scale(full: Scenario) -> Scenario:
    """Shrink a scenario to ``n = 1000``, ``k_avg = 10`` and ``5 n/p`` steps.

    Probabilities and distributions are untouched. The snapshot schedule is
    rescaled by the ratio of relaxation times, truncated to the new budget,
    and always ends at the final step.
    """
    if full.params.n <= DESK_N:
        return replace(full, scale=DESK)
    params = replace(full.params, n=DESK_N, k_avg=DESK_K)
    total = DESK_BUDGET * relaxation_steps(params)
    factor = relaxation_steps(params) / relaxation_steps(full.params)
    sched = sorted({int(round(t * factor)) for t in full.snapshot_schedule if t * factor <= total} | {total})
    return Scenario(full.name, params, total, tuple(sched), full.seeds, DESK)


def preset(name: str, scale: str = FULL) -> Scenario:
    if name not in _FULL_PRESETS:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    if scale not in SCALES:
        raise InvalidParameterError(f"scale must be one of {SCALES}")
    full = _FULL_PRESETS[name]()
    return full if scale == FULL else desk_scale(full)


@dataclass(frozen=True)
class Detector:
    """Steady-state detector settings.

    Attributes:
        threshold: largest adjacent L1 distance counted as "not moving".
        window: number of consecutive adjacent distances that must pass.
        block: sub-samples averaged into one history entry.
        samples: sub-samples per relaxation time; also the number of
            snapshots averaged into the steady-state histogram.
        max_factor: give up after this many times the step budget.
    """

    threshold: float = 0.25
    window: int = 5
    block: int = 5
    samples: int = 10
    max_factor: float = 4.0


@dataclass
class SteadyState:
    seed: int
    histogram: OpinionHistogram
    convergence: ConvergenceReport
    fired_at: Optional[int]
    initial_mean: float
    final_mean: float
    bridge_counts: list[int]
    cluster_counts: list[int]
    final: Snapshot = field(repr=False)

    @property
    def converged(self) -> bool:
        return self.fired_at is not None


def detect_convergence(sim: Simulation, detector: Detector = Detector(), bins: int = DEFAULT_BINS,
                       min_steps: int = 0, max_steps: Optional[int] = None) -> tuple[Optional[int], ConvergenceReport]:
    """Advance ``sim`` in sub-sample strides until the detector fires.

    Stops once the detector has fired and ``min_steps`` is reached, or at
    ``max_steps``. Returns the firing step (None if it never fired) and the
    report from that moment (or the last one evaluated).
    """
    sub = max(1, relaxation_steps(sim.params) // detector.samples)
    if max_steps is None:
        max_steps = int(detector.max_factor * max(min_steps, sub))
    history, steps, pending = [], [], []
    fired, report = None, ConvergenceReport(False, threshold=detector.threshold, window=detector.window)
    while sim.step < max_steps:
        sim.advance(min(sub, max_steps - sim.step))
        pending.append(histogram(sim.opinions, bins))
        if len(pending) == detector.block:
            history.append(mean_histogram(pending))
            steps.append(sim.step)
            pending = []
            if fired is None:
                report = convergence_check(history, detector.threshold, detector.window, steps)
                if report.converged:
                    fired = sim.step
        if fired is not None and sim.step >= min_steps:
            break
    return fired, report


def steady_state(scenario: Scenario, seed: int, detector: Detector = Detector(),
                 bins: int = DEFAULT_BINS, **engine_kw) -> SteadyState:
    """Run one realization past its budget and detector firing, then average ``samples`` snapshots."""
    params = scenario.params
    sim = Simulation(params, RandomStream(seed), **engine_kw)
    initial_mean = float(sim.opinions.mean())
    sub = max(1, relaxation_steps(params) // detector.samples)
    cap = int(detector.max_factor * max(scenario.total_steps, sub))
    fired, report = detect_convergence(sim, detector, bins, scenario.total_steps, cap)
    hists, bridges, clusters = [], [], []
    for _ in range(detector.samples):
        sim.advance(sub)
        hists.append(histogram(sim.opinions, bins))
        bridges.append(community_bridge_count(sim.edges(), sim.opinions, params.d))
        clusters.append(cluster_count(sim.opinions, params.d / 2))
    return SteadyState(seed, mean_histogram(hists), report, fired, initial_mean,
                       float(sim.opinions.mean()), bridges, clusters, sim.snapshot())


def convergence_step(scenario: Scenario, seed: int, until: int, detector: Detector = Detector(),
                     bins: int = DEFAULT_BINS, **engine_kw) -> Optional[int]:
    """Step at which the detector fires on a fresh run, or None if not by ``until``."""
    sim = Simulation(scenario.params, RandomStream(seed), **engine_kw)
    return detect_convergence(sim, detector, bins, 0, until)[0]


def ensemble(scenario: Scenario, seeds: Optional[Sequence[int]] = None, detector: Detector = Detector(),
             bins: int = DEFAULT_BINS, threads: Optional[int] = None, **engine_kw) -> list[SteadyState]:
    """Steady states for every seed, ordered by seed."""
    seeds = list(scenario.seeds if seeds is None else seeds)
    workers = min(threads or worker_count(), max(1, len(seeds)))
    job = lambda s: steady_state(scenario, s, detector, bins, **engine_kw)  # noqa: E731
    if workers == 1:
        return [job(s) for s in seeds]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(job, seeds))


_SHARED = ("n", "k_avg", "d", "mu", "w", "p", "basal")


@dataclass
class ComparisonReport:
    name_a: str
    name_b: str
    runs_a: list[SteadyState]
    runs_b: list[SteadyState]
    cross: list[float]
    baseline: list[float]

    @property
    def cross_mean(self) -> float:
        return float(np.mean(self.cross))

    @property
    def cross_sd(self) -> float:
        return float(np.std(self.cross, ddof=1)) if len(self.cross) > 1 else 0.0

    @property
    def baseline_mean(self) -> float:
        return float(np.mean(self.baseline))

    @property
    def baseline_sd(self) -> float:
        return float(np.std(self.baseline, ddof=1)) if len(self.baseline) > 1 else 0.0

    @property
    def excess_sigma(self) -> float:
        """Cross-minus-baseline mean distance in baseline standard deviations."""
        sd = self.baseline_sd
        diff = self.cross_mean - self.baseline_mean
        if sd == 0:
            return 0.0 if diff == 0 else float(np.sign(diff) * np.inf)
        return diff / sd

    def to_text(self) -> str:
        conv_a = sum(r.converged for r in self.runs_a)
        conv_b = sum(r.converged for r in self.runs_b)
        return (
            f'scenario_a = "{self.name_a}"\n'
            f'scenario_b = "{self.name_b}"\n'
            f"seeds = [{', '.join(str(r.seed) for r in self.runs_a)}]\n"
            f"cross_mean = {self.cross_mean:.17g}\n"
            f"cross_sd = {self.cross_sd:.17g}\n"
            f"baseline_mean = {self.baseline_mean:.17g}\n"
            f"baseline_sd = {self.baseline_sd:.17g}\n"
            f"excess_sigma = {self.excess_sigma:.17g}\n"
            f"converged_a = {conv_a}\n"
            f"converged_b = {conv_b}\n"
        )

    def per_seed_csv(self) -> str:
        ens_a = mean_histogram([r.histogram for r in self.runs_a])
        ens_b = mean_histogram([r.histogram for r in self.runs_b])
        rows = ["scenario,seed,fired_at,initial_mean,final_mean,l1_to_ensemble_a,l1_to_ensemble_b"]
        for label, runs in (("a", self.runs_a), ("b", self.runs_b)):
            for r in runs:
                fired = -1 if r.fired_at is None else r.fired_at
                rows.append(f"{label},{r.seed},{fired},{r.initial_mean:.17g},{r.final_mean:.17g},"
                            f"{l1_distance(r.histogram, ens_a):.17g},{l1_distance(r.histogram, ens_b):.17g}")
        return "\n".join(rows) + "\n"


def pairwise_distances(runs_a: Sequence[SteadyState], runs_b: Sequence[SteadyState]) -> tuple[list[float], list[float]]:
    """Cross-ensemble distances (pairs with different seeds) and within-ensemble baseline distances."""
    cross = [l1_distance(x.histogram, y.histogram) for x in runs_a for y in runs_b if x.seed != y.seed]
    baseline = [l1_distance(x.histogram, y.histogram)
                for runs in (runs_a, runs_b) for x, y in itertools.combinations(runs, 2)]
    return cross, baseline


def run_comparison(s1: Scenario, s2: Scenario, seeds: Optional[Sequence[int]] = None,
                   detector: Detector = Detector(), bins: int = DEFAULT_BINS,
                   threads: Optional[int] = None, **engine_kw) -> ComparisonReport:
    """Compare the steady states of two scenarios that differ only in their initial distribution.

    Both scenarios run on the same seeds. The cross distance uses pairs of
    runs with different seeds, so comparing a scenario with itself gives
    exactly the baseline.
    """
    for key in _SHARED:
        if getattr(s1.params, key) != getattr(s2.params, key):
            raise InvalidParameterError(f"scenarios differ in {key}; only the initial distribution may differ")
    seeds = list(s1.seeds if seeds is None else seeds)
    runs_a = ensemble(s1, seeds, detector, bins, threads, **engine_kw)
    runs_b = runs_a if s2 == s1 else ensemble(s2, seeds, detector, bins, threads, **engine_kw)
    cross, baseline = pairwise_distances(runs_a, runs_b)
    return ComparisonReport(s1.name, s2.name, runs_a, runs_b, cross, baseline)


def basal_dominance(runs_a: Sequence[SteadyState], runs_b: Sequence[SteadyState]) -> tuple[list[bool], list[bool]]:
    """For each run, is it strictly closer to its own ensemble (leave-one-out) than to the other one?"""
    def verdicts(own, other):
        other_mean = mean_histogram([r.histogram for r in other])
        out = []
        for i, r in enumerate(own):
            rest = mean_histogram([x.histogram for j, x in enumerate(own) if j != i])
            out.append(l1_distance(r.histogram, rest) < l1_distance(r.histogram, other_mean))
        return out
    return verdicts(runs_a, runs_b), verdicts(runs_b, runs_a)


def seeds_from(base: int, count: int) -> list[int]:
    return [run_seed(base, i) for i in range(count)]
