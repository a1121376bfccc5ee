"""Bounded-confidence consensus with dissenter rewiring and opinion mutation.

One step is one asynchronous pair interaction followed by one mutation
trial. The functions :func:`consensus_update`, :func:`attempt_rewire`,
:func:`mutate` and :func:`step` are the pure-Python reference path operating
on :class:`SimState`. :class:`Simulation` runs the same rules through a
compiled loop and is what :func:`run` uses; both consume the random stream in
the same order, so a seed fixes one trajectory regardless of path.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernel
from .distributions import DistributionSpec, sample, sample_vector
from .errors import InvalidParameterError, PreconditionError
from .graph import AdaptiveGraph, erdos_renyi, random_neighbor, random_node, rewire_edge
from .rng import RandomStream

INDEPENDENT = "independent"
INTERACTING = "interacting"
MUTATION_TARGETS = (INDEPENDENT, INTERACTING)
DEFAULT_PROBE_LIMIT = 50


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    Attributes:
        n: node count.
        k_avg: target mean degree of the initial ER graph.
        d: tolerance threshold; pairs closer than ``d`` compromise.
        mu: convergence rate of a compromise.
        w: probability that a dissenting pair rewires.
        p: per-step mutation probability.
        initial: distribution of the initial opinions.
        basal: distribution mutated opinions are drawn from.
    """

    n: int
    k_avg: float
    d: float
    mu: float = 0.5
    w: float = 0.5
    p: float = 0.1
    initial: DistributionSpec = field(default_factory=DistributionSpec)
    basal: DistributionSpec = field(default_factory=DistributionSpec)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise InvalidParameterError(f"n must be an integer >= 2, got {self.n}")
        if not 0 <= self.k_avg <= self.n - 1:
            raise InvalidParameterError(f"k_avg must be in [0,{self.n - 1}], got {self.k_avg}")
        if not 0 < self.d <= 1:
            raise InvalidParameterError(f"d must be in (0,1], got {self.d}")
        if not 0 < self.mu <= 0.5:
            raise InvalidParameterError(f"mu must be in (0,0.5], got {self.mu}")
        if not 0 <= self.w <= 1:
            raise InvalidParameterError(f"w must be in [0,1], got {self.w}")
        if not 0 <= self.p <= 1:
            raise InvalidParameterError(f"p must be in [0,1], got {self.p}")
        for name in ("initial", "basal"):
            if not isinstance(getattr(self, name), DistributionSpec):
                raise InvalidParameterError(f"{name} must be a DistributionSpec")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["initial"] = self.initial.to_dict()
        out["basal"] = self.basal.to_dict()
        return out

    @property
    def mutation_timescale(self) -> float:
        """``n / p``: steps for every node to mutate about once (inf when p = 0)."""
        return math.inf if self.p == 0 else self.n / self.p


@dataclass
class SimState:
    graph: AdaptiveGraph
    opinions: np.ndarray
    step: int = 0

    def __post_init__(self):
        self.opinions = np.asarray(self.opinions, dtype=np.float64)
        if self.opinions.shape != (self.graph.node_count,):
            raise InvalidParameterError("opinion vector length must equal node count")


@dataclass(frozen=True)
class StepOutcome:
    interaction: str
    mutated: Optional[int] = None

    CONSENSUS = "consensus"
    REWIRED = "rewired"
    REJECTED = "rejected-no-rewire"
    ISOLATED = "isolated-node"


@dataclass(frozen=True)
class Snapshot:
    step: int
    opinions: np.ndarray
    edges: np.ndarray


def consensus_update(oa: float, ob: float, mu: float, d: float) -> tuple[float, float]:
    """Both opinions move toward each other by ``mu`` times their gap if it is below ``d``."""
    diff = oa - ob
    if abs(diff) < d:
        shift = mu * diff
        return oa - shift, ob + shift
    return oa, ob


def _is_candidate(state: SimState, a: int, c: int, d: float) -> bool:
    ops = state.opinions
    return c != a and abs(ops[a] - ops[c]) < d and not state.graph.has_edge(a, c)


def attempt_rewire(state: SimState, a: int, b: int, w: float, d: float, rng: RandomStream,
                   probe_limit: int = DEFAULT_PROBE_LIMIT) -> StepOutcome:
    """With probability ``w`` move dissenting edge ``{a, b}`` to a like-minded non-neighbour of ``a``.

    ``probe_limit > 0`` draws up to that many uniform random nodes and takes
    the first valid one; ``probe_limit == 0`` scans all nodes and picks a
    valid one uniformly. Without a candidate the edge stays put.
    """
    if not state.graph.has_edge(a, b):
        raise PreconditionError(f"edge {{{a}, {b}}} not present")
    if abs(state.opinions[a] - state.opinions[b]) < d:
        raise PreconditionError("attempt_rewire called on a pair within tolerance")
    n = state.graph.node_count
    target = None
    if rng.uniform() < w:
        if probe_limit > 0:
            for _ in range(probe_limit):
                c = int(rng.uniform() * n)
                if _is_candidate(state, a, c, d):
                    target = c
                    break
        else:
            valid = [c for c in range(n) if _is_candidate(state, a, c, d)]
            if valid:
                target = valid[int(rng.uniform() * len(valid))]
    if target is None:
        return StepOutcome(StepOutcome.REJECTED)
    rewire_edge(state.graph, a, b, target)
    return StepOutcome(StepOutcome.REWIRED)


def mutate(state: SimState, p: float, basal: DistributionSpec, rng: RandomStream,
           pair: Optional[tuple[int, Optional[int]]] = None) -> Optional[int]:
    """With probability ``p`` replace one node's opinion by a basal draw.

    The node is uniform over all nodes, or, when ``pair`` is given, one of
    the two interacting nodes chosen by a fair coin. Returns its id or None.
    """
    if rng.uniform() >= p:
        return None
    u = rng.uniform()
    if pair is None:
        m = int(u * state.graph.node_count)
    else:
        a, b = pair
        m = a if (b is None or u < 0.5) else b
    state.opinions[m] = sample(basal, rng)
    return m


def step(state: SimState, params: ModelParams, rng: RandomStream,
         probe_limit: int = DEFAULT_PROBE_LIMIT, mutation_target: str = INDEPENDENT) -> StepOutcome:
    g, ops = state.graph, state.opinions
    a = random_node(g, rng)
    b = random_neighbor(g, a, rng)
    if b is None:
        interaction = StepOutcome.ISOLATED
    elif abs(ops[a] - ops[b]) < params.d:
        ops[a], ops[b] = consensus_update(ops[a], ops[b], params.mu, params.d)
        interaction = StepOutcome.CONSENSUS
    else:
        interaction = attempt_rewire(state, a, b, params.w, params.d, rng, probe_limit).interaction
    pair = (a, b) if mutation_target == INTERACTING else None
    mutated = mutate(state, params.p, params.basal, rng, pair)
    state.step += 1
    return StepOutcome(interaction, mutated)


class Simulation:
    """Compiled-kernel simulation of one realization.

    Args:
        params: model parameters.
        rng: random stream; consumed by graph and opinion initialisation
            first when ``state`` is not supplied.
        state: optional starting state (copied).
        probe_limit: random probes per rewiring search; 0 scans all nodes.
        mutation_target: ``"independent"`` or ``"interacting"``.
    """

    def __init__(self, params: ModelParams, rng: RandomStream, state: Optional[SimState] = None,
                 probe_limit: int = DEFAULT_PROBE_LIMIT, mutation_target: str = INDEPENDENT):
        if mutation_target not in MUTATION_TARGETS:
            raise InvalidParameterError(f"mutation_target must be one of {MUTATION_TARGETS}")
        if probe_limit < 0:
            raise InvalidParameterError("probe_limit must be >= 0")
        self.params = params
        self.rng = rng
        self.probe_limit = int(probe_limit)
        self.interacting = mutation_target == INTERACTING
        if state is None:
            graph = erdos_renyi(params.n, params.k_avg, rng)
            state = SimState(graph, sample_vector(params.initial, params.n, rng))
        if state.graph.node_count != params.n:
            raise InvalidParameterError("state size does not match params.n")
        self.step = state.step
        self.opinions = state.opinions.copy()
        self.deg = state.graph.degrees()
        cap = max(8, 2 * int(self.deg.max(initial=0)))
        self.nbrs = np.full((params.n, cap), -1, dtype=np.int64)
        for v, row in enumerate(state.graph.adjacency()):
            self.nbrs[v, :len(row)] = row
        self._pos = _kernel.build_positions(self.nbrs, self.deg)
        self.tally = np.zeros(_kernel.TALLY_SIZE, dtype=np.int64)

    def advance(self, steps: int) -> None:
        par = self.params
        need = _kernel.draws_per_step(self.probe_limit)
        remaining = int(steps)
        chunk_draws = max(1 << 16, 64 * need)
        while remaining > 0:
            buf, cur = self.rng.reserve(min(remaining * need, chunk_draws))
            done, cur, self.nbrs = _kernel.advance(
                self.opinions, self.nbrs, self.deg, self._pos, buf, cur, remaining,
                par.d, par.mu, par.w, par.p, par.basal.code, par.basal.gamma, par.basal.x_min,
                self.probe_limit, self.interacting, self.tally)
            self.rng.commit(cur)
            remaining -= done
            self.step += done

    def edges(self) -> np.ndarray:
        return _kernel.canonical_edges(self.nbrs, self.deg)

    @property
    def edge_count(self) -> int:
        return int(self.deg.sum()) // 2

    def snapshot(self) -> Snapshot:
        return Snapshot(self.step, self.opinions.copy(), self.edges())

    def graph(self) -> AdaptiveGraph:
        return AdaptiveGraph.from_adjacency([self.nbrs[v, :k].tolist() for v, k in enumerate(self.deg)])

    def state(self) -> SimState:
        return SimState(self.graph(), self.opinions.copy(), self.step)


def check_schedule(schedule: Sequence[int], total_steps: int) -> list[int]:
    sched = [int(t) for t in schedule]
    if total_steps < 0:
        raise InvalidParameterError("total_steps must be >= 0")
    if not sched or sched[0] != 0:
        raise InvalidParameterError("snapshot schedule must start at step 0")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise InvalidParameterError("snapshot schedule must be strictly increasing")
    if sched[-1] > total_steps:
        raise InvalidParameterError(f"snapshot step {sched[-1]} exceeds total_steps {total_steps}")
    return sched


def iter_run(params: ModelParams, total_steps: int, snapshot_schedule: Sequence[int], rng: RandomStream,
             **engine_kw) -> Iterator[Snapshot]:
    sched = check_schedule(snapshot_schedule, total_steps)
    sim = Simulation(params, rng, **engine_kw)
    for t in sched:
        sim.advance(t - sim.step)
        yield sim.snapshot()
    sim.advance(total_steps - sim.step)


def run(params: ModelParams, total_steps: int, snapshot_schedule: Sequence[int], rng: RandomStream,
        **engine_kw) -> list[Snapshot]:
    """Initialise a graph and opinions from ``rng`` and run ``total_steps`` steps.

    Snapshots are taken at each scheduled step; step 0 is the initial state.
    """
    return list(iter_run(params, total_steps, snapshot_schedule, rng, **engine_kw))
