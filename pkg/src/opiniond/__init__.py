"""Bounded-confidence opinion dynamics on adaptive networks with opinion mutation."""

from .analysis import (ConvergenceReport, OpinionHistogram, cluster_count, community_bridge_count,
                       convergence_check, histogram, l1_distance)
from .config import RunConfig, dump_config, parse_config
from .distributions import DistributionSpec, sample, sample_vector
from .dynamics import (ModelParams, SimState, Simulation, Snapshot, StepOutcome, attempt_rewire,
                       consensus_update, mutate, run, step)
from .errors import ConfigError, InvalidParameterError, OpiniondError, PreconditionError
from .experiments import Scenario, preset, run_comparison
from .graph import AdaptiveGraph, erdos_renyi, random_neighbor, random_node, rewire_edge
from .rng import RandomStream

__version__ = "0.1.0"
