"""Steady-state characterisation of opinion vectors and graphs."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError

DEFAULT_BINS = 20
DEFAULT_THRESHOLD = 0.1
DEFAULT_WINDOW = 5
MAJOR_CLUSTER_FRACTION = 0.01


@dataclass(frozen=True, eq=False)
class OpinionHistogram:
    """Normalised opinion density on ``bins`` equal-width bins over [0, 1].

    Bin ``i`` covers ``[i/B, (i+1)/B)``; the last bin is closed so 1.0 lands in it.
    """

    bins: int
    mass: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, OpinionHistogram) and self.bins == other.bins
                and np.array_equal(self.mass, other.mass))

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.bins + 1) / self.bins

    def to_csv(self, step: Optional[int] = None) -> str:
        edges = self.edges
        prefix = "" if step is None else f"{step},"
        return "".join(f"{prefix}{edges[i]:.17g},{edges[i + 1]:.17g},{m:.17g}\n"
                       for i, m in enumerate(self.mass.tolist()))


def histogram(opinions, bins: int = DEFAULT_BINS) -> OpinionHistogram:
    x = np.asarray(opinions, dtype=np.float64)
    if bins < 2:
        raise InvalidParameterError("histogram needs at least 2 bins")
    if x.size == 0:
        raise InvalidParameterError("cannot histogram an empty population")
    inner = np.arange(1, bins) / bins
    idx = np.searchsorted(inner, x, side="right")
    counts = np.bincount(idx, minlength=bins)
    return OpinionHistogram(bins, counts / x.size)


def mean_histogram(hists: Sequence[OpinionHistogram]) -> OpinionHistogram:
    if not hists:
        raise InvalidParameterError("no histograms to average")
    bins = hists[0].bins
    if any(h.bins != bins for h in hists):
        raise InvalidParameterError("histograms have different bin counts")
    return OpinionHistogram(bins, np.mean([h.mass for h in hists], axis=0))


def l1_distance(h1: OpinionHistogram, h2: OpinionHistogram) -> float:
    """Sum of absolute mass differences (twice the total variation distance)."""
    if h1.bins != h2.bins:
        raise InvalidParameterError(f"bin mismatch: {h1.bins} vs {h2.bins}")
    return float(np.abs(h1.mass - h2.mass).sum())


def cluster_sizes(opinions, gap: float) -> np.ndarray:
    """Sizes of maximal runs of sorted opinions whose neighbours differ by less than ``gap``."""
    x = np.sort(np.asarray(opinions, dtype=np.float64))
    if x.size == 0:
        raise InvalidParameterError("cannot cluster an empty population")
    if not gap > 0:
        raise InvalidParameterError("gap must be positive")
    breaks = np.flatnonzero(np.diff(x) >= gap) + 1
    return np.diff(np.concatenate(([0], breaks, [x.size])))


def cluster_count(opinions, gap: float, min_fraction: float = MAJOR_CLUSTER_FRACTION) -> int:
    """Number of opinion clusters holding at least ``min_fraction`` of the nodes.

    Mutation keeps spawning short-lived singletons, so by default clusters
    under 1% are dropped; pass ``min_fraction=0`` for the raw count. The
    usual gap is half the tolerance threshold.
    """
    sizes = cluster_sizes(opinions, gap)
    return int(np.count_nonzero(sizes >= min_fraction * sizes.sum()))


def community_bridge_count(edges, opinions, d: float) -> int:
    """Edges whose endpoints disagree by at least ``d``.

    ``edges`` is an ``(m, 2)`` array or anything with an ``edges()`` method
    (an :class:`~opiniond.graph.AdaptiveGraph` or a simulation).
    """
    if hasattr(edges, "edges"):
        edges = edges.edges()
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    x = np.asarray(opinions, dtype=np.float64)
    if e.size and e.max() >= x.size:
        raise InvalidParameterError("edge endpoint outside the opinion vector")
    return int(np.count_nonzero(np.abs(x[e[:, 0]] - x[e[:, 1]]) >= d))


def is_frozen(edges, opinions, d: float, rewiring: bool = True, atol: float = 1e-12) -> bool:
    """True when, without mutation, no further step can change the state.

    Every edge must join nodes that already agree (within ``atol``); with
    rewiring off, dissenting bridges are also stable and allowed.
    """
    if hasattr(edges, "edges"):
        edges = edges.edges()
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    x = np.asarray(opinions, dtype=np.float64)
    gaps = np.abs(x[e[:, 0]] - x[e[:, 1]])
    settled = gaps <= atol
    if not rewiring:
        settled |= gaps >= d
    return bool(np.all(settled))


@dataclass
class ConvergenceReport:
    converged: bool
    at_step: Optional[int] = None
    window_distances: list[float] = field(default_factory=list)
    threshold: float = DEFAULT_THRESHOLD
    window: int = DEFAULT_WINDOW

    def to_text(self) -> str:
        lines = [
            f"converged = {'true' if self.converged else 'false'}",
            f"at_step = {self.at_step if self.at_step is not None else -1}",
            f"threshold = {self.threshold!r}",
            f"window = {self.window}",
            "window_distances = [" + ", ".join(f"{x:.17g}" for x in self.window_distances) + "]",
        ]
        return "\n".join(lines) + "\n"


def adjacent_distances(history: Sequence[OpinionHistogram]) -> list[float]:
    return [l1_distance(a, b) for a, b in zip(history, history[1:])]


def convergence_check(history: Sequence[OpinionHistogram], threshold: float = DEFAULT_THRESHOLD,
                      window: int = DEFAULT_WINDOW, steps: Optional[Sequence[int]] = None) -> ConvergenceReport:
    """Converged when the last ``window`` adjacent L1 distances are all at most ``threshold``.

    ``steps`` gives the step index of each history entry; ``at_step`` is the
    step of the last entry (its position in ``history`` when ``steps`` is
    omitted). Too short a history is simply not converged.
    """
    if window < 2:
        raise InvalidParameterError("window must be >= 2")
    if not threshold > 0:
        raise InvalidParameterError("threshold must be positive")
    if steps is not None and len(steps) != len(history):
        raise InvalidParameterError("steps and history lengths differ")
    recent = adjacent_distances(history[-(window + 1):])
    converged = len(recent) == window and all(x <= threshold for x in recent)
    at_step = None
    if converged:
        at_step = int(steps[-1]) if steps is not None else len(history) - 1
    return ConvergenceReport(converged, at_step, recent, threshold, window)


def histograms_csv(rows: Sequence[tuple[int, OpinionHistogram]]) -> str:
    out = io.StringIO()
    out.write("step,bin_low,bin_high,mass\n")
    for step, h in rows:
        out.write(h.to_csv(step))
    return out.getvalue()
