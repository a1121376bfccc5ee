"""Opinion distributions: initial assignment and basal (preferred) opinions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .rng import RandomStream

UNIFORM = "uniform"
POWERLAW = "powerlaw"
KINDS = (UNIFORM, POWERLAW)


@dataclass(frozen=True)
class DistributionSpec:
    """Distribution of opinions on [0, 1].

    ``uniform`` covers [0, 1]. ``powerlaw`` is a truncated Pareto law with
    density proportional to ``x**-gamma`` on ``[x_min, 1]``; the truncation is
    needed because the density diverges at 0.
    """

    kind: str = UNIFORM
    gamma: float = 3.0
    x_min: float = 0.01

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"distribution kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == POWERLAW:
            if not self.gamma > 1:
                raise InvalidParameterError(f"gamma must be > 1, got {self.gamma}")
            if not 0 < self.x_min < 1:
                raise InvalidParameterError(f"x_min must be in (0,1), got {self.x_min}")

    @classmethod
    def uniform(cls) -> "DistributionSpec":
        return cls(UNIFORM)

    @classmethod
    def powerlaw(cls, gamma: float = 3.0, x_min: float = 0.01) -> "DistributionSpec":
        return cls(POWERLAW, float(gamma), float(x_min))

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.kind == UNIFORM else (self.x_min, 1.0)

    def to_dict(self) -> dict:
        if self.kind == UNIFORM:
            return {"kind": UNIFORM}
        return {"kind": POWERLAW, "gamma": self.gamma, "x_min": self.x_min}

    def ppf(self, u):
        """Inverse CDF; accepts a float or an array of uniforms."""
        if self.kind == UNIFORM:
            return u
        a = self.x_min ** (1.0 - self.gamma)
        return (a - u * (a - 1.0)) ** (1.0 / (1.0 - self.gamma))

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        lo, hi = self.support
        if self.kind == UNIFORM:
            return np.clip(x, 0.0, 1.0)
        a = self.x_min ** (1.0 - self.gamma)
        xc = np.clip(x, lo, hi)
        return (a - xc ** (1.0 - self.gamma)) / (a - 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        if self.kind == UNIFORM:
            return inside.astype(np.float64)
        norm = (self.gamma - 1.0) / (self.x_min ** (1.0 - self.gamma) - 1.0)
        with np.errstate(divide="ignore"):
            return np.where(inside, norm * np.abs(x) ** -self.gamma, 0.0)

    @property
    def code(self) -> int:
        """Integer tag used by the compiled step kernel."""
        return KINDS.index(self.kind)


def sample(spec: DistributionSpec, rng: RandomStream) -> float:
    """One opinion drawn by inverse-CDF from a single uniform."""
    return float(spec.ppf(rng.uniform()))


def sample_vector(spec: DistributionSpec, n: int, rng: RandomStream) -> np.ndarray:
    """``n`` independent opinions; element ``i`` uses the ``i``-th uniform drawn."""
    if n < 1:
        raise InvalidParameterError("sample_vector needs n >= 1")
    return np.asarray(spec.ppf(rng.uniforms(n)), dtype=np.float64)
