"""Run configuration: TOML parsing, validation and serialization.

Example::

    seed = 7
    total_steps = 50000
    snapshot_schedule = [0, 10000, 50000]

    [params]
    n = 1000
    k_avg = 10
    d = 0.25
    w = 0.5
    p = 0.1

    [params.basal]
    kind = "powerlaw"
    gamma = 3.0
    x_min = 0.01

Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

import tomli

from .analysis import DEFAULT_BINS, DEFAULT_THRESHOLD, DEFAULT_WINDOW
from .distributions import DistributionSpec
from .dynamics import DEFAULT_PROBE_LIMIT, INDEPENDENT, MUTATION_TARGETS, ModelParams, check_schedule
from .errors import ConfigError, OpiniondError
from .rng import SEED_MAX

_TOP_KEYS = {"seed", "runs", "total_steps", "snapshot_schedule", "output_dir", "rewire_probe_limit",
             "mutation_target", "bins", "params", "convergence"}
_PARAM_KEYS = {"n", "k_avg", "d", "mu", "w", "p", "initial", "basal"}
_DIST_KEYS = {"kind", "gamma", "x_min"}
_CONV_KEYS = {"threshold", "window"}


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    total_steps: int
    snapshot_schedule: tuple[int, ...]
    seed: int = 0
    runs: int = 1
    output_dir: str = "out"
    rewire_probe_limit: int = DEFAULT_PROBE_LIMIT
    mutation_target: str = INDEPENDENT
    bins: int = DEFAULT_BINS
    convergence_threshold: float = DEFAULT_THRESHOLD
    convergence_window: int = DEFAULT_WINDOW

    def __post_init__(self):
        try:
            check_schedule(self.snapshot_schedule, self.total_steps)
        except OpiniondError as exc:
            raise ConfigError(f"snapshot_schedule: {exc}") from None
        if not 0 <= self.seed <= SEED_MAX:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.rewire_probe_limit < 0:
            raise ConfigError("rewire_probe_limit must be >= 0 (0 scans every node)")
        if self.mutation_target not in MUTATION_TARGETS:
            raise ConfigError(f"mutation_target must be one of {MUTATION_TARGETS}")
        if self.bins < 2:
            raise ConfigError("bins must be >= 2")
        if not self.convergence_threshold > 0:
            raise ConfigError("convergence.threshold must be > 0")
        if self.convergence_window < 2:
            raise ConfigError("convergence.window must be >= 2")

    def engine_kw(self) -> dict:
        return {"probe_limit": self.rewire_probe_limit, "mutation_target": self.mutation_target}

    def with_overrides(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _check_keys(table: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _get(table: dict, key: str, kind, where: str, default: Any = None, required: bool = False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key {where}{key}")
        return default
    value = table[key]
    ok = isinstance(value, kind) and not isinstance(value, bool)
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value, ok = float(value), True
    if not ok:
        raise ConfigError(f"{where}{key} must be of type {kind.__name__}, got {value!r}")
    return value


def _distribution(table: Any, where: str) -> DistributionSpec:
    if table is None:
        return DistributionSpec.uniform()
    if not isinstance(table, dict):
        raise ConfigError(f"{where} must be a table")
    _check_keys(table, _DIST_KEYS, where)
    kind = _get(table, "kind", str, where + ".", required=True)
    try:
        return DistributionSpec(kind, _get(table, "gamma", float, where + ".", 3.0),
                                _get(table, "x_min", float, where + ".", 0.01))
    except OpiniondError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def config_from_dict(doc: dict) -> RunConfig:
    _check_keys(doc, _TOP_KEYS, "top level")
    ptab = doc.get("params")
    if not isinstance(ptab, dict):
        raise ConfigError("missing [params] table")
    _check_keys(ptab, _PARAM_KEYS, "[params]")
    kwargs = {
        "n": _get(ptab, "n", int, "params.", required=True),
        "k_avg": _get(ptab, "k_avg", float, "params.", required=True),
        "d": _get(ptab, "d", float, "params.", required=True),
        "mu": _get(ptab, "mu", float, "params.", 0.5),
        "w": _get(ptab, "w", float, "params.", required=True),
        "p": _get(ptab, "p", float, "params.", required=True),
        "initial": _distribution(ptab.get("initial"), "params.initial"),
        "basal": _distribution(ptab.get("basal"), "params.basal"),
    }
    try:
        params = ModelParams(**kwargs)
    except OpiniondError as exc:
        raise ConfigError(f"params: {exc}") from None
    conv = doc.get("convergence", {})
    if not isinstance(conv, dict):
        raise ConfigError("convergence must be a table")
    _check_keys(conv, _CONV_KEYS, "[convergence]")
    total = _get(doc, "total_steps", int, "", required=True)
    sched = doc.get("snapshot_schedule", [0, total] if total > 0 else [0])
    if not isinstance(sched, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in sched):
        raise ConfigError("snapshot_schedule must be a list of integers")
    return RunConfig(
        params=params,
        total_steps=total,
        snapshot_schedule=tuple(sched),
        seed=_get(doc, "seed", int, "", 0),
        runs=_get(doc, "runs", int, "", 1),
        output_dir=_get(doc, "output_dir", str, "", "out"),
        rewire_probe_limit=_get(doc, "rewire_probe_limit", int, "", DEFAULT_PROBE_LIMIT),
        mutation_target=_get(doc, "mutation_target", str, "", INDEPENDENT),
        bins=_get(doc, "bins", int, "", DEFAULT_BINS),
        convergence_threshold=_get(conv, "threshold", float, "convergence.", DEFAULT_THRESHOLD),
        convergence_window=_get(conv, "window", int, "convergence.", DEFAULT_WINDOW),
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Raises:
        ConfigError: on malformed TOML (the message carries line and column)
            or on any out-of-range or unknown field.
    """
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from None
    return config_from_dict(doc)


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_value(x) for x in v) + "]"
    return str(int(v))


def _table(name: Optional[str], items: dict) -> str:
    lines = [] if name is None else [f"[{name}]"]
    lines += [f"{k} = {_value(v)}" for k, v in items.items()]
    return "\n".join(lines) + "\n"


def dump_config(cfg: RunConfig) -> str:
    p = cfg.params
    parts = [
        _table(None, {
            "seed": cfg.seed,
            "runs": cfg.runs,
            "total_steps": cfg.total_steps,
            "snapshot_schedule": list(cfg.snapshot_schedule),
            "output_dir": cfg.output_dir,
            "rewire_probe_limit": cfg.rewire_probe_limit,
            "mutation_target": cfg.mutation_target,
            "bins": cfg.bins,
        }),
        _table("params", {"n": p.n, "k_avg": float(p.k_avg), "d": float(p.d), "mu": float(p.mu),
                          "w": float(p.w), "p": float(p.p)}),
        _table("params.initial", p.initial.to_dict()),
        _table("params.basal", p.basal.to_dict()),
        _table("convergence", {"threshold": float(cfg.convergence_threshold), "window": cfg.convergence_window}),
    ]
    return "\n".join(parts)
