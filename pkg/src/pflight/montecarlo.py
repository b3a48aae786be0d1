"""Monte Carlo study of the rate estimators on a (rate, n) grid.

For every grid cell the engine simulates ``reps`` independent flights over
a fixed horizon, observes each on an equidistant grid of n steps, applies
the requested estimators, and reports bias, root-MSE about the true rate,
and the min/max estimate per cell.

Reproducibility contract: every replication draws from its own stream,
derived from (master_seed, rate index, n index, replication index) alone.
Results are assembled into arrays ordered by replication index before any
aggregation, so the output is byte-identical whatever the worker count or
scheduling order. Workers are separate processes; the ``PFL_THREADS``
environment variable (0 = auto) caps them when the caller does not pass an
explicit count.

Failed replications (an estimator raising ``NumericalError``) and
saturated indicator estimates are excluded from the moments and counted in
``saturated_count``; the per-cell invariant
``saturated_count + successful = reps`` always holds.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCellError, NumericalError, ParameterError
from .estimators import (
    Estimate,
    indicator_estimate,
    modified_mle,
    pseudo_mle,
    summarize_increments,
)
from .seeding import SeedSpec, replication_stream
from .simulate import FlightParams, sample_at_grid, simulate_trajectory

__all__ = [
    "ExperimentConfig",
    "ExperimentSummary",
    "ExperimentOutcome",
    "ReplicationResult",
    "run_replication",
    "run_experiment",
    "summarize",
    "resolve_worker_count",
    "config_from_json",
    "config_to_json",
    "ESTIMATOR_KINDS",
]

# Short CLI names -> (estimator kind reported in summaries, function).
_ESTIMATOR_FUNCS = {
    "hat": ("pseudo_mle", pseudo_mle),
    "tilde": ("modified_mle", modified_mle),
    "dot": ("indicator", indicator_estimate),
}
ESTIMATOR_KINDS = {name: kind for name, (kind, _) in _ESTIMATOR_FUNCS.items()}
_KIND_TO_NAME = {kind: name for name, kind in ESTIMATOR_KINDS.items()}


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one study; everything a run needs, nothing hidden."""

    lambda_grid: tuple[float, ...]
    n_grid: tuple[int, ...]
    horizon: float
    reps: int
    master_seed: int
    speed: float = 1.0
    estimators: tuple[str, ...] = ("hat", "tilde", "dot")
    epsilon: float = 1e-9

    def __post_init__(self) -> None:
        lams = tuple(float(v) for v in self.lambda_grid)
        if not lams or any(not math.isfinite(v) or v <= 0.0 for v in lams):
            raise ParameterError(f"lambda_grid must be non-empty positive floats, got {lams}")
        ns = tuple(int(v) for v in self.n_grid)
        if not ns or any(v < 1 for v in ns) or any(int(v) != v for v in self.n_grid):
            raise ParameterError(f"n_grid must be non-empty integers >= 1, got {self.n_grid}")
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ParameterError(f"horizon must be finite and > 0, got {self.horizon}")
        if not isinstance(self.reps, (int, np.integer)) or self.reps < 1:
            raise ParameterError(f"reps must be an integer >= 1, got {self.reps!r}")
        if self.reps >= (1 << 24):
            raise ParameterError(f"reps must be below 2^24, got {self.reps}")
        if not isinstance(self.master_seed, (int, np.integer)) or not 0 <= self.master_seed < (1 << 64):
            raise ParameterError(f"master_seed must be an integer in [0, 2^64), got {self.master_seed!r}")
        if not (math.isfinite(self.speed) and self.speed > 0.0):
            raise ParameterError(f"speed must be finite and > 0, got {self.speed}")
        names = tuple(_canonical_estimator(e) for e in self.estimators)
        if not names:
            raise ParameterError("estimators must not be empty")
        if len(set(names)) != len(names):
            raise ParameterError(f"duplicate estimators in {self.estimators}")
        if not 0.0 < self.epsilon <= 1e-3:
            raise ParameterError(f"epsilon must lie in (0, 1e-3], got {self.epsilon}")
        object.__setattr__(self, "lambda_grid", lams)
        object.__setattr__(self, "n_grid", ns)
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "reps", int(self.reps))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "speed", float(self.speed))
        object.__setattr__(self, "estimators", names)
        object.__setattr__(self, "epsilon", float(self.epsilon))


def _canonical_estimator(name: str) -> str:
    if name in _ESTIMATOR_FUNCS:
        return name
    if name in _KIND_TO_NAME:
        return _KIND_TO_NAME[name]
    raise ParameterError(
        f"unknown estimator {name!r}; expected one of "
        f"{sorted(_ESTIMATOR_FUNCS)} or {sorted(_KIND_TO_NAME)}")


@dataclass(frozen=True)
class ExperimentSummary:
    """Aggregates of one (rate, n, estimator) cell."""

    rate: float
    n: int
    estimator: str          # estimator kind, e.g. "pseudo_mle"
    reps: int
    bias: float
    rmse: float
    min_value: float
    max_value: float
    saturated_count: int


@dataclass(frozen=True)
class ReplicationResult:
    """Estimates of a single replication, keyed by short estimator name."""

    lambda_index: int
    n_index: int
    rep_index: int
    estimates: dict[str, Estimate | None]


@dataclass(frozen=True)
class ExperimentOutcome:
    """Summaries plus the raw per-replication values, in replication order.

    ``values`` maps (lambda_index, n_index, estimator name) to an array of
    length reps; +inf marks a saturated estimate, NaN a failed replication.
    """

    config: ExperimentConfig
    summaries: tuple[ExperimentSummary, ...]
    values: dict[tuple[int, int, str], np.ndarray]


def run_replication(config: ExperimentConfig, lambda_index: int, n_index: int,
                    rep_index: int) -> ReplicationResult:
    """Simulate, observe and estimate one replication of one cell."""
    rate = config.lambda_grid[lambda_index]
    n = config.n_grid[n_index]
    params = FlightParams(rate=rate, speed=config.speed)
    seed = SeedSpec(config.master_seed,
                    replication_stream(lambda_index, n_index, rep_index))
    traj = simulate_trajectory(params, config.horizon, seed)
    summary = summarize_increments(sample_at_grid(traj, n), config.epsilon)
    estimates: dict[str, Estimate | None] = {}
    for name in config.estimators:
        func = _ESTIMATOR_FUNCS[name][1]
        try:
            estimates[name] = func(summary)
        except NumericalError:
            estimates[name] = None
    return ReplicationResult(lambda_index=lambda_index, n_index=n_index,
                             rep_index=rep_index, estimates=estimates)


def _run_range(config: ExperimentConfig, lambda_index: int, n_index: int,
               start: int, stop: int) -> dict[str, np.ndarray]:
    """Replications [start, stop) of one cell, as per-estimator value arrays."""
    rate = config.lambda_grid[lambda_index]
    n = config.n_grid[n_index]
    params = FlightParams(rate=rate, speed=config.speed)
    funcs = [(name, _ESTIMATOR_FUNCS[name][1]) for name in config.estimators]
    out = {name: np.empty(stop - start, dtype=np.float64) for name in config.estimators}
    for rep in range(start, stop):
        seed = SeedSpec(config.master_seed,
                        replication_stream(lambda_index, n_index, rep))
        traj = simulate_trajectory(params, config.horizon, seed)
        summary = summarize_increments(sample_at_grid(traj, n), config.epsilon)
        for name, func in funcs:
            try:
                out[name][rep - start] = func(summary).value
            except NumericalError:
                out[name][rep - start] = math.nan
    return out


def _run_range_task(config: ExperimentConfig, lambda_index: int, n_index: int,
                    start: int, stop: int):
    return lambda_index, n_index, start, _run_range(config, lambda_index, n_index, start, stop)


def summarize(values: np.ndarray, rate: float, n: int, estimator_kind: str,
              reps: int) -> ExperimentSummary:
    """Aggregate one cell's replication values (inf = saturated, NaN = failed)."""
    values = np.asarray(values, dtype=np.float64)
    good = values[np.isfinite(values)]
    if good.size == 0:
        raise EmptyCellError(
            f"cell (rate={rate}, n={n}, {estimator_kind}) has no successful replications")
    diff = good - rate
    return ExperimentSummary(
        rate=rate,
        n=n,
        estimator=estimator_kind,
        reps=reps,
        bias=float(np.mean(good) - rate),
        rmse=float(math.sqrt(np.mean(diff * diff))),
        min_value=float(good.min()),
        max_value=float(good.max()),
        saturated_count=int(values.size - good.size),
    )


def resolve_worker_count(workers: int | None = None) -> int:
    """Explicit count, else PFL_THREADS, else one worker per CPU (0 = auto)."""
    if workers is None:
        raw = os.environ.get("PFL_THREADS", "").strip()
        if raw == "":
            workers = 0
        else:
            try:
                workers = int(raw)
            except ValueError:
                raise ParameterError(f"PFL_THREADS must be an integer, got {raw!r}") from None
    workers = int(workers)
    if workers < 0:
        raise ParameterError(f"worker count must be >= 0, got {workers}")
    if workers == 0:
        workers = os.cpu_count() or 1
    return workers


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentOutcome:
    """Run the whole grid and aggregate per cell.

    The same config and master seed produce byte-identical summaries for
    any worker count: replication values are placed into preallocated
    arrays by replication index and aggregated only after assembly.
    """
    workers = resolve_worker_count(workers)
    reps = config.reps
    cells = [(li, ni) for li in range(len(config.lambda_grid))
             for ni in range(len(config.n_grid))]
    values = {(li, ni, name): np.empty(reps, dtype=np.float64)
              for li, ni in cells for name in config.estimators}

    if workers == 1:
        for li, ni in cells:
            arrs = _run_range(config, li, ni, 0, reps)
            for name, arr in arrs.items():
                values[(li, ni, name)][:] = arr
    else:
        chunk = max(1, math.ceil(reps / (workers * 4)))
        tasks = [(li, ni, a, min(a + chunk, reps))
                 for li, ni in cells for a in range(0, reps, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_range_task, config, li, ni, a, b)
                       for li, ni, a, b in tasks]
            for fut in as_completed(futures):
                li, ni, start, arrs = fut.result()
                for name, arr in arrs.items():
                    values[(li, ni, name)][start:start + arr.size] = arr

    summaries = []
    for li, ni in cells:
        for name in config.estimators:
            summaries.append(summarize(values[(li, ni, name)],
                                       rate=config.lambda_grid[li],
                                       n=config.n_grid[ni],
                                       estimator_kind=ESTIMATOR_KINDS[name],
                                       reps=reps))
    return ExperimentOutcome(config=config, summaries=tuple(summaries), values=values)


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

_JSON_KEYS = {"lambda_grid", "n_grid", "T", "c", "reps", "master_seed",
              "estimators", "epsilon"}
_JSON_REQUIRED = {"lambda_grid", "n_grid", "T", "reps", "master_seed"}


def config_from_json(obj: dict) -> ExperimentConfig:
    """Build a config from the documented JSON shape; unknown keys are errors."""
    if not isinstance(obj, dict):
        raise ParameterError(f"config must be a JSON object, got {type(obj).__name__}")
    unknown = set(obj) - _JSON_KEYS
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    missing = _JSON_REQUIRED - set(obj)
    if missing:
        raise ParameterError(f"missing config keys: {sorted(missing)}")
    try:
        return ExperimentConfig(
            lambda_grid=tuple(obj["lambda_grid"]),
            n_grid=tuple(obj["n_grid"]),
            horizon=obj["T"],
            reps=obj["reps"],
            master_seed=obj["master_seed"],
            speed=obj.get("c", 1.0),
            estimators=tuple(obj.get("estimators", ("hat", "tilde", "dot"))),
            epsilon=obj.get("epsilon", 1e-9),
        )
    except TypeError as exc:
        raise ParameterError(f"malformed config: {exc}") from None


def config_to_json(config: ExperimentConfig) -> dict:
    return {
        "lambda_grid": list(config.lambda_grid),
        "n_grid": list(config.n_grid),
        "T": config.horizon,
        "c": config.speed,
        "reps": config.reps,
        "master_seed": config.master_seed,
        "estimators": list(config.estimators),
        "epsilon": config.epsilon,
    }
