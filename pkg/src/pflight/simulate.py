"""Simulation of planar random flights.

A mover starts at ``origin`` and travels at constant speed ``c``. Direction
changes happen at the events of a Poisson process with intensity ``rate``;
at each event (and once at time zero) a new heading is drawn uniformly on
(0, 2*pi]. Between events the motion is a straight line, so a trajectory is
fully described by its event times and the heading used on each of the
``N + 1`` straight segments.

Positions follow by integrating the piecewise-constant velocity:

    x(t) = x0 + c * sum_j (min(s_j, t) - min(s_{j-1}, t)) * cos(theta_j)

with s_0 = 0 and s_{N+1} = T, and the same with sin for y(t). The total
path length is always exactly c * T, and every position lies inside the
closed disc of radius c * t around the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .seeding import SeedSpec

__all__ = [
    "FlightParams",
    "Trajectory",
    "DiscreteSample",
    "simulate_trajectory",
    "position_at",
    "sample_at_grid",
    "ground_truth_counts",
    "vertex_positions",
]


def _require_finite_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be finite and > 0, got {value}")
    return value


@dataclass(frozen=True)
class FlightParams:
    """Model parameters: direction-change intensity, speed, starting point."""

    rate: float
    speed: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rate", _require_finite_positive("rate", self.rate))
        object.__setattr__(self, "speed", _require_finite_positive("speed", self.speed))
        ox, oy = self.origin
        if not (math.isfinite(ox) and math.isfinite(oy)):
            raise ParameterError(f"origin must be finite, got {self.origin}")
        object.__setattr__(self, "origin", (float(ox), float(oy)))


@dataclass(frozen=True)
class Trajectory:
    """One continuous-time path on [0, horizon].

    ``event_times`` holds the N direction-change epochs, strictly increasing
    and strictly inside (0, horizon). ``directions`` holds N + 1 headings in
    (0, 2*pi]; ``directions[j]`` applies on the segment starting at
    ``event_times[j - 1]`` (at 0 for j = 0).
    """

    params: FlightParams
    horizon: float
    event_times: np.ndarray
    directions: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "horizon", _require_finite_positive("horizon", self.horizon))
        events = np.asarray(self.event_times, dtype=np.float64)
        dirs = np.asarray(self.directions, dtype=np.float64)
        if events.ndim != 1 or dirs.ndim != 1:
            raise ParameterError("event_times and directions must be 1-d arrays")
        if dirs.size != events.size + 1:
            raise ParameterError(
                f"expected {events.size + 1} directions for {events.size} events, got {dirs.size}")
        if events.size:
            if not (events[0] > 0.0 and events[-1] < self.horizon):
                raise ParameterError("event times must lie strictly inside (0, horizon)")
            if not np.all(np.diff(events) > 0.0):
                raise ParameterError("event times must be strictly increasing")
        if dirs.size and not (np.all(dirs > 0.0) and np.all(dirs <= 2.0 * np.pi)):
            raise ParameterError("directions must lie in (0, 2*pi]")
        object.__setattr__(self, "event_times", events)
        object.__setattr__(self, "directions", dirs)

    @property
    def event_count(self) -> int:
        return int(self.event_times.size)

    def path_length(self) -> float:
        """Total distance travelled: the speed times the sum of segment durations."""
        knots = np.concatenate(([0.0], self.event_times, [self.horizon]))
        return self.params.speed * float(np.sum(np.diff(knots)))


@dataclass(frozen=True)
class DiscreteSample:
    """Positions observed on the equidistant grid 0, delta, ..., n * delta."""

    params: FlightParams
    delta: float
    positions: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", _require_finite_positive("delta", self.delta))
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 2:
            raise ParameterError(f"positions must have shape (n+1, 2) with n >= 1, got {pos.shape}")
        if tuple(pos[0]) != self.params.origin:
            raise ParameterError("positions[0] must equal the origin")
        steps = np.hypot(np.diff(pos[:, 0]), np.diff(pos[:, 1]))
        bound = self.params.speed * self.delta * (1.0 + 1e-9)
        if np.any(steps > bound):
            worst = float(steps.max())
            raise ParameterError(
                f"step displacement {worst:.17g} exceeds speed*delta={bound:.17g}")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return int(self.positions.shape[0] - 1)


def simulate_trajectory(params: FlightParams, horizon: float,
                        seed: SeedSpec | int) -> Trajectory:
    """Draw one trajectory on [0, horizon].

    Event times come from exponential interarrivals generated by inversion
    (-log(U) / rate) and truncated at the horizon; headings are 2*pi*U with
    U in (0, 1]. The draw is fully determined by ``seed``.
    """
    if isinstance(seed, (int, np.integer)):
        seed = SeedSpec(int(seed))
    horizon = _require_finite_positive("horizon", horizon)
    rng = seed.generator()
    rate = params.rate

    mean_count = rate * horizon
    chunk = max(16, int(mean_count + 6.0 * math.sqrt(mean_count) + 16.0))
    gaps = rng.standard_exponential(chunk, method="inv") / rate
    times = np.cumsum(gaps)
    while times[-1] <= horizon:
        gaps = rng.standard_exponential(chunk, method="inv") / rate
        times = np.concatenate((times, times[-1] + np.cumsum(gaps)))
    events = times[times < horizon]

    directions = 2.0 * np.pi * (1.0 - rng.random(events.size + 1))
    return Trajectory(params=params, horizon=horizon,
                      event_times=events, directions=directions)


def position_at(traj: Trajectory, t: float) -> tuple[float, float]:
    """Exact position at time t, from the segment-sum formula."""
    t = float(t)
    if not 0.0 <= t <= traj.horizon:
        raise ParameterError(f"t must lie in [0, {traj.horizon}], got {t}")
    knots = np.concatenate(([0.0], traj.event_times, [traj.horizon]))
    seg = np.diff(np.minimum(knots, t))
    c = traj.params.speed
    ox, oy = traj.params.origin
    x = ox + c * float(np.dot(seg, np.cos(traj.directions)))
    y = oy + c * float(np.dot(seg, np.sin(traj.directions)))
    return (x, y)


def _grid(horizon: float, n: int) -> np.ndarray:
    return np.linspace(0.0, horizon, n + 1)


def sample_at_grid(traj: Trajectory, n: int) -> DiscreteSample:
    """Observe the trajectory at times i * horizon / n for i = 0..n.

    One vectorized pass over the merged event/grid times; agrees with
    ``position_at`` at every grid point to floating-point accuracy.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be an integer >= 1, got {n}")
    grid = _grid(traj.horizon, int(n))
    events = traj.event_times
    c = traj.params.speed
    ox, oy = traj.params.origin

    starts = np.concatenate(([0.0], events))
    seg_dt = np.diff(np.concatenate((starts, [traj.horizon])))
    cos_d = np.cos(traj.directions)
    sin_d = np.sin(traj.directions)
    cum_x = np.concatenate(([0.0], np.cumsum(seg_dt * cos_d)))
    cum_y = np.concatenate(([0.0], np.cumsum(seg_dt * sin_d)))

    k = np.searchsorted(events, grid, side="right")
    rem = grid - starts[k]
    pos = np.empty((grid.size, 2), dtype=np.float64)
    pos[:, 0] = ox + c * (cum_x[k] + rem * cos_d[k])
    pos[:, 1] = oy + c * (cum_y[k] + rem * sin_d[k])
    return DiscreteSample(params=traj.params, delta=traj.horizon / int(n), positions=pos)


def vertex_positions(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Knot times (0, events..., horizon) and the positions at each knot.

    The path is the polyline through these vertices; useful for plotting
    and for serializing a trajectory as position rows.
    """
    knots = np.concatenate(([0.0], traj.event_times, [traj.horizon]))
    seg_dt = np.diff(knots)
    c = traj.params.speed
    ox, oy = traj.params.origin
    pos = np.empty((knots.size, 2), dtype=np.float64)
    pos[0] = (ox, oy)
    pos[1:, 0] = ox + c * np.cumsum(seg_dt * np.cos(traj.directions))
    pos[1:, 1] = oy + c * np.cumsum(seg_dt * np.sin(traj.directions))
    return knots, pos


def ground_truth_counts(traj: Trajectory, n: int) -> np.ndarray:
    """Number of direction changes inside each grid cell ((i-1)*delta, i*delta]."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be an integer >= 1, got {n}")
    grid = _grid(traj.horizon, int(n))
    idx = np.searchsorted(grid, traj.event_times, side="left")
    return np.bincount(idx, minlength=n + 1)[1:]
