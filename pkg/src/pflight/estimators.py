"""Rate estimation from equidistant observations of a planar flight.

Observing positions every ``delta`` time units gives increments whose
squared slack

    u_i = (c * delta)^2 - |P_i - P_{i-1}|^2

is zero exactly when the mover kept one heading through the whole step
(full stride), and positive when at least one direction change happened
inside it. The slack array, the stride indicators and their sums are the
sufficient statistics for every estimator here.

Estimators:

* ``pseudo_mle``      root of the pseudo-likelihood score; uses turned
                      steps only.
* ``modified_mle``    closed form derived assuming every step turned;
                      flagged when that assumption fails in the data.
* ``indicator_estimate``  uses only the fraction of turned steps, through
                      the exact per-step no-turn probability exp(-rate*delta).
* ``poisson_mle``     event count over elapsed time, for a continuously
                      observed path; the benchmark the others approach as
                      delta shrinks.

Classification uses a relative tolerance ``epsilon``: a step is "turned"
when u_i > epsilon * (c * delta)^2. Tiny negative slacks (floating-point
noise) are clamped to zero; slacks below -epsilon * (c * delta)^2 mean the
data is impossible under the claimed speed and raise
``InconsistentSampleError``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentSampleError, NumericalError, ParameterError
from .simulate import DiscreteSample, Trajectory

__all__ = [
    "IncrementSummary",
    "Estimate",
    "summarize_increments",
    "pseudo_log_likelihood",
    "score",
    "pseudo_mle",
    "modified_mle",
    "indicator_estimate",
    "poisson_mle",
    "pseudo_likelihood_ratio",
]

DEFAULT_EPSILON = 1e-9


@dataclass(frozen=True)
class IncrementSummary:
    """Sufficient statistics of one equidistant observation record."""

    n: int
    delta: float
    speed: float
    epsilon: float
    u: np.ndarray
    eta: np.ndarray
    turned: np.ndarray
    n_plus: int
    sum_sqrt_u_turned: float
    sum_sqrt_u_all: float

    @classmethod
    def from_positions(cls, positions: np.ndarray, delta: float, speed: float,
                       epsilon: float = DEFAULT_EPSILON) -> "IncrementSummary":
        positions = np.asarray(positions, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 2 or positions.shape[0] < 2:
            raise ParameterError(
                f"positions must have shape (n+1, 2) with n >= 1, got {positions.shape}")
        if not (math.isfinite(delta) and delta > 0.0):
            raise ParameterError(f"delta must be finite and > 0, got {delta}")
        if not (math.isfinite(speed) and speed > 0.0):
            raise ParameterError(f"speed must be finite and > 0, got {speed}")
        if not 0.0 < epsilon <= 1e-3:
            raise ParameterError(f"epsilon must lie in (0, 1e-3], got {epsilon}")

        stride_sq = (speed * delta) ** 2
        dx = np.diff(positions[:, 0])
        dy = np.diff(positions[:, 1])
        d_sq = dx * dx + dy * dy
        u_raw = stride_sq - d_sq
        tol = epsilon * stride_sq
        if np.any(u_raw < -tol):
            worst = float(u_raw.min())
            raise InconsistentSampleError(
                f"slack {worst:.17g} below -epsilon*(speed*delta)^2 = {-tol:.17g}; "
                "an increment is longer than one stride")
        u = np.maximum(u_raw, 0.0)
        turned = u_raw > tol
        sqrt_u = np.sqrt(u)
        sum_turned = float(np.sum(sqrt_u[turned]))
        sum_all = float(np.sum(np.where(turned, sqrt_u, 0.0)))
        return cls(
            n=int(u.size),
            delta=float(delta),
            speed=float(speed),
            epsilon=float(epsilon),
            u=u,
            eta=np.sqrt(d_sq),
            turned=turned,
            n_plus=int(np.count_nonzero(turned)),
            sum_sqrt_u_turned=sum_turned,
            sum_sqrt_u_all=sum_all,
        )


def summarize_increments(sample: DiscreteSample,
                         epsilon: float = DEFAULT_EPSILON) -> IncrementSummary:
    """Sufficient statistics of a simulated or deserialized sample."""
    return IncrementSummary.from_positions(
        sample.positions, sample.delta, sample.params.speed, epsilon)


@dataclass(frozen=True)
class Estimate:
    """One point estimate of the direction-change rate.

    ``saturated`` marks the indicator estimator's degenerate case (every
    step turned, the estimate diverges). ``condition_warning`` marks a
    modified-MLE value computed on data where some step did not turn, i.e.
    outside the regime its derivation assumes.
    """

    value: float
    kind: str
    n: int
    delta: float
    stderr: float
    saturated: bool = False
    condition_warning: bool = False


def _check_rate(rate: float) -> float:
    rate = float(rate)
    if not (math.isfinite(rate) and rate > 0.0):
        raise DomainError(f"rate must be finite and > 0, got {rate}")
    return rate


def pseudo_log_likelihood(summary: IncrementSummary, rate: float) -> float:
    """Log of the product of per-step marginal densities at ``rate``.

    Steps are treated as independent, which they are not exactly; each
    factor is the exact marginal law of one increment (atom at full stride,
    density inside), hence "pseudo".
    """
    rate = _check_rate(rate)
    n, delta, c = summary.n, summary.delta, summary.speed
    value = -rate * n * delta - n * math.log(2.0 * math.pi * c)
    value += summary.n_plus * math.log(rate)
    value += (rate / c) * summary.sum_sqrt_u_turned
    if summary.n_plus:
        value -= 0.5 * float(np.sum(np.log(summary.u[summary.turned])))
    return value


def score(summary: IncrementSummary, rate: float) -> float:
    """Derivative of the pseudo-log-likelihood in the rate.

    Strictly decreasing in ``rate`` (second derivative -n_plus / rate^2),
    so it has at most one root.
    """
    rate = _check_rate(rate)
    return (-summary.n * summary.delta
            + summary.sum_sqrt_u_turned / summary.speed
            + summary.n_plus / rate)


def _sampling_stderr(value: float, n: int, delta: float) -> float:
    return math.sqrt(value / (n * delta)) if value > 0.0 else 0.0


def pseudo_mle(summary: IncrementSummary) -> Estimate:
    """Closed-form root of the score.

    Zero when no step turned (the score then has no positive root and the
    pseudo-likelihood is maximized at the boundary).
    """
    n, delta, c = summary.n, summary.delta, summary.speed
    denom = c * n * delta - summary.sum_sqrt_u_turned
    if denom <= 0.0:
        raise NumericalError(
            f"degenerate denominator {denom:.17g} in pseudo-MLE", estimate=math.inf)
    value = c * summary.n_plus / denom
    return Estimate(value=value, kind="pseudo_mle", n=n, delta=delta,
                    stderr=_sampling_stderr(value, n, delta))


def modified_mle(summary: IncrementSummary) -> Estimate:
    """Closed-form estimator assuming every step contains a turn.

    Uses all steps' slacks (non-turned ones clamp to zero). When some step
    did not turn the assumption is violated; the value is still returned
    with ``condition_warning`` set.
    """
    n, delta, c = summary.n, summary.delta, summary.speed
    denom = c * n * delta - summary.sum_sqrt_u_all
    if denom <= 0.0:
        raise NumericalError(
            f"degenerate denominator {denom:.17g} in modified MLE", estimate=math.inf)
    value = c * n / denom
    return Estimate(value=value, kind="modified_mle", n=n, delta=delta,
                    stderr=value / math.sqrt(n),
                    condition_warning=summary.n_plus < n)


def indicator_estimate(summary: IncrementSummary) -> Estimate:
    """Estimator inverting the exact no-turn probability exp(-rate*delta).

    The turned fraction n_plus / n estimates 1 - exp(-rate*delta). When
    every step turned the inversion diverges; the estimate is returned as
    +inf with ``saturated`` set.
    """
    n, delta = summary.n, summary.delta
    if summary.n_plus == n:
        return Estimate(value=math.inf, kind="indicator", n=n, delta=delta,
                        stderr=math.inf, saturated=True)
    value = -math.log1p(-summary.n_plus / n) / delta
    return Estimate(value=value, kind="indicator", n=n, delta=delta,
                    stderr=_sampling_stderr(value, n, delta))


def poisson_mle(traj: Trajectory) -> Estimate:
    """Event count over elapsed time, from a continuously observed path.

    The whole path is one observation: n = 1 and delta = horizon, which
    makes the standard error formula sqrt(value / (n * delta)) line up
    with the usual sqrt(rate / T).
    """
    value = traj.event_count / traj.horizon
    return Estimate(value=value, kind="poisson_mle", n=1, delta=traj.horizon,
                    stderr=_sampling_stderr(value, 1, traj.horizon))


def pseudo_likelihood_ratio(summary: IncrementSummary, rate: float, z: float) -> float:
    """Pseudo-likelihood ratio at the local alternative rate + z * rate / sqrt(n).

    Normalized so that under the all-steps-turned regime it equals
    exp(pseudo_log_likelihood(rate + phi * z) - pseudo_log_likelihood(rate))
    with phi = rate / sqrt(n).
    """
    rate = _check_rate(rate)
    z = float(z)
    n, delta, c = summary.n, summary.delta, summary.speed
    phi = rate / math.sqrt(n)
    if rate + phi * z <= 0.0:
        raise DomainError(
            f"local parameter rate + z * rate / sqrt(n) = {rate + phi * z:.17g} "
            "must stay positive")
    log_ratio = ((phi * z / c) * summary.sum_sqrt_u_all
                 - phi * n * z * delta
                 + n * math.log1p(z / math.sqrt(n)))
    return math.exp(log_ratio)
