"""Barycentric prototype generation: arithmetic mean, DBA-family averaging."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distances import (
    DistanceOutcome,
    WarpingPath,
    dtw,
    pairwise_distances,
    shape_dtw_efficient,
    soft_dtw,
    soft_dtw_gradient,
)
from .series import TimeSeries, as_values

__all__ = [
    "AveragingConfig",
    "BarycenterResult",
    "AssociationTable",
    "arithmetic_mean",
    "barycenter_update",
    "dba",
    "shape_dba",
    "soft_dba",
    "compute_barycenter",
]

AVERAGING_METHODS = ("mean", "dba", "soft_dba", "shape_dba")
INIT_MODES = ("random-member", "provided-series", "medoid")

_REL_CHANGE_FLOOR = 1e-300
_MAX_STEP_HALVINGS = 40


@dataclass(frozen=True)
class AveragingConfig:
    """Parameters for prototype generation.

    ``reach`` only matters for ``shape_dba``; ``gamma`` only for
    ``soft_dba``. ``initial_series`` must be set when ``init`` is
    ``provided-series``.
    """

    method: str
    max_iterations: int = 30
    tolerance: float = 1e-5
    reach: int = 30
    gamma: float = 1.0
    init: str = "random-member"
    seed: int = 0
    initial_series: TimeSeries | None = None

    def __post_init__(self) -> None:
        if self.method not in AVERAGING_METHODS:
            raise ValueError(f"unknown averaging method {self.method!r}; expected one of {AVERAGING_METHODS}")
        if self.init not in INIT_MODES:
            raise ValueError(f"unknown init mode {self.init!r}; expected one of {INIT_MODES}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.reach < 1:
            raise ValueError("reach must be >= 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.init == "provided-series" and self.initial_series is None:
            raise ValueError("init='provided-series' requires initial_series")


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    """An average series plus the per-iteration objective trace.

    ``objective_trace`` holds one accepted objective value per iteration
    (entry t is the objective of the average after t accepted updates), so
    it always has ``iterations_run`` entries. ``converged`` is True when
    the relative objective change dropped below the tolerance.
    """

    average: TimeSeries
    objective_trace: tuple[float, ...]
    iterations_run: int
    converged: bool


class AssociationTable:
    """Per-time-stamp multisets of member values aligned to an average.

    This is the explicit, inspectable form of the alignment bookkeeping;
    :func:`barycenter_update` computes the same means with vectorized
    accumulation.
    """

    def __init__(self, assoc: list[list[float]]):
        if any(len(a) < 1 for a in assoc):
            raise AssertionError("alignment left an average time stamp with no associations")
        self.assoc = assoc

    @classmethod
    def from_paths(
        cls,
        average_length: int,
        members: Sequence[TimeSeries | np.ndarray],
        paths: Sequence[WarpingPath],
    ) -> "AssociationTable":
        assoc: list[list[float]] = [[] for _ in range(average_length)]
        for member, path in zip(members, paths):
            values = as_values(member)
            for i, j in path.pairs:
                assoc[i].append(float(values[j]))
        return cls(assoc)

    @property
    def cardinalities(self) -> np.ndarray:
        return np.array([len(a) for a in self.assoc], dtype=np.int64)

    def barycenters(self) -> np.ndarray:
        return np.array([sum(a) / len(a) for a in self.assoc])


def arithmetic_mean(members: Sequence[TimeSeries | np.ndarray]) -> TimeSeries:
    """Element-wise mean of equal-length series."""
    if len(members) == 0:
        raise ValueError("cannot average an empty set")
    arrays = [as_values(m) for m in members]
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) != 1:
        raise ValueError(f"arithmetic mean requires equal lengths, got lengths {sorted(lengths)}")
    return TimeSeries(np.mean(np.stack(arrays), axis=0))


def barycenter_update(
    average: TimeSeries | np.ndarray,
    members: Sequence[TimeSeries | np.ndarray],
    paths: Sequence[WarpingPath],
) -> TimeSeries:
    """One barycenter step: each average stamp becomes the mean of its aligned values.

    Boundary conditions of the warping paths guarantee every stamp has at
    least one association; a violation indicates a broken path and fails
    loudly.
    """
    avg = as_values(average)
    if len(members) != len(paths):
        raise ValueError("one warping path per member is required")
    sums = np.zeros(avg.shape[0])
    counts = np.zeros(avg.shape[0], dtype=np.int64)
    for member, path in zip(members, paths):
        values = as_values(member)
        idx_avg = path.pairs[:, 0]
        idx_member = path.pairs[:, 1]
        sums += np.bincount(idx_avg, weights=values[idx_member], minlength=avg.shape[0])
        counts += np.bincount(idx_avg, minlength=avg.shape[0])
    if (counts == 0).any():
        raise AssertionError("alignment left an average time stamp with no associations")
    return TimeSeries(sums / counts)


def _relative_change(previous: float, current: float) -> float:
    return abs(previous - current) / max(abs(previous), _REL_CHANGE_FLOOR)


def _initial_average(
    members: Sequence[TimeSeries],
    config: AveragingConfig,
    metric: str,
) -> TimeSeries:
    if config.init == "provided-series":
        assert config.initial_series is not None
        return config.initial_series
    if config.init == "random-member":
        rng = np.random.default_rng(config.seed)
        return members[int(rng.integers(len(members)))]
    # medoid: member minimizing the summed distance to all others
    matrix = pairwise_distances(members, metric, reach=config.reach, gamma=config.gamma)
    return members[int(np.argmin(matrix.sum(axis=1)))]


def _alignment_barycenter_loop(
    members: Sequence[TimeSeries],
    initial: TimeSeries,
    align: Callable[[np.ndarray, TimeSeries], DistanceOutcome],
    max_iterations: int,
    tolerance: float,
) -> BarycenterResult:
    """Shared expectation-maximization loop for dba and shape_dba.

    Each iteration aligns every member to the current average, records the
    objective (sum of squared distances), and replaces each stamp by the
    mean of its aligned values. A strict objective increase reverts to the
    previous average and stops; the offending value is not recorded, so
    the trace is non-increasing by construction.
    """
    avg = as_values(initial).copy()
    prev_avg = avg
    prev_obj = np.inf
    trace: list[float] = []
    converged = False
    for _ in range(max_iterations):
        outcomes = [align(avg, m) for m in members]
        obj = float(sum(o.distance**2 for o in outcomes))
        if obj > prev_obj:
            avg = prev_avg
            break
        trace.append(obj)
        if obj == 0.0 or (np.isfinite(prev_obj) and _relative_change(prev_obj, obj) <= tolerance):
            converged = True
            break
        prev_obj = obj
        prev_avg = avg
        avg = barycenter_update(avg, members, [o.path for o in outcomes]).values
    return BarycenterResult(
        average=TimeSeries(avg),
        objective_trace=tuple(trace),
        iterations_run=len(trace),
        converged=converged,
    )


def dba(members: Sequence[TimeSeries], config: AveragingConfig | None = None) -> BarycenterResult:
    """DTW barycenter averaging.

    The objective is the sum of squared DTW distances from the average to
    the members; the classical alternating scheme makes the trace
    non-increasing.
    """
    if len(members) == 0:
        raise ValueError("cannot average an empty set")
    config = config or AveragingConfig(method="dba")
    initial = _initial_average(members, config, "dtw")
    return _alignment_barycenter_loop(
        members, initial, lambda avg, m: dtw(avg, m), config.max_iterations, config.tolerance
    )


def shape_dba(members: Sequence[TimeSeries], config: AveragingConfig | None = None) -> BarycenterResult:
    """Barycenter averaging under the shape-context alignment.

    Identical loop to :func:`dba` with alignments from the windowed shape
    distance; associations and updates use the raw series values at the
    aligned indices. With reach == 1 the behavior is bit-identical to dba
    under the same initialization.
    """
    if len(members) == 0:
        raise ValueError("cannot average an empty set")
    config = config or AveragingConfig(method="shape_dba")
    reach = config.reach
    initial = _initial_average(members, config, "shapedtw")
    return _alignment_barycenter_loop(
        members,
        initial,
        lambda avg, m: shape_dtw_efficient(avg, m, reach),
        config.max_iterations,
        config.tolerance,
    )


def soft_dba(members: Sequence[TimeSeries], config: AveragingConfig | None = None) -> BarycenterResult:
    """Soft-DTW barycenter by gradient descent with backtracking step halving.

    Minimizes F(c) = sum_i soft_dtw(c, x_i, gamma). A step is accepted only
    if it strictly decreases F, so the recorded trace never increases.
    Members (and the prototype) must share one length.
    """
    if len(members) == 0:
        raise ValueError("cannot average an empty set")
    config = config or AveragingConfig(method="soft_dba")
    lengths = {len(m) for m in members}
    if len(lengths) != 1:
        raise ValueError(f"soft_dba requires equal-length members, got lengths {sorted(lengths)}")
    gamma = config.gamma
    initial = _initial_average(members, config, "softdtw")
    if len(initial) != next(iter(lengths)):
        raise ValueError(
            f"soft_dba prototype length {len(initial)} does not match member length {next(iter(lengths))}"
        )
    member_values = [m.values for m in members]

    def objective(c: np.ndarray) -> float:
        return float(sum(soft_dtw(c, v, gamma) for v in member_values))

    avg = initial.values.copy()
    obj = objective(avg)
    trace = [obj]
    converged = False
    step = 1.0
    for _ in range(config.max_iterations - 1):
        grad = np.zeros_like(avg)
        for v in member_values:
            grad += soft_dtw_gradient(avg, v, gamma)
        if not np.any(grad):
            converged = True
            break
        step *= 2.0  # let the accepted step size recover between iterations
        candidate = None
        candidate_obj = obj
        for _ in range(_MAX_STEP_HALVINGS):
            trial = avg - step * grad
            trial_obj = objective(trial)
            if trial_obj < obj:
                candidate = trial
                candidate_obj = trial_obj
                break
            step /= 2.0
        if candidate is None:
            converged = True
            break
        improvement = _relative_change(obj, candidate_obj)
        avg = candidate
        obj = candidate_obj
        trace.append(obj)
        if improvement <= config.tolerance:
            converged = True
            break
    return BarycenterResult(
        average=TimeSeries(avg),
        objective_trace=tuple(trace),
        iterations_run=len(trace),
        converged=converged,
    )


def compute_barycenter(members: Sequence[TimeSeries], config: AveragingConfig) -> BarycenterResult:
    """Dispatch to the configured averaging method.

    The arithmetic mean is wrapped in a single-iteration result so all
    methods share one return type.
    """
    if config.method == "mean":
        avg = arithmetic_mean(members)
        obj = float(sum(euclidean_sq(avg.values, m.values) for m in members))
        return BarycenterResult(
            average=avg, objective_trace=(obj,), iterations_run=1, converged=True
        )
    if config.method == "dba":
        return dba(members, config)
    if config.method == "shape_dba":
        return shape_dba(members, config)
    return soft_dba(members, config)


def euclidean_sq(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum((a - b) ** 2))
