"""Elastic distance measures: ED, DTW, soft-DTW, and shape-context DTW.

All DTW-family measures use squared pointwise differences as step costs
and apply a single square root to the optimal total, so the soft-DTW
gamma -> 0 limit and the efficient shape-distance accumulation are exact.
No warping-window constraint is applied.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .series import LabeledDataset, TimeSeries, as_values

__all__ = [
    "WarpingPath",
    "DistanceOutcome",
    "ShapeDescriptorConfig",
    "euclidean_distance",
    "dtw",
    "dtw_squared",
    "softmin",
    "soft_dtw",
    "soft_dtw_gradient",
    "extract_subsequences",
    "shape_dtw_naive",
    "shape_dtw_efficient",
    "pairwise_distances",
]

# Below this temperature the smoothed minimum is numerically the hard one.
SOFTMIN_HARD_THRESHOLD = 1e-6

PAIRWISE_METRICS = ("euclidean", "dtw", "softdtw", "shapedtw")


@dataclass(frozen=True, eq=False)
class WarpingPath:
    """A monotone, unit-step alignment between two series.

    ``pairs`` is an integer array of shape (L_pi, 2); row t holds the
    aligned index pair (i_t, j_t). The first pair is (0, 0), the last is
    (L1-1, L2-1), and each step advances i and/or j by exactly one.
    """

    pairs: np.ndarray

    def __post_init__(self) -> None:
        pairs = np.asarray(self.pairs, dtype=np.int64)
        if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 1:
            raise ValueError(f"warping path must be a (K, 2) index array, got shape {pairs.shape}")
        if pairs[0, 0] != 0 or pairs[0, 1] != 0:
            raise ValueError("warping path must start at (0, 0)")
        steps = np.diff(pairs, axis=0)
        if steps.size and not (
            (steps >= 0).all() and (steps <= 1).all() and (steps.sum(axis=1) >= 1).all()
        ):
            raise ValueError("warping path steps must increase i and/or j by exactly one")
        pairs = pairs.copy()
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def end(self) -> tuple[int, int]:
        return int(self.pairs[-1, 0]), int(self.pairs[-1, 1])

    def transposed(self) -> "WarpingPath":
        """The same alignment with the roles of the two series swapped."""
        return WarpingPath(self.pairs[:, ::-1])


@dataclass(frozen=True, eq=False)
class DistanceOutcome:
    """A distance value plus, for path-based measures, the optimal alignment."""

    distance: float
    path: WarpingPath | None = None


@dataclass(frozen=True)
class ShapeDescriptorConfig:
    """Neighborhood configuration for the shape-context distance.

    ``reach`` is the subsequence length around each time stamp; the
    descriptor is the identity, so the descriptor dimension equals reach
    and reach == 1 recovers plain DTW.
    """

    reach: int = 30

    def __post_init__(self) -> None:
        if self.reach < 1:
            raise ValueError(f"reach must be >= 1, got {self.reach}")

    def descriptors(self, x) -> np.ndarray:
        """Identity descriptors: the raw subsequences, shape (L, reach)."""
        return extract_subsequences(x, self.reach)


def euclidean_distance(x, y) -> float:
    """Lock-step Euclidean distance between two equal-length series."""
    xv = as_values(x)
    yv = as_values(y)
    if xv.shape[0] != yv.shape[0]:
        raise ValueError(
            f"euclidean distance requires equal lengths, got {xv.shape[0]} and {yv.shape[0]}"
        )
    return float(np.sqrt(np.sum((xv - yv) ** 2)))


def _dtw_outcome(cost: np.ndarray) -> DistanceOutcome:
    acc = _kernels.accumulate_cost(cost)
    pairs = _kernels.backtrace(acc)
    return DistanceOutcome(distance=math.sqrt(acc[-1, -1]), path=WarpingPath(pairs))


def dtw(x, y) -> DistanceOutcome:
    """Dynamic time warping distance and one optimal warping path.

    The distance is the square root of the minimal path sum of squared
    differences. Unequal lengths are allowed; ties in the backtrace prefer
    the diagonal, then the step decreasing i, then the step decreasing j.
    """
    xv = as_values(x)
    yv = as_values(y)
    cost = _kernels.squared_cost_matrix(xv, yv)
    return _dtw_outcome(cost)


def dtw_squared(x, y) -> float:
    """The squared DTW distance (the optimal path sum before the root).

    This is the quantity soft-DTW converges to as gamma -> 0.
    """
    xv = as_values(x)
    yv = as_values(y)
    cost = _kernels.squared_cost_matrix(xv, yv)
    acc = _kernels.accumulate_cost(cost)
    return float(acc[-1, -1])


def softmin(values: Sequence[float], gamma: float) -> float:
    """Smoothed minimum ``-gamma * log(sum(exp(-v / gamma)))``.

    Computed with a min-shift so the exponentials cannot overflow; gammas
    below ``SOFTMIN_HARD_THRESHOLD`` return the hard minimum.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("softmin of an empty sequence")
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    m = float(arr.min())
    if gamma < SOFTMIN_HARD_THRESHOLD:
        return m
    return m - gamma * float(np.log(np.exp((m - arr) / gamma).sum()))


def soft_dtw(x, y, gamma: float) -> float:
    """Soft-DTW value: the DTW recursion with softmin over predecessors.

    May be negative; bounded above by :func:`dtw_squared` and converges to
    it as gamma -> 0.
    """
    xv = as_values(x)
    yv = as_values(y)
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    table = _kernels.soft_dtw_table(xv, yv, gamma)
    return float(table[-1, -1])


def soft_dtw_gradient(x, y, gamma: float) -> np.ndarray:
    """Gradient of ``soft_dtw(x, y, gamma)`` with respect to x (length L1)."""
    xv = as_values(x)
    yv = as_values(y)
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return _kernels.soft_dtw_gradient_kernel(xv, yv, gamma)


def _edge_pad(values: np.ndarray, reach: int) -> np.ndarray:
    pad_left = reach // 2
    pad_right = reach - 1 - pad_left
    return np.concatenate(
        [np.full(pad_left, values[0]), values, np.full(pad_right, values[-1])]
    )


def extract_subsequences(x, reach: int) -> np.ndarray:
    """Per-time-stamp neighborhoods of length ``reach`` as an (L, reach) array.

    The series is edge-padded (boundary values replicated) with
    ``reach // 2`` values on the left and the remainder on the right, so
    subsequence t covers padded[t : t + reach]. reach == 1 yields the
    samples themselves as singletons.
    """
    if reach < 1:
        raise ValueError(f"reach must be >= 1, got {reach}")
    values = as_values(x)
    padded = _edge_pad(values, reach)
    return np.lib.stride_tricks.sliding_window_view(padded, reach).copy()


def shape_dtw_naive(x, y, reach: int) -> DistanceOutcome:
    """Shape-context DTW computed directly over subsequence descriptors.

    Step cost between stamps (i, j) is the squared Euclidean distance
    between their identity descriptors; the distance is the square root of
    the optimal path sum. Kept as the reference for the windowed variant.
    """
    config = ShapeDescriptorConfig(reach=reach)
    cost = _kernels.descriptor_cost_matrix(config.descriptors(x), config.descriptors(y))
    return _dtw_outcome(cost)


def shape_dtw_efficient(x, y, reach: int) -> DistanceOutcome:
    """Shape-context DTW via diagonal accumulation of the padded cost matrix.

    Builds the pointwise squared-difference matrix of the two edge-padded
    series once, accumulates the reach diagonal window sums, and runs the
    same dynamic program as :func:`shape_dtw_naive`. Numerically matches
    the naive form; with reach == 1 it is plain DTW, bit for bit.
    """
    if reach < 1:
        raise ValueError(f"reach must be >= 1, got {reach}")
    xv = as_values(x)
    yv = as_values(y)
    xp = _edge_pad(xv, reach)
    yp = _edge_pad(yv, reach)
    cost = _kernels.windowed_diagonal_cost_matrix(xp, yp, reach)
    return _dtw_outcome(cost)


def _metric_callable(metric: str, reach: int, gamma: float):
    if metric == "euclidean":
        return lambda a, b: euclidean_distance(a, b)
    if metric == "dtw":
        return lambda a, b: dtw(a, b).distance
    if metric == "softdtw":
        return lambda a, b: soft_dtw(a, b, gamma)
    if metric == "shapedtw":
        return lambda a, b: shape_dtw_efficient(a, b, reach).distance
    raise ValueError(f"unknown metric {metric!r}; expected one of {PAIRWISE_METRICS}")


def pairwise_distances(
    dataset: LabeledDataset | Sequence[TimeSeries],
    metric: str,
    *,
    reach: int = 30,
    gamma: float = 1.0,
    n_jobs: int = 1,
) -> np.ndarray:
    """All-pairs distance matrix under the selected metric.

    Each unordered pair is computed once and mirrored, so the result is
    exactly symmetric and independent of the worker count. The diagonal is
    zero for every metric except ``softdtw``, whose self-distance is <= 0.
    """
    series = dataset.series if isinstance(dataset, LabeledDataset) else tuple(dataset)
    fn = _metric_callable(metric, reach, gamma)
    n = len(series)
    out = np.zeros((n, n))
    tasks = [(i, j) for i in range(n) for j in range(i, n)]

    def compute(pair):
        i, j = pair
        try:
            return i, j, fn(series[i], series[j])
        except ValueError as exc:
            raise ValueError(f"pair ({i}, {j}): {exc}") from exc

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(compute, tasks))
    else:
        results = [compute(t) for t in tasks]
    for i, j, d in results:
        out[i, j] = d
        out[j, i] = d
    return out
