"""Independent oracles and synthetic data generators shared by the tests.

Everything here is deliberately naive (enumeration, O(N^2) scans, finite
differences) and never calls the code paths it is used to check.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from tsproto.series import LabeledDataset, TimeSeries


# ---------------------------------------------------------------------------
# warping-path enumeration


def warping_paths(l1: int, l2: int) -> list[list[tuple[int, int]]]:
    """All monotone unit-step paths from (0, 0) to (l1-1, l2-1)."""
    paths: list[list[tuple[int, int]]] = []

    def extend(path: list[tuple[int, int]]) -> None:
        i, j = path[-1]
        if i == l1 - 1 and j == l2 - 1:
            paths.append(list(path))
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < l1 and nj < l2:
                path.append((ni, nj))
                extend(path)
                path.pop()

    extend([(0, 0)])
    return paths


def brute_force_dtw(x, y) -> float:
    """Minimal sqrt(path sum of squared differences) by full enumeration."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    best = min(
        sum((x[i] - y[j]) ** 2 for i, j in path)
        for path in warping_paths(len(x), len(y))
    )
    return math.sqrt(best)


def edge_padded_subsequences(x, reach: int) -> np.ndarray:
    """Reference subsequence extraction with boundary replication."""
    x = np.asarray(x, dtype=float)
    pad_left = reach // 2
    pad_right = reach - 1 - pad_left
    padded = np.concatenate([np.full(pad_left, x[0]), x, np.full(pad_right, x[-1])])
    return np.stack([padded[t : t + reach] for t in range(len(x))])


def brute_force_shape_dtw(x, y, reach: int) -> float:
    """Shape distance by enumerating every path over descriptor costs."""
    xd = edge_padded_subsequences(x, reach)
    yd = edge_padded_subsequences(y, reach)
    best = min(
        sum(float(np.sum((xd[i] - yd[j]) ** 2)) for i, j in path)
        for path in warping_paths(len(xd), len(yd))
    )
    return math.sqrt(best)


def path_cost(x, y, pairs) -> float:
    """Sum of squared differences along an alignment."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(sum((x[i] - y[j]) ** 2 for i, j in pairs))


# ---------------------------------------------------------------------------
# numerical oracles


def central_difference_gradient(f, x, step: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(len(x)):
        up = x.copy()
        down = x.copy()
        up[i] += step
        down[i] -= step
        grad[i] = (f(up) - f(down)) / (2 * step)
    return grad


def time_domain_ncc(x, y) -> np.ndarray:
    """Normalized cross-correlation over all shifts -(L-1)..(L-1), O(L^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    length = len(x)
    denom = np.linalg.norm(x) * np.linalg.norm(y)
    out = np.zeros(2 * length - 1)
    for p, shift in enumerate(range(-(length - 1), length)):
        total = 0.0
        for t in range(length):
            u = t - shift
            if 0 <= u < length:
                total += x[t] * y[u]
        out[p] = total / denom
    return out


# ---------------------------------------------------------------------------
# partition-agreement oracles (pair counting)


def pair_counting_ri_ari(y, yhat) -> tuple[float, float]:
    """RI by scanning all pairs; ARI via the permutation-model expectation."""
    y = list(y)
    yhat = list(yhat)
    n = len(y)
    tp = tn = fp = fn = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_true = y[i] == y[j]
            same_pred = yhat[i] == yhat[j]
            if same_true and same_pred:
                tp += 1
            elif same_true:
                fn += 1
            elif same_pred:
                fp += 1
            else:
                tn += 1
    total = math.comb(n, 2)
    ri = (tp + tn) / total
    same_true_pairs = tp + fn
    same_pred_pairs = tp + fp
    expected_tp = same_true_pairs * same_pred_pairs / total
    expected_ri = (total - same_true_pairs - same_pred_pairs + 2 * expected_tp) / total
    if expected_ri == 1.0:
        return ri, 0.0
    return ri, (ri - expected_ri) / (1.0 - expected_ri)


# ---------------------------------------------------------------------------
# signed-rank enumeration oracle


def midranks(values) -> list[float]:
    """Tie-averaged ranks of |values|, implemented independently of scipy."""
    magnitudes = [abs(v) for v in values]
    order = sorted(range(len(values)), key=lambda i: magnitudes[i])
    ranks = [0.0] * len(values)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and magnitudes[order[end + 1]] == magnitudes[order[pos]]:
            end += 1
        mean_rank = (pos + end) / 2 + 1
        for t in range(pos, end + 1):
            ranks[order[t]] = mean_rank
        pos = end + 1
    return ranks


def wilcoxon_enumeration_p(diffs) -> float:
    """Two-sided exact p by enumerating every sign assignment."""
    nonzero = [d for d in diffs if d != 0]
    ranks = midranks(nonzero)
    observed = sum(r for d, r in zip(nonzero, ranks) if d > 0)
    at_most = 0
    at_least = 0
    count = 0
    for signs in product((0, 1), repeat=len(nonzero)):
        w = sum(r for s, r in zip(signs, ranks) if s)
        count += 1
        if w <= observed + 1e-9:
            at_most += 1
        if w >= observed - 1e-9:
            at_least += 1
    return min(1.0, 2.0 * min(at_most / count, at_least / count))


# ---------------------------------------------------------------------------
# synthetic datasets


def random_series_list(rng, count: int, length: int, spread: float = 1.0) -> list[TimeSeries]:
    return [TimeSeries(rng.normal(0.0, spread, length)) for _ in range(count)]


def two_burst_dataset(n_per: int = 20, length: int = 100, seed: int = 0) -> LabeledDataset:
    """Two classes of sine bursts at disjoint offsets."""
    rng = np.random.default_rng(seed)
    burst_len = length // 5
    window = np.sin(np.linspace(0.0, np.pi, burst_len))
    series: list[TimeSeries] = []
    labels: list[int] = []
    for label, base_offset in enumerate((length // 10, length - length // 10 - burst_len)):
        for _ in range(n_per):
            values = rng.normal(0.0, 0.05, length)
            offset = base_offset + int(rng.integers(-2, 3))
            values[offset : offset + burst_len] += window
            series.append(TimeSeries(values))
            labels.append(label)
    return LabeledDataset("two-bursts", tuple(series), np.array(labels))


def warped_sine_dataset(
    n_per: int = 20,
    length: int = 100,
    noise: float = 0.1,
    seed: int = 0,
    name: str = "warped-sines",
) -> LabeledDataset:
    """Three classes of warped sine motifs (distinct frequencies)."""
    rng = np.random.default_rng(seed)
    series: list[TimeSeries] = []
    labels: list[int] = []
    grid = np.linspace(0.0, 1.0, length)
    for label, cycles in enumerate((1.0, 3.0, 6.0)):
        for _ in range(n_per):
            warp = grid + 0.02 * np.sin(2 * np.pi * grid + rng.uniform(0, 2 * np.pi))
            phase = rng.uniform(-0.2, 0.2)
            values = np.sin(2 * np.pi * cycles * warp + phase) + rng.normal(0.0, noise, length)
            series.append(TimeSeries(values))
            labels.append(label)
    return LabeledDataset(name, tuple(series), np.array(labels))


def shifted_waveform_dataset(
    n_per: int = 12, length: int = 64, seed: int = 0, name: str = "shifted-waves"
) -> LabeledDataset:
    """Two waveform classes whose members differ only by circular shifts."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 2 * np.pi, length, endpoint=False)
    bases = (np.sin(grid), np.sin(3 * grid))
    series: list[TimeSeries] = []
    labels: list[int] = []
    for label, base in enumerate(bases):
        for _ in range(n_per):
            values = np.roll(base, int(rng.integers(length))) + rng.normal(0.0, 0.03, length)
            series.append(TimeSeries(values))
            labels.append(label)
    return LabeledDataset(name, tuple(series), np.array(labels))
