"""Clustering quality metrics and cross-method comparison statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "ContingencyTable",
    "ScoreRecord",
    "ScorePanel",
    "rand_index",
    "adjusted_rand_index",
    "WilcoxonResult",
    "wilcoxon_signed_rank",
    "holm_correction",
    "win_tie_loss",
    "average_ranks",
    "MeanScores",
    "mean_scores",
]

SIGNIFICANCE_LEVEL = 0.05

# Below this many nonzero differences the signed-rank test is meaningless;
# we report p = 1 and flag the result instead of failing a campaign.
WILCOXON_MIN_NONZERO = 5

_EXACT_WILCOXON_MAX_N = 25


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Co-occurrence counts between true labels and predicted clusters."""

    counts: np.ndarray

    @classmethod
    def from_labels(cls, y: Sequence[int], yhat: Sequence[int]) -> "ContingencyTable":
        y = np.asarray(y)
        yhat = np.asarray(yhat)
        if y.shape != yhat.shape or y.ndim != 1:
            raise ValueError(f"label sequences must match in length, got {y.shape} and {yhat.shape}")
        rows = {v: i for i, v in enumerate(np.unique(y))}
        cols = {v: j for j, v in enumerate(np.unique(yhat))}
        counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for a, b in zip(y, yhat):
            counts[rows[a], cols[b]] += 1
        return cls(counts)

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _pair_counts(table: ContingencyTable) -> tuple[int, int, int]:
    """(sum C(n_ij,2), sum C(a_i,2), sum C(b_j,2)) as exact integers."""
    same_both = int(sum(math.comb(int(v), 2) for v in table.counts.ravel()))
    same_true = int(sum(math.comb(int(v), 2) for v in table.row_sums))
    same_pred = int(sum(math.comb(int(v), 2) for v in table.col_sums))
    return same_both, same_true, same_pred


def rand_index(y: Sequence[int], yhat: Sequence[int]) -> float:
    """Fraction of sample pairs on which the two partitions agree."""
    table = ContingencyTable.from_labels(y, yhat)
    if table.n < 2:
        raise ValueError("rand index requires at least two samples")
    tp, p, q = _pair_counts(table)
    total = math.comb(table.n, 2)
    # agreements = same-same pairs + different-different pairs
    return (total - p - q + 2 * tp) / total


def adjusted_rand_index(y: Sequence[int], yhat: Sequence[int]) -> float:
    """Chance-corrected rand index via the permutation-model contingency form.

    Equals (RI - E[RI]) / (1 - E[RI]) with the expectation taken under
    random permutations of the predicted labels; 0 when the denominator
    vanishes (both partitions trivial). Bounded in [-0.5, 1].
    """
    table = ContingencyTable.from_labels(y, yhat)
    if table.n < 2:
        raise ValueError("adjusted rand index requires at least two samples")
    tp, p, q = _pair_counts(table)
    total = math.comb(table.n, 2)
    # Scale both sides by 2*total to stay in exact integer arithmetic.
    numerator = 2 * (total * tp - p * q)
    denominator = total * (p + q) - 2 * p * q
    if denominator == 0:
        return 0.0
    return numerator / denominator


class WilcoxonResult(NamedTuple):
    p_value: float
    statistic: float  # sum of ranks of the positive differences
    n_nonzero: int
    degenerate: bool  # fewer nonzero differences than WILCOXON_MIN_NONZERO


def _exact_signed_rank_p(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided exact p over all sign assignments, with averaged tied ranks.

    Ranks are doubled so midranks become integers, then the distribution of
    the doubled positive-rank sum is built by convolution.
    """
    weights = np.rint(2 * ranks).astype(np.int64)
    total = int(weights.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for w in weights:
        shifted = np.zeros_like(counts)
        shifted[w:] = counts[: total + 1 - w]
        counts += shifted
    observed = int(round(2 * w_plus))
    n_assignments = counts.sum()
    lower = counts[: observed + 1].sum() / n_assignments
    upper = counts[observed:].sum() / n_assignments
    return float(min(1.0, 2.0 * min(lower, upper)))


def _normal_signed_rank_p(ranks: np.ndarray, w_plus: float, n: int) -> float:
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    # tie correction: averaged ranks shrink the variance
    _, tie_counts = np.unique(ranks, return_counts=True)
    variance -= float(((tie_counts**3 - tie_counts) / 48.0).sum())
    if variance <= 0:
        return 1.0
    deviation = w_plus - mean
    correction = 0.5 * math.copysign(1.0, deviation) if deviation != 0 else 0.0
    z = (deviation - correction) / math.sqrt(variance)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired scores.

    Zero differences are dropped and tied absolute differences get
    averaged ranks. The null distribution is exact (full enumeration by
    convolution) up to 25 nonzero differences, and a normal approximation
    with continuity correction beyond. Fewer than five nonzero
    differences yields p = 1 with the ``degenerate`` flag set.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired score sequences must match in length, got {a.shape} and {b.shape}")
    diffs = a - b
    nonzero = diffs[diffs != 0]
    n = int(nonzero.shape[0])
    if n < WILCOXON_MIN_NONZERO:
        w_plus = 0.0
        if n:
            ranks = rankdata(np.abs(nonzero))
            w_plus = float(ranks[nonzero > 0].sum())
        return WilcoxonResult(p_value=1.0, statistic=w_plus, n_nonzero=n, degenerate=True)
    ranks = rankdata(np.abs(nonzero))
    w_plus = float(ranks[nonzero > 0].sum())
    if n <= _EXACT_WILCOXON_MAX_N:
        p = _exact_signed_rank_p(ranks, w_plus)
    else:
        p = _normal_signed_rank_p(ranks, w_plus, n)
    return WilcoxonResult(p_value=p, statistic=w_plus, n_nonzero=n, degenerate=False)


def holm_correction(pvalues: Sequence[float]) -> list[float]:
    """Holm step-down adjustment, monotone and clipped to 1."""
    p = np.asarray(pvalues, dtype=np.float64)
    if p.size == 0:
        return []
    if (p < 0).any() or (p > 1).any():
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, (m - rank) * p[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted.tolist()


def win_tie_loss(a: Sequence[float], b: Sequence[float]) -> tuple[int, int, int]:
    """Per-dataset comparison counts for a against b; ties are exact equality."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired score sequences must match in length, got {a.shape} and {b.shape}")
    return int((a > b).sum()), int((a == b).sum()), int((a < b).sum())


@dataclass(frozen=True)
class ScoreRecord:
    dataset: str
    method: str
    seed: int
    ari: float
    runtime_seconds: float


class ScorePanel:
    """Per-(dataset, method, seed) score records feeding all comparisons."""

    def __init__(self, records: Sequence[ScoreRecord] = ()):
        self.records: list[ScoreRecord] = []
        self._seen: set[tuple[str, str, int]] = set()
        for record in records:
            self.add(record)

    def add(self, record: ScoreRecord) -> None:
        key = (record.dataset, record.method, record.seed)
        if key in self._seen:
            raise ValueError(f"duplicate record for {key}")
        if not -0.5 - 1e-12 <= record.ari <= 1.0 + 1e-12:
            raise ValueError(f"ARI {record.ari} outside [-0.5, 1]")
        self._seen.add(key)
        self.records.append(record)

    def methods(self) -> list[str]:
        return sorted({r.method for r in self.records})

    def datasets(self) -> list[str]:
        return sorted({r.dataset for r in self.records})

    def seed_averaged(self) -> dict[tuple[str, str], tuple[float, float]]:
        """(dataset, method) -> (mean ARI over seeds, mean runtime over seeds)."""
        groups: dict[tuple[str, str], list[ScoreRecord]] = {}
        for r in self.records:
            groups.setdefault((r.dataset, r.method), []).append(r)
        return {
            key: (
                float(np.mean([r.ari for r in rs])),
                float(np.mean([r.runtime_seconds for r in rs])),
            )
            for key, rs in groups.items()
        }

    def method_scores(self, method: str, datasets: Sequence[str] | None = None) -> np.ndarray:
        """Seed-averaged ARI of one method over the given datasets, in order."""
        averaged = self.seed_averaged()
        datasets = list(datasets) if datasets is not None else self.datasets()
        missing = [d for d in datasets if (d, method) not in averaged]
        if missing:
            raise ValueError(f"method {method!r} has no records for datasets {missing}")
        return np.array([averaged[(d, method)][0] for d in datasets])


def _complete_matrix(panel: ScorePanel) -> tuple[list[str], list[str], np.ndarray, np.ndarray]:
    datasets = panel.datasets()
    methods = panel.methods()
    averaged = panel.seed_averaged()
    ari = np.empty((len(datasets), len(methods)))
    runtime = np.empty_like(ari)
    for i, d in enumerate(datasets):
        for j, m in enumerate(methods):
            if (d, m) not in averaged:
                raise ValueError(f"missing scores for dataset {d!r}, method {m!r}")
            ari[i, j], runtime[i, j] = averaged[(d, m)]
    return datasets, methods, ari, runtime


def average_ranks(panel: ScorePanel) -> dict[str, float]:
    """Mean per-dataset rank of each method (1 = best ARI, ties share the mean rank)."""
    _, methods, ari, _ = _complete_matrix(panel)
    ranks = np.vstack([rankdata(-row) for row in ari])
    return {m: float(ranks[:, j].mean()) for j, m in enumerate(methods)}


class MeanScores(NamedTuple):
    ari: dict[str, float]
    runtime_seconds: dict[str, float]


def mean_scores(panel: ScorePanel) -> MeanScores:
    """Arithmetic mean over datasets of seed-averaged ARI and runtime per method."""
    _, methods, ari, runtime = _complete_matrix(panel)
    return MeanScores(
        ari={m: float(ari[:, j].mean()) for j, m in enumerate(methods)},
        runtime_seconds={m: float(runtime[:, j].mean()) for j, m in enumerate(methods)},
    )
