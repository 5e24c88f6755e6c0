"""End-to-end experiment runner: seeded shared-initialization campaigns.

For every dataset the runner loads and z-normalizes the train and test
splits, merges them, draws one set of initial clusters per seed, and feeds
those identical indices to every method. Records are appended to disk as
they complete so a crash loses at most one.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .clustering import COUPLINGS, ClusteringConfig, init_clusters, run_clustering
from .evaluation import (
    SIGNIFICANCE_LEVEL,
    ScorePanel,
    ScoreRecord,
    adjusted_rand_index,
    average_ranks,
    holm_correction,
    mean_scores,
    wilcoxon_signed_rank,
    win_tie_loss,
)
from .series import LabeledDataset, load_ucr_tsv, merge_train_test, z_normalize_dataset

__all__ = [
    "DatasetSpec",
    "ExperimentConfig",
    "RunRecord",
    "discover_datasets",
    "load_benchmark_dataset",
    "run_benchmark",
    "summarize",
    "RESULTS_HEADER",
]

logger = logging.getLogger(__name__)

RESULTS_HEADER = ["dataset", "method", "seed", "ari", "runtime_seconds", "iterations", "k", "n", "length"]
AUDIT_HEADER = ["dataset", "seed", "method", "k", "initial_indices"]

RESULTS_FILE = "results.csv"
AUDIT_FILE = "init_audit.csv"

GAP_MARKER = "NA"


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    train_path: Path
    test_path: Path | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark campaign: datasets x methods x seeds."""

    datasets: tuple[DatasetSpec, ...]
    methods: tuple[str, ...] = ("MED", "DBA", "SoftDBA", "ShapeDBA", "KShape")
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    reach: int = 30
    gamma: float = 1.0
    kmeans_iterations: int = 50
    inner_iterations: int = 5
    inner_tolerance: float = 1e-5
    out_dir: Path = field(default=Path("benchmark-out"))
    resume: bool = False

    def __post_init__(self) -> None:
        if not self.datasets:
            raise ValueError("at least one dataset is required")
        if not self.methods:
            raise ValueError("at least one method is required")
        unknown = [m for m in self.methods if m not in COUPLINGS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; expected a subset of {COUPLINGS}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    method: str
    seed: int
    ari: float
    runtime_seconds: float
    iterations: int
    k: int
    n: int
    length: int

    def row(self) -> list[str]:
        return [
            self.dataset,
            self.method,
            str(self.seed),
            repr(self.ari),
            repr(self.runtime_seconds),
            str(self.iterations),
            str(self.k),
            str(self.n),
            str(self.length),
        ]


def discover_datasets(root: "str | Path", exclude: Iterable[str] = ()) -> tuple[DatasetSpec, ...]:
    """Find UCR-layout datasets under a directory.

    Both ``root/NAME/NAME_TRAIN.tsv`` and flat ``root/NAME_TRAIN.tsv``
    layouts are recognized; a matching ``*_TEST.tsv`` is optional. Names in
    ``exclude`` are skipped.
    """
    root = Path(root)
    excluded = set(exclude)
    specs: dict[str, DatasetSpec] = {}
    for train in sorted(root.glob("*_TRAIN.tsv")) + sorted(root.glob("*/*_TRAIN.tsv")):
        name = train.stem[: -len("_TRAIN")]
        if name in excluded or name in specs:
            continue
        test = train.with_name(f"{name}_TEST.tsv")
        specs[name] = DatasetSpec(name=name, train_path=train, test_path=test if test.exists() else None)
    return tuple(specs[name] for name in sorted(specs))


def load_benchmark_dataset(spec: DatasetSpec) -> LabeledDataset:
    """Load, z-normalize, and merge the splits of one dataset."""
    train = z_normalize_dataset(load_ucr_tsv(spec.train_path, name=spec.name))
    if spec.test_path is None:
        return train
    test = z_normalize_dataset(load_ucr_tsv(spec.test_path, name=spec.name))
    return merge_train_test(train, test)


def _read_existing(path: Path) -> set[tuple[str, str, int]]:
    done: set[tuple[str, str, int]] = set()
    if not path.exists():
        return done
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            done.add((row["dataset"], row["method"], int(row["seed"])))
    return done


def _open_append(path: Path, header: list[str]):
    new = not path.exists() or path.stat().st_size == 0
    fh = path.open("a", newline="")
    writer = csv.writer(fh)
    if new:
        writer.writerow(header)
        fh.flush()
    return fh, writer


def run_benchmark(config: ExperimentConfig) -> ScorePanel:
    """Execute the campaign and return the collected score panel.

    Per-dataset failures are logged and skipped so one bad file cannot
    abort a long run. With ``resume`` set, (dataset, method, seed) cells
    already present in the results file are not recomputed.
    """
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / RESULTS_FILE
    audit_path = out_dir / AUDIT_FILE
    done = _read_existing(results_path) if config.resume else set()
    if not config.resume and results_path.exists():
        results_path.unlink()
    if not config.resume and audit_path.exists():
        audit_path.unlink()

    results_fh, results_writer = _open_append(results_path, RESULTS_HEADER)
    audit_fh, audit_writer = _open_append(audit_path, AUDIT_HEADER)
    panel = ScorePanel()
    try:
        for spec in config.datasets:
            try:
                dataset = load_benchmark_dataset(spec)
            except (ValueError, OSError) as exc:
                logger.warning("skipping dataset %s: %s", spec.name, exc)
                continue
            k = dataset.n_classes
            length = len(dataset.series[0]) if dataset.equal_length else 0
            for seed in config.seeds:
                indices = init_clusters(dataset, k, seed)
                for method in config.methods:
                    if (spec.name, method, seed) in done:
                        continue
                    cluster_config = ClusteringConfig(
                        coupling=method,
                        k=k,
                        seed=seed,
                        initial_centroid_indices=tuple(int(i) for i in indices),
                        max_iterations=config.kmeans_iterations,
                        reach=config.reach,
                        gamma=config.gamma,
                        inner_iterations=config.inner_iterations,
                        inner_tolerance=config.inner_tolerance,
                    )
                    try:
                        result = run_clustering(dataset, cluster_config)
                    except ValueError as exc:
                        logger.warning("skipping %s/%s/seed=%d: %s", spec.name, method, seed, exc)
                        continue
                    ari = adjusted_rand_index(dataset.labels, result.assignments)
                    record = RunRecord(
                        dataset=spec.name,
                        method=method,
                        seed=seed,
                        ari=ari,
                        runtime_seconds=result.runtime_seconds,
                        iterations=result.iterations_run,
                        k=k,
                        n=dataset.n,
                        length=length,
                    )
                    results_writer.writerow(record.row())
                    results_fh.flush()
                    audit_writer.writerow(
                        [spec.name, str(seed), method, str(k), ";".join(str(i) for i in result.initial_indices)]
                    )
                    audit_fh.flush()
                    panel.add(
                        ScoreRecord(
                            dataset=spec.name,
                            method=method,
                            seed=seed,
                            ari=ari,
                            runtime_seconds=result.runtime_seconds,
                        )
                    )
                    logger.info("%s %s seed=%d ari=%.4f (%.2fs)", spec.name, method, seed, ari, result.runtime_seconds)
    finally:
        results_fh.close()
        audit_fh.close()
    return panel


def load_panel(results_path: "str | Path") -> ScorePanel:
    """Rebuild a score panel from a results CSV."""
    panel = ScorePanel()
    with Path(results_path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            panel.add(
                ScoreRecord(
                    dataset=row["dataset"],
                    method=row["method"],
                    seed=int(row["seed"]),
                    ari=float(row["ari"]),
                    runtime_seconds=float(row["runtime_seconds"]),
                )
            )
    return panel


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def summarize(results_dir: "str | Path", out_dir: "str | Path | None" = None) -> dict[str, Path]:
    """Emit the comparison tables from a results directory.

    Always writes the per-dataset seed-averaged ARI matrix; with two or
    more methods also writes the pairwise Wilcoxon/win-tie-loss table, the
    average-rank table, the mean-score table, and pairwise runtime ratios.
    Missing (dataset, method) cells appear as explicit gap markers.
    """
    results_dir = Path(results_dir)
    out_dir = Path(out_dir) if out_dir is not None else results_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = load_panel(results_dir / RESULTS_FILE)
    averaged = panel.seed_averaged()
    datasets = panel.datasets()
    methods = panel.methods()
    written: dict[str, Path] = {}

    ari_rows = []
    for d in datasets:
        row = [d]
        for m in methods:
            cell = averaged.get((d, m))
            row.append(repr(cell[0]) if cell is not None else GAP_MARKER)
        ari_rows.append(row)
    path = out_dir / "ari_by_dataset.csv"
    _write_csv(path, ["dataset"] + methods, ari_rows)
    written["ari_by_dataset"] = path

    if len(methods) < 2:
        return written

    complete = [d for d in datasets if all((d, m) in averaged for m in methods)]
    if len(complete) < len(datasets):
        logger.warning(
            "comparison tables use the %d datasets scored by every method (of %d)",
            len(complete),
            len(datasets),
        )
    if not complete:
        return written
    sub = ScorePanel()
    for r in panel.records:
        if r.dataset in complete:
            sub.add(r)

    pairs = [(a, b) for i, a in enumerate(methods) for b in methods[i + 1 :]]
    pvalues = []
    rows = []
    for a, b in pairs:
        scores_a = sub.method_scores(a, complete)
        scores_b = sub.method_scores(b, complete)
        wins, ties, losses = win_tie_loss(scores_a, scores_b)
        test = wilcoxon_signed_rank(scores_a, scores_b)
        pvalues.append(test.p_value)
        rows.append([a, b, wins, ties, losses, test.p_value, test.n_nonzero, test.degenerate])
    adjusted = holm_correction(pvalues)
    table_rows = []
    for (a, b, wins, ties, losses, p, n_nonzero, degenerate), holm_p in zip(rows, adjusted):
        table_rows.append(
            [
                a,
                b,
                str(wins),
                str(ties),
                str(losses),
                repr(p),
                repr(holm_p),
                str(p <= SIGNIFICANCE_LEVEL),
                str(n_nonzero),
                str(degenerate),
            ]
        )
    path = out_dir / "pairwise_tests.csv"
    _write_csv(
        path,
        ["method_a", "method_b", "wins", "ties", "losses", "p_value", "holm_p", "significant", "n_nonzero", "degenerate"],
        table_rows,
    )
    written["pairwise_tests"] = path

    ranks = average_ranks(sub)
    path = out_dir / "average_ranks.csv"
    _write_csv(path, ["method", "mean_rank"], [[m, repr(ranks[m])] for m in methods])
    written["average_ranks"] = path

    means = mean_scores(sub)
    path = out_dir / "mean_scores.csv"
    _write_csv(
        path,
        ["method", "mean_ari", "mean_runtime_seconds"],
        [[m, repr(means.ari[m]), repr(means.runtime_seconds[m])] for m in methods],
    )
    written["mean_scores"] = path

    ratio_rows = []
    for a, b in pairs:
        ratio = means.runtime_seconds[a] / means.runtime_seconds[b]
        ratio_rows.append([a, b, repr(ratio)])
    path = out_dir / "runtime_ratios.csv"
    _write_csv(path, ["method_a", "method_b", "runtime_ratio"], ratio_rows)
    written["runtime_ratios"] = path
    return written
