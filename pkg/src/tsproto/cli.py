"""Command-line interface: average, cluster, benchmark, summarize.

Benchmark options can come from a flat ``key=value`` config file; any flag
given on the command line overrides the file. Recognized config keys match
the long flag names: datasets, exclude, methods, seeds, reach, gamma, out,
kmeans_iterations, inner_iterations.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .averaging import AVERAGING_METHODS, AveragingConfig, compute_barycenter
from .benchmark import (
    DatasetSpec,
    ExperimentConfig,
    discover_datasets,
    load_benchmark_dataset,
    run_benchmark,
    summarize,
)
from .clustering import COUPLINGS, ClusteringConfig, run_clustering
from .evaluation import adjusted_rand_index
from .series import LabeledDataset, TimeSeries, load_ucr_tsv, save_ucr_tsv, z_normalize_dataset

logger = logging.getLogger(__name__)


def _parse_seeds(text: str) -> tuple[int, ...]:
    """Either a count ("5" -> seeds 0..4) or an explicit list ("0,3,7")."""
    if "," in text:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    return tuple(range(int(text)))


def _read_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{line_no}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _read_exclusions(path: Path | None) -> tuple[str, ...]:
    if path is None:
        return ()
    return tuple(
        line.strip() for line in path.read_text().splitlines() if line.strip() and not line.strip().startswith("#")
    )


def _cmd_average(args: argparse.Namespace) -> int:
    dataset = load_ucr_tsv(args.input)
    config = AveragingConfig(
        method=args.method,
        max_iterations=args.iterations,
        tolerance=args.tolerance,
        reach=args.reach,
        gamma=args.gamma,
        seed=args.seed,
    )
    result = compute_barycenter(dataset.series, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    prototype_path = out_dir / f"{dataset.name}_{args.method}_prototype.tsv"
    prototype = LabeledDataset(
        name=dataset.name, series=(result.average,), labels=np.array([0], dtype=np.int64)
    )
    save_ucr_tsv(prototype, prototype_path)
    trace_path = out_dir / f"{dataset.name}_{args.method}_trace.csv"
    with trace_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective"])
        for i, value in enumerate(result.objective_trace):
            writer.writerow([str(i), repr(value)])
    print(f"prototype: {prototype_path}")
    print(f"trace: {trace_path} ({result.iterations_run} iterations, converged={result.converged})")
    return 0


def _cmd_cluster(args: argparse.Namespace) -> int:
    spec = DatasetSpec(
        name=Path(args.train).stem.removesuffix("_TRAIN"),
        train_path=Path(args.train),
        test_path=Path(args.test) if args.test else None,
    )
    dataset = load_benchmark_dataset(spec)
    config = ClusteringConfig(
        coupling=args.method,
        k=args.k,
        seed=args.seed,
        max_iterations=args.iterations,
        reach=args.reach,
        gamma=args.gamma,
    )
    result = run_clustering(dataset, config)
    ari = adjusted_rand_index(dataset.labels, result.assignments)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    assignments_path = out_dir / f"{dataset.name}_{args.method}_assignments.csv"
    with assignments_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "label", "cluster"])
        for i, (label, cluster) in enumerate(zip(dataset.labels, result.assignments)):
            writer.writerow([str(i), str(int(label)), str(int(cluster))])
    centroids_path = out_dir / f"{dataset.name}_{args.method}_centroids.tsv"
    centroids = LabeledDataset(
        name=dataset.name,
        series=result.centroids,
        labels=np.arange(len(result.centroids), dtype=np.int64),
    )
    save_ucr_tsv(centroids, centroids_path)
    print(
        f"{dataset.name}: ari={ari:.6f} inertia={result.inertia:.6f} "
        f"iterations={result.iterations_run} runtime={result.runtime_seconds:.3f}s"
    )
    print(f"assignments: {assignments_path}")
    print(f"centroids: {centroids_path}")
    return 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    file_values = _read_config_file(Path(args.config)) if args.config else {}

    def pick(flag_value, key: str, fallback):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return file_values[key]
        return fallback

    datasets_dir = pick(args.datasets, "datasets", None)
    if datasets_dir is None:
        raise SystemExit("--datasets (or a 'datasets' config key) is required")
    exclude_path = pick(args.exclude, "exclude", None)
    exclusions = _read_exclusions(Path(exclude_path)) if exclude_path else ()
    methods_text = pick(args.methods, "methods", ",".join(COUPLINGS))
    seeds_text = pick(args.seeds, "seeds", "5")
    config = ExperimentConfig(
        datasets=discover_datasets(datasets_dir, exclusions),
        methods=tuple(m.strip() for m in str(methods_text).split(",") if m.strip()),
        seeds=_parse_seeds(str(seeds_text)),
        reach=int(pick(args.reach, "reach", 30)),
        gamma=float(pick(args.gamma, "gamma", 1.0)),
        kmeans_iterations=int(pick(args.kmeans_iterations, "kmeans_iterations", 50)),
        inner_iterations=int(pick(args.inner_iterations, "inner_iterations", 5)),
        out_dir=Path(pick(args.out, "out", "benchmark-out")),
        resume=args.resume,
    )
    if not config.datasets:
        raise SystemExit(f"no datasets found under {datasets_dir}")
    panel = run_benchmark(config)
    print(f"{len(panel.records)} new records in {config.out_dir}")
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    written = summarize(args.results, args.out)
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsproto", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="enable info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_avg = sub.add_parser("average", help="compute a prototype series for a UCR TSV file")
    p_avg.add_argument("--input", required=True, help="UCR TSV file to average")
    p_avg.add_argument("--method", required=True, choices=AVERAGING_METHODS)
    p_avg.add_argument("--reach", type=int, default=30)
    p_avg.add_argument("--gamma", type=float, default=1.0)
    p_avg.add_argument("--iterations", type=int, default=30)
    p_avg.add_argument("--tolerance", type=float, default=1e-5)
    p_avg.add_argument("--seed", type=int, default=0)
    p_avg.add_argument("--out", default=".", help="output directory")
    p_avg.set_defaults(func=_cmd_average)

    p_cluster = sub.add_parser("cluster", help="cluster one dataset with one coupling")
    p_cluster.add_argument("--train", required=True, help="train split TSV")
    p_cluster.add_argument("--test", help="optional test split TSV (merged after train)")
    p_cluster.add_argument("--method", required=True, choices=COUPLINGS)
    p_cluster.add_argument("--k", type=int, help="cluster count (default: distinct labels)")
    p_cluster.add_argument("--seed", type=int, default=0)
    p_cluster.add_argument("--iterations", type=int, default=50)
    p_cluster.add_argument("--reach", type=int, default=30)
    p_cluster.add_argument("--gamma", type=float, default=1.0)
    p_cluster.add_argument("--out", default=".", help="output directory")
    p_cluster.set_defaults(func=_cmd_cluster)

    p_bench = sub.add_parser("benchmark", help="run the full campaign over a dataset directory")
    p_bench.add_argument("--config", help="flat key=value config file; flags override")
    p_bench.add_argument("--datasets", help="directory of UCR-layout datasets")
    p_bench.add_argument("--exclude", help="file listing dataset names to skip, one per line")
    p_bench.add_argument("--methods", help=f"comma list from {','.join(COUPLINGS)}")
    p_bench.add_argument("--seeds", help="seed count ('5' -> 0..4) or comma list ('0,3,7')")
    p_bench.add_argument("--reach", type=int)
    p_bench.add_argument("--gamma", type=float)
    p_bench.add_argument("--kmeans-iterations", dest="kmeans_iterations", type=int)
    p_bench.add_argument("--inner-iterations", dest="inner_iterations", type=int)
    p_bench.add_argument("--out", help="output directory")
    p_bench.add_argument("--resume", action="store_true", help="skip cells already in results.csv")
    p_bench.set_defaults(func=_cmd_benchmark)

    p_sum = sub.add_parser("summarize", help="emit comparison tables from benchmark results")
    p_sum.add_argument("--results", required=True, help="directory containing results.csv")
    p_sum.add_argument("--out", help="output directory (default: results directory)")
    p_sum.set_defaults(func=_cmd_summarize)
    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
