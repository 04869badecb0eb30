"""Command-line surface: embed, run, matrix {ccr|complete|predict}, report.

Exit codes: 0 on full success, 1 on any fatal error (bad paths, malformed
inputs, infeasible parameters), 2 when a grid finished but some cells
failed. All file outputs are byte-identical across reruns with the same
inputs and seeds; durations are printed to stderr, never written to files.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import GridSpec, run_grid, summary_over_datasets
from .data import (
    BenchmarkSplit,
    LabeledEmbeddingSet,
    load_embedding_file,
    load_performance_matrix,
    save_embedding_file,
    save_performance_matrix,
)
from .detectors import DETECTOR_KINDS, DetectorConfig
from .embed_client import EmbeddingClient, EmbeddingSourceDescriptor
from .errors import TadbenchError
from .metrics import friedman_nemenyi
from .perfmatrix import (
    complete,
    export_completion,
    mask_from_missing,
    mean_recovery_mape,
    spectrum,
)

log = logging.getLogger("tadbench")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage problems; the exit-code contract
    # reserves 2 for partial grid failure, so funnel usage errors to 1
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- embed


def _cmd_embed(args) -> int:
    texts_path = Path(args.input)
    if not texts_path.is_file():
        raise TadbenchError(f"input text file not found: {texts_path}")
    texts = [line.rstrip("\n") for line in texts_path.read_text(encoding="utf-8").splitlines()]
    texts = [t for t in texts if t]
    if not texts:
        raise TadbenchError(f"no non-empty lines in {texts_path}")
    desc = EmbeddingSourceDescriptor(
        endpoint=args.endpoint,
        model_name=args.model,
        expected_dim=args.dim,
        max_batch=args.max_batch,
        timeout=args.timeout,
    )
    with EmbeddingClient(desc) as client:
        eset = client.fetch_embeddings(texts, name=args.name)
    save_embedding_file(args.out, eset)
    log.info("wrote %d x %d embeddings to %s", eset.n, eset.dim, args.out)
    return 0


# ---------------------------------------------------------------- run


def _detector_params(args, kind: str) -> dict:
    table = {
        "knn": {"k": args.k},
        "lof": {"n_neighbors": args.n_neighbors},
        "iforest": {"tree_count": args.trees, "subsample": args.subsample},
        "ocsvm": {"nu": args.nu, "gamma": args.gamma},
        "pca": {"variance_threshold": args.variance_threshold},
        "kde": {"bandwidth": args.bandwidth},
        "ecod": {},
        "ae": {"epochs": args.epochs, "learning_rate": args.learning_rate},
        "dsvdd": {"epochs": args.epochs, "learning_rate": args.learning_rate},
    }
    return {k: v for k, v in table[kind].items() if v is not None}


def _split_from_files(train_path: str, test_path: str | None, dataset: str | None) -> BenchmarkSplit:
    train = load_embedding_file(train_path)
    name = dataset or train.name
    if test_path is not None:
        test = load_embedding_file(test_path)
        if test.labels is None:
            raise TadbenchError(f"test file {test_path} carries no labels")
        train_rows = LabeledEmbeddingSet(name, train.embedding_source, train.matrix, None)
        test_rows = LabeledEmbeddingSet(name, train.embedding_source, test.matrix, test.labels)
        return BenchmarkSplit.of(train_rows, test_rows)
    # single labeled file: normal rows train, the full set is scored
    if train.labels is None:
        raise TadbenchError(
            f"{train_path} has no labels; pass a labeled file or add --test"
        )
    normal = train.matrix[train.labels == 0]
    if normal.shape[0] == 0:
        raise TadbenchError(f"{train_path} contains no normal rows to train on")
    return BenchmarkSplit.of(
        LabeledEmbeddingSet(name, train.embedding_source, normal, None),
        LabeledEmbeddingSet(name, train.embedding_source, train.matrix, train.labels),
    )


def _cmd_run(args) -> int:
    for path in list(args.embeddings) + ([args.test] if args.test else []):
        if not Path(path).is_file():
            raise TadbenchError(f"embedding file not found: {path}")
    splits = [_split_from_files(p, args.test, args.dataset) for p in args.embeddings]
    kinds = args.detector or list(DETECTOR_KINDS)
    configs = [
        DetectorConfig(
            kind=kind,
            params=_detector_params(args, kind),
            seed=args.seed,
            standardize=args.standardize,
        )
        for kind in kinds
    ]
    spec = GridSpec(
        splits=tuple(splits),
        detector_configs=tuple(configs),
        repeats=args.repeats,
        base_seed=args.seed,
        metric=args.metric,
    )
    result = run_grid(spec, max_workers=args.workers)
    (pm,) = result.matrices.values()
    out = Path(args.out)
    save_performance_matrix(pm, out)
    meta_path = out.with_suffix(".meta.json")
    result.save_meta(meta_path)
    log.info("wrote %s and %s", out, meta_path)
    for failure in result.failures:
        print(
            f"cell failure: {failure.dataset}/{failure.row_label}/{failure.col_label}: "
            f"{failure.message}",
            file=sys.stderr,
        )
    return 2 if result.failures else 0


# ---------------------------------------------------------------- matrix


def _cmd_matrix_ccr(args) -> int:
    pm = load_performance_matrix(args.matrix)
    summary = spectrum(pm)
    print("j,singular_value,ccr")
    for j, (sv, c) in enumerate(zip(summary.singular_values, summary.ccr_curve), start=1):
        print(f"{j},{float(sv)!r},{float(c)!r}")
    return 0


def _cmd_matrix_complete(args) -> int:
    pm = load_performance_matrix(args.matrix)
    mean, per_seed = mean_recovery_mape(
        pm, args.rate, r=args.rank, n_seeds=args.seeds, base_seed=args.base_seed
    )
    for i, value in enumerate(per_seed):
        print(f"seed {args.base_seed + i}: mape={value:.6f}")
    print(f"mean_mape={mean:.6f}")
    return 0


def _cmd_matrix_predict(args) -> int:
    pm = load_performance_matrix(args.matrix)
    truth = pm
    if args.observed:
        observed_pm = load_performance_matrix(args.observed)
        if observed_pm.values.shape != pm.values.shape:
            raise TadbenchError(
                f"observed mask shape {observed_pm.values.shape} does not match "
                f"matrix shape {pm.values.shape}"
            )
        grid = np.nan_to_num(observed_pm.values) != 0
        values = np.where(grid, pm.values, np.nan)
        pm = type(pm)(pm.dataset, pm.row_labels, pm.col_labels, values)
    mask = mask_from_missing(pm)
    if mask.n_hidden == 0:
        raise TadbenchError("matrix has no missing cells to predict")
    result = complete(pm, mask, r=args.rank)
    # keep observed cells verbatim; only the holes take reconstructed values
    filled = np.where(mask.observed_bool, pm.values, result.recovered)
    out = Path(args.out)
    # with an explicit mask the hidden truths are known, so the report can
    # carry a real recovery error instead of null
    export_completion(
        truth,
        mask,
        dataclasses.replace(result, recovered=filled),
        out,
        out.with_suffix(".meta.json"),
    )
    log.info("wrote %s", out)
    return 0


# ---------------------------------------------------------------- report


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _markdown_table(col_labels, row_labels, rows) -> str:
    head = "| dataset | " + " | ".join(col_labels) + " |"
    sep = "|" + "---|" * (len(col_labels) + 1)
    body = [
        "| " + " | ".join([label] + [_fmt(v) for v in row]) + " |"
        for label, row in zip(row_labels, rows)
    ]
    return "\n".join([head, sep] + body)


def _csv_table(col_labels, row_labels, rows) -> str:
    lines = ["dataset," + ",".join(col_labels)]
    for label, row in zip(row_labels, rows):
        lines.append(",".join([label] + [_fmt(v) for v in row]))
    return "\n".join(lines)


def _render(title, col_labels, row_labels, rows, fmt) -> str:
    table = (_markdown_table if fmt == "markdown" else _csv_table)(
        col_labels, row_labels, rows
    )
    if fmt == "markdown":
        return f"## {title}\n\n{table}\n"
    return f"# {title}\n{table}\n"


def _cmd_report(args) -> int:
    matrices = [load_performance_matrix(p) for p in args.results]
    best, mean = summary_over_datasets(matrices)

    chunks = []
    for title, pm in (("Best over embeddings", best), ("Mean over embeddings", mean)):
        rows = list(pm.values)
        row_labels = list(pm.row_labels)
        row_labels.append("Average")
        rows.append(pm.values.mean(axis=0))
        chunks.append(_render(title, pm.col_labels, row_labels, rows, args.format))

    stats = friedman_nemenyi(best)
    chunks.append(
        _render(
            "Average rank (1 = best) over datasets, with Friedman "
            f"chi2={stats.friedman_chi2:.4f} p={stats.friedman_p:.4g}",
            best.col_labels,
            ["mean_rank"],
            [stats.mean_ranks],
            args.format,
        )
    )
    chunks.append(
        _render(
            "Nemenyi pairwise p-values",
            stats.col_labels,
            stats.col_labels,
            list(stats.p_values),
            args.format,
        )
    )
    text = "\n".join(chunks)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        log.info("wrote %s", args.out)
    else:
        print(text, end="")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tadbench", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tadbench {__version__}")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="fetch embeddings over HTTP into a .tadb file")
    p_embed.add_argument("--endpoint", required=True, help="service URL")
    p_embed.add_argument("--model", required=True, help="model name sent to the service")
    p_embed.add_argument("--dim", type=int, required=True, help="expected embedding width")
    p_embed.add_argument("--input", required=True, help="text file, one input per line")
    p_embed.add_argument("--out", required=True, help="output .tadb path")
    p_embed.add_argument("--name", default="remote", help="dataset name stored in memory")
    p_embed.add_argument("--max-batch", type=int, default=512)
    p_embed.add_argument("--timeout", type=float, default=30.0)
    p_embed.set_defaults(func=_cmd_embed)

    p_run = sub.add_parser("run", help="fit detectors and score a test split")
    p_run.add_argument("--embeddings", action="append", required=True,
                       help="training .tadb file; repeat for multiple rows")
    p_run.add_argument("--test", help="labeled test .tadb file")
    p_run.add_argument("--dataset", help="dataset name override")
    p_run.add_argument("--detector", action="append", choices=DETECTOR_KINDS,
                       help="detector kind; repeat for several (default: all)")
    p_run.add_argument("--metric", choices=("auroc", "auprc"), default="auroc")
    p_run.add_argument("--repeats", type=int, default=5)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--standardize", action="store_true",
                       help="z-score inputs using training statistics")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--k", type=int, help="knn neighbor index")
    p_run.add_argument("--n-neighbors", type=int, help="lof neighborhood size")
    p_run.add_argument("--trees", type=int, help="iforest tree count")
    p_run.add_argument("--subsample", type=int, help="iforest subsample size")
    p_run.add_argument("--nu", type=float, help="ocsvm margin fraction")
    p_run.add_argument("--gamma", type=float, help="ocsvm RBF gamma")
    p_run.add_argument("--variance-threshold", type=float, help="pca explained-variance cut")
    p_run.add_argument("--bandwidth", type=float, help="kde bandwidth")
    p_run.add_argument("--epochs", type=int, help="ae/dsvdd training epochs")
    p_run.add_argument("--learning-rate", type=float, help="ae/dsvdd learning rate")
    p_run.set_defaults(func=_cmd_run)

    p_matrix = sub.add_parser("matrix", help="spectrum, completion, and prediction")
    m_sub = p_matrix.add_subparsers(dest="matrix_command", required=True)

    p_ccr = m_sub.add_parser("ccr", help="singular values and cumulative contribution")
    p_ccr.add_argument("matrix", help="performance-matrix CSV")
    p_ccr.set_defaults(func=_cmd_matrix_ccr)

    p_complete = m_sub.add_parser("complete", help="masked-recovery MAPE evaluation")
    p_complete.add_argument("matrix", help="performance-matrix CSV")
    p_complete.add_argument("--rate", type=float, required=True, help="missing rate in [0,1)")
    p_complete.add_argument("--rank", type=int, default=1)
    p_complete.add_argument("--seeds", type=int, default=10, help="number of mask seeds")
    p_complete.add_argument("--base-seed", type=int, default=0)
    p_complete.set_defaults(func=_cmd_matrix_complete)

    p_predict = m_sub.add_parser("predict", help="fill the missing cells of a partial matrix")
    p_predict.add_argument("matrix", help="CSV with empty cells marking unknowns")
    p_predict.add_argument("--observed", help="optional 0/1 CSV marking observed cells")
    p_predict.add_argument("--rank", type=int, default=1)
    p_predict.add_argument("--out", required=True, help="filled CSV path")
    p_predict.set_defaults(func=_cmd_matrix_predict)

    p_report = sub.add_parser("report", help="summary tables from result CSVs")
    p_report.add_argument("results", nargs="+", help="performance-matrix CSVs")
    p_report.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p_report.add_argument("--out", help="write the report here instead of stdout")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except TadbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
