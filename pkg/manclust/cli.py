"""
Command-line interface for manifold clustering.

Subcommands:
- gen:    write a synthetic two-moon or two-spiral dataset plus truth labels
- solve:  Schatten-regularized clustering, labels + JSON report
- kmeans: K-means baseline, labels + JSON report
- sweep:  alpha x p x C grid, one CSV row of scores per cell

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

import logging
from enum import Enum
from pathlib import Path

import typer

from .baseline import DEFAULT_MAX_ITERS
from .datasets import DEFAULT_SPIRAL_TURNS, LabelVector, load_labels, save_csv, save_labels
from .distance import (
    DEFAULT_PENALTY_FACTOR,
    KNN_GEODESIC,
    KNN_MASKED,
    SQUARED_EUCLIDEAN,
    save_distance,
)
from .experiment import (
    DEFAULT_P_GRID,
    TWO_MOON,
    TWO_SPIRAL,
    DistanceConfig,
    SweepGrid,
    acquire_data,
    parse_grid,
    parse_int_grid,
    run_kmeans,
    run_solve,
    run_sweep,
)
from .report import RunReport, emit_report
from .solver import KMEANS_PP, RANDOM_BALANCED, SPECTRAL, SolverConfig

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="manclust",
    help="Manifold clustering with Schatten p-norm maximization",
    add_completion=False,
)


class Dataset(str, Enum):
    two_moon = TWO_MOON
    two_spiral = TWO_SPIRAL


class Kernel(str, Enum):
    euclidean = "euclidean"
    knn_masked = "knn-masked"
    knn_geodesic = "knn-geodesic"


class Init(str, Enum):
    random_balanced = "random-balanced"
    kmeans_pp = "kmeans-pp"
    spectral = "spectral"


class LogLevel(str, Enum):
    debug = "DEBUG"
    info = "INFO"
    warning = "WARNING"
    error = "ERROR"


KERNEL_NAMES = {
    Kernel.euclidean: SQUARED_EUCLIDEAN,
    Kernel.knn_masked: KNN_MASKED,
    Kernel.knn_geodesic: KNN_GEODESIC,
}
INIT_NAMES = {
    Init.random_balanced: RANDOM_BALANCED,
    Init.kmeans_pp: KMEANS_PP,
    Init.spectral: SPECTRAL,
}


@app.callback()
def main(
    log_level: LogLevel = typer.Option(LogLevel.warning, "--log-level", help="Logging threshold"),
):
    """Manifold clustering with Schatten p-norm maximization."""
    logging.basicConfig(
        level=log_level.value, format="%(asctime)s %(name)s %(levelname)s: %(message)s"
    )


def _fail(error: Exception) -> typer.Exit:
    logger.error(f"{type(error).__name__}: {error}")
    typer.echo(f"Error: {error}", err=True)
    return typer.Exit(1)


def _grid(text: str, flag: str) -> list[float]:
    try:
        return parse_grid(text)
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint=flag) from e


def _int_grid(text: str, flag: str) -> list[int]:
    try:
        return parse_int_grid(text)
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint=flag) from e


def _single(text: str, flag: str) -> float:
    values = _grid(text, flag)
    if len(values) != 1:
        raise typer.BadParameter("takes a single value; use 'sweep' for grids", param_hint=flag)
    return values[0]


def _check_source(input_path: Path | None, dataset: Dataset | None) -> None:
    if (input_path is None) == (dataset is None):
        raise typer.BadParameter("give exactly one of --input or --gen", param_hint="--input/--gen")


def _load(
    input_path: Path | None,
    dataset: Dataset | None,
    label_column: int | None,
    header: bool,
    truth_path: Path | None,
    n_samples: int,
    noise: float | None,
    turns: float,
    seed: int,
):
    data, truth = acquire_data(
        input_path=input_path,
        generator=dataset.value if dataset is not None else None,
        label_column=label_column,
        header=header,
        n_samples=n_samples,
        noise_std=noise,
        turns=turns,
        seed=seed,
    )
    if truth_path is not None:
        truth = load_labels(truth_path)
    if truth is not None and len(truth) != data.n_samples:
        raise ValueError(f"truth has {len(truth)} labels for {data.n_samples} samples")
    return data, truth


def _summarize(report: RunReport) -> None:
    typer.echo(
        f"{report.command}: objective {report.objective_trace[-1]:.12g} after "
        f"{report.sweeps_run} iteration(s), converged={report.converged}, "
        f"cluster sizes {report.cluster_sizes}"
    )
    if report.metrics is not None:
        scores = ", ".join(
            f"{name} {report.metrics[name]:.4f}"
            for name in ("acc", "nmi", "purity", "precision", "fscore", "ari")
        )
        typer.echo(f"scores: {scores}")


@app.command()
def gen(
    dataset: Dataset = typer.Argument(..., help="Synthetic dataset to generate"),
    out: Path = typer.Option(..., "--out", "-o", help="Feature CSV to write"),
    out_labels: Path | None = typer.Option(None, "--out-labels", help="Truth label file"),
    n_samples: int = typer.Option(400, "--n", min=4, help="Number of samples (even)"),
    noise: float | None = typer.Option(None, "--noise", help="Gaussian noise std"),
    turns: float = typer.Option(DEFAULT_SPIRAL_TURNS, "--turns", help="Spiral turns per arm"),
    seed: int = typer.Option(0, "--seed", min=0, help="Noise seed"),
):
    """Write a synthetic dataset and its ground-truth labels."""
    try:
        data, truth = acquire_data(
            generator=dataset.value, n_samples=n_samples, noise_std=noise, turns=turns, seed=seed
        )
        save_csv(out, data)
        if out_labels is not None:
            save_labels(out_labels, truth)
    except (ValueError, OSError) as e:
        raise _fail(e) from e
    typer.echo(f"Wrote {data.n_samples} samples to {out}")


@app.command()
def solve(
    input_path: Path | None = typer.Option(None, "--input", "-i", help="Feature CSV"),
    dataset: Dataset | None = typer.Option(None, "--gen", help="Generate data instead"),
    label_column: int | None = typer.Option(None, "--label-column", help="Truth column index"),
    header: bool = typer.Option(False, "--header", help="Skip the first CSV line"),
    truth_path: Path | None = typer.Option(None, "--truth", help="Truth label file"),
    n_samples: int = typer.Option(400, "--n", min=4, help="Samples for --gen"),
    noise: float | None = typer.Option(None, "--noise", help="Noise std for --gen"),
    turns: float = typer.Option(DEFAULT_SPIRAL_TURNS, "--turns", help="Spiral turns for --gen"),
    k: int = typer.Option(2, "--k", min=2, help="Number of clusters"),
    kernel: Kernel = typer.Option(Kernel.knn_masked, "--kernel", help="Distance kernel"),
    c: int = typer.Option(10, "--c", min=1, help="Nearest neighbors for KNN kernels"),
    penalty_factor: float = typer.Option(
        DEFAULT_PENALTY_FACTOR, "--penalty-factor", help="Non-neighbor penalty multiple"
    ),
    normalize_distance: bool = typer.Option(
        False, "--normalize-distance", help="Scale D so its maximum is 1"
    ),
    alpha: str = typer.Option(..., "--alpha", help="Schatten weight"),
    p: str = typer.Option("2", "--p", help="Schatten exponent"),
    seed: int = typer.Option(
        0, "--seed", min=0, help="Seed for data generation and initialization"
    ),
    max_sweeps: int = typer.Option(100, "--max-sweeps", min=1, help="Sweep limit"),
    tol: float = typer.Option(0.0, "--tol", min=0.0, help="Objective-change stopping tolerance"),
    init: Init = typer.Option(Init.random_balanced, "--init", help="Initialization"),
    n_init: int = typer.Option(1, "--n-init", min=1, help="Independent restarts"),
    repair_empty: bool = typer.Option(False, "--repair-empty", help="Refill empty clusters"),
    out_labels: Path | None = typer.Option(None, "--out-labels", help="Label file to write"),
    out_report: Path | None = typer.Option(None, "--out-report", help="JSON report to write"),
    save_distance_path: Path | None = typer.Option(
        None, "--save-distance", help="Dump D as CSV"
    ),
):
    """Cluster with the Schatten-regularized manifold objective."""
    _check_source(input_path, dataset)
    alpha_value = _single(alpha, "--alpha")
    p_value = _single(p, "--p")

    try:
        data, truth = _load(
            input_path, dataset, label_column, header, truth_path, n_samples, noise, turns, seed
        )
        distance_config = DistanceConfig(
            kernel=KERNEL_NAMES[kernel],
            c=c,
            penalty_factor=penalty_factor,
            normalize=normalize_distance,
        )
        solver_config = SolverConfig(
            k=k,
            alpha=alpha_value,
            p=p_value,
            max_sweeps=max_sweeps,
            tol=tol,
            seed=seed,
            init=INIT_NAMES[init],
            n_init=n_init,
            repair_empty=repair_empty,
        )
        assignment, report, distance = run_solve(data, truth, distance_config, solver_config)

        if out_labels is not None:
            save_labels(out_labels, LabelVector(assignment.labels, assignment.n_clusters))
        if out_report is not None:
            emit_report(report, out_report)
        if save_distance_path is not None:
            save_distance(save_distance_path, distance)
    except (ValueError, OSError) as e:
        raise _fail(e) from e
    _summarize(report)


@app.command()
def kmeans(
    input_path: Path | None = typer.Option(None, "--input", "-i", help="Feature CSV"),
    dataset: Dataset | None = typer.Option(None, "--gen", help="Generate data instead"),
    label_column: int | None = typer.Option(None, "--label-column", help="Truth column index"),
    header: bool = typer.Option(False, "--header", help="Skip the first CSV line"),
    truth_path: Path | None = typer.Option(None, "--truth", help="Truth label file"),
    n_samples: int = typer.Option(400, "--n", min=4, help="Samples for --gen"),
    noise: float | None = typer.Option(None, "--noise", help="Noise std for --gen"),
    turns: float = typer.Option(DEFAULT_SPIRAL_TURNS, "--turns", help="Spiral turns for --gen"),
    k: int = typer.Option(2, "--k", min=1, help="Number of clusters"),
    seed: int = typer.Option(0, "--seed", min=0, help="Seed for data generation and seeding"),
    max_iters: int = typer.Option(
        DEFAULT_MAX_ITERS, "--max-iters", min=1, help="Lloyd iteration limit"
    ),
    out_labels: Path | None = typer.Option(None, "--out-labels", help="Label file to write"),
    out_report: Path | None = typer.Option(None, "--out-report", help="JSON report to write"),
):
    """Cluster with the K-means baseline."""
    _check_source(input_path, dataset)
    try:
        data, truth = _load(
            input_path, dataset, label_column, header, truth_path, n_samples, noise, turns, seed
        )
        assignment, report = run_kmeans(data, truth, k, seed=seed, max_iters=max_iters)
        if out_labels is not None:
            save_labels(out_labels, LabelVector(assignment.labels, assignment.n_clusters))
        if out_report is not None:
            emit_report(report, out_report)
    except (ValueError, OSError) as e:
        raise _fail(e) from e
    _summarize(report)


@app.command()
def sweep(
    input_path: Path | None = typer.Option(None, "--input", "-i", help="Feature CSV"),
    dataset: Dataset | None = typer.Option(None, "--gen", help="Generate data instead"),
    label_column: int | None = typer.Option(None, "--label-column", help="Truth column index"),
    header: bool = typer.Option(False, "--header", help="Skip the first CSV line"),
    truth_path: Path | None = typer.Option(None, "--truth", help="Truth label file"),
    n_samples: int = typer.Option(400, "--n", min=4, help="Samples for --gen"),
    noise: float | None = typer.Option(None, "--noise", help="Noise std for --gen"),
    turns: float = typer.Option(DEFAULT_SPIRAL_TURNS, "--turns", help="Spiral turns for --gen"),
    k: int = typer.Option(2, "--k", min=2, help="Number of clusters"),
    kernel: Kernel = typer.Option(Kernel.knn_masked, "--kernel", help="Distance kernel"),
    c: str = typer.Option("10", "--c", help="Comma-separated neighbor counts"),
    penalty_factor: float = typer.Option(
        DEFAULT_PENALTY_FACTOR, "--penalty-factor", help="Non-neighbor penalty multiple"
    ),
    normalize_distance: bool = typer.Option(
        False, "--normalize-distance", help="Scale D so its maximum is 1"
    ),
    alpha: str = typer.Option(..., "--alpha", help="Comma-separated alpha values"),
    p: str = typer.Option(
        ",".join(f"{value:g}" for value in DEFAULT_P_GRID), "--p", help="Comma-separated p values"
    ),
    seed: int = typer.Option(
        0, "--seed", min=0, help="Seed for data generation and initialization"
    ),
    max_sweeps: int = typer.Option(100, "--max-sweeps", min=1, help="Sweep limit"),
    tol: float = typer.Option(0.0, "--tol", min=0.0, help="Objective-change stopping tolerance"),
    init: Init = typer.Option(Init.random_balanced, "--init", help="Initialization"),
    n_init: int = typer.Option(1, "--n-init", min=1, help="Independent restarts per cell"),
    repair_empty: bool = typer.Option(False, "--repair-empty", help="Refill empty clusters"),
    workers: int = typer.Option(1, "--workers", min=1, help="Grid cells solved concurrently"),
    out: Path | None = typer.Option(None, "--out", "-o", help="CSV to write (default stdout)"),
):
    """Solve every alpha x p x C cell and write one row of scores per cell."""
    _check_source(input_path, dataset)
    alphas = _grid(alpha, "--alpha")
    ps = _grid(p, "--p")
    cs: list[int | None] = [None] if kernel == Kernel.euclidean else list(_int_grid(c, "--c"))

    try:
        data, truth = _load(
            input_path, dataset, label_column, header, truth_path, n_samples, noise, turns, seed
        )
        distance_config = DistanceConfig(
            kernel=KERNEL_NAMES[kernel],
            penalty_factor=penalty_factor,
            normalize=normalize_distance,
        )
        base_config = SolverConfig(
            k=k,
            alpha=alphas[0],
            p=ps[0],
            max_sweeps=max_sweeps,
            tol=tol,
            seed=seed,
            init=INIT_NAMES[init],
            n_init=n_init,
            repair_empty=repair_empty,
        )
        frame = run_sweep(
            data, truth, distance_config, SweepGrid(alphas, ps, cs), base_config, workers=workers
        )
        if out is not None:
            frame.to_csv(out, index=False)
    except (ValueError, OSError) as e:
        raise _fail(e) from e

    if out is None:
        typer.echo(frame.to_csv(index=False), nl=False)
    else:
        typer.echo(f"Wrote {len(frame)} row(s) to {out}")


if __name__ == "__main__":
    app()
