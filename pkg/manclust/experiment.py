"""Runs shared by the CLI subcommands: data acquisition, solve, kmeans, sweep."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .baseline import DEFAULT_MAX_ITERS, SEEDING, kmeans, kmeans_objective
from .datasets import (
    DEFAULT_MOON_NOISE,
    DEFAULT_SPIRAL_NOISE,
    DEFAULT_SPIRAL_TURNS,
    DataMatrix,
    LabelVector,
    generate_two_moon,
    generate_two_spiral,
    load_csv,
)
from .distance import (
    DEFAULT_PENALTY_FACTOR,
    GEODESIC_DISCONNECT_FACTOR,
    KERNELS,
    KNN_GEODESIC,
    KNN_MASKED,
    SQUARED_EUCLIDEAN,
    DistanceMatrix,
    build_distance,
)
from .metrics import evaluate
from .report import RunReport, fingerprint
from .rng import RNG_ALGORITHM
from .solver import LINEARIZATION, ROW_ORDER, Assignment, SolverConfig, solve, validate_config

logger = logging.getLogger(__name__)

TWO_MOON = "two-moon"
TWO_SPIRAL = "two-spiral"
GENERATORS = (TWO_MOON, TWO_SPIRAL)

DEFAULT_P_GRID = tuple(round(0.1 * step, 1) for step in range(1, 21))

SWEEP_COLUMNS = [
    "alpha",
    "p",
    "c",
    "acc",
    "nmi",
    "purity",
    "precision",
    "fscore",
    "ari",
    "objective",
    "sweeps",
]


@dataclass
class DistanceConfig:
    """How D is built from the samples."""

    kernel: str = KNN_MASKED
    c: int | None = 10
    penalty_factor: float = DEFAULT_PENALTY_FACTOR
    normalize: bool = False


@dataclass
class SweepGrid:
    """Parameter grid; rows are produced with C outermost, then alpha, then p."""

    alphas: list[float]
    ps: list[float] = field(default_factory=lambda: list(DEFAULT_P_GRID))
    cs: list[int | None] = field(default_factory=lambda: [None])

    def cells(self) -> list[tuple[int | None, float, float]]:
        return [(c, alpha, p) for c in self.cs for alpha in self.alphas for p in self.ps]


def parse_grid(text: str) -> list[float]:
    """Parse a comma-separated list of numbers; scientific notation accepted.

    Raises:
        ValueError: If an item is not a finite number or the list is empty
    """
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            value = float(item)
        except ValueError as e:
            raise ValueError(f"'{item}' is not a number") from e
        if not np.isfinite(value):
            raise ValueError(f"'{item}' is not finite")
        values.append(value)
    if not values:
        raise ValueError(f"empty value list '{text}'")
    return values


def parse_int_grid(text: str) -> list[int]:
    """Comma-separated integers, e.g. '5,10,20'."""
    values = parse_grid(text)
    if any(value != int(value) for value in values):
        raise ValueError(f"expected integers, got '{text}'")
    return [int(value) for value in values]


def validate_run_inputs(distance_config: DistanceConfig, n_samples: int, k: int) -> None:
    """Check the distance settings and cluster count against the dataset size.

    Raises:
        ValueError: If any input is invalid.
    """
    if distance_config.kernel not in KERNELS:
        raise ValueError(
            f"Invalid kernel '{distance_config.kernel}'. Must be one of: {', '.join(KERNELS)}"
        )
    if distance_config.kernel in (KNN_MASKED, KNN_GEODESIC):
        if distance_config.c is None:
            raise ValueError(f"kernel '{distance_config.kernel}' requires C")
        if not 1 <= distance_config.c <= n_samples - 1:
            raise ValueError(
                f"C must be in [1, {n_samples - 1}] for {n_samples} samples, "
                f"got {distance_config.c}"
            )
    if distance_config.penalty_factor <= 0:
        raise ValueError(f"penalty_factor must be positive, got {distance_config.penalty_factor}")
    if k > n_samples:
        raise ValueError(f"k ({k}) cannot exceed the number of samples ({n_samples})")


def acquire_data(
    input_path: str | Path | None = None,
    generator: str | None = None,
    label_column: int | None = None,
    header: bool = False,
    n_samples: int = 400,
    noise_std: float | None = None,
    turns: float = DEFAULT_SPIRAL_TURNS,
    seed: int = 0,
) -> tuple[DataMatrix, LabelVector | None]:
    """Load a CSV file or generate a synthetic dataset; exactly one source.

    Raises:
        ValueError: If neither or both sources are given, or the generator is unknown
        CSVParseError: On malformed input files
    """
    if (input_path is None) == (generator is None):
        raise ValueError("exactly one of an input file or a generator must be given")
    if input_path is not None:
        return load_csv(input_path, label_column=label_column, header=header)
    if generator == TWO_MOON:
        noise = DEFAULT_MOON_NOISE if noise_std is None else noise_std
        return generate_two_moon(n_samples, noise_std=noise, seed=seed)
    if generator == TWO_SPIRAL:
        noise = DEFAULT_SPIRAL_NOISE if noise_std is None else noise_std
        return generate_two_spiral(n_samples, turns=turns, noise_std=noise, seed=seed)
    raise ValueError(f"Invalid generator '{generator}'. Must be one of: {', '.join(GENERATORS)}")


def build_from_config(data: DataMatrix, distance_config: DistanceConfig) -> DistanceMatrix:
    c = None if distance_config.kernel == SQUARED_EUCLIDEAN else distance_config.c
    return build_distance(
        data,
        kernel=distance_config.kernel,
        c=c,
        penalty_factor=distance_config.penalty_factor,
        normalize_values=distance_config.normalize,
    )


def _distance_echo(distance: DistanceMatrix) -> dict:
    return {
        "kernel": distance.kernel,
        "c": distance.knn_c,
        "penalty_factor": distance.penalty_factor,
        "normalized": distance.normalized,
    }


def run_solve(
    data: DataMatrix,
    truth: LabelVector | None,
    distance_config: DistanceConfig,
    solver_config: SolverConfig,
    distance: DistanceMatrix | None = None,
) -> tuple[Assignment, RunReport, DistanceMatrix]:
    """Build D (unless given), solve, score against truth when available.

    Returns:
        Tuple of (assignment, report, distance matrix used)
    """
    validate_config(solver_config)
    validate_run_inputs(distance_config, data.n_samples, solver_config.k)

    start = time.perf_counter()
    if distance is None:
        distance = build_from_config(data, distance_config)
    assignment, trace = solve(distance, solver_config)
    elapsed = time.perf_counter() - start

    metrics = evaluate(assignment.labels, truth).to_dict() if truth is not None else None
    report = RunReport(
        command="solve",
        version=__version__,
        dataset=fingerprint(data),
        config=asdict(solver_config),
        distance=_distance_echo(distance),
        rng_algorithm=RNG_ALGORITHM,
        objective_trace=trace.objective_per_sweep,
        sweeps_run=trace.sweeps_run,
        converged=trace.converged,
        cluster_sizes=assignment.counts.tolist(),
        wall_time_seconds=elapsed,
        linearization=LINEARIZATION,
        row_order=ROW_ORDER,
        geodesic_disconnect_factor=(
            GEODESIC_DISCONNECT_FACTOR if distance.kernel == KNN_GEODESIC else None
        ),
        n_init=trace.n_init,
        restart=trace.restart,
        degenerate=trace.degenerate,
        empty_cluster_events=trace.empty_cluster_events,
        metrics=metrics,
    )
    return assignment, report, distance


def run_kmeans(
    data: DataMatrix,
    truth: LabelVector | None,
    k: int,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> tuple[Assignment, RunReport]:
    """Run the baseline and wrap it in a report."""
    start = time.perf_counter()
    assignment, centroids = kmeans(data, k, seed=seed, max_iters=max_iters)
    elapsed = time.perf_counter() - start

    metrics = evaluate(assignment.labels, truth).to_dict() if truth is not None else None
    report = RunReport(
        command="kmeans",
        version=__version__,
        dataset=fingerprint(data),
        config={"k": k, "seed": seed, "max_iters": max_iters, "seeding": SEEDING},
        distance=None,
        rng_algorithm=RNG_ALGORITHM,
        objective_trace=centroids.objective_history,
        sweeps_run=centroids.n_iter,
        converged=centroids.converged,
        cluster_sizes=assignment.counts.tolist(),
        wall_time_seconds=elapsed,
        metrics=metrics,
        extra={"kmeans_objective": kmeans_objective(data, assignment)},
    )
    return assignment, report


def run_sweep(
    data: DataMatrix,
    truth: LabelVector,
    distance_config: DistanceConfig,
    grid: SweepGrid,
    base_config: SolverConfig,
    workers: int = 1,
) -> pd.DataFrame:
    """Solve every grid cell and score it.

    One distance matrix is built per C value and shared read-only by the
    cells that use it. Rows come back in grid order whatever the completion
    order.

    Raises:
        ValueError: If truth is missing, the grid is empty or workers < 1
    """
    if truth is None:
        raise ValueError("sweep needs ground-truth labels to score each cell")
    if len(truth) != data.n_samples:
        raise ValueError(f"truth has {len(truth)} labels for {data.n_samples} samples")
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    cells = grid.cells()
    if not cells:
        raise ValueError("sweep grid is empty")

    distances: dict[int | None, DistanceMatrix] = {}
    for c in grid.cs:
        cell_config = replace(distance_config, c=c)
        validate_run_inputs(cell_config, data.n_samples, base_config.k)
        distances[c] = build_from_config(data, cell_config)
    for _, alpha, p in cells:
        validate_config(replace(base_config, alpha=alpha, p=p))

    def run_cell(cell: tuple[int | None, float, float]) -> dict:
        c, alpha, p = cell
        assignment, trace = solve(distances[c], replace(base_config, alpha=alpha, p=p))
        scores = evaluate(assignment.labels, truth)
        logger.info(f"Cell C={c} alpha={alpha:g} p={p:g}: ACC {scores.acc:.4f}")
        return {
            "alpha": alpha,
            "p": p,
            "c": c,
            "acc": scores.acc,
            "nmi": scores.nmi,
            "purity": scores.purity,
            "precision": scores.precision,
            "fscore": scores.fscore,
            "ari": scores.ari,
            "objective": trace.final_objective,
            "sweeps": trace.sweeps_run,
        }

    if workers == 1:
        rows = [run_cell(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map yields in submission order
            rows = list(pool.map(run_cell, cells))

    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    frame["c"] = frame["c"].astype("Int64")
    return frame
