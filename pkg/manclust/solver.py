"""Manifold clustering with Schatten p-norm maximization.

Minimizes

    J(G) = tr(G^T D G) - alpha * ||G||_Sp^p

over one-hot label matrices G. Each sweep linearizes the Schatten term at the
current G (gradient F, computed once per sweep) and then visits the rows in
index order, moving each sample to the cluster minimizing

    score(j) = 2 * sum_l D[l, i] [label_l == j] - alpha * F[i, j]

and committing immediately. For p >= 1 the linearization lies above
-alpha * ||G||_Sp^p, so J never increases from one sweep to the next.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.csgraph import laplacian

from .distance import DistanceMatrix
from .rng import spawn_rngs
from .schatten import DEFAULT_SIGMA_FLOOR, schatten_p_gradient, schatten_value_from_counts

logger = logging.getLogger(__name__)

RANDOM_BALANCED = "random_balanced"
KMEANS_PP = "kmeans_pp"
SPECTRAL = "spectral"
INIT_METHODS = (RANDOM_BALANCED, KMEANS_PP, SPECTRAL)

# Recorded in reports so results are attributable to the update schedule
LINEARIZATION = "per_sweep"
ROW_ORDER = "index"


class EmptyClusterError(ValueError):
    """An operation that divides by cluster size met an empty cluster."""


@dataclass
class Assignment:
    """Label matrix G stored as one cluster index per sample plus column counts."""

    labels: np.ndarray
    n_clusters: int
    counts: np.ndarray = field(init=False)

    def __post_init__(self):
        self.labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be positive, got {self.n_clusters}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_clusters):
            raise ValueError(f"labels must lie in [0, {self.n_clusters})")
        self.counts = np.bincount(self.labels, minlength=self.n_clusters).astype(np.int64)

    @property
    def n_samples(self) -> int:
        return self.labels.size

    def indicator(self) -> np.ndarray:
        """Dense one-hot N x K matrix."""
        matrix = np.zeros((self.n_samples, self.n_clusters))
        matrix[np.arange(self.n_samples), self.labels] = 1.0
        return matrix

    def move(self, i: int, cluster: int) -> None:
        """Reassign sample i and keep counts in step."""
        self.counts[self.labels[i]] -= 1
        self.counts[cluster] += 1
        self.labels[i] = cluster

    def copy(self) -> "Assignment":
        return Assignment(self.labels.copy(), self.n_clusters)


@dataclass
class SolverConfig:
    """Configuration for the Schatten-regularized clustering solver."""

    # Required parameters (no defaults)
    k: int
    alpha: float
    p: float

    # Iteration control
    max_sweeps: int = 100
    tol: float = 0.0  # stop when |J_t - J_(t-1)| <= tol; 0 means label fixpoint only

    # Initialization
    seed: int = 0
    init: str = RANDOM_BALANCED
    n_init: int = 1
    spectral_neighbors: int = 10

    # Numerics and empty clusters
    sigma_floor: float = DEFAULT_SIGMA_FLOOR
    repair_empty: bool = False


@dataclass
class SolveTrace:
    """What happened during a solve."""

    objective_per_sweep: list[float] = field(default_factory=list)
    sweeps_run: int = 0
    converged: bool = False
    empty_cluster_events: int = 0
    degenerate: bool = False
    restart: int = 0
    n_init: int = 1

    @property
    def final_objective(self) -> float:
        return self.objective_per_sweep[-1]


def validate_config(config: SolverConfig) -> None:
    """Validate solver parameters.

    Raises:
        ValueError: If any parameter is invalid.
    """
    if config.k < 2:
        raise ValueError(f"k must be at least 2, got {config.k}")
    if config.alpha < 0:
        raise ValueError(f"alpha cannot be negative, got {config.alpha}")
    if config.p <= 0:
        raise ValueError(f"p must be positive, got {config.p}")
    if config.max_sweeps < 1:
        raise ValueError(f"max_sweeps must be at least 1, got {config.max_sweeps}")
    if config.tol < 0:
        raise ValueError(f"tol cannot be negative, got {config.tol}")
    if config.seed < 0:
        raise ValueError(f"seed must be non-negative, got {config.seed}")
    if config.init not in INIT_METHODS:
        raise ValueError(
            f"Invalid init '{config.init}'. Must be one of: {', '.join(INIT_METHODS)}"
        )
    if config.n_init < 1:
        raise ValueError(f"n_init must be at least 1, got {config.n_init}")
    if config.spectral_neighbors < 1:
        raise ValueError(f"spectral_neighbors must be positive, got {config.spectral_neighbors}")
    if config.sigma_floor < 0:
        raise ValueError(f"sigma_floor cannot be negative, got {config.sigma_floor}")


def _cluster_sums(values: np.ndarray, assignment: Assignment) -> np.ndarray:
    """H[l, j] = sum of D[l, m] over samples m in cluster j."""
    return values @ assignment.indicator()


def objective(distance: DistanceMatrix, assignment: Assignment, alpha: float, p: float) -> float:
    """tr(G^T D G) - alpha * ||G||_Sp^p for a one-hot G.

    The trace is the sum of D over same-cluster pairs; the Schatten term uses
    sigma_j(G) = sqrt(n_j).
    """
    sums = _cluster_sums(distance.values, assignment)
    trace = float(np.sum(sums[np.arange(assignment.n_samples), assignment.labels]))
    return trace - alpha * schatten_value_from_counts(assignment.counts, p)


def row_update(
    distance: DistanceMatrix,
    assignment: Assignment,
    gradient: np.ndarray,
    alpha: float,
    i: int,
    cluster_sums: np.ndarray | None = None,
) -> int:
    """Best cluster for sample i under the linearized objective.

    The current label is kept whenever it attains the minimum score; among
    the other minimizers the smallest cluster index wins.

    Args:
        distance: Distance matrix D
        assignment: Current labels (not modified)
        gradient: Schatten gradient F at the current G
        alpha: Schatten weight
        i: Sample index
        cluster_sums: Optional precomputed D @ G, kept current by the caller

    Returns:
        Cluster index for sample i
    """
    if cluster_sums is None:
        row = np.bincount(
            assignment.labels, weights=distance.values[:, i], minlength=assignment.n_clusters
        )
    else:
        row = cluster_sums[i]
    scores = 2.0 * row - alpha * gradient[i]

    current = int(assignment.labels[i])
    best = int(np.argmin(scores))
    if scores[current] <= scores[best]:
        return current
    return best


def model2_diagnostic(distance: DistanceMatrix, assignment: Assignment) -> float:
    """Size-normalized within-cluster distance, tr(G^T D G P^-1).

    Reported for analysis only; the solver never optimizes it.

    Raises:
        EmptyClusterError: If any cluster is empty
    """
    if np.any(assignment.counts == 0):
        raise EmptyClusterError("tr(G^T D G P^-1) is undefined with an empty cluster")
    sums = _cluster_sums(distance.values, assignment)
    within = np.bincount(
        assignment.labels,
        weights=sums[np.arange(assignment.n_samples), assignment.labels],
        minlength=assignment.n_clusters,
    )
    return float(np.sum(within / assignment.counts))


def _init_random_balanced(n_samples: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Deal a random permutation round-robin into k clusters."""
    labels = np.empty(n_samples, dtype=np.int64)
    labels[rng.permutation(n_samples)] = np.arange(n_samples) % k
    return labels


def _init_kmeans_pp(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding on D itself, then nearest-seed assignment."""
    n_samples = values.shape[0]
    seeds = [int(rng.integers(n_samples))]
    closest = values[seeds[0]].copy()
    for _ in range(1, k):
        weights = closest.copy()
        weights[seeds] = 0.0
        total = weights.sum()
        if total > 0:
            candidate = int(rng.choice(n_samples, p=weights / total))
        else:
            # Remaining samples coincide with chosen seeds
            remaining = np.setdiff1d(np.arange(n_samples), seeds)
            candidate = int(rng.choice(remaining))
        seeds.append(candidate)
        closest = np.minimum(closest, values[candidate])

    labels = np.argmin(values[:, seeds], axis=1).astype(np.int64)
    labels[seeds] = np.arange(k)
    return labels


def _init_spectral(
    values: np.ndarray, k: int, n_neighbors: int, rng: np.random.Generator
) -> np.ndarray:
    """Normalized spectral embedding of a KNN graph built from D, then k-means."""
    # Imported here: baseline depends on this module's Assignment
    from .baseline import kmeans
    from .datasets import DataMatrix

    n_samples = values.shape[0]
    n_neighbors = min(n_neighbors, n_samples - 1)

    # Penalized and disconnected pairs sit at the maximum and never become edges
    candidates = values.copy()
    candidates[candidates >= values.max()] = np.inf
    np.fill_diagonal(candidates, np.inf)
    order = np.argsort(candidates, axis=1, kind="stable")[:, :n_neighbors]
    allowed = np.take_along_axis(np.isfinite(candidates), order, axis=1)

    affinity = np.zeros_like(values)
    rows = np.repeat(np.arange(n_samples), n_neighbors)
    affinity[rows[allowed.ravel()], order.ravel()[allowed.ravel()]] = 1.0
    affinity = np.maximum(affinity, affinity.T)

    lap = laplacian(affinity, normed=True)
    _, vectors = eigh(lap, subset_by_index=[0, k - 1])
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    embedding = vectors / np.where(norms > 0, norms, 1.0)

    assignment, _ = kmeans(DataMatrix(embedding), k, seed=int(rng.integers(2**31)))
    return assignment.labels.copy()


def initial_assignment(
    distance: DistanceMatrix, config: SolverConfig, rng: np.random.Generator
) -> Assignment:
    """Starting labels according to config.init."""
    values = distance.values
    if config.init == RANDOM_BALANCED:
        labels = _init_random_balanced(distance.n_samples, config.k, rng)
    elif config.init == KMEANS_PP:
        labels = _init_kmeans_pp(values, config.k, rng)
    elif config.init == SPECTRAL:
        labels = _init_spectral(values, config.k, config.spectral_neighbors, rng)
    else:
        raise ValueError(f"Invalid init '{config.init}'. Must be one of: {', '.join(INIT_METHODS)}")
    return Assignment(labels, config.k)


def _repair_empty(
    values: np.ndarray, assignment: Assignment, cluster_sums: np.ndarray
) -> int:
    """Move one sample into each empty cluster; returns the number of moves.

    The donor is the sample of the currently largest cluster with the largest
    within-cluster distance sum.
    """
    moves = 0
    for empty in np.flatnonzero(assignment.counts == 0):
        donor_cluster = int(np.argmax(assignment.counts))
        if assignment.counts[donor_cluster] < 2:
            break
        members = np.flatnonzero(assignment.labels == donor_cluster)
        donor = int(members[np.argmax(cluster_sums[members, donor_cluster])])

        cluster_sums[:, donor_cluster] -= values[:, donor]
        cluster_sums[:, empty] += values[:, donor]
        assignment.move(donor, int(empty))
        moves += 1
    return moves


def _solve_once(
    distance: DistanceMatrix, config: SolverConfig, assignment: Assignment
) -> tuple[Assignment, SolveTrace]:
    """Run the sweep loop from a given starting assignment."""
    values = distance.values
    n_samples = distance.n_samples
    trace = SolveTrace()

    cluster_sums = _cluster_sums(values, assignment)
    trace.objective_per_sweep.append(objective(distance, assignment, config.alpha, config.p))

    for sweep in range(config.max_sweeps):
        gradient = schatten_p_gradient(assignment.indicator(), config.p, config.sigma_floor)

        changed = 0
        for i in range(n_samples):
            best = row_update(distance, assignment, gradient, config.alpha, i, cluster_sums)
            current = int(assignment.labels[i])
            if best != current:
                cluster_sums[:, current] -= values[i]
                cluster_sums[:, best] += values[i]
                assignment.move(i, best)
                changed += 1

        if config.repair_empty and np.any(assignment.counts == 0):
            moved = _repair_empty(values, assignment, cluster_sums)
            if moved:
                trace.empty_cluster_events += moved
                changed += moved
                logger.warning(f"Sweep {sweep + 1}: moved {moved} sample(s) into empty clusters")

        # Recomputed from scratch so accumulated update error never reaches the trace
        cluster_sums = _cluster_sums(values, assignment)
        current_objective = objective(distance, assignment, config.alpha, config.p)
        previous_objective = trace.objective_per_sweep[-1]
        trace.objective_per_sweep.append(current_objective)
        trace.sweeps_run = sweep + 1
        logger.debug(
            f"Sweep {sweep + 1}: {changed} label(s) changed, objective {current_objective:.12g}"
        )

        if changed == 0:
            trace.converged = True
            break
        if config.tol > 0 and abs(current_objective - previous_objective) <= config.tol:
            break

    return assignment, trace


def solve(
    distance: DistanceMatrix,
    config: SolverConfig,
    initial_labels: np.ndarray | None = None,
) -> tuple[Assignment, SolveTrace]:
    """Cluster with the Schatten-regularized manifold objective.

    Args:
        distance: Distance matrix D
        config: Solver configuration
        initial_labels: Optional warm start; overrides config.init

    Returns:
        Tuple of (final assignment, trace of the kept restart)

    Raises:
        ValueError: If the configuration is invalid or k exceeds N
    """
    validate_config(config)
    n_samples = distance.n_samples
    if config.k > n_samples:
        raise ValueError(f"k ({config.k}) cannot exceed the number of samples ({n_samples})")
    if config.p > 2:
        logger.warning(
            f"p = {config.p} > 2: the Schatten term now favors unbalanced partitions "
            "for one-hot labels"
        )

    degenerate = bool(distance.values.max() == 0)
    if degenerate:
        logger.warning("All pairwise distances are zero; any assignment is optimal")

    best: tuple[Assignment, SolveTrace] | None = None
    for restart, rng in enumerate(spawn_rngs(config.seed, config.n_init)):
        if initial_labels is not None:
            start = Assignment(initial_labels, config.k)
            if start.n_samples != n_samples:
                raise ValueError(
                    f"initial_labels has {start.n_samples} entries, expected {n_samples}"
                )
        else:
            start = initial_assignment(distance, config, rng)

        assignment, trace = _solve_once(distance, config, start)
        trace.restart = restart
        logger.debug(
            f"Restart {restart}: objective {trace.final_objective:.12g} "
            f"after {trace.sweeps_run} sweep(s)"
        )
        if best is None or trace.final_objective < best[1].final_objective:
            best = (assignment, trace)
        if initial_labels is not None:
            break

    assignment, trace = best
    trace.n_init = config.n_init
    trace.degenerate = degenerate
    logger.info(
        f"Solve finished: objective {trace.final_objective:.12g}, "
        f"{trace.sweeps_run} sweep(s), converged={trace.converged}, "
        f"cluster sizes {assignment.counts.tolist()}"
    )
    return assignment, trace
