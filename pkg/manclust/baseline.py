"""Lloyd's K-means with k-means++ seeding, and the two K-means objective forms.

kmeans_objective is the centroid form sum_ij g_ij ||x_i - u_j||^2.
manifold_objective is the pairwise form sum_il ||x_i - x_l||^2 m_il with
m_il = [same cluster] / n_j. For every labeling without empty clusters the
pairwise form equals exactly twice the centroid form.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .datasets import DataMatrix
from .rng import make_rng
from .solver import Assignment, EmptyClusterError

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 300
SEEDING = "k-means++"


@dataclass
class Centroids:
    """K x d cluster means plus the objective after each Lloyd iteration."""

    values: np.ndarray
    n_iter: int = 0
    converged: bool = False
    objective_history: list[float] = field(default_factory=list)


def _cluster_means(data: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, data.shape[1]))
    np.add.at(sums, labels, data)
    means = np.divide(sums, counts[:, None], out=np.zeros_like(sums), where=counts[:, None] > 0)
    return means, counts


def _kmeans_plusplus(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k seed rows with probability proportional to squared distance."""
    n_samples = data.shape[0]
    chosen = [int(rng.integers(n_samples))]
    closest = cdist(data, data[chosen], metric="sqeuclidean")[:, 0]
    for _ in range(1, k):
        weights = closest.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            index = int(rng.choice(n_samples, p=weights / total))
        else:
            index = int(rng.choice(np.setdiff1d(np.arange(n_samples), chosen)))
        chosen.append(index)
        closest = np.minimum(closest, cdist(data, data[[index]], metric="sqeuclidean")[:, 0])
    return data[chosen].copy()


def kmeans(
    data: DataMatrix, k: int, seed: int = 0, max_iters: int = DEFAULT_MAX_ITERS
) -> tuple[Assignment, Centroids]:
    """Lloyd's algorithm from k-means++ seeds.

    Assignment ties go to the smallest centroid index. A cluster that empties
    is re-seeded with the sample farthest from its own centroid.

    Args:
        data: Samples
        k: Number of clusters
        seed: Seed for the k-means++ stream
        max_iters: Maximum number of Lloyd iterations

    Returns:
        Tuple of (assignment, centroids)

    Raises:
        ValueError: If k is not in [1, N] or max_iters < 1
    """
    values = data.values
    n_samples = data.n_samples
    if not 1 <= k <= n_samples:
        raise ValueError(f"k must be in [1, {n_samples}], got {k}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be at least 1, got {max_iters}")

    rng = make_rng(seed)
    centers = _kmeans_plusplus(values, k, rng)
    labels = np.full(n_samples, -1, dtype=np.int64)
    history: list[float] = []

    n_iter = 0
    converged = False
    for n_iter in range(1, max_iters + 1):
        squared = cdist(values, centers, metric="sqeuclidean")
        new_labels = np.argmin(squared, axis=1)

        counts = np.bincount(new_labels, minlength=k)
        if np.any(counts == 0):
            own = squared[np.arange(n_samples), new_labels]
            for empty in np.flatnonzero(counts == 0):
                # Only donors that leave their cluster non-empty
                candidates = np.where(counts[new_labels] > 1, own, -np.inf)
                farthest = int(np.argmax(candidates))
                counts[new_labels[farthest]] -= 1
                counts[empty] += 1
                new_labels[farthest] = empty
                own[farthest] = -np.inf
            logger.debug(f"Iteration {n_iter}: re-seeded {int(np.sum(own == -np.inf))} empty cluster(s)")

        changed = not np.array_equal(new_labels, labels)
        labels = new_labels
        centers, _ = _cluster_means(values, labels, k)
        history.append(kmeans_objective(data, Assignment(labels, k)))
        if not changed:
            converged = True
            break

    logger.debug(f"K-means stopped after {n_iter} iteration(s), objective {history[-1]:.12g}")
    return Assignment(labels, k), Centroids(
        centers, n_iter=n_iter, converged=converged, objective_history=history
    )


def kmeans_objective(data: DataMatrix, assignment: Assignment) -> float:
    """Within-cluster sum of squared distances to the cluster means."""
    means, _ = _cluster_means(data.values, assignment.labels, assignment.n_clusters)
    residual = data.values - means[assignment.labels]
    return float(np.sum(residual**2))


def manifold_objective(data: DataMatrix, assignment: Assignment) -> float:
    """Pairwise squared distances weighted by m_il = [same cluster] / n_j.

    Uses the per-cluster identity sum_il ||x_i - x_l||^2 = 2 n sum_i ||x_i||^2
    - 2 ||sum_i x_i||^2, so the N x N structure matrix is never formed.

    Raises:
        EmptyClusterError: If any cluster is empty
    """
    k = assignment.n_clusters
    counts = np.bincount(assignment.labels, minlength=k)
    if np.any(counts == 0):
        raise EmptyClusterError("manifold structure is undefined with an empty cluster")

    values = data.values
    sums = np.zeros((k, values.shape[1]))
    np.add.at(sums, assignment.labels, values)
    norms = np.bincount(assignment.labels, weights=np.sum(values**2, axis=1), minlength=k)
    pairwise = 2.0 * counts * norms - 2.0 * np.sum(sums**2, axis=1)
    return float(np.sum(pairwise / counts))
