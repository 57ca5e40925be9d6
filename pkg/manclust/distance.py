"""Pairwise distance matrices for the clustering objective.

Three kernels are provided:
- squared_euclidean: ||x_i - x_l||^2
- knn_masked: squared Euclidean on symmetrized C-nearest-neighbor pairs,
  every other pair replaced by a flat penalty
- knn_geodesic: squared shortest-path length over the symmetrized C-nearest-
  neighbor graph with Euclidean edge weights

All kernels return symmetric, zero-diagonal, finite, non-negative matrices.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial.distance import pdist, squareform

from .datasets import DataMatrix

logger = logging.getLogger(__name__)

SQUARED_EUCLIDEAN = "squared_euclidean"
KNN_MASKED = "knn_masked"
KNN_GEODESIC = "knn_geodesic"
KERNELS = (SQUARED_EUCLIDEAN, KNN_MASKED, KNN_GEODESIC)

DEFAULT_PENALTY_FACTOR = 1.0
# Disconnected geodesic pairs get this multiple of the largest finite entry
GEODESIC_DISCONNECT_FACTOR = 4.0


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric N x N matrix of squared dissimilarities."""

    values: np.ndarray
    kernel: str = SQUARED_EUCLIDEAN
    knn_c: int | None = None
    penalty_factor: float | None = None
    normalized: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {values.shape}")
        if self.kernel not in KERNELS:
            raise ValueError(f"Invalid kernel '{self.kernel}'. Must be one of: {', '.join(KERNELS)}")
        if not np.all(np.isfinite(values)):
            raise ValueError("distance matrix entries must be finite")
        if np.any(values < 0):
            raise ValueError("distance matrix entries must be non-negative")
        if not np.array_equal(values, values.T):
            raise ValueError("distance matrix must be exactly symmetric")
        if np.any(np.diag(values) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


def _check_neighbors(n_samples: int, c: int) -> None:
    if not 1 <= c <= n_samples - 1:
        raise ValueError(f"C must be in [1, {n_samples - 1}] for {n_samples} samples, got {c}")


def _pairwise_squared(values: np.ndarray) -> np.ndarray:
    # pdist evaluates each unordered pair once, so the square form is exactly symmetric
    if values.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(values, metric="sqeuclidean"))


def knn_mask(squared: np.ndarray, c: int) -> np.ndarray:
    """Symmetrized C-nearest-neighbor mask of a squared distance matrix.

    Pair (i, l) is kept if l is among the C nearest neighbors of i or i is
    among the C nearest of l. Ties are broken by smaller sample index and a
    sample is never its own neighbor.

    Returns:
        Boolean N x N matrix, False on the diagonal
    """
    ranked = squared.copy()
    np.fill_diagonal(ranked, np.inf)
    # Stable sort keeps equal distances in index order
    order = np.argsort(ranked, axis=1, kind="stable")[:, :c]

    mask = np.zeros(squared.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=1)
    mask |= mask.T
    np.fill_diagonal(mask, False)
    return mask


def squared_euclidean(data: DataMatrix) -> DistanceMatrix:
    """Squared Euclidean distances between all samples."""
    return DistanceMatrix(_pairwise_squared(data.values), kernel=SQUARED_EUCLIDEAN)


def knn_masked(
    data: DataMatrix, c: int, penalty_factor: float = DEFAULT_PENALTY_FACTOR
) -> DistanceMatrix:
    """Squared Euclidean distances kept only between C-nearest neighbors.

    Args:
        data: Samples
        c: Neighbors per sample before symmetrization
        penalty_factor: Multiple of the largest kept distance assigned to
            every non-neighbor pair

    Raises:
        ValueError: If C is outside [1, N-1] or penalty_factor is not positive
    """
    _check_neighbors(data.n_samples, c)
    if penalty_factor <= 0:
        raise ValueError(f"penalty_factor must be positive, got {penalty_factor}")

    squared = _pairwise_squared(data.values)
    mask = knn_mask(squared, c)
    penalty = penalty_factor * squared[mask].max()

    values = np.where(mask, squared, penalty)
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(values, kernel=KNN_MASKED, knn_c=c, penalty_factor=penalty_factor)


def knn_geodesic(data: DataMatrix, c: int) -> DistanceMatrix:
    """Squared shortest-path distances over the symmetrized C-NN graph.

    Edges carry the (non-squared) Euclidean length between neighbors.
    Pairs in different connected components receive
    GEODESIC_DISCONNECT_FACTOR times the largest finite squared geodesic.

    Raises:
        ValueError: If C is outside [1, N-1]
    """
    _check_neighbors(data.n_samples, c)

    squared = _pairwise_squared(data.values)
    mask = knn_mask(squared, c)
    rows, cols = np.nonzero(mask)
    # Coincident samples still need an edge; a zero weight would read as "no edge"
    weights = np.maximum(np.sqrt(squared[rows, cols]), np.finfo(np.float64).tiny)
    graph = coo_matrix((weights, (rows, cols)), shape=squared.shape).tocsr()

    n_components, _ = connected_components(graph, directed=False)
    lengths = shortest_path(graph, method="D", directed=False)
    lengths = np.minimum(lengths, lengths.T)
    values = lengths**2
    np.fill_diagonal(values, 0.0)

    finite = np.isfinite(values)
    if not finite.all():
        penalty = GEODESIC_DISCONNECT_FACTOR * values[finite].max()
        values = np.where(finite, values, penalty)
        logger.info(
            f"KNN graph with C={c} has {n_components} components; "
            f"disconnected pairs set to {penalty:.6g}"
        )
    return DistanceMatrix(values, kernel=KNN_GEODESIC, knn_c=c)


def normalize(distance: DistanceMatrix) -> DistanceMatrix:
    """Rescale so the largest entry is 1.

    Raises:
        ValueError: If every entry is zero
    """
    largest = distance.values.max()
    if largest <= 0:
        raise ValueError("cannot normalize an all-zero distance matrix (degenerate dataset)")
    return DistanceMatrix(
        distance.values / largest,
        kernel=distance.kernel,
        knn_c=distance.knn_c,
        penalty_factor=distance.penalty_factor,
        normalized=True,
    )


def build_distance(
    data: DataMatrix,
    kernel: str = KNN_MASKED,
    c: int | None = None,
    penalty_factor: float = DEFAULT_PENALTY_FACTOR,
    normalize_values: bool = False,
) -> DistanceMatrix:
    """Dispatch to a kernel by name and optionally normalize."""
    if kernel == SQUARED_EUCLIDEAN:
        distance = squared_euclidean(data)
    elif kernel in (KNN_MASKED, KNN_GEODESIC):
        if c is None:
            raise ValueError(f"kernel '{kernel}' requires C")
        if kernel == KNN_MASKED:
            distance = knn_masked(data, c, penalty_factor)
        else:
            distance = knn_geodesic(data, c)
    else:
        raise ValueError(f"Invalid kernel '{kernel}'. Must be one of: {', '.join(KERNELS)}")

    if normalize_values:
        distance = normalize(distance)
    return distance


def save_distance(path: str | Path, distance: DistanceMatrix) -> None:
    """Dump D as headerless CSV for debugging."""
    np.savetxt(path, distance.values, delimiter=",", fmt="%.17g")
