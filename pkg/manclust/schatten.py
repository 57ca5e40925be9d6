"""Schatten p-norm value and gradient.

The p-th power of the Schatten p-norm is the sum of the p-th powers of the
singular values. Its gradient is p * U * diag(sigma^(p-1)) * V^T, with
singular values at or below a relative floor mapped to zero (pseudo-inverse
convention), which keeps the gradient finite for p < 1 and rank-deficient
inputs.
"""

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

DEFAULT_SIGMA_FLOOR = 1e-10


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD G = U diag(sigma) V^T with sigma nonincreasing."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def _check_p(p: float) -> None:
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")


def thin_svd(matrix: np.ndarray) -> SvdFactors:
    """Thin SVD of an N x K matrix; never forms N x N factors."""
    u, sigma, vt = np.linalg.svd(np.asarray(matrix, dtype=np.float64), full_matrices=False)
    return SvdFactors(u=u, sigma=sigma, v=vt.T)


def _nonzero_mask(sigma: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Singular values distinguishable from zero at machine precision."""
    if sigma.size == 0 or sigma[0] == 0:
        return np.zeros(sigma.shape, dtype=bool)
    tolerance = sigma[0] * max(shape) * np.finfo(np.float64).eps
    return sigma > tolerance


def schatten_p_value(matrix: np.ndarray, p: float) -> float:
    """Sum of sigma_i^p over the singular values, with 0^p = 0.

    Args:
        matrix: Finite N x K matrix
        p: Positive exponent

    Raises:
        ValueError: If p is not positive
    """
    _check_p(p)
    matrix = np.asarray(matrix, dtype=np.float64)
    sigma = np.linalg.svd(matrix, compute_uv=False)
    keep = _nonzero_mask(sigma, matrix.shape)
    return float(np.sum(sigma[keep] ** p))


def schatten_p_gradient(
    matrix: np.ndarray, p: float, sigma_floor: float = DEFAULT_SIGMA_FLOOR
) -> np.ndarray:
    """Gradient of schatten_p_value with respect to the matrix.

    Args:
        matrix: N x K matrix
        p: Positive exponent
        sigma_floor: Singular values at or below sigma_floor * sigma_max
            contribute nothing

    Returns:
        N x K gradient matrix F
    """
    _check_p(p)
    factors = thin_svd(matrix)
    sigma = factors.sigma
    if sigma.size == 0 or sigma[0] == 0:
        return np.zeros(np.shape(matrix))

    keep = sigma > sigma_floor * sigma[0]
    scale = np.zeros_like(sigma)
    scale[keep] = sigma[keep] ** (p - 1)
    return p * (factors.u * scale) @ factors.v.T


def linearized_bonus(gradient: np.ndarray, matrix: np.ndarray) -> float:
    """tr(F^T G), the linear term of the Schatten surrogate.

    Raises:
        ValueError: If the shapes differ
    """
    gradient = np.asarray(gradient)
    matrix = np.asarray(matrix)
    if gradient.shape != matrix.shape:
        raise ValueError(f"shape mismatch: F is {gradient.shape}, G is {matrix.shape}")
    return float(np.sum(gradient * matrix))


def schatten_value_from_counts(counts: np.ndarray, p: float) -> float:
    """Schatten value of a one-hot indicator with the given column counts.

    A one-hot matrix has orthogonal columns, so its singular values are the
    square roots of the cluster sizes and the value is sum(n_j^(p/2)).
    """
    _check_p(p)
    counts = np.asarray(counts, dtype=np.float64)
    return float(np.sum(counts[counts > 0] ** (p / 2)))


def balanced_counts(n: int, k: int) -> np.ndarray:
    """Most balanced split of n samples into k clusters, larger parts first."""
    base, extra = divmod(n, k)
    return np.array([base + 1] * extra + [base] * (k - extra), dtype=np.int64)


def compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All ordered ways of writing n as k non-negative integers."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, k - 1):
            yield (first, *rest)
