"""
manclust - Manifold Clustering with Schatten p-Norm Maximization
================================================================

Clusters samples by minimizing within-cluster distances over a manifold-aware
distance matrix while a Schatten p-norm bonus on the label matrix pulls the
cluster sizes toward balance.

Main Components:
- solve: Coordinate descent on tr(G^T D G) - alpha * ||G||_Sp^p
- build_distance: Squared Euclidean, KNN-masked and KNN-geodesic kernels
- kmeans: Lloyd's K-means baseline
- evaluate: ACC, NMI, purity, pairwise precision/F-score and ARI

Example:
    >>> from manclust import SolverConfig, build_distance, evaluate, generate_two_moon, solve
    >>> X, truth = generate_two_moon(400, seed=1)
    >>> D = build_distance(X, kernel="knn_masked", c=10)
    >>> labels, trace = solve(D, SolverConfig(k=2, alpha=100.0, p=2.0, init="spectral"))
    >>> print(f"ACC: {evaluate(labels.labels, truth).acc:.3f}")
"""

__version__ = "0.1.0"

# Lazy imports keep `import manclust` cheap and avoid import cycles
__all__ = [
    "SolverConfig",
    "solve",
    "objective",
    "build_distance",
    "kmeans",
    "evaluate",
    "generate_two_moon",
    "generate_two_spiral",
    "load_csv",
]


def __getattr__(name):
    """Lazy import of public names."""
    if name in ("SolverConfig", "solve", "objective"):
        from .solver import SolverConfig, objective, solve  # noqa: F401

        return locals()[name]
    elif name == "build_distance":
        from .distance import build_distance

        return build_distance
    elif name == "kmeans":
        from .baseline import kmeans

        return kmeans
    elif name == "evaluate":
        from .metrics import evaluate

        return evaluate
    elif name in ("generate_two_moon", "generate_two_spiral", "load_csv"):
        from .datasets import generate_two_moon, generate_two_spiral, load_csv  # noqa: F401

        return locals()[name]
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
