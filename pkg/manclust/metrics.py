"""External clustering scores computed from predicted and true label vectors.

All six scores (ACC, NMI, purity, pairwise precision, pairwise F-score and
ARI) are functions of the contingency table only, so every one of them is
invariant under relabeling of either partition.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix, pair_confusion_matrix

from .datasets import LabelVector

NMI_NORMALIZATION = "geometric"

Labels = LabelVector | np.ndarray


@dataclass(frozen=True)
class ContingencyTable:
    """counts[j, c] = number of samples predicted in j with true class c."""

    counts: np.ndarray

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())

    @property
    def pred_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def true_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class MetricReport:
    """The six scores plus the NMI convention they were computed with."""

    acc: float
    nmi: float
    purity: float
    precision: float
    fscore: float
    ari: float
    nmi_normalization: str = NMI_NORMALIZATION

    def to_dict(self) -> dict[str, float | str]:
        return {
            "acc": self.acc,
            "nmi": self.nmi,
            "purity": self.purity,
            "precision": self.precision,
            "fscore": self.fscore,
            "ari": self.ari,
            "nmi_normalization": self.nmi_normalization,
        }


def _as_array(labels: Labels) -> np.ndarray:
    if isinstance(labels, LabelVector):
        return labels.labels
    return np.asarray(labels, dtype=np.int64).reshape(-1)


def _check_lengths(pred: np.ndarray, truth: np.ndarray) -> None:
    if pred.size != truth.size:
        raise ValueError(f"label length mismatch: pred has {pred.size}, truth has {truth.size}")
    if pred.size == 0:
        raise ValueError("cannot score empty label vectors")


def contingency_table(pred: Labels, truth: Labels) -> ContingencyTable:
    """Cross-tabulate two labelings.

    Ids are compacted first, so ids that never occur get no row or column.

    Raises:
        ValueError: If the lengths differ or the input is empty
    """
    pred = _as_array(pred)
    truth = _as_array(truth)
    _check_lengths(pred, truth)
    # sklearn puts true classes on the rows
    counts = contingency_matrix(truth, pred).T
    return ContingencyTable(np.ascontiguousarray(counts, dtype=np.int64))


def _accuracy(table: ContingencyTable) -> float:
    counts = table.counts
    size = max(counts.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: counts.shape[0], : counts.shape[1]] = counts
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum() / table.n_samples)


def _purity(table: ContingencyTable) -> float:
    return float(table.counts.max(axis=1).sum() / table.n_samples)


def _pair_counts(pred: np.ndarray, truth: np.ndarray) -> tuple[int, int, int, int]:
    if pred.size < 2:
        raise ValueError(f"pair-based scores need at least 2 samples, got {pred.size}")
    # ordered pairs, each unordered pair counted twice
    confusion = pair_confusion_matrix(truth, pred) // 2
    a = int(confusion[1, 1])
    b = int(confusion[0, 1])
    c = int(confusion[1, 0])
    d = int(confusion[0, 0])
    return a, b, c, d


def _precision_fscore(pred: np.ndarray, truth: np.ndarray) -> tuple[float, float]:
    a, b, c, _ = _pair_counts(pred, truth)
    precision = a / (a + b) if a + b else 0.0
    recall = a / (a + c) if a + c else 0.0
    if precision + recall == 0:
        return precision, 0.0
    return precision, 2 * precision * recall / (precision + recall)


def _nmi(pred: np.ndarray, truth: np.ndarray) -> float:
    return float(normalized_mutual_info_score(truth, pred, average_method=NMI_NORMALIZATION))


def _ari(pred: np.ndarray, truth: np.ndarray) -> float:
    return float(adjusted_rand_score(truth, pred))


def _checked(pred: Labels, truth: Labels) -> tuple[np.ndarray, np.ndarray]:
    pred = _as_array(pred)
    truth = _as_array(truth)
    _check_lengths(pred, truth)
    return pred, truth


def accuracy(pred: Labels, truth: Labels) -> float:
    """Best one-to-one matching accuracy (Hungarian assignment on the table)."""
    return _accuracy(contingency_table(pred, truth))


def nmi(pred: Labels, truth: Labels) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Natural logs. Two single-cluster partitions score 1.0; one single-cluster
    partition against a non-trivial one scores 0.0.
    """
    return _nmi(*_checked(pred, truth))


def purity(pred: Labels, truth: Labels) -> float:
    return _purity(contingency_table(pred, truth))


def pair_counts(pred: Labels, truth: Labels) -> tuple[int, int, int, int]:
    """Counts of sample pairs by agreement.

    Returns:
        Tuple (a, b, c, d): together in both; together in pred only;
        together in truth only; apart in both. Sums to N(N-1)/2.

    Raises:
        ValueError: On length mismatch or fewer than 2 samples
    """
    return _pair_counts(*_checked(pred, truth))


def precision_fscore(pred: Labels, truth: Labels) -> tuple[float, float]:
    """Pairwise precision a/(a+b) and F-score against recall a/(a+c)."""
    return _precision_fscore(*_checked(pred, truth))


def ari(pred: Labels, truth: Labels) -> float:
    """Adjusted Rand index; identical trivial partitions score 1.0."""
    return _ari(*_checked(pred, truth))


def evaluate(pred: Labels, truth: Labels) -> MetricReport:
    """All six scores for one pair of labelings."""
    pred, truth = _checked(pred, truth)
    table = contingency_table(pred, truth)
    precision, fscore = _precision_fscore(pred, truth)
    return MetricReport(
        acc=_accuracy(table),
        nmi=_nmi(pred, truth),
        purity=_purity(table),
        precision=precision,
        fscore=fscore,
        ari=_ari(pred, truth),
    )
