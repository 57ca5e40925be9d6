"""Synthetic datasets and CSV ingestion/export.

Feature files are headerless comma-separated numbers, one sample per row.
Label files hold one base-10 integer per line.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .rng import make_rng

logger = logging.getLogger(__name__)

# Radius at which each spiral arm starts; keeps the two arms apart at the center
SPIRAL_INNER_RADIUS = 0.2

DEFAULT_MOON_NOISE = 0.05
DEFAULT_SPIRAL_NOISE = 0.02
DEFAULT_SPIRAL_TURNS = 1.5


class CSVParseError(ValueError):
    """Malformed CSV input, located by 1-based row and column."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.row = row
        self.column = column


@dataclass(frozen=True)
class DataMatrix:
    """N samples by d features, dense and finite."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"DataMatrix must be 2-D, got {values.ndim} dimension(s)")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"DataMatrix needs at least one sample and feature, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("DataMatrix entries must be finite (found NaN or Inf)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Cluster index per sample, all in [0, n_clusters)."""

    labels: np.ndarray
    n_clusters: int | None = None

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if labels.size and labels.min() < 0:
            raise ValueError(f"labels must be non-negative, got minimum {labels.min()}")
        inferred = int(labels.max()) + 1 if labels.size else 0
        n_clusters = inferred if self.n_clusters is None else self.n_clusters
        if n_clusters < inferred:
            raise ValueError(f"label {inferred - 1} out of range for n_clusters={n_clusters}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_clusters", n_clusters)

    def __len__(self) -> int:
        return self.labels.size


def _check_sample_count(n_samples: int, noise_std: float) -> None:
    if n_samples < 4:
        raise ValueError(f"n_samples must be at least 4, got {n_samples}")
    if n_samples % 2:
        raise ValueError(f"n_samples must be even, got {n_samples}")
    if noise_std < 0:
        raise ValueError(f"noise_std cannot be negative, got {noise_std}")


def _add_noise(values: np.ndarray, noise_std: float, seed: int) -> np.ndarray:
    if noise_std > 0:
        rng = make_rng(seed)
        values = values + rng.normal(0.0, noise_std, size=values.shape)
    return values


def generate_two_moon(
    n_samples: int = 400, noise_std: float = DEFAULT_MOON_NOISE, seed: int = 0
) -> tuple[DataMatrix, LabelVector]:
    """Generate two interleaving half-circles.

    The upper arc is the unit half-circle around the origin; the lower arc is
    the reflected unit half-circle around (1, 0.5). Samples are ordered along
    each arc, upper arc first.

    Args:
        n_samples: Total number of points (even, at least 4)
        noise_std: Standard deviation of isotropic Gaussian noise
        seed: Seed for the noise stream

    Returns:
        Tuple of (points, ground-truth labels 0/1 by arc)

    Raises:
        ValueError: If n_samples is odd or below 4, or noise_std is negative
    """
    _check_sample_count(n_samples, noise_std)
    half = n_samples // 2
    t = np.linspace(0.0, np.pi, half)

    upper = np.column_stack([np.cos(t), np.sin(t)])
    lower = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    values = _add_noise(np.vstack([upper, lower]), noise_std, seed)

    labels = np.repeat([0, 1], half)
    return DataMatrix(values), LabelVector(labels, n_clusters=2)


def generate_two_spiral(
    n_samples: int = 400,
    turns: float = DEFAULT_SPIRAL_TURNS,
    noise_std: float = DEFAULT_SPIRAL_NOISE,
    seed: int = 0,
) -> tuple[DataMatrix, LabelVector]:
    """Generate two interleaved Archimedean spirals.

    Along each arm the angle runs from 0 to 2*pi*turns while the radius grows
    linearly from SPIRAL_INNER_RADIUS to 1. The second arm is the first one
    rotated by pi.

    Args:
        n_samples: Total number of points (even, at least 4)
        turns: Number of full rotations per arm
        noise_std: Standard deviation of isotropic Gaussian noise
        seed: Seed for the noise stream

    Returns:
        Tuple of (points, ground-truth labels 0/1 by arm)

    Raises:
        ValueError: On invalid sample count, noise or turns
    """
    _check_sample_count(n_samples, noise_std)
    if turns <= 0:
        raise ValueError(f"turns must be positive, got {turns}")
    half = n_samples // 2
    t = np.linspace(0.0, 1.0, half)
    angle = 2.0 * np.pi * turns * t
    radius = SPIRAL_INNER_RADIUS + (1.0 - SPIRAL_INNER_RADIUS) * t

    arm = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    values = _add_noise(np.vstack([arm, -arm]), noise_std, seed)

    labels = np.repeat([0, 1], half)
    return DataMatrix(values), LabelVector(labels, n_clusters=2)


def _read_cells(path: str | Path, skip_header: bool) -> pd.DataFrame:
    """Read a CSV file as strings, translating pandas failures into located errors."""
    try:
        return pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skiprows=1 if skip_header else 0,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError as e:
        raise CSVParseError("file is empty", row=1) from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        row = int(match.group(1)) if match else None
        raise CSVParseError(f"ragged row ({e})".replace("\n", " ").strip(), row=row) from e


def _to_numeric(cells: pd.DataFrame, row_offset: int) -> np.ndarray:
    """Convert string cells to floats, reporting the first bad cell."""
    missing = cells.isna()
    if missing.to_numpy().any():
        row, col = np.argwhere(missing.to_numpy())[0]
        raise CSVParseError(
            f"ragged row: expected {cells.shape[1]} fields", row=row + row_offset, column=col + 1
        )

    stripped = cells.apply(lambda column: column.str.strip())
    # to_numeric only flags bad cells; values go through exact float conversion
    coerced = stripped.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(coerced)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise CSVParseError(
            f"non-numeric or non-finite cell {stripped.iat[row, col]!r}",
            row=row + row_offset,
            column=col + 1,
        )
    return stripped.astype(np.float64).to_numpy()


def load_csv(
    path: str | Path, label_column: int | None = None, header: bool = False
) -> tuple[DataMatrix, LabelVector | None]:
    """Load a feature matrix, optionally splitting off an integer label column.

    Args:
        path: CSV file, one sample per row
        label_column: 0-based index of the column holding integer labels
        header: Skip the first line

    Returns:
        Tuple of (features, labels re-indexed to 0..K-1 or None)

    Raises:
        CSVParseError: On empty files, ragged rows or non-numeric cells
        OSError: If the file cannot be read
    """
    cells = _read_cells(path, skip_header=header)
    row_offset = 2 if header else 1
    numeric = _to_numeric(cells, row_offset)

    labels = None
    if label_column is not None:
        n_columns = numeric.shape[1]
        if not 0 <= label_column < n_columns:
            raise ValueError(f"label_column must be in [0, {n_columns}), got {label_column}")
        raw = numeric[:, label_column]
        not_integer = np.flatnonzero(raw != np.round(raw))
        if not_integer.size:
            row = int(not_integer[0])
            raise CSVParseError(
                f"label {raw[row]!r} is not an integer", row=row + row_offset, column=label_column + 1
            )
        _, dense = np.unique(raw.astype(np.int64), return_inverse=True)
        labels = LabelVector(dense)
        numeric = np.delete(numeric, label_column, axis=1)
        if numeric.shape[1] == 0:
            raise ValueError("no feature columns left after removing the label column")

    logger.debug(f"Loaded {numeric.shape[0]}x{numeric.shape[1]} features from {path}")
    return DataMatrix(numeric), labels


def save_csv(path: str | Path, data: DataMatrix) -> None:
    """Write features as headerless CSV with full double precision."""
    np.savetxt(path, data.values, delimiter=",", fmt="%.17g")


def save_labels(path: str | Path, labels: LabelVector | np.ndarray) -> None:
    """Write one integer label per line.

    Raises:
        OSError: If the path is not writable
    """
    values = labels.labels if isinstance(labels, LabelVector) else np.asarray(labels)
    Path(path).write_text("".join(f"{int(v)}\n" for v in values))


def load_labels(path: str | Path) -> LabelVector:
    """Read a label file written by save_labels."""
    cells = _read_cells(path, skip_header=False)
    if cells.shape[1] != 1:
        raise CSVParseError(f"expected one label per line, got {cells.shape[1]} fields", row=1)
    numeric = _to_numeric(cells, row_offset=1)[:, 0]
    not_integer = np.flatnonzero(numeric != np.round(numeric))
    if not_integer.size:
        raise CSVParseError("label is not an integer", row=int(not_integer[0]) + 1, column=1)
    return LabelVector(numeric.astype(np.int64))
