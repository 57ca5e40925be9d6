"""JSON run reports.

A report echoes every setting needed to reproduce a run on the same data,
the objective trace and, when ground truth was available, the six scores.
Keys are written in field order; floats keep full double precision.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .datasets import DataMatrix


@dataclass
class DatasetFingerprint:
    n_samples: int
    n_features: int
    sha256: str


def fingerprint(data: DataMatrix) -> DatasetFingerprint:
    """Shape plus a SHA-256 over the little-endian float64 values in row order."""
    raw = np.ascontiguousarray(data.values, dtype="<f8").tobytes()
    return DatasetFingerprint(
        n_samples=data.n_samples,
        n_features=data.n_features,
        sha256=hashlib.sha256(raw).hexdigest(),
    )


@dataclass
class RunReport:
    """Everything recorded about one solve or kmeans run."""

    command: str
    version: str
    dataset: DatasetFingerprint
    config: dict[str, Any]
    distance: dict[str, Any] | None
    rng_algorithm: str
    objective_trace: list[float]
    sweeps_run: int
    converged: bool
    cluster_sizes: list[int]
    wall_time_seconds: float

    # Solver-only details; left at defaults for the baseline
    linearization: str | None = None
    row_order: str | None = None
    geodesic_disconnect_factor: float | None = None
    n_init: int = 1
    restart: int = 0
    degenerate: bool = False
    empty_cluster_events: int = 0

    metrics: dict[str, Any] | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def emit_report(report: RunReport, path: str | Path) -> None:
    """Write the report as indented JSON.

    Raises:
        OSError: If the path is not writable
    """
    text = json.dumps(report.to_dict(), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def load_report(path: str | Path) -> RunReport:
    """Parse a report written by emit_report."""
    data = json.loads(Path(path).read_text())
    data["dataset"] = DatasetFingerprint(**data["dataset"])
    return RunReport(**data)
