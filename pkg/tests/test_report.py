"""Tests for JSON run reports."""

import json

import numpy as np
import pytest

from manclust import __version__
from manclust.datasets import DataMatrix, generate_two_moon
from manclust.experiment import DistanceConfig, run_kmeans, run_solve
from manclust.report import emit_report, fingerprint, load_report
from manclust.solver import SolverConfig


@pytest.fixture
def moon():
    return generate_two_moon(80, seed=1)


@pytest.fixture
def solve_report(moon):
    data, truth = moon
    _, report, _ = run_solve(
        data,
        truth,
        DistanceConfig(kernel="knn_geodesic", c=6),
        SolverConfig(k=2, alpha=10.0, p=1.5, seed=2),
    )
    return report


class TestFingerprint:
    def test_changes_with_data(self):
        first = fingerprint(DataMatrix([[0.0, 1.0]]))
        second = fingerprint(DataMatrix([[0.0, 1.0 + 1e-15]]))
        assert first.sha256 != second.sha256
        assert (first.n_samples, first.n_features) == (1, 2)

    def test_stable(self, moon):
        data, _ = moon
        assert fingerprint(data) == fingerprint(DataMatrix(data.values.copy()))


class TestRunReport:
    def test_solver_fields(self, solve_report):
        assert solve_report.command == "solve"
        assert solve_report.version == __version__
        assert solve_report.rng_algorithm == "PCG64"
        assert solve_report.linearization == "per_sweep"
        assert solve_report.row_order == "index"
        assert solve_report.geodesic_disconnect_factor == 4.0
        assert solve_report.distance == {
            "kernel": "knn_geodesic",
            "c": 6,
            "penalty_factor": None,
            "normalized": False,
        }
        assert solve_report.config["alpha"] == 10.0
        assert sum(solve_report.cluster_sizes) == 80
        assert set(solve_report.metrics) >= {"acc", "nmi", "purity", "precision", "fscore", "ari"}

    def test_converged_run(self, solve_report):
        assert solve_report.converged
        assert len(solve_report.objective_trace) == solve_report.sweeps_run + 1

    def test_no_metrics_without_truth(self, moon):
        data, _ = moon
        _, report = run_kmeans(data, None, 2)
        assert report.metrics is None
        assert report.config["seeding"] == "k-means++"


class TestEmitReport:
    def test_round_trip(self, tmp_path, solve_report):
        path = tmp_path / "report.json"
        emit_report(solve_report, path)
        assert load_report(path) == solve_report

    def test_key_order_is_stable(self, tmp_path, solve_report):
        path = tmp_path / "report.json"
        emit_report(solve_report, path)
        keys = list(json.loads(path.read_text()))
        assert keys[:4] == ["command", "version", "dataset", "config"]
        assert keys == list(solve_report.to_dict())

    def test_full_precision(self, tmp_path, solve_report):
        """Test that floats survive with every significant digit."""
        path = tmp_path / "report.json"
        emit_report(solve_report, path)
        loaded = load_report(path)
        assert loaded.objective_trace == solve_report.objective_trace

    def test_seed_only_changes_run_outputs(self, tmp_path, moon):
        """Test that two seeds differ only in seed-dependent fields."""
        data, truth = moon
        distance_config = DistanceConfig(kernel="knn_masked", c=6)
        reports = []
        for seed in (0, 1):
            _, report, _ = run_solve(
                data, truth, distance_config, SolverConfig(k=2, alpha=1.0, p=1.0, seed=seed)
            )
            reports.append(report.to_dict())

        allowed = {
            "config",
            "objective_trace",
            "sweeps_run",
            "cluster_sizes",
            "metrics",
            "wall_time_seconds",
            "restart",
            "converged",
        }
        changed = {key for key in reports[0] if reports[0][key] != reports[1][key]}
        assert changed <= allowed
        config_changes = {
            key for key in reports[0]["config"] if reports[0]["config"][key] != reports[1]["config"][key]
        }
        assert config_changes == {"seed"}

    def test_unwritable_path(self, tmp_path, solve_report):
        with pytest.raises(OSError):
            emit_report(solve_report, tmp_path / "missing" / "report.json")

    def test_numbers_are_json(self, tmp_path, solve_report):
        path = tmp_path / "report.json"
        emit_report(solve_report, path)
        data = json.loads(path.read_text())
        assert all(isinstance(value, float) for value in data["objective_trace"])
        assert np.isfinite(data["wall_time_seconds"])
