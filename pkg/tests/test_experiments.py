"""End-to-end runs: data acquisition, grids, sweeps and the synthetic benchmarks."""

import numpy as np
import pandas as pd
import pytest

from manclust.datasets import DataMatrix, generate_two_moon, generate_two_spiral, save_csv
from manclust.distance import KNN_GEODESIC, KNN_MASKED, SQUARED_EUCLIDEAN
from manclust.experiment import (
    DEFAULT_P_GRID,
    SWEEP_COLUMNS,
    DistanceConfig,
    SweepGrid,
    acquire_data,
    build_from_config,
    parse_grid,
    parse_int_grid,
    run_kmeans,
    run_solve,
    run_sweep,
)
from manclust.report import fingerprint
from manclust.rng import make_rng
from manclust.solver import KMEANS_PP, RANDOM_BALANCED, SPECTRAL, SolverConfig, solve


@pytest.fixture(scope="module")
def moons():
    return generate_two_moon(400, seed=1)


@pytest.fixture(scope="module")
def spirals():
    return generate_two_spiral(400, noise_std=0.02, seed=1)


class TestParseGrid:
    def test_scientific_notation(self):
        assert parse_grid("1e2, 1e3,1e4") == [100.0, 1000.0, 10000.0]

    def test_single_value(self):
        assert parse_grid("0.5") == [0.5]

    def test_trailing_comma(self):
        assert parse_grid("1,2,") == [1.0, 2.0]

    @pytest.mark.parametrize("text", ["", ",", "a,1", "1,nan", "inf"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_grid(text)

    def test_int_grid(self):
        assert parse_int_grid("5,10,20") == [5, 10, 20]
        with pytest.raises(ValueError, match="integers"):
            parse_int_grid("5,7.5")

    def test_default_p_grid(self):
        assert len(DEFAULT_P_GRID) == 20
        assert DEFAULT_P_GRID[0] == 0.1
        assert DEFAULT_P_GRID[-1] == 2.0


class TestSweepGrid:
    def test_cell_order(self):
        grid = SweepGrid(alphas=[1.0, 2.0], ps=[0.5, 1.0], cs=[5, 10])
        assert grid.cells() == [
            (5, 1.0, 0.5),
            (5, 1.0, 1.0),
            (5, 2.0, 0.5),
            (5, 2.0, 1.0),
            (10, 1.0, 0.5),
            (10, 1.0, 1.0),
            (10, 2.0, 0.5),
            (10, 2.0, 1.0),
        ]

    def test_defaults(self):
        grid = SweepGrid(alphas=[1.0])
        assert len(grid.cells()) == 20
        assert grid.cs == [None]


class TestAcquireData:
    def test_generators(self):
        data, truth = acquire_data(generator="two-spiral", n_samples=40, seed=3)
        assert data.values.shape == (40, 2)
        assert np.bincount(truth.labels).tolist() == [20, 20]

    def test_generator_noise_default_matches_direct_call(self):
        data, _ = acquire_data(generator="two-moon", n_samples=40, seed=2)
        direct, _ = generate_two_moon(40, seed=2)
        np.testing.assert_array_equal(data.values, direct.values)

    def test_csv_with_labels(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("0.0,1.0,7\n1.0,0.0,3\n2.0,2.0,7\n")
        data, truth = acquire_data(input_path=path, label_column=2)
        assert data.values.shape == (3, 2)
        assert truth.labels.tolist() == [1, 0, 1]

    def test_csv_round_trip(self, tmp_path, moons):
        data, _ = moons
        path = tmp_path / "moons.csv"
        save_csv(path, data)
        loaded, truth = acquire_data(input_path=path)
        np.testing.assert_array_equal(loaded.values, data.values)
        assert fingerprint(loaded) == fingerprint(data)
        assert truth is None

    def test_csv_round_trip_is_bit_exact_across_exponents(self, tmp_path):
        rng = make_rng(23)
        values = rng.standard_normal((200, 3)) * 10.0 ** rng.integers(-300, 300, size=(200, 3))
        data = DataMatrix(values)
        path = tmp_path / "wide.csv"
        save_csv(path, data)
        loaded, _ = acquire_data(input_path=path)
        assert loaded.values.tobytes() == values.tobytes()
        assert fingerprint(loaded).sha256 == fingerprint(data).sha256

    def test_needs_exactly_one_source(self, tmp_path):
        with pytest.raises(ValueError, match="exactly one"):
            acquire_data()
        with pytest.raises(ValueError, match="exactly one"):
            acquire_data(input_path=tmp_path / "x.csv", generator="two-moon")

    def test_unknown_generator(self):
        with pytest.raises(ValueError, match="Invalid generator"):
            acquire_data(generator="three-rings")


class TestBuildFromConfig:
    def test_euclidean_ignores_c(self, moons):
        data, _ = moons
        distance = build_from_config(data, DistanceConfig(kernel=SQUARED_EUCLIDEAN, c=10))
        assert distance.kernel == SQUARED_EUCLIDEAN
        assert distance.knn_c is None

    def test_normalized(self, moons):
        data, _ = moons
        distance = build_from_config(data, DistanceConfig(c=5, normalize=True))
        assert distance.values.max() == pytest.approx(1.0)
        assert distance.normalized


class TestRunSweep:
    def test_rows_and_columns(self, moons):
        data, truth = moons
        frame = run_sweep(
            data,
            truth,
            DistanceConfig(kernel=KNN_MASKED),
            SweepGrid(alphas=[1e2, 1e3, 1e4], ps=[1.5, 2.0], cs=[10]),
            SolverConfig(k=2, alpha=1.0, p=2.0, max_sweeps=20),
        )
        assert list(frame.columns) == SWEEP_COLUMNS
        assert len(frame) == 6
        assert frame[["alpha", "p"]].values.tolist() == [
            [1e2, 1.5],
            [1e2, 2.0],
            [1e3, 1.5],
            [1e3, 2.0],
            [1e4, 1.5],
            [1e4, 2.0],
        ]
        assert frame["acc"].between(0.5, 1.0).all()

    def test_workers_do_not_change_results(self, moons):
        data, truth = moons
        args = (
            data,
            truth,
            DistanceConfig(kernel=KNN_MASKED),
            SweepGrid(alphas=[0.0, 10.0], ps=[1.0, 2.0], cs=[5, 10]),
            SolverConfig(k=2, alpha=1.0, p=2.0, max_sweeps=20, seed=4),
        )
        serial = run_sweep(*args, workers=1)
        threaded = run_sweep(*args, workers=4)
        pd.testing.assert_frame_equal(serial, threaded)

    def test_needs_truth(self, moons):
        data, _ = moons
        with pytest.raises(ValueError, match="ground-truth"):
            run_sweep(
                data,
                None,
                DistanceConfig(),
                SweepGrid(alphas=[1.0]),
                SolverConfig(k=2, alpha=1.0, p=2.0),
            )

    def test_invalid_cell_fails_before_solving(self, moons):
        data, truth = moons
        with pytest.raises(ValueError, match="C must be in"):
            run_sweep(
                data,
                truth,
                DistanceConfig(),
                SweepGrid(alphas=[1.0], ps=[2.0], cs=[10, 400]),
                SolverConfig(k=2, alpha=1.0, p=2.0),
            )

    def test_workers_must_be_positive(self, moons):
        data, truth = moons
        with pytest.raises(ValueError, match="workers"):
            run_sweep(
                data,
                truth,
                DistanceConfig(),
                SweepGrid(alphas=[1.0]),
                SolverConfig(k=2, alpha=1.0, p=2.0),
                workers=0,
            )


class TestBenchmarks:
    def test_two_moon_manifold_beats_kmeans(self, moons):
        """Test the masked KNN kernel recovers both arcs where K-means cannot.

        The spectral start follows the connectivity of the neighbor graph, and
        the sweeps keep that labeling: with p = 2 the Schatten term only adds a
        bonus for staying put, so every cell of the grid holds the arcs.
        """
        data, truth = moons
        frame = run_sweep(
            data,
            truth,
            DistanceConfig(kernel=KNN_MASKED),
            SweepGrid(alphas=[1e1, 1e2, 1e3, 1e4], ps=[2.0], cs=[5, 10, 20]),
            SolverConfig(k=2, alpha=1e1, p=2.0, init=SPECTRAL, seed=0),
        )
        assert len(frame) == 12
        assert frame["acc"].max() >= 0.99

        _, kmeans_report = run_kmeans(data, truth, 2, seed=0)
        assert kmeans_report.metrics["acc"] <= 0.92

    def test_two_moon_sweeps_descend_from_kmeans_pp(self, moons):
        """Test that sweeps from a non-spectral start lower the objective every pass."""
        data, _ = moons
        distance = build_from_config(data, DistanceConfig(kernel=KNN_MASKED, c=10))
        config = SolverConfig(k=2, alpha=1e2, p=2.0, init=KMEANS_PP, seed=0, max_sweeps=500)
        _, trace = solve(distance, config)

        objectives = np.asarray(trace.objective_per_sweep)
        slack = 1e-9 * np.abs(objectives).max()
        assert trace.converged
        assert len(objectives) == trace.sweeps_run + 1
        assert np.all(np.diff(objectives) <= slack)
        assert trace.final_objective <= objectives[0] + slack

    def test_two_spiral_geodesic(self, spirals):
        """Test the geodesic kernel separates the arms from k-means++ starts."""
        data, truth = spirals
        frame = run_sweep(
            data,
            truth,
            DistanceConfig(kernel=KNN_GEODESIC),
            SweepGrid(alphas=[0.0, 1e1], ps=[2.0], cs=[3, 5, 8]),
            SolverConfig(k=2, alpha=0.0, p=2.0, init=KMEANS_PP, n_init=10, seed=0),
        )
        assert len(frame) == 6
        assert frame["acc"].max() >= 0.99

    def test_two_spiral_geodesic_report(self, spirals):
        data, truth = spirals
        _, report, distance = run_solve(
            data,
            truth,
            DistanceConfig(kernel=KNN_GEODESIC, c=8),
            SolverConfig(k=2, alpha=0.0, p=2.0, init=KMEANS_PP, n_init=10, seed=0),
        )
        assert distance.kernel == KNN_GEODESIC
        assert report.geodesic_disconnect_factor == 4.0
        assert report.config["p"] == 2.0
        assert sum(report.cluster_sizes) == 400

    def test_two_spiral_euclidean_fails(self, spirals):
        data, truth = spirals
        _, report, _ = run_solve(
            data,
            truth,
            DistanceConfig(kernel=SQUARED_EUCLIDEAN, c=None),
            SolverConfig(k=2, alpha=0.0, p=2.0, init=RANDOM_BALANCED, seed=0),
        )
        assert report.metrics["acc"] <= 0.75

    def test_kmeans_report(self, moons):
        data, truth = moons
        assignment, report = run_kmeans(data, truth, 2, seed=0)
        assert report.command == "kmeans"
        assert report.converged
        assert report.extra["kmeans_objective"] == pytest.approx(report.objective_trace[-1])
        assert sum(report.cluster_sizes) == 400
        assert len(assignment.labels) == 400
