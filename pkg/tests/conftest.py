"""Pytest configuration and fixtures."""

import sys
from pathlib import Path

import pytest
from typer.testing import CliRunner

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from manclust.cli import app  # noqa: E402


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def moon_files(tmp_path, runner):
    """A generated 80-point two-moon dataset and its truth labels on disk."""
    data_path = tmp_path / "moon.csv"
    labels_path = tmp_path / "truth.txt"
    result = runner.invoke(
        app,
        ["gen", "two-moon", "--n", "80", "--seed", "1", "--out", str(data_path),
         "--out-labels", str(labels_path)],
    )
    assert result.exit_code == 0, result.output
    return data_path, labels_path
