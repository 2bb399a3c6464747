"""
Test configuration and fixtures for pytest
"""

import os
import sys

import pytest
from typer.testing import CliRunner

# Add the project root to Python path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cyclomoment.lattice.loglattice import build_lattice  # noqa: E402
from cyclomoment.numtheory.characters import all_characters, character_group  # noqa: E402


@pytest.fixture
def lattice_13():
    """Log-unit lattice for the prime 13 (dimension 6)"""
    return build_lattice(13)


@pytest.fixture
def quadratic_mod_5():
    """The real even character mod 5, whose L(1, chi) is 2 log(golden ratio) / sqrt(5)"""
    group = character_group(5)
    return next(chi for chi in all_characters(group) if chi.exponents == (2,))


@pytest.fixture
def runner():
    """Typer CLI runner"""
    return CliRunner()


@pytest.fixture
def empty_golden_dir(tmp_path):
    """A golden directory with no files in it"""
    directory = tmp_path / "golden"
    directory.mkdir()
    return directory
