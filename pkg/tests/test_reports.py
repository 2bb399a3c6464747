"""
Test suite for run configuration, report rows and the experiment dispatcher
"""

import json

import pytest
from pydantic import ValidationError

from cyclomoment import experiments
from cyclomoment.config import PACKAGED_GOLDEN_DIR, RunConfig, default_golden_dir, default_threads
from cyclomoment.lattice.loglattice import export_text
from cyclomoment.numtheory.characters import Parity
from cyclomoment.reports import InvariantRow, OutputFormat, format_float, render


class TestRunConfig:
    """Test cases for modulus specification and defaults"""

    def test_single_modulus(self):
        """Test --q gives one modulus"""
        assert RunConfig(subcommand="moments", q=101).moduli() == [101]

    def test_prime_power_pair(self):
        """Test --p/--k expand to p^k"""
        assert RunConfig(subcommand="dual-norms", p=3, k=4).moduli() == [81]

    def test_prime_range(self):
        """Test --primes-from/--primes-to expand to every prime in range"""
        assert RunConfig(subcommand="moments", primes_from=10, primes_to=20).moduli() == [11, 13, 17, 19]

    def test_exactly_one_spec(self):
        """Test zero or several modulus specifications are refused"""
        with pytest.raises(ValidationError):
            RunConfig(subcommand="moments")
        with pytest.raises(ValidationError):
            RunConfig(subcommand="moments", q=101, primes_from=10, primes_to=20)

    def test_pairs_must_be_complete(self):
        """Test half a pair is refused"""
        with pytest.raises(ValidationError):
            RunConfig(subcommand="sgp", p=3)
        with pytest.raises(ValidationError):
            RunConfig(subcommand="moments", primes_from=10)

    def test_empty_prime_range(self):
        """Test a range without primes is reported"""
        with pytest.raises(ValueError):
            RunConfig(subcommand="moments", primes_from=24, primes_to=28).moduli()

    def test_environment_defaults(self, monkeypatch, tmp_path):
        """Test thread count and golden directory follow the environment"""
        monkeypatch.setenv("CYCLOMOMENT_THREADS", "3")
        monkeypatch.setenv("CYCLOMOMENT_GOLDEN_DIR", str(tmp_path))
        assert default_threads() == 3
        assert default_golden_dir() == tmp_path
        assert RunConfig(subcommand="moments", q=7).threads == 3
        monkeypatch.delenv("CYCLOMOMENT_GOLDEN_DIR")
        assert default_golden_dir() == PACKAGED_GOLDEN_DIR


class TestRendering:
    """Test cases for JSON-lines and CSV output"""

    def test_float_precision(self):
        """Test floats are written with 17 significant digits"""
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(float("nan")) is None

    def test_json_lines(self):
        """Test one parseable object per row, with kind first"""
        rows = experiments.moments_rows([7, 11], Parity.EVEN, False)
        lines = render(rows, OutputFormat.JSON).splitlines()
        assert len(lines) == 2
        first = json.loads(lines[0])
        assert list(first)[0] == "kind"
        assert first["kind"] == "moment"
        assert first["parity"] == "even"
        assert first["error_envelope"] is None
        assert first["sum"] == rows[0].sum

    def test_csv_header_and_quoting(self):
        """Test the CSV header follows the row model and text with commas is quoted"""
        rows = [InvariantRow(name="a", passed=True, detail="x, y"), InvariantRow(name="b", passed=False)]
        lines = render(rows, OutputFormat.CSV).splitlines()
        assert lines[0] == "kind,name,passed,skipped,detail"
        assert lines[1] == 'invariant,a,true,false,"x, y"'
        assert lines[2] == "invariant,b,false,false,"

    def test_empty_csv(self):
        """Test no rows render to nothing"""
        assert render([], OutputFormat.CSV) == ""


class TestExperiments:
    """Test cases for the shared experiment functions"""

    def test_dispatch(self):
        """Test run() routes a config to its experiment"""
        rows = experiments.run(RunConfig(subcommand="orthogonality-check", q=9))
        assert len(rows) == 4
        assert all(row.passed for row in rows)

    def test_weighted_orthogonality_only(self):
        """Test --weighted restricts the check to the 1/conductor identity"""
        rows = experiments.run(RunConfig(subcommand="orthogonality-check", q=9, weighted=True))
        assert [row.weighted for row in rows] == [1, 1]

    def test_unknown_experiment(self):
        """Test an unknown subcommand name is refused"""
        with pytest.raises(ValueError):
            experiments.run(RunConfig(subcommand="nonsense"))

    def test_weighted_sum_row(self):
        """Test the row adds its parts and scales the deviation by the envelope"""
        row = experiments.weighted_sum_row(6, 10, 1e3)
        assert row.sum == row.diagonal + row.off_diagonal
        assert row.envelope_ratio == pytest.approx(abs(row.sum - row.main_term) / row.envelope, rel=1e-14)
        assert experiments.envelope_constant([row]) == row.envelope_ratio

    def test_tail_rows_use_grid(self):
        """Test the tail profile has one point per threshold"""
        rows = experiments.run(RunConfig(subcommand="tail-profile", q=13, trials=20, t_grid=[1.0, 3.0]))
        assert [row.t for row in rows] == [1.0, 3.0]

    def test_sgp_from_exported_lattice(self, lattice_13, tmp_path):
        """Test the experiment reads a lattice file instead of rebuilding"""
        path = tmp_path / "l13.txt"
        export_text(lattice_13, path)
        from_file = experiments.sgp_experiment(13, 20, seed=2, lattice_path=path)
        rebuilt = experiments.sgp_experiment(13, 20, seed=2)
        assert from_file == rebuilt
