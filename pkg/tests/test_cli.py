"""
Test suite for the command-line front end

Runs every subcommand through typer's CliRunner and checks output rows, exit codes
and that repeated runs print identical text.
"""

import json

import pytest

from cyclomoment.cli import app
from cyclomoment.lattice.loglattice import load_text

QUIET = ["--log-level", "ERROR"]


def _rows(result):
    return [json.loads(line) for line in result.stdout.splitlines() if line.startswith("{")]


class TestExperimentCommands:
    """Test cases for the experiment subcommands"""

    def test_moments_single_modulus(self, runner):
        """Test moments --q prints one moment row"""
        result = runner.invoke(app, QUIET + ["moments", "--q", "101"])
        assert result.exit_code == 0
        rows = _rows(result)
        assert len(rows) == 1
        assert rows[0]["kind"] == "moment"
        assert rows[0]["q"] == 101
        assert rows[0]["parity"] == "even"

    def test_moments_prime_range_csv(self, runner):
        """Test a prime range in CSV gives a header plus one line per prime"""
        result = runner.invoke(
            app, QUIET + ["moments", "--primes-from", "10", "--primes-to", "20", "--parity", "odd", "--format", "csv"]
        )
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0].startswith("kind,q,parity,weighted,sum")
        assert len(lines) == 5

    def test_moments_weighted_prime_power(self, runner):
        """Test the conductor-weighted moment for q = p^k"""
        result = runner.invoke(app, QUIET + ["moments", "--p", "5", "--k", "3", "--weighted"])
        assert result.exit_code == 0
        row = _rows(result)[0]
        assert row["q"] == 125
        assert row["weighted"] == 1
        assert row["error_envelope"] is not None

    def test_weighted_sum(self, runner):
        """Test weighted-sum prints the diagonal and off-diagonal split"""
        result = runner.invoke(app, QUIET + ["weighted-sum", "--q", "1", "--l", "10", "--X", "1000"])
        assert result.exit_code == 0
        row = _rows(result)[0]
        assert row["kind"] == "weighted_sum"
        assert row["l"] == 10

    def test_dual_norms(self, runner):
        """Test dual-norms reports both routes in agreement"""
        result = runner.invoke(app, QUIET + ["dual-norms", "--q", "27"])
        assert result.exit_code == 0
        row = _rows(result)[0]
        assert abs(row["algebra_norm"] - row["character_norm"]) < 1e-8 * row["character_norm"]

    def test_dual_norms_skip_algebra(self, runner):
        """Test --skip-algebra writes null linear-algebra fields"""
        result = runner.invoke(app, QUIET + ["dual-norms", "--q", "1009", "--skip-algebra"])
        assert result.exit_code == 0
        assert _rows(result)[0]["algebra_norm"] is None

    def test_sgp_is_deterministic(self, runner):
        """Test identical arguments and any thread count print identical text"""
        args = QUIET + ["sgp", "--q", "13", "--trials", "30", "--seed", "42"]
        first = runner.invoke(app, args)
        second = runner.invoke(app, args + ["--threads", "3"])
        assert first.exit_code == 0
        assert first.stdout == second.stdout
        assert _rows(first)[0]["trials"] == 30

    def test_sgp_with_exported_lattice(self, runner, tmp_path):
        """Test export-lattice output feeds sgp --lattice"""
        path = tmp_path / "l13.txt"
        exported = runner.invoke(app, QUIET + ["export-lattice", "--q", "13", "--out", str(path)])
        assert exported.exit_code == 0
        assert load_text(path).q == 13
        from_file = runner.invoke(app, QUIET + ["sgp", "--q", "13", "--trials", "10", "--lattice", str(path)])
        rebuilt = runner.invoke(app, QUIET + ["sgp", "--q", "13", "--trials", "10"])
        assert from_file.stdout == rebuilt.stdout

    def test_tail_profile_grid(self, runner):
        """Test repeated --t options form the threshold grid"""
        result = runner.invoke(app, QUIET + ["tail-profile", "--q", "13", "--trials", "20", "--t", "1", "--t", "2"])
        assert result.exit_code == 0
        assert [row["t"] for row in _rows(result)] == [1.0, 2.0]

    def test_orthogonality_check(self, runner):
        """Test orthogonality-check passes and exits 0"""
        result = runner.invoke(app, QUIET + ["orthogonality-check", "--q", "12"])
        assert result.exit_code == 0
        assert all(row["passed"] for row in _rows(result))

    def test_out_file(self, runner, tmp_path):
        """Test --out writes rows to a file instead of stdout"""
        path = tmp_path / "rows.jsonl"
        result = runner.invoke(app, QUIET + ["moments", "--q", "7", "--out", str(path)])
        assert result.exit_code == 0
        assert json.loads(path.read_text().splitlines()[0])["q"] == 7


class TestExitCodes:
    """Test cases for usage errors"""

    def test_missing_modulus(self, runner):
        """Test no modulus specification is a usage error"""
        assert runner.invoke(app, QUIET + ["moments"]).exit_code == 2

    def test_two_modulus_specs(self, runner):
        """Test --q together with a prime range is a usage error"""
        result = runner.invoke(app, QUIET + ["moments", "--q", "7", "--primes-from", "3", "--primes-to", "9"])
        assert result.exit_code == 2

    def test_weighted_needs_prime_power(self, runner):
        """Test a weighted moment for composite q is a usage error"""
        assert runner.invoke(app, QUIET + ["moments", "--q", "100", "--weighted"]).exit_code == 2

    def test_lattice_needs_prime_power(self, runner):
        """Test dual-norms and sgp refuse q that is not a prime power"""
        assert runner.invoke(app, QUIET + ["dual-norms", "--q", "12"]).exit_code == 2
        assert runner.invoke(app, QUIET + ["sgp", "--q", "3"]).exit_code == 2

    def test_bad_seed(self, runner):
        """Test a negative seed is a usage error"""
        assert runner.invoke(app, QUIET + ["sgp", "--q", "13", "--seed", "-1"]).exit_code == 2

    def test_bad_log_level(self, runner):
        """Test an unknown log level is a usage error"""
        assert runner.invoke(app, ["--log-level", "LOUD", "moments", "--q", "7"]).exit_code == 2

    def test_modulus_below_three(self, runner):
        """Test moments --q 2 is a usage error"""
        assert runner.invoke(app, QUIET + ["moments", "--q", "2"]).exit_code == 2


class TestSelftestCommands:
    """Test cases for golden and selftest"""

    def test_golden_writes_requested_sets(self, runner, tmp_path):
        """Test golden --name writes only the named file"""
        result = runner.invoke(app, QUIET + ["golden", "--golden-dir", str(tmp_path), "--name", "sgp_bound"])
        assert result.exit_code == 0
        assert [path.name for path in tmp_path.iterdir()] == ["sgp_bound.json"]


class TestClosedFormAnchor:
    """Test case for the q = 5 anchor through the command line"""

    def test_dual_norms_q5(self, runner):
        """Test both dual-norm routes print about 1.46943 for q = 5"""
        result = runner.invoke(app, QUIET + ["dual-norms", "--q", "5"])
        assert result.exit_code == 0
        row = _rows(result)[0]
        assert abs(row["algebra_norm"] - 1.46943) < 1e-5
        assert abs(row["character_norm"] - 1.46943) < 1e-5


class TestSelftestExitCodes:
    """Test cases for selftest pass and fail exits"""

    @pytest.mark.slow
    def test_corrupted_golden_file_fails(self, runner, empty_golden_dir):
        """Test a corrupted golden file makes selftest exit 1 and names the invariant"""
        (empty_golden_dir / "dual_norm_ratio.json").write_text("[]", encoding="utf-8")
        result = runner.invoke(app, QUIET + ["selftest", "--quick", "--golden-dir", str(empty_golden_dir)])
        assert result.exit_code == 1
        failed = [row["name"] for row in _rows(result) if not row["passed"]]
        assert failed == ["golden.dual_norm_ratio"]
