"""
Named invariant suites and golden-value regression checks.

`run_selftest` runs every suite and returns one InvariantRow per invariant. Quick
mode restricts the suites to small moduli. Golden files live in a directory of JSON
documents {"name", "tolerance", "values": {key: value}}; a missing file is reported
as skipped, a drifted or unreadable one as a failure.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from mcp.server.fastmcp.utilities.logging import get_logger

from cyclomoment.errors import CyclomomentError, GoldenMismatchError
from cyclomoment.experiments import fitted_moebius_constant, orthogonality_rows
from cyclomoment.lattice.loglattice import asymptotic_prediction, build_lattice, dual_norm_character
from cyclomoment.lattice.sgp import SgpConfig, monte_carlo, probability_bound, run_trial
from cyclomoment.lattice.streams import trial_stream
from cyclomoment.numtheory.arith import divisors, euler_phi, phi_star
from cyclomoment.numtheory.characters import Parity, all_characters, character_group, count_by_conductor
from cyclomoment.numtheory.lfunc import l_one, l_one_digamma, l_one_series_oracle, l_one_table
from cyclomoment.numtheory.moments import moment_report, negative_moment
from cyclomoment.reports import InvariantRow

logger = get_logger(__name__)

GOLDEN_TOLERANCE = 1e-9
QUICK_GOLDEN_LIMIT = 1100
LATTICE_MODULI = (5, 7, 8, 9, 11, 13, 16, 25, 27, 32, 49)
DECODER_MODULI = (5, 8, 9, 13, 27)

# (label, q, exponents, closed form) anchors for L(1, chi)
L_ANCHORS = (
    ("quadratic mod 5", 5, (2,), 2 / math.sqrt(5) * math.log((1 + math.sqrt(5)) / 2)),
    ("quadratic mod 3", 3, (1,), math.pi / (3 * math.sqrt(3))),
    ("even mod 8", 8, (0, 1), math.log(1 + math.sqrt(2)) / math.sqrt(2)),
)


@dataclass
class InvariantResult:
    name: str
    passed: bool
    detail: str = ""
    skipped: bool = False

    def to_row(self) -> InvariantRow:
        return InvariantRow(name=self.name, passed=self.passed, skipped=self.skipped, detail=self.detail)


def _arith_divisor_sums(quick: bool) -> InvariantResult:
    limit = 500 if quick else 10_000
    for n in range(1, limit + 1):
        if sum(euler_phi(d) for d in divisors(n)) != n:
            return InvariantResult("arith.divisor_sums", False, f"fails at n={n}")
        if n >= 3 and sum(phi_star(d) for d in divisors(n)[1:]) != euler_phi(n) - 1:
            return InvariantResult("arith.divisor_sums", False, f"fails at n={n}")
    return InvariantResult("arith.divisor_sums", True, f"n <= {limit}")


def _characters_orthogonality(quick: bool) -> InvariantResult:
    limit = 20 if quick else 60
    worst = 0.0
    for q in range(3, limit + 1):
        for row in orthogonality_rows(q):
            worst = max(worst, row.max_abs_diff)
    return InvariantResult("characters.orthogonality", worst <= 1e-9, f"q <= {limit}, worst {worst:.3e}")


def _characters_conductors(quick: bool) -> InvariantResult:
    limit = 60 if quick else 200
    for q in range(3, limit + 1):
        counts = count_by_conductor(q)
        expected = {d: phi_star(d) for d in divisors(q) if phi_star(d)}
        if counts != expected:
            return InvariantResult("characters.conductor_partition", False, f"q={q}: {counts} != {expected}")
        group = character_group(q)
        even = sum(chi.parity is Parity.EVEN for chi in all_characters(group))
        if even != group.size // 2:
            return InvariantResult("characters.conductor_partition", False, f"q={q}: {even} even characters")
    return InvariantResult("characters.conductor_partition", True, f"q <= {limit}")


def _lfunc_anchors(quick: bool) -> InvariantResult:
    for label, q, exponents, expected in L_ANCHORS:
        group = character_group(q)
        chi = next(c for c in all_characters(group) if c.exponents == exponents)
        value = l_one_digamma(chi).value
        if abs(value - expected) > 1e-12:
            return InvariantResult("lfunc.closed_forms", False, f"{label}: {value} != {expected}")
    return InvariantResult("lfunc.closed_forms", True, f"{len(L_ANCHORS)} anchors")


def _lfunc_routes(quick: bool) -> InvariantResult:
    limit = 40 if quick else 500
    worst_induced = 0.0
    worst_batch = 0.0
    worst_conjugate = 0.0
    for q in range(3, limit + 1):
        group = character_group(q)
        table = l_one_table(q)
        for index, chi in enumerate(all_characters(group)):
            if chi.is_principal:
                continue
            direct = l_one_digamma(chi).value
            worst_induced = max(worst_induced, abs(direct - l_one(chi).value))
            worst_batch = max(worst_batch, abs(direct - table.values[index]))
            worst_conjugate = max(worst_conjugate, abs(l_one(chi.conjugate()).value - np.conj(l_one(chi).value)))
    passed = max(worst_induced, worst_batch, worst_conjugate) <= 1e-10
    detail = f"q <= {limit}: induced {worst_induced:.2e}, batch {worst_batch:.2e}, conjugate {worst_conjugate:.2e}"
    return InvariantResult("lfunc.dual_routes", passed, detail)


def _lfunc_series(quick: bool) -> InvariantResult:
    limit = 8 if quick else 500
    worst = 0.0
    for q in range(3, limit + 1):
        for chi in all_characters(character_group(q))[1:]:
            worst = max(worst, abs(l_one_digamma(chi).value - l_one_series_oracle(chi, 10**6).value))
    return InvariantResult("lfunc.series_oracle", worst <= 1e-5, f"q <= {limit}, worst {worst:.3e}")


def _moments_parity(quick: bool) -> InvariantResult:
    limit = 60 if quick else 500
    worst = 0.0
    for q in range(3, limit + 1):
        table = l_one_table(q)
        everything = math.fsum(1 / np.abs(table.values[1:]) ** 2)
        split = negative_moment(q, Parity.EVEN, 0) + negative_moment(q, Parity.ODD, 0)
        worst = max(worst, abs(split - everything) / everything)
    return InvariantResult("moments.parity_decomposition", worst <= 1e-9, f"q <= {limit}, worst {worst:.3e}")


def _lattice_dual_routes(quick: bool) -> InvariantResult:
    moduli = LATTICE_MODULI[:6] if quick else LATTICE_MODULI
    for q in moduli:
        lattice = build_lattice(q)
        norms = lattice.dual_norms
        if lattice.biorthogonality_error() > 1e-9:
            return InvariantResult("loglattice.dual_routes", False, f"q={q}: biorthogonality")
        if norms.std() / norms.mean() > 1e-9:
            return InvariantResult("loglattice.dual_routes", False, f"q={q}: unequal dual norms")
        if abs(dual_norm_character(q) - norms.mean()) / norms.mean() > 1e-8:
            return InvariantResult("loglattice.dual_routes", False, f"q={q}: character route disagrees")
        if np.abs(lattice.basis.sum(axis=1)).max() > 1e-10 * np.linalg.norm(lattice.basis, axis=1).max():
            return InvariantResult("loglattice.dual_routes", False, f"q={q}: row sums")
    return InvariantResult("loglattice.dual_routes", True, f"q in {list(moduli)}")


def _sgp_decoder(quick: bool) -> InvariantResult:
    trials = 200 if quick else 2000
    counterexamples = 0
    for q in DECODER_MODULI:
        lattice = build_lattice(q)
        for trial in range(trials):
            outcome = run_trial(lattice, 1.0, 1000, trial_stream(17, trial))
            if abs(outcome.margin - 0.5) <= 1e-12:
                continue
            if outcome.success != (outcome.margin < 0.5):
                counterexamples += 1
            shifted = run_trial(lattice, 8.0, 1000, trial_stream(17, trial))
            if shifted.success != outcome.success or not math.isclose(shifted.margin, outcome.margin, rel_tol=1e-9):
                return InvariantResult("sgp.decoder_equivalence", False, f"q={q}: outcome depends on r")
    return InvariantResult(
        "sgp.decoder_equivalence", counterexamples == 0, f"{trials} trials per q, {counterexamples} counterexamples"
    )


def _sgp_determinism(quick: bool) -> InvariantResult:
    config = SgpConfig(q=13, trials=50, seed=7)
    lattice = build_lattice(13)
    first = monte_carlo(config, lattice, threads=1)
    second = monte_carlo(config, lattice, threads=4)
    return InvariantResult("sgp.determinism", first == second, "threads 1 vs 4")


SUITES: Tuple[Callable[[bool], InvariantResult], ...] = (
    _arith_divisor_sums,
    _characters_orthogonality,
    _characters_conductors,
    _lfunc_anchors,
    _lfunc_routes,
    _lfunc_series,
    _moments_parity,
    _lattice_dual_routes,
    _sgp_decoder,
    _sgp_determinism,
)


def _parse_key(key: str) -> int:
    """Golden keys are 'q' or 'p^k'; returns the modulus."""
    if "^" in key:
        p, k = key.split("^")
        return int(p) ** int(k)
    return int(key)


def _key(q: int, power: Optional[Tuple[int, int]] = None) -> str:
    return f"{power[0]}^{power[1]}" if power else str(q)


GOLDEN_PRIMES = (101, 503, 1009, 5003, 10007)
GOLDEN_POWERS = ((101, 2), (31, 3), (3, 4), (2, 7))
GOLDEN_RATIO_PRIMES = (101, 1009, 10007)


def _moments_even(q: int) -> float:
    return moment_report(q, Parity.EVEN, 0).rel_dev


def _moments_odd(q: int) -> float:
    return moment_report(q, Parity.ODD, 0).rel_dev


def _moments_conductor(q: int) -> float:
    return moment_report(q, Parity.EVEN, 1).rel_dev


def _dual_norm_ratio(q: int) -> float:
    return dual_norm_character(q) / asymptotic_prediction(q) - 1


def _sgp_bound(q: int) -> float:
    return probability_bound(q, 1 / (2 * dual_norm_character(q)))


# name -> (keys, per-key computation)
GOLDEN_SETS: Dict[str, Tuple[Tuple[str, ...], Callable[[int], float]]] = {
    "moments_even": (tuple(_key(q) for q in GOLDEN_PRIMES), _moments_even),
    "moments_odd": (tuple(_key(q) for q in GOLDEN_PRIMES), _moments_odd),
    "moments_conductor": (tuple(_key(p**k, (p, k)) for p, k in GOLDEN_POWERS), _moments_conductor),
    "dual_norm_ratio": (tuple(_key(q) for q in GOLDEN_RATIO_PRIMES), _dual_norm_ratio),
    "sgp_bound": (("10007",), _sgp_bound),
}


def compute_golden(name: str) -> Dict[str, float]:
    if name == "moebius_envelope":
        return {"C": fitted_moebius_constant()}
    keys, compute = GOLDEN_SETS[name]
    return {key: compute(_parse_key(key)) for key in keys}


def write_golden(directory: Path, names: Optional[List[str]] = None) -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names or [*GOLDEN_SETS, "moebius_envelope"]:
        values = compute_golden(name)
        path = directory / f"{name}.json"
        document = {"name": name, "tolerance": GOLDEN_TOLERANCE, "values": values}
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"Wrote golden file {path}")
        written.append(path)
    return written


def check_golden(name: str, directory: Path, quick: bool = False) -> InvariantResult:
    path = directory / f"{name}.json"
    label = f"golden.{name}"
    if not path.exists():
        logger.warning(f"Golden file {path} is missing; skipping")
        return InvariantResult(label, True, f"{path.name} missing", skipped=True)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
        expected = {str(key): float(value) for key, value in document["values"].items()}
        tolerance = float(document.get("tolerance", GOLDEN_TOLERANCE))
    except (ValueError, KeyError, TypeError, AttributeError) as error:
        return InvariantResult(label, False, f"unreadable golden file: {error}")

    if name == "moebius_envelope":
        if quick:
            return InvariantResult(label, True, "skipped in quick mode", skipped=True)
        actual = compute_golden(name)
    else:
        _, compute = GOLDEN_SETS[name]
        keys = [key for key in expected if not quick or _parse_key(key) <= QUICK_GOLDEN_LIMIT]
        actual = {key: compute(_parse_key(key)) for key in keys}
    try:
        for key, value in actual.items():
            if key not in expected:
                raise GoldenMismatchError(name, key, math.nan, value)
            if abs(value - expected[key]) > tolerance * max(1.0, abs(expected[key])):
                raise GoldenMismatchError(name, key, expected[key], value)
    except GoldenMismatchError as error:
        return InvariantResult(label, False, str(error))
    return InvariantResult(label, True, f"{len(actual)} values")


def _convergence_trend() -> InvariantResult:
    deviations = {q: _moments_even(q) for q in GOLDEN_PRIMES}
    later = max(deviations[q] for q in GOLDEN_PRIMES if q >= 1009)
    passed = all(math.isfinite(d) for d in deviations.values()) and later < deviations[101]
    return InvariantResult(
        "moments.convergence_trend", passed, f"max over q >= 1009 {later:.4e}, q=101 {deviations[101]:.4e}"
    )


def run_selftest(golden_dir: Path, quick: bool = False) -> List[InvariantResult]:
    results = []
    for suite in SUITES:
        try:
            result = suite(quick)
        except CyclomomentError as error:
            result = InvariantResult(suite.__name__.lstrip("_"), False, f"{type(error).__name__}: {error}")
        logger.info(f"{result.name}: {'ok' if result.passed else 'FAILED'} ({result.detail})")
        results.append(result)
    if not quick:
        results.append(_convergence_trend())
    for name in [*GOLDEN_SETS, "moebius_envelope"]:
        results.append(check_golden(name, golden_dir, quick))
    return results
