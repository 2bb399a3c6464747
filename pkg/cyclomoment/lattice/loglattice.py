"""
The log-cyclotomic-unit lattice of Q(zeta_q) for prime-power q.

Coordinates are indexed by G = (Z/qZ)*/{+-1}, represented by the residues
a <= q/2 coprime to q. The basis vector of the unit (zeta^j - 1)/(zeta - 1) has
coordinate log|sin(pi i j / q)| - log|sin(pi i / q)| at i in G.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, TextIO, Tuple, Union

import numpy as np
from mcp.server.fastmcp.utilities.logging import get_logger
from pydantic import BaseModel
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from cyclomoment.errors import InvalidModulusError, LatticeConditionError
from cyclomoment.numtheory.arith import euler_phi, prime_power
from cyclomoment.numtheory.characters import Parity
from cyclomoment.numtheory.moments import negative_moment

logger = get_logger(__name__)

MAX_CONDITION = 1e12
ASYMPTOTIC_CONSTANT = 2 * math.sqrt(15) / math.pi


def _prime_power_modulus(q: int) -> Tuple[int, int]:
    power = prime_power(q)
    if power is None or q < 5:
        raise InvalidModulusError(f"The log-unit lattice is built for prime powers q >= 5, got {q}.")
    return power


def group_reps(q: int) -> Tuple[int, ...]:
    _prime_power_modulus(q)
    return tuple(a for a in range(1, q // 2 + 1) if math.gcd(a, q) == 1)


@dataclass(frozen=True, eq=False)
class LogUnitLattice:
    q: int
    reps: Tuple[int, ...]
    basis: np.ndarray
    dual: np.ndarray
    gram: np.ndarray
    condition: float

    @property
    def dim(self) -> int:
        """Length of the embedding vectors, phi(q)/2."""
        return len(self.reps)

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def dual_norms(self) -> np.ndarray:
        return np.linalg.norm(self.dual, axis=1)

    @property
    def max_dual_norm(self) -> float:
        return float(self.dual_norms.max())

    @cached_property
    def unit_duals(self) -> np.ndarray:
        return self.dual / self.dual_norms[:, None]

    def biorthogonality_error(self) -> float:
        product = self.basis @ self.dual.T
        return float(np.abs(product - np.eye(self.rank)).max())


def _log_sines(q: int) -> np.ndarray:
    a = np.arange(q, dtype=float)
    table = np.full(q, -np.inf)
    table[1:] = np.log(np.sin(np.pi * a[1:] / q))
    return table


def _assemble(q: int, basis: np.ndarray, dual: Optional[np.ndarray] = None) -> LogUnitLattice:
    # C order for both, whatever the source
    basis = np.ascontiguousarray(basis)
    gram = basis @ basis.T
    eigenvalues = eigvalsh(gram)
    smallest, largest = float(eigenvalues[0]), float(eigenvalues[-1])
    condition = largest / smallest if smallest > 0 else math.inf
    logger.debug(f"Gram matrix for q={q}: rank {len(gram)}, condition {condition:.3e}")
    if condition > MAX_CONDITION:
        raise LatticeConditionError(q, condition)
    if dual is None:
        try:
            dual = cho_solve(cho_factor(gram), basis)
        except LinAlgError:
            raise LatticeConditionError(q, condition)
    dual = np.ascontiguousarray(dual)
    for array in (basis, dual, gram):
        array.setflags(write=False)
    return LogUnitLattice(q, group_reps(q), basis, dual, gram, condition)


def build_lattice(q: int) -> LogUnitLattice:
    """Basis rows b_j for j in reps other than 1, and the dual rows solving G D = B."""
    reps = np.array(group_reps(q), dtype=np.int64)
    log_sines = _log_sines(q)
    rows = reps[1:]
    basis = log_sines[np.outer(rows, reps) % q] - log_sines[reps][None, :]
    logger.info(f"Building log-unit lattice for q={q} (dimension {len(reps)})")
    return _assemble(q, basis)


def dual_norm_character(q: int) -> float:
    """
    The common dual norm from characters alone:
        ||b_j^v||^2 = (4 / |G|) * sum over even nonprincipal chi of 1 / (f_chi |L(1, chi)|^2).
    """
    _prime_power_modulus(q)
    half = euler_phi(q) // 2
    return math.sqrt(4 / half * negative_moment(q, Parity.EVEN, 1))


def asymptotic_prediction(q: int) -> float:
    _, k = _prime_power_modulus(q)
    return ASYMPTOTIC_CONSTANT * math.sqrt(k / euler_phi(q))


def cdpr_upper_bound(q: int, C: float) -> float:
    """2 C sqrt(k) ln q / sqrt(q), the earlier generic upper bound on the dual norm."""
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}.")
    _, k = _prime_power_modulus(q)
    return 2 * C * math.sqrt(k) * math.log(q) / math.sqrt(q)


def asymptotic_t(q: int, delta: float) -> float:
    """Largest admissible decoding radius from the asymptotic norm, shrunk by 1 + delta."""
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}.")
    return 1 / (2 * asymptotic_prediction(q) * (1 + delta))


def large_k_dual_bound(q: int) -> float:
    """Order of the dual norm when k is large compared to p / (log p)^4."""
    p, k = _prime_power_modulus(q)
    log_p = math.log(p)
    return k * log_p * (math.log(k) + math.log(log_p)) / math.sqrt(euler_phi(q) * p)


def regime(q: int) -> str:
    p, k = _prime_power_modulus(q)
    if k == 1:
        return "prime"
    if k > p / math.log(p) ** 4:
        return "large-k"
    return "prime-power"


class DualNormRow(BaseModel):
    kind: str = "dual_norms"
    q: int
    p: int
    k: int
    dim: int
    regime: str
    algebra_norm: Optional[float] = None
    norm_spread: Optional[float] = None
    biorthogonality_error: Optional[float] = None
    condition: Optional[float] = None
    character_norm: float
    asymptotic_norm: float
    large_k_bound: float
    C: float
    cdpr_bound: float
    t_cdpr: float
    t_character: float
    delta: float
    t_asymptotic: float


def table_row(q: int, C: float = 1.0, delta: float = 0.0, skip_algebra: bool = False) -> DualNormRow:
    """One comparison row: both computed norms against the asymptotic and generic bounds."""
    p, k = _prime_power_modulus(q)
    algebra = {}
    if not skip_algebra:
        lattice = build_lattice(q)
        norms = lattice.dual_norms
        algebra = dict(
            algebra_norm=float(norms.mean()),
            norm_spread=float(norms.std() / norms.mean()),
            biorthogonality_error=lattice.biorthogonality_error(),
            condition=lattice.condition,
        )
    character_norm = dual_norm_character(q)
    cdpr = cdpr_upper_bound(q, C)
    return DualNormRow(
        q=q,
        p=p,
        k=k,
        dim=euler_phi(q) // 2,
        regime=regime(q),
        character_norm=character_norm,
        asymptotic_norm=asymptotic_prediction(q),
        large_k_bound=large_k_dual_bound(q),
        C=C,
        cdpr_bound=cdpr,
        t_cdpr=1 / (2 * cdpr),
        t_character=1 / (2 * character_norm),
        delta=delta,
        t_asymptotic=asymptotic_t(q, delta),
        **algebra,
    )


def export_text(lattice: LogUnitLattice, target: Union[str, Path, TextIO]) -> None:
    """Header `q d`, then the basis rows, then the dual rows, 17 significant digits each."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as handle:
            export_text(lattice, handle)
        return
    target.write(f"{lattice.q} {lattice.dim}\n")
    np.savetxt(target, lattice.basis, fmt="%.17g")
    np.savetxt(target, lattice.dual, fmt="%.17g")


def load_text(source: Union[str, Path, TextIO]) -> LogUnitLattice:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return load_text(handle)
    header = source.readline().split()
    if len(header) != 2:
        raise ValueError(f"Expected a 'q d' header line, got {header!r}.")
    q, dim = int(header[0]), int(header[1])
    if dim != euler_phi(q) // 2:
        raise ValueError(f"Header dimension {dim} does not match phi({q})/2.")
    rows = np.loadtxt(source, dtype=float, ndmin=2)
    if rows.shape != (2 * (dim - 1), dim):
        raise ValueError(f"Expected {2 * (dim - 1)} rows of {dim} values, got shape {rows.shape}.")
    basis, dual = rows[: dim - 1].copy(), rows[dim - 1 :].copy()
    return _assemble(q, basis, dual)
