"""
Experiment functions shared by the command line and the tool server.

Each function takes plain parameters and returns report rows; nothing here
writes output or parses arguments.
"""

from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
from mcp.server.fastmcp.utilities.logging import get_logger
from pydantic import BaseModel

from cyclomoment.config import RunConfig
from cyclomoment.lattice.loglattice import DualNormRow, load_text, table_row
from cyclomoment.lattice.sgp import SgpConfig, SgpReport, TailPoint, monte_carlo, tail_profile
from cyclomoment.numtheory.characters import Parity, character_group, orthogonality_lhs, orthogonality_rhs
from cyclomoment.numtheory.moments import (
    DEFAULT_EPS_TRUNC,
    MomentReport,
    moebius_envelope,
    moebius_main_term,
    moment_report,
    weighted_moebius_split,
)
from cyclomoment.reports import OrthogonalityRow, WeightedSumRow
from cyclomoment.workers import ordered_map

logger = get_logger(__name__)

ORTHOGONALITY_TOLERANCE = 1e-9


def moments_rows(moduli: Iterable[int], parity: Parity, weighted: bool, threads: int = 1) -> List[MomentReport]:
    return ordered_map(lambda q: moment_report(q, parity, int(weighted)), list(moduli), threads)


def weighted_sum_row(q: int, l: int, X: float, eps_trunc: float = DEFAULT_EPS_TRUNC) -> WeightedSumRow:
    diagonal, off_diagonal = weighted_moebius_split(q, l, X, eps_trunc)
    total = diagonal + off_diagonal
    main_term = moebius_main_term(q)
    envelope = moebius_envelope(l, X)
    return WeightedSumRow(
        q=q,
        l=l,
        X=X,
        eps_trunc=eps_trunc,
        diagonal=diagonal,
        off_diagonal=off_diagonal,
        sum=total,
        main_term=main_term,
        envelope=envelope,
        envelope_ratio=abs(total - main_term) / envelope,
    )


def envelope_constant(rows: Sequence[WeightedSumRow]) -> float:
    """Smallest C with |sum - main term| <= C * envelope across the rows."""
    return max(row.envelope_ratio for row in rows)


def dual_norm_rows(
    moduli: Iterable[int], C: float = 1.0, delta: float = 0.0, skip_algebra: bool = False, threads: int = 1
) -> List[DualNormRow]:
    return ordered_map(lambda q: table_row(q, C, delta, skip_algebra), list(moduli), threads)


def sgp_experiment(
    q: int,
    trials: int,
    seed: int = 0,
    r: float = 1.0,
    E: int = 10,
    threads: int = 1,
    lattice_path: Optional[Path] = None,
) -> SgpReport:
    config = SgpConfig(q=q, r=r, E=E, trials=trials, seed=seed)
    lattice = load_text(lattice_path) if lattice_path is not None else None
    return monte_carlo(config, lattice, threads)


def tail_rows(
    q: int, r: float, trials: int, t_grid: Sequence[float], seed: int = 0, threads: int = 1
) -> List[TailPoint]:
    return tail_profile(q, r, trials, t_grid, seed=seed, threads=threads)


def orthogonality_rows(
    q: int, weighted: Optional[int] = None, parity_bit: Optional[int] = None
) -> List[OrthogonalityRow]:
    """Compare both sides of the orthogonality identity for every unit pair (n1, n2) mod q."""
    units = np.flatnonzero(character_group(q).units).tolist()
    rows = []
    for b in [weighted] if weighted is not None else [0, 1]:
        for a in [parity_bit] if parity_bit is not None else [0, 1]:
            worst = 0.0
            for n1 in units:
                for n2 in units:
                    diff = abs(orthogonality_lhs(q, b, a, n1, n2) - orthogonality_rhs(q, b, a, n1, n2))
                    worst = max(worst, diff)
            rows.append(
                OrthogonalityRow(
                    q=q,
                    weighted=b,
                    parity_bit=a,
                    pairs=len(units) ** 2,
                    max_abs_diff=worst,
                    passed=worst <= ORTHOGONALITY_TOLERANCE,
                )
            )
    logger.debug(f"Orthogonality mod {q}: worst difference {max(row.max_abs_diff for row in rows):.3e}")
    return rows


def _run_moments(config: RunConfig) -> List[BaseModel]:
    return moments_rows(config.moduli(), config.parity, config.weighted, config.threads)


def _run_weighted_sum(config: RunConfig) -> List[BaseModel]:
    return [weighted_sum_row(q, config.l, config.X, config.eps_trunc) for q in config.moduli()]


def _run_dual_norms(config: RunConfig) -> List[BaseModel]:
    return dual_norm_rows(config.moduli(), config.C, config.delta, config.skip_algebra, config.threads)


def _run_sgp(config: RunConfig) -> List[BaseModel]:
    return [
        sgp_experiment(q, config.trials, config.seed, config.r, config.E, config.threads, config.lattice)
        for q in config.moduli()
    ]


def _run_tail_profile(config: RunConfig) -> List[BaseModel]:
    rows: List[BaseModel] = []
    for q in config.moduli():
        rows.extend(tail_rows(q, config.r, config.trials, config.t_grid, config.seed, config.threads))
    return rows


def _run_orthogonality(config: RunConfig) -> List[BaseModel]:
    weighted = int(config.weighted) if config.weighted else None
    rows: List[BaseModel] = []
    for q in config.moduli():
        rows.extend(orthogonality_rows(q, weighted))
    return rows


EXPERIMENTS: Dict[str, Callable[[RunConfig], List[BaseModel]]] = {
    "moments": _run_moments,
    "weighted-sum": _run_weighted_sum,
    "dual-norms": _run_dual_norms,
    "sgp": _run_sgp,
    "tail-profile": _run_tail_profile,
    "orthogonality-check": _run_orthogonality,
}


def run(config: RunConfig) -> List[BaseModel]:
    try:
        experiment = EXPERIMENTS[config.subcommand]
    except KeyError:
        raise ValueError(f"Unknown experiment '{config.subcommand}'. Choose from {sorted(EXPERIMENTS)}.")
    logger.info(f"Running {config.subcommand} for moduli {config.moduli()}")
    return experiment(config)


def fitted_moebius_constant(
    moduli: Sequence[int] = (1, 2, 6), levels: Sequence[int] = (1, 10, 100), scales: Sequence[float] = (1e3, 1e4)
) -> float:
    rows = [weighted_sum_row(q, l, X) for q in moduli for l in levels for X in scales]
    constant = envelope_constant(rows)
    logger.info(f"Fitted envelope constant over {len(rows)} samples: {constant:.4f}")
    return constant
