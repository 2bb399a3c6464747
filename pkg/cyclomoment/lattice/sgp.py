"""
Short generator recovery by Babai round-off in the log-unit lattice.

Everything happens on log-embedding vectors: a generator g is represented by
Log g, the public generator by Log g + Log u with u a random cyclotomic unit, and
decoding recovers the unit exponents of u.
"""

import math
from typing import Iterable, List, NamedTuple, Optional

import numpy as np
from mcp.server.fastmcp.utilities.logging import get_logger
from pydantic import BaseModel, Field

from cyclomoment.lattice.loglattice import LogUnitLattice, build_lattice
from cyclomoment.lattice.streams import MAX_SEED, trial_stream
from cyclomoment.numtheory.arith import euler_phi, prime_power
from cyclomoment.workers import ordered_map

logger = get_logger(__name__)

CONDITIONAL_CAVEAT = "conditional on t_star > T"
EXCEPTIONAL_ZERO_CAVEAT = "assumes no exceptional zero"


class SgpConfig(BaseModel):
    q: int
    r: float = Field(default=1.0, gt=0)
    E: int = Field(default=10, ge=0)
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=MAX_SEED)


class SgpReport(BaseModel):
    kind: str = "sgp"
    q: int
    r: float
    E: int
    trials: int
    seed: int
    successes: int
    empirical_rate: float
    t_star: float
    bound: float
    vacuous: bool
    margin_min: float
    margin_mean: float
    margin_max: float
    caveat: str


class TrialOutcome(NamedTuple):
    success: bool
    margin: float


class TailPoint(BaseModel):
    kind: str = "tail"
    q: int
    trials: int
    t: float
    empirical_exceedance: float
    bound_value: float


def _standard_log_embedding(dim: int, rng: np.random.Generator) -> np.ndarray:
    """ln hypot(Z, Z') for independent standard normals; zero moduli are redrawn."""
    draws = rng.standard_normal(2 * dim)
    moduli = np.hypot(draws[:dim], draws[dim:])
    while not moduli.all():
        zero = moduli == 0
        redraw = rng.standard_normal(2 * int(zero.sum()))
        moduli[zero] = np.hypot(redraw[::2], redraw[1::2])
    return np.log(moduli)


def sample_log_g(q: int, r: float, rng: np.random.Generator) -> np.ndarray:
    """Log g with coordinates ln sqrt(X^2 + X'^2), X and X' independent normal(0, r^2)."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}.")
    return _standard_log_embedding(euler_phi(q) // 2, rng) + math.log(r)


def sample_unit(lattice: LogUnitLattice, E: int, rng: np.random.Generator):
    """Exponents e uniform on [-E, E]^(d-1) and Log u = sum_j e_j b_j."""
    if E < 0:
        raise ValueError(f"E must be non-negative, got {E}.")
    exponents = rng.integers(-E, E, size=lattice.rank, endpoint=True, dtype=np.int64)
    return exponents, exponents @ lattice.basis


def babai_round_off(target: np.ndarray, lattice: LogUnitLattice) -> np.ndarray:
    """Nearest integers to <target, b_j^v>; half-integers round to even."""
    target = np.asarray(target, dtype=float)
    if target.shape != (lattice.dim,):
        raise ValueError(f"Target must have length {lattice.dim}, got shape {target.shape}.")
    centered = target - target.mean()
    return np.rint(lattice.dual @ centered).astype(np.int64)


def run_trial(lattice: LogUnitLattice, r: float, E: int, rng: np.random.Generator) -> TrialOutcome:
    """
    One recovery attempt on the target Log g + Log u. The scale r shifts Log g along
    the all-1 vector, which every dual row annihilates, so success and margin agree
    across r up to rounding.
    """
    log_g = sample_log_g(lattice.q, r, rng)
    exponents, log_u = sample_unit(lattice, E, rng)
    decoded = babai_round_off(log_g + log_u, lattice)
    projected = log_g - log_g.mean()
    margin = float(np.abs(lattice.dual @ projected).max())
    return TrialOutcome(bool(np.array_equal(decoded, exponents)), margin)


def probability_bound(q: int, t: float) -> float:
    """1 - (phi(q) - 2) e^{-t/2}; negative values mean the bound says nothing."""
    return 1 - (euler_phi(q) - 2) * math.exp(-t / 2)


def monte_carlo(config: SgpConfig, lattice: Optional[LogUnitLattice] = None, threads: int = 1) -> SgpReport:
    if lattice is None:
        lattice = build_lattice(config.q)
    elif lattice.q != config.q:
        raise ValueError(f"Lattice is for q={lattice.q}, config asks for q={config.q}.")
    logger.info(f"SGP Monte-Carlo q={config.q} trials={config.trials} seed={config.seed} threads={threads}")

    outcomes = ordered_map(
        lambda trial: run_trial(lattice, config.r, config.E, trial_stream(config.seed, trial)),
        range(config.trials),
        threads,
    )
    successes = sum(outcome.success for outcome in outcomes)
    margins = [outcome.margin for outcome in outcomes]
    t_star = 1 / (2 * lattice.max_dual_norm)
    bound = probability_bound(config.q, t_star)
    if bound <= 0:
        logger.warning(f"Success bound for q={config.q} is vacuous ({bound:.4f})")

    _, k = prime_power(config.q)
    caveats = [CONDITIONAL_CAVEAT] + ([EXCEPTIONAL_ZERO_CAVEAT] if k > 1 else [])
    return SgpReport(
        q=config.q,
        r=config.r,
        E=config.E,
        trials=config.trials,
        seed=config.seed,
        successes=successes,
        empirical_rate=successes / config.trials,
        t_star=t_star,
        bound=bound,
        vacuous=bound <= 0,
        margin_min=min(margins),
        margin_mean=math.fsum(margins) / len(margins),
        margin_max=max(margins),
        caveat="; ".join(caveats),
    )


def tail_profile(
    q: int,
    r: float,
    trials: int,
    t_grid: Iterable[float],
    seed: int = 0,
    lattice: Optional[LogUnitLattice] = None,
    threads: int = 1,
) -> List[TailPoint]:
    """Empirical P[max_j |<Log g, b_j^v / ||b_j^v||>| >= t] next to (phi(q) - 2) e^{-t/2}."""
    grid = [float(t) for t in t_grid]
    if any(not t > 0 for t in grid):
        raise ValueError("Tail thresholds must be positive.")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}.")
    if lattice is None:
        lattice = build_lattice(q)

    def statistic(trial: int) -> float:
        log_g = sample_log_g(q, r, trial_stream(seed, trial))
        return float(np.abs(lattice.unit_duals @ (log_g - log_g.mean())).max())

    stats = np.array(ordered_map(statistic, range(trials), threads))
    return [
        TailPoint(
            q=q,
            trials=trials,
            t=t,
            empirical_exceedance=float(np.count_nonzero(stats >= t)) / trials,
            bound_value=(euler_phi(q) - 2) * math.exp(-t / 2),
        )
        for t in grid
    ]
