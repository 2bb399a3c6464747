"""
Values of L(1, chi) for nonprincipal Dirichlet characters.

The production route is the finite digamma formula
    L(1, chi) = -(1/q) * sum_{a=1}^{q} chi(a) psi(a/q),
valid for every nonprincipal chi mod q (primitive or not). A partial-summation
evaluation of the defining series is kept as an independent oracle.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Union

import numpy as np
from mcp.server.fastmcp.utilities.logging import get_logger

from cyclomoment.errors import PrincipalCharacterError
from cyclomoment.numtheory.arith import factorize
from cyclomoment.numtheory.characters import (
    DirichletCharacter,
    character_group,
    evaluate,
    primitive_part,
)

logger = get_logger(__name__)

_EPS = np.finfo(float).eps
_SHIFT = 10
# B_{2n} / (2n) for n = 1..7
_ASYMPTOTIC = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)
# relative error of digamma() on (0, 1]
DIGAMMA_REL_ERR = 16 * _EPS


class LMethod(str, Enum):
    DIGAMMA = "digamma"
    SERIES = "series"
    INDUCED = "induced"


@dataclass(frozen=True)
class LOneValue:
    value: complex
    abs_err: float
    method: LMethod

    def __post_init__(self):
        if not math.isfinite(self.abs_err) or self.abs_err < 0:
            raise ValueError(f"abs_err must be finite and non-negative, got {self.abs_err}.")


def digamma(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    psi(x) for 0 < x <= 1.

    Shifts into x >= 10 with psi(x) = psi(x + 10) - sum_{k<10} 1/(x + k) and finishes
    with the asymptotic series. The result carries relative error below DIGAMMA_REL_ERR;
    near 0 where psi ~ -1/x this is the meaningful bound.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr > 1):
        raise ValueError("digamma is evaluated on (0, 1] only.")
    y = arr + _SHIFT
    t = 1.0 / (y * y)
    series = np.zeros_like(y)
    for c in reversed(_ASYMPTOTIC):
        series = (series + c) * t
    result = np.log(y) - 0.5 / y - series
    # smallest reciprocals first
    for k in range(_SHIFT - 1, -1, -1):
        result = result - 1.0 / (arr + k)
    return float(result) if result.ndim == 0 else result


@lru_cache(maxsize=64)
def psi_table(q: int) -> np.ndarray:
    """psi(a/q) indexed by residue a mod q, so entry 0 holds psi(q/q) = psi(1)."""
    a = np.arange(q, dtype=float)
    a[0] = q
    table = digamma(a / q)
    table.setflags(write=False)
    return table


def _require_nonprincipal(chi: DirichletCharacter) -> None:
    if chi.is_principal:
        raise PrincipalCharacterError(f"L(s, chi) has a pole at s=1 for the principal character mod {chi.q}.")


def _digamma_abs_err(q: int, psi_abs_sum: float, terms: int) -> float:
    return (DIGAMMA_REL_ERR + terms * _EPS) * psi_abs_sum / q


def l_one_digamma(chi: DirichletCharacter) -> LOneValue:
    _require_nonprincipal(chi)
    table = psi_table(chi.q)
    weights = chi.values()
    value = complex(-(weights @ table) / chi.q)
    abs_err = _digamma_abs_err(chi.q, float(np.abs(table).sum()), chi.q)
    return LOneValue(value, abs_err, LMethod.DIGAMMA)


@lru_cache(maxsize=16)
def _harmonic_by_residue(q: int, periods: int) -> np.ndarray:
    # H[c] = sum_{j < periods} 1 / (c + 1 + j q)
    grid = np.arange(1, periods * q + 1, dtype=float).reshape(periods, q)
    harmonic = np.sum(1.0 / grid[::-1], axis=0)
    harmonic.setflags(write=False)
    return harmonic


def l_one_series_oracle(chi: DirichletCharacter, N: int) -> LOneValue:
    """
    sum_{n <= N'} chi(n)/n plus the partial-summation estimate of the tail, where N' is
    N rounded down to a whole number of periods.

    With S(n) the character partial sums (periodic, S(N') = 0) the tail equals
    sum_{n > N'} S(n) / (n (n + 1)), which is mean(S) / (N' + 1) up to terms of order
    q max|S| / N'^2. The reported error 2 max|S| / (N' + 1) dominates both.
    """
    _require_nonprincipal(chi)
    q = chi.q
    if N < q:
        raise ValueError(f"Truncation N={N} must be at least the modulus {q}.")
    periods = N // q
    cutoff = periods * q
    values = chi.values()[np.arange(1, q + 1) % q]
    partial = complex(values @ _harmonic_by_residue(q, periods))
    running = np.cumsum(values)
    tail = complex(running.mean()) / (cutoff + 1)
    abs_err = 2 * float(np.abs(running).max()) / (cutoff + 1)
    logger.debug(f"Series oracle mod {q}: N'={cutoff}, tail={tail:.3e}")
    return LOneValue(partial + tail, abs_err, LMethod.SERIES)


def l_one(chi: DirichletCharacter) -> LOneValue:
    """L(1, chi) via the primitive part and the Euler factors at primes dividing q but not f."""
    _require_nonprincipal(chi)
    star = primitive_part(chi)
    if star.q == chi.q:
        return l_one_digamma(chi)
    base = l_one_digamma(star)
    factor = 1 + 0j
    for p in factorize(chi.q).primes:
        if star.q % p:
            factor *= 1 - evaluate(star, p) / p
    return LOneValue(base.value * factor, base.abs_err * abs(factor) + abs(base.value) * 4 * _EPS, LMethod.INDUCED)


@dataclass(frozen=True, eq=False)
class LOneTable:
    """L(1, chi) for every character mod q in the order of all_characters; entry 0 is NaN."""

    q: int
    values: np.ndarray
    abs_err: float


@lru_cache(maxsize=16)
def l_one_table(q: int) -> LOneTable:
    """
    All L(1, chi) mod q at once.

    Scattering psi(a/q) over the discrete-log lattice of (Z/qZ)* turns the character
    sums into one multidimensional inverse FFT:
        S[e] = sum_x V[x] exp(2 pi i sum_i e_i x_i / o_i) = prod(o) * ifftn(V)[e].
    """
    group = character_group(q)
    table = psi_table(q)
    units = np.flatnonzero(group.units)
    lattice = np.zeros(group.orders, dtype=float)
    lattice[tuple(group.dlog_table[units].T)] = table[units]
    sums = group.size * np.fft.ifftn(lattice).ravel()
    values = -sums / q
    values[0] = complex(np.nan, np.nan)
    values.setflags(write=False)
    psi_abs_sum = float(np.abs(table[units]).sum())
    abs_err = _digamma_abs_err(q, psi_abs_sum, 4 * max(1, math.ceil(math.log2(group.size))))
    logger.debug(f"Batch L(1, chi) mod {q}: {group.size} characters, abs_err={abs_err:.3e}")
    return LOneTable(q, values, abs_err)


def l_one_batch(chi: DirichletCharacter) -> LOneValue:
    """Single lookup in l_one_table, for callers that already hold the whole modulus."""
    _require_nonprincipal(chi)
    table = l_one_table(chi.q)
    index = int(np.ravel_multi_index(chi.exponents, chi.group.orders))
    return LOneValue(complex(table.values[index]), table.abs_err, LMethod.DIGAMMA)
