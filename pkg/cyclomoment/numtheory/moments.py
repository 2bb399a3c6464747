"""
Negative square moments of L(1, chi) and the weighted Moebius double sum behind them.
"""

import math
from typing import Optional, Tuple

import numpy as np
from mcp.server.fastmcp.utilities.logging import get_logger
from pydantic import BaseModel
from scipy.special import zeta

from cyclomoment.errors import InvalidModulusError
from cyclomoment.numtheory.arith import divisors, euler_phi, factorize, is_prime, moebius_sieve, phi_star, prime_power
from cyclomoment.numtheory.characters import Parity, character_table
from cyclomoment.numtheory.lfunc import l_one_table

logger = get_logger(__name__)

# zeta(2) / (2 zeta(4)) = 15 / (2 pi^2)
MAIN_CONSTANT = float(zeta(2) / (2 * zeta(4)))
DEFAULT_EPS_TRUNC = 1e-12


class MomentReport(BaseModel):
    kind: str = "moment"
    q: int
    parity: Parity
    weighted: int
    sum: float
    main_term: float
    abs_err_num: float
    rel_dev: float
    error_envelope: Optional[float] = None


def _check_modulus(q: int) -> None:
    if q < 3:
        raise InvalidModulusError(f"Moments are defined for q >= 3, got {q}.")


def _euler_damping(q: int) -> float:
    return math.prod(1 / (1 + p**-2) for p in factorize(q).primes)


def _moment_terms(q: int, parity: Parity, weighted: int, mask: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """Sum of f^-weighted |L(1, chi)|^-2 over the selected characters, with its error bound."""
    _check_modulus(q)
    table = character_table(q)
    values = l_one_table(q)
    selected = table.nonprincipal & table.parity_mask(parity)
    if mask is not None:
        selected &= mask
    if not selected.any():
        return 0.0, 0.0
    moduli = np.abs(values.values[selected])
    scale = table.conductors[selected].astype(float) ** -weighted
    terms = scale / moduli**2
    # d(|L|^-2) = 2 |dL| / |L|^3
    propagated = math.fsum(2 * values.abs_err * scale / moduli**3)
    total = math.fsum(terms)
    return total, propagated + len(terms) * np.finfo(float).eps * total


def negative_moment(q: int, parity: Parity, weighted: int) -> float:
    """
    Sum over nonprincipal chi mod q of the given parity of f_chi^-weighted / |L(1, chi)|^2.

    Each term depends on chi only through |L(1, chi)|, so conjugate characters contribute
    identical real terms and the sum is real by construction.
    """
    return _moment_terms(q, parity, weighted)[0]


def main_term_even(q: int) -> float:
    _check_modulus(q)
    return MAIN_CONSTANT * _euler_damping(q) * euler_phi(q)


def main_term_conductor(p: int, k: int) -> float:
    if not is_prime(p):
        raise InvalidModulusError(f"The conductor-weighted main term needs a prime p, got {p}.")
    if k < 1:
        raise InvalidModulusError(f"The exponent k must be at least 1, got {k}.")
    return MAIN_CONSTANT * ((p - 1) ** 2 / (p**2 + 1)) * k


def divisor_main_term(q: int, weighted: int) -> float:
    """Main term in divisor-sum form, valid for every q and both weightings."""
    _check_modulus(q)
    total = math.fsum(phi_star(d) / d**weighted for d in divisors(q)[1:])
    return MAIN_CONSTANT * _euler_damping(q) * total


def conductor_error_envelope(p: int, k: int) -> float:
    """Order of magnitude of the error terms in the conductor-weighted formula for q = p^k."""
    log_p = math.log(p)
    return 1 / log_p + k**2 * log_p**2 * (math.log(k) + math.log(log_p)) ** 2 / p


def trivial_conductor_bound(p: int, k: int) -> float:
    """Bound on the conductor-weighted moment from pointwise lower bounds of L(1, chi) alone."""
    return k**3 * math.log(p) ** 2


def moment_report(q: int, parity: Parity, weighted: int) -> MomentReport:
    envelope = None
    if weighted:
        power = prime_power(q)
        if power is None:
            raise InvalidModulusError(f"The conductor-weighted main term is only known for prime powers, got q={q}.")
        main_term = main_term_conductor(*power)
        envelope = conductor_error_envelope(*power)
    else:
        main_term = main_term_even(q)
    total, abs_err = _moment_terms(q, parity, weighted)
    logger.info(f"Moment q={q} parity={parity.value} weighted={weighted}: sum={total:.6g} main={main_term:.6g}")
    return MomentReport(
        q=q,
        parity=parity,
        weighted=weighted,
        sum=total,
        main_term=main_term,
        abs_err_num=abs_err,
        rel_dev=abs(total - main_term) / main_term,
        error_envelope=envelope,
    )


def inverse_conductor_sum(q: int, parity: Parity) -> float:
    table = character_table(q)
    selected = table.nonprincipal & table.parity_mask(parity)
    return math.fsum(1 / table.conductors[selected].astype(float))


def quadratic_split(q: int, parity: Parity, weighted: int) -> Tuple[float, float]:
    """(contribution of real characters, contribution of all other characters) to the moment."""
    table = character_table(q)
    real = np.all((2 * table.exponents) % np.array(table.group.orders, dtype=np.int64) == 0, axis=1)
    quadratic, _ = _moment_terms(q, parity, weighted, real)
    rest, _ = _moment_terms(q, parity, weighted, ~real)
    return quadratic, rest


def moebius_main_term(q: int) -> float:
    """zeta(2)/zeta(4) * prod_{p | q} (1 + p^-2)^-1; q = 1 gives the bare constant."""
    return 2 * MAIN_CONSTANT * _euler_damping(q)


def weighted_moebius_split(q: int, l: int, X: float, eps_trunc: float = DEFAULT_EPS_TRUNC) -> Tuple[float, float]:
    """
    Diagonal and off-diagonal parts of

        sum_{m, n >= 1, (mn, q) = 1, m = +-n mod l} mu(m) mu(n) / (mn) * exp(-mn / X).

    Pairs are taken with m <= n, off-diagonal ones doubled, and the sum stops at
    mn > X ln(1/eps_trunc) where the weight drops below eps_trunc.
    """
    if q < 1 or l < 1:
        raise ValueError(f"q and l must be positive, got q={q}, l={l}.")
    if not X > 1:
        raise ValueError(f"X must exceed 1, got {X}.")
    if not 0 < eps_trunc < 1:
        raise ValueError(f"eps_trunc must lie in (0, 1), got {eps_trunc}.")

    limit = int(X * math.log(1 / eps_trunc))
    mu = moebius_sieve(limit).astype(float)
    n_all = np.arange(limit + 1)
    mu[np.gcd(n_all, q) != 1] = 0.0
    logger.debug(f"Moebius double sum q={q} l={l} X={X:g}: {limit} terms per row")

    diagonal = []
    off_diagonal = []
    for m in range(1, math.isqrt(limit) + 1):
        if mu[m] == 0:
            continue
        diagonal.append(mu[m] ** 2 / m**2 * math.exp(-m * m / X))
        n = n_all[m + 1 : limit // m + 1]
        coeffs = mu[m + 1 : limit // m + 1]
        congruent = ((n - m) % l == 0) | ((n + m) % l == 0)
        terms = coeffs[congruent] * np.exp(-m * n[congruent] / X) / n[congruent]
        off_diagonal.append(2 * mu[m] / m * float(terms.sum()))
    return math.fsum(diagonal), math.fsum(off_diagonal)


def weighted_moebius_sum(q: int, l: int, X: float, eps_trunc: float = DEFAULT_EPS_TRUNC) -> float:
    diagonal, off_diagonal = weighted_moebius_split(q, l, X, eps_trunc)
    return diagonal + off_diagonal


def moebius_envelope(l: int, X: float) -> float:
    """X^-1/2 + (ln X)^2 / l, the shape of the error in the double-sum estimate."""
    return X**-0.5 + math.log(X) ** 2 / l
