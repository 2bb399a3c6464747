"""
Elementary multiplicative number theory used by every other module.

All moduli handled here are desk-scale, so factorization is plain trial division.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import List, Optional, Tuple

import numpy as np

from cyclomoment.errors import InvalidModulusError

MAX_INPUT = 2**40


@dataclass(frozen=True)
class FactoredInteger:
    n: int
    factors: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if math.prod(p**e for p, e in self.factors) != self.n:
            raise ValueError(f"Factors {self.factors} do not multiply to {self.n}.")
        primes = [p for p, _ in self.factors]
        if primes != sorted(set(primes)) or any(e < 1 for _, e in self.factors):
            raise ValueError(f"Factors {self.factors} are not in canonical form.")

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def __repr__(self):
        return f"FactoredInteger(n={self.n}, factors={list(self.factors)})"


def _check_positive(n: int) -> None:
    if n < 1:
        raise InvalidModulusError(f"Expected a positive integer, got {n}.")
    if n > MAX_INPUT:
        raise InvalidModulusError(f"{n} exceeds the supported range (at most 2^40).")


@lru_cache(maxsize=4096)
def factorize(n: int) -> FactoredInteger:
    _check_positive(n)
    factors = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        factors.append((m, 1))
    return FactoredInteger(n, tuple(factors))


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n).factors == ((n, 1),)


def prime_power(n: int) -> Optional[Tuple[int, int]]:
    """Returns (p, k) when n = p^k with k >= 1, otherwise None."""
    if n < 2:
        return None
    factors = factorize(n).factors
    return factors[0] if len(factors) == 1 else None


def primes_between(lo: int, hi: int) -> List[int]:
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


def euler_phi(n: int) -> int:
    result = 1
    for p, e in factorize(n).factors:
        result *= p ** (e - 1) * (p - 1)
    return result


def moebius(n: int) -> int:
    factors = factorize(n).factors
    if any(e > 1 for _, e in factors):
        return 0
    return -1 if len(factors) % 2 else 1


def divisors(n: int) -> List[int]:
    factors = factorize(n).factors
    result = [
        math.prod(p**e for (p, _), e in zip(factors, exps))
        for exps in product(*[range(e + 1) for _, e in factors])
    ]
    return sorted(result)


def phi_star(d: int) -> int:
    """Number of primitive characters modulo d."""
    return sum(euler_phi(l) * moebius(d // l) for l in divisors(d))


def multiplicative_order(a: int, n: int) -> int:
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not a unit modulo {n}.")
    phi = euler_phi(n)
    order = phi
    for p, _ in factorize(phi).factors:
        while order % p == 0 and pow(a, order // p, n) == 1:
            order //= p
    return order


def smallest_primitive_root(p: int, k: int) -> int:
    """Smallest primitive root modulo p^k for an odd prime p."""
    modulus = p**k
    phi = euler_phi(modulus)
    cofactors = [phi // r for r in factorize(phi).primes]
    for g in range(2, modulus):
        if g % p and all(pow(g, c, modulus) != 1 for c in cofactors):
            return g
    raise ValueError(f"No primitive root modulo {p}^{k}.")


def _crt_lift(residue: int, modulus: int, q: int) -> int:
    # unique x mod q with x = residue (mod modulus) and x = 1 (mod q / modulus)
    other = q // modulus
    if other == 1:
        return residue % q
    t = ((residue - 1) * pow(other, -1, modulus)) % modulus
    return (1 + other * t) % q


@lru_cache(maxsize=1024)
def _unit_group_generators(q: int) -> Tuple[Tuple[int, int], ...]:
    generators = []
    for p, e in factorize(q).factors:
        modulus = p**e
        if p == 2:
            if e == 2:
                generators.append((_crt_lift(3, modulus, q), 2))
            elif e >= 3:
                generators.append((_crt_lift(modulus - 1, modulus, q), 2))
                generators.append((_crt_lift(5, modulus, q), 2 ** (e - 2)))
        else:
            g = smallest_primitive_root(p, e)
            generators.append((_crt_lift(g, modulus, q), euler_phi(modulus)))
    return tuple(generators)


def unit_group_generators(q: int) -> List[Tuple[int, int]]:
    """
    Canonical decomposition of (Z/qZ)* into cyclic factors.

    Odd prime powers contribute their smallest primitive root; 4 contributes -1;
    2^k with k >= 3 contributes (-1, order 2) and (5, order 2^(k-2)). Each generator
    is lifted by CRT so that it is 1 modulo the other prime-power components.
    """
    if q < 3:
        raise InvalidModulusError(f"The unit group modulo {q} is trivial; need q >= 3.")
    _check_positive(q)
    return list(_unit_group_generators(q))


def moebius_sieve(limit: int) -> np.ndarray:
    """mu(n) for 0 <= n <= limit as an int8 array (entry 0 is unused and set to 0)."""
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    root = math.isqrt(limit)
    for p in range(2, root + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    for p in np.flatnonzero(sieve):
        mu[p::p] *= -1
    for p in np.flatnonzero(sieve[: root + 1]):
        mu[p * p::p * p] = 0
    return mu
