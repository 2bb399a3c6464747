"""
Dirichlet characters modulo q.

A character is stored as an integer exponent vector on the canonical generators of
(Z/qZ)*: chi(g_i) = exp(2 pi i e_i / o_i). Values are computed from exact integer
phases in units of 1/L, where L is the exponent (lcm of the orders) of the group,
so identities such as chi(-1) = +-1 hold exactly.
"""

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import List, Tuple

import numpy as np
from mcp.server.fastmcp.utilities.logging import get_logger

from cyclomoment.errors import InvalidModulusError
from cyclomoment.numtheory.arith import divisors, euler_phi, moebius, unit_group_generators

logger = get_logger(__name__)


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1


@dataclass(frozen=True, eq=False)
class CharacterGroup:
    """Structure of (Z/qZ)* with its discrete-log table; immutable after construction."""

    q: int
    generators: Tuple[Tuple[int, int], ...]
    dlog_table: np.ndarray = field(repr=False)
    units: np.ndarray = field(repr=False)
    neg_one_exponents: Tuple[int, ...]

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(o for _, o in self.generators)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.generators else 1

    @cached_property
    def phase_weights(self) -> np.ndarray:
        """L / o_i for each generator, so that sum_i e_i x_i L/o_i is the phase in units of 1/L."""
        return np.array([self.exponent // o for o in self.orders], dtype=np.int64)

    @cached_property
    def exponent_lattice(self) -> np.ndarray:
        """All exponent vectors in lexicographic order (last generator fastest); row 0 is zero."""
        if not self.generators:
            return np.zeros((1, 0), dtype=np.int64)
        grid = np.indices(self.orders, dtype=np.int64)
        return grid.reshape(self.rank, -1).T.copy()

    def is_unit(self, n: int) -> bool:
        return bool(self.units[n % self.q])

    def dlog(self, n: int) -> Tuple[int, ...]:
        if not self.is_unit(n):
            raise ValueError(f"{n} is not a unit modulo {self.q}.")
        return tuple(int(x) for x in self.dlog_table[n % self.q])


@lru_cache(maxsize=256)
def _unit_group(q: int) -> CharacterGroup:
    # q = 1 is allowed here: it hosts the trivial character of conductor 1
    if q == 1:
        return CharacterGroup(
            q=1,
            generators=(),
            dlog_table=_frozen(np.zeros((1, 0), dtype=np.int64)),
            units=_frozen(np.ones(1, dtype=bool)),
            neg_one_exponents=(),
        )
    generators = tuple(unit_group_generators(q))
    orders = [o for _, o in generators]
    residues = np.ones(1, dtype=np.int64)
    for g, o in generators:
        powers = np.array([pow(g, x, q) for x in range(o)], dtype=np.int64)
        residues = ((residues[:, None] * powers[None, :]) % q).ravel()
    if len(np.unique(residues)) != euler_phi(q):
        raise RuntimeError(f"Generators {generators} do not generate (Z/{q}Z)*.")

    exponents = np.indices(orders, dtype=np.int64).reshape(len(orders), -1).T
    dlog_table = np.full((q, len(orders)), -1, dtype=np.int64)
    dlog_table[residues] = exponents
    units = np.zeros(q, dtype=bool)
    units[residues] = True
    logger.debug(f"Built unit group mod {q}: generators={generators}")
    return CharacterGroup(
        q=q,
        generators=generators,
        dlog_table=_frozen(dlog_table),
        units=_frozen(units),
        neg_one_exponents=tuple(int(x) for x in dlog_table[q - 1]),
    )


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def character_group(q: int) -> CharacterGroup:
    if q < 3:
        raise InvalidModulusError(f"Character groups are built for q >= 3, got {q}.")
    return _unit_group(q)


@dataclass(frozen=True)
class DirichletCharacter:
    q: int
    exponents: Tuple[int, ...]
    group: CharacterGroup = field(compare=False, repr=False)

    @classmethod
    def of(cls, group: CharacterGroup, exponents) -> "DirichletCharacter":
        if len(exponents) != group.rank:
            raise ValueError(f"Expected {group.rank} exponents for modulus {group.q}, got {len(exponents)}.")
        reduced = tuple(int(e) % o for e, o in zip(exponents, group.orders))
        return cls(group.q, reduced, group)

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @cached_property
    def _weights(self) -> np.ndarray:
        return np.array(self.exponents, dtype=np.int64) * self.group.phase_weights

    def phase(self, n: int) -> int:
        """chi(n) = exp(2 pi i phase / L) for a unit n."""
        x = np.array(self.group.dlog(n), dtype=np.int64)
        return int(x @ self._weights) % self.group.exponent

    def phases(self) -> np.ndarray:
        """Phases for all residues 0..q-1; -1 marks residues that are not units."""
        table = (self.group.dlog_table @ self._weights) % self.group.exponent
        return np.where(self.group.units, table, -1)

    def values(self) -> np.ndarray:
        phases = self.phases()
        angles = 2j * np.pi * phases / self.group.exponent
        return np.where(phases >= 0, np.exp(angles), 0)

    @cached_property
    def parity(self) -> Parity:
        if self.q == 1:
            return Parity.EVEN
        return Parity.EVEN if self.phase(-1) == 0 else Parity.ODD

    @cached_property
    def conductor(self) -> int:
        return conductor(self)

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter.of(self.group, [-e for e in self.exponents])


def _unit_root(numerator: int, denominator: int) -> complex:
    frac = Fraction(numerator, denominator)
    if frac.denominator in (1, 2, 4):
        return (1 + 0j, 1j, -1 + 0j, -1j)[(4 * frac.numerator // frac.denominator) % 4]
    return cmath.exp(2j * math.pi * frac.numerator / frac.denominator)


def all_characters(group: CharacterGroup) -> List[DirichletCharacter]:
    return [DirichletCharacter(group.q, tuple(int(e) for e in row), group) for row in group.exponent_lattice]


def evaluate(chi: DirichletCharacter, n: int) -> complex:
    if not chi.group.is_unit(n):
        return 0
    return _unit_root(chi.phase(n), chi.group.exponent)


@lru_cache(maxsize=4096)
def kernel_generators(q: int, f: int) -> Tuple[int, ...]:
    """
    A generating set of the kernel of reduction (Z/qZ)* -> (Z/fZ)*.

    Elements n = 1 (mod f) are taken in increasing order and kept when they are not
    already in the subgroup generated so far.
    """
    if q % f:
        raise ValueError(f"{f} does not divide {q}.")
    group = _unit_group(q)
    target = group.size // euler_phi(f)
    members = np.zeros(q, dtype=bool)
    members[1 % q] = True
    size = 1
    generators = []
    for n in range(1, q):
        if size == target:
            break
        if n % f != 1 % f or not group.units[n] or members[n]:
            continue
        generators.append(n)
        current = np.flatnonzero(members)
        power = n
        while not members[power]:
            members[(current * power) % q] = True
            power = power * n % q
        size = int(members.sum())
    return tuple(generators)


def conductor(chi: DirichletCharacter) -> int:
    for f in divisors(chi.q):
        if all(chi.phase(n) == 0 for n in kernel_generators(chi.q, f)):
            return f
    return chi.q


def primitive_part(chi: DirichletCharacter) -> DirichletCharacter:
    f = chi.conductor
    if f == chi.q:
        return chi
    target = _unit_group(f)
    L = chi.group.exponent
    exponents = []
    for g, order in target.generators:
        lift = g
        while math.gcd(lift, chi.q) != 1:
            lift += f
        numerator = chi.phase(lift) * order
        if numerator % L:
            raise RuntimeError(f"Character {chi} is not induced from modulus {f}.")
        exponents.append(numerator // L)
    return DirichletCharacter.of(target, exponents)


@dataclass(frozen=True, eq=False)
class CharacterTable:
    """Batch data for every character mod q, rows in the order of all_characters."""

    group: CharacterGroup
    exponents: np.ndarray = field(repr=False)
    even: np.ndarray = field(repr=False)
    conductors: np.ndarray = field(repr=False)

    @property
    def nonprincipal(self) -> np.ndarray:
        mask = np.ones(len(self.exponents), dtype=bool)
        mask[0] = False
        return mask

    def parity_mask(self, parity: Parity) -> np.ndarray:
        return self.even if parity is Parity.EVEN else ~self.even

    def phases_at(self, n: int) -> np.ndarray:
        x = np.array(self.group.dlog(n), dtype=np.int64)
        return ((self.exponents * self.group.phase_weights) @ x) % self.group.exponent


@lru_cache(maxsize=32)
def character_table(q: int) -> CharacterTable:
    group = character_group(q)
    exponents = group.exponent_lattice
    weighted = exponents * group.phase_weights
    L = group.exponent
    even = (weighted @ np.array(group.neg_one_exponents, dtype=np.int64)) % L == 0

    conductors = np.zeros(len(exponents), dtype=np.int64)
    for f in divisors(q):
        pending = conductors == 0
        if not pending.any():
            break
        gens = kernel_generators(q, f)
        if gens:
            kernel_logs = group.dlog_table[list(gens)]
            trivial = np.all((weighted @ kernel_logs.T) % L == 0, axis=1)
        else:
            trivial = np.ones(len(exponents), dtype=bool)
        conductors[pending & trivial] = f
    logger.debug(f"Character table mod {q}: {len(exponents)} characters, {int(even.sum())} even")
    return CharacterTable(group, _frozen(exponents), _frozen(even), _frozen(conductors))


def orthogonality_lhs(q: int, weighted: int, parity_bit: int, n1: int, n2: int) -> float:
    """
    Sum over nonprincipal chi mod q with chi(-1) = (-1)^parity_bit of
    chi(n1) conj(chi(n2)) / f_chi^weighted. Zero when n1 n2 is not coprime to q.
    """
    if math.gcd(n1 * n2, q) != 1:
        return 0.0
    table = character_table(q)
    L = table.group.exponent
    phases = (table.phases_at(n1) - table.phases_at(n2)) % L
    parity = Parity.EVEN if parity_bit == 0 else Parity.ODD
    mask = table.nonprincipal & table.parity_mask(parity)
    terms = np.exp(2j * np.pi * phases[mask] / L) / table.conductors[mask].astype(float) ** weighted
    imaginary = math.fsum(terms.imag)
    if abs(imaginary) > 1e-9:
        logger.warning(f"Orthogonality sum mod {q} has imaginary residue {imaginary:.3e}")
    return math.fsum(terms.real)


def orthogonality_rhs(q: int, weighted: int, parity_bit: int, n1: int, n2: int) -> float:
    """Closed divisor-sum form of orthogonality_lhs, evaluated in exact rational arithmetic."""
    if math.gcd(n1 * n2, q) != 1:
        raise ValueError(f"The divisor-sum identity needs gcd(n1 n2, q) = 1; got n1={n1}, n2={n2}, q={q}.")
    sign = -1 if parity_bit else 1
    total = Fraction(0)
    for d in divisors(q)[1:]:
        same = sum(euler_phi(l) * moebius(d // l) for l in divisors(d) if (n1 - n2) % l == 0)
        opposite = sum(euler_phi(l) * moebius(d // l) for l in divisors(d) if (n1 + n2) % l == 0)
        total += Fraction(same + sign * opposite, d**weighted)
    return float(total / 2)


def count_by_conductor(q: int) -> dict:
    table = character_table(q)
    values, counts = np.unique(table.conductors, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
