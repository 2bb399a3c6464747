"""
Run configuration for the command line and the tool server.

Defaults for threads, the golden directory and the log level come from the
environment, which the CLI populates from a .env file on start.
"""

import os
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from cyclomoment.numtheory.arith import primes_between
from cyclomoment.numtheory.characters import Parity
from cyclomoment.reports import OutputFormat

PACKAGED_GOLDEN_DIR = Path(__file__).parent / "data" / "golden"

# subcommands that take a modulus specification
MODULUS_COMMANDS = {"moments", "weighted-sum", "dual-norms", "sgp", "tail-profile", "orthogonality-check"}


def default_threads() -> int:
    return int(os.getenv("CYCLOMOMENT_THREADS", "1"))


def default_golden_dir() -> Path:
    configured = os.getenv("CYCLOMOMENT_GOLDEN_DIR")
    return Path(configured) if configured else PACKAGED_GOLDEN_DIR


def default_log_level() -> str:
    return os.getenv("CYCLOMOMENT_LOG_LEVEL", "WARNING").upper()


class RunConfig(BaseModel):
    subcommand: str
    q: Optional[int] = None
    p: Optional[int] = None
    k: Optional[int] = None
    primes_from: Optional[int] = None
    primes_to: Optional[int] = None
    parity: Parity = Parity.EVEN
    weighted: bool = False
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: int = Field(default_factory=default_threads, ge=1)
    format: OutputFormat = OutputFormat.JSON
    out: Optional[Path] = None
    skip_algebra: bool = False
    C: float = Field(default=1.0, gt=0)
    delta: float = Field(default=0.0, ge=0)
    r: float = Field(default=1.0, gt=0)
    E: int = Field(default=10, ge=0)
    l: int = Field(default=1, ge=1)
    X: float = Field(default=1e4, gt=1)
    eps_trunc: float = Field(default=1e-12, gt=0, lt=1)
    t_grid: List[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    lattice: Optional[Path] = None

    @model_validator(mode="after")
    def check_modulus_spec(self) -> "RunConfig":
        given = [
            self.q is not None,
            self.p is not None or self.k is not None,
            self.primes_from is not None or self.primes_to is not None,
        ]
        if self.subcommand in MODULUS_COMMANDS and sum(given) != 1:
            raise ValueError("Give exactly one of --q, --p/--k, or --primes-from/--primes-to.")
        if given[1] and (self.p is None or self.k is None):
            raise ValueError("--p and --k must be given together.")
        if given[2] and (self.primes_from is None or self.primes_to is None):
            raise ValueError("--primes-from and --primes-to must be given together.")
        return self

    def moduli(self) -> List[int]:
        if self.q is not None:
            return [self.q]
        if self.p is not None:
            return [self.p**self.k]
        if self.primes_from is not None:
            primes = primes_between(self.primes_from, self.primes_to)
            if not primes:
                raise ValueError(f"No primes in [{self.primes_from}, {self.primes_to}].")
            return primes
        return []
