"""Exception hierarchy shared by the library layers and the front-ends."""


class CyclomomentError(Exception):
    """Root of every error raised on purpose by cyclomoment."""


class InvalidModulusError(CyclomomentError, ValueError):
    """A modulus (or prime / exponent pair) outside the domain of an operation."""


class PrincipalCharacterError(CyclomomentError, ValueError):
    """L(1, chi) was requested for the principal character, where the series has a pole."""


class LatticeConditionError(CyclomomentError, ArithmeticError):
    """The Gram matrix of a lattice basis is singular or too badly conditioned to invert."""

    def __init__(self, q: int, condition: float):
        self.q = q
        self.condition = condition
        super().__init__(f"Gram matrix for q={q} is numerically singular (condition number {condition:.3e}).")


class GoldenMismatchError(CyclomomentError):
    """A recomputed regression value drifted away from its committed golden value."""

    def __init__(self, name: str, key: str, expected: float, actual: float):
        self.name = name
        self.key = key
        self.expected = expected
        self.actual = actual
        super().__init__(f"Golden value '{name}[{key}]' drifted: expected {expected!r}, got {actual!r}.")
