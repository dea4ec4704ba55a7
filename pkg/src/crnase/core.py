from dataclasses import dataclass
from enum import Enum
from typing import Optional


class CrnError(Exception):
    pass


class DomainError(CrnError, ValueError):
    pass


class UnsupportedLadder(DomainError):
    pass


class NumericalError(CrnError):
    pass


class NoSignChange(NumericalError):
    def __init__(self, message: str, side: Optional[str] = None):
        self.side: Optional[str] = side
        super().__init__(message)


class NonConvergence(NumericalError):
    pass


class ParseError(CrnError):
    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno: Optional[int] = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ConfigValidationError(CrnError):
    def __init__(self, field: str, message: str):
        self.field: str = field
        super().__init__(f"{field}: {message}")


class GridPointError(CrnError):
    def __init__(self, x_db: float, cause: Exception):
        self.x_db: float = x_db
        self.cause: Exception = cause
        super().__init__(f"grid point x = {x_db} dB failed: {cause}")


class RateKind(Enum):
    CR = "cr"
    DR = "dr"


class CrnType(Enum):
    OSA = "osa"
    SS = "ss"
    SENSING = "sensing"


class RateModel(Enum):
    """How the DR ASE of a shared band credits interference-truncated slots."""

    ACHIEVED = "achieved"
    NOMINAL = "nominal"


@dataclass(frozen=True)
class Tolerance:
    abs_residual: float = 1e-10
    rel_value: float = 1e-9
    max_iterations: int = 200

    def __post_init__(self):
        if self.abs_residual <= 0 or self.rel_value <= 0:
            raise DomainError("tolerances must be strictly positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty bracket [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class CutoffSolution:
    """Solved cutoff SNR (linear) of a power-allocation policy.

    ``power_constrained`` is False when the average power budget cannot be
    exhausted by any cutoff above the solver floor; ``residual`` is then the
    (negative) slack of the power constraint at the returned cutoff.
    """

    cutoff: float
    residual: float
    iterations: int
    power_constrained: bool = True

    @property
    def expected_power(self) -> float:
        return 1.0 + self.residual
