"""Adaptive MQAM: the power gap K, the continuous-rate law and the discrete
constellation ladder with its fading regions."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from crnase.core import DomainError, RateKind, UnsupportedLadder
from crnase.utils import ArrayLike, as_output

SUPPORTED_REGION_COUNTS = (3, 4, 5)


@dataclass(frozen=True)
class BerTarget:
    ber: float

    def __post_init__(self):
        if not 0.0 < self.ber < 0.2:
            raise DomainError(f"target BER must lie in (0, 0.2), got {self.ber}")


def power_gap(ber: Union[float, BerTarget]) -> float:
    """K = -1.5 / ln(5 BER), the SNR penalty of uncoded MQAM at the target BER."""
    value = ber.ber if isinstance(ber, BerTarget) else float(ber)
    if not value > 0 or 5.0 * value >= 1.0:
        raise DomainError(f"power gap undefined for BER {value}: needs 0 < 5 * BER < 1")
    return -1.5 / math.log(5.0 * value)


def cr_constellation(gamma: ArrayLike, power_ratio: ArrayLike, K: float) -> ArrayLike:
    """Constellation size M = 1 + K * gamma * P(gamma) / P_bar supported at the target BER."""
    gamma = np.asarray(gamma, dtype=float)
    return as_output(1.0 + K * gamma * np.asarray(power_ratio, dtype=float))


@dataclass(frozen=True)
class ConstellationLadder:
    """Constellation sizes M_0 = 0, M_1 = 2, M_j = 4 ** (j - 1)."""

    sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 3:
            raise DomainError(f"a ladder needs at least {{0, 2, 4}}, got {sizes}")
        expected = (0, 2) + tuple(2 ** (2 * (j - 1)) for j in range(2, len(sizes)))
        if sizes != expected:
            raise DomainError(f"ladder must be {expected}, got {sizes}")

    @property
    def n_regions(self) -> int:
        return len(self.sizes)

    @property
    def active_sizes(self) -> np.ndarray:
        """M_1..M_N as floats."""
        return np.asarray(self.sizes[1:], dtype=float)

    @property
    def bits(self) -> np.ndarray:
        """Bits per symbol of every region, 0 for the silent region."""
        return np.concatenate(([0.0], np.log2(self.active_sizes)))

    def region_boundaries(self, gamma_star: float) -> np.ndarray:
        """gamma_j = gamma_star * M_j for j = 1..N, then +inf."""
        if not gamma_star > 0:
            raise DomainError(f"gamma_star must be positive, got {gamma_star}")
        return np.concatenate((gamma_star * self.active_sizes, [math.inf]))

    def region_index(self, gamma: ArrayLike, gamma_star: float) -> Union[int, np.ndarray]:
        """Region of ``gamma``; a point on a boundary belongs to the upper region."""
        boundaries = self.region_boundaries(gamma_star)[:-1]
        index = np.searchsorted(boundaries, np.asarray(gamma, dtype=float), side="right")
        if np.ndim(index) == 0:
            return int(index)
        return index

    def __str__(self):
        return "{" + ",".join(str(m) for m in self.sizes) + "}"


def dr_ladder(n_regions: int) -> ConstellationLadder:
    if n_regions not in SUPPORTED_REGION_COUNTS:
        raise UnsupportedLadder(
            f"only {SUPPORTED_REGION_COUNTS} fading regions are supported, got {n_regions}"
        )
    return ConstellationLadder((0, 2) + tuple(4 ** (j - 1) for j in range(2, n_regions)))


def region_boundaries(ladder: ConstellationLadder, gamma_star: float) -> np.ndarray:
    return ladder.region_boundaries(gamma_star)


@dataclass(frozen=True)
class ModulationScheme:
    kind: RateKind
    ber: BerTarget
    ladder: Optional[ConstellationLadder] = None

    def __post_init__(self):
        if not isinstance(self.ber, BerTarget):
            object.__setattr__(self, "ber", BerTarget(float(self.ber)))
        if self.kind is RateKind.DR and self.ladder is None:
            raise DomainError("a discrete-rate scheme needs a constellation ladder")
        if self.kind is RateKind.CR and self.ladder is not None:
            raise DomainError("a continuous-rate scheme takes no constellation ladder")

    @classmethod
    def cr(cls, ber: float) -> "ModulationScheme":
        return cls(RateKind.CR, BerTarget(ber))

    @classmethod
    def dr(cls, ber: float, n_regions: int) -> "ModulationScheme":
        return cls(RateKind.DR, BerTarget(ber), dr_ladder(n_regions))

    @classmethod
    def from_name(cls, name: str, ber: float) -> "ModulationScheme":
        """``cr``, ``dr3``, ``dr4`` or ``dr5``."""
        if name == "cr":
            return cls.cr(ber)
        if name.startswith("dr") and name[2:].isdigit():
            return cls.dr(ber, int(name[2:]))
        raise DomainError(f"unknown modulation scheme {name!r}")

    @property
    def K(self) -> float:
        return power_gap(self.ber)

    @property
    def name(self) -> str:
        if self.kind is RateKind.CR:
            return "cr"
        return f"dr{self.ladder.n_regions}"

    def __str__(self):
        return f"{self.name.upper()} (BER={self.ber.ber:g})"
