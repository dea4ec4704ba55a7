from dataclasses import dataclass

import numpy as np

from crnase.channel.base import BaseChannel
from crnase.core import DomainError
from crnase.utils import ArrayLike, as_output, db_to_linear


def _non_negative(gamma: ArrayLike) -> np.ndarray:
    values = np.asarray(gamma, dtype=float)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise DomainError(f"SNR must be non-negative, got {gamma}")
    return values


@dataclass(frozen=True)
class RayleighChannel(BaseChannel):
    """Rayleigh fading seen as an exponential law of the received SNR.

    p(gamma) = exp(-gamma / gamma_bar) / gamma_bar
    """

    gamma_bar: float

    def __post_init__(self):
        if not self.gamma_bar > 0 or not np.isfinite(self.gamma_bar):
            raise DomainError(f"mean SNR must be positive and finite, got {self.gamma_bar}")

    @classmethod
    def from_db(cls, gamma_bar_db: float) -> "RayleighChannel":
        return cls(db_to_linear(gamma_bar_db))

    @property
    def mean(self) -> float:
        return self.gamma_bar

    def pdf(self, gamma: ArrayLike) -> ArrayLike:
        values = _non_negative(gamma)
        return as_output(np.exp(-values / self.gamma_bar) / self.gamma_bar)

    def cdf(self, gamma: ArrayLike) -> ArrayLike:
        values = _non_negative(gamma)
        return as_output(-np.expm1(-values / self.gamma_bar))

    def sf(self, gamma: ArrayLike) -> ArrayLike:
        values = _non_negative(gamma)
        return as_output(np.exp(-values / self.gamma_bar))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # inverse CDF; u in [0, 1) keeps log1p(-u) finite
        u = rng.random(n)
        return -self.gamma_bar * np.log1p(-u)
