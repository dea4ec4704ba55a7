from typing import Optional

import numpy as np

from crnase.core import DomainError
from crnase.utils import ArrayLike


class BaseChannel:
    """Distribution of the received SNR (linear) of one link."""

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def pdf(self, gamma: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def cdf(self, gamma: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def sf(self, gamma: ArrayLike) -> ArrayLike:
        """Survival function 1 - cdf, kept separate to avoid cancellation in tails."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError


class ChannelSampleStream:
    """Reproducible stream of SNR draws from ``channel``.

    A stream is consumed sequentially; build one stream per consumer.
    """

    def __init__(self, channel: BaseChannel, seed: Optional[int] = None):
        self.channel = channel
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.drawn: int = 0

    def sample(self, n: int) -> np.ndarray:
        if n < 1:
            raise DomainError(f"sample size must be at least 1, got {n}")
        draws = self.channel.sample(self.rng, n)
        self.drawn += n
        return draws

    def reset(self):
        self.rng = np.random.default_rng(self.seed)
        self.drawn = 0
