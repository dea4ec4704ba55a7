"""Sensing-based spectrum sharing.

An energy detector decides each frame whether the primary is active. When the
band is sensed idle the secondary uses the uncapped policy P0; when it is sensed
busy it uses the interference-capped policy P1. Both share one cutoff, set by
the outcome-weighted average power budget. Sensing time and threshold are
fixed inputs.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from crnase.core import CutoffSolution, DomainError, RateKind, Tolerance
from crnase.io.base import PredefinedLoggerCrnIO
from crnase.numerics import DEFAULT_TOLERANCE, gaussian_q, gaussian_q_inverse
from crnase.osa import solve_budget_cutoff
from crnase.spectrum_sharing import (
    SsScenario,
    ase_ss,
    expected_power_ss,
    instantaneous_rate_ss,
    mean_power_given_ss,
    power_policy_ss_cr,
    power_policy_ss_dr,
)
from crnase.utils import ArrayLike

stdio = PredefinedLoggerCrnIO(__name__)

DEFAULT_SAMPLING_FREQUENCY = 6e6
PROBABILITY_SLACK = 1e-9


@dataclass(frozen=True)
class SensingConfig:
    """Energy-detector and frame parameters.

    ``eta_norm`` is the detection threshold normalised by the noise power. When
    ``detection`` is given instead, the threshold is the one that achieves it.
    Times are in seconds, ``sensed_snr`` is linear.
    """

    tau: float
    frame: float
    pi0: float
    sensed_snr: float
    fs: float = DEFAULT_SAMPLING_FREQUENCY
    eta_norm: Optional[float] = None
    detection: Optional[float] = None
    sigma_n: float = 1.0
    pi1: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.tau < self.frame:
            raise DomainError(
                f"sensing time must satisfy 0 < tau < T, got tau={self.tau}, T={self.frame}"
            )
        if not self.fs > 0:
            raise DomainError(f"sampling frequency must be positive, got {self.fs}")
        if not self.sigma_n > 0:
            raise DomainError(f"noise standard deviation must be positive, got {self.sigma_n}")
        if self.sensed_snr < 0:
            raise DomainError(f"sensed SNR must be non-negative, got {self.sensed_snr}")
        if not 0.0 <= self.pi0 <= 1.0:
            raise DomainError(f"pi0 must be a probability, got {self.pi0}")
        if self.pi1 is None:
            object.__setattr__(self, "pi1", 1.0 - self.pi0)
        elif abs(self.pi0 + self.pi1 - 1.0) > PROBABILITY_SLACK:
            raise DomainError(f"pi0 + pi1 must be 1, got {self.pi0} + {self.pi1}")
        if (self.eta_norm is None) == (self.detection is None):
            raise DomainError("give exactly one of eta_norm and detection")
        if self.detection is not None and not 0.0 < self.detection < 1.0:
            raise DomainError(f"detection probability must lie in (0, 1), got {self.detection}")

    @property
    def samples(self) -> float:
        """N = tau * fs."""
        return self.tau * self.fs

    @property
    def threshold(self) -> float:
        if self.eta_norm is not None:
            return self.eta_norm
        return threshold_for_detection(self, self.detection)

    @property
    def energy_threshold(self) -> float:
        return self.threshold * self.sigma_n**2


def prob_detection(cfg: SensingConfig) -> float:
    """d = Q((eta - S - 1) sqrt(N / (2 S + 1)))."""
    if cfg.detection is not None:
        return cfg.detection
    S = cfg.sensed_snr
    return float(gaussian_q((cfg.eta_norm - S - 1.0) * math.sqrt(cfg.samples / (2.0 * S + 1.0))))


def prob_false_alarm(cfg: SensingConfig) -> float:
    """f = Q((eta - 1) sqrt(N))."""
    return float(gaussian_q((cfg.threshold - 1.0) * math.sqrt(cfg.samples)))


def threshold_for_detection(cfg: SensingConfig, target_d: float) -> float:
    if not 0.0 < target_d < 1.0:
        raise DomainError(f"target detection probability must lie in (0, 1), got {target_d}")
    S = cfg.sensed_snr
    return S + 1.0 + gaussian_q_inverse(target_d) * math.sqrt((2.0 * S + 1.0) / cfg.samples)


@dataclass(frozen=True)
class SensingOutcomeWeights:
    w_idle_correct: float
    w_false_alarm: float
    w_missed: float
    w_detect: float

    def __post_init__(self):
        weights = (self.w_idle_correct, self.w_false_alarm, self.w_missed, self.w_detect)
        if any(w < 0 or w > 1 for w in weights):
            raise DomainError(f"outcome weights must be probabilities, got {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise DomainError(f"outcome weights must sum to 1, got {sum(weights)}")

    @classmethod
    def from_probabilities(cls, pi0: float, d: float, f: float) -> "SensingOutcomeWeights":
        pi1 = 1.0 - pi0
        return cls(
            w_idle_correct=pi0 * (1.0 - f),
            w_false_alarm=pi0 * f,
            w_missed=pi1 * (1.0 - d),
            w_detect=pi1 * d,
        )

    @property
    def uncapped(self) -> float:
        """Weight of the frames sent with P0 (band sensed idle)."""
        return self.w_idle_correct + self.w_missed

    @property
    def capped(self) -> float:
        """Weight of the frames sent with P1 (band sensed busy)."""
        return self.w_false_alarm + self.w_detect


def outcome_weights(cfg: SensingConfig) -> SensingOutcomeWeights:
    return SensingOutcomeWeights.from_probabilities(
        cfg.pi0, prob_detection(cfg), prob_false_alarm(cfg)
    )


@dataclass(frozen=True)
class SensingScenario:
    """A shared band observed through an energy detector.

    ``weights`` overrides the outcome weights derived from ``config``.
    """

    ss: SsScenario
    config: SensingConfig
    weights: Optional[SensingOutcomeWeights] = None

    @property
    def outcome_weights(self) -> SensingOutcomeWeights:
        if self.weights is not None:
            return self.weights
        return outcome_weights(self.config)

    @property
    def idle_scenario(self) -> SsScenario:
        return self.ss.without_interference_cap()


def sensing_expected_power(
    scn: SensingScenario, cutoff: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    weights = scn.outcome_weights
    total = 0.0
    if weights.uncapped > 0:
        total += weights.uncapped * expected_power_ss(scn.idle_scenario, cutoff, tol)
    if weights.capped > 0:
        total += weights.capped * expected_power_ss(scn.ss, cutoff, tol)
    return total


def solve_common_cutoff(
    scn: SensingScenario, tol: Tolerance = DEFAULT_TOLERANCE
) -> CutoffSolution:
    weights = scn.outcome_weights
    stdio.log_debug(
        f"common cutoff with P0 weight {weights.uncapped} and P1 weight {weights.capped}"
    )
    return solve_budget_cutoff(
        lambda c: sensing_expected_power(scn, c, tol) - 1.0,
        scn.ss.link_ss.mean,
        scn.ss.scheme.K,
        tol,
        label=f"sensing {scn.ss.scheme.name.upper()}",
    )


def power_policies_sensing_cr(
    scn: SensingScenario, sol: CutoffSolution, gamma_ss: ArrayLike, gamma_sp: ArrayLike
) -> Tuple[ArrayLike, ArrayLike]:
    if scn.ss.scheme.kind is not RateKind.CR:
        raise DomainError("CR policies requested for a DR scheme")
    p0 = power_policy_ss_cr(scn.idle_scenario, sol.cutoff, gamma_ss, gamma_sp)
    p1 = power_policy_ss_cr(scn.ss, sol.cutoff, gamma_ss, gamma_sp)
    return p0, p1


def power_policies_sensing_dr(
    scn: SensingScenario, sol: CutoffSolution, gamma_ss: ArrayLike, gamma_sp: ArrayLike
) -> Tuple[ArrayLike, ArrayLike]:
    if scn.ss.scheme.kind is not RateKind.DR:
        raise DomainError("DR policies requested for a CR scheme")
    p0 = power_policy_ss_dr(scn.idle_scenario, sol.cutoff, gamma_ss, gamma_sp)
    p1 = power_policy_ss_dr(scn.ss, sol.cutoff, gamma_ss, gamma_sp)
    return p0, p1


def power_policies_sensing(
    scn: SensingScenario, sol: CutoffSolution, gamma_ss: ArrayLike, gamma_sp: ArrayLike
) -> Tuple[ArrayLike, ArrayLike]:
    if scn.ss.scheme.kind is RateKind.CR:
        return power_policies_sensing_cr(scn, sol, gamma_ss, gamma_sp)
    return power_policies_sensing_dr(scn, sol, gamma_ss, gamma_sp)


def mean_power_given_ss_sensing(
    scn: SensingScenario, cutoff: float, gamma_ss: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    """Outcome-weighted power at one secondary-link SNR, averaged over gamma_sp."""
    weights = scn.outcome_weights
    return weights.uncapped * mean_power_given_ss(
        scn.idle_scenario, cutoff, gamma_ss, tol
    ) + weights.capped * mean_power_given_ss(scn.ss, cutoff, gamma_ss, tol)


def component_ases(
    scn: SensingScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE
) -> Tuple[float, float]:
    """(Se0, Se1): ASE of the uncapped and of the capped policy at the common cutoff."""
    return ase_ss(scn.idle_scenario, sol, tol), ase_ss(scn.ss, sol, tol)


def sensing_ase(
    scn: SensingScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    weights = scn.outcome_weights
    se0, se1 = component_ases(scn, sol, tol)
    return (
        weights.w_idle_correct * se0
        + weights.w_false_alarm * se1
        + weights.w_missed * se0
        + weights.w_detect * se1
    )


def instantaneous_rates_sensing(
    scn: SensingScenario, sol: CutoffSolution, gamma_ss: np.ndarray, gamma_sp: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    return (
        instantaneous_rate_ss(scn.idle_scenario, sol.cutoff, gamma_ss, gamma_sp),
        instantaneous_rate_ss(scn.ss, sol.cutoff, gamma_ss, gamma_sp),
    )


def duty_factor(tau: float, frame: float) -> float:
    """(T - tau) / T, the share of the frame left for data."""
    if not 0.0 <= tau < frame:
        raise DomainError(f"sensing time must satisfy 0 <= tau < T, got tau={tau}, T={frame}")
    return (frame - tau) / frame


def throughput(cfg: SensingConfig, ase: float) -> float:
    return duty_factor(cfg.tau, cfg.frame) * ase


def missed_detection_interference(
    scn: SensingScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    """Mean interference gamma_sp * P0 received by an active primary that was not detected."""
    return scn.ss.link_sp.mean * expected_power_ss(scn.idle_scenario, sol.cutoff, tol)
