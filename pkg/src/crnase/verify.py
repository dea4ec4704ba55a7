"""Monte-Carlo cross-check of the analytic ASE and average power.

Channel draws come from seeded ``ChannelSampleStream`` objects, so a report is
reproducible from the scenario file alone. Draws are processed in chunks and
reduced with a running mean and sum of squared deviations.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from crnase import osa, sensing, settings, spectrum_sharing
from crnase.channel.base import ChannelSampleStream
from crnase.config import ScenarioConfig
from crnase.core import DomainError
from crnase.io.base import BaseCrnIO, PredefinedLoggerCrnIO
from crnase.osa import OsaScenario
from crnase.spectrum_sharing import SsScenario
from crnase.sweep import build_scenario, solve_scenario

MIN_SAMPLES = 100_000
INTERFERENCE_SLACK = 1e-12


class RunningMoments:
    """Mean and standard error accumulated chunk by chunk."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, values: np.ndarray):
        n = values.size
        if n == 0:
            return
        chunk_mean = float(np.mean(values))
        chunk_m2 = float(np.sum((values - chunk_mean) ** 2))
        total = self.count + n
        delta = chunk_mean - self.mean
        self.mean += delta * n / total
        self.m2 += chunk_m2 + delta**2 * self.count * n / total
        self.count = total

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return math.inf
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


@dataclass(frozen=True)
class MonteCarloEstimate:
    name: str
    analytic: float
    empirical: float
    stderr: float
    sigmas: float

    @property
    def deviation(self) -> float:
        """|empirical - analytic| in standard errors."""
        gap = abs(self.empirical - self.analytic)
        if self.stderr == 0:
            return 0.0 if gap <= 1e-12 else math.inf
        return gap / self.stderr

    @property
    def passed(self) -> bool:
        return self.deviation <= self.sigmas

    def to_dict(self) -> dict:
        return {
            "analytic": float(self.analytic),
            "empirical": float(self.empirical),
            "stderr": float(self.stderr),
            "deviation_sigmas": float(self.deviation),
            "passed": bool(self.passed),
        }


@dataclass
class MonteCarloReport:
    crn_type: str
    scheme: str
    x_db: float
    samples: int
    seed: int
    cutoff: float
    power_constrained: bool
    estimates: List[MonteCarloEstimate] = field(default_factory=list)
    interference_violations: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.estimates) and not self.interference_violations

    def estimate(self, name: str) -> MonteCarloEstimate:
        for e in self.estimates:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        report = {
            "crn_type": self.crn_type,
            "scheme": self.scheme,
            "x_db": float(self.x_db),
            "samples": self.samples,
            "seed": self.seed,
            "cutoff": float(self.cutoff),
            "power_constrained": bool(self.power_constrained),
        }
        for e in self.estimates:
            report[e.name] = e.to_dict()
        if self.interference_violations is not None:
            report["interference_violations"] = self.interference_violations
        report["passed"] = bool(self.passed)
        return report


def verify_monte_carlo(
    cfg: ScenarioConfig,
    samples: int,
    x_db: Optional[float] = None,
    sigmas: Optional[float] = None,
    stdio: Optional[BaseCrnIO] = None,
) -> MonteCarloReport:
    """Compare the analytic ASE and average power with sample means at one grid point.

    ``x_db`` defaults to the start of the sweep; policy sweeps are checked at
    the configured mean SNR.
    """
    if samples < MIN_SAMPLES:
        raise DomainError(f"at least {MIN_SAMPLES} samples are needed, got {samples}")
    stdio = stdio or PredefinedLoggerCrnIO(__name__)
    sigmas = settings.MONTE_CARLO_SIGMAS if sigmas is None else sigmas
    seed = cfg.scenario.seed

    if cfg.sweep.mode == "policy":
        point, reported_x = None, cfg.channel.gamma_bar_db
    else:
        point = cfg.sweep.start_db if x_db is None else x_db
        reported_x = point
    scn = build_scenario(cfg, point)
    sol = solve_scenario(scn)

    if isinstance(scn, OsaScenario):
        analytic_ase = osa.ase(scn, sol)
        primary = scn.channel
        secondary = None
    elif isinstance(scn, SsScenario):
        analytic_ase = spectrum_sharing.ase_ss(scn, sol)
        primary, secondary = scn.link_ss, scn.link_sp
    else:
        analytic_ase = sensing.sensing_ase(scn, sol)
        primary, secondary = scn.ss.link_ss, scn.ss.link_sp

    ss_stream = ChannelSampleStream(primary, seed)
    sp_stream = ChannelSampleStream(secondary, seed + 1) if secondary is not None else None
    rate_moments, power_moments = RunningMoments(), RunningMoments()
    violations = 0 if sp_stream is not None else None

    remaining = samples
    while remaining > 0:
        n = min(remaining, settings.MONTE_CARLO_CHUNK)
        remaining -= n
        gamma = ss_stream.sample(n)

        if isinstance(scn, OsaScenario):
            rate = osa.instantaneous_rate(scn, sol, gamma)
            power = np.asarray(osa.power_policy(scn, sol, gamma))
        elif isinstance(scn, SsScenario):
            gamma_sp = sp_stream.sample(n)
            power = np.asarray(spectrum_sharing.power_policy_ss(scn, sol.cutoff, gamma, gamma_sp))
            rate = spectrum_sharing.instantaneous_rate_ss(scn, sol.cutoff, gamma, gamma_sp)
            violations += int(np.count_nonzero(gamma_sp * power > scn.i_pk + INTERFERENCE_SLACK))
        else:
            gamma_sp = sp_stream.sample(n)
            weights = scn.outcome_weights
            p0, p1 = sensing.power_policies_sensing(scn, sol, gamma, gamma_sp)
            r0, r1 = sensing.instantaneous_rates_sensing(scn, sol, gamma, gamma_sp)
            power = weights.uncapped * np.asarray(p0) + weights.capped * np.asarray(p1)
            rate = weights.uncapped * r0 + weights.capped * r1
            violations += int(
                np.count_nonzero(gamma_sp * np.asarray(p1) > scn.ss.i_pk + INTERFERENCE_SLACK)
            )

        rate_moments.add(rate)
        power_moments.add(power)
        stdio.log_debug(f"Monte-Carlo: {samples - remaining}/{samples} draws")

    report = MonteCarloReport(
        crn_type=cfg.crn_type.value,
        scheme=cfg.scenario.scheme,
        x_db=reported_x,
        samples=samples,
        seed=seed,
        cutoff=sol.cutoff,
        power_constrained=sol.power_constrained,
        estimates=[
            MonteCarloEstimate(
                "ase", analytic_ase, rate_moments.mean, rate_moments.stderr, sigmas
            ),
            MonteCarloEstimate(
                "power", sol.expected_power, power_moments.mean, power_moments.stderr, sigmas
            ),
        ],
        interference_violations=violations,
    )
    stdio.log_info(f"Monte-Carlo check {'passed' if report.passed else 'FAILED'}")
    return report
