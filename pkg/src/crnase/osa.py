"""Opportunistic spectrum access: optimal power allocation, ASE, band factor gain
and multi-user sum ASE for continuous-rate and discrete-rate MQAM.

The users of one channel are served in priority order: user ``u`` finds the
channel idle with probability Delta ** (u - 1), where Delta = Pr(gamma < cutoff)
is the band factor gain of the primary link. The geometric-sum reading is used
throughout; the flat "every user gets Delta * Se_1" statement is the two-user
special case.
"""

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from crnase.channel.base import BaseChannel
from crnase.core import (
    CutoffSolution,
    DomainError,
    NoSignChange,
    RateKind,
    Tolerance,
)
from crnase.io.base import PredefinedLoggerCrnIO
from crnase.modulation import ConstellationLadder, ModulationScheme
from crnase.numerics import (
    DEFAULT_TOLERANCE,
    expand_bracket,
    find_root,
    integrate_from,
    integrate_interval,
)
from crnase.utils import ArrayLike, as_output

stdio = PredefinedLoggerCrnIO(__name__)

MIN_GAMMA_BAR = 1e-6
LOWER_START = 1e-9
CUTOFF_FLOOR = 1e-300
UPPER_CAP = 1e6


@dataclass(frozen=True)
class OsaScenario:
    channel: BaseChannel
    scheme: ModulationScheme
    users: int = 1

    def __post_init__(self):
        if self.users < 1:
            raise DomainError(f"at least one user is needed, got {self.users}")
        if not self.channel.mean > MIN_GAMMA_BAR:
            raise DomainError(
                f"mean SNR {self.channel.mean} is below the supported floor {MIN_GAMMA_BAR}"
            )


def solve_budget_cutoff(
    residual: Callable[[float], float],
    gamma_bar: float,
    K: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
    label: str = "cutoff",
) -> CutoffSolution:
    """Solve ``residual(cutoff) = 0`` for a residual that decreases with the cutoff.

    The residual is expected power minus the budget. When it stays negative down
    to the cutoff floor the budget does not bind and the floor is returned.
    """
    try:
        bracket = expand_bracket(
            residual,
            LOWER_START,
            max(10.0 * gamma_bar * K, 10.0 * LOWER_START),
            hi_cap=UPPER_CAP,
            lo_floor=CUTOFF_FLOOR,
        )
    except NoSignChange as exc:
        if exc.side != "lower":
            raise
        slack = float(residual(CUTOFF_FLOOR))
        stdio.log_info(
            f"{label}: power budget not exhausted at cutoff {CUTOFF_FLOOR} "
            f"(expected power {1.0 + slack})"
        )
        return CutoffSolution(
            cutoff=CUTOFF_FLOOR, residual=slack, iterations=0, power_constrained=False
        )

    result = find_root(residual, bracket, tol)
    stdio.log_debug(
        f"{label}: cutoff {result.root} after {result.iterations} iterations "
        f"(residual {result.residual})"
    )
    return CutoffSolution(
        cutoff=result.root, residual=result.residual, iterations=result.iterations
    )


def _require(scn: OsaScenario, kind: RateKind):
    if scn.scheme.kind is not kind:
        raise DomainError(f"{kind.name} operation called with a {scn.scheme.kind.name} scheme")


# continuous rate


def power_policy_cr(cutoff: float, K: float, gamma: ArrayLike) -> ArrayLike:
    """Water-filling 1/(K cutoff) - 1/(K gamma) above the cutoff, 0 below."""
    g = np.asarray(gamma, dtype=float)
    wf = 1.0 / (K * cutoff) - 1.0 / (K * np.maximum(g, cutoff))
    return as_output(np.where(g > cutoff, wf, 0.0))


def expected_power_cr(
    channel: BaseChannel, cutoff: float, K: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    def integrand(g: float) -> float:
        return (1.0 / cutoff - 1.0 / g) / K * channel.pdf(g)

    return integrate_from(integrand, cutoff, channel.mean, tol)


def solve_cutoff_cr(scn: OsaScenario, tol: Tolerance = DEFAULT_TOLERANCE) -> CutoffSolution:
    _require(scn, RateKind.CR)
    K = scn.scheme.K
    return solve_budget_cutoff(
        lambda c: expected_power_cr(scn.channel, c, K, tol) - 1.0,
        scn.channel.mean,
        K,
        tol,
        label="OSA CR",
    )


def ase_cr(
    scn: OsaScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    cutoff = sol.cutoff

    def integrand(g: float) -> float:
        return math.log2(g / cutoff) * scn.channel.pdf(g)

    return integrate_from(integrand, cutoff, scn.channel.mean, tol)


# discrete rate


def power_policy_dr(
    ladder: ConstellationLadder, gamma_star: float, K: float, gamma: ArrayLike
) -> ArrayLike:
    """Channel inversion (M_j - 1)/(K gamma) inside region j, 0 in region 0."""
    g = np.asarray(gamma, dtype=float)
    index = np.asarray(ladder.region_index(g, gamma_star))
    sizes = np.asarray(ladder.sizes, dtype=float)[index]
    active = index > 0
    safe = np.where(active, g, 1.0)
    return as_output(np.where(active, (sizes - 1.0) / (K * safe), 0.0))


def expected_power_dr(
    channel: BaseChannel,
    ladder: ConstellationLadder,
    gamma_star: float,
    K: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    boundaries = ladder.region_boundaries(gamma_star)
    total = 0.0
    for j, size in enumerate(ladder.active_sizes):
        lo, hi = boundaries[j], boundaries[j + 1]
        coefficient = (size - 1.0) / K

        def integrand(g: float, coefficient: float = coefficient) -> float:
            return coefficient / g * channel.pdf(g)

        if math.isinf(hi):
            total += integrate_from(integrand, lo, channel.mean, tol)
        else:
            total += integrate_interval(integrand, lo, hi, tol)
    return total


def solve_cutoff_dr(scn: OsaScenario, tol: Tolerance = DEFAULT_TOLERANCE) -> CutoffSolution:
    _require(scn, RateKind.DR)
    K = scn.scheme.K
    ladder = scn.scheme.ladder
    return solve_budget_cutoff(
        lambda c: expected_power_dr(scn.channel, ladder, c, K, tol) - 1.0,
        scn.channel.mean,
        K,
        tol,
        label=f"OSA DR {ladder}",
    )


def region_probabilities(
    channel: BaseChannel, ladder: ConstellationLadder, gamma_star: float
) -> np.ndarray:
    """Pr(region j) for j = 0..N."""
    edges = np.concatenate(([0.0], ladder.region_boundaries(gamma_star)))
    survival = np.asarray(channel.sf(edges), dtype=float)
    return survival[:-1] - survival[1:]


def ase_dr(scn: OsaScenario, sol: CutoffSolution) -> float:
    ladder = scn.scheme.ladder
    probabilities = region_probabilities(scn.channel, ladder, sol.cutoff)
    return float(np.dot(ladder.bits, probabilities))


# dispatch on the rate kind


def solve_cutoff(scn: OsaScenario, tol: Tolerance = DEFAULT_TOLERANCE) -> CutoffSolution:
    if scn.scheme.kind is RateKind.CR:
        return solve_cutoff_cr(scn, tol)
    return solve_cutoff_dr(scn, tol)


def ase(scn: OsaScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    if scn.scheme.kind is RateKind.CR:
        return ase_cr(scn, sol, tol)
    return ase_dr(scn, sol)


def expected_power(
    scn: OsaScenario, cutoff: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    if scn.scheme.kind is RateKind.CR:
        return expected_power_cr(scn.channel, cutoff, scn.scheme.K, tol)
    return expected_power_dr(scn.channel, scn.scheme.ladder, cutoff, scn.scheme.K, tol)


def power_policy(scn: OsaScenario, sol: CutoffSolution, gamma: ArrayLike) -> ArrayLike:
    if scn.scheme.kind is RateKind.CR:
        return power_policy_cr(sol.cutoff, scn.scheme.K, gamma)
    return power_policy_dr(scn.scheme.ladder, sol.cutoff, scn.scheme.K, gamma)


def instantaneous_rate(scn: OsaScenario, sol: CutoffSolution, gamma: np.ndarray) -> np.ndarray:
    """Bits per symbol delivered at each SNR draw under the optimal policy."""
    g = np.asarray(gamma, dtype=float)
    if scn.scheme.kind is RateKind.CR:
        return np.log2(np.maximum(g, sol.cutoff) / sol.cutoff)
    ladder = scn.scheme.ladder
    return ladder.bits[np.asarray(ladder.region_index(g, sol.cutoff))]


# multi-user pooling


def band_factor_gain(
    scn: OsaScenario,
    sol: CutoffSolution,
    quadrature: bool = False,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    """Delta = Pr(gamma < cutoff), the probability that the primary leaves the channel idle."""
    if quadrature:
        return integrate_interval(scn.channel.pdf, 0.0, sol.cutoff, tol)
    return float(scn.channel.cdf(sol.cutoff))


def total_band_factor_gain(delta: float, users: int) -> float:
    """(1 - Delta ** U) / (1 - Delta), with the limit U at Delta = 1."""
    if users < 1:
        raise DomainError(f"at least one user is needed, got {users}")
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"band factor gain must be a probability, got {delta}")
    if delta == 1.0:
        return float(users)
    return (1.0 - delta**users) / (1.0 - delta)


def sum_ase(se_1: float, delta: float, users: int) -> float:
    return se_1 * total_band_factor_gain(delta, users)


def per_user_ase(se_1: float, delta: float, users: int) -> List[float]:
    """Share of every user, Delta ** (u - 1) * Se_1 for u = 1..U."""
    total_band_factor_gain(delta, users)
    return [se_1 * delta**u for u in range(users)]
