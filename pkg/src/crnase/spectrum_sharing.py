"""Spectrum sharing under a peak interference constraint.

The secondary transmitter sees its own link SNR gamma_ss and the SNR gamma_sp of
the link towards the primary receiver. Power follows the unconstrained
continuous-rate water-filling or discrete-rate channel inversion and is clipped
to I_pk / gamma_sp whenever that would exceed the interference cap.

Cutoffs use the shared-band convention: the CR cutoff ``c`` plays the role of
K * gamma_K, so transmission starts at gamma_ss = c / K. The DR cutoff is the
gamma_star of the region boundaries gamma_star * M_j.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from crnase.channel.base import BaseChannel
from crnase.channel.rayleigh import RayleighChannel
from crnase.core import CutoffSolution, DomainError, RateKind, RateModel, Tolerance
from crnase.modulation import ModulationScheme
from crnase.numerics import DEFAULT_TOLERANCE, integrate_from, integrate_interval
from crnase.osa import MIN_GAMMA_BAR, solve_budget_cutoff
from crnase.utils import ArrayLike, as_output


@dataclass(frozen=True)
class SsScenario:
    link_ss: BaseChannel
    link_sp: BaseChannel
    i_pk: float
    scheme: ModulationScheme
    rate_model: RateModel = RateModel.ACHIEVED

    def __post_init__(self):
        if not self.i_pk > 0:
            raise DomainError(f"peak interference must be positive, got {self.i_pk}")
        for name, link in (("link_ss", self.link_ss), ("link_sp", self.link_sp)):
            if not link.mean > MIN_GAMMA_BAR:
                raise DomainError(
                    f"{name} mean SNR {link.mean} is below the supported floor {MIN_GAMMA_BAR}"
                )

    @property
    def unconstrained(self) -> bool:
        return math.isinf(self.i_pk)

    def without_interference_cap(self) -> "SsScenario":
        return replace(self, i_pk=math.inf)


def _require(scn: SsScenario, kind: RateKind):
    if scn.scheme.kind is not kind:
        raise DomainError(f"{kind.name} operation called with a {scn.scheme.kind.name} scheme")


def inverse_tail(channel: BaseChannel, theta: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """Integral of p(x) / x over [theta, inf); closed form E1(theta / mean) / mean for Rayleigh."""
    if math.isinf(theta):
        return 0.0
    if isinstance(channel, RayleighChannel):
        return float(special.exp1(theta / channel.gamma_bar)) / channel.gamma_bar

    def integrand(x: float) -> float:
        return channel.pdf(x) / x

    return integrate_from(integrand, theta, channel.mean, tol)


def _clipped_mean_power(
    link_sp: BaseChannel, i_pk: float, unconstrained: float, tol: Tolerance
) -> float:
    """E over gamma_sp of min(unconstrained, i_pk / gamma_sp)."""
    if unconstrained <= 0:
        return 0.0
    if math.isinf(i_pk):
        return unconstrained
    theta = i_pk / unconstrained
    return unconstrained * float(link_sp.cdf(theta)) + i_pk * inverse_tail(link_sp, theta, tol)


# continuous rate


def water_filling_ss(cutoff: float, K: float, gamma_ss: ArrayLike) -> ArrayLike:
    """1/cutoff - 1/(K gamma_ss) above gamma_ss = cutoff / K, 0 below."""
    g = np.asarray(gamma_ss, dtype=float)
    threshold = cutoff / K
    wf = 1.0 / cutoff - 1.0 / (K * np.maximum(g, threshold))
    return as_output(np.where(g > threshold, wf, 0.0))


def _clip(i_pk: float, unconstrained: np.ndarray, gamma_sp: ArrayLike) -> np.ndarray:
    sp = np.asarray(gamma_sp, dtype=float)
    if math.isinf(i_pk):
        return np.broadcast_to(unconstrained, np.broadcast(unconstrained, sp).shape).copy()
    with np.errstate(divide="ignore"):
        cap = i_pk / sp
    return np.minimum(unconstrained, cap)


def power_policy_ss_cr(
    scn: SsScenario, cutoff: float, gamma_ss: ArrayLike, gamma_sp: ArrayLike
) -> ArrayLike:
    wf = np.asarray(water_filling_ss(cutoff, scn.scheme.K, gamma_ss))
    return as_output(_clip(scn.i_pk, wf, gamma_sp))


def mean_power_given_ss_cr(
    scn: SsScenario, cutoff: float, gamma_ss: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    wf = float(water_filling_ss(cutoff, scn.scheme.K, gamma_ss))
    return _clipped_mean_power(scn.link_sp, scn.i_pk, wf, tol)


def expected_power_ss_cr(
    scn: SsScenario, cutoff: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    def integrand(g: float) -> float:
        return mean_power_given_ss_cr(scn, cutoff, g, tol) * scn.link_ss.pdf(g)

    return integrate_from(integrand, cutoff / scn.scheme.K, scn.link_ss.mean, tol)


def solve_cutoff_ss_cr(scn: SsScenario, tol: Tolerance = DEFAULT_TOLERANCE) -> CutoffSolution:
    _require(scn, RateKind.CR)
    return solve_budget_cutoff(
        lambda c: expected_power_ss_cr(scn, c, tol) - 1.0,
        scn.link_ss.mean,
        scn.scheme.K,
        tol,
        label="SS CR",
    )


def rate_given_ss_cr(
    scn: SsScenario, cutoff: float, gamma_ss: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    """E over gamma_sp of log2(1 + K gamma_ss P) for one secondary-link SNR."""
    K = scn.scheme.K
    if gamma_ss <= cutoff / K:
        return 0.0
    full_rate = math.log2(K * gamma_ss) - math.log2(cutoff)
    if scn.unconstrained:
        return full_rate
    wf = 1.0 / cutoff - 1.0 / (K * gamma_ss)
    theta = scn.i_pk / wf
    a = K * gamma_ss * scn.i_pk

    def truncated(x: float) -> float:
        return math.log2(1.0 + a / x) * scn.link_sp.pdf(x)

    tail = integrate_from(truncated, theta, scn.link_sp.mean, tol)
    return full_rate * float(scn.link_sp.cdf(theta)) + tail


def ase_ss_cr(scn: SsScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    cutoff = sol.cutoff

    def integrand(g: float) -> float:
        return rate_given_ss_cr(scn, cutoff, g, tol) * scn.link_ss.pdf(g)

    return integrate_from(integrand, cutoff / scn.scheme.K, scn.link_ss.mean, tol)


def instantaneous_rate_ss_cr(
    scn: SsScenario, cutoff: float, gamma_ss: np.ndarray, gamma_sp: np.ndarray
) -> np.ndarray:
    power = np.asarray(power_policy_ss_cr(scn, cutoff, gamma_ss, gamma_sp))
    return np.log2(1.0 + scn.scheme.K * np.asarray(gamma_ss, dtype=float) * power)


# discrete rate


def channel_inversion_ss(scn: SsScenario, gamma_star: float, gamma_ss: ArrayLike) -> ArrayLike:
    """(M_j - 1)/(K gamma_ss) in region j of gamma_ss, 0 in region 0."""
    ladder = scn.scheme.ladder
    g = np.asarray(gamma_ss, dtype=float)
    index = np.asarray(ladder.region_index(g, gamma_star))
    sizes = np.asarray(ladder.sizes, dtype=float)[index]
    active = index > 0
    safe = np.where(active, g, 1.0)
    return as_output(np.where(active, (sizes - 1.0) / (scn.scheme.K * safe), 0.0))


def power_policy_ss_dr(
    scn: SsScenario, cutoff: float, gamma_ss: ArrayLike, gamma_sp: ArrayLike
) -> ArrayLike:
    inversion = np.asarray(channel_inversion_ss(scn, cutoff, gamma_ss))
    return as_output(_clip(scn.i_pk, inversion, gamma_sp))


def mean_power_given_ss_dr(
    scn: SsScenario, cutoff: float, gamma_ss: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    inversion = float(channel_inversion_ss(scn, cutoff, gamma_ss))
    return _clipped_mean_power(scn.link_sp, scn.i_pk, inversion, tol)


def _integrate_regions(f, scn: SsScenario, gamma_star: float, tol: Tolerance) -> float:
    """Sum over active regions j of the integral of f(j, gamma_ss) p_ss(gamma_ss)."""
    boundaries = scn.scheme.ladder.region_boundaries(gamma_star)
    total = 0.0
    for j in range(1, scn.scheme.ladder.n_regions):
        lo, hi = boundaries[j - 1], boundaries[j]

        def integrand(g: float, j: int = j) -> float:
            return f(j, g) * scn.link_ss.pdf(g)

        if math.isinf(hi):
            total += integrate_from(integrand, lo, scn.link_ss.mean, tol)
        else:
            total += integrate_interval(integrand, lo, hi, tol)
    return total


def expected_power_ss_dr(
    scn: SsScenario, cutoff: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    sizes = scn.scheme.ladder.sizes
    K = scn.scheme.K

    def inner(j: int, g: float) -> float:
        return _clipped_mean_power(scn.link_sp, scn.i_pk, (sizes[j] - 1.0) / (K * g), tol)

    return _integrate_regions(inner, scn, cutoff, tol)


def solve_cutoff_ss_dr(scn: SsScenario, tol: Tolerance = DEFAULT_TOLERANCE) -> CutoffSolution:
    _require(scn, RateKind.DR)
    return solve_budget_cutoff(
        lambda c: expected_power_ss_dr(scn, c, tol) - 1.0,
        scn.link_ss.mean,
        scn.scheme.K,
        tol,
        label=f"SS DR {scn.scheme.ladder}",
    )


def achieved_rate_given_region(scn: SsScenario, j: int, gamma_ss: float) -> float:
    """E over gamma_sp of the bits delivered in region j.

    A slot clipped by the interference cap carries the largest ladder
    constellation M_i <= 1 + K gamma_ss I_pk / gamma_sp, never more than M_j.
    """
    ladder = scn.scheme.ladder
    bits = ladder.bits
    if scn.unconstrained:
        return float(bits[j])
    a = scn.scheme.K * gamma_ss * scn.i_pk
    # b_i: largest gamma_sp still supporting M_i
    b = a / (ladder.active_sizes[:j] - 1.0)
    cdf = np.asarray(scn.link_sp.cdf(b), dtype=float)
    rate = bits[j] * cdf[j - 1]
    for i in range(1, j):
        rate += bits[i] * (cdf[i - 1] - cdf[i])
    return float(rate)


def ase_ss_dr(scn: SsScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    ladder = scn.scheme.ladder
    if scn.rate_model is RateModel.NOMINAL or scn.unconstrained:
        edges = np.concatenate(([0.0], ladder.region_boundaries(sol.cutoff)))
        survival = np.asarray(scn.link_ss.sf(edges), dtype=float)
        return float(np.dot(ladder.bits, survival[:-1] - survival[1:]))

    def rate(j: int, g: float) -> float:
        return achieved_rate_given_region(scn, j, g)

    return _integrate_regions(rate, scn, sol.cutoff, tol)


def instantaneous_rate_ss_dr(
    scn: SsScenario, cutoff: float, gamma_ss: np.ndarray, gamma_sp: np.ndarray
) -> np.ndarray:
    ladder = scn.scheme.ladder
    region = np.asarray(ladder.region_index(np.asarray(gamma_ss, dtype=float), cutoff))
    if scn.rate_model is RateModel.NOMINAL or scn.unconstrained:
        return ladder.bits[region]
    sp = np.asarray(gamma_sp, dtype=float)
    with np.errstate(divide="ignore"):
        supported = 1.0 + scn.scheme.K * np.asarray(gamma_ss, dtype=float) * scn.i_pk / sp
    achievable = np.searchsorted(ladder.active_sizes, supported, side="right")
    return ladder.bits[np.minimum(achievable, region)]


# diagnostics and dispatch


def truncated_fraction(
    scn: SsScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    """Share of transmitting slots whose power is clipped by the interference cap."""
    if scn.unconstrained:
        return 0.0
    K = scn.scheme.K

    if scn.scheme.kind is RateKind.CR:
        start = sol.cutoff / K

        def clipped(g: float) -> float:
            wf = float(water_filling_ss(sol.cutoff, K, g))
            if wf <= 0:
                return 0.0
            return float(scn.link_sp.sf(scn.i_pk / wf)) * scn.link_ss.pdf(g)

        active = float(scn.link_ss.sf(start))
        if active <= 0:
            return 0.0
        return integrate_from(clipped, start, scn.link_ss.mean, tol) / active

    sizes = scn.scheme.ladder.sizes

    def clipped_region(j: int, g: float) -> float:
        return float(scn.link_sp.sf(scn.i_pk * K * g / (sizes[j] - 1.0)))

    active = float(scn.link_ss.sf(scn.scheme.ladder.region_boundaries(sol.cutoff)[0]))
    if active <= 0:
        return 0.0
    return _integrate_regions(clipped_region, scn, sol.cutoff, tol) / active


def solve_cutoff_ss(scn: SsScenario, tol: Tolerance = DEFAULT_TOLERANCE) -> CutoffSolution:
    if scn.scheme.kind is RateKind.CR:
        return solve_cutoff_ss_cr(scn, tol)
    return solve_cutoff_ss_dr(scn, tol)


def expected_power_ss(scn: SsScenario, cutoff: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    if scn.scheme.kind is RateKind.CR:
        return expected_power_ss_cr(scn, cutoff, tol)
    return expected_power_ss_dr(scn, cutoff, tol)


def ase_ss(scn: SsScenario, sol: CutoffSolution, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    if scn.scheme.kind is RateKind.CR:
        return ase_ss_cr(scn, sol, tol)
    return ase_ss_dr(scn, sol, tol)


def power_policy_ss(
    scn: SsScenario, cutoff: float, gamma_ss: ArrayLike, gamma_sp: ArrayLike
) -> ArrayLike:
    if scn.scheme.kind is RateKind.CR:
        return power_policy_ss_cr(scn, cutoff, gamma_ss, gamma_sp)
    return power_policy_ss_dr(scn, cutoff, gamma_ss, gamma_sp)


def mean_power_given_ss(
    scn: SsScenario, cutoff: float, gamma_ss: float, tol: Tolerance = DEFAULT_TOLERANCE
) -> float:
    """E over gamma_sp of the transmit power at one secondary-link SNR."""
    if scn.scheme.kind is RateKind.CR:
        return mean_power_given_ss_cr(scn, cutoff, gamma_ss, tol)
    return mean_power_given_ss_dr(scn, cutoff, gamma_ss, tol)


def instantaneous_rate_ss(
    scn: SsScenario, cutoff: float, gamma_ss: np.ndarray, gamma_sp: np.ndarray
) -> np.ndarray:
    if scn.scheme.kind is RateKind.CR:
        return instantaneous_rate_ss_cr(scn, cutoff, gamma_ss, gamma_sp)
    return instantaneous_rate_ss_dr(scn, cutoff, gamma_ss, gamma_sp)

