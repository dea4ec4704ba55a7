"""Numerical primitives shared by every analysis module.

Integrals over fading densities are evaluated with ``scipy.integrate.quad`` and
constraint equalities are solved with the bracketing solvers of ``scipy.optimize``.
All SNR-like quantities are linear.
"""

import math
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special

from crnase.core import (
    Bracket,
    DomainError,
    NoSignChange,
    NonConvergence,
    RootResult,
    Tolerance,
)
from crnase.io.base import PredefinedLoggerCrnIO
from crnase.utils import ArrayLike, as_output

stdio = PredefinedLoggerCrnIO(__name__)

DEFAULT_TOLERANCE = Tolerance()
# exp(-40) ~ 4e-18: the tail beyond lower + 40 * scale is below any tolerance used here
TRUNCATION_HORIZON = 40.0
MACHINE_RTOL = 4.0 * np.finfo(float).eps
ROOT_XTOL = 1e-300

ScalarFunction = Callable[[float], float]


def gaussian_q(x: ArrayLike) -> ArrayLike:
    """Tail probability of the standard Gaussian, Q(x) = erfc(x / sqrt(2)) / 2."""
    return as_output(0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0)))


def gaussian_q_inverse(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"Q^-1 is defined on (0, 1), got {p}")
    return float(math.sqrt(2.0) * special.erfcinv(2.0 * p))


def integrate_interval(
    f: ScalarFunction,
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over [lo, hi]."""
    if hi < lo:
        raise DomainError(f"integration bounds reversed: [{lo}, {hi}]")
    if hi == lo:
        return 0.0

    result = integrate.quad(
        f,
        lo,
        hi,
        epsabs=tol.abs_residual * 1e-2,
        epsrel=tol.rel_value,
        limit=tol.max_iterations,
        full_output=1,
    )
    value, abserr, info = result[0], result[1], result[2]
    if len(result) > 3:
        # quad appends a message only when ier != 0
        if info.get("last", 0) >= tol.max_iterations:
            raise NonConvergence(
                f"quadrature on [{lo}, {hi}] used {tol.max_iterations} subintervals "
                f"(estimate {value}, error {abserr})"
            )
        stdio.log_warning(
            f"quadrature on [{lo}, {hi}] flagged: {result[3].splitlines()[0]} "
            f"(estimate {value}, error {abserr})"
        )
    return float(value)


def integrate_semi_infinite(
    f: ScalarFunction,
    lower: float,
    weight_scale: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
    method: str = "truncate",
) -> float:
    """Integrate ``f`` over [lower, inf) for integrands that decay like exp(-x / weight_scale).

    ``truncate`` stops at lower + 40 * weight_scale; ``substitute`` maps the
    half-line to (0, 1] with u = exp(-(x - lower) / weight_scale).
    """
    if weight_scale <= 0:
        raise DomainError(f"weight_scale must be positive, got {weight_scale}")

    if method == "truncate":
        return integrate_interval(
            f, lower, lower + TRUNCATION_HORIZON * weight_scale, tol
        )
    elif method == "substitute":

        def mapped(u: float) -> float:
            return f(lower - weight_scale * math.log(u)) * weight_scale / u

        return integrate_interval(mapped, 0.0, 1.0, tol)
    else:
        raise DomainError(f"unknown integration method {method!r}")


def integrate_log_interval(
    f: ScalarFunction,
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    """Integrate ``f`` over [lo, hi] in the variable t = ln(x); needs 0 < lo."""
    if lo <= 0:
        raise DomainError(f"log-scale integration needs a positive lower bound, got {lo}")
    if hi < lo:
        raise DomainError(f"integration bounds reversed: [{lo}, {hi}]")
    if hi == lo:
        return 0.0

    def mapped(t: float) -> float:
        x = math.exp(t)
        return f(x) * x

    return integrate_interval(mapped, math.log(lo), math.log(hi), tol)


def integrate_from(
    f: ScalarFunction,
    lower: float,
    weight_scale: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    """Integrate ``f`` over [lower, inf), splitting at ``weight_scale``.

    Lower limits far below the density scale (cutoffs of 1e-9 and smaller) are
    covered in log scale, the remainder with the truncated semi-infinite rule.
    """
    if lower >= weight_scale:
        return integrate_semi_infinite(f, lower, weight_scale, tol)
    return integrate_log_interval(f, lower, weight_scale, tol) + integrate_semi_infinite(
        f, weight_scale, weight_scale, tol
    )


def find_root(
    f: ScalarFunction,
    bracket: Bracket,
    tol: Tolerance = DEFAULT_TOLERANCE,
    method: str = "brentq",
) -> RootResult:
    """Root of ``f`` inside ``bracket``.

    ``brentq`` is the default; ``bisect`` is the plain baseline.
    """
    f_lo = f(bracket.lo)
    if f_lo == 0.0:
        return RootResult(root=bracket.lo, residual=0.0, iterations=0)
    f_hi = f(bracket.hi)
    if f_hi == 0.0:
        return RootResult(root=bracket.hi, residual=0.0, iterations=0)
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise NoSignChange(
            f"f({bracket.lo}) = {f_lo} and f({bracket.hi}) = {f_hi} have the same sign"
        )

    if method == "brentq":
        solver = optimize.brentq
    elif method == "bisect":
        solver = optimize.bisect
    else:
        raise DomainError(f"unknown root-finding method {method!r}")

    root, info = solver(
        f,
        bracket.lo,
        bracket.hi,
        xtol=ROOT_XTOL,
        rtol=max(MACHINE_RTOL, min(tol.rel_value, 1e-12)),
        maxiter=tol.max_iterations,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise NonConvergence(
            f"{method} did not converge on [{bracket.lo}, {bracket.hi}] "
            f"after {info.iterations} iterations"
        )
    return RootResult(root=float(root), residual=float(f(root)), iterations=info.iterations)


def expand_bracket(
    f: ScalarFunction,
    lo: float,
    hi: float,
    hi_cap: float,
    lo_floor: Optional[float] = None,
    grow: float = 2.0,
    shrink: float = 1e-6,
) -> Bracket:
    """Widen [lo, hi] geometrically until a decreasing ``f`` changes sign.

    ``hi`` doubles until f(hi) <= 0 (capped at ``hi_cap``); ``lo`` shrinks until
    f(lo) >= 0 (floored at ``lo_floor``).
    """
    if hi <= lo:
        hi = lo * 10.0
    f_hi = f(hi)
    while f_hi > 0:
        if hi >= hi_cap:
            raise NoSignChange(
                f"residual still positive at the upper cap {hi_cap}", side="upper"
            )
        lo, hi = hi, min(hi * grow, hi_cap)
        stdio.log_debug(f"bracket upper end expanded to {hi}")
        f_hi = f(hi)

    f_lo = f(lo)
    while f_lo < 0:
        if lo_floor is None or lo <= lo_floor:
            raise NoSignChange(
                f"residual still negative at the lower end {lo}", side="lower"
            )
        lo, hi = max(lo * shrink, lo_floor), lo
        stdio.log_debug(f"bracket lower end expanded to {lo}")
        f_lo = f(lo)
    return Bracket(lo, hi)
