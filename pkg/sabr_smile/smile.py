"""Zero- and first-order implied volatility terms of the SABR expansion."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum (Python 3.11)."""

        __str__ = str.__str__
        __format__ = str.__format__
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from .const import (
    ALPHA_BRACKET,
    BETA_EPS,
    TABLE1_DRAWS,
    TABLE1_GENERIC_TOL,
    TABLE1_SEED,
)
from .core import (
    FormulaKind,
    SabrConvergenceError,
    SabrDegenerateVolError,
    SabrDomainError,
    SabrParams,
    log_moneyness,
    z_over_d,
    z_transform,
    zeta_transform,
)

if TYPE_CHECKING:
    from collections.abc import Iterable

_LOGGER = logging.getLogger(__name__)


class AlphaMode(StrEnum):
    """How alpha is backed out of a quoted ATM volatility."""

    FIRST_ORDER = "first_order"
    ZERO_ORDER = "zero_order"


@dataclass(frozen=True, slots=True)
class SmilePoint:
    """One strike of an implied volatility smile."""

    strike: float
    x: float
    i0: float
    i1: float
    vol: float


def i0_atm(p: SabrParams) -> float:
    """Return the at-the-money zero-order vol alpha * s^(beta-1)."""
    return p.alpha * p.forward ** (p.beta - 1.0)


def i0_localvol(p: SabrParams, strike: float) -> float:
    """
    Return the nu = 0 zero-order vol x alpha (1-beta) / (s^(1-beta) - K^(1-beta)).

    nu is ignored. Written as alpha K^(beta-1) u / expm1(u) with
    u = (1-beta) x, which is alpha s^(beta-1) at K = s and alpha at beta = 1.
    """
    x = log_moneyness(p.forward, strike)
    if x == 0:
        return i0_atm(p)
    if p.lognormal:
        return p.alpha
    u = (1.0 - p.beta) * x
    return p.alpha * strike ** (p.beta - 1.0) * u / math.expm1(u)


def i0_berestycki(p: SabrParams, strike: float) -> float:
    """Return the corrected zero-order vol nu x / D(z)."""
    # nu x / D(z) = (nu x / z) (z / D(z)) and nu x / z is the local-vol term
    return i0_localvol(p, strike) * z_over_d(z_transform(p, strike), p.rho)


def i0_hagan(p: SabrParams, strike: float) -> float:
    """
    Return the original zero-order vol nu x (zeta / z) / D(zeta).

    At beta = 1 both kinds share the z-form nu x / D(nu x / alpha).
    """
    if abs(1.0 - p.beta) < BETA_EPS:
        return i0_berestycki(p, strike)
    return i0_localvol(p, strike) * z_over_d(zeta_transform(p, strike), p.rho)


def i1_hagan(p: SabrParams, strike: float) -> float:
    """Return the first-order coefficient I1_H shared by both kinds."""
    sk = p.forward * strike
    one_minus_beta = 1.0 - p.beta
    return (
        one_minus_beta**2 / 24.0 * p.alpha**2 / sk**one_minus_beta
        + 0.25 * p.rho * p.nu * p.alpha * p.beta / sk ** (one_minus_beta / 2.0)
        + (2.0 - 3.0 * p.rho**2) / 24.0 * p.nu**2
    )


ZERO_ORDER = {
    FormulaKind.HAGAN_A65: i0_hagan,
    FormulaKind.BERESTYCKI: i0_berestycki,
}


def implied_vol(
    kind: FormulaKind, p: SabrParams, strike: float, tau: float
) -> SmilePoint:
    """
    Return the smile point I0 (1 + I1_H tau) for the selected zero-order term.

    Raises:
        SabrDomainError: If tau is negative
        SabrDegenerateVolError: If 1 + I1_H tau is not positive

    """
    if not tau >= 0:
        msg = f"tau must be non-negative, got {tau}"
        raise SabrDomainError(msg)
    x = log_moneyness(p.forward, strike)
    i0 = ZERO_ORDER[FormulaKind(kind)](p, strike)
    i1 = i1_hagan(p, strike)
    vol = i0 * (1.0 + i1 * tau)
    if not vol > 0:
        msg = (
            f"Degenerate {kind} vol {vol!r} at strike {strike!r}: "
            f"1 + I1 tau = {1.0 + i1 * tau!r}"
        )
        raise SabrDegenerateVolError(msg)
    return SmilePoint(strike=strike, x=x, i0=i0, i1=i1, vol=vol)


def smile(
    kind: FormulaKind, p: SabrParams, strikes: Iterable[float], tau: float
) -> list[SmilePoint]:
    """Evaluate implied_vol over strikes, ordered by strike."""
    return [implied_vol(kind, p, strike, tau) for strike in sorted(strikes)]


def build_strike_grid(
    lo: float, hi: float, count: int, *, geometric: bool = True
) -> list[float]:
    """Return count strikes spanning [lo, hi], geometric or linear."""
    if count < 2:  # noqa: PLR2004
        msg = f"grid needs at least 2 points, got {count}"
        raise SabrDomainError(msg)
    if not 0 < lo < hi:
        msg = f"grid bounds must satisfy 0 < lo < hi, got {lo}, {hi}"
        raise SabrDomainError(msg)
    if geometric:
        ratio = math.log(hi / lo) / (count - 1)
        grid = [lo * math.exp(ratio * i) for i in range(count)]
    else:
        step = (hi - lo) / (count - 1)
        grid = [lo + step * i for i in range(count)]
    grid[0], grid[-1] = lo, hi
    return grid


def back_out_alpha(  # noqa: PLR0913
    atm: float,
    beta: float,
    rho: float,
    nu: float,
    forward: float,
    tau: float,
    mode: AlphaMode = AlphaMode.FIRST_ORDER,
) -> float:
    """
    Back alpha out of a quoted at-the-money implied volatility.

    Args:
        atm: Quoted ATM lognormal implied vol (decimal)
        beta: CEV exponent
        rho: Correlation
        nu: Vol-of-vol
        forward: Forward level, in the units the strikes will use
        tau: Maturity in years
        mode: ZERO_ORDER solves alpha s^(beta-1) = atm; FIRST_ORDER solves
            alpha s^(beta-1) (1 + I1_H(s) tau) = atm by bisection

    Returns:
        alpha in the forward's units

    """
    if not atm > 0:
        msg = f"ATM vol must be positive, got {atm}"
        raise SabrDomainError(msg)
    guess = atm * forward ** (1.0 - beta)
    if AlphaMode(mode) is AlphaMode.ZERO_ORDER:
        return guess

    def atm_gap(alpha: float) -> float:
        point = SabrParams(alpha, beta, rho, nu, forward)
        return i0_atm(point) * (1.0 + i1_hagan(point, forward) * tau) - atm

    lo, hi = (guess * bound for bound in ALPHA_BRACKET)
    if atm_gap(lo) * atm_gap(hi) > 0:
        msg = (
            f"Cannot bracket alpha for ATM={atm} in "
            f"[{lo:.3g}, {hi:.3g}] at tau={tau}"
        )
        raise SabrConvergenceError(msg)
    alpha = optimize.bisect(atm_gap, lo, hi, xtol=1e-15 * guess, rtol=1e-15)
    _LOGGER.info(
        "Backed out alpha=%.12g from ATM=%s (mode=%s, tau=%s)", alpha, atm, mode, tau
    )
    return alpha


@dataclass(frozen=True, slots=True)
class ZeroOrderComparison:
    """Largest Hagan/Berestycki gap over a random sweep of one zero-order case."""

    case: str
    relation: str
    max_rel_diff: float
    share_above_tol: float
    draws: int


def zero_order_gap(p: SabrParams, strike: float) -> float:
    """Return |I0_H - I0_B| / I0_B."""
    berestycki = i0_berestycki(p, strike)
    return abs(i0_hagan(p, strike) - berestycki) / berestycki


def compare_zero_order(
    seed: int = TABLE1_SEED, draws: int = TABLE1_DRAWS
) -> list[ZeroOrderComparison]:
    """
    Sweep random parameters through the four zero-order cases.

    The at-the-money, nu = 0 and beta = 1 cases must agree; generic
    beta < 1, nu > 0, x != 0 draws must not.
    """
    rng = np.random.default_rng(seed)

    def draw(case: str) -> tuple[SabrParams, float]:
        alpha = rng.uniform(0.1, 0.3)
        rho = rng.uniform(-0.9, 0.9)
        nu = rng.uniform(0.3, 1.0)
        forward = rng.uniform(0.5, 2.0)
        beta = rng.uniform(0.05, 0.95)
        strike = forward * np.exp(rng.choice((-1.0, 1.0)) * rng.uniform(0.3, 1.0))
        if case == "atm":
            strike = forward
        elif case == "nu_zero":
            nu = 0.0
        elif case == "beta_one":
            beta = 1.0
        else:
            beta = rng.uniform(0.2, 0.8)
        return SabrParams(alpha, beta, rho, nu, forward), float(strike)

    cases = (
        ("atm", "="),
        ("nu_zero", "="),
        ("beta_one", "="),
        ("beta_lt_one", "!="),
    )
    rows = []
    for case, relation in cases:
        gaps = np.array([zero_order_gap(*draw(case)) for _ in range(draws)])
        rows.append(
            ZeroOrderComparison(
                case=case,
                relation=relation,
                max_rel_diff=float(gaps.max()),
                share_above_tol=float(np.mean(gaps > TABLE1_GENERIC_TOL)),
                draws=draws,
            )
        )
        _LOGGER.debug("Zero-order case %s: max gap %.3g", case, gaps.max())
    return rows
