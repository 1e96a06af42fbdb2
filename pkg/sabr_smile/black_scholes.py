"""Undiscounted Black-Scholes pricing and implied volatility inversion."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from scipy.special import ndtr

from .const import IV_MAX_ITERATIONS, IV_PRICE_TOL, IV_VOL_CEILING
from .core import SabrConvergenceError, SabrDomainError, SabrOutOfBandError

_LOGGER = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, slots=True)
class OptionQuote:
    """Call and put prices of one strike under a Black-Scholes vol."""

    strike: float
    tau: float
    vol: float
    call_price: float
    put_price: float


def _check_inputs(s: float, strike: float, vol: float, tau: float) -> None:
    if not (s > 0 and strike > 0):
        msg = f"forward and strike must be positive, got {s}, {strike}"
        raise SabrDomainError(msg)
    if not (vol >= 0 and tau >= 0):
        msg = f"vol and tau must be non-negative, got {vol}, {tau}"
        raise SabrDomainError(msg)


def _d1_d2(s: float, strike: float, deviation: float) -> tuple[float, float]:
    d1 = math.log(s / strike) / deviation + 0.5 * deviation
    return d1, d1 - deviation


def bs_call(s: float, strike: float, vol: float, tau: float) -> float:
    """Return the undiscounted call price s N(d1) - K N(d2)."""
    _check_inputs(s, strike, vol, tau)
    deviation = vol * math.sqrt(tau)
    if deviation == 0:
        return max(s - strike, 0.0)
    d1, d2 = _d1_d2(s, strike, deviation)
    return float(s * ndtr(d1) - strike * ndtr(d2))


def bs_put(s: float, strike: float, vol: float, tau: float) -> float:
    """Return the undiscounted put price K N(-d2) - s N(-d1)."""
    _check_inputs(s, strike, vol, tau)
    deviation = vol * math.sqrt(tau)
    if deviation == 0:
        return max(strike - s, 0.0)
    d1, d2 = _d1_d2(s, strike, deviation)
    return float(strike * ndtr(-d2) - s * ndtr(-d1))


def bs_vega(s: float, strike: float, vol: float, tau: float) -> float:
    """Return dPrice/dvol, identical for calls and puts."""
    _check_inputs(s, strike, vol, tau)
    deviation = vol * math.sqrt(tau)
    if deviation == 0:
        return 0.0
    d1, _ = _d1_d2(s, strike, deviation)
    return s * _INV_SQRT_2PI * math.exp(-0.5 * d1 * d1) * math.sqrt(tau)


def quote(s: float, strike: float, vol: float, tau: float) -> OptionQuote:
    """Price both option types at one strike."""
    return OptionQuote(
        strike=strike,
        tau=tau,
        vol=vol,
        call_price=bs_call(s, strike, vol, tau),
        put_price=bs_put(s, strike, vol, tau),
    )


def price_band(s: float, strike: float, *, is_call: bool) -> tuple[float, float]:
    """Return the open no-arbitrage band of an option price."""
    if is_call:
        return max(s - strike, 0.0), s
    return max(strike - s, 0.0), strike


def implied_vol_from_price(
    s: float,
    strike: float,
    tau: float,
    price: float,
    *,
    is_call: bool = True,
) -> float:
    """
    Invert the Black-Scholes price for the volatility.

    Brackets by doubling, then runs Newton steps that fall back to
    bisection whenever a step leaves the bracket.

    Args:
        s: Forward
        strike: Strike
        tau: Maturity in years
        price: Undiscounted option price
        is_call: True for a call price, False for a put price

    Returns:
        Volatility reproducing price

    Raises:
        SabrOutOfBandError: If price is not strictly inside the band
        SabrConvergenceError: If the iteration cap is hit

    """
    _check_inputs(s, strike, 0.0, tau)
    lower, upper = price_band(s, strike, is_call=is_call)
    if not (lower < price < upper) or tau == 0:
        raise SabrOutOfBandError(price, lower, upper)
    pricer = bs_call if is_call else bs_put

    lo, hi = 0.0, 1.0
    while pricer(s, strike, hi, tau) < price:
        lo, hi = hi, 2.0 * hi
        if hi > IV_VOL_CEILING:
            msg = f"Cannot bracket implied vol for price {price!r} below {hi}"
            raise SabrConvergenceError(msg)

    vol = 0.5 * (lo + hi)
    for iteration in range(IV_MAX_ITERATIONS):
        gap = pricer(s, strike, vol, tau) - price
        if gap == 0:
            return vol
        if gap > 0:
            hi = vol
        else:
            lo = vol
        vega = bs_vega(s, strike, vol, tau)
        step = gap / vega if vega > 0 else math.inf
        candidate = vol - step
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - vol) <= 1e-15 * max(vol, 1.0) or hi - lo <= 4e-16 * hi:
            vol = candidate
            break
        vol = candidate
    else:
        msg = (
            f"Implied vol did not converge in {IV_MAX_ITERATIONS} iterations "
            f"(price={price!r}, strike={strike!r}, tau={tau!r})"
        )
        raise SabrConvergenceError(msg)

    residual = abs(pricer(s, strike, vol, tau) - price)
    if residual > IV_PRICE_TOL:
        msg = (
            f"Implied vol residual {residual!r} above {IV_PRICE_TOL} "
            f"after {iteration + 1} steps"
        )
        raise SabrConvergenceError(msg)
    _LOGGER.debug("Implied vol %.15g after %d steps", vol, iteration + 1)
    return vol
