"""SABR parameters, moneyness transforms and the distance function D."""

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

from .const import BETA_EPS, Z_EPS

_LOGGER = logging.getLogger(__name__)


class SabrError(Exception):
    """Base exception for the SABR smile toolkit."""


class SabrDomainError(SabrError, ValueError):
    """Input lies outside the domain of a formula."""


class SabrConfigError(SabrError, ValueError):
    """Run configuration is invalid."""


class SabrDegenerateVolError(SabrError):
    """Composite implied volatility is not positive."""


class SabrConvergenceError(SabrError):
    """Root finder failed to converge or to bracket a root."""


class SabrSimulationError(SabrError):
    """Monte Carlo path produced non-finite values."""


class SabrOutOfBandError(SabrError):
    """Price lies outside the no-arbitrage band."""

    def __init__(self, price: float, lower: float, upper: float) -> None:
        """Initialize with the offending price and the open band."""
        self.price = price
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"Price {price!r} outside no-arbitrage band ({lower!r}, {upper!r})"
        )


class FormulaKind(StrEnum):
    """Zero-order implied volatility formula."""

    HAGAN_A65 = "hagan"
    BERESTYCKI = "berestycki"


@dataclass(frozen=True, slots=True)
class SabrParams:
    """
    SABR model state.

    dS = sigma S^beta dW1, dsigma = nu sigma dW2, d<W1, W2> = rho dt,
    S_0 = forward, sigma_0 = alpha.
    """

    alpha: float
    beta: float
    rho: float
    nu: float
    forward: float

    def __post_init__(self) -> None:
        """Validate the parameter invariants eagerly."""
        values = (self.alpha, self.beta, self.rho, self.nu, self.forward)
        if not all(math.isfinite(value) for value in values):
            msg = f"SABR parameters must be finite: {self}"
            raise SabrDomainError(msg)
        if self.alpha <= 0:
            msg = f"alpha must be positive, got {self.alpha}"
            raise SabrDomainError(msg)
        if self.forward <= 0:
            msg = f"forward must be positive, got {self.forward}"
            raise SabrDomainError(msg)
        if self.nu < 0:
            msg = f"nu must be non-negative, got {self.nu}"
            raise SabrDomainError(msg)
        if not 0 <= self.beta <= 1:
            msg = f"beta must lie in [0, 1], got {self.beta}"
            raise SabrDomainError(msg)
        _check_rho(self.rho)

    @property
    def lognormal(self) -> bool:
        """Return True when beta is treated as exactly one."""
        return abs(1.0 - self.beta) < BETA_EPS


def _check_rho(rho: float) -> None:
    if not abs(rho) < 1:
        msg = f"|rho| must be strictly below 1, got {rho}"
        raise SabrDomainError(msg)


def _check_positive(name: str, value: float) -> None:
    if not value > 0:
        msg = f"{name} must be positive, got {value}"
        raise SabrDomainError(msg)


def log_moneyness(forward: float, strike: float) -> float:
    """Return x = ln(forward / strike)."""
    _check_positive("forward", forward)
    _check_positive("strike", strike)
    if forward == strike:
        return 0.0
    return math.log(forward / strike)


def cev_distance(p: SabrParams, strike: float) -> float:
    """
    Return (s^(1-beta) - K^(1-beta)) / (1 - beta).

    Evaluated as K^(1-beta) * expm1((1-beta) x) / (1-beta), which has no
    cancellation near K = s or beta = 1. For |1 - beta| < BETA_EPS the
    ln(s/K) limit is returned.
    """
    x = log_moneyness(p.forward, strike)
    if p.lognormal:
        return x
    one_minus_beta = 1.0 - p.beta
    return strike**one_minus_beta * math.expm1(one_minus_beta * x) / one_minus_beta


def z_transform(p: SabrParams, strike: float) -> float:
    """Return z = (nu/alpha) (s^(1-beta) - K^(1-beta)) / (1-beta)."""
    return p.nu / p.alpha * cev_distance(p, strike)


def zeta_transform(p: SabrParams, strike: float) -> float:
    """Return zeta = (nu/alpha) (s - K) / (sK)^(beta/2)."""
    _check_positive("strike", strike)
    s = p.forward
    return p.nu / p.alpha * (s - strike) / (s * strike) ** (p.beta / 2.0)


def _d_series(z: float, rho: float) -> float:
    # D(z) = z + rho z^2 / 2 + (3 rho^2 - 1) z^3 / 6 + O(z^4)
    return z * (1.0 + z * (rho / 2.0 + z * (3.0 * rho * rho - 1.0) / 6.0))


def _d_closed(z: float, rho: float) -> float:
    # D(z, rho) = -D(-z, -rho): evaluate on z >= 0 only, where
    # sqrt(q) + z - rho has no cancellation.
    if z < 0:
        return -_d_closed(-z, -rho)
    root = math.sqrt(1.0 - 2.0 * rho * z + z * z)
    growth = z * (root + 1.0 + z - 2.0 * rho) / ((root + 1.0) * (1.0 - rho))
    return math.log1p(growth)


def d_function(z: float, rho: float) -> float:
    """
    Return D(z) = ln((sqrt(1 - 2 rho z + z^2) + z - rho) / (1 - rho)).

    Args:
        z: Moneyness transform (z or zeta)
        rho: Correlation, |rho| < 1

    Returns:
        D(z), odd-signed and strictly increasing in z with D(0) = 0

    """
    _check_rho(rho)
    if not math.isfinite(z):
        msg = f"z must be finite, got {z}"
        raise SabrDomainError(msg)
    if abs(z) < Z_EPS:
        return _d_series(z, rho)
    return _d_closed(z, rho)


def z_over_d(z: float, rho: float) -> float:
    """Return z / D(z), continued by 1 at z = 0."""
    _check_rho(rho)
    if abs(z) < Z_EPS:
        # 1 - rho z / 2 + (2 - 3 rho^2) z^2 / 12
        return 1.0 + z * (-rho / 2.0 + z * (2.0 - 3.0 * rho * rho) / 12.0)
    return z / _d_closed(z, rho)
