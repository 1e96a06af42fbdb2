"""Triangle structure T(K) and risk-neutral density scans."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import trapezoid

from .black_scholes import bs_call, bs_put
from .const import (
    DENSITY_STEP_FRACTION,
    DENSITY_TOL,
    ROUNDOFF_FLOOR_FACTOR,
    TRIANGLE_WIDTH_PCT,
)
from .core import SabrDomainError, SabrError
from .smile import implied_vol

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence

    from .core import FormulaKind, SabrParams

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class TriangleSpec:
    """
    Long a put at peak + width, short short_notional puts at peak.

    The payoff is zero at 0 and at the wing, linear in between, with
    value width at the peak.
    """

    peak: float
    width: float = TRIANGLE_WIDTH_PCT

    def __post_init__(self) -> None:
        """Validate the structure."""
        if not (self.peak > 0 and self.width > 0):
            msg = f"peak and width must be positive, got {self.peak}, {self.width}"
            raise SabrDomainError(msg)

    @property
    def wing(self) -> float:
        """Strike of the long put."""
        return self.peak + self.width

    @property
    def short_notional(self) -> float:
        """Notional of the short put, (K + 2) / K in percent units."""
        return self.wing / self.peak

    def payoff(self, terminal: np.ndarray | float) -> np.ndarray:
        """Return the payoff at terminal forward levels."""
        terminal = np.asarray(terminal, dtype=float)
        long_leg = np.maximum(self.wing - terminal, 0.0)
        short_leg = np.maximum(self.peak - terminal, 0.0)
        return long_leg - self.short_notional * short_leg


@dataclass(slots=True)
class DensityReport:
    """Finite-difference risk-neutral density over a strike grid."""

    strikes: np.ndarray
    density: np.ndarray
    violations: list[tuple[float, float]] = field(default_factory=list)
    errors: list[tuple[float, str]] = field(default_factory=list)
    tolerance: float = DENSITY_TOL

    @property
    def has_violations(self) -> bool:
        """Return True if any strike carries negative density."""
        return bool(self.violations)

    def integrate(
        self, payoff: Callable[[np.ndarray], np.ndarray] | None = None
    ) -> float:
        """
        Integrate payoff against the density with the trapezoid rule.

        Without a payoff this is the probability mass on the grid. Points
        whose smile failed are left out.
        """
        keep = np.isfinite(self.density)
        strikes = self.strikes[keep]
        weights = self.density[keep]
        if payoff is not None:
            weights = weights * np.asarray(payoff(strikes), dtype=float)
        return float(trapezoid(weights, strikes))


@dataclass(frozen=True, slots=True)
class CurvePoint:
    """One peak of a T(K) curve; price is None when the smile failed."""

    peak: float
    price: float | None
    error: str | None = None


def _smile_call(kind: FormulaKind, p: SabrParams, strike: float, tau: float) -> float:
    vol = implied_vol(kind, p, strike, tau).vol
    return bs_call(p.forward, strike, vol, tau)


def _smile_put(kind: FormulaKind, p: SabrParams, strike: float, tau: float) -> float:
    vol = implied_vol(kind, p, strike, tau).vol
    return bs_put(p.forward, strike, vol, tau)


def price_triangle(
    kind: FormulaKind,
    p: SabrParams,
    tau: float,
    peak: float,
    width: float = TRIANGLE_WIDTH_PCT,
) -> float:
    """
    Price T(K) with both legs on the smile of the selected formula.

    Args:
        kind: Zero-order formula
        p: SABR parameters; the forward sets the strike units
        tau: Maturity in years
        peak: Peak strike K
        width: Wing offset, 2 in percent units

    Returns:
        P(K + width) - (K + width) / K * P(K)

    """
    spec = TriangleSpec(peak=peak, width=width)
    return _smile_put(kind, p, spec.wing, tau) - spec.short_notional * _smile_put(
        kind, p, spec.peak, tau
    )


def triangle_curve(
    kind: FormulaKind,
    p: SabrParams,
    tau: float,
    peaks: Iterable[float],
    width: float = TRIANGLE_WIDTH_PCT,
) -> list[CurvePoint]:
    """Map price_triangle over peaks, sorted by peak, marking failed points."""
    curve = []
    for peak in sorted(peaks):
        try:
            curve.append(CurvePoint(peak, price_triangle(kind, p, tau, peak, width)))
        except SabrError as err:
            _LOGGER.warning("T(%s) under %s not priced: %s", peak, kind, err)
            curve.append(CurvePoint(peak, None, str(err)))
    return curve


def negative_peaks(curve: Sequence[CurvePoint]) -> list[float]:
    """Return the peaks whose T(K) price is negative."""
    return [
        point.peak for point in curve if point.price is not None and point.price < 0
    ]


def _violation_runs(strikes: np.ndarray, mask: np.ndarray) -> list[tuple[float, float]]:
    runs = []
    start = None
    for index, flagged in enumerate(mask):
        if flagged and start is None:
            start = index
        elif not flagged and start is not None:
            runs.append((float(strikes[start]), float(strikes[index - 1])))
            start = None
    if start is not None:
        runs.append((float(strikes[start]), float(strikes[-1])))
    return runs


def density_scan(  # noqa: PLR0913
    kind: FormulaKind,
    p: SabrParams,
    tau: float,
    grid: Sequence[float],
    h: float | None = None,
    tol: float = DENSITY_TOL,
) -> DensityReport:
    """
    Scan the smile-implied density [C(K-h) - 2C(K) + C(K+h)] / h^2.

    Points whose smile cannot be evaluated get NaN density and an entry in
    the report's errors; the scan continues. The violation threshold never
    drops below the round-off floor of the second difference.

    Args:
        kind: Zero-order formula
        p: SABR parameters
        tau: Maturity in years
        grid: Strictly increasing strikes
        h: Difference step, defaults to 1e-4 * forward
        tol: Density below -tol counts as a violation

    Returns:
        DensityReport with maximal runs of violating grid points

    """
    strikes = np.asarray(grid, dtype=float)
    if strikes.ndim != 1 or strikes.size == 0 or np.any(np.diff(strikes) <= 0):
        msg = "density grid must be a non-empty strictly increasing sequence"
        raise SabrDomainError(msg)
    h = DENSITY_STEP_FRACTION * p.forward if h is None else h
    if not h > 0:
        msg = f"difference step must be positive, got {h}"
        raise SabrDomainError(msg)

    floor = ROUNDOFF_FLOOR_FACTOR * np.finfo(float).eps * p.forward / h**2
    tolerance = max(tol, floor)
    density = np.full(strikes.shape, np.nan)
    errors = []
    for index, strike in enumerate(strikes):
        try:
            if strike - h <= 0:
                msg = f"strike {strike!r} within one step {h!r} of zero"
                raise SabrDomainError(msg)
            calls = [
                _smile_call(kind, p, float(point), tau)
                for point in (strike - h, strike, strike + h)
            ]
        except SabrError as err:
            _LOGGER.warning("Density at K=%s under %s skipped: %s", strike, kind, err)
            errors.append((float(strike), str(err)))
            continue
        density[index] = (calls[0] - 2.0 * calls[1] + calls[2]) / (h * h)

    with np.errstate(invalid="ignore"):
        mask = density < -tolerance
    violations = _violation_runs(strikes, mask)
    if violations:
        _LOGGER.info(
            "Negative %s density in %d interval(s), first %s",
            kind,
            len(violations),
            violations[0],
        )
    return DensityReport(
        strikes=strikes,
        density=density,
        violations=violations,
        errors=errors,
        tolerance=tolerance,
    )


def lognormal_density(s: float, strike: float, vol: float, tau: float) -> float:
    """Return the closed-form density of a driftless lognormal forward at strike."""
    deviation = vol * math.sqrt(tau)
    d2 = (math.log(s / strike) - 0.5 * deviation * deviation) / deviation
    return math.exp(-0.5 * d2 * d2) / (strike * deviation * math.sqrt(2.0 * math.pi))
