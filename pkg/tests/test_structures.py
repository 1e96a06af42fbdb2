"""Tests for the triangle structure and the density scans."""

import numpy as np
import pytest

from sabr_smile.black_scholes import bs_put
from sabr_smile.core import FormulaKind, SabrDomainError, SabrParams
from sabr_smile.smile import build_strike_grid
from sabr_smile.structures import (
    CurvePoint,
    TriangleSpec,
    _violation_runs,
    density_scan,
    lognormal_density,
    negative_peaks,
    price_triangle,
    triangle_curve,
)

from .conftest import TAU15, TAU20

FLAT_VOL = 0.2
FLAT_TAU = 1.0
DENSITY_MATCH_TOL = 1e-6
MASS_LOW, MASS_HIGH = 0.999, 1.001
CONSISTENCY_TOL = 1e-4
PEAKS_PCT = build_strike_grid(0.25, 6.0, 24, geometric=False)
LOW_STRIKE_GRID_PCT = build_strike_grid(0.05, 8.01, 400)


@pytest.fixture
def flat_params() -> SabrParams:
    """
    Provide a flat lognormal smile: nu = 0, beta = 1.

    Returns:
        SabrParams: forward 1 and a 20% vol

    """
    return SabrParams(alpha=FLAT_VOL, beta=1.0, rho=0.0, nu=0.0, forward=1.0)


@pytest.fixture
def flat_pct() -> SabrParams:
    """Provide a flat 20% smile with the forward at 8.01 percent."""
    return SabrParams(alpha=FLAT_VOL, beta=1.0, rho=0.0, nu=0.0, forward=8.01)


def test_triangle_payoff_shape() -> None:
    """Test the payoff: zero at 0 and at the wing, width at the peak."""
    spec = TriangleSpec(peak=3.0)
    assert spec.wing == 5.0
    assert spec.short_notional == pytest.approx(5.0 / 3.0)
    assert spec.payoff(0.0) == pytest.approx(0.0, abs=1e-15)
    assert spec.payoff(3.0) == pytest.approx(2.0)
    assert spec.payoff(5.0) == 0.0
    assert spec.payoff(1.5) == pytest.approx(1.0)


def test_triangle_payoff_nonnegative() -> None:
    """Test payoff >= 0 on a dense terminal grid."""
    for peak in (0.25, 1.0, 4.0):
        spec = TriangleSpec(peak=peak)
        terminal = np.linspace(0.0, 3.0 * spec.wing, 10_001)
        assert np.all(spec.payoff(terminal) >= -1e-12)


@pytest.mark.parametrize(("peak", "width"), [(0.0, 2.0), (-1.0, 2.0), (1.0, 0.0)])
def test_triangle_rejects_bad_spec(peak: float, width: float) -> None:
    """Test that non-positive peaks and widths raise a domain error."""
    with pytest.raises(SabrDomainError, match="positive"):
        TriangleSpec(peak=peak, width=width)


def test_price_triangle_matches_puts(flat_pct: SabrParams) -> None:
    """Test the two-leg price on a flat smile."""
    price = price_triangle(FormulaKind.BERESTYCKI, flat_pct, FLAT_TAU, 3.0)
    expected = bs_put(8.01, 5.0, FLAT_VOL, FLAT_TAU) - 5.0 / 3.0 * bs_put(
        8.01, 3.0, FLAT_VOL, FLAT_TAU
    )
    assert price == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kind", list(FormulaKind))
def test_flat_smile_triangle_nonnegative(
    kind: FormulaKind, flat_pct: SabrParams
) -> None:
    """Test that a flat smile prices every triangle at or above zero."""
    curve = triangle_curve(kind, flat_pct, 15.0, PEAKS_PCT)
    assert all(point.price is not None for point in curve)
    assert negative_peaks(curve) == []


def test_triangle_curve_sorted_singleton(flat_pct: SabrParams) -> None:
    """Test that a one-peak curve is the single price, and curves sort by peak."""
    (point,) = triangle_curve(FormulaKind.HAGAN_A65, flat_pct, FLAT_TAU, [2.0])
    assert point.price == price_triangle(FormulaKind.HAGAN_A65, flat_pct, FLAT_TAU, 2.0)
    curve = triangle_curve(FormulaKind.HAGAN_A65, flat_pct, FLAT_TAU, [3.0, 1.0, 2.0])
    assert [point.peak for point in curve] == [1.0, 2.0, 3.0]


def test_triangle_curve_marks_failures(caplog: pytest.LogCaptureFixture) -> None:
    """Test that degenerate smile points become error markers, not exceptions."""
    degenerate = SabrParams(0.3, 1.0, -0.99, 2.0, 8.01)
    curve = triangle_curve(FormulaKind.BERESTYCKI, degenerate, 10.0, [1.0, 2.0])
    assert [point.price for point in curve] == [None, None]
    assert all("Degenerate" in point.error for point in curve)
    assert "not priced" in caplog.text


def test_negative_peaks_skips_failures() -> None:
    """Test that only priced negative points are reported."""
    curve = [CurvePoint(1.0, -0.1), CurvePoint(2.0, None, "x"), CurvePoint(3.0, 0.2)]
    assert negative_peaks(curve) == [1.0]


@pytest.mark.parametrize(
    ("setup", "fixture"), [(TAU15, "tau15_params"), (TAU20, "tau20_params")]
)
def test_low_strike_pathology(
    setup: dict[str, float], fixture: str, request: pytest.FixtureRequest
) -> None:
    """Test negative T(K) at low peaks, pushed lower by the corrected term."""
    p = request.getfixturevalue(fixture)
    tau = setup["tau"]
    hagan = negative_peaks(triangle_curve(FormulaKind.HAGAN_A65, p, tau, PEAKS_PCT))
    berestycki = negative_peaks(
        triangle_curve(FormulaKind.BERESTYCKI, p, tau, PEAKS_PCT)
    )
    assert hagan
    assert all(0 < peak < p.forward for peak in hagan)
    if berestycki:
        assert max(berestycki) < max(hagan)


def test_violation_runs() -> None:
    """Test that violations collapse into maximal runs of grid points."""
    strikes = np.arange(1.0, 9.0)
    mask = np.array([True, True, False, True, False, False, True, True])
    assert _violation_runs(strikes, mask) == [(1.0, 2.0), (4.0, 4.0), (7.0, 8.0)]
    assert _violation_runs(strikes, np.zeros(8, dtype=bool)) == []


def test_density_flat_smile_is_lognormal(flat_params: SabrParams) -> None:
    """Test the finite-difference density against the closed form."""
    grid = build_strike_grid(0.3, 3.0, 200)
    report = density_scan(FormulaKind.BERESTYCKI, flat_params, FLAT_TAU, grid)
    expected = [lognormal_density(1.0, strike, FLAT_VOL, FLAT_TAU) for strike in grid]
    assert np.max(np.abs(report.density - expected)) < DENSITY_MATCH_TOL
    assert not report.has_violations
    assert report.errors == []


def test_density_flat_smile_mass(flat_params: SabrParams) -> None:
    """Test that the flat-smile density integrates to one over [s/100, 10s]."""
    grid = build_strike_grid(0.01, 10.0, 2000)
    report = density_scan(FormulaKind.HAGAN_A65, flat_params, FLAT_TAU, grid)
    assert MASS_LOW <= report.integrate() <= MASS_HIGH


def test_density_prices_triangle() -> None:
    """Test that integrating the payoff against the density reprices T(K)."""
    p = SabrParams(alpha=0.3, beta=1.0, rho=0.0, nu=0.0, forward=1.0)
    spec = TriangleSpec(peak=0.8, width=0.2)
    grid = build_strike_grid(0.0005, 3.0, 6000, geometric=False)
    report = density_scan(FormulaKind.BERESTYCKI, p, FLAT_TAU, grid)
    direct = price_triangle(FormulaKind.BERESTYCKI, p, FLAT_TAU, 0.8, 0.2)
    assert report.integrate(spec.payoff) == pytest.approx(direct, rel=CONSISTENCY_TOL)


def test_density_low_strike_violations(tau15_params: SabrParams) -> None:
    """Test that both kinds imply a negative density below the forward."""
    tau = TAU15["tau"]
    hagan = density_scan(FormulaKind.HAGAN_A65, tau15_params, tau, LOW_STRIKE_GRID_PCT)
    berestycki = density_scan(
        FormulaKind.BERESTYCKI, tau15_params, tau, LOW_STRIKE_GRID_PCT
    )
    assert hagan.has_violations
    assert hagan.violations[-1][1] < tau15_params.forward
    # the corrected term moves the negative region, it does not remove it
    assert berestycki.has_violations
    assert berestycki.violations[-1][1] < tau15_params.forward


def test_density_marks_points_near_zero(flat_params: SabrParams) -> None:
    """Test that a strike within one step of zero is marked and skipped."""
    report = density_scan(
        FormulaKind.BERESTYCKI, flat_params, FLAT_TAU, [0.05, 1.0], h=0.1
    )
    assert np.isnan(report.density[0])
    assert np.isfinite(report.density[1])
    assert report.errors[0][0] == 0.05
    assert report.integrate() == 0.0


@pytest.mark.parametrize("grid", [[], [1.0, 1.0], [2.0, 1.0]])
def test_density_rejects_bad_grid(flat_params: SabrParams, grid: list[float]) -> None:
    """Test that grids that are not strictly increasing raise a domain error."""
    with pytest.raises(SabrDomainError, match="strictly increasing"):
        density_scan(FormulaKind.BERESTYCKI, flat_params, FLAT_TAU, grid)


def test_density_tolerance_floor(flat_params: SabrParams) -> None:
    """Test that a tiny step raises the threshold to the round-off floor."""
    report = density_scan(
        FormulaKind.BERESTYCKI, flat_params, FLAT_TAU, [0.9, 1.0, 1.1], h=1e-6
    )
    assert report.tolerance > 1e-5
    assert not report.has_violations
