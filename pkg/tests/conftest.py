"""Shared fixtures: the two low-strike pathology set-ups."""

import pytest

from sabr_smile.core import SabrParams
from sabr_smile.smile import back_out_alpha

TAU15 = {"beta": 0.4, "rho": -0.33, "nu": 0.25, "tau": 15.0}
TAU20 = {"beta": 0.6, "rho": -0.37, "nu": 0.245, "tau": 20.0}
FORWARD_PCT = 8.01
ATM_VOL = 0.0425


def _setup_params(setup: dict[str, float], forward: float) -> SabrParams:
    alpha = back_out_alpha(
        ATM_VOL,
        setup["beta"],
        setup["rho"],
        setup["nu"],
        forward,
        setup["tau"],
    )
    return SabrParams(alpha, setup["beta"], setup["rho"], setup["nu"], forward)


@pytest.fixture
def tau15_params() -> SabrParams:
    """
    Provide the 15 year set-up in percent units.

    Returns:
        SabrParams: forward 8.01, alpha backed out of a 4.25% ATM vol

    """
    return _setup_params(TAU15, FORWARD_PCT)


@pytest.fixture
def tau15_decimal() -> SabrParams:
    """Provide the 15 year set-up in decimal units, forward 0.0801."""
    return _setup_params(TAU15, FORWARD_PCT / 100.0)


@pytest.fixture
def tau20_params() -> SabrParams:
    """Provide the 20 year set-up in percent units."""
    return _setup_params(TAU20, FORWARD_PCT)
