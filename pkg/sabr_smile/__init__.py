"""SABR small-maturity implied volatility asymptotics and arbitrage checks."""

from __future__ import annotations

from .black_scholes import bs_call, bs_put, implied_vol_from_price
from .core import (
    FormulaKind,
    SabrConfigError,
    SabrConvergenceError,
    SabrDegenerateVolError,
    SabrDomainError,
    SabrError,
    SabrOutOfBandError,
    SabrParams,
    SabrSimulationError,
)
from .montecarlo import McConfig, mc_implied_vol, simulate_terminal
from .smile import back_out_alpha, implied_vol, smile
from .structures import density_scan, price_triangle, triangle_curve

__all__ = [
    "FormulaKind",
    "McConfig",
    "SabrConfigError",
    "SabrConvergenceError",
    "SabrDegenerateVolError",
    "SabrDomainError",
    "SabrError",
    "SabrOutOfBandError",
    "SabrParams",
    "SabrSimulationError",
    "back_out_alpha",
    "bs_call",
    "bs_put",
    "density_scan",
    "implied_vol",
    "implied_vol_from_price",
    "mc_implied_vol",
    "price_triangle",
    "simulate_terminal",
    "smile",
    "triangle_curve",
]
