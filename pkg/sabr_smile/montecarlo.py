"""Monte Carlo simulation of the SABR forward as an oracle for the formulas."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .black_scholes import implied_vol_from_price, price_band
from .const import MC_BLOCK_SIZE, MC_PATHS, MC_SEED, MC_STEPS_PER_YEAR
from .core import SabrDomainError, SabrSimulationError

if TYPE_CHECKING:
    from collections.abc import Callable

    from .core import SabrParams
    from .structures import TriangleSpec

_LOGGER = logging.getLogger(__name__)

_SEED_LIMIT = 2**64


@dataclass(frozen=True, slots=True)
class McConfig:
    """Monte Carlo settings; results never depend on workers."""

    paths: int = MC_PATHS
    steps: int = MC_STEPS_PER_YEAR
    seed: int = MC_SEED
    absorption: bool = True
    antithetic: bool = True
    workers: int = 1
    block_size: int = MC_BLOCK_SIZE

    def __post_init__(self) -> None:
        """Validate the settings."""
        if self.paths < 1 or self.steps < 1 or self.workers < 1:
            msg = (
                f"paths, steps and workers must be at least 1, got "
                f"{self.paths}, {self.steps}, {self.workers}"
            )
            raise SabrDomainError(msg)
        if self.block_size < 2 or self.block_size % 2:  # noqa: PLR2004
            msg = f"block_size must be an even number >= 2, got {self.block_size}"
            raise SabrDomainError(msg)
        if not 0 <= self.seed < _SEED_LIMIT:
            msg = f"seed must be a 64-bit unsigned integer, got {self.seed}"
            raise SabrDomainError(msg)

    def time_steps(self, tau: float) -> int:
        """Return the number of Euler steps ceil(steps * tau), at least 1."""
        return max(1, math.ceil(self.steps * tau))

    def block_sizes(self) -> list[int]:
        """Split paths into fixed blocks; the layout depends on paths only."""
        full, rest = divmod(self.paths, self.block_size)
        return [self.block_size] * full + ([rest] if rest else [])


@dataclass(frozen=True, slots=True)
class McEstimate:
    """Monte Carlo estimate with its standard error."""

    value: float
    std_error: float
    paths_used: int


@dataclass(frozen=True, slots=True)
class TerminalSample:
    """Terminal forwards, kept per block so antithetic pairs stay aligned."""

    blocks: tuple[np.ndarray, ...]
    antithetic: bool

    @property
    def terminal(self) -> np.ndarray:
        """Return all terminal values in block order."""
        return np.concatenate(self.blocks)

    @property
    def paths(self) -> int:
        """Return the number of simulated paths."""
        return sum(block.size for block in self.blocks)

    def estimate(self, payoff: Callable[[np.ndarray], np.ndarray]) -> McEstimate:
        """Return the mean payoff and its standard error."""
        values = [np.asarray(payoff(block), dtype=float) for block in self.blocks]
        mean = float(np.mean(np.concatenate(values)))
        units = np.concatenate([self._units(block) for block in values])
        if units.size < 2:  # noqa: PLR2004
            return McEstimate(mean, math.inf, self.paths)
        std_error = float(np.std(units, ddof=1) / math.sqrt(units.size))
        return McEstimate(mean, std_error, self.paths)

    def _units(self, values: np.ndarray) -> np.ndarray:
        # Antithetic partners are averaged into one independent unit
        if not self.antithetic:
            return values
        half = (values.size + 1) // 2
        paired = values.size - half
        return np.concatenate(
            (0.5 * (values[:paired] + values[half:]), values[paired:half])
        )


def _simulate_block(
    p: SabrParams,
    tau: float,
    n_steps: int,
    size: int,
    seed: np.random.SeedSequence,
    cfg: McConfig,
) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    dt = tau / n_steps
    sqrt_dt = math.sqrt(dt)
    complement = math.sqrt(1.0 - p.rho * p.rho)
    drift = -0.5 * p.nu * p.nu * dt
    draws_per_step = (size + 1) // 2 if cfg.antithetic else size

    forward = np.full(size, p.forward)
    sigma = np.full(size, p.alpha)
    for _ in range(n_steps):
        draws = rng.standard_normal((2, draws_per_step))
        if cfg.antithetic:
            draws = np.concatenate((draws, -draws), axis=1)[:, :size]
        dw2 = sqrt_dt * draws[0]
        dw1 = p.rho * dw2 + complement * sqrt_dt * draws[1]
        # full truncation: S^beta is taken as zero wherever S <= 0
        level = np.maximum(forward, 0.0)
        diffusion = np.zeros(size)
        np.power(level, p.beta, out=diffusion, where=level > 0)
        forward = forward + sigma * diffusion * dw1
        if cfg.absorption:
            np.maximum(forward, 0.0, out=forward)
        sigma = sigma * np.exp(p.nu * dw2 + drift)

    if not np.all(np.isfinite(forward)):
        msg = f"Non-finite terminal forward in a block of {size} paths"
        raise SabrSimulationError(msg)
    return forward


def simulate_paths(p: SabrParams, tau: float, cfg: McConfig) -> TerminalSample:
    """
    Simulate the SABR forward to tau.

    sigma is updated exactly, sigma * exp(nu dW2 - nu^2 dt / 2); the forward
    uses full-truncation Euler. Each block draws from its own Philox stream
    spawned from cfg.seed, so the sample is bit-identical for any workers.
    """
    if not tau > 0:
        msg = f"tau must be positive, got {tau}"
        raise SabrDomainError(msg)
    n_steps = cfg.time_steps(tau)
    sizes = cfg.block_sizes()
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    _LOGGER.info(
        "Simulating %d paths in %d blocks, %d steps to tau=%s on %d worker(s)",
        cfg.paths,
        len(sizes),
        n_steps,
        tau,
        cfg.workers,
    )

    def run(block: tuple[int, np.random.SeedSequence]) -> np.ndarray:
        size, seed = block
        return _simulate_block(p, tau, n_steps, size, seed, cfg)

    if cfg.workers == 1:
        blocks = [run(block) for block in zip(sizes, seeds, strict=True)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            blocks = list(pool.map(run, zip(sizes, seeds, strict=True)))
    return TerminalSample(blocks=tuple(blocks), antithetic=cfg.antithetic)


def simulate_terminal(p: SabrParams, tau: float, cfg: McConfig) -> np.ndarray:
    """Return the simulated terminal forwards S_tau."""
    return simulate_paths(p, tau, cfg).terminal


def absorbed_fraction(terminal: np.ndarray) -> float:
    """Return the fraction of paths that ended at or below zero."""
    return float(np.mean(np.asarray(terminal) <= 0))


def mc_call_price(
    p: SabrParams,
    strike: float,
    tau: float,
    cfg: McConfig,
    sample: TerminalSample | None = None,
) -> McEstimate:
    """Return the Monte Carlo price of a call, max(S_tau - K, 0)."""
    if not strike >= 0:
        msg = f"strike must be non-negative, got {strike}"
        raise SabrDomainError(msg)
    if sample is None:
        sample = simulate_paths(p, tau, cfg)
    return sample.estimate(lambda terminal: np.maximum(terminal - strike, 0.0))


def mc_put_price(
    p: SabrParams,
    strike: float,
    tau: float,
    cfg: McConfig,
    sample: TerminalSample | None = None,
) -> McEstimate:
    """Return the Monte Carlo price of a put, max(K - S_tau, 0)."""
    if not strike >= 0:
        msg = f"strike must be non-negative, got {strike}"
        raise SabrDomainError(msg)
    if sample is None:
        sample = simulate_paths(p, tau, cfg)
    return sample.estimate(lambda terminal: np.maximum(strike - terminal, 0.0))


def mc_triangle_price(
    p: SabrParams,
    tau: float,
    spec: TriangleSpec,
    cfg: McConfig,
    sample: TerminalSample | None = None,
) -> McEstimate:
    """Return the Monte Carlo price of the triangle structure."""
    if sample is None:
        sample = simulate_paths(p, tau, cfg)
    return sample.estimate(spec.payoff)


def mc_implied_vol(
    p: SabrParams,
    strike: float,
    tau: float,
    cfg: McConfig,
    sample: TerminalSample | None = None,
) -> McEstimate:
    """
    Express a Monte Carlo option price as a Black-Scholes implied vol.

    The out-of-the-money side is priced (call for K >= s, put below), which
    carries the same implied vol by parity. The standard error is
    propagated by repricing at price +/- one standard error.

    Raises:
        SabrOutOfBandError: If the Monte Carlo price leaves the band

    """
    is_call = strike >= p.forward
    pricer = mc_call_price if is_call else mc_put_price
    price = pricer(p, strike, tau, cfg, sample)
    vol = implied_vol_from_price(p.forward, strike, tau, price.value, is_call=is_call)

    lower, upper = price_band(p.forward, strike, is_call=is_call)
    bumped = {}
    for sign in (1.0, -1.0):
        target = price.value + sign * price.std_error
        if lower < target < upper:
            bumped[sign] = implied_vol_from_price(
                p.forward, strike, tau, target, is_call=is_call
            )
    if len(bumped) == 2:  # noqa: PLR2004
        std_error = 0.5 * (bumped[1.0] - bumped[-1.0])
    elif bumped:
        std_error = abs(next(iter(bumped.values())) - vol)
    else:
        std_error = math.inf
    _LOGGER.debug(
        "MC implied vol at K=%s: %.10g +/- %.3g (price %.10g +/- %.3g)",
        strike,
        vol,
        std_error,
        price.value,
        price.std_error,
    )
    return McEstimate(vol, std_error, price.paths_used)

