"""Run configuration: config files, flag precedence and validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

import voluptuous as vol

from .const import (
    ALPHA_MODES,
    CONF_ABSORPTION,
    CONF_ALPHA,
    CONF_ALPHA_MODE,
    CONF_ANTITHETIC,
    CONF_ATM,
    CONF_BETA,
    CONF_DRAWS,
    CONF_FORMAT,
    CONF_FORMULA,
    CONF_FORWARD,
    CONF_GRID,
    CONF_MC,
    CONF_NU,
    CONF_OUT,
    CONF_PATHS,
    CONF_RHO,
    CONF_SEED,
    CONF_STEP,
    CONF_STEPS,
    CONF_TAU,
    CONF_UNITS,
    CONF_WORKERS,
    FORMATS,
    FORMULAS,
    GRID_COUNT,
    GRID_HIGH_FRACTION,
    GRID_LOW_FRACTION,
    MC_CHECK_GRID,
    MC_PATHS,
    MC_SEED,
    MC_STEPS_PER_YEAR,
    PEAK_GRID_PCT,
    PERCENT,
    TABLE1_DRAWS,
    TABLE1_SEED,
    TRIANGLE_WIDTH_PCT,
    UNITS,
)
from .core import FormulaKind, SabrConfigError, SabrDomainError, SabrParams
from .montecarlo import McConfig
from .smile import AlphaMode, back_out_alpha, build_strike_grid

if TYPE_CHECKING:
    from collections.abc import Mapping

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Strike grid bounds and spacing."""

    lo: float
    hi: float
    count: int
    geometric: bool = True

    def strikes(self) -> list[float]:
        """Return the grid points."""
        return build_strike_grid(self.lo, self.hi, self.count, geometric=self.geometric)


def parse_grid(value: Any) -> GridSpec:
    """Parse min:max:count[:geom|lin] into a GridSpec."""
    if isinstance(value, GridSpec):
        return value
    parts = str(value).split(":")
    if len(parts) not in (3, 4):
        msg = f"grid must be min:max:count[:geom|lin], got {value!r}"
        raise vol.Invalid(msg)
    spacing = parts[3] if len(parts) == 4 else "geom"  # noqa: PLR2004
    if spacing not in ("geom", "lin"):
        msg = f"grid spacing must be geom or lin, got {spacing!r}"
        raise vol.Invalid(msg)
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as err:
        msg = f"grid bounds must be numbers and count an integer: {value!r}"
        raise vol.Invalid(msg) from err
    if count < 2 or not 0 < lo < hi:  # noqa: PLR2004
        msg = f"grid needs count >= 2 and 0 < min < max, got {value!r}"
        raise vol.Invalid(msg)
    return GridSpec(lo, hi, count, geometric=spacing == "geom")


def _positive() -> vol.All:
    return vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))


def _count(minimum: int = 1) -> vol.All:
    return vol.All(vol.Coerce(int), vol.Range(min=minimum))


_MC_FIELDS = {
    vol.Optional(CONF_SEED, default=MC_SEED): vol.All(
        vol.Coerce(int), vol.Range(min=0, max=2**64 - 1)
    ),
    vol.Optional(CONF_PATHS, default=MC_PATHS): _count(),
    vol.Optional(CONF_STEPS, default=MC_STEPS_PER_YEAR): _count(),
    vol.Optional(CONF_WORKERS, default=1): _count(),
    vol.Optional(CONF_ANTITHETIC, default=True): vol.Boolean(),
    vol.Optional(CONF_ABSORPTION, default=True): vol.Boolean(),
}

_OUTPUT_FIELDS = {
    vol.Optional(CONF_FORMAT, default="csv"): vol.In(FORMATS),
    vol.Optional(CONF_OUT): vol.All(str, vol.Length(min=1)),
}


def _require_level(config: dict[str, Any]) -> dict[str, Any]:
    if CONF_ALPHA not in config and CONF_ATM not in config:
        msg = "one of alpha or atm is required"
        raise vol.Invalid(msg)
    return config


RUN_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Exclusive(CONF_ALPHA, "level"): _positive(),
            vol.Exclusive(CONF_ATM, "level"): _positive(),
            vol.Optional(CONF_ALPHA_MODE, default="first_order"): vol.In(ALPHA_MODES),
            vol.Required(CONF_BETA): vol.All(
                vol.Coerce(float), vol.Range(min=0, max=1)
            ),
            vol.Required(CONF_RHO): vol.All(
                vol.Coerce(float),
                vol.Range(min=-1, max=1, min_included=False, max_included=False),
            ),
            vol.Required(CONF_NU): vol.All(vol.Coerce(float), vol.Range(min=0)),
            vol.Required(CONF_FORWARD): _positive(),
            vol.Required(CONF_TAU): vol.All(vol.Coerce(float), vol.Range(min=0)),
            vol.Optional(CONF_FORMULA, default="both"): vol.In(FORMULAS),
            vol.Optional(CONF_GRID): parse_grid,
            vol.Optional(CONF_UNITS, default="percent"): vol.In(UNITS),
            vol.Optional(CONF_STEP): _positive(),
            vol.Optional(CONF_MC, default=False): vol.Boolean(),
            **_MC_FIELDS,
            **_OUTPUT_FIELDS,
        }
    ),
    _require_level,
)

TABLE1_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_SEED, default=TABLE1_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=2**64 - 1)
        ),
        vol.Optional(CONF_DRAWS, default=TABLE1_DRAWS): _count(),
        **_OUTPUT_FIELDS,
    },
    extra=vol.REMOVE_EXTRA,
)


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Validated configuration of one command-line run."""

    params: SabrParams | None = None
    tau: float = 0.0
    kinds: tuple[FormulaKind, ...] = (FormulaKind.HAGAN_A65, FormulaKind.BERESTYCKI)
    grid: GridSpec | None = None
    units: str = "percent"
    atm: float | None = None
    alpha_mode: AlphaMode = AlphaMode.FIRST_ORDER
    mc: McConfig = field(default_factory=McConfig)
    with_mc: bool = False
    h: float | None = None
    draws: int = TABLE1_DRAWS
    seed: int = TABLE1_SEED
    fmt: str = "csv"
    out: Path | None = None

    @property
    def forward(self) -> float:
        """Return the forward in the configured units."""
        if self.params is None:
            msg = "command needs SABR parameters"
            raise SabrConfigError(msg)
        return self.params.forward

    @property
    def triangle_width(self) -> float:
        """Return the T(K) wing offset: 2 percentage points in either unit."""
        if self.units == "percent":
            return TRIANGLE_WIDTH_PCT
        return TRIANGLE_WIDTH_PCT / PERCENT

    def strikes(self) -> list[float]:
        """Return the strike grid, defaulting to 200 points over [s/10, 3s]."""
        if self.grid is not None:
            return self.grid.strikes()
        return build_strike_grid(
            GRID_LOW_FRACTION * self.forward,
            GRID_HIGH_FRACTION * self.forward,
            GRID_COUNT,
        )

    def peaks(self) -> list[float]:
        """Return T(K) peaks, defaulting to 0.25%..6%."""
        if self.grid is not None:
            return self.grid.strikes()
        lo, hi, count = PEAK_GRID_PCT
        scale = 1.0 if self.units == "percent" else 1.0 / PERCENT
        return build_strike_grid(lo * scale, hi * scale, count, geometric=False)

    def check_strikes(self) -> list[float]:
        """Return Monte Carlo check strikes, defaulting to 0.95s..1.05s."""
        if self.grid is not None:
            return self.grid.strikes()
        lo, hi, count = MC_CHECK_GRID
        return build_strike_grid(
            lo * self.forward, hi * self.forward, count, geometric=False
        )


def read_config_file(path: Path) -> dict[str, str]:
    """
    Read a key=value config file.

    Args:
        path: File to read; blank lines and # comments are skipped

    Returns:
        Raw string values keyed by lower-cased key

    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        msg = f"Cannot read config file {path}: {err}"
        raise SabrConfigError(msg) from err

    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            msg = f"{path}:{number}: expected key=value, got {raw!r}"
            raise SabrConfigError(msg)
        values[key.strip().lower().replace("-", "_")] = value.strip()
    _LOGGER.debug("Read %d settings from %s", len(values), path)
    return values


def merge_sources(
    file_values: Mapping[str, Any], flags: Mapping[str, Any]
) -> dict[str, Any]:
    """Overlay flags that were given on top of config file values."""
    merged = dict(file_values)
    merged.update({key: value for key, value in flags.items() if value is not None})
    # a flag level replaces a file level of the other kind
    if flags.get(CONF_ALPHA) is not None:
        merged.pop(CONF_ATM, None)
    if flags.get(CONF_ATM) is not None:
        merged.pop(CONF_ALPHA, None)
    return merged


def _validate(schema: vol.Schema | vol.All, raw: Mapping[str, Any]) -> dict[str, Any]:
    try:
        return schema(dict(raw))
    except vol.Invalid as err:
        msg = f"Invalid configuration: {err}"
        raise SabrConfigError(msg) from err


def _resolve_params(config: Mapping[str, Any]) -> tuple[SabrParams, float | None]:
    atm = config.get(CONF_ATM)
    if atm is not None and config[CONF_UNITS] == "percent":
        atm = atm / PERCENT
    try:
        if atm is None:
            alpha = config[CONF_ALPHA]
        else:
            alpha = back_out_alpha(
                atm,
                config[CONF_BETA],
                config[CONF_RHO],
                config[CONF_NU],
                config[CONF_FORWARD],
                config[CONF_TAU],
                AlphaMode(config[CONF_ALPHA_MODE]),
            )
        params = SabrParams(
            alpha=alpha,
            beta=config[CONF_BETA],
            rho=config[CONF_RHO],
            nu=config[CONF_NU],
            forward=config[CONF_FORWARD],
        )
    except SabrDomainError as err:
        msg = f"Invalid SABR parameters: {err}"
        raise SabrConfigError(msg) from err
    return params, atm


def _output_path(config: Mapping[str, Any]) -> Path | None:
    return Path(config[CONF_OUT]) if config.get(CONF_OUT) else None


def build_run_config(command: str, raw: Mapping[str, Any]) -> RunConfig:
    """
    Validate merged settings and assemble the RunConfig of a command.

    Raises:
        SabrConfigError: If any setting is invalid

    """
    if command == "table1":
        config = _validate(TABLE1_SCHEMA, raw)
        return RunConfig(
            draws=config[CONF_DRAWS],
            seed=config[CONF_SEED],
            fmt=config[CONF_FORMAT],
            out=_output_path(config),
        )

    config = _validate(RUN_SCHEMA, raw)
    params, atm = _resolve_params(config)
    formula = config[CONF_FORMULA]
    kinds = (
        (FormulaKind.HAGAN_A65, FormulaKind.BERESTYCKI)
        if formula == "both"
        else (FormulaKind(formula),)
    )
    mc = McConfig(
        paths=config[CONF_PATHS],
        steps=config[CONF_STEPS],
        seed=config[CONF_SEED],
        absorption=config[CONF_ABSORPTION],
        antithetic=config[CONF_ANTITHETIC],
        workers=config[CONF_WORKERS],
    )
    run = RunConfig(
        params=params,
        tau=config[CONF_TAU],
        kinds=kinds,
        grid=config.get(CONF_GRID),
        units=config[CONF_UNITS],
        atm=atm,
        alpha_mode=AlphaMode(config[CONF_ALPHA_MODE]),
        mc=mc,
        with_mc=config[CONF_MC],
        h=config.get(CONF_STEP),
        fmt=config[CONF_FORMAT],
        out=_output_path(config),
    )
    _LOGGER.info("Run config for %s: %s", command, run)
    return run
