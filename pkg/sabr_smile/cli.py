"""Command line: smile, triangle, density, mc-check and table1 tables."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any

from .config import build_run_config, merge_sources, read_config_file
from .const import (
    ALPHA_MODES,
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_OUT_OF_BAND,
    FORMATS,
    FORMULAS,
    UNITS,
)
from .core import (
    FormulaKind,
    SabrConfigError,
    SabrDegenerateVolError,
    SabrDomainError,
    SabrError,
    SabrOutOfBandError,
)
from .montecarlo import mc_implied_vol, mc_triangle_price, simulate_paths
from .smile import compare_zero_order, implied_vol
from .structures import TriangleSpec, density_scan, triangle_curve
from .util import Table, write_table

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from .config import RunConfig

_LOGGER = logging.getLogger(__name__)


def cmd_smile(cfg: RunConfig) -> Table:
    """Tabulate strike, x, I0, I1 and vol per formula kind."""
    p = cfg.params
    both = len(cfg.kinds) > 1
    if both:
        columns = (
            "strike",
            "x",
            "i1",
            "i0_hagan",
            "vol_hagan",
            "i0_berestycki",
            "vol_berestycki",
            "abs_diff",
        )
    else:
        columns = ("strike", "x", "i0", "i1", "vol")
    table = Table(columns=columns)

    for strike in cfg.strikes():
        points = {}
        for kind in cfg.kinds:
            try:
                points[kind] = implied_vol(kind, p, strike, cfg.tau)
            except SabrDegenerateVolError as err:
                _LOGGER.warning("Smile point skipped: %s", err)
                points[kind] = None
        if not both:
            point = points[cfg.kinds[0]]
            if point is None:
                table.add(strike, None, None, None, None)
            else:
                table.add(strike, point.x, point.i0, point.i1, point.vol)
            continue
        hagan = points[FormulaKind.HAGAN_A65]
        berestycki = points[FormulaKind.BERESTYCKI]
        anchor = hagan or berestycki
        table.add(
            strike,
            anchor.x if anchor else None,
            anchor.i1 if anchor else None,
            hagan.i0 if hagan else None,
            hagan.vol if hagan else None,
            berestycki.i0 if berestycki else None,
            berestycki.vol if berestycki else None,
            abs(hagan.vol - berestycki.vol) if hagan and berestycki else None,
        )
    return table


def cmd_triangle(cfg: RunConfig) -> Table:
    """Tabulate T(K) prices per formula, with optional Monte Carlo columns."""
    p = cfg.params
    peaks = cfg.peaks()
    columns = ["peak", *(f"price_{kind.value}" for kind in cfg.kinds)]
    if cfg.with_mc:
        columns += ["mc_price", "mc_se"]
    table = Table(columns=tuple(columns))

    curves = [
        triangle_curve(kind, p, cfg.tau, peaks, cfg.triangle_width)
        for kind in cfg.kinds
    ]
    sample = simulate_paths(p, cfg.tau, cfg.mc) if cfg.with_mc else None
    for index, peak in enumerate(sorted(peaks)):
        row: list[Any] = [peak, *(curve[index].price for curve in curves)]
        if sample is not None:
            spec = TriangleSpec(peak=peak, width=cfg.triangle_width)
            estimate = mc_triangle_price(p, cfg.tau, spec, cfg.mc, sample)
            row += [estimate.value, estimate.std_error]
        table.add(*row)
    return table


def cmd_density(cfg: RunConfig) -> Table:
    """Tabulate the smile-implied density and its violation flags."""
    p = cfg.params
    strikes = cfg.strikes()
    columns = ["strike"]
    for kind in cfg.kinds:
        columns += [f"density_{kind.value}", f"violation_{kind.value}"]
    table = Table(columns=tuple(columns))

    reports = {
        kind: density_scan(kind, p, cfg.tau, strikes, cfg.h) for kind in cfg.kinds
    }
    for kind, report in reports.items():
        for lo, hi in report.violations:
            _LOGGER.warning("Negative %s density on [%s, %s]", kind, lo, hi)
        table.meta[f"violations_{kind.value}"] = report.violations
        table.meta[f"errors_{kind.value}"] = report.errors
        table.meta[f"mass_{kind.value}"] = report.integrate()

    for index, strike in enumerate(reports[cfg.kinds[0]].strikes):
        row: list[Any] = [float(strike)]
        for report in reports.values():
            density = float(report.density[index])
            row += [density, bool(density < -report.tolerance)]
        table.add(*row)
    return table


def z_score(gap: float, std_error: float) -> float | None:
    """Return gap / std_error, or None when the error is zero or not finite."""
    if not math.isfinite(std_error) or std_error <= 0:
        return None
    return gap / std_error


def cmd_mc_check(cfg: RunConfig) -> Table:
    """Compare formula vols with Monte Carlo implied vols strike by strike."""
    p = cfg.params
    table = Table(
        columns=("strike", "formula", "formula_vol", "mc_vol", "mc_se", "z_score")
    )
    sample = simulate_paths(p, cfg.tau, cfg.mc)
    for strike in cfg.check_strikes():
        estimate = mc_implied_vol(p, strike, cfg.tau, cfg.mc, sample)
        for kind in cfg.kinds:
            formula_vol = implied_vol(kind, p, strike, cfg.tau).vol
            gap = estimate.value - formula_vol
            table.add(
                strike,
                kind.value,
                formula_vol,
                estimate.value,
                estimate.std_error,
                z_score(gap, estimate.std_error),
            )
    return table


def cmd_table1(cfg: RunConfig) -> Table:
    """Summarise the four zero-order cases over a seeded random sweep."""
    table = Table(
        columns=("case", "relation", "max_rel_diff", "share_above_tol", "draws")
    )
    for row in compare_zero_order(seed=cfg.seed, draws=cfg.draws):
        table.add(
            row.case, row.relation, row.max_rel_diff, row.share_above_tol, row.draws
        )
    return table


COMMANDS: dict[str, Callable[[RunConfig], Table]] = {
    "smile": cmd_smile,
    "triangle": cmd_triangle,
    "density": cmd_density,
    "mc-check": cmd_mc_check,
    "table1": cmd_table1,
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    level = parser.add_mutually_exclusive_group()
    level.add_argument("--alpha", help="initial volatility alpha, forward units")
    level.add_argument("--atm", help="ATM implied vol to back alpha out of")
    parser.add_argument("--alpha-mode", dest="alpha_mode", choices=ALPHA_MODES)
    parser.add_argument("--beta", help="CEV exponent in [0, 1]")
    parser.add_argument("--rho", help="correlation, |rho| < 1")
    parser.add_argument("--nu", help="vol-of-vol")
    parser.add_argument("--forward", help="forward level")
    parser.add_argument("--tau", help="maturity in years")
    parser.add_argument("--formula", choices=FORMULAS)
    parser.add_argument("--grid", help="min:max:count[:geom|lin]")
    parser.add_argument("--units", choices=UNITS)
    parser.add_argument("--h", help="density difference step")
    parser.add_argument("--seed")
    parser.add_argument("--paths")
    parser.add_argument("--steps", help="Euler steps per year")
    parser.add_argument("--workers")
    parser.add_argument(
        "--antithetic", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument(
        "--absorption", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument(
        "--mc", action="store_true", default=None, help="add Monte Carlo columns"
    )
    parser.add_argument("--draws", help="table1 draws per case")
    parser.add_argument("--out", help="output file, stdout when omitted")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--config", type=Path, help="key=value config file")
    parser.add_argument("--log-level", dest="log_level", default="WARNING")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per table."""
    parser = argparse.ArgumentParser(
        prog="sabr-smile",
        description="SABR implied volatility asymptotics and arbitrage checks.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, handler in COMMANDS.items():
        _add_common_flags(commands.add_parser(name, help=handler.__doc__))
    return parser


_NON_SETTINGS = {"command", "config", "log_level"}


def _exit_code(err: SabrError) -> int:
    if isinstance(err, SabrOutOfBandError):
        return EXIT_OUT_OF_BAND
    if isinstance(err, SabrConfigError | SabrDomainError):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=str(args.log_level).upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        file_values = read_config_file(args.config) if args.config else {}
        flags = {
            key: value
            for key, value in vars(args).items()
            if key not in _NON_SETTINGS
        }
        cfg = build_run_config(args.command, merge_sources(file_values, flags))
        _LOGGER.info("Running %s", args.command)
        table = COMMANDS[args.command](cfg)
        write_table(table, cfg.fmt, cfg.out, sys.stdout)
    except SabrError as err:
        _LOGGER.exception("%s failed", args.command)
        print(f"error: {err}", file=sys.stderr)  # noqa: T201
        return _exit_code(err)
    return EXIT_OK
