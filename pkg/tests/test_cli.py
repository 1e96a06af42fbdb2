"""Tests for the command line surface."""

import csv
import io
import math
import pathlib

import orjson
import pytest

from sabr_smile.cli import build_parser, main, z_score
from sabr_smile.const import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_OUT_OF_BAND

CONFIG_DIR = pathlib.Path(__file__).parent.parent / "config"
TAU15_CFG = str(CONFIG_DIR / "tau15.cfg")
FLAT_FLAGS = [
    "--alpha", "0.2", "--beta", "1", "--rho", "0", "--nu", "0",
    "--forward", "1", "--units", "decimal",
]  # fmt: skip
DEGENERATE_FLAGS = [
    "--alpha", "0.3", "--beta", "1", "--rho", "-0.99", "--nu", "2",
    "--forward", "1", "--tau", "10", "--units", "decimal",
]  # fmt: skip
ATM_TOL = 1e-10
EQUAL_TOL = 1e-12


def _run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def test_parser_lists_subcommands() -> None:
    """Test that every table has a subcommand."""
    parser = build_parser()
    for command in ("smile", "triangle", "density", "mc-check", "table1"):
        assert parser.parse_args([command]).command == command


def test_alpha_and_atm_flags_exclusive() -> None:
    """Test that argparse refuses both level flags at once."""
    with pytest.raises(SystemExit):
        build_parser().parse_args(["smile", "--alpha", "0.2", "--atm", "4"])


def test_smile_both_columns(capsys: pytest.CaptureFixture[str]) -> None:
    """Test the paired columns of the smile table on the 15 year set-up."""
    code, out, _ = _run(capsys, "smile", "--config", TAU15_CFG, "--grid", "1:16:5")
    assert code == EXIT_OK
    assert out.splitlines()[0] == (
        "strike,x,i1,i0_hagan,vol_hagan,i0_berestycki,vol_berestycki,abs_diff"
    )
    rows = _rows(out)
    assert len(rows) == 5
    assert all(float(row["strike"]) > 0 for row in rows)
    assert "\r" not in out


def test_smile_atm_grid_reprices_quote(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that strikes hugging the forward return the quoted ATM vol."""
    grid = "8.009999999:8.010000001:2"
    code, out, _ = _run(
        capsys, "smile", "--config", TAU15_CFG, "--grid", grid, "--formula", "hagan"
    )
    assert code == EXIT_OK
    for row in _rows(out):
        assert float(row["vol"]) == pytest.approx(0.0425, abs=ATM_TOL)


def test_smile_nu_zero_kinds_agree(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that the two kinds agree when nu = 0."""
    code, out, _ = _run(
        capsys, "smile", "--config", TAU15_CFG, "--nu", "0", "--grid", "0.5:24:50"
    )
    assert code == EXIT_OK
    assert all(float(row["abs_diff"]) < EQUAL_TOL for row in _rows(out))


def test_smile_degenerate_points_are_empty(
    capsys: pytest.CaptureFixture[str], caplog: pytest.LogCaptureFixture
) -> None:
    """Test that degenerate vols leave empty cells and a warning."""
    code, out, _ = _run(
        capsys, "smile", *DEGENERATE_FLAGS, "--formula", "berestycki", "--grid",
        "0.9:1.1:3",
    )  # fmt: skip
    assert code == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 3
    assert all(row["vol"] == "" for row in rows)
    assert "Smile point skipped" in caplog.text


def test_triangle_low_strike_pathology(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that the triangle table shows negative prices under the original term."""
    code, out, _ = _run(capsys, "triangle", "--config", TAU15_CFG)
    assert code == EXIT_OK
    rows = _rows(out)
    assert list(rows[0]) == ["peak", "price_hagan", "price_berestycki"]
    assert any(float(row["price_hagan"]) < 0 for row in rows if row["price_hagan"])


def test_triangle_with_mc_columns(capsys: pytest.CaptureFixture[str]) -> None:
    """Test the optional Monte Carlo columns."""
    code, out, _ = _run(
        capsys, "triangle", "--config", TAU15_CFG, "--mc", "--paths", "2000",
        "--steps", "4", "--grid", "1:3:3:lin",
    )  # fmt: skip
    assert code == EXIT_OK
    rows = _rows(out)
    assert list(rows[0])[-2:] == ["mc_price", "mc_se"]
    assert all(float(row["mc_price"]) >= -1e-12 for row in rows)


def test_density_json_to_file(
    capsys: pytest.CaptureFixture[str], tmp_path: pathlib.Path
) -> None:
    """Test JSON output written to --out with violation metadata."""
    target = tmp_path / "density.json"
    code, out, _ = _run(
        capsys, "density", "--config", TAU15_CFG, "--grid", "0.1:8.01:80",
        "--format", "json", "--out", str(target),
    )  # fmt: skip
    assert code == EXIT_OK
    assert out == ""
    payload = orjson.loads(target.read_bytes())
    assert payload["columns"] == [
        "strike",
        "density_hagan",
        "violation_hagan",
        "density_berestycki",
        "violation_berestycki",
    ]
    assert len(payload["rows"]) == 80
    assert "violations_hagan" in payload
    assert "mass_berestycki" in payload


def test_mc_check_deterministic(capsys: pytest.CaptureFixture[str]) -> None:
    """Test byte-identical mc-check output for identical configurations."""
    argv = (
        "mc-check", *FLAT_FLAGS, "--tau", "0.5", "--paths", "4000", "--steps", "20",
        "--workers", "2",
    )  # fmt: skip
    first = _run(capsys, *argv)
    second = _run(capsys, *argv)
    assert first[0] == EXIT_OK
    assert first[1] == second[1]
    rows = _rows(first[1])
    assert list(rows[0]) == [
        "strike",
        "formula",
        "formula_vol",
        "mc_vol",
        "mc_se",
        "z_score",
    ]
    assert len(rows) == 10


def test_table1(capsys: pytest.CaptureFixture[str]) -> None:
    """Test the four-row zero-order summary."""
    code, out, _ = _run(capsys, "table1", "--draws", "20", "--seed", "1")
    assert code == EXIT_OK
    rows = _rows(out)
    assert [row["case"] for row in rows] == [
        "atm",
        "nu_zero",
        "beta_one",
        "beta_lt_one",
    ]
    assert [row["relation"] for row in rows] == ["=", "=", "=", "!="]
    assert all(row["draws"] == "20" for row in rows)


def test_exit_code_config(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that an invalid setting exits with the configuration code."""
    code, out, err = _run(capsys, "smile", "--config", TAU15_CFG, "--beta", "2")
    assert code == EXIT_CONFIG
    assert out == ""
    assert "error: Invalid configuration" in err


def test_exit_code_missing_file(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that an unreadable config file is a configuration error."""
    code, _, _ = _run(capsys, "smile", "--config", "/nonexistent/run.cfg")
    assert code == EXIT_CONFIG


def test_exit_code_numerical(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that an ATM quote the expansion cannot reach is a numerical failure."""
    code, _, err = _run(
        capsys, "smile", "--atm", "0.2", "--beta", "1", "--rho", "-0.99", "--nu",
        "2", "--forward", "1", "--tau", "10", "--units", "decimal",
    )  # fmt: skip
    assert code == EXIT_NUMERICAL
    assert "Cannot bracket" in err


def test_exit_code_out_of_band(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that a Monte Carlo price with no time value exits out of band."""
    code, _, err = _run(
        capsys, "mc-check", "--alpha", "0.01", "--beta", "1", "--rho", "0", "--nu",
        "0", "--forward", "1", "--tau", "0.01", "--units", "decimal", "--grid",
        "1.5:2:2", "--paths", "100", "--steps", "100",
    )  # fmt: skip
    assert code == EXIT_OUT_OF_BAND
    assert "outside no-arbitrage band" in err


@pytest.mark.parametrize("std_error", [math.inf, 0.0, math.nan])
def test_z_score_without_usable_error(std_error: float) -> None:
    """Test that an infinite, zero or NaN error gives no z-score."""
    assert z_score(0.01, std_error) is None


def test_z_score() -> None:
    """Test the gap measured in standard errors."""
    assert z_score(0.01, 0.005) == pytest.approx(2.0)
    assert z_score(-0.003, 0.001) == pytest.approx(-3.0)
