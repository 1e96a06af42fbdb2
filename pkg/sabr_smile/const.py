"""Constants for the SABR smile toolkit."""

DOMAIN = "sabr_smile"

# Branch switches for removable singularities
BETA_EPS = 1e-8
Z_EPS = 1e-6

# Black-Scholes inversion
IV_MAX_ITERATIONS = 200
IV_PRICE_TOL = 1e-12
IV_VOL_CEILING = 1e3

# ATM back-out bracket, in units of the zero-order guess ATM * s^(1-beta)
ALPHA_BRACKET = (1e-6, 10.0)

# Density scan
DENSITY_TOL = 1e-8
DENSITY_STEP_FRACTION = 1e-4
ROUNDOFF_FLOOR_FACTOR = 16.0

# Triangle structure: wing sits two percentage points above the peak
TRIANGLE_WIDTH_PCT = 2.0

# Monte Carlo defaults (desk scale)
MC_PATHS = 200_000
MC_STEPS_PER_YEAR = 250
MC_SEED = 20080101
MC_BLOCK_SIZE = 16_384

# Strike grids
GRID_COUNT = 200
GRID_LOW_FRACTION = 0.1
GRID_HIGH_FRACTION = 3.0
PEAK_GRID_PCT = (0.25, 6.0, 24)
MC_CHECK_GRID = (0.95, 1.05, 5)
PERCENT = 100.0

# zero-order comparison sweep
TABLE1_DRAWS = 200
TABLE1_SEED = 7
TABLE1_EQUAL_TOL = 1e-10
TABLE1_GENERIC_TOL = 1e-6

# Numeric output
FLOAT_FORMAT = ".17g"

# Configuration keys
CONF_ALPHA = "alpha"
CONF_ATM = "atm"
CONF_ALPHA_MODE = "alpha_mode"
CONF_BETA = "beta"
CONF_RHO = "rho"
CONF_NU = "nu"
CONF_FORWARD = "forward"
CONF_TAU = "tau"
CONF_FORMULA = "formula"
CONF_GRID = "grid"
CONF_UNITS = "units"
CONF_SEED = "seed"
CONF_PATHS = "paths"
CONF_STEPS = "steps"
CONF_WORKERS = "workers"
CONF_ANTITHETIC = "antithetic"
CONF_ABSORPTION = "absorption"
CONF_STEP = "h"
CONF_MC = "mc"
CONF_OUT = "out"
CONF_FORMAT = "format"
CONF_DRAWS = "draws"

UNITS = ["percent", "decimal"]
FORMATS = ["csv", "json"]
FORMULAS = ["hagan", "berestycki", "both"]
ALPHA_MODES = ["first_order", "zero_order"]

# Exit codes
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_OUT_OF_BAND = 4
