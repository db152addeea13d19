"""shared constants for klpath"""
from fractions import Fraction


# korolev's short-sum constants, never configurable
GAMMA1 = 900
GAMMA2 = Fraction(1, 160 ** 4)

# the factor-4 bound and the delta window need n >= 31
MIN_KOROLEV_EXPONENT = 31
KOROLEV_P_POWER = 15

# q must fit an unsigned 64-bit word
MAX_MODULUS = 2 ** 64 - 1
# residue tables (units, inverses, roots of unity) are built up to this q
MAX_TABLE_MODULUS = 2 ** 25

# summation block for reproducible prefix accumulation
SUM_BLOCK = 2 ** 10

# numerical tolerances
REALNESS_TOL = 1e-9
KNOT_TOL = 1e-12
PLANCHEREL_TOL = 1e-8
ZERO_MASS_TOL = 1e-9

STEP_GAP_CONSTANT = 6

# asymptotic two-sample ks critical value at the 5% level
KS_CRITICAL = 1.36
INTERVAL_LENGTH_CONSTANT = 8

# significant digits for printed numbers
PRINT_DIGITS = 12


PATH_CSV_HEADER = ("j", "t", "re", "im")
SAMPLE_CSV_HEADER = ("seed", "t", "re", "im")
BOUNDS_CSV_HEADER = ("N", "condition", "bound", "bound_over_N", "trivial", "sqrt_N")

MANIFEST_NAME = "manifest.json"
