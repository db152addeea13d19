"""enum definitions for klpath"""
from enum import Enum


class Subcommand(str, Enum):
    """cli subcommands"""
    SUM = "sum"
    PATH = "path"
    MOMENTS = "moments"
    SCAN_TIGHTNESS = "scan-tightness"
    COMPARE_LAW = "compare-law"
    BOUNDS = "bounds"
    SAMPLE_LIMIT = "sample-limit"
    SURROGATE = "surrogate"
    PLOT = "plot"


class FourierConvention(str, Enum):
    """which x enter the discrete fourier coefficients of the step sets"""
    ALL_X = "all"
    COPRIME_X = "coprime"


class SumMethod(str, Enum):
    """evaluation strategy for tables of partial sums over all units a"""
    DIRECT = "direct"
    FFT = "fft"


class GapWindow(str, Enum):
    """ranges of t - s the tightness argument treats separately"""
    SMALL = "small"
    MID = "mid"
    KOROLEV = "korolev"
    LARGE = "large"


class ReportKind(str, Enum):
    """artifact kinds the plot command understands"""
    PATH = "path"
    MOMENTS = "moments"
    LAW = "law"
