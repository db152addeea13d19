"""report models serialised to json by the artifact repository"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from klpath import __version__


class ModulusInfo(BaseModel):
    """the prime power p^n a report was computed for"""
    p: int
    n: int


class BoundsRow(BaseModel):
    """one row of the bounds table"""
    N: int
    condition: bool
    bound: float
    bound_over_N: float
    trivial: int
    sqrt_N: float


class ShortSumReport(BaseModel):
    """empirical maxima of short kloosterman sums against the korolev value"""
    p: int
    n: int
    b: int
    N: int
    starts: int
    units: int
    max_abs: float
    mean_abs: float
    ratio_trivial: float
    ratio_sqrt: float
    korolev_value: float
    ratio_korolev: float
    korolev_condition: bool


class MomentPoint(BaseModel):
    """one (s, t) placement and its moment"""
    s: str
    t: str
    gap: float
    moment: float
    window: str
    bound: Optional[float] = None
    violation: bool = False


class WindowSummary(BaseModel):
    """points, fitted slope and predicted exponent of one gap window"""
    points: int = 0
    fitted_slope: Optional[float] = None
    predicted_exponent: Optional[float] = None


class MomentReport(BaseModel):
    """moment scan over a gap grid"""
    kind: str = "moments"
    modulus: ModulusInfo
    b0: int
    alpha: int
    gaps: List[float] = Field(default_factory=list)
    moments: List[float] = Field(default_factory=list)
    points: List[MomentPoint] = Field(default_factory=list)
    fitted_slope: Optional[float] = None
    fitted_intercept: Optional[float] = None
    excluded_zero: int = 0
    violations: List[int] = Field(default_factory=list)
    windows: Dict[str, WindowSummary] = Field(default_factory=dict)
    delta: Optional[float] = None
    beta_prediction: Optional[float] = None
    seed: int = 0
    version: str = __version__

    @field_validator("moments")
    @classmethod
    def require_nonnegative(cls, v: List[float]) -> List[float]:
        """moments are averages of non-negative numbers"""
        if any(m < 0 for m in v):
            raise ValueError("moments must be non-negative")
        return v


class MomentValue(BaseModel):
    """one exact moment M_alpha(s, t) over all units a"""
    modulus: ModulusInfo
    b0: int
    s: str
    t: str
    alpha: int
    value: float = Field(ge=0.0)
    version: str = __version__


class KsEntry(BaseModel):
    """kolmogorov-smirnov distances of the real and imaginary marginals at one t"""
    t: str
    re: float = Field(ge=0.0, le=1.0)
    im: float = Field(ge=0.0, le=1.0)
    path_mean_re: float = 0.0
    path_std_re: float = 0.0
    limit_mean_re: float = 0.0
    limit_std_re: float = 0.0
    energy: Optional[float] = None


class LawComparisonReport(BaseModel):
    """path marginals over all units against monte carlo samples of the limit series"""
    kind: str = "law"
    modulus: ModulusInfo
    b0: int
    H: int
    n_mc_samples: int
    ks: List[KsEntry] = Field(default_factory=list)
    zero_mass_fraction: Optional[float] = None
    seed: int = 0
    version: str = __version__
    # quantiles used by the plotter for the overlaid empirical cdfs
    cdf_path: Dict[str, List[float]] = Field(default_factory=dict)
    cdf_limit: Dict[str, List[float]] = Field(default_factory=dict)
    # marginal values within this distance of 0 were compared as 0
    resolution: float = Field(default=0.0, ge=0.0)


class SupReport(BaseModel):
    """largest step approximation over all units and a t grid"""
    modulus: ModulusInfo
    b0: int
    grid_size: int
    max_abs: float
    argmax_a: int
    argmax_t: str
    log_q: float
    ratio: float


class SurrogateReport(BaseModel):
    """monte carlo moments of the truncated surrogate increment"""
    modulus: ModulusInfo
    b0: int
    s: str
    t: str
    alpha: int
    n_samples: int
    seed: int
    mc_moment: float
    mc_stderr: float
    sigma: float
    subgaussian_ratio: Optional[float] = None
    step_moment: Optional[float] = None
    version: str = __version__
