"""experiment configuration shared by every subcommand"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from klpath.domain.config import settings
from klpath.domain.errors import ConfigError
from klpath.domain.messages import Messages
from klpath.services.modarith import PrimePowerModulus, UnitResidue
from klpath.services.path import RationalTime

logger = logging.getLogger(__name__)


def _split(value: Any) -> Any:
    """comma or whitespace separated strings become lists"""
    if isinstance(value, str):
        return [item for item in value.replace(",", " ").split() if item]
    return value


class ExperimentConfig(BaseModel):
    """
    everything a run depends on

    the model is echoed into each manifest, so an identical config reproduces
    identical artifacts.
    """

    model_config = ConfigDict(extra="forbid")

    # modulus and residues
    p: Optional[int] = None
    n: Optional[int] = None
    a: int = 1
    b: int = 1

    # times
    s: Optional[str] = None
    t: Optional[str] = None
    t_grid: List[str] = Field(default_factory=list)
    grid_points: int = 101
    # decimal times snap to multiples of 1/((phi - 1) grid_factor)
    grid_factor: int = 1

    # moments
    alpha: int = 2
    gaps: List[float] = Field(default_factory=list)
    samples_per_gap: int = 20
    delta: Optional[float] = None

    # limit law
    H: Optional[int] = None
    n_mc_samples: int = 1000
    energy_subsample: int = 0
    resolution: Optional[float] = None

    # bounds
    lengths: List[int] = Field(default_factory=list)
    factor4: bool = False
    delta_window: bool = False
    interval_bound: bool = False
    a_sample: Optional[int] = None
    starts: List[int] = Field(default_factory=list)

    # run plumbing
    seed: int = Field(default_factory=lambda: settings.default_seed)
    threads: int = Field(default_factory=lambda: settings.threads)
    out: Optional[str] = None
    export: Optional[str] = None
    input: Optional[str] = None
    output: Optional[str] = None

    @field_validator("t_grid", "gaps", "lengths", "starts", mode="before")
    @classmethod
    def split_lists(cls, v):
        return _split(v)

    @field_validator("threads", "grid_points", "grid_factor", "samples_per_gap", "n_mc_samples", "H")
    @classmethod
    def require_positive(cls, v: Optional[int]) -> Optional[int]:
        """reject non-positive counts; an unset truncation stays None"""
        if v is not None and v < 1:
            raise ValueError("must be a positive integer")
        return v

    @classmethod
    def from_sources(cls, config_file: Optional[str] = None, **overrides: Any) -> "ExperimentConfig":
        """
        merge a key=value config file with command-line values

        args:
            config_file: optional plain-text key=value file
            **overrides: flag values; None means the flag was not given

        returns:
            validated ExperimentConfig, flags winning over the file

        raises:
            ConfigError: unreadable file or invalid values
        """
        values: Dict[str, Any] = {}
        if config_file:
            path = Path(config_file)
            if not path.is_file():
                raise ConfigError(Messages.get("IO", "config_file", path=config_file))
            for key, value in dotenv_values(path).items():
                if value is not None:
                    values[key.strip().lower().replace("-", "_")] = value
            logger.debug(f"read {len(values)} keys from {config_file}")

        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls.model_validate(values)
        except ValidationError as exc:
            detail = "; ".join(
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()
            )
            raise ConfigError(Messages.get("IO", "config_value", detail=detail)) from exc

    def modulus(self) -> PrimePowerModulus:
        """the configured modulus p^n"""
        if self.p is None or self.n is None:
            raise ConfigError(Messages.get("IO", "config_value", detail="p and n are required"))
        return PrimePowerModulus(self.p, self.n)

    def unit_a(self, modulus: PrimePowerModulus) -> UnitResidue:
        return UnitResidue(self.a % modulus.q, modulus)

    def unit_b(self, modulus: PrimePowerModulus) -> UnitResidue:
        return UnitResidue(self.b % modulus.q, modulus)

    def time(self, value: str, modulus: PrimePowerModulus) -> RationalTime:
        """
        a time given on the command line or in a config file

        fraction strings such as 1/3 are kept exact; decimals are snapped to
        the nearest multiple of 1/((phi - 1) grid_factor).

        raises:
            ConfigError: not a number
            DomainError: outside [0, 1]
        """
        text = str(value).strip()
        if "/" in text:
            return RationalTime.of(text)
        try:
            number = float(text)
        except ValueError as exc:
            raise ConfigError(Messages.get("IO", "config_value", detail=f"time {text!r} is not a number")) from exc
        return RationalTime.from_float(number, modulus, self.grid_factor)

    def echo(self) -> Dict[str, Any]:
        """json-ready copy for manifests"""
        return self.model_dump(mode="json")
