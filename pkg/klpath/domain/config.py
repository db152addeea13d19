"""centralized configuration for klpath"""
from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """application configuration settings loaded from environment variables"""

    model_config = SettingsConfigDict(env_prefix="KLPATH_", env_file=".env", extra="ignore")

    # worker pools
    threads: int = 1
    a_chunk_size: int = 256
    mc_batch_size: int = 256

    # experiment defaults
    default_seed: int = 0
    output_dir: str = "runs"

    # exact averaging refuses moduli above this
    max_exact_modulus: int = 1_000_000

    # logging
    log_level: str = "INFO"
    log_file: Optional[str] = None

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        """
        normalize the log level name

        args:
            v: level name in any case

        returns:
            upper-case level name
        """
        if isinstance(v, str):
            v = v.strip().upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level: {v}")
        return v

    @field_validator("threads", "a_chunk_size", "mc_batch_size", "max_exact_modulus")
    @classmethod
    def require_positive(cls, v: int) -> int:
        """reject non-positive sizes"""
        if v < 1:
            raise ValueError("must be a positive integer")
        return v


settings = Settings()
