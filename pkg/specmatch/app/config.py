"""Configuration settings for SpecMatch"""
from typing import Optional

try:
    from pydantic_settings import BaseSettings
except ImportError:
    # Fallback for older pydantic versions
    from pydantic import BaseSettings


class Settings(BaseSettings):
    """Application settings"""

    # Sweep worker pool; SPECMATCH_WORKERS overrides the config file value
    WORKERS: Optional[int] = None

    # Similarity defaults
    DEFAULT_ETA: float = 0.2
    CONTOUR_POINTS_PER_SIDE: int = 256
    CONTOUR_NORM_BOUND: float = 2.5  # ||A|| bound required by the contour form

    # Oracles exist to validate, not to scale
    ORACLE_MAX_N: int = 64
    BRUTE_FORCE_MAX_N: int = 8

    # Logging
    LOG_LEVEL: str = "WARNING"

    # Application
    APP_NAME: str = "SpecMatch"
    APP_VERSION: str = "1.0.0"

    class Config:
        env_prefix = "SPECMATCH_"
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


settings = Settings()
