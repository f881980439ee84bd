import os
from functools import lru_cache
from typing import List, Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_LOG_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG", "NOTSET"}


class Settings(BaseSettings):
    # App
    APP_NAME: str = "Belief Decoder Toolkit"
    DEBUG: bool = False
    ENVIRONMENT: str = "development"

    # CORS - comma separated string in .env
    CORS_ORIGINS: str = "*"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Belief propagation defaults
    BP_MAX_ITER: int = 30
    BP_VARIANT: str = "sum_product"
    BP_MIN_SUM_SCALE: float = 1.0
    BP_LLR_CLAMP: float = 50.0

    # Sampling and Monte Carlo
    SAMPLER_CHUNK_SHOTS: int = 4096
    WORKERS: int = 0  # 0 means os.cpu_count()
    DEFAULT_SEED: int = 20220301
    CHECKPOINT_PATH: str = "results/points.jsonl"

    # Numerical hygiene and search bounds
    MECHANISM_PROBABILITY_FLOOR: float = 1e-15
    KERNEL_ENUMERATION_MAX_DIM: int = 20
    UF_MIN_WEIGHT_UNITS: int = 8
    UF_MAX_WEIGHT_UNITS: int = 2 ** 16
    OVERHEAD_MAX_DISTANCE: int = 201

    # Per-shot correction validity check (always on in debug)
    VALIDATE_CORRECTIONS: bool = False

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding='utf-8',
        extra='ignore'
    )

    @field_validator('LOG_LEVEL', mode='before')
    @classmethod
    def check_log_level(cls, v: str) -> str:
        if isinstance(v, str) and v.upper() in _LOG_LEVELS:
            return v.upper()
        raise ValueError(f"Unknown log level: {v}")

    @field_validator('BP_VARIANT')
    @classmethod
    def check_bp_variant(cls, v: str) -> str:
        if v not in ("sum_product", "min_sum"):
            raise ValueError(f"BP_VARIANT must be 'sum_product' or 'min_sum', got {v!r}")
        return v

    @field_validator('BP_MIN_SUM_SCALE')
    @classmethod
    def check_min_sum_scale(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError("BP_MIN_SUM_SCALE must lie in (0, 1]")
        return v

    @property
    def is_development(self) -> bool:
        return self.ENVIRONMENT.lower() == "development"

    @property
    def is_production(self) -> bool:
        return self.ENVIRONMENT.lower() == "production"

    @property
    def worker_count(self) -> int:
        """Number of Monte Carlo worker processes."""
        if self.WORKERS > 0:
            return self.WORKERS
        return os.cpu_count() or 1

    @property
    def validate_corrections(self) -> bool:
        return self.VALIDATE_CORRECTIONS or self.DEBUG

    @property
    def get_cors_origins(self) -> List[str]:
        """Convert CORS_ORIGINS string to list of origins."""
        if not self.CORS_ORIGINS:
            return []
        if self.CORS_ORIGINS == "*":
            return ["*"]
        return [origin.strip() for origin in self.CORS_ORIGINS.split(",") if origin.strip()]


@lru_cache()
def get_settings() -> Settings:
    """
    Get the application settings, cached for performance.
    """
    return Settings()
