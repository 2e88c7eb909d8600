"""
Configuration management for dirac-darboux using Pydantic.

This module provides settings for logging and for the numerical tolerances
shared by the verification pipeline. All settings can be loaded from
environment variables; none are required.
"""

import logging
import sys
from typing import Literal

from pydantic import Field, computed_field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

TEXT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class LoggingConfig(BaseSettings):
    """
    Logging configuration.

    Attributes:
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        format: Log format (json or text).
    """

    model_config = SettingsConfigDict(
        env_prefix="DARBOUX_LOG_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    level: str = Field(default="WARNING", description="Log level")
    format: Literal["json", "text"] = Field(default="text", description="Log format")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        upper_v = v.upper()
        if upper_v not in valid_levels:
            raise ValueError(f"Log level must be one of {valid_levels}")
        return upper_v


class NumericsConfig(BaseSettings):
    """
    Tolerances and seeds used when building and certifying transforms.

    Attributes:
        eigen_tolerance: Max normalized eigen residual accepted for a seed.
        kernel_tolerance: Max normalized ``L u`` accepted for a constructed transform.
        verify_threshold: Default pass threshold for residual reports.
        random_seed: Seed for the random smooth test fields.
        random_fields: Number of random smooth fields in the standard testset.
        report_workers: Thread count used to run report checks concurrently.

    Example:
        ```python
        # Load from environment variables (DARBOUX_VERIFY_THRESHOLD=1e-6 ...)
        numerics = NumericsConfig()

        # Or provide explicit values
        numerics = NumericsConfig(verify_threshold=1e-9)
        ```
    """

    model_config = SettingsConfigDict(
        env_prefix="DARBOUX_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    eigen_tolerance: float = Field(default=1e-9, gt=0, description="Seed eigen residual bound")
    kernel_tolerance: float = Field(default=1e-9, gt=0, description="Kernel residual bound")
    verify_threshold: float = Field(default=1e-7, gt=0, description="Report pass threshold")
    random_seed: int = Field(default=20240917, ge=0, description="Random test field seed")
    random_fields: int = Field(default=5, ge=0, description="Random fields per testset")
    report_workers: int = Field(default=1, ge=1, description="Concurrent report checks")


class AppConfig(BaseSettings):
    """
    Unified application configuration.

    Example:
        ```python
        from dirac_darboux.config import AppConfig

        config = AppConfig()
        print(config.numerics.verify_threshold)
        print(config.logging.format)
        ```
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @computed_field
    @property
    def logging(self) -> LoggingConfig:
        """Get logging configuration."""
        return LoggingConfig()

    @computed_field
    @property
    def numerics(self) -> NumericsConfig:
        """Get numerics configuration."""
        return NumericsConfig()


def get_config() -> AppConfig:
    """
    Get the application configuration.

    Returns:
        AppConfig instance with all settings loaded.
    """
    return AppConfig()


def configure_logging(config: LoggingConfig | None = None) -> None:
    """
    Install a single stderr handler on the root logger.

    Args:
        config: Logging settings; loaded from the environment when omitted.
    """
    config = config or LoggingConfig()
    handler = logging.StreamHandler(sys.stderr)
    if config.format == "json":
        try:
            from pythonjsonlogger.json import JsonFormatter
        except ImportError:  # python-json-logger < 3
            from pythonjsonlogger.jsonlogger import JsonFormatter

        handler.setFormatter(JsonFormatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    else:
        handler.setFormatter(logging.Formatter(TEXT_LOG_FORMAT))

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(config.level)
