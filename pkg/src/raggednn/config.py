"""Runtime settings for raggednn using pydantic-settings."""

from __future__ import annotations

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    """Process-wide settings read from the environment or a `.env` file."""

    model_config = SettingsConfigDict(env_prefix="", env_file=".env", extra="ignore")

    seed: int = Field(default=0, alias="RAGGEDNN_SEED")
    log_level: str = Field(default="INFO", alias="RAGGEDNN_LOG_LEVEL")
    log_json: bool = Field(default=False, alias="RAGGEDNN_LOG_JSON")
    threads: int = Field(default=1, ge=1, alias="RAGGEDNN_THREADS")


def get_settings() -> AppSettings:
    """Get application settings."""
    return AppSettings()
