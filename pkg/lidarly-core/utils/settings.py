"""
Environment-backed settings
"""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Try the working directory first, then the repository root
for _env_path in (".env", os.path.join(os.path.dirname(__file__), "..", "..", ".env")):
    if load_dotenv(_env_path):
        break


class Settings(BaseModel):
    """Process-wide defaults read from the environment"""
    threads: int = Field(default=1, ge=1, le=256, description="Worker threads for RANSAC scoring and ray updates")
    log_level: str = Field(default="INFO", description="Root log level for the CLI")
    ransac_seed: int = Field(default=0, description="Default RANSAC seed")


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the global settings instance - lazy initialization"""
    global _settings
    if _settings is None:
        _settings = Settings(
            threads=os.getenv("LIDARLY_THREADS", "1"),
            log_level=os.getenv("LIDARLY_LOG_LEVEL", "INFO").upper(),
            ransac_seed=os.getenv("LIDARLY_RANSAC_SEED", "0"),
        )
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads the environment (used by tests)"""
    global _settings
    _settings = None
