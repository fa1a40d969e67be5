"""
Configuration management for the macroprogramming toolchain.

Values are read once from the environment (a local .env is honoured) and
exposed as class attributes on Config.
"""

import os
from dotenv import load_dotenv

load_dotenv()

U64_MAX = 2**64 - 1


class Config:
    """Central configuration for the toolchain, simulator and HTTP front end."""

    # Mapping
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "0"))

    # Simulator
    DELIVERY_LATENCY_MS: int = int(os.getenv("DELIVERY_LATENCY_MS", "1"))

    # Example bundles
    FIRE_TEMP_THRESHOLD: float = float(os.getenv("FIRE_TEMP_THRESHOLD", "50.0"))
    LOWEST_SETTING_TEMP: float = float(os.getenv("LOWEST_SETTING_TEMP", "16.0"))

    # Code generation
    TEMPLATE_DIR: str = os.getenv(
        "TEMPLATE_DIR",
        os.path.join(os.path.dirname(__file__), "templates")
    )

    # HTTP front end
    API_SECRET_KEY: str = os.getenv("API_SECRET_KEY", "")

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()
    DEBUG_MODE: bool = os.getenv("DEBUG_MODE", "false").lower() == "true"


def validate_config() -> bool:
    """Validates config values at startup."""
    errors = []

    if not 0 <= Config.DEFAULT_SEED <= U64_MAX:
        errors.append("DEFAULT_SEED must be a 64-bit unsigned integer")

    if Config.DELIVERY_LATENCY_MS < 1:
        errors.append("DELIVERY_LATENCY_MS must be at least 1")

    if not os.path.isdir(Config.TEMPLATE_DIR):
        errors.append(f"TEMPLATE_DIR does not exist: {Config.TEMPLATE_DIR}")

    if errors:
        raise ValueError(f"Configuration errors: {', '.join(errors)}")

    return True
