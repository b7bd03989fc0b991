"""Runtime settings loaded from the environment (and an optional .env file)"""

import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict

from dotenv import find_dotenv, load_dotenv

from .exceptions import ConfigurationError

DEFAULT_SEED = 20190418

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _env_int(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw.strip(), 0)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    """Effective configuration shared by the toolkit, its managers and the CLI"""

    seed: int = DEFAULT_SEED
    threads: int = 1
    dense_cap: int = 2**26  # dense sketch entries
    proof_cap: int = 2**20
    rank_cap: int = 2**22
    degree_cap: int = 64
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, dotenv: bool = True) -> "Settings":
        """
        Build settings from OVAPPROX_* environment variables.

        Args:
            dotenv: Load a .env file from the working directory first

        Returns:
            Settings with defaults for every unset variable

        Raises:
            ConfigurationError: If a variable holds a malformed value
        """
        if dotenv:
            load_dotenv(find_dotenv(usecwd=True))

        log_level = os.getenv("OVAPPROX_LOG_LEVEL", cls.log_level).strip().upper()
        if log_level not in _LOG_LEVELS:
            raise ConfigurationError(
                f"OVAPPROX_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}"
            )

        return cls(
            seed=_env_int("OVAPPROX_SEED", DEFAULT_SEED),
            threads=_env_int("OVAPPROX_THREADS", 1, minimum=1),
            dense_cap=_env_int("OVAPPROX_DENSE_CAP", 2**26, minimum=1),
            proof_cap=_env_int("OVAPPROX_PROOF_CAP", 2**20, minimum=1),
            rank_cap=_env_int("OVAPPROX_RANK_CAP", 2**22, minimum=1),
            degree_cap=_env_int("OVAPPROX_DEGREE_CAP", 64, minimum=1),
            log_level=log_level,
        )

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Return a copy with every non-None override applied"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
