"""
Runtime configuration - environment driven settings and logging setup
"""

import os
import logging
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


@dataclass(frozen=True)
class Settings:
    """Tunable limits and defaults, read from NETREDUCE_* variables"""

    log_level: str = "INFO"
    max_evaluations: int = 2 ** 40
    search_budget: int = 10 ** 8
    search_seconds: float = 600.0
    seed: int = 20240613
    jobs: int = 1


def get_settings() -> Settings:
    """
    Read settings from the environment (and a .env file if present)

    Returns:
        Settings with defaults for every unset variable
    """
    return Settings(
        log_level=os.getenv("NETREDUCE_LOG_LEVEL", "INFO").upper(),
        max_evaluations=int(os.getenv("NETREDUCE_MAX_EVALUATIONS", 2 ** 40)),
        search_budget=int(os.getenv("NETREDUCE_SEARCH_BUDGET", 10 ** 8)),
        search_seconds=float(os.getenv("NETREDUCE_SEARCH_SECONDS", 600)),
        seed=int(os.getenv("NETREDUCE_SEED", 20240613)),
        jobs=int(os.getenv("NETREDUCE_JOBS", 1)),
    )


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure root logging to standard error

    Args:
        level: Level name; defaults to NETREDUCE_LOG_LEVEL
    """
    level_name = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=LOG_FORMAT,
        force=True,
    )
