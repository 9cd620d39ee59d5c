"""
Configuration management for the ageing-orderings toolkit.

Loads configuration from environment variables using python-dotenv.
Covers the numeric tolerances shared by chain construction, inversion and
shape testing, plus logging and output locations.
"""

import os
import logging
from dataclasses import dataclass
from typing import Optional
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

# Setup basic logging for config module
_logger = logging.getLogger(__name__)


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        _logger.warning(f"Invalid {name} '{raw}'. Using default {default}.")
        return default


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        _logger.warning(f"Invalid {name} '{raw}'. Using default {default}.")
        return default


@dataclass
class Config:
    """Configuration for the toolkit."""

    # Quadrature and inversion
    quad_abs_tol: float = 1e-9  # absolute tolerance of tail integrals
    tail_survival_cut: float = 1e-12  # survival below this is deep tail
    invert_tol: float = 1e-10  # |T(x) - u| bound for inverses

    # Quantile-coordinate grid
    grid_points: int = 512
    window_low: float = 1e-4
    window_high: float = 1.0 - 1e-4

    # Shape-test tolerances (relative to sampled amplitude)
    convexity_tol: float = 1e-6
    ratio_tol: float = 1e-7
    superadditivity_tol: float = 1e-7
    dead_band: float = 1e-9
    pair_budget: int = 4096

    # Chain depth used by the CLI when --levels is omitted
    default_levels: int = 3

    # Output
    output_dir: Optional[str] = None  # report directory when --out is omitted

    # Logging Configuration
    log_level: str = "INFO"
    log_file: Optional[str] = None

    @classmethod
    def from_env(cls) -> "Config":
        """
        Load configuration from environment variables.

        Environment variables supported:
        - AGEING_QUAD_ABS_TOL: Absolute quadrature tolerance (default: 1e-9)
        - AGEING_TAIL_SURVIVAL_CUT: Deep-tail survival cut (default: 1e-12)
        - AGEING_INVERT_TOL: Inversion tolerance (default: 1e-10)
        - AGEING_GRID_POINTS: Points of the quantile grid (default: 512)
        - AGEING_WINDOW_LOW: Lower end of the quantile window (default: 1e-4)
        - AGEING_WINDOW_HIGH: Upper end of the quantile window (default: 0.9999)
        - AGEING_CONVEXITY_TOL: Convexity tolerance (default: 1e-6)
        - AGEING_RATIO_TOL: Monotone-ratio tolerance (default: 1e-7)
        - AGEING_SUPERADDITIVITY_TOL: Super-additivity tolerance (default: 1e-7)
        - AGEING_DEAD_BAND: Sign-pattern dead band (default: 1e-9)
        - AGEING_PAIR_BUDGET: Low-discrepancy pairs per test (default: 4096)
        - AGEING_DEFAULT_LEVELS: Chain depth for the CLI (default: 3)
        - AGEING_OUTPUT_DIR: Report directory when --out is omitted (default: stdout)
        - LOG_LEVEL: Logging level (default: INFO)
        - LOG_FILE: Optional log file path

        Returns:
            Config instance with values loaded from environment
        """
        config = cls(
            quad_abs_tol=_env_float("AGEING_QUAD_ABS_TOL", 1e-9),
            tail_survival_cut=_env_float("AGEING_TAIL_SURVIVAL_CUT", 1e-12),
            invert_tol=_env_float("AGEING_INVERT_TOL", 1e-10),
            grid_points=_env_int("AGEING_GRID_POINTS", 512),
            window_low=_env_float("AGEING_WINDOW_LOW", 1e-4),
            window_high=_env_float("AGEING_WINDOW_HIGH", 1.0 - 1e-4),
            convexity_tol=_env_float("AGEING_CONVEXITY_TOL", 1e-6),
            ratio_tol=_env_float("AGEING_RATIO_TOL", 1e-7),
            superadditivity_tol=_env_float("AGEING_SUPERADDITIVITY_TOL", 1e-7),
            dead_band=_env_float("AGEING_DEAD_BAND", 1e-9),
            pair_budget=_env_int("AGEING_PAIR_BUDGET", 4096),
            default_levels=_env_int("AGEING_DEFAULT_LEVELS", 3),
            output_dir=os.getenv("AGEING_OUTPUT_DIR") or None,
            log_level=os.getenv("LOG_LEVEL", "INFO"),
            log_file=os.getenv("LOG_FILE") or None,
        )

        config.validate()

        return config

    def validate(self) -> bool:
        """
        Validate configuration values and log every problem found.

        Returns:
            True if configuration is usable
        """
        is_valid = True

        for name in (
            "quad_abs_tol",
            "tail_survival_cut",
            "invert_tol",
            "convexity_tol",
            "ratio_tol",
            "superadditivity_tol",
            "dead_band",
        ):
            value = getattr(self, name)
            if not value > 0:
                _logger.error(f"Invalid {name.upper()}: {value}. Must be positive.")
                is_valid = False

        if self.grid_points < 16:
            _logger.error(
                f"Invalid GRID_POINTS: {self.grid_points}. Must be at least 16."
            )
            is_valid = False

        if not 0.0 < self.window_low < self.window_high < 1.0:
            _logger.error(
                f"Invalid quantile window ({self.window_low}, {self.window_high}). "
                "Need 0 < low < high < 1."
            )
            is_valid = False

        if self.pair_budget < 1:
            _logger.error(f"Invalid PAIR_BUDGET: {self.pair_budget}.")
            is_valid = False

        if self.default_levels < 1:
            _logger.error(f"Invalid DEFAULT_LEVELS: {self.default_levels}.")
            is_valid = False

        _logger.debug(
            f"Configuration: grid={self.grid_points} "
            f"window=({self.window_low}, {self.window_high}) "
            f"quad_abs_tol={self.quad_abs_tol}"
        )

        self._ensure_directories()

        return is_valid

    def _ensure_directories(self) -> None:
        """Ensure the log file directory exists when file logging is on."""
        if self.log_file:
            Path(self.log_file).parent.mkdir(parents=True, exist_ok=True)


def get_config() -> Config:
    """
    Get the global configuration instance.

    Returns:
        Config instance with current configuration
    """
    return config


# Global configuration instance - loaded from environment variables
config = Config.from_env()
