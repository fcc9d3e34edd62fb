"""
Configuration Management Module

Numerical parameters of a solve (resolution, function-space weights, Newton controls).
Provides validation plus loading and saving of standalone numerics documents.
"""

import json
import os
import logging
from dataclasses import dataclass, asdict, fields
from typing import Dict, Any, Optional

from core.data_contracts import ConfigError, DataLoadError
from utils.constants import (
    DEFAULT_K,
    DEFAULT_N,
    DEFAULT_GAMMA,
    DEFAULT_M,
    DEFAULT_SIGMA,
    DEFAULT_TOL_RESIDUAL,
    DEFAULT_MAX_ITER,
    DEFAULT_DAMPING,
    DEFAULT_CONTINUATION_STEPS,
    DEFAULT_MAX_HALVINGS,
    DEFAULT_COKERNEL_TOL,
    DEFAULT_DEGENERACY_TOL,
    DEFAULT_SEED,
    JACOBIAN_FROZEN,
    JACOBIAN_MODES,
    MIN_K,
    MIN_N,
)

logger = logging.getLogger(__name__)


@dataclass
class SolveConfig:
    """All numerical parameters of a solve."""

    K: int = DEFAULT_K
    N: int = DEFAULT_N
    gamma: float = DEFAULT_GAMMA
    sigma: float = DEFAULT_SIGMA
    m: int = DEFAULT_M
    tol_residual: float = DEFAULT_TOL_RESIDUAL
    max_iter: int = DEFAULT_MAX_ITER
    damping: float = DEFAULT_DAMPING
    continuation_steps: int = DEFAULT_CONTINUATION_STEPS
    jacobian_mode: str = JACOBIAN_FROZEN
    cokernel_tol: float = DEFAULT_COKERNEL_TOL
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL
    max_halvings: int = DEFAULT_MAX_HALVINGS
    dealias: bool = False
    seed: int = DEFAULT_SEED

    def validate(self) -> bool:
        """Validate the setting values.

        Soft fields (tolerances, caps) fall back to defaults with a warning.

        Raises:
            ConfigError: If a hard constraint on K, N, gamma, m, damping, steps or mode is violated.
        """
        if not (0.5 < self.gamma < 1.0):
            raise ConfigError(f"numerics.gamma must satisfy 1/2 < gamma < 1, got {self.gamma}")
        if not self.m > 3:
            raise ConfigError(f"numerics.m must be > 3, got {self.m}")
        if int(self.K) != self.K or self.K < MIN_K:
            raise ConfigError(f"numerics.K must be an integer >= {MIN_K}, got {self.K}")
        if int(self.N) != self.N or self.N < MIN_N:
            raise ConfigError(f"numerics.N must be an integer >= {MIN_N}, got {self.N}")
        if not (0.0 < self.damping <= 1.0):
            raise ConfigError(f"numerics.damping must lie in (0, 1], got {self.damping}")
        if int(self.continuation_steps) != self.continuation_steps or self.continuation_steps < 1:
            raise ConfigError(f"numerics.continuation_steps must be an integer >= 1, got {self.continuation_steps}")
        if self.jacobian_mode not in JACOBIAN_MODES:
            raise ConfigError(f"numerics.jacobian_mode must be one of {JACOBIAN_MODES}, got '{self.jacobian_mode}'")
        if self.sigma <= 0:
            raise ConfigError(f"numerics.sigma must be positive, got {self.sigma}")
        self.K, self.N, self.continuation_steps = int(self.K), int(self.N), int(self.continuation_steps)

        if self.tol_residual <= 0:
            logger.warning(f"Invalid tol_residual: {self.tol_residual}, resetting to {DEFAULT_TOL_RESIDUAL}")
            self.tol_residual = DEFAULT_TOL_RESIDUAL
        if self.max_iter < 1:
            logger.warning(f"Invalid max_iter: {self.max_iter}, resetting to {DEFAULT_MAX_ITER}")
            self.max_iter = DEFAULT_MAX_ITER
        if self.max_halvings < 0:
            logger.warning(f"Invalid max_halvings: {self.max_halvings}, resetting to {DEFAULT_MAX_HALVINGS}")
            self.max_halvings = DEFAULT_MAX_HALVINGS
        if self.cokernel_tol <= 0:
            logger.warning(f"Invalid cokernel_tol: {self.cokernel_tol}, resetting to {DEFAULT_COKERNEL_TOL}")
            self.cokernel_tol = DEFAULT_COKERNEL_TOL
        if self.degeneracy_tol <= 0:
            logger.warning(f"Invalid degeneracy_tol: {self.degeneracy_tol}, resetting to {DEFAULT_DEGENERACY_TOL}")
            self.degeneracy_tol = DEFAULT_DEGENERACY_TOL
        return True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], location: str = "numerics") -> "SolveConfig":
        """Create SolveConfig from a dictionary, rejecting unknown fields.

        Raises:
            DataLoadError: If data is not a mapping or has unknown keys.
            ConfigError: If validation fails.
        """
        if not isinstance(data, dict):
            raise DataLoadError(f"{location}: expected an object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise DataLoadError(f"{location}: unknown key(s) {unknown}")
        config = cls(**data)
        config.validate()
        return config

    def replace(self, **changes: Any) -> "SolveConfig":
        data = self.to_dict()
        data.update(changes)
        return SolveConfig.from_dict(data)


class ConfigManager:
    """Loads and saves a standalone numerics document."""

    def __init__(self, config_path: str):
        """
        Args:
            config_path: Path to the numerics JSON file.
        """
        self.config_path = config_path
        self.config = SolveConfig()

    def load(self) -> bool:
        """Load from the configuration file.

        Returns:
            True: Load successful, False: File does not exist (defaults kept).

        Raises:
            DataLoadError: If the file is not valid JSON or has unknown keys.
        """
        if not os.path.exists(self.config_path):
            logger.info(f"Configuration file not found. Using default settings: {self.config_path}")
            return False

        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            logger.error(f"JSON parsing error in configuration file: {e}")
            raise DataLoadError(f"{self.config_path}: line {e.lineno}, column {e.colno}: {e.msg}") from e

        # Problem files nest the same fields under "numerics"
        if isinstance(data, dict) and "numerics" in data and len(data) == 1:
            data = data["numerics"]
        self.config = SolveConfig.from_dict(data, location=f"{os.path.basename(self.config_path)}")
        logger.info(f"Settings loaded from: {self.config_path}")
        return True

    def save(self) -> bool:
        """Save settings to a file.

        Returns:
            True: Save successful, False: Save failed.
        """
        try:
            self.config.validate()
            directory = os.path.dirname(self.config_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(self.config_path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(self.config.to_dict(), f, ensure_ascii=False, indent=2)
            logger.debug(f"Settings saved to: {self.config_path}")
            return True
        except (OSError, ConfigError) as e:
            logger.error(f"Error saving settings: {e}")
            return False

    def get_config(self) -> SolveConfig:
        return self.config

    def update_setting(self, key: str, value: Any) -> Optional[SolveConfig]:
        """Update a single numerics field and re-validate.

        Args:
            key: The setting key.
            value: The setting value.
        """
        if not hasattr(self.config, key):
            logger.warning(f"Unknown setting key: {key}")
            return None
        self.config = self.config.replace(**{key: value})
        return self.config
