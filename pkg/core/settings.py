import json
import logging
import os
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.errors import DomainError
from core.file_utils import read_file_with_auto_encoding

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "ric_config.json"


class Settings(BaseModel):
    """Tunable defaults for solvers, searches and sweeps"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    gamma_tol: float = Field(1e-10, gt=0)
    boundary_margin: float = Field(1e-6, ge=0, lt=0.5)
    phase_tol: float = Field(1e-8, gt=0)

    restarts: int = Field(100, ge=1)
    candidate_pool: int = Field(32, ge=1)
    removal_pool: int = Field(8, ge=1)
    improvement_tol: float = Field(1e-9, ge=0)

    exhaustive_guard: int = Field(1_000_000, ge=1)
    covering_guard: int = Field(10_000_000, ge=1)

    # linear reproduces the published tail tables; proof is the half-power composition
    prefactor_form: Literal["linear", "proof", "statement"] = "linear"
    empirical_delta_range: Tuple[float, float] = (0.05, 0.9524)
    threads: int = -1
    seed: int = Field(12345, ge=0)

    @classmethod
    def load(cls, config_file: Optional[str] = None):
        """
        Load settings from a JSON file.

        With no path the working-directory default file is used when present;
        otherwise the built-in defaults apply.
        """
        if config_file is None:
            if not os.path.exists(DEFAULT_CONFIG_FILE):
                return cls()
            config_file = DEFAULT_CONFIG_FILE

        content, error = read_file_with_auto_encoding(config_file)
        if error:
            raise DomainError(f"cannot read config file {config_file}: {error}")
        try:
            data = json.loads(content)
        except json.JSONDecodeError as e:
            raise DomainError(f"config file {config_file} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise DomainError(f"config file {config_file} must hold a JSON object")
        try:
            settings = cls.model_validate(data)
        except ValidationError as e:
            raise DomainError(f"invalid config file {config_file}: {e}") from e
        logger.info("Loaded settings from %s", config_file)
        return settings
