"""Runtime settings: size guards, budgets and parallelism."""

from __future__ import annotations

from functools import lru_cache
from logging import getLogger
from os import environ
from typing import Any, Final, Self

from pydantic import BaseModel, ConfigDict, Field

LOGGER = getLogger(__name__)

ENV_PREFIX: Final[str] = "FORBCFG_"


class Settings(BaseModel):
    """Guards and defaults shared by every search in the package."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    threads: int = Field(default=1, ge=1)
    forb_exact_max_columns: int = Field(default=2**20, ge=1)
    valid_columns_max_rows: int = Field(default=24, ge=0)
    forb_from_choice_max_m: int = Field(default=12, ge=0)
    max_choices: int = Field(default=10**7, ge=1)
    h_exact_max_m: int = Field(default=6, ge=1)
    default_node_budget: int | None = Field(default=None, ge=1)
    float_tie_tolerance: float = Field(default=1e-9, gt=0)

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> Self:
        """Build the settings from `FORBCFG_*` environment variables.

        Args:
            env (dict[str, str], optional): the mapping to read from, defaults to
                `os.environ`

        Returns:
            Settings: validated settings; unset variables keep their defaults
        """
        env = dict(environ) if env is None else env

        values: dict[str, Any] = {}
        for field_name in cls.model_fields:
            if (raw := env.get(f"{ENV_PREFIX}{field_name.upper()}")) is not None:
                values[field_name] = None if raw.lower() in {"", "none"} else raw

        if values:
            LOGGER.debug("Settings overridden from environment: %s", sorted(values))

        return cls.model_validate(values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the process-wide settings, read once from the environment."""
    return Settings.from_env()
