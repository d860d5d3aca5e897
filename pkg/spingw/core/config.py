import logging
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, field_validator

from spingw.core.models.input import (
    DEFAULT_D_MAX,
    DEFAULT_H_MAX,
    DEFAULT_WEIGHT_MAX,
    parse_user_input,
)
from spingw.core.models.validators import check_bound

log = logging.getLogger(__name__)
config: Optional["Config"] = None


class Config(BaseModel, extra="forbid"):
    """Singleton that provides default configuration for the application process."""

    h_max: int = DEFAULT_H_MAX
    d_max: int = DEFAULT_D_MAX
    weight_max: int = DEFAULT_WEIGHT_MAX

    # highest degree kept by truncated generating series
    truncation_order: int = 12

    # worker threads used by verification sweeps
    concurrency_limit: int = 5

    # property sweeps over random rationals and combos
    random_seed: int = 0
    random_samples: int = 200

    @field_validator("h_max", "d_max", "weight_max", "truncation_order", "concurrency_limit")
    @classmethod
    def _positive(cls, value: int) -> int:
        return check_bound(value)


def get_config() -> Config:
    """Get the configuration singleton."""
    global config

    if not config:
        config = Config()

    return config


def set_config(path: Path) -> None:
    """Set global config variable using input from file."""
    global config

    config = parse_user_input(Config.model_validate, yaml.safe_load(path.read_text()))
    log.debug("Loaded configuration from %s", path)
