from typing import Iterator

import pytest

import spingw.core.config as config


@pytest.fixture(autouse=True)
def default_config() -> Iterator[None]:
    """Start every test from the built-in configuration."""
    config.config = None
    yield
    config.config = None
