import enum
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Literal, Optional, TypeVar

import pydantic

from spingw.core.errors import InvalidInput
from spingw.core.models.validators import check_bound

if TYPE_CHECKING:
    from pydantic_core import ErrorDetails


log = logging.getLogger(__name__)

T = TypeVar("T")
ModelT = TypeVar("ModelT", bound=pydantic.BaseModel)

DEFAULT_H_MAX = 16
DEFAULT_D_MAX = 4
DEFAULT_WEIGHT_MAX = 5


def parse_user_input(to_model: Callable[[T], ModelT], input_obj: T) -> ModelT:
    """Parse user input into a model, re-raise validation errors as InvalidInput."""
    try:
        return to_model(input_obj)
    except pydantic.ValidationError as e:
        raise InvalidInput(_present_user_input_error(e)) from e


def _present_user_input_error(validation_error: pydantic.ValidationError) -> str:
    """Make a slightly nicer representation of a pydantic.ValidationError.

    Compared to pydantic's default message:
    - don't show the model name, just say "user input"
    - don't show the underlying error type (e.g. "type=value_error.const")
    """
    errors = validation_error.errors()
    n_errors = len(errors)

    def show_error(error: "ErrorDetails") -> str:
        location = " -> ".join(map(str, error["loc"]))
        message = error["msg"]

        if location:
            message = f"{location}\n  {message}"

        return message

    header = f"{n_errors} validation error{'' if n_errors == 1 else 's'} for user input"
    details = "\n".join(map(show_error, errors))
    return f"{header}\n{details}"


class OutputFormat(str, enum.Enum):
    """Rendering of computed values, reports and tables."""

    text = "text"
    json = "json"
    csv = "csv"


class Suite(str, enum.Enum):
    """Groups of identities that `verify` can check."""

    algebra = "algebra"
    partitions = "partitions"
    closed = "closed"
    sums = "sums"
    reduction = "reduction"
    trr = "trr"
    all = "all"


Command = Literal["compute", "verify", "table"]


class RunConfig(pydantic.BaseModel, extra="forbid"):
    """Settings of a single CLI invocation."""

    command: Command
    registry_path: Optional[Path] = None
    output_format: OutputFormat = OutputFormat.text
    h_max: int = DEFAULT_H_MAX
    d_max: int = DEFAULT_D_MAX
    weight_max: int = DEFAULT_WEIGHT_MAX

    @pydantic.field_validator("h_max", "d_max", "weight_max")
    @classmethod
    def _bound_is_positive(cls, value: int) -> int:
        return check_bound(value)

    @pydantic.field_validator("registry_path")
    @classmethod
    def _registry_is_file(cls, path: Optional[Path]) -> Optional[Path]:
        if path is not None and not path.is_file():
            raise ValueError(f"registry file does not exist: {path}")
        return path
