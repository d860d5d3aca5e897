import textwrap
from typing import ClassVar, Optional

from spingw import APP_NAME

_argument_not_specified = "__argument_not_specified__"


class BaseError(Exception):
    """Root of the error hierarchy. Don't raise this directly, use more specific error types."""

    is_invalid_usage: ClassVar[bool] = False
    default_solution: ClassVar[Optional[str]] = None

    def __init__(
        self,
        reason: str,
        *,
        solution: Optional[str] = _argument_not_specified,
        docs: Optional[str] = None,
    ) -> None:
        """Initialize BaseError.

        :param reason: explain what went wrong
        :param solution: politely suggest a potential solution to the user
        :param docs: include a link to relevant documentation (if there is any)
        """
        super().__init__(reason)
        if solution == _argument_not_specified:
            self.solution = self.default_solution
        else:
            self.solution = solution
        self.docs = docs

    def friendly_msg(self) -> str:
        """Return the user-friendly representation of this error."""
        msg = str(self)
        if self.solution:
            msg += f"\n{textwrap.indent(self.solution, prefix='  ')}"
        if self.docs:
            msg += f"\n  Docs: {self.docs}"
        return msg


class UsageError(BaseError):
    """Generic error for "the application was used incorrectly." Prefer more specific errors."""

    is_invalid_usage: ClassVar[bool] = True


class InvalidInput(UsageError):
    """User input was invalid."""


class UnexpectedFormat(UsageError):
    """Failed to parse a serialized value (a key, a partition, a rational, a registry file)."""

    default_solution = (
        "Please check the format of the value.\n"
        f"Run '{APP_NAME} --help' for the accepted notations."
    )


class HypothesisViolation(UsageError):
    """A sum formula or recursion was applied outside the hypothesis it is stated under."""


class UnsupportedKey(UsageError):
    """An invariant key has a shape that the requested rewrite rule does not cover."""


class MissingRegistryEntry(UsageError):
    """An invariant needed by an evaluation has no closed form and is absent from the registry."""

    def __init__(
        self,
        key: str,
        *,
        solution: Optional[str] = _argument_not_specified,
        docs: Optional[str] = None,
    ) -> None:
        """Initialize a MissingRegistryEntry.

        :param key: canonical serialization of the first absent invariant
        :param solution: politely suggest a potential solution to the user
        :param docs: include a link to relevant documentation (if there is any)
        """
        self.key = key
        super().__init__(f"No value known for {key}", solution=solution, docs=docs)

    default_solution = (
        "Add the invariant to a registry file (JSON object of canonical key -> 'p/q')\n"
        "and pass it with --registry or the SPINGW_REGISTRY environment variable."
    )


class VerificationFailed(BaseError):
    """At least one checked identity did not hold exactly."""

    default_solution = (
        "The report above names the identity and the first counterexample.\n"
        "If the inputs come from a registry file, check the offending entry."
    )


class InconsistentRecurrence(BaseError):
    """A value computed by recurrence disagreed with the closed form it must reproduce."""

    default_solution = textwrap.dedent(
        f"""
        This indicates a bug in {APP_NAME}, please report it together with the
        command that triggered it.
        """
    ).strip()
