import logging
from itertools import groupby
from typing import Optional

import pydantic

log = logging.getLogger(__name__)

# combos and values are exported as {symbol: "p/q"}, never as JSON numbers
RenderedCombo = dict[str, str]


class TraceStepModel(pydantic.BaseModel):
    """One rewrite rule application."""

    rule: str
    before: RenderedCombo
    after: RenderedCombo


class ReductionTraceModel(pydantic.RootModel[list[TraceStepModel]]):
    """Exported reduction trace, a JSON array of {rule, before, after}."""


class IdentityCheck(pydantic.BaseModel):
    """The outcome of checking one instance of an identity."""

    identity: str
    description: str
    instance: str
    holds: bool
    detail: Optional[str] = None


class VerificationReport(pydantic.BaseModel):
    """All checks run by a verification suite, in a deterministic order."""

    suites: list[str]
    checks: list[IdentityCheck]

    @property
    def passed(self) -> bool:
        return all(check.holds for check in self.checks)

    @property
    def failures(self) -> list[IdentityCheck]:
        return [check for check in self.checks if not check.holds]

    def render_text(self) -> str:
        """One line per identity, every failed instance, then the verdict."""
        lines = []
        for identity, group in groupby(self.checks, key=lambda check: check.identity):
            checks = list(group)
            held = sum(check.holds for check in checks)
            status = "PASS" if held == len(checks) else "FAIL"
            lines.append(f"{status} {identity}: {held}/{len(checks)} ({checks[0].description})")
            for check in checks:
                if not check.holds:
                    detail = f": {check.detail}" if check.detail else ""
                    lines.append(f"  counterexample {check.instance}{detail}")

        if self.passed:
            lines.append(f"PASS, {len(self.checks)} identities")
        else:
            lines.append(f"FAIL, {len(self.failures)} of {len(self.checks)} identities failed")
        return "\n".join(lines)


class TableRow(pydantic.BaseModel):
    """A computed value at genus h, parity p and degree d."""

    h: int
    p: str
    d: int
    value: str

    def csv_line(self) -> str:
        return f"{self.h},{self.p},{self.d},{self.value}"
