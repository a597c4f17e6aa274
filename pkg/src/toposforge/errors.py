"""Error and verdict types shared by every module.

Validators raise ValidationFailure with a stable machine-readable code and
a witness pinpointing the first violated law (first in canonical order, so
failures are reproducible).  Checks that answer a yes/no question return a
Verdict instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass


class ToposforgeError(Exception):
    """Base class for everything raised on purpose by this package."""


class ValidationFailure(ToposforgeError):
    """A structural law failed.  code is stable, witness is data."""

    def __init__(self, code: str, message: str, witness=None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.witness = witness


@dataclass(frozen=True)
class Verdict:
    """Outcome of a decidable check: truthiness plus an optional witness."""

    ok: bool
    code: str | None = None
    witness: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def holds(detail: str = "") -> Verdict:
    return Verdict(True, detail=detail)


def fails(code: str, witness=None, detail: str = "") -> Verdict:
    return Verdict(False, code, witness, detail)
