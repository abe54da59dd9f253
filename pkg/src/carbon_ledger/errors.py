"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CarbonLedgerError(Exception):
    """Base class for all library errors."""


class UnknownHardware(CarbonLedgerError, KeyError):
    def __init__(self, hw_id: str):
        self.hw_id = hw_id
        super().__init__(hw_id)

    def __str__(self) -> str:
        return f"unknown hardware id: {self.hw_id!r}"


class ParseError(CarbonLedgerError, ValueError):
    """A file could not be parsed. ``line`` and ``field`` locate the problem when known."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class ValidationError(CarbonLedgerError, ValueError):
    """One or more values violate an invariant.

    ``problems`` holds ``(row, field, message)`` triples; ``row`` is ``None``
    for errors that are not tied to a file row.
    """

    def __init__(self, problems: list[tuple[int | None, str | None, str]] | str):
        if isinstance(problems, str):
            problems = [(None, None, problems)]
        self.problems = list(problems)
        super().__init__("; ".join(format_problem(p) for p in self.problems))


def format_problem(problem: tuple[int | None, str | None, str]) -> str:
    row, field, message = problem
    parts = []
    if row is not None:
        parts.append(f"row {row}")
    if field is not None:
        parts.append(f"field {field!r}")
    return f"{', '.join(parts)}: {message}" if parts else message


class DuplicateName(ValidationError):
    def __init__(self, name: str, rows: tuple[int | None, int | None] = (None, None)):
        self.name = name
        first, second = rows
        msg = f"duplicate model name {name!r}"
        if first is not None:
            msg += f" (first seen on row {first})"
        super().__init__([(second, "name", msg)])


class MissingField(CarbonLedgerError, ValueError):
    def __init__(self, field: str, record: str | None = None):
        self.field = field
        self.record = record
        owner = f" on record {record!r}" if record else ""
        super().__init__(f"missing required field {field!r}{owner}")


class NegativeDuration(CarbonLedgerError, ValueError):
    pass


class NonPositiveFlops(CarbonLedgerError, ValueError):
    pass


class InvalidRange(CarbonLedgerError, ValueError):
    pass
