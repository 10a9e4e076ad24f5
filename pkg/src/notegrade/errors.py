"""Exception taxonomy.

The split matters operationally: model-side failures (bad predictions) must
never escape as exceptions from scoring, while benchmark-side failures
(corrupt ground truth, bad manifests, bad config) must abort loudly.
"""

from __future__ import annotations


class NotegradeError(Exception):
    """Base class for all errors raised by this package."""


class PitchError(NotegradeError):
    """Pitch arithmetic left its valid domain (bad degree, MIDI out of 0-127)."""


class ParseError(NotegradeError):
    """Notation text rejected by a parser.

    Carries an optional location and a stable rule id so validators can
    report machine-readable violations.
    """

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, rule_id: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.rule_id = rule_id

    def __str__(self) -> str:
        loc = ""
        if self.line is not None:
            loc = f" (line {self.line}" + (
                f", col {self.column})" if self.column is not None else ")")
        return self.message + loc


class SchemaError(NotegradeError):
    """Ground-truth, manifest, or external-score file violates its schema.

    This is a benchmark-integrity failure, never a model failure.
    """


class ConfigError(NotegradeError):
    """Invalid weights, grid, tuning, or other configuration."""
