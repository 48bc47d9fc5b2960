"""Exception types raised across the engine, one per failure contract."""

from __future__ import annotations


class RdoltError(Exception):
    """Base class for every engine error."""


class ConfigError(RdoltError):
    """Run configuration failed validation."""


# --- score vectors ---------------------------------------------------------

class OutOfRangeError(RdoltError):
    """A score component lies outside [0, 10]."""


class TotalMismatchError(RdoltError):
    """A score vector's total does not equal the sum of its components."""


# --- backend ---------------------------------------------------------------

class TransportError(RdoltError):
    """Endpoint unreachable after exhausting retries."""


class BadStatusError(RdoltError):
    """Endpoint replied with a non-success HTTP status."""

    def __init__(self, status: int, body: str = ""):
        super().__init__(f"backend returned status {status}")
        self.status = status
        self.body = body


class EmptyResponseError(RdoltError):
    """Endpoint replied with empty assistant text."""


class ExhaustedError(RdoltError):
    """A scripted backend ran past the end of its script."""


# --- decomposition ---------------------------------------------------------

class MissingTierError(RdoltError):
    """A decomposition response lacks one of the three tier sections."""

    def __init__(self, tier):
        super().__init__(f"decomposition response missing tier {tier}")
        self.tier = tier


class EmptyDescriptionError(RdoltError):
    """A tier section is present but its description is empty."""

    def __init__(self, tier):
        super().__init__(f"decomposition has empty description for tier {tier}")
        self.tier = tier


class DecompositionFailedError(RdoltError):
    """Decomposition could not be parsed after all corrective retries."""


# --- thought generation ----------------------------------------------------

class WrongCountError(RdoltError):
    """A generation response did not contain the requested number of thoughts."""

    def __init__(self, found: int, expected: int):
        super().__init__(f"expected {expected} thoughts, found {found}")
        self.found = found
        self.expected = expected


class EmptyThoughtError(RdoltError):
    """A thought line carries no text."""

    def __init__(self, ordinal: int):
        super().__init__(f"thought {ordinal} is empty")
        self.ordinal = ordinal


class GenerationFailedError(RdoltError):
    """Thought generation could not be parsed after all corrective retries."""


# --- scoring ---------------------------------------------------------------

class ScoreParseFailedError(RdoltError):
    """A scoring response could not be parsed after all corrective retries."""


class ScoringTimeoutError(RdoltError):
    """No human score submission arrived before the timeout."""


class SessionClosedError(RdoltError):
    """The human scoring session was closed while a round was pending."""


class UnscoredError(RdoltError):
    """Selection was attempted on a thought that has no scores."""


# --- knowledge propagation -------------------------------------------------

class OutOfOrderError(RdoltError):
    """A round outcome was recorded out of (tier, round) order."""


# --- answers and grading ---------------------------------------------------

class NoAnswerError(RdoltError):
    """No final answer line and no selected final thought to fall back on."""


class NotNumericError(RdoltError):
    """Numeric normalization found no number in the text."""


class UngradableError(RdoltError):
    """The run produced no answer that can be graded."""


class MalformedError(RdoltError):
    """A dataset file entry is missing required fields or unparseable."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class IoFailureError(RdoltError):
    """Persisting a run record failed."""
