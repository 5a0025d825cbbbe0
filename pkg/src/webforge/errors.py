"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class WebforgeError(Exception):
    """Base class for every error raised by this package."""


# --- model gateway ---------------------------------------------------------


class GatewayError(WebforgeError):
    """Base class for failures while talking to (or replaying) a model."""


class ProviderUnreachable(GatewayError):
    """Transport to the provider failed even after retries."""


class CassetteMiss(GatewayError):
    """Replay mode saw a request whose fingerprint is not in the cassette."""

    def __init__(self, fingerprint: str):
        super().__init__(f"no cassette entry for fingerprint {fingerprint}")
        self.fingerprint = fingerprint


class MalformedAfterRetries(GatewayError):
    """The model never produced a reply matching the declared grammar.

    Carries every raw attempt so the caller can diagnose what the model
    actually said.
    """

    def __init__(self, grammar: str, attempts: list[str]):
        super().__init__(
            f"reply did not match grammar {grammar!r} after {len(attempts)} attempt(s)"
        )
        self.grammar = grammar
        self.attempts = attempts


# --- workspace -------------------------------------------------------------


class WorkspaceError(WebforgeError):
    pass


class TemplateNotFound(WorkspaceError):
    def __init__(self, template_id: str):
        super().__init__(f"template {template_id!r} not in the local store")
        self.template_id = template_id


class DestinationNotEmpty(WorkspaceError):
    pass


class PathEscapeError(WorkspaceError):
    """A path would resolve outside the workspace root."""


class EmptyBufferError(WorkspaceError):
    """The context buffer holds no files, so no context can be rendered."""


class DiffParseError(WorkspaceError):
    """Unified-diff text could not be parsed into hunks."""


class DiffContextMismatchError(WorkspaceError):
    """A hunk's context or removal lines disagree with the file content."""


class InterchangeError(WebforgeError):
    """A suite/report document violates the interchange schema."""


class UnknownSchemaVersion(InterchangeError):
    def __init__(self, version: object):
        super().__init__(f"unsupported interchange schema version: {version!r}")
        self.version = version


# --- test generation -------------------------------------------------------


class EmptyDecomposition(WebforgeError):
    """The model returned zero requirements for a request."""


class SuiteStageError(WebforgeError):
    """A suite-generation stage failed; names the stage for diagnostics."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"suite generation failed at stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause


# --- app launching and browser driving -------------------------------------


class LaunchError(WebforgeError):
    """Launching the application failed. Carries the failed instance."""

    def __init__(self, message: str, instance=None):
        super().__init__(message)
        self.instance = instance


class ProbeTimeout(LaunchError):
    pass


class ProcessExited(LaunchError):
    pass


class DriverError(WebforgeError):
    pass


class NavigationError(DriverError):
    pass


class ElementNotFoundError(DriverError):
    pass


# --- evaluation ------------------------------------------------------------


class ZeroTotal(WebforgeError):
    """Accuracy is undefined over zero test cases."""


class UnlabeledTest(WebforgeError):
    """A test row is missing one of its category labels."""


class EmptyReport(WebforgeError):
    """No records were supplied to the report builder."""


class ScoreParseError(WebforgeError):
    """No numeric score could be extracted from a judge reply."""
