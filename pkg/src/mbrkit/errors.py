"""Exception hierarchy shared across the toolkit.

Every exception carries the process exit code the CLI maps it to:
1 for bad inputs or configuration, 2 for failures of external
processes (hooks, scorer endpoints) and I/O.
"""


class MbrkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ValidationError(MbrkitError):
    """A value violates an invariant (bad score, bad id, bad range)."""


class FormatError(MbrkitError):
    """A file does not parse under its declared format."""


class EncodingError(FormatError):
    """Input bytes are not valid UTF-8."""


class AlignmentError(MbrkitError):
    """Two parallel resources disagree on length or segment coverage."""


class ConfigError(MbrkitError):
    """Missing or contradictory configuration."""


class HookError(MbrkitError):
    """An external trainer or translator process failed."""

    exit_code = 2


class TransportError(MbrkitError):
    """A scorer endpoint died, hung, or closed its stream mid-batch."""

    exit_code = 2


class ProtocolError(TransportError):
    """A scorer endpoint sent bytes that violate the wire protocol."""


class StartupError(TransportError):
    """A scorer endpoint failed before completing its handshake."""
